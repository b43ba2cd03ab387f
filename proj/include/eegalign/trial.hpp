#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eegalign {

enum class TrialKind { Task, Resting };
enum class TaskKind { MI, ERP };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

/// One epoch of multichannel data: rows are channels, columns are samples.
struct Trial {
    Eigen::MatrixXd data;
    double fs = 0.0;
    std::optional<int> label;
    std::string subject;
    TrialKind kind = TrialKind::Task;

    Eigen::Index n_channels() const noexcept { return data.rows(); }
    Eigen::Index n_samples() const noexcept { return data.cols(); }

    bool operator==(const Trial& other) const;
};

/// Throws Error(InvalidArgument / NonFinite) if the trial is empty, has a
/// non-positive rate or contains NaN/Inf.
void validate(const Trial& trial);

struct SubjectRecord {
    std::string id;
    std::vector<Trial> trials;   // order is significant
    std::vector<Trial> resting;  // may be empty
    std::vector<std::string> channel_names;

    bool operator==(const SubjectRecord& other) const = default;
};

/// All trials and resting epochs share the channel count and rate.
void validate(const SubjectRecord& record);

struct Dataset {
    std::vector<SubjectRecord> subjects;
    std::map<int, std::string> label_map;
    TaskKind task_kind = TaskKind::MI;

    bool operator==(const Dataset& other) const = default;

    const SubjectRecord& subject(const std::string& id) const;
};

void validate(const Dataset& dataset);

/// Checks the cross-subject requirements (>= 2 subjects, >= 2 classes).
void validate_for_transfer(const Dataset& dataset);

/// Labels of the given trials; throws if any trial is unlabeled.
std::vector<int> labels_of(std::span<const Trial> trials);

/// Copies of the trials with labels removed.
std::vector<Trial> without_labels(std::span<const Trial> trials);

/// Sorted distinct labels present among the trials.
std::vector<int> classes_of(std::span<const int> labels);

}  // namespace eegalign
