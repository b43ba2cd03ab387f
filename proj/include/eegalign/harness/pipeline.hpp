#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegalign/alignment.hpp"
#include "eegalign/models/csp.hpp"
#include "eegalign/models/lda.hpp"
#include "eegalign/models/mdrm.hpp"
#include "eegalign/models/pca.hpp"
#include "eegalign/models/svm.hpp"
#include "eegalign/models/xdawn.hpp"
#include "eegalign/trial.hpp"

namespace eegalign::harness {

enum class AlignmentKind { None, EA, RA };
enum class ModelChain { MDRM, CspLda, XdawnPcaSvm, PcaSvm };

std::string to_string(AlignmentKind kind);
std::string to_string(ModelChain chain);
AlignmentKind alignment_from_string(const std::string& s);
ModelChain model_chain_from_string(const std::string& s);

struct PipelineSpec {
    std::string name;  // empty: derived from the other fields
    AlignmentKind alignment = AlignmentKind::None;
    std::optional<align::ReferenceKind> reference;  // default: EI for EA; RR (MI) or RI (ERP) for RA
    ModelChain model = ModelChain::CspLda;
    int csp_filters = 6;
    int xdawn_components = 4;
    int pca_features = 20;
    std::optional<double> svm_C;  // unset: nested cross-validation over 2^-3..2^5
    int cv_folds = 5;
    std::optional<double> shrinkage;  // unset: automatic
    spd::MeanOptions mean_options;
};

/// e.g. "EA-CSP-LDA", "RA-MDRM", "xDAWN-SVM", "EA-SVM".
std::string pipeline_name(const PipelineSpec& spec);

/// RA consumes covariances and only pairs with MDRM.
void validate(const PipelineSpec& spec, TaskKind task);

align::ReferenceKind resolved_reference(const PipelineSpec& spec, TaskKind task);

/// Wall-clock totals per named stage ("alignment", "fit", "predict").
struct StageStat {
    long count = 0;
    double total_s = 0.0;
};
using StageTimes = std::map<std::string, StageStat>;

void merge_into(StageTimes& into, const StageTimes& from);

class ScopedStage {
public:
    ScopedStage(StageTimes& times, std::string stage);
    ~ScopedStage();
    ScopedStage(const ScopedStage&) = delete;
    ScopedStage& operator=(const ScopedStage&) = delete;

private:
    StageTimes& times_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

/// What a protocol may use from one subject when building its reference and,
/// for ERP covariance models, its evoked template.
struct SubjectContext {
    std::vector<Trial> reference_trials;  // task trials, labels stripped
    std::vector<Trial> resting;
    std::vector<Trial> labeled;           // trials whose labels may be read
};

/// Trials in model input space: aligned trials for trial-based chains,
/// (aligned) covariances for MDRM.
struct PreparedTrials {
    std::vector<Trial> trials;
    std::vector<spd::SPDMatrix> covs;

    std::size_t size() const noexcept { return std::max(trials.size(), covs.size()); }
    void append(PreparedTrials&& other);
};

/// Optional state carried between calls for one subject (incremental EA
/// references in the online protocol).
struct AlignmentState {
    std::optional<align::ReferenceMatrix> ea_reference;
    std::size_t ea_reference_count = 0;
};

/// Counted fallbacks, e.g. when no target trial is available for a template.
using Notes = std::map<std::string, int>;

/// Transforms `trials` (labels are ignored) into model input space using only
/// what `ctx` exposes. `fallback_template` is used for ERP covariance models
/// when ctx holds no labeled target trial.
PreparedTrials prepare(const PipelineSpec& spec, TaskKind task, const SubjectContext& ctx,
                       std::span<const Trial> trials, int target_class, StageTimes& times, Notes& notes,
                       AlignmentState* state = nullptr,
                       const std::optional<Trial>& fallback_template = std::nullopt);

/// Evoked template from the labeled targets in ctx, if any.
std::optional<Trial> subject_template(const SubjectContext& ctx, int target_class);

int target_class(const Dataset& dataset);

struct FittedPipeline {
    ModelChain chain = ModelChain::CspLda;
    std::optional<models::MDRMModel> mdrm;
    std::optional<models::CSPFilters> csp;
    std::optional<models::LDAModel> lda;
    std::optional<models::XDawnFilters> xdawn;
    std::optional<models::PCAModel> pca;
    std::optional<models::LinearMarginModel> svm;
    std::optional<models::SelectCResult> c_selection;
};

FittedPipeline fit(const PipelineSpec& spec, const PreparedTrials& train, std::span<const int> labels,
                   int target_class, std::uint64_t seed, StageTimes& times);

std::vector<int> predict(const FittedPipeline& model, const PreparedTrials& test, StageTimes& times);

/// Accuracy for MI, balanced accuracy for ERP.
double score(TaskKind task, std::span<const int> predictions, std::span<const int> labels);
std::string metric_name(TaskKind task);

}  // namespace eegalign::harness
