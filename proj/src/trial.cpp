#include "eegalign/trial.hpp"

#include <algorithm>
#include <set>

#include "eegalign/error.hpp"

namespace eegalign {

std::string to_string(TaskKind kind)
{
    return kind == TaskKind::MI ? "MI" : "ERP";
}

TaskKind task_kind_from_string(const std::string& s)
{
    if (s == "MI")
        return TaskKind::MI;
    if (s == "ERP")
        return TaskKind::ERP;
    throw Error(ErrorKind::Format, "unknown task kind '" + s + "'");
}

bool Trial::operator==(const Trial& other) const
{
    return data.rows() == other.data.rows() && data.cols() == other.data.cols()
        && data == other.data && fs == other.fs && label == other.label
        && subject == other.subject && kind == other.kind;
}

void validate(const Trial& trial)
{
    if (trial.n_channels() < 1 || trial.n_samples() < 1)
        throw Error(ErrorKind::InvalidArgument, "trial must have at least one channel and one sample");
    if (!(trial.fs > 0.0))
        throw Error(ErrorKind::InvalidArgument, "trial sampling rate must be positive");
    if (!trial.data.allFinite())
        throw Error(ErrorKind::NonFinite, "trial contains non-finite samples");
}

void validate(const SubjectRecord& record)
{
    std::optional<Eigen::Index> channels;
    std::optional<double> fs;
    auto check = [&](const Trial& t) {
        validate(t);
        if (!channels) {
            channels = t.n_channels();
            fs = t.fs;
        }
        if (t.n_channels() != *channels)
            throw Error(ErrorKind::DimensionMismatch,
                        "subject " + record.id + ": inconsistent channel count");
        if (t.fs != *fs)
            throw Error(ErrorKind::InvalidArgument, "subject " + record.id + ": inconsistent sampling rate");
    };
    for (const auto& t : record.trials)
        check(t);
    for (const auto& t : record.resting)
        check(t);
    if (channels && !record.channel_names.empty()
        && static_cast<Eigen::Index>(record.channel_names.size()) != *channels)
        throw Error(ErrorKind::DimensionMismatch,
                    "subject " + record.id + ": channel name count does not match data");
}

const SubjectRecord& Dataset::subject(const std::string& id) const
{
    auto it = std::find_if(subjects.begin(), subjects.end(),
                           [&](const SubjectRecord& s) { return s.id == id; });
    if (it == subjects.end())
        throw Error(ErrorKind::InvalidArgument, "no subject '" + id + "'");
    return *it;
}

void validate(const Dataset& dataset)
{
    std::set<std::string> ids;
    for (const auto& s : dataset.subjects) {
        if (!ids.insert(s.id).second)
            throw Error(ErrorKind::InvalidArgument, "duplicate subject id '" + s.id + "'");
        validate(s);
    }
}

void validate_for_transfer(const Dataset& dataset)
{
    validate(dataset);
    if (dataset.subjects.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "cross-subject evaluation needs at least 2 subjects");
    std::set<int> classes;
    for (const auto& s : dataset.subjects)
        for (const auto& t : s.trials)
            if (t.label)
                classes.insert(*t.label);
    if (classes.size() < 2)
        throw Error(ErrorKind::MissingClass, "dataset needs at least 2 classes");
}

std::vector<int> labels_of(std::span<const Trial> trials)
{
    std::vector<int> out;
    out.reserve(trials.size());
    for (const auto& t : trials) {
        if (!t.label)
            throw Error(ErrorKind::InvalidArgument, "unlabeled trial where a label is required");
        out.push_back(*t.label);
    }
    return out;
}

std::vector<Trial> without_labels(std::span<const Trial> trials)
{
    std::vector<Trial> out(trials.begin(), trials.end());
    for (auto& t : out)
        t.label.reset();
    return out;
}

std::vector<int> classes_of(std::span<const int> labels)
{
    std::vector<int> out(labels.begin(), labels.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace eegalign
