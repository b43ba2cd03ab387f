#include "eegalign/harness/pipeline.hpp"

#include <algorithm>

#include "eegalign/error.hpp"
#include "eegalign/harness/metrics.hpp"
#include "eegalign/preprocess.hpp"

namespace eegalign::harness {
namespace {

using align::ReferenceKind;
using align::ReferenceMatrix;

std::optional<align::ShrinkageParam> shrink_of(const PipelineSpec& spec)
{
    if (spec.shrinkage)
        return align::ShrinkageParam(*spec.shrinkage);
    return std::nullopt;
}

ReferenceMatrix ea_reference(const PipelineSpec& spec, ReferenceKind kind, const SubjectContext& ctx,
                             AlignmentState* state)
{
    const auto shrink = shrink_of(spec);
    if (align::uses_resting(kind)) {
        if (ctx.resting.empty())
            throw Error(ErrorKind::InvalidArgument, align::to_string(kind) + " reference needs resting epochs");
        return align::build_reference(ctx.resting, kind, shrink, spec.mean_options);
    }
    if (ctx.reference_trials.empty())
        throw Error(ErrorKind::InvalidArgument, "no trials available to estimate the reference");

    if (kind == ReferenceKind::EI && state != nullptr && state->ea_reference
        && state->ea_reference_count <= ctx.reference_trials.size()) {
        const auto fresh = std::span(ctx.reference_trials).subspan(state->ea_reference_count);
        state->ea_reference = align::incremental_reference(*state->ea_reference, fresh);
        state->ea_reference_count = ctx.reference_trials.size();
        return *state->ea_reference;
    }
    auto ref = align::build_reference(ctx.reference_trials, kind, shrink, spec.mean_options);
    if (kind == ReferenceKind::EI && state != nullptr) {
        state->ea_reference = ref;
        state->ea_reference_count = ctx.reference_trials.size();
    }
    return ref;
}

// A template built from a single target equals that trial, so its augmented
// covariance is singular; with automatic shrinkage such trials get 0.01.
std::vector<spd::SPDMatrix> model_covariances(TaskKind task, std::span<const Trial> trials,
                                              const std::optional<Trial>& tpl,
                                              std::optional<align::ShrinkageParam> shrink, Notes& notes)
{
    if (task == TaskKind::MI)
        return align::covariances(trials, shrink);
    std::vector<spd::SPDMatrix> out;
    out.reserve(trials.size());
    for (const auto& t : trials) {
        const Trial aug = preprocess::augment_erp(t, *tpl);
        try {
            out.push_back(align::covariance(aug, shrink));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotPositiveDefinite || shrink)
                throw;
            out.push_back(align::covariance(aug, align::ShrinkageParam(0.01)));
            ++notes["augmented_covariance_shrunk"];
        }
    }
    return out;
}

int largest_label(std::span<const int> labels)
{
    return *std::max_element(labels.begin(), labels.end());
}

}  // namespace

std::string to_string(AlignmentKind kind)
{
    switch (kind) {
    case AlignmentKind::None: return "none";
    case AlignmentKind::EA: return "EA";
    case AlignmentKind::RA: return "RA";
    }
    return "?";
}

std::string to_string(ModelChain chain)
{
    switch (chain) {
    case ModelChain::MDRM: return "MDRM";
    case ModelChain::CspLda: return "CSP-LDA";
    case ModelChain::XdawnPcaSvm: return "xDAWN-PCA-SVM";
    case ModelChain::PcaSvm: return "PCA-SVM";
    }
    return "?";
}

AlignmentKind alignment_from_string(const std::string& s)
{
    if (s == "none") return AlignmentKind::None;
    if (s == "EA") return AlignmentKind::EA;
    if (s == "RA") return AlignmentKind::RA;
    throw Error(ErrorKind::Config, "unknown alignment '" + s + "' (expected none, EA or RA)");
}

ModelChain model_chain_from_string(const std::string& s)
{
    if (s == "MDRM") return ModelChain::MDRM;
    if (s == "CSP-LDA") return ModelChain::CspLda;
    if (s == "xDAWN-PCA-SVM") return ModelChain::XdawnPcaSvm;
    if (s == "PCA-SVM") return ModelChain::PcaSvm;
    throw Error(ErrorKind::Config,
                "unknown model chain '" + s + "' (expected MDRM, CSP-LDA, xDAWN-PCA-SVM or PCA-SVM)");
}

std::string pipeline_name(const PipelineSpec& spec)
{
    if (!spec.name.empty())
        return spec.name;
    std::string model;
    switch (spec.model) {
    case ModelChain::MDRM: model = "MDRM"; break;
    case ModelChain::CspLda: model = "CSP-LDA"; break;
    case ModelChain::XdawnPcaSvm: model = "xDAWN-SVM"; break;
    case ModelChain::PcaSvm: model = "SVM"; break;
    }
    if (spec.alignment == AlignmentKind::None)
        return model;
    std::string prefix = to_string(spec.alignment);
    if (spec.reference)
        prefix += "(" + align::to_string(*spec.reference) + ")";
    return prefix + "-" + model;
}

void validate(const PipelineSpec& spec, TaskKind task)
{
    if (spec.alignment == AlignmentKind::RA && spec.model != ModelChain::MDRM)
        throw Error(ErrorKind::Config, "RA aligns covariance matrices and only pairs with MDRM");
    if (spec.alignment == AlignmentKind::RA && task == TaskKind::ERP && spec.reference
        && align::uses_resting(*spec.reference))
        throw Error(ErrorKind::Config, "RA on ERP data uses non-target trials; choose RI or EI");
    if (spec.csp_filters < 2 || spec.csp_filters % 2 != 0)
        throw Error(ErrorKind::Config, "csp_filters must be even and >= 2");
    if (spec.xdawn_components < 1 || spec.pca_features < 1)
        throw Error(ErrorKind::Config, "xdawn_components and pca_features must be >= 1");
    if (spec.svm_C && !(*spec.svm_C > 0.0))
        throw Error(ErrorKind::Config, "svm_C must be positive");
    if (spec.cv_folds < 2)
        throw Error(ErrorKind::Config, "cv_folds must be >= 2");
    if (spec.shrinkage)
        align::ShrinkageParam check(*spec.shrinkage);
    if (!(spec.mean_options.tol > 0.0) || spec.mean_options.max_iter < 1)
        throw Error(ErrorKind::Config, "mean tolerance must be > 0 and max_iter >= 1");
}

align::ReferenceKind resolved_reference(const PipelineSpec& spec, TaskKind task)
{
    if (spec.reference)
        return *spec.reference;
    if (spec.alignment == AlignmentKind::RA)
        return task == TaskKind::MI ? ReferenceKind::RR : ReferenceKind::RI;
    return ReferenceKind::EI;
}

void merge_into(StageTimes& into, const StageTimes& from)
{
    for (const auto& [stage, stat] : from) {
        into[stage].count += stat.count;
        into[stage].total_s += stat.total_s;
    }
}

ScopedStage::ScopedStage(StageTimes& times, std::string stage)
    : times_(times), stage_(std::move(stage)), start_(std::chrono::steady_clock::now())
{
}

ScopedStage::~ScopedStage()
{
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    auto& stat = times_[stage_];
    ++stat.count;
    stat.total_s += elapsed.count();
}

void PreparedTrials::append(PreparedTrials&& other)
{
    trials.insert(trials.end(), std::make_move_iterator(other.trials.begin()),
                  std::make_move_iterator(other.trials.end()));
    covs.insert(covs.end(), std::make_move_iterator(other.covs.begin()), std::make_move_iterator(other.covs.end()));
}

std::optional<Trial> subject_template(const SubjectContext& ctx, int target)
{
    std::vector<Trial> targets;
    for (const auto& t : ctx.labeled)
        if (t.label && *t.label == target)
            targets.push_back(t);
    if (targets.empty())
        return std::nullopt;
    return preprocess::erp_template(targets);
}

int target_class(const Dataset& dataset)
{
    for (const auto& [id, name] : dataset.label_map)
        if (name == "target")
            return id;
    std::vector<int> labels;
    for (const auto& s : dataset.subjects)
        for (const auto& t : s.trials)
            if (t.label)
                labels.push_back(*t.label);
    if (labels.empty())
        throw Error(ErrorKind::MissingClass, "dataset has no labeled trials");
    return largest_label(labels);
}

PreparedTrials prepare(const PipelineSpec& spec, TaskKind task, const SubjectContext& ctx,
                       std::span<const Trial> trials, int target, StageTimes& times, Notes& notes,
                       AlignmentState* state,
                       const std::optional<Trial>& fallback_template)
{
    const auto shrink = shrink_of(spec);
    const auto kind = resolved_reference(spec, task);
    std::vector<Trial> working = without_labels(trials);
    std::vector<Trial> labeled = ctx.labeled;

    PreparedTrials out;
    ScopedStage stage(times, "alignment");
    if (spec.alignment == AlignmentKind::EA) {
        const auto ref = ea_reference(spec, kind, ctx, state);
        if (!ref.converged)
            ++notes["reference_mean_not_converged"];
        working = align::ea_align(working, ref);
        if (spec.model == ModelChain::MDRM && task == TaskKind::ERP)
            labeled = align::ea_align(labeled, ref);
    }
    if (spec.model != ModelChain::MDRM) {
        out.trials = std::move(working);
        return out;
    }

    std::optional<Trial> tpl;
    if (task == TaskKind::ERP) {
        tpl = subject_template(SubjectContext{{}, {}, labeled}, target);
        if (!tpl) {
            if (!fallback_template)
                throw Error(ErrorKind::InvalidArgument,
                            "MDRM on ERP data needs labeled target trials from every subject to build "
                            "its evoked template");
            tpl = fallback_template;
            ++notes["template_from_auxiliary_subjects"];
        }
    }

    out.covs = model_covariances(task, working, tpl, shrink, notes);

    if (spec.alignment == AlignmentKind::RA) {
        std::vector<spd::SPDMatrix> ref_covs;
        if (task == TaskKind::MI) {
            if (align::uses_resting(kind)) {
                if (ctx.resting.empty())
                    throw Error(ErrorKind::InvalidArgument, "RA with " + align::to_string(kind)
                                                                + " reference needs resting epochs");
                ref_covs = align::covariances(ctx.resting, shrink);
            } else {
                if (ctx.reference_trials.empty())
                    throw Error(ErrorKind::InvalidArgument, "no trials available to estimate the reference");
                ref_covs = align::covariances(ctx.reference_trials, shrink);
            }
        } else {
            if (labeled.empty())
                throw Error(ErrorKind::InvalidArgument,
                            "RA on ERP data needs labeled non-target trials from every subject");
            std::vector<Trial> non_targets;
            for (const auto& t : labeled)
                if (t.label && *t.label != target)
                    non_targets.push_back(t);
            if (non_targets.empty()) {
                non_targets = labeled;
                ++notes["reference_from_all_labeled_trials"];
            }
            ref_covs = model_covariances(task, non_targets, tpl, shrink, notes);
        }
        const auto ref = align::reference_from_covariances(ref_covs, kind, spec.mean_options);
        if (!ref.converged)
            ++notes["reference_mean_not_converged"];
        out.covs = align::ra_align(out.covs, ref);
    }
    return out;
}

FittedPipeline fit(const PipelineSpec& spec, const PreparedTrials& train, std::span<const int> labels,
                   int target, std::uint64_t seed, StageTimes& times)
{
    ScopedStage stage(times, "fit");
    FittedPipeline out;
    out.chain = spec.model;
    const auto shrink = shrink_of(spec);

    auto fit_svm = [&](const Eigen::MatrixXd& vectors) {
        out.pca = models::pca_fit(vectors, spec.pca_features);
        const Eigen::MatrixXd z = models::pca_apply(vectors, *out.pca);
        double c = 0.0;
        if (spec.svm_C) {
            c = *spec.svm_C;
        } else {
            out.c_selection = models::select_C(z, labels, seed, {}, spec.cv_folds);
            c = out.c_selection->C;
        }
        out.svm = models::svm_fit(z, labels, c);
    };

    switch (spec.model) {
    case ModelChain::MDRM:
        out.mdrm = models::mdrm_fit(train.covs, labels, spec.mean_options);
        break;
    case ModelChain::CspLda:
        out.csp = models::csp_fit(train.trials, labels, spec.csp_filters, shrink);
        out.lda = models::lda_fit(models::csp_features(train.trials, *out.csp), labels);
        break;
    case ModelChain::XdawnPcaSvm: {
        out.xdawn = models::xdawn_fit(train.trials, labels, spec.xdawn_components, target);
        std::vector<Trial> filtered;
        filtered.reserve(train.trials.size());
        for (const auto& t : train.trials)
            filtered.push_back(models::xdawn_apply(t, *out.xdawn));
        fit_svm(models::vectorize(filtered));
        break;
    }
    case ModelChain::PcaSvm:
        fit_svm(models::vectorize(train.trials));
        break;
    }
    return out;
}

std::vector<int> predict(const FittedPipeline& model, const PreparedTrials& test, StageTimes& times)
{
    ScopedStage stage(times, "predict");
    switch (model.chain) {
    case ModelChain::MDRM:
        return models::mdrm_predict(test.covs, *model.mdrm);
    case ModelChain::CspLda:
        return models::lda_predict(models::csp_features(test.trials, *model.csp), *model.lda);
    case ModelChain::XdawnPcaSvm: {
        std::vector<Trial> filtered;
        filtered.reserve(test.trials.size());
        for (const auto& t : test.trials)
            filtered.push_back(models::xdawn_apply(t, *model.xdawn));
        return models::svm_predict(models::pca_apply(models::vectorize(filtered), *model.pca), *model.svm);
    }
    case ModelChain::PcaSvm:
        return models::svm_predict(models::pca_apply(models::vectorize(test.trials), *model.pca), *model.svm);
    }
    return {};
}

double score(TaskKind task, std::span<const int> predictions, std::span<const int> labels)
{
    return task == TaskKind::MI ? accuracy(predictions, labels) : balanced_accuracy(predictions, labels);
}

std::string metric_name(TaskKind task)
{
    return task == TaskKind::MI ? "accuracy" : "bca";
}

}  // namespace eegalign::harness
