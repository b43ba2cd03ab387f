#include "eegalign/harness/protocol.hpp"

#include <atomic>
#include <exception>
#include <random>
#include <thread>

#include "eegalign/error.hpp"
#include "eegalign/harness/metrics.hpp"
#include "eegalign/preprocess.hpp"

namespace eegalign::harness {
namespace {

std::vector<Trial> pick(const std::vector<Trial>& trials, std::span<const int> idx)
{
    std::vector<Trial> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.push_back(trials[static_cast<std::size_t>(i)]);
    return out;
}

// Context an auxiliary (or offline) subject exposes: all of its trials and
// resting epochs; labels only when `with_labels`.
SubjectContext full_context(const SubjectRecord& s, bool with_labels)
{
    SubjectContext ctx;
    ctx.reference_trials = without_labels(s.trials);
    ctx.resting = s.resting;
    if (with_labels)
        ctx.labeled = s.trials;
    return ctx;
}

PreparedTrials concat_except(const std::vector<PreparedTrials>& prepared, std::size_t skip)
{
    PreparedTrials out;
    for (std::size_t s = 0; s < prepared.size(); ++s) {
        if (s == skip)
            continue;
        out.trials.insert(out.trials.end(), prepared[s].trials.begin(), prepared[s].trials.end());
        out.covs.insert(out.covs.end(), prepared[s].covs.begin(), prepared[s].covs.end());
    }
    return out;
}

std::vector<int> labels_except(const Dataset& ds, std::size_t skip)
{
    std::vector<int> out;
    for (std::size_t s = 0; s < ds.subjects.size(); ++s) {
        if (s == skip)
            continue;
        const auto l = labels_of(ds.subjects[s].trials);
        out.insert(out.end(), l.begin(), l.end());
    }
    return out;
}

Trial mean_template(const std::vector<std::optional<Trial>>& templates, std::size_t skip)
{
    std::vector<Trial> present;
    for (std::size_t s = 0; s < templates.size(); ++s)
        if (s != skip && templates[s])
            present.push_back(*templates[s]);
    if (present.empty())
        throw Error(ErrorKind::MissingClass, "no auxiliary subject has target trials for an ERP template");
    return preprocess::erp_template(present);
}

double mean_of(std::span<const double> v)
{
    double sum = 0.0;
    for (double x : v)
        sum += x;
    return sum / static_cast<double>(v.size());
}

void note_fit(const FittedPipeline& model, Notes& notes)
{
    if (model.mdrm && !model.mdrm->unconverged_classes.empty())
        notes["class_mean_not_converged"] += static_cast<int>(model.mdrm->unconverged_classes.size());
    if (model.svm && !model.svm->converged)
        ++notes["svm_not_converged"];
}

}  // namespace

void validate(const OnlineConfig& cfg)
{
    if (cfg.m < 1 || cfg.r < 1)
        throw Error(ErrorKind::Config, "online: m and r must be >= 1");
    if (cfg.first_batch < cfg.r || cfg.first_batch > cfg.m)
        throw Error(ErrorKind::Config, "online: first_batch must lie in [r, m]");
    if ((cfg.m - cfg.first_batch) % cfg.r != 0)
        throw Error(ErrorKind::Config, "online: m - first_batch must be a multiple of r");
    if (cfg.m == cfg.first_batch)
        throw Error(ErrorKind::Config, "online: need at least 2 checkpoints for the learning-curve AUC");
    if (cfg.repetitions < 1)
        throw Error(ErrorKind::Config, "online: repetitions must be >= 1");
}

int pool_index(int n0, int i, int n_trials)
{
    if (n_trials < 1 || n0 < 1 || n0 > n_trials || i < 1 || i > n_trials)
        throw Error(ErrorKind::InvalidArgument, "pool_index: arguments out of range");
    const int k = n0 + i;
    return k > n_trials ? k - n_trials : k;
}

int draw_n0(std::uint64_t base_seed, int repetition, int n_trials)
{
    std::mt19937_64 rng(base_seed + static_cast<std::uint64_t>(repetition));
    return 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n_trials));
}

std::vector<int> checkpoints(const OnlineConfig& cfg)
{
    validate(cfg);
    std::vector<int> out;
    for (int k = cfg.first_batch; k <= cfg.m; k += cfg.r)
        out.push_back(k);
    return out;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn)
{
    if (n <= 0)
        return;
    if (threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min(threads, n);
    for (int t = 0; t < k; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

EvalReport loso_eval(const Dataset& dataset, const PipelineSpec& spec, std::uint64_t seed, int threads)
{
    validate_for_transfer(dataset);
    validate(spec, dataset.task_kind);
    const TaskKind task = dataset.task_kind;
    if (task == TaskKind::ERP && spec.model == ModelChain::MDRM)
        throw Error(ErrorKind::Config, "MDRM on ERP data needs labeled trials from the held-out subject; "
                                       "use the online protocol");
    const int target = target_class(dataset);
    const std::size_t n_subjects = dataset.subjects.size();

    // References never depend on the fold, so each subject is aligned once.
    std::vector<PreparedTrials> prepared(n_subjects);
    std::vector<StageTimes> prep_times(n_subjects);
    std::vector<Notes> prep_notes(n_subjects);
    parallel_for(static_cast<int>(n_subjects), threads, [&](int si) {
        const auto s = static_cast<std::size_t>(si);
        const auto& subj = dataset.subjects[s];
        try {
            prepared[s] = prepare(spec, task, full_context(subj, false), subj.trials, target, prep_times[s],
                                  prep_notes[s]);
        } catch (const Error& e) {
            rethrow_with_context(e, "alignment, subject " + subj.id);
        }
    });

    std::vector<SubjectScore> scores(n_subjects);
    std::vector<StageTimes> fold_times(n_subjects);
    std::vector<Notes> fold_notes(n_subjects);
    parallel_for(static_cast<int>(n_subjects), threads, [&](int si) {
        const auto h = static_cast<std::size_t>(si);
        const auto& subj = dataset.subjects[h];
        try {
            const auto model = fit(spec, concat_except(prepared, h), labels_except(dataset, h), target, seed,
                                   fold_times[h]);
            note_fit(model, fold_notes[h]);
            const auto preds = predict(model, prepared[h], fold_times[h]);
            const auto truth = labels_of(subj.trials);
            scores[h] = {subj.id, score(task, preds, truth), static_cast<int>(truth.size())};
        } catch (const Error& e) {
            rethrow_with_context(e, "held-out subject " + subj.id);
        }
    });

    PipelineResult result;
    result.pipeline = pipeline_name(spec);
    result.protocol = "offline";
    result.metric = metric_name(task);
    result.spec = spec;
    result.subjects = std::move(scores);
    std::vector<double> values;
    for (const auto& s : result.subjects)
        values.push_back(s.metric);
    result.mean = mean_of(values);
    for (std::size_t s = 0; s < n_subjects; ++s) {
        merge_into(result.times, prep_times[s]);
        merge_into(result.times, fold_times[s]);
        for (const auto& [k, v] : prep_notes[s])
            result.notes[k] += v;
        for (const auto& [k, v] : fold_notes[s])
            result.notes[k] += v;
    }

    EvalReport report;
    report.config = {{"protocol", "offline"}, {"seed", seed}};
    report.pipelines.push_back(std::move(result));
    return report;
}

EvalReport online_eval(const Dataset& dataset, const PipelineSpec& spec, const OnlineConfig& cfg, int threads)
{
    validate_for_transfer(dataset);
    validate(spec, dataset.task_kind);
    const auto points = checkpoints(cfg);
    const TaskKind task = dataset.task_kind;
    const int target = target_class(dataset);
    const std::size_t n_subjects = dataset.subjects.size();
    for (const auto& s : dataset.subjects)
        if (static_cast<int>(s.trials.size()) <= cfg.m)
            throw Error(ErrorKind::InvalidArgument, "online: subject " + s.id + " has "
                                                        + std::to_string(s.trials.size())
                                                        + " trials, needs more than m = " + std::to_string(cfg.m));

    const bool needs_template = task == TaskKind::ERP && spec.model == ModelChain::MDRM;

    // Auxiliary subjects expose everything, labels included.
    std::vector<PreparedTrials> aux(n_subjects);
    std::vector<std::optional<Trial>> aux_templates(n_subjects);
    std::vector<StageTimes> aux_times(n_subjects);
    std::vector<Notes> aux_notes(n_subjects);
    parallel_for(static_cast<int>(n_subjects), threads, [&](int si) {
        const auto s = static_cast<std::size_t>(si);
        const auto& subj = dataset.subjects[s];
        try {
            const auto ctx = full_context(subj, true);
            aux[s] = prepare(spec, task, ctx, subj.trials, target, aux_times[s], aux_notes[s]);
            if (needs_template)
                aux_templates[s] = subject_template(ctx, target);
        } catch (const Error& e) {
            rethrow_with_context(e, "alignment, auxiliary subject " + subj.id);
        }
    });

    const int n_tasks = static_cast<int>(n_subjects) * cfg.repetitions;
    std::vector<OnlineRun> runs(static_cast<std::size_t>(n_tasks));
    std::vector<StageTimes> task_times(static_cast<std::size_t>(n_tasks));
    std::vector<Notes> task_notes(static_cast<std::size_t>(n_tasks));

    parallel_for(n_tasks, threads, [&](int ti) {
        const auto h = static_cast<std::size_t>(ti / cfg.repetitions);
        const int rep = ti % cfg.repetitions;
        const auto& subj = dataset.subjects[h];
        auto& run = runs[static_cast<std::size_t>(ti)];
        auto& times = task_times[static_cast<std::size_t>(ti)];
        auto& notes = task_notes[static_cast<std::size_t>(ti)];

        const int n = static_cast<int>(subj.trials.size());
        run.subject = subj.id;
        run.repetition = rep;
        run.seed = cfg.base_seed + static_cast<std::uint64_t>(rep);
        run.n0 = draw_n0(cfg.base_seed, rep, n);

        std::vector<int> pool;
        std::vector<char> in_pool(static_cast<std::size_t>(n), 0);
        for (int i = 1; i <= cfg.m; ++i) {
            const int idx = pool_index(run.n0, i, n) - 1;
            pool.push_back(idx);
            in_pool[static_cast<std::size_t>(idx)] = 1;
        }
        std::vector<int> test_idx;
        for (int i = 0; i < n; ++i)
            if (!in_pool[static_cast<std::size_t>(i)])
                test_idx.push_back(i);
        const auto test_trials = pick(subj.trials, test_idx);

        std::optional<Trial> fallback;
        if (needs_template)
            fallback = mean_template(aux_templates, h);

        const PreparedTrials aux_train = concat_except(aux, h);
        const std::vector<int> aux_labels = labels_except(dataset, h);
        AlignmentState state;

        for (int k : points) {
            try {
                const std::span<const int> seen_idx(pool.data(), static_cast<std::size_t>(k));
                SubjectContext ctx;
                ctx.labeled = pick(subj.trials, seen_idx);
                ctx.reference_trials = without_labels(ctx.labeled);
                for (int i : seen_idx)
                    if (static_cast<std::size_t>(i) < subj.resting.size())
                        ctx.resting.push_back(subj.resting[static_cast<std::size_t>(i)]);

                PreparedTrials train = aux_train;
                train.append(prepare(spec, task, ctx, ctx.labeled, target, times, notes, &state, fallback));
                std::vector<int> train_labels = aux_labels;
                const auto seen_labels = labels_of(ctx.labeled);
                train_labels.insert(train_labels.end(), seen_labels.begin(), seen_labels.end());

                const auto model = fit(spec, train, train_labels, target, run.seed, times);
                note_fit(model, notes);
                const auto test = prepare(spec, task, ctx, test_trials, target, times, notes, &state, fallback);
                const auto preds = predict(model, test, times);
                run.metric.push_back(score(task, preds, labels_of(test_trials)));
            } catch (const Error& e) {
                rethrow_with_context(e, "subject " + subj.id + ", repetition " + std::to_string(rep)
                                            + ", checkpoint " + std::to_string(k));
            }
        }
        std::vector<double> x(points.begin(), points.end());
        run.auc = auc_curve(x, run.metric);
    });

    PipelineResult result;
    result.pipeline = pipeline_name(spec);
    result.protocol = "online";
    result.metric = metric_name(task);
    result.spec = spec;
    result.checkpoints = points;
    result.runs = std::move(runs);
    std::vector<double> subject_aucs;
    for (std::size_t h = 0; h < n_subjects; ++h) {
        SubjectCurve curve;
        curve.subject = dataset.subjects[h].id;
        curve.mean_metric.assign(points.size(), 0.0);
        double auc_sum = 0.0;
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            const auto& run = result.runs[h * static_cast<std::size_t>(cfg.repetitions) + static_cast<std::size_t>(rep)];
            for (std::size_t c = 0; c < points.size(); ++c)
                curve.mean_metric[c] += run.metric[c];
            auc_sum += run.auc;
        }
        for (auto& v : curve.mean_metric)
            v /= cfg.repetitions;
        curve.mean_auc = auc_sum / cfg.repetitions;
        subject_aucs.push_back(curve.mean_auc);
        result.curves.push_back(std::move(curve));
    }
    result.mean = mean_of(subject_aucs);
    for (std::size_t s = 0; s < n_subjects; ++s) {
        merge_into(result.times, aux_times[s]);
        for (const auto& [k, v] : aux_notes[s])
            result.notes[k] += v;
    }
    for (std::size_t t = 0; t < task_times.size(); ++t) {
        merge_into(result.times, task_times[t]);
        for (const auto& [k, v] : task_notes[t])
            result.notes[k] += v;
    }

    EvalReport report;
    report.config = {{"protocol", "online"},
                     {"online",
                      {{"m", cfg.m},
                       {"r", cfg.r},
                       {"first_batch", cfg.first_batch},
                       {"repetitions", cfg.repetitions},
                       {"base_seed", cfg.base_seed}}}};
    report.pipelines.push_back(std::move(result));
    return report;
}

}  // namespace eegalign::harness
