#include "eegalign/cli/run.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "eegalign/archive.hpp"
#include "eegalign/harness/protocol.hpp"

namespace eegalign::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Outcome {
    std::string summary;
    std::vector<std::string> outputs;
    json details = json::object();
};

Dataset load_source(const DatasetSource& src)
{
    if (src.input)
        return load_archive(*src.input);
    return src.task == TaskKind::MI ? synth_mi(src.synth) : synth_erp(src.synth);
}

std::size_t trial_count(const Dataset& ds)
{
    std::size_t n = 0;
    for (const auto& s : ds.subjects)
        n += s.trials.size();
    return n;
}

Outcome run_synth(const SynthCommand& c, const fs::path& out, std::string& stage)
{
    stage = "synth";
    const Dataset ds = c.task == TaskKind::MI ? synth_mi(c.synth) : synth_erp(c.synth);
    stage = "write";
    save_archive(ds, out);
    Outcome o;
    o.outputs = {"manifest.json"};
    o.summary = "synth: wrote " + std::to_string(ds.subjects.size()) + " subjects, "
                + std::to_string(trial_count(ds)) + " " + to_string(c.task) + " trials to " + out.string();
    return o;
}

std::map<std::string, std::vector<preprocess::Event>> read_events(const fs::path& path)
{
    const json j = read_json_file(path);
    if (!j.is_object())
        throw Error(ErrorKind::Config, path.string() + ": expected an object keyed by subject id");
    std::map<std::string, std::vector<preprocess::Event>> out;
    for (const auto& [id, list] : j.items()) {
        if (!list.is_array())
            throw Error(ErrorKind::Config, path.string() + ": events for " + id + " must be an array");
        auto& events = out[id];
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& e = list[i];
            const std::string where = path.string() + ": " + id + "[" + std::to_string(i) + "]";
            if (!e.is_object() || !e.contains("time_s") || !e["time_s"].is_number())
                throw Error(ErrorKind::Config, where + ": needs a numeric time_s");
            for (const auto& [key, v] : e.items())
                if (key != "time_s" && key != "label")
                    throw Error(ErrorKind::Config, where + "." + key + ": unknown key");
            preprocess::Event ev;
            ev.time_s = e["time_s"].get<double>();
            if (e.contains("label") && !e["label"].is_null()) {
                if (!e["label"].is_number_integer() || e["label"].get<long long>() < 0)
                    throw Error(ErrorKind::Config, where + ".label: expected a nonnegative integer");
                ev.label = e["label"].get<int>();
            }
            events.push_back(ev);
        }
    }
    return out;
}

Outcome run_preprocess(const PreprocessCommand& c, const fs::path& out, std::string& stage)
{
    stage = "load";
    Dataset ds = load_archive(c.input);
    std::map<std::string, std::vector<preprocess::Event>> events;
    if (c.epoch)
        events = read_events(c.epoch->events);

    stage = "preprocess";
    std::optional<preprocess::FIRFilter> filter;
    if (c.filter_order) {
        const double rate = ds.subjects.at(0).trials.empty() ? 0.0 : ds.subjects[0].trials[0].fs;
        filter = preprocess::design_fir_bandpass(*c.filter_order, c.band, rate);
    }

    json failures = json::object();
    for (auto& subj : ds.subjects) {
        try {
            if (c.epoch) {
                if (subj.trials.size() != 1)
                    throw Error(ErrorKind::InvalidArgument,
                                "epoching expects one continuous recording per subject, found "
                                    + std::to_string(subj.trials.size()) + " trials");
                const auto it = events.find(subj.id);
                if (it == events.end())
                    throw Error(ErrorKind::Config, "no events listed for subject");
                preprocess::Recording rec{subj.trials[0].data, subj.trials[0].fs, subj.id};
                if (filter)
                    rec.data = preprocess::filter_causal(rec.data, rec.fs, *filter);
                auto task = preprocess::epoch(rec, it->second, {c.epoch->start_s, c.epoch->end_s, TrialKind::Task});
                std::vector<Trial> resting;
                std::size_t n_failed = task.failures.size();
                if (c.epoch->resting) {
                    std::vector<preprocess::Event> unlabeled = it->second;
                    for (auto& e : unlabeled)
                        e.label.reset();
                    auto rest = preprocess::epoch(
                        rec, unlabeled, {c.epoch->resting->first, c.epoch->resting->second, TrialKind::Resting});
                    n_failed += rest.failures.size();
                    resting = std::move(rest.trials);
                }
                if (task.trials.empty())
                    throw Error(ErrorKind::InvalidArgument, "no event produced a complete epoch");
                if (n_failed)
                    failures[subj.id] = n_failed;
                subj.trials = std::move(task.trials);
                subj.resting = std::move(resting);
            } else if (filter) {
                for (auto& t : subj.trials)
                    t = preprocess::filter_causal(t, *filter);
                for (auto& t : subj.resting)
                    t = preprocess::filter_causal(t, *filter);
            }
            if (c.downsample > 1) {
                for (auto& t : subj.trials)
                    t = preprocess::downsample(t, c.downsample);
                for (auto& t : subj.resting)
                    t = preprocess::downsample(t, c.downsample);
            }
        } catch (const Error& e) {
            rethrow_with_context(e, "subject " + subj.id);
        }
    }

    stage = "write";
    save_archive(ds, out);
    Outcome o;
    o.outputs = {"manifest.json"};
    o.details["skipped_events"] = failures;
    std::size_t skipped = 0;
    for (const auto& [id, n] : failures.items())
        skipped += n.get<std::size_t>();
    o.summary = "preprocess: wrote " + std::to_string(trial_count(ds)) + " trials for "
                + std::to_string(ds.subjects.size()) + " subjects to " + out.string() + " (" + std::to_string(skipped)
                + " events skipped)";
    return o;
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Outcome run_align(const AlignCommand& c, const fs::path& out, std::string& stage)
{
    stage = "load";
    Dataset ds = load_source(c.source);
    validate(ds);

    stage = "align";
    std::optional<align::ShrinkageParam> shrink;
    if (c.shrinkage)
        shrink = align::ShrinkageParam(*c.shrinkage);
    json refs = json::array();
    json deviation = json::object();
    double worst = 0.0;
    for (auto& subj : ds.subjects) {
        try {
            const auto& source = align::uses_resting(c.reference) ? subj.resting : subj.trials;
            if (source.empty())
                throw Error(ErrorKind::InvalidArgument,
                            align::to_string(c.reference) + " reference needs "
                                + (align::uses_resting(c.reference) ? "resting epochs" : "trials"));
            const auto ref = align::build_reference(without_labels(source), c.reference, shrink);
            subj.trials = align::ea_align(subj.trials, ref);
            subj.resting = align::ea_align(subj.resting, ref);
            refs.push_back({{"subject", subj.id},
                            {"kind", align::to_string(ref.kind)},
                            {"n_source_trials", ref.n_source_trials},
                            {"matrix", matrix_json(ref.matrix.values())}});

            // Mean covariance of whatever the reference was built from; the
            // identity for EI.
            const auto& aligned = align::uses_resting(c.reference) ? subj.resting : subj.trials;
            const auto covs = align::covariances(aligned, shrink);
            const double dev = (align::reference_from_covariances(covs, align::ReferenceKind::EI).matrix.values()
                                - Eigen::MatrixXd::Identity(subj.trials[0].n_channels(), subj.trials[0].n_channels()))
                                   .norm();
            deviation[subj.id] = dev;
            worst = std::max(worst, dev);
        } catch (const Error& e) {
            rethrow_with_context(e, "subject " + subj.id);
        }
    }

    stage = "write";
    save_archive(ds, out);
    write_text(out / "references.json", json{{"kind", align::to_string(c.reference)}, {"subjects", refs}}.dump(2) + "\n");
    Outcome o;
    o.outputs = {"manifest.json", "references.json"};
    o.details["identity_deviation"] = deviation;
    o.summary = "align: " + align::to_string(c.reference) + " aligned " + std::to_string(ds.subjects.size())
                + " subjects to " + out.string() + " (max |mean cov - I|_F = " + fmt("%.3g", worst) + ")";
    return o;
}

Outcome run_eval(EvalCommand& c, const fs::path& out, std::uint64_t seed, int threads, bool online,
                 std::string& stage, const std::function<json()>& echo)
{
    stage = "load";
    const Dataset ds = load_source(c.source);
    validate(ds);

    for (auto& spec : c.pipelines) {
        spec.name = harness::pipeline_name(spec);
        if (spec.alignment != harness::AlignmentKind::None)
            spec.reference = harness::resolved_reference(spec, ds.task_kind);
    }

    stage = "eval";
    harness::EvalReport report;
    report.config = echo();
    std::string summary = online ? "eval-online:" : "eval-offline:";
    for (const auto& spec : c.pipelines) {
        try {
            auto r = online ? harness::online_eval(ds, spec, *c.online, threads)
                            : harness::loso_eval(ds, spec, seed, threads);
            auto& p = r.pipelines.at(0);
            summary += " " + p.pipeline + " " + (online ? "auc" : p.metric) + "=" + fmt("%.4f", p.mean);
            report.pipelines.push_back(std::move(p));
        } catch (const Error& e) {
            rethrow_with_context(e, "pipeline " + spec.name);
        }
    }
    summary += " (" + std::to_string(ds.subjects.size()) + " subjects)";

    stage = "write";
    write_text(out / "report.json", harness::to_json(report).dump(2) + "\n");
    write_text(out / "results.csv", harness::results_csv(report));
    write_text(out / "timing.csv", harness::timing_csv(report));
    Outcome o;
    o.outputs = {"report.json", "results.csv", "timing.csv"};
    o.summary = summary;
    return o;
}

Outcome run_report(const ReportCommand& c, const fs::path& out, std::string& stage)
{
    stage = "load";
    const std::string text = read_text(c.input);
    stage = "report";
    std::string md;
    std::string what;
    if (c.layout == harness::TableLayout::Timing) {
        md = harness::render_timing_table(text);
        what = "timing";
    } else {
        const auto rows = harness::parse_results_csv(text);
        md = harness::render_table(rows, c.layout);
        what = c.layout == harness::TableLayout::Auc ? "auc" : "metric";
        if (c.baseline)
            md += "\n" + harness::render_ttests(harness::compare_pipelines(rows, *c.baseline));
    }
    stage = "write";
    write_text(out / "report.md", md);
    Outcome o;
    o.outputs = {"report.md"};
    o.summary = "report: " + what + " table written to " + (out / "report.md").string();
    return o;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += ch;
        }
    }
    return out;
}

json run_record(const RunConfig& rc)
{
    return {{"tool", "eegalign"}, {"version", kVersion}, {"config", to_json(rc)}};
}

}  // namespace

std::string error_line(const std::string& stage, const std::string& kind, const std::string& message)
{
    return "error: stage=" + stage + " kind=" + kind + " message=\"" + escape(message) + "\"";
}

std::string execute(RunConfig rc, std::string& stage)
{
    stage = "setup";
    fs::create_directories(rc.out);

    Outcome o;
    std::visit(
        [&](auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SynthCommand>)
                o = run_synth(c, rc.out, stage);
            else if constexpr (std::is_same_v<T, PreprocessCommand>)
                o = run_preprocess(c, rc.out, stage);
            else if constexpr (std::is_same_v<T, AlignCommand>)
                o = run_align(c, rc.out, stage);
            else if constexpr (std::is_same_v<T, EvalCommand>)
                o = run_eval(c, rc.out, rc.seed, rc.threads, rc.command == "eval-online", stage,
                             [&] { return to_json(rc); });
            else
                o = run_report(c, rc.out, stage);
        },
        rc.body);

    stage = "write";
    json record = run_record(rc);
    record["status"] = "ok";
    record["outputs"] = o.outputs;
    record["details"] = o.details;
    record["summary"] = o.summary;
    write_text(rc.out / "run.json", record.dump(2) + "\n");
    return o.summary;
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Euclidean and Riemannian alignment for cross-subject EEG decoding", "eegalign"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help{
        {"synth", "generate a synthetic MI or ERP archive"},
        {"preprocess", "band-pass, epoch and downsample an archive"},
        {"align", "write an EA-aligned archive and the reference matrices"},
        {"eval-offline", "leave-one-subject-out evaluation"},
        {"eval-online", "simulated online evaluation"},
        {"report", "render results csv as a markdown table"}};
    for (const auto& name : commands()) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        sub->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::Range(1, 4096));
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_line("args", "usage", e.what()) << "\n";
        return 2;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed())
            command = name;
    const CLI::App* sub = subs.at(command);

    std::string stage = "config";
    std::optional<RunConfig> rc;
    try {
        json cfg = json::object();
        fs::path base = fs::current_path();
        if (!config_path.empty()) {
            cfg = read_json_file(config_path);
            base = fs::absolute(config_path).parent_path();
        } else if (command != "synth") {
            throw Error(ErrorKind::Config, "--config is required for " + command);
        }
        rc = parse_run_config(command, cfg, base, out_dir,
                              sub->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt,
                              sub->count("--threads") ? std::optional<int>(threads) : std::nullopt);
        out << execute(*rc, stage) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::string kind = "internal";
        if (const auto* ee = dynamic_cast<const Error*>(&e))
            kind = std::string(to_string(ee->kind()));
        else if (dynamic_cast<const fs::filesystem_error*>(&e))
            kind = "io";
        err << error_line(stage, kind, e.what()) << "\n";
        // Best effort: record the failure next to the artifacts.
        try {
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                json record = rc ? run_record(*rc) : json{{"tool", "eegalign"}, {"version", kVersion}};
                record["status"] = "error";
                record["error"] = {{"stage", stage}, {"kind", kind}, {"message", e.what()}};
                write_text(fs::path(out_dir) / "run.json", record.dump(2) + "\n");
            }
        } catch (...) {
        }
        return 1;
    }
}

}  // namespace eegalign::cli
