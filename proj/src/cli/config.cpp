#include "eegalign/cli/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "eegalign/error.hpp"

namespace eegalign::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::Config, path + ": " + what);
}

// Reads keys off one JSON object and rejects whatever was not read.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    void allow(const std::string& key) { used_.insert(key); }

    std::string at(const std::string& key) const { return path_ + "." + key; }

    std::optional<double> number(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = j_.at(key);
        if (!v.is_number())
            fail(at(key), "expected a number");
        return v.get<double>();
    }

    std::optional<long long> integer(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = j_.at(key);
        if (!v.is_number_integer())
            fail(at(key), "expected an integer");
        return v.get<long long>();
    }

    std::optional<int> small_int(const std::string& key)
    {
        const auto v = integer(key);
        if (!v)
            return std::nullopt;
        if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
            fail(at(key), "integer out of range");
        return static_cast<int>(*v);
    }

    std::optional<std::uint64_t> u64(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned())
            fail(at(key), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::optional<std::string> string(const std::string& key)
    {
        used_.insert(key);
        if (!has(key))
            return std::nullopt;
        const auto& v = j_.at(key);
        if (!v.is_string())
            fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::string required_string(const std::string& key)
    {
        auto v = string(key);
        if (!v)
            fail(at(key), "required");
        return *v;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items())
            if (!used_.count(key))
                fail(at(key), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class T>
T value_or(std::optional<T> v, T fallback)
{
    return v ? *v : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <class F>
auto wrap_error(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config && std::string_view(e.what()).starts_with("$"))
            throw;  // already located
        fail(path, e.what());
    }
}

SynthConfig synth_from_json(const json& j, const std::string& path, std::uint64_t seed)
{
    Fields f(j, path);
    SynthConfig c;
    c.n_subjects = value_or(f.small_int("n_subjects"), c.n_subjects);
    c.n_trials_per_class = value_or(f.small_int("n_trials_per_class"), c.n_trials_per_class);
    c.n_channels = value_or(f.small_int("n_channels"), c.n_channels);
    c.n_samples = value_or(f.small_int("n_samples"), c.n_samples);
    c.fs = value_or(f.number("fs"), c.fs);
    c.noise_scale = value_or(f.number("noise_scale"), c.noise_scale);
    c.mixing_condition = value_or(f.number("mixing_condition"), c.mixing_condition);
    f.finish();
    c.seed = seed;
    wrap_error(path, [&] {
        validate(c);
        return 0;
    });
    return c;
}

TaskKind task_from(Fields& f, const std::string& key)
{
    const auto s = f.string(key);
    if (!s)
        return TaskKind::MI;
    return wrap_error(f.at(key), [&] { return task_kind_from_string(*s); });
}

DatasetSource source_from(Fields& f, const std::filesystem::path& base, std::uint64_t seed)
{
    DatasetSource src;
    const bool has_input = f.has("input");
    const bool has_synth = f.has("synth");
    if (has_input == has_synth)
        fail("$", "exactly one of 'input' (archive directory) or 'synth' is required");
    if (has_input) {
        src.input = resolve(base, f.required_string("input"));
        f.string("task");
        if (f.has("task"))
            fail(f.at("task"), "only valid with 'synth'; archives carry their task kind");
    } else {
        src.task = task_from(f, "task");
        src.synth = synth_from_json(f.raw("synth"), "$.synth", seed);
    }
    return src;
}

json source_to_json(const DatasetSource& src)
{
    if (src.input)
        return {{"input", src.input->string()}};
    return {{"task", to_string(src.task)}, {"synth", to_json(src.synth)}};
}

harness::OnlineConfig online_from_json(const json& j, std::uint64_t seed)
{
    Fields f(j, "$.online");
    harness::OnlineConfig c;
    c.m = value_or(f.small_int("m"), c.m);
    c.r = value_or(f.small_int("r"), c.r);
    c.first_batch = value_or(f.small_int("first_batch"), c.r);
    c.repetitions = value_or(f.small_int("repetitions"), c.repetitions);
    c.base_seed = value_or(f.u64("base_seed"), seed);
    f.finish();
    wrap_error("$.online", [&] {
        harness::validate(c);
        return 0;
    });
    return c;
}

}  // namespace

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"synth", "preprocess", "align", "eval-offline", "eval-online",
                                                "report"};
    return names;
}

nlohmann::json to_json(const SynthConfig& c)
{
    return {{"n_subjects", c.n_subjects},   {"n_trials_per_class", c.n_trials_per_class},
            {"n_channels", c.n_channels},   {"n_samples", c.n_samples},
            {"fs", c.fs},                   {"noise_scale", c.noise_scale},
            {"mixing_condition", c.mixing_condition}, {"seed", c.seed}};
}

harness::PipelineSpec pipeline_from_json(const nlohmann::json& j, const std::string& path)
{
    Fields f(j, path);
    harness::PipelineSpec spec;
    spec.name = value_or(f.string("name"), std::string());
    if (const auto a = f.string("alignment"))
        spec.alignment = wrap_error(f.at("alignment"), [&] { return harness::alignment_from_string(*a); });
    if (const auto r = f.string("reference"))
        spec.reference = wrap_error(f.at("reference"), [&] { return align::reference_kind_from_string(*r); });
    spec.model = wrap_error(f.at("model"),
                            [&] { return harness::model_chain_from_string(f.required_string("model")); });
    spec.csp_filters = value_or(f.small_int("csp_filters"), spec.csp_filters);
    spec.xdawn_components = value_or(f.small_int("xdawn_components"), spec.xdawn_components);
    spec.pca_features = value_or(f.small_int("pca_features"), spec.pca_features);
    spec.svm_C = f.number("svm_C");
    spec.cv_folds = value_or(f.small_int("cv_folds"), spec.cv_folds);
    spec.shrinkage = f.number("shrinkage");
    spec.mean_options.tol = value_or(f.number("mean_tol"), spec.mean_options.tol);
    spec.mean_options.max_iter = value_or(f.small_int("mean_max_iter"), spec.mean_options.max_iter);
    f.finish();
    if (spec.reference && spec.alignment == harness::AlignmentKind::None)
        fail(f.at("reference"), "a reference needs alignment EA or RA");
    if (spec.name.find_first_of(",\"\n") != std::string::npos)
        fail(f.at("name"), "must not contain commas, quotes or newlines");
    return spec;
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str(), nullptr, true, false);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": invalid JSON: " + e.what());
    }
}

RunConfig parse_run_config(const std::string& command, const nlohmann::json& config,
                           const std::filesystem::path& base_dir, const std::filesystem::path& out,
                           std::optional<std::uint64_t> seed_flag, std::optional<int> threads_flag)
{
    const auto& names = commands();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw Error(ErrorKind::Config, "unknown command '" + command + "'");
    if (out.empty())
        throw Error(ErrorKind::Config, "--out is required");

    const json empty = json::object();
    Fields f(config.is_null() ? empty : config, "$");
    RunConfig rc;
    rc.command = command;
    rc.out = out;
    const auto seed = f.u64("seed");
    const auto threads = f.small_int("threads");
    rc.seed = seed_flag ? *seed_flag : value_or(seed, std::uint64_t{0});
    rc.threads = threads_flag ? *threads_flag : value_or(threads, 1);
    if (rc.threads < 1)
        throw Error(ErrorKind::Config, "threads must be >= 1");

    if (command == "synth") {
        SynthCommand c;
        c.task = task_from(f, "task");
        c.synth = f.has("synth") ? synth_from_json(f.raw("synth"), "$.synth", rc.seed)
                                 : synth_from_json(json::object(), "$.synth", rc.seed);
        f.allow("synth");
        rc.body = c;
    } else if (command == "preprocess") {
        PreprocessCommand c;
        c.input = resolve(base_dir, f.required_string("input"));
        if (f.has("filter")) {
            Fields ff(f.raw("filter"), "$.filter");
            c.filter_order = value_or(ff.small_int("order"), 50);
            const auto low = ff.number("low_hz");
            const auto high = ff.number("high_hz");
            if (!low || !high)
                fail("$.filter", "low_hz and high_hz are required");
            c.band = {*low, *high};
            ff.finish();
        }
        f.allow("filter");
        if (f.has("epoch")) {
            Fields ef(f.raw("epoch"), "$.epoch");
            EpochCommand e;
            e.events = resolve(base_dir, ef.required_string("events"));
            const auto start = ef.number("start_s");
            const auto end = ef.number("end_s");
            if (!start || !end)
                fail("$.epoch", "start_s and end_s are required");
            e.start_s = *start;
            e.end_s = *end;
            if (ef.has("resting")) {
                Fields rf(ef.raw("resting"), "$.epoch.resting");
                const auto rs = rf.number("start_s");
                const auto re = rf.number("end_s");
                if (!rs || !re)
                    fail("$.epoch.resting", "start_s and end_s are required");
                e.resting = std::pair{*rs, *re};
                rf.finish();
            }
            ef.allow("resting");
            ef.finish();
            c.epoch = e;
        }
        f.allow("epoch");
        c.downsample = value_or(f.small_int("downsample"), 1);
        if (c.downsample < 1)
            fail("$.downsample", "must be >= 1");
        rc.body = c;
    } else if (command == "align") {
        AlignCommand c;
        c.source = source_from(f, base_dir, rc.seed);
        if (const auto r = f.string("reference"))
            c.reference = wrap_error("$.reference", [&] { return align::reference_kind_from_string(*r); });
        c.shrinkage = f.number("shrinkage");
        if (c.shrinkage)
            wrap_error("$.shrinkage", [&] { return align::ShrinkageParam(*c.shrinkage); });
        rc.body = c;
    } else if (command == "eval-offline" || command == "eval-online") {
        EvalCommand c;
        c.source = source_from(f, base_dir, rc.seed);
        if (!f.has("pipelines"))
            fail("$.pipelines", "required");
        const auto& list = f.raw("pipelines");
        if (!list.is_array() || list.empty())
            fail("$.pipelines", "expected a nonempty array");
        for (std::size_t i = 0; i < list.size(); ++i)
            c.pipelines.push_back(pipeline_from_json(list[i], "$.pipelines[" + std::to_string(i) + "]"));
        const bool online = command == "eval-online";
        if (online != f.has("online"))
            fail("$.online", online ? "required for eval-online" : "only valid for eval-online");
        if (online)
            c.online = online_from_json(f.raw("online"), rc.seed);
        f.allow("online");
        rc.body = c;
    } else {
        ReportCommand c;
        c.input = resolve(base_dir, f.required_string("input"));
        if (const auto l = f.string("layout"))
            c.layout = wrap_error("$.layout", [&] { return harness::table_layout_from_string(*l); });
        c.baseline = f.string("baseline");
        if (c.baseline && c.layout == harness::TableLayout::Timing)
            fail("$.baseline", "t-tests apply to metric or auc layouts");
        rc.body = c;
    }
    f.finish();
    return rc;
}

nlohmann::json to_json(const RunConfig& rc)
{
    json j;
    j["command"] = rc.command;
    j["out"] = rc.out.string();
    j["seed"] = rc.seed;
    j["threads"] = rc.threads;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SynthCommand>) {
                j["task"] = to_string(c.task);
                j["synth"] = to_json(c.synth);
            } else if constexpr (std::is_same_v<T, PreprocessCommand>) {
                j["input"] = c.input.string();
                j["filter"] = c.filter_order ? json{{"order", *c.filter_order},
                                                    {"low_hz", c.band.low_hz},
                                                    {"high_hz", c.band.high_hz}}
                                             : json(nullptr);
                if (c.epoch) {
                    json e{{"events", c.epoch->events.string()},
                           {"start_s", c.epoch->start_s},
                           {"end_s", c.epoch->end_s}};
                    e["resting"] = c.epoch->resting
                                       ? json{{"start_s", c.epoch->resting->first}, {"end_s", c.epoch->resting->second}}
                                       : json(nullptr);
                    j["epoch"] = e;
                } else {
                    j["epoch"] = nullptr;
                }
                j["downsample"] = c.downsample;
            } else if constexpr (std::is_same_v<T, AlignCommand>) {
                j.update(source_to_json(c.source));
                j["reference"] = align::to_string(c.reference);
                j["shrinkage"] = c.shrinkage ? json(*c.shrinkage) : json(nullptr);
            } else if constexpr (std::is_same_v<T, EvalCommand>) {
                j.update(source_to_json(c.source));
                j["pipelines"] = json::array();
                for (const auto& p : c.pipelines)
                    j["pipelines"].push_back(harness::to_json(p));
                if (c.online)
                    j["online"] = {{"m", c.online->m},
                                   {"r", c.online->r},
                                   {"first_batch", c.online->first_batch},
                                   {"repetitions", c.online->repetitions},
                                   {"base_seed", c.online->base_seed}};
            } else {
                j["input"] = c.input.string();
                const char* layouts[] = {"metric", "auc", "timing"};
                j["layout"] = layouts[static_cast<int>(c.layout)];
                j["baseline"] = c.baseline ? json(*c.baseline) : json(nullptr);
            }
        },
        rc.body);
    return j;
}

}  // namespace eegalign::cli
