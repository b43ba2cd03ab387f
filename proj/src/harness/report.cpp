#include "eegalign/harness/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "eegalign/error.hpp"
#include "eegalign/harness/metrics.hpp"

namespace eegalign::harness {
namespace {

using nlohmann::json;

constexpr const char* kResultsHeader = "protocol,pipeline,subject,repetition,checkpoint,n0,metric";
constexpr const char* kTimingHeader = "pipeline,stage,count,total_s,mean_s";

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string g12(double v) { return fmt("%.12g", v); }

const std::string& csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") != std::string::npos)
        throw Error(ErrorKind::InvalidArgument, "csv: field '" + s + "' contains a separator");
    return s;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            out.push_back(line);
    }
    return out;
}

double parse_double(const std::string& s, int line)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Format, "csv line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

std::optional<int> parse_opt_int(const std::string& s, int line)
{
    if (s.empty())
        return std::nullopt;
    const double v = parse_double(s, line);
    if (v != static_cast<int>(v))
        throw Error(ErrorKind::Format, "csv line " + std::to_string(line) + ": expected integer, got '" + s + "'");
    return static_cast<int>(v);
}

template <class T>
void add_unique(std::vector<T>& v, const T& x)
{
    if (std::find(v.begin(), v.end(), x) == v.end())
        v.push_back(x);
}

std::string markdown(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = std::max<std::size_t>(3, header[c].size());
        for (const auto& r : rows)
            width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells, bool left_first) {
        std::string out = "|";
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string pad(width[c] - cells[c].size(), ' ');
            out += " " + (c == 0 && left_first ? cells[c] + pad : pad + cells[c]) + " |";
        }
        return out + "\n";
    };
    std::string out = line(header, true);
    out += "|";
    for (std::size_t c = 0; c < header.size(); ++c)
        out += c == 0 ? " " + std::string(width[c], '-') + " |" : " " + std::string(width[c] - 1, '-') + ": |";
    out += "\n";
    for (const auto& r : rows)
        out += line(r, true);
    return out;
}

std::string pct(double v) { return fmt("%.2f", 100.0 * v); }

// Per (pipeline, subject): one value per subject, offline metric or mean
// online AUC over repetitions.
struct SubjectTable {
    std::vector<std::string> pipelines;
    std::vector<std::string> subjects;
    std::map<std::pair<std::string, std::string>, double> value;
};

SubjectTable offline_table(const std::vector<CsvRow>& rows)
{
    SubjectTable t;
    for (const auto& r : rows) {
        if (r.protocol != "offline")
            continue;
        add_unique(t.pipelines, r.pipeline);
        add_unique(t.subjects, r.subject);
        t.value[{r.pipeline, r.subject}] = r.metric;
    }
    return t;
}

SubjectTable auc_table(const std::vector<CsvRow>& rows)
{
    SubjectTable t;
    // (pipeline, subject) -> repetition -> (x, y)
    std::map<std::pair<std::string, std::string>, std::map<int, std::pair<std::vector<double>, std::vector<double>>>>
        curves;
    for (const auto& r : rows) {
        if (r.protocol != "online")
            continue;
        if (!r.repetition || !r.checkpoint)
            throw Error(ErrorKind::Format, "online csv row without repetition/checkpoint");
        add_unique(t.pipelines, r.pipeline);
        add_unique(t.subjects, r.subject);
        auto& c = curves[{r.pipeline, r.subject}][*r.repetition];
        c.first.push_back(*r.checkpoint);
        c.second.push_back(r.metric);
    }
    for (const auto& [key, reps] : curves) {
        double sum = 0.0;
        for (const auto& [rep, xy] : reps)
            sum += auc_curve(xy.first, xy.second);
        t.value[key] = sum / static_cast<double>(reps.size());
    }
    return t;
}

std::string render_subject_table(const SubjectTable& t)
{
    std::vector<std::string> header{"subject"};
    header.insert(header.end(), t.pipelines.begin(), t.pipelines.end());
    std::vector<std::vector<std::string>> body;
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& s : t.subjects) {
        std::vector<std::string> row{s};
        for (const auto& p : t.pipelines) {
            const auto it = t.value.find({p, s});
            if (it == t.value.end()) {
                row.push_back("-");
                continue;
            }
            row.push_back(pct(it->second));
            sums[p].first += it->second;
            ++sums[p].second;
        }
        body.push_back(std::move(row));
    }
    std::vector<std::string> mean{"mean"};
    for (const auto& p : t.pipelines)
        mean.push_back(sums[p].second ? pct(sums[p].first / sums[p].second) : "-");
    body.push_back(std::move(mean));
    return markdown(header, body);
}

std::string render_online_curve(const std::vector<CsvRow>& rows)
{
    std::vector<std::string> pipelines;
    std::vector<int> points;
    std::map<std::pair<std::string, int>, std::pair<double, int>> sums;
    for (const auto& r : rows) {
        if (r.protocol != "online")
            continue;
        add_unique(pipelines, r.pipeline);
        add_unique(points, *r.checkpoint);
        auto& s = sums[{r.pipeline, *r.checkpoint}];
        s.first += r.metric;
        ++s.second;
    }
    std::sort(points.begin(), points.end());
    std::vector<std::string> header{"labeled trials"};
    header.insert(header.end(), pipelines.begin(), pipelines.end());
    std::vector<std::vector<std::string>> body;
    for (int k : points) {
        std::vector<std::string> row{std::to_string(k)};
        for (const auto& p : pipelines) {
            const auto it = sums.find({p, k});
            row.push_back(it == sums.end() ? "-" : pct(it->second.first / it->second.second));
        }
        body.push_back(std::move(row));
    }
    return markdown(header, body);
}

bool has_protocol(const std::vector<CsvRow>& rows, const std::string& protocol)
{
    return std::any_of(rows.begin(), rows.end(), [&](const CsvRow& r) { return r.protocol == protocol; });
}

}  // namespace

nlohmann::json to_json(const PipelineSpec& spec)
{
    json j;
    j["name"] = pipeline_name(spec);
    j["alignment"] = to_string(spec.alignment);
    j["reference"] = spec.reference ? json(align::to_string(*spec.reference)) : json(nullptr);
    j["model"] = to_string(spec.model);
    j["csp_filters"] = spec.csp_filters;
    j["xdawn_components"] = spec.xdawn_components;
    j["pca_features"] = spec.pca_features;
    j["svm_C"] = spec.svm_C ? json(*spec.svm_C) : json(nullptr);
    j["cv_folds"] = spec.cv_folds;
    j["shrinkage"] = spec.shrinkage ? json(*spec.shrinkage) : json(nullptr);
    j["mean_tol"] = spec.mean_options.tol;
    j["mean_max_iter"] = spec.mean_options.max_iter;
    return j;
}

nlohmann::json to_json(const EvalReport& report, bool include_timing)
{
    json out;
    out["config"] = report.config;
    out["pipelines"] = json::array();
    for (const auto& p : report.pipelines) {
        json j;
        j["pipeline"] = p.pipeline;
        j["protocol"] = p.protocol;
        j["metric"] = p.metric;
        j["spec"] = to_json(p.spec);
        j["mean"] = p.mean;
        if (p.protocol == "offline") {
            j["subjects"] = json::array();
            for (const auto& s : p.subjects)
                j["subjects"].push_back({{"subject", s.subject}, {"metric", s.metric}, {"n_test", s.n_test}});
        } else {
            j["checkpoints"] = p.checkpoints;
            j["curves"] = json::array();
            for (const auto& c : p.curves)
                j["curves"].push_back(
                    {{"subject", c.subject}, {"mean_metric", c.mean_metric}, {"mean_auc", c.mean_auc}});
            j["runs"] = json::array();
            for (const auto& r : p.runs)
                j["runs"].push_back({{"subject", r.subject},
                                     {"repetition", r.repetition},
                                     {"n0", r.n0},
                                     {"seed", r.seed},
                                     {"metric", r.metric},
                                     {"auc", r.auc}});
        }
        j["notes"] = p.notes;
        if (include_timing) {
            json t = json::object();
            for (const auto& [stage, stat] : p.times)
                t[stage] = {{"count", stat.count}, {"total_s", stat.total_s}};
            j["timing"] = t;
        }
        out["pipelines"].push_back(std::move(j));
    }
    return out;
}

std::string results_csv(const EvalReport& report)
{
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto& p : report.pipelines) {
        const auto& name = csv_field(p.pipeline);
        if (p.protocol == "offline") {
            for (const auto& s : p.subjects)
                out += "offline," + name + "," + csv_field(s.subject) + ",,,," + g12(s.metric) + "\n";
            continue;
        }
        for (const auto& r : p.runs)
            for (std::size_t c = 0; c < p.checkpoints.size(); ++c)
                out += "online," + name + "," + csv_field(r.subject) + "," + std::to_string(r.repetition) + ","
                       + std::to_string(p.checkpoints[c]) + "," + std::to_string(r.n0) + "," + g12(r.metric[c])
                       + "\n";
    }
    return out;
}

std::string timing_csv(const EvalReport& report)
{
    std::string out = std::string(kTimingHeader) + "\n";
    for (const auto& p : report.pipelines)
        for (const auto& [stage, stat] : p.times)
            out += csv_field(p.pipeline) + "," + csv_field(stage) + "," + std::to_string(stat.count) + ","
                   + g12(stat.total_s) + "," + g12(stat.count ? stat.total_s / stat.count : 0.0) + "\n";
    return out;
}

std::vector<CsvRow> parse_results_csv(const std::string& text)
{
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kResultsHeader)
        throw Error(ErrorKind::Format, std::string("results csv must start with header '") + kResultsHeader + "'");
    std::vector<CsvRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i) + 1;
        const auto f = split(lines[i], ',');
        if (f.size() != 7)
            throw Error(ErrorKind::Format, "csv line " + std::to_string(ln) + ": expected 7 fields");
        CsvRow r;
        r.protocol = f[0];
        if (r.protocol != "offline" && r.protocol != "online")
            throw Error(ErrorKind::Format, "csv line " + std::to_string(ln) + ": unknown protocol '" + f[0] + "'");
        r.pipeline = f[1];
        r.subject = f[2];
        r.repetition = parse_opt_int(f[3], ln);
        r.checkpoint = parse_opt_int(f[4], ln);
        r.n0 = parse_opt_int(f[5], ln);
        r.metric = parse_double(f[6], ln);
        if (r.protocol == "online" && (!r.repetition || !r.checkpoint))
            throw Error(ErrorKind::Format, "csv line " + std::to_string(ln) + ": online row needs repetition and checkpoint");
        rows.push_back(std::move(r));
    }
    return rows;
}

TableLayout table_layout_from_string(const std::string& s)
{
    if (s == "metric") return TableLayout::Metric;
    if (s == "auc") return TableLayout::Auc;
    if (s == "timing") return TableLayout::Timing;
    throw Error(ErrorKind::Config, "unknown table layout '" + s + "' (expected metric, auc or timing)");
}

std::string render_table(const std::vector<CsvRow>& rows, TableLayout layout)
{
    if (layout == TableLayout::Timing)
        throw Error(ErrorKind::InvalidArgument, "timing tables are rendered from the timing csv");
    std::string out;
    if (layout == TableLayout::Auc) {
        if (!has_protocol(rows, "online"))
            throw Error(ErrorKind::InvalidArgument, "auc layout needs online results");
        return render_subject_table(auc_table(rows));
    }
    if (has_protocol(rows, "offline"))
        out += render_subject_table(offline_table(rows));
    if (has_protocol(rows, "online")) {
        if (!out.empty())
            out += "\n";
        out += render_online_curve(rows);
    }
    if (out.empty())
        throw Error(ErrorKind::InvalidArgument, "no result rows to render");
    return out;
}

std::string render_timing_table(const std::string& text)
{
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kTimingHeader)
        throw Error(ErrorKind::Format, std::string("timing csv must start with header '") + kTimingHeader + "'");
    std::vector<std::vector<std::string>> body;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 5)
            throw Error(ErrorKind::Format, "timing csv line " + std::to_string(i + 1) + ": expected 5 fields");
        const int ln = static_cast<int>(i) + 1;
        body.push_back({f[0], f[1], f[2], fmt("%.4f", parse_double(f[3], ln)), fmt("%.6f", parse_double(f[4], ln))});
    }
    return markdown({"pipeline", "stage", "count", "total (s)", "mean (s)"}, body);
}

std::vector<TTestRow> compare_pipelines(const std::vector<CsvRow>& rows, const std::string& baseline)
{
    const bool offline = has_protocol(rows, "offline");
    const bool online = has_protocol(rows, "online");
    if (offline && online)
        throw Error(ErrorKind::InvalidArgument, "t-tests need results from a single protocol");
    const SubjectTable t = offline ? offline_table(rows) : auc_table(rows);
    if (std::find(t.pipelines.begin(), t.pipelines.end(), baseline) == t.pipelines.end())
        throw Error(ErrorKind::InvalidArgument, "baseline pipeline '" + baseline + "' not in results");

    auto values = [&](const std::string& p) {
        std::vector<double> v;
        for (const auto& s : t.subjects) {
            const auto it = t.value.find({p, s});
            if (it == t.value.end())
                throw Error(ErrorKind::InvalidArgument, "pipeline '" + p + "' has no result for subject " + s);
            v.push_back(it->second);
        }
        return v;
    };
    const auto base = values(baseline);
    std::vector<TTestRow> out;
    for (const auto& p : t.pipelines) {
        if (p == baseline)
            continue;
        out.push_back({baseline, p, paired_t_test(base, values(p))});
    }
    return out;
}

std::string render_ttests(const std::vector<TTestRow>& tests)
{
    std::vector<std::vector<std::string>> body;
    for (const auto& t : tests)
        body.push_back({t.baseline + " vs " + t.other, fmt("%.4f", t.result.t), std::to_string(t.result.df),
                        fmt("%.4g", t.result.p)});
    return markdown({"comparison", "t", "df", "p"}, body);
}

}  // namespace eegalign::harness
