#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eegalign/harness/metrics.hpp"
#include "eegalign/harness/pipeline.hpp"

namespace eegalign::harness {

struct SubjectScore {
    std::string subject;
    double metric = 0.0;
    int n_test = 0;
};

// One repetition of the online protocol for one new subject.
struct OnlineRun {
    std::string subject;
    int repetition = 0;
    int n0 = 0;  // 1-based, as drawn
    std::uint64_t seed = 0;
    std::vector<double> metric;  // one per checkpoint
    double auc = 0.0;
};

struct SubjectCurve {
    std::string subject;
    std::vector<double> mean_metric;  // per checkpoint, averaged over repetitions
    double mean_auc = 0.0;
};

struct PipelineResult {
    std::string pipeline;
    std::string protocol;  // "offline" or "online"
    std::string metric;    // "accuracy" or "bca"
    PipelineSpec spec;
    std::vector<SubjectScore> subjects;  // offline
    std::vector<int> checkpoints;        // online
    std::vector<OnlineRun> runs;
    std::vector<SubjectCurve> curves;
    double mean = 0.0;  // mean subject metric (offline) or mean subject AUC (online)
    StageTimes times;
    Notes notes;
};

struct EvalReport {
    nlohmann::json config;  // resolved config echo
    std::vector<PipelineResult> pipelines;
};

nlohmann::json to_json(const PipelineSpec& spec);
nlohmann::json to_json(const EvalReport& report, bool include_timing = true);

// One row per subject (offline) or subject x repetition x checkpoint (online).
// Columns: protocol,pipeline,subject,repetition,checkpoint,n0,metric
std::string results_csv(const EvalReport& report);
// Columns: pipeline,stage,count,total_s,mean_s
std::string timing_csv(const EvalReport& report);

struct CsvRow {
    std::string protocol;
    std::string pipeline;
    std::string subject;
    std::optional<int> repetition;
    std::optional<int> checkpoint;
    std::optional<int> n0;
    double metric = 0.0;
};

std::vector<CsvRow> parse_results_csv(const std::string& text);

enum class TableLayout { Metric, Auc, Timing };

TableLayout table_layout_from_string(const std::string& s);

// Subjects as rows, pipelines as columns, plus a mean row. For online rows the
// Metric layout shows the curve averaged over subjects and repetitions per
// checkpoint; Auc shows per-subject mean AUC.
std::string render_table(const std::vector<CsvRow>& rows, TableLayout layout);

// Columns: pipeline, stage, count, total, mean.
std::string render_timing_table(const std::string& timing_csv_text);

struct TTestRow {
    std::string baseline;
    std::string other;
    TTestResult result;
};

// Paired t-tests of `baseline` against every other pipeline on per-subject
// values (offline metric or mean AUC).
std::vector<TTestRow> compare_pipelines(const std::vector<CsvRow>& rows, const std::string& baseline);
std::string render_ttests(const std::vector<TTestRow>& tests);

}  // namespace eegalign::harness
