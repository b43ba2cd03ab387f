#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "eegalign/alignment.hpp"
#include "eegalign/harness/pipeline.hpp"
#include "eegalign/harness/protocol.hpp"
#include "eegalign/harness/report.hpp"
#include "eegalign/preprocess.hpp"
#include "eegalign/synth.hpp"

namespace eegalign::cli {

// Either an archive on disk or a generator config.
struct DatasetSource {
    std::optional<std::filesystem::path> input;
    TaskKind task = TaskKind::MI;
    SynthConfig synth;
};

struct SynthCommand {
    TaskKind task = TaskKind::MI;
    SynthConfig synth;
};

struct EpochCommand {
    std::filesystem::path events;
    double start_s = 0.0;
    double end_s = 0.0;
    std::optional<std::pair<double, double>> resting;
};

struct PreprocessCommand {
    std::filesystem::path input;
    std::optional<int> filter_order;
    preprocess::Band band;
    std::optional<EpochCommand> epoch;
    int downsample = 1;
};

struct AlignCommand {
    DatasetSource source;
    align::ReferenceKind reference = align::ReferenceKind::EI;
    std::optional<double> shrinkage;
};

struct EvalCommand {
    DatasetSource source;
    std::vector<harness::PipelineSpec> pipelines;
    std::optional<harness::OnlineConfig> online;
};

struct ReportCommand {
    std::filesystem::path input;
    harness::TableLayout layout = harness::TableLayout::Metric;
    std::optional<std::string> baseline;
};

struct RunConfig {
    std::string command;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    int threads = 1;
    std::variant<SynthCommand, PreprocessCommand, AlignCommand, EvalCommand, ReportCommand> body;
};

const std::vector<std::string>& commands();

// Strict: unknown keys and wrong types are Config errors naming the JSON path.
// Relative paths resolve against `base_dir`. Flag values, when given, win
// over the config's "seed"/"threads".
RunConfig parse_run_config(const std::string& command, const nlohmann::json& config,
                           const std::filesystem::path& base_dir, const std::filesystem::path& out,
                           std::optional<std::uint64_t> seed_flag, std::optional<int> threads_flag);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Every resolved field, defaults included.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const SynthConfig& synth);
harness::PipelineSpec pipeline_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace eegalign::cli
