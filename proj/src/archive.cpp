#include "eegalign/archive.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "eegalign/error.hpp"

namespace eegalign {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr std::array<std::uint8_t, 4> kMagic{'E', 'E', 'G', 'A'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
    return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f)
{
    put_u32(out, std::bit_cast<std::uint32_t>(f));
}

std::vector<std::uint8_t> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string subject_file(std::size_t index, const char* suffix)
{
    std::ostringstream os;
    os << "subject_" << std::setw(3) << std::setfill('0') << index << '_' << suffix << ".bin";
    return os.str();
}

std::vector<Trial> to_trials(const DecodedTrials& decoded, const std::string& subject, double fs,
                             TrialKind kind)
{
    std::vector<Trial> out;
    out.reserve(decoded.data.size());
    for (std::size_t i = 0; i < decoded.data.size(); ++i) {
        Trial t;
        t.data = decoded.data[i];
        t.fs = fs;
        if (decoded.labels[i] >= 0)
            t.label = decoded.labels[i];
        t.subject = subject;
        t.kind = kind;
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_trial_file(std::span<const Trial> trials, std::uint32_t n_channels)
{
    std::uint32_t n_samples = 0;
    if (!trials.empty()) {
        n_channels = static_cast<std::uint32_t>(trials.front().n_channels());
        n_samples = static_cast<std::uint32_t>(trials.front().n_samples());
    }
    for (const auto& t : trials) {
        if (t.n_channels() != n_channels || t.n_samples() != n_samples)
            throw Error(ErrorKind::DimensionMismatch, "all trials in one file must share their shape");
        if (t.label && *t.label < 0)
            throw Error(ErrorKind::InvalidArgument, "class labels must be nonnegative");
    }

    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + trials.size() * (4 + 4ull * n_channels * n_samples));
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u32(out, kArchiveVersion);
    put_u32(out, static_cast<std::uint32_t>(trials.size()));
    put_u32(out, n_channels);
    put_u32(out, n_samples);
    for (const auto& t : trials)
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<std::int32_t>(t.label.value_or(-1))));
    for (const auto& t : trials) {
        for (Eigen::Index c = 0; c < t.data.rows(); ++c) {
            for (Eigen::Index s = 0; s < t.data.cols(); ++s) {
                const double v = t.data(c, s);
                if (!std::isfinite(v) || std::abs(v) > std::numeric_limits<float>::max())
                    throw Error(ErrorKind::NonFinite, "sample not representable as finite float32");
                put_f32(out, static_cast<float>(v));
            }
        }
    }
    return out;
}

DecodedTrials decode_trial_file(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kHeaderBytes)
        throw Error(ErrorKind::Truncated, "file shorter than header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw Error(ErrorKind::Format, "bad magic bytes (expected \"EEGA\")");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kArchiveVersion)
        throw Error(ErrorKind::Format, "unsupported archive version " + std::to_string(version));

    DecodedTrials out;
    const std::uint64_t n_trials = get_u32(bytes, 8);
    out.n_channels = get_u32(bytes, 12);
    out.n_samples = get_u32(bytes, 16);

    const std::uint64_t per_trial = std::uint64_t{out.n_channels} * out.n_samples;
    const std::uint64_t expected = kHeaderBytes + 4 * n_trials + 4 * n_trials * per_trial;
    if (bytes.size() < expected)
        throw Error(ErrorKind::Truncated, "declared " + std::to_string(n_trials)
                                              + " trials but payload is too short");
    if (bytes.size() > expected)
        throw Error(ErrorKind::Format, "trailing bytes after declared payload");

    std::size_t offset = kHeaderBytes;
    out.labels.reserve(n_trials);
    for (std::uint64_t i = 0; i < n_trials; ++i, offset += 4)
        out.labels.push_back(std::bit_cast<std::int32_t>(get_u32(bytes, offset)));

    out.data.reserve(n_trials);
    for (std::uint64_t i = 0; i < n_trials; ++i) {
        Eigen::MatrixXd m(out.n_channels, out.n_samples);
        for (Eigen::Index c = 0; c < m.rows(); ++c) {
            for (Eigen::Index s = 0; s < m.cols(); ++s, offset += 4) {
                const float f = std::bit_cast<float>(get_u32(bytes, offset));
                if (!std::isfinite(f))
                    throw Error(ErrorKind::NonFinite, "non-finite sample in trial " + std::to_string(i));
                m(c, s) = static_cast<double>(f);
            }
        }
        out.data.push_back(std::move(m));
    }
    return out;
}

Dataset load_archive(const fs::path& dir)
{
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path))
        throw Error(ErrorKind::Io, "missing manifest: " + manifest_path.string());

    json manifest;
    try {
        const auto raw = read_file(manifest_path);
        manifest = json::parse(raw.begin(), raw.end());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, std::string("manifest is not valid JSON: ") + e.what());
    }

    Dataset ds;
    try {
        if (manifest.at("schema_version").get<int>() != kManifestSchemaVersion)
            throw Error(ErrorKind::Format, "unsupported manifest schema_version");
        ds.task_kind = task_kind_from_string(manifest.at("task_kind").get<std::string>());
        const double rate = manifest.at("fs").get<double>();
        const auto channel_names = manifest.at("channel_names").get<std::vector<std::string>>();
        for (const auto& [key, name] : manifest.at("label_map").items())
            ds.label_map.emplace(std::stoi(key), name.get<std::string>());

        for (const auto& entry : manifest.at("subjects")) {
            SubjectRecord rec;
            rec.id = entry.at("id").get<std::string>();
            rec.channel_names = channel_names;

            auto load_file = [&](const std::string& key, TrialKind kind) {
                const auto bytes = read_file(dir / entry.at(key).get<std::string>());
                try {
                    const auto decoded = decode_trial_file(bytes);
                    if (!decoded.data.empty() && !channel_names.empty()
                        && decoded.n_channels != channel_names.size())
                        throw Error(ErrorKind::Format, "channel count disagrees with manifest");
                    return to_trials(decoded, rec.id, rate, kind);
                } catch (const Error& e) {
                    rethrow_with_context(e, entry.at(key).get<std::string>());
                }
            };
            rec.trials = load_file("trials_file", TrialKind::Task);
            rec.resting = load_file("resting_file", TrialKind::Resting);
            ds.subjects.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, std::string("malformed manifest: ") + e.what());
    }
    return ds;
}

void save_archive(const Dataset& dataset, const fs::path& dir)
{
    validate(dataset);

    std::optional<double> rate;
    std::vector<std::string> channel_names;
    bool names_set = false;
    for (const auto& s : dataset.subjects) {
        for (const auto* list : {&s.trials, &s.resting}) {
            for (const auto& t : *list) {
                if (rate && *rate != t.fs)
                    throw Error(ErrorKind::InvalidArgument, "archive requires a common sampling rate");
                rate = t.fs;
            }
        }
        if (!names_set) {
            channel_names = s.channel_names;
            names_set = true;
        } else if (s.channel_names != channel_names) {
            throw Error(ErrorKind::InvalidArgument, "archive requires common channel names");
        }
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

    json manifest;
    manifest["schema_version"] = kManifestSchemaVersion;
    manifest["task_kind"] = to_string(dataset.task_kind);
    manifest["fs"] = rate.value_or(0.0);
    manifest["channel_names"] = channel_names;
    json label_map = json::object();
    for (const auto& [id, name] : dataset.label_map)
        label_map[std::to_string(id)] = name;
    manifest["label_map"] = label_map;
    manifest["subjects"] = json::array();

    // Encode everything first so an invalid sample never leaves a partial archive.
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files;
    for (std::size_t i = 0; i < dataset.subjects.size(); ++i) {
        const auto& s = dataset.subjects[i];
        std::uint32_t n_channels = static_cast<std::uint32_t>(s.channel_names.size());
        if (!s.trials.empty())
            n_channels = static_cast<std::uint32_t>(s.trials.front().n_channels());
        else if (!s.resting.empty())
            n_channels = static_cast<std::uint32_t>(s.resting.front().n_channels());

        const auto trials_file = subject_file(i, "trials");
        const auto resting_file = subject_file(i, "resting");
        files.emplace_back(trials_file, encode_trial_file(s.trials, n_channels));
        files.emplace_back(resting_file, encode_trial_file(s.resting, n_channels));
        manifest["subjects"].push_back(
            {{"id", s.id}, {"trials_file", trials_file}, {"resting_file", resting_file}});
    }

    for (const auto& [name, bytes] : files)
        write_file(dir / name, bytes);
    const std::string text = manifest.dump(2) + "\n";
    write_file(dir / "manifest.json",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace eegalign
