#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsol/accumulator.hpp"
#include "qsol/config.hpp"
#include "qsol/experiments.hpp"

namespace qsol {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Config files are JSON with // and /* */ comments allowed. Every field has a
/// default, unknown keys are rejected with their dotted path.
json config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const json& j, SimConfig base = {});
json load_json_file(const fs::path& path);
SimConfig load_config(const fs::path& path);

/// Applies "dotted.key=value"; the value is parsed as JSON when it parses,
/// otherwise taken as a string.
void apply_override(json& j, std::string_view assignment);

/// 16 hex digits of FNV-1a over the canonical JSON form.
std::string config_hash(const SimConfig& cfg);
std::string hash_hex(std::string_view bytes);

/// Seed, grid, convention, version and units shared by every output file.
json run_metadata(const SimConfig& cfg);

/// Writes via a temporary file and rename, so readers never see partial files.
void write_text_atomic(const fs::path& path, std::string_view content);
void write_json(const fs::path& path, const json& j);

/// CSV with one "# key: value" line per metadata entry, a column header, and
/// rows printed with 17 significant digits.
void write_csv(const fs::path& path, const json& meta, std::span<const std::string> columns,
               std::span<const std::vector<double>> data);

/// Raw little-endian float64 array plus a sidecar <path>.json describing
/// shape, axes and units.
void write_array(const fs::path& path, std::span<const double> data,
                 std::span<const std::size_t> shape, const json& descriptor);
std::vector<double> read_array(const fs::path& path);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  json grid;
  std::string convention;
  std::string version;
  double wall_seconds = 0.0;
  std::size_t trajectories = 0;
  std::size_t diverged = 0;
  std::vector<std::string> files;
  json extra = json::object();

  json to_json() const;
};

RunManifest make_manifest(const SimConfig& cfg);
/// manifest.json in `dir`; the file list is sorted.
void write_manifest(const fs::path& dir, RunManifest manifest);

/// <stem>.json (scalars, filtered statistics) and <stem>.csv (spectral arrays).
/// Returns the file names written.
std::vector<std::string> write_report(const fs::path& dir, const std::string& stem,
                                      const NoiseReport& report, const json& meta);

json to_json(const FilteredStats& s);
json to_json(const OptimumResult& r);
json to_json(const TransitionCurve& c);

/// Complex snapshots as float64 pairs, shape [planes, 2 (phi, phi_dag), n, 2].
void write_field_dump(const fs::path& path, std::span<const FieldPair> snapshots,
                      const json& meta);

}  // namespace qsol
