#include "qsol/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace qsol {

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can
// be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (j_.at(key).is_number() && !j_.at(key).is_number_unsigned())
        throw ConfigError(where(key) + ": expected a non-negative integer (" + j_.at(key).dump() + ")");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  template <class F>
  void get_with(const char* key, F&& parse) {
    seen_.insert(key);
    if (j_.contains(key)) parse(j_.at(key), where(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(std::string_view key) const {
    if (path_.empty()) return std::string(key);
    return key.empty() ? path_ : path_ + "." + std::string(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where(k) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

std::string text_of(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

template <class Parse>
auto enum_of(const json& v, const std::string& where, Parse parse) {
  const auto s = text_of(v, where);
  try {
    return parse(s);
  } catch (const ConfigError& e) {
    // parse_* messages already name the field; keep the dotted path in front.
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(where + (colon == std::string::npos ? ": " + msg : msg.substr(colon)));
  }
}

}  // namespace

json config_to_json(const SimConfig& c) {
  json j;
  j["soliton_order"] = c.soliton_order;
  j["n_bar"] = c.n_bar;
  j["noise"] = c.noise;
  j["nonlinearity"] = c.nonlinearity;
  j["gamma"] = c.gamma;
  j["dispersion"] = to_string(c.dispersion);
  j["input"] = to_string(c.input);
  j["xi_max"] = c.xi_max;
  j["xi_planes"] = c.xi_planes;
  j["cutoffs"] = c.cutoffs;
  j["grid"] = {{"n_points", c.grid.n_points}, {"tau_window", c.grid.tau_window}};
  j["stepper"] = {{"scheme", to_string(c.stepper.scheme)},
                  {"d_zeta", c.stepper.d_zeta},
                  {"divergence_threshold", c.stepper.divergence_threshold},
                  {"midpoint_iterations", c.stepper.midpoint_iterations}};
  j["raman"] = {{"enabled", c.raman.enabled},         {"fraction", c.raman.fraction},
                {"tau1_fs", c.raman.tau1_fs},         {"tau2_fs", c.raman.tau2_fs},
                {"temperature", c.raman.temperature}, {"kernel_table", c.raman.kernel_table}};
  j["units"] = {{"t0", c.units.t0}, {"k2", c.units.k2}};
  j["seed"] = c.seed;
  j["trajectories"] = c.trajectories;
  j["batches"] = c.batches;
  j["threads"] = c.threads;
  j["max_divergence_fraction"] = c.max_divergence_fraction;
  return j;
}

SimConfig config_from_json(const json& j, SimConfig c) {
  ObjectReader r(j, "");
  r.get("soliton_order", c.soliton_order);
  r.get("n_bar", c.n_bar);
  r.get("noise", c.noise);
  r.get("nonlinearity", c.nonlinearity);
  r.get("gamma", c.gamma);
  r.get_with("dispersion", [&](const json& v, const std::string& w) {
    c.dispersion = enum_of(v, w, parse_dispersion);
  });
  r.get_with("input", [&](const json& v, const std::string& w) {
    c.input = enum_of(v, w, parse_input_shape);
  });
  r.get("xi_max", c.xi_max);
  r.get("xi_planes", c.xi_planes);
  r.get("cutoffs", c.cutoffs);
  if (const json* g = r.child("grid")) {
    ObjectReader gr(*g, "grid");
    gr.get("n_points", c.grid.n_points);
    gr.get("tau_window", c.grid.tau_window);
    gr.finish();
  }
  if (const json* s = r.child("stepper")) {
    ObjectReader sr(*s, "stepper");
    sr.get_with("scheme", [&](const json& v, const std::string& w) {
      c.stepper.scheme = enum_of(v, w, parse_scheme);
    });
    sr.get("d_zeta", c.stepper.d_zeta);
    sr.get("divergence_threshold", c.stepper.divergence_threshold);
    sr.get("midpoint_iterations", c.stepper.midpoint_iterations);
    sr.finish();
  }
  if (const json* m = r.child("raman")) {
    ObjectReader mr(*m, "raman");
    mr.get("enabled", c.raman.enabled);
    mr.get("fraction", c.raman.fraction);
    mr.get("tau1_fs", c.raman.tau1_fs);
    mr.get("tau2_fs", c.raman.tau2_fs);
    mr.get("temperature", c.raman.temperature);
    mr.get("kernel_table", c.raman.kernel_table);
    mr.finish();
  }
  if (const json* u = r.child("units")) {
    ObjectReader ur(*u, "units");
    ur.get("t0", c.units.t0);
    ur.get("k2", c.units.k2);
    ur.finish();
  }
  // Convenience loss inputs; both resolve to gamma after the units are known.
  if (r.has("loss_db_per_km") && (r.has("gamma") || r.has("loss_preset")))
    throw ConfigError("loss_db_per_km: give only one of gamma, loss_db_per_km, loss_preset");
  r.get_with("loss_db_per_km", [&](const json& v, const std::string& w) {
    if (!v.is_number()) throw ConfigError(w + ": expected a number");
    c.gamma = from_physical(c.units, v.get<double>(), QuantityKind::loss_rate);
  });
  r.get_with("loss_preset", [&](const json& v, const std::string& w) {
    const auto s = text_of(v, w);
    if (r.has("gamma")) throw ConfigError(w + ": give only one of gamma and loss_preset");
    if (s == "fig2-loss") c.gamma = gamma_from_db_per_period(kFig2LossDbPerPeriod);
    else if (s == "none") c.gamma = 0.0;
    else throw ConfigError(w + ": expected fig2-loss|none, got '" + s + "'");
  });
  r.get("seed", c.seed);
  r.get("trajectories", c.trajectories);
  r.get("batches", c.batches);
  r.get("threads", c.threads);
  r.get("max_divergence_fraction", c.max_divergence_fraction);
  r.finish();
  return c;
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SimConfig load_config(const fs::path& path) { return config_from_json(load_json_file(path)); }

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override '" + key + "': empty key component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override '" + key + "': " + part + " is not a section");
    node = &next;
    start = dot + 1;
  }
}

std::string hash_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const SimConfig& cfg) {
  auto j = config_to_json(cfg);
  j.erase("threads");  // results do not depend on the worker count
  return hash_hex(j.dump());
}

json run_metadata(const SimConfig& cfg) {
  json m;
  m["software"] = "qsoliton";
  m["version"] = QSOL_VERSION;
  m["seed"] = cfg.seed;
  m["config_hash"] = config_hash(cfg);
  m["transform_convention"] = std::string(kTransformConvention);
  m["grid"] = {{"n_points", cfg.grid.n_points},
               {"tau_window", cfg.grid.tau_window},
               {"d_tau", 2.0 * cfg.grid.tau_window / double(cfg.grid.n_points)}};
  m["n_bar"] = cfg.noise ? json(cfg.n_bar) : json("infinite (noise off)");
  m["units"] = {{"frequency", "nu in units of 1/t0"},
                {"distance", "xi in soliton periods, zeta = (pi/2) xi"},
                {"variance", "normal-ordered; shot noise is zero"},
                {"fano", "dB relative to shot noise"},
                {"t0_s", cfg.units.t0},
                {"k2_s2_per_m", cfg.units.k2}};
  return m;
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

namespace {
std::uint64_t swap_bytes(std::uint64_t v) {
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return out;
}

void put_number(std::ostringstream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}
}  // namespace

void write_csv(const fs::path& path, const json& meta, std::span<const std::string> columns,
               std::span<const std::vector<double>> data) {
  if (columns.size() != data.size()) throw std::invalid_argument("write_csv: columns/data mismatch");
  const std::size_t rows = data.empty() ? 0 : data.front().size();
  for (const auto& col : data)
    if (col.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  std::ostringstream os;
  for (const auto& [k, v] : meta.items()) os << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < data.size(); ++c) {
      if (c) os << ",";
      put_number(os, data[c][r]);
    }
    os << "\n";
  }
  write_text_atomic(path, os.str());
}

void write_array(const fs::path& path, std::span<const double> data,
                 std::span<const std::size_t> shape, const json& descriptor) {
  std::size_t count = 1;
  for (auto s : shape) count *= s;
  if (count != data.size()) throw std::invalid_argument("write_array: shape does not match data");
  std::string bytes(data.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(data[i]);
    if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
    std::memcpy(bytes.data() + i * sizeof(double), &bits, sizeof bits);
  }
  write_text_atomic(path, bytes);
  json d = descriptor;
  d["file"] = path.filename().string();
  d["dtype"] = "float64";
  d["byte_order"] = "little";
  d["shape"] = std::vector<std::size_t>(shape.begin(), shape.end());
  d["order"] = "row-major";
  write_json(path.string() + ".json", d);
}

std::vector<double> read_array(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(double)) throw std::runtime_error("truncated array '" + path.string() + "'");
  std::vector<double> out(bytes.size() / sizeof(double));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + i * sizeof(double), sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = swap_bytes(bits);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

json RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["grid"] = grid;
  j["transform_convention"] = convention;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["trajectories"] = trajectories;
  j["diverged"] = diverged;
  j["files"] = files;
  j["extra"] = extra;
  return j;
}

RunManifest make_manifest(const SimConfig& cfg) {
  RunManifest m;
  m.config_hash = config_hash(cfg);
  m.seed = cfg.seed;
  m.grid = {{"n_points", cfg.grid.n_points}, {"tau_window", cfg.grid.tau_window}};
  m.convention = std::string(kTransformConvention);
  m.version = QSOL_VERSION;
  m.trajectories = cfg.trajectories;
  return m;
}

void write_manifest(const fs::path& dir, RunManifest m) {
  std::sort(m.files.begin(), m.files.end());
  m.files.erase(std::unique(m.files.begin(), m.files.end()), m.files.end());
  write_json(dir / "manifest.json", m.to_json());
}

namespace {
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace

json to_json(const FilteredStats& s) {
  return {{"cutoff", s.cutoff},
          {"mean", finite_or_null(s.mean)},
          {"mean_photons", finite_or_null(s.mean_photons)},
          {"variance", finite_or_null(s.variance)},
          {"fano_linear", finite_or_null(s.fano_linear)},
          {"fano_db", finite_or_null(s.fano_db)},
          {"fano_db_stderr", finite_or_null(s.fano_db_stderr)},
          {"control_variate", s.control_variate},
          {"variance_raw", finite_or_null(s.variance_raw)},
          {"fano_db_raw", finite_or_null(s.fano_db_raw)},
          {"fano_db_raw_stderr", finite_or_null(s.fano_db_raw_stderr)},
          {"imag_mean", finite_or_null(s.imag_mean)},
          {"imag_mean_stderr", finite_or_null(s.imag_mean_stderr)},
          {"clamped", s.clamped},
          {"degenerate", s.degenerate}};
}

json to_json(const OptimumResult& r) {
  return {{"N", r.n},
          {"xi", r.xi},
          {"cutoff", r.cutoff},
          {"fano_db", finite_or_null(r.fano_db)},
          {"fano_db_stderr", finite_or_null(r.fano_db_stderr)},
          {"fano_db_raw", finite_or_null(r.fano_db_raw)},
          {"mean_photons", finite_or_null(r.mean_photons)},
          {"worst_stderr_db", finite_or_null(r.worst_stderr_db)},
          {"trajectories", r.trajectories},
          {"diverged", r.diverged},
          {"stderr_target_met", r.stderr_target_met},
          {"degenerate", r.degenerate},
          {"flagged", r.flagged()}};
}

json to_json(const TransitionCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(to_json(p));
  return {{"variant", to_string(c.variant)},
          {"xi_max", c.xi_max},
          {"gamma", c.gamma},
          {"loss_db_per_period", db_per_period_from_gamma(c.gamma)},
          {"temperature_K", c.temperature},
          {"knee_N", finite_or_null(knee_location(c))},
          {"points", pts}};
}

std::vector<std::string> write_report(const fs::path& dir, const std::string& stem,
                                      const NoiseReport& r, const json& meta) {
  json j = meta;
  j["zeta"] = r.zeta;
  j["xi"] = zeta_to_xi(r.zeta);
  j["samples"] = r.samples;
  j["diverged"] = r.diverged;
  j["degenerate"] = r.degenerate;
  json f = json::array();
  for (const auto& s : r.filtered) f.push_back(to_json(s));
  j["filtered"] = f;
  write_json(dir / (stem + ".json"), j);

  json csv_meta = meta;
  csv_meta["zeta"] = r.zeta;
  csv_meta["samples"] = r.samples;
  const std::vector<std::string> cols{"nu", "mean", "mean_stderr", "variance", "variance_stderr",
                                      "variance_normalized", "imag_mean", "imag_mean_stderr"};
  const std::vector<std::vector<double>> data{r.nu,         r.mean_spectrum, r.mean_stderr,
                                              r.var_spectrum, r.var_stderr,  r.var_normalized,
                                              r.imag_mean,  r.imag_stderr};
  write_csv(dir / (stem + ".csv"), csv_meta, cols, data);
  return {stem + ".json", stem + ".csv"};
}

void write_field_dump(const fs::path& path, std::span<const FieldPair> snaps, const json& meta) {
  const std::size_t n = snaps.empty() ? 0 : snaps.front().size();
  std::vector<double> data;
  data.reserve(snaps.size() * 4 * n);
  json zetas = json::array();
  for (const auto& s : snaps) {
    if (s.size() != n) throw std::invalid_argument("write_field_dump: ragged snapshots");
    zetas.push_back(s.zeta);
    for (const auto* v : {&s.phi, &s.phi_dag})
      for (auto z : *v) {
        data.push_back(z.real());
        data.push_back(z.imag());
      }
  }
  json d = meta;
  d["axes"] = {"plane", "field (phi, phi_dag)", "tau index", "re/im"};
  d["zeta"] = zetas;
  d["units"] = "dimensionless photon-flux amplitude";
  const std::size_t shape[] = {snaps.size(), 2, n, 2};
  write_array(path, data, shape, d);
}

}  // namespace qsol
