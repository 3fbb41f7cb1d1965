#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "qsol/figures.hpp"
#include "qsol/io.hpp"

using namespace qsol;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qsol_test_io_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string config_error(const json& j) {
  try {
    config_from_json(j).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config survives a JSON round trip") {
  SimConfig c;
  c.soliton_order = 0.9;
  c.gamma = 0.003;
  c.dispersion = Dispersion::normal;
  c.xi_planes = {1.0, 2.5};
  c.cutoffs = {0.1, 0.125};
  c.stepper.scheme = Scheme::explicit_euler;
  c.raman.enabled = true;
  c.raman.temperature = 77.0;
  c.seed = 123456789012345ull;
  c.units.t0 = 0.5e-12;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_to_json(config_from_json(json::object())) == config_to_json(SimConfig{}));
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error({{"grid", {{"n_pts", 256}}}}) == "grid.n_pts: unknown key");
  CHECK(config_error({{"soliton_ordr", 1.0}}) == "soliton_ordr: unknown key");
  CHECK(config_error({{"grid", {{"n_points", "many"}}}}).starts_with("grid.n_points: wrong type"));
  CHECK(config_error({{"grid", {{"n_points", 100}}}}).starts_with("grid.n_points:"));
  CHECK(config_error({{"trajectories", -5}}).starts_with("trajectories: expected a non-negative"));
  CHECK(config_error({{"stepper", {{"scheme", "rk4"}}}}).starts_with("stepper.scheme"));
  CHECK(config_error({{"dispersion", 3}}) == "dispersion: expected a string");
  CHECK(config_error({{"raman", {{"fraction", 1.5}}}}).starts_with("raman.fraction"));
  CHECK(config_error({{"gamma", 0.1}, {"loss_preset", "fig2-loss"}}).starts_with("loss_preset"));
  CHECK(config_error({{"gamma", 0.1}, {"loss_db_per_km", 0.2}}).starts_with("loss_db_per_km"));
  CHECK(config_error({{"loss_preset", "heavy"}}).starts_with("loss_preset"));
  CHECK(config_error({{"grid", 5}}) == "grid: expected an object");
  CHECK(config_error({{"soliton_order", 1.0}}).empty());
}

TEST_CASE("loss presets resolve to gamma") {
  const auto c = config_from_json({{"loss_preset", "fig2-loss"}});
  CHECK(db_per_period_from_gamma(c.gamma) == doctest::Approx(0.0236));
  const auto d = config_from_json({{"loss_db_per_km", 0.2}});
  CHECK(to_physical(d.units, d.gamma, QuantityKind::loss_rate) == doctest::Approx(0.2));
}

TEST_CASE("command-line overrides") {
  json j = json::object();
  apply_override(j, "grid.n_points=256");
  apply_override(j, "soliton_order=0.7");
  apply_override(j, "dispersion=normal");
  apply_override(j, "raman.enabled=true");
  const auto c = config_from_json(j);
  CHECK(c.grid.n_points == 256);
  CHECK(c.soliton_order == 0.7);
  CHECK(c.dispersion == Dispersion::normal);
  CHECK(c.raman.enabled);
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(j, "soliton_order.x=3"), ConfigError);
}

TEST_CASE("config files may carry comments") {
  TempDir tmp;
  const auto p = tmp.path / "c.json";
  {
    std::ofstream out(p);
    out << "{\n  // soliton order\n  \"soliton_order\": 0.8, /* block */ \"seed\": 5\n}\n";
  }
  const auto c = load_config(p);
  CHECK(c.soliton_order == 0.8);
  CHECK(c.seed == 5);
  CHECK_THROWS_AS(load_config(tmp.path / "missing.json"), ConfigError);
  {
    std::ofstream out(tmp.path / "bad.json");
    out << "{ \"seed\": }";
  }
  CHECK_THROWS_AS(load_config(tmp.path / "bad.json"), ConfigError);
}

TEST_CASE("example config in the repository is complete and valid") {
  const fs::path example = fs::path(QSOL_SOURCE_DIR) / "configs" / "example.json";
  REQUIRE(fs::exists(example));
  const auto j = load_json_file(example);
  const auto c = config_from_json(j);
  c.validate();
  // Every field of the canonical form appears in the example.
  const auto canon = config_to_json(c);
  for (const auto& [k, v] : canon.items()) {
    CAPTURE(k);
    CHECK(j.contains(k));
    if (v.is_object())
      for (const auto& [k2, v2] : v.items()) {
        CAPTURE(k2);
        CHECK(j.at(k).contains(k2));
      }
  }
}

TEST_CASE("FNV-1a hash") {
  CHECK(hash_hex("") == "cbf29ce484222325");
  CHECK(hash_hex("a") == "af63dc4c8601ec8c");
  CHECK(hash_hex("foobar") == "85944171f73967e8");
  SimConfig a, b;
  b.threads = 7;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = a.seed + 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("metadata carries units, convention and provenance") {
  SimConfig c;
  const auto m = run_metadata(c);
  CHECK(m.at("seed") == c.seed);
  CHECK(m.at("config_hash") == config_hash(c));
  CHECK(m.at("transform_convention") == std::string(kTransformConvention));
  CHECK(m.at("units").contains("frequency"));
  CHECK(m.at("grid").at("n_points") == c.grid.n_points);
  c.noise = false;
  CHECK(run_metadata(c).at("n_bar").is_string());
}

TEST_CASE("raw arrays are little-endian float64 with a sidecar") {
  TempDir tmp;
  const std::vector<double> data{1.0, -2.5, 3.141592653589793, 1e-300, 0.0, 6.0};
  const std::vector<std::size_t> shape{2, 3};
  write_array(tmp.path / "a.f64", data, shape, {{"axes", {"plane", "bin"}}});
  const auto bytes = slurp(tmp.path / "a.f64");
  REQUIRE(bytes.size() == 48);
  // 1.0 = 0x3FF0000000000000, least significant byte first.
  const unsigned char one[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  CHECK(std::memcmp(bytes.data(), one, 8) == 0);
  CHECK(read_array(tmp.path / "a.f64") == data);
  const auto side = load_json_file(tmp.path / "a.f64.json");
  CHECK(side.at("shape") == json({2, 3}));
  CHECK(side.at("dtype") == "float64");
  CHECK(side.at("byte_order") == "little");
  CHECK(side.at("axes") == json({"plane", "bin"}));
  CHECK_THROWS(write_array(tmp.path / "b.f64", data, std::vector<std::size_t>{4}, {}));
  CHECK_FALSE(fs::exists(tmp.path / "a.f64.tmp"));
}

TEST_CASE("CSV files carry a metadata header and full precision") {
  TempDir tmp;
  const std::vector<std::string> cols{"x", "y"};
  const std::vector<std::vector<double>> data{{0.1, 1.0 / 3.0}, {-2.0, std::nan("")}};
  write_csv(tmp.path / "t.csv", {{"seed", 7}, {"note", "unit test"}}, cols, data);
  std::istringstream in(slurp(tmp.path / "t.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "# note: unit test");
  std::getline(in, line);
  CHECK(line == "# seed: 7");
  std::getline(in, line);
  CHECK(line == "x,y");
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 0.1);
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 1.0 / 3.0);
  CHECK(line.ends_with(",nan"));
  const std::vector<std::vector<double>> ragged{{1.0}, {1.0, 2.0}};
  CHECK_THROWS(write_csv(tmp.path / "r.csv", json::object(), cols, ragged));
}

TEST_CASE("manifest lists files once, sorted") {
  TempDir tmp;
  SimConfig c;
  auto m = make_manifest(c);
  m.files = {"b.csv", "a.json", "b.csv"};
  write_manifest(tmp.path, m);
  const auto j = load_json_file(tmp.path / "manifest.json");
  CHECK(j.at("files") == json({"a.json", "b.csv"}));
  CHECK(j.at("config_hash") == config_hash(c));
  CHECK(j.at("seed") == c.seed);
  CHECK(j.contains("version"));
  CHECK(j.contains("diverged"));
  CHECK(j.contains("wall_seconds"));
}

TEST_CASE("JSON forms of results map non-finite values to null") {
  FilteredStats s;
  s.fano_db_stderr = std::nan("");
  const auto j = to_json(s);
  CHECK(j.at("fano_db_stderr").is_null());
  CHECK(j.at("fano_db") == 0.0);
  OptimumResult o;
  o.n = 0.9;
  o.xi = 3.0;
  o.cutoff = 0.125;
  const auto k = to_json(o);
  CHECK(k.at("N") == 0.9);
  CHECK(k.at("cutoff") == 0.125);
}

TEST_CASE("simulate writes a reproducible directory") {
  TempDir tmp;
  SimConfig c;
  c.grid = {64, 20.0};
  c.stepper.d_zeta = 0.02;
  c.xi_max = 1.0;
  c.xi_planes = {0.5, 1.0};
  c.trajectories = 32;
  c.batches = 4;
  c.cutoffs = {0.1, 0.2};
  c.threads = 1;
  SimulateOptions opt;
  opt.dump_trajectories = 2;
  const auto s1 = run_simulate(c, tmp.path / "one", opt);
  c.threads = 4;
  const auto s2 = run_simulate(c, tmp.path / "two", opt);
  CHECK(s1.trajectories == 32);
  CHECK_FALSE(s1.divergence_budget_exceeded);
  const auto manifest = load_json_file(tmp.path / "one" / "manifest.json");
  std::size_t compared = 0;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.get<std::string>();
    CAPTURE(name);
    REQUIRE(fs::exists(tmp.path / "one" / name));
    if (name == "manifest.json") continue;
    CHECK(slurp(tmp.path / "one" / name) == slurp(tmp.path / "two" / name));
    ++compared;
  }
  CHECK(compared >= 5);
  CHECK(fs::exists(tmp.path / "one" / "config.json"));
  const auto cfg_back = load_config(tmp.path / "one" / "config.json");
  CHECK(config_hash(cfg_back) == config_hash(c));
}

TEST_CASE("noise-off simulate reports degenerate variance") {
  TempDir tmp;
  SimConfig c;
  c.grid = {64, 20.0};
  c.stepper.d_zeta = 0.02;
  c.xi_max = 0.5;
  c.trajectories = 4;
  c.batches = 2;
  c.noise = false;
  run_simulate(c, tmp.path);
  bool found = false;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    const auto name = e.path().filename().string();
    if (!name.starts_with("report") || e.path().extension() != ".json") continue;
    const auto j = load_json_file(e.path());
    CHECK(j.at("degenerate") == true);
    found = true;
  }
  CHECK(found);
}

TEST_CASE("figure presets") {
  CHECK(is_figure_id("fig4"));
  CHECK_FALSE(is_figure_id("fig6"));
  CHECK_THROWS_AS(run_figure("fig9", Tier::quick, fs::temp_directory_path() / "qsol_never"),
                  ConfigError);
  CHECK(parse_tier("full") == Tier::full);
  CHECK_THROWS_AS(parse_tier("medium"), ConfigError);
  const auto q = tier_base(Tier::quick);
  const auto f = tier_base(Tier::full);
  CHECK(q.grid.n_points <= f.grid.n_points);
  CHECK(q.trajectories < f.trajectories);
  RunOverrides o;
  o.seed = 5;
  o.trajectories = 99;
  o.grid_points = 128;
  o.steps = 400;
  SimConfig c;
  o.apply(c);
  CHECK(c.seed == 5);
  CHECK(c.trajectories == 99);
  CHECK(c.grid.n_points == 128);
  CHECK(c.stepper.d_zeta == doctest::Approx(c.zeta_max() / 400.0));
}
