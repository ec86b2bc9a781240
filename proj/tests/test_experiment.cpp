#include <catch2/catch_amalgamated.hpp>

#include <patt/experiment.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

patt::experiment_config tiny_config() {
  patt::experiment_config cfg;
  cfg.seed = 19;
  cfg.chains = 3;
  cfg.iterations = 60;
  cfg.burn_in = 10;
  cfg.threads = 1;
  cfg.window_fraction = 0.5;
  cfg.target.family = "gaussian";
  cfg.target.mean = Eigen::VectorXd::Constant(2, 2.0);
  cfg.target.covariance = Eigen::MatrixXd::Identity(2, 2);

  patt::sampler_config a;
  a.name = "tuned";
  a.kind = patt::sampler_kind::gpss;
  a.w = 3.0;
  a.centering = patt::centering_kind::mean;
  a.scaling = patt::scaling_kind::variance;
  a.schedule.kind = "explicit";
  a.schedule.times = {10, 25};

  patt::sampler_config b;
  b.name = "walk";
  b.kind = patt::sampler_kind::rwm;
  b.sigma = 1.0;
  b.mode = patt::parallel_mode::independent;
  b.schedule.kind = "none";

  cfg.samplers = {a, b};
  return cfg;
}

struct temp_dir {
  fs::path path;
  explicit temp_dir(const std::string& tag) : path(fs::temp_directory_path() / tag) {
    fs::remove_all(path);
  }
  ~temp_dir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("an experiment run writes the full output set", "[experiment]") {
  temp_dir dir("patt_exp_full");
  auto cfg = tiny_config();
  auto result = patt::run_experiment(cfg, dir.path);
  REQUIRE(result.rows.size() == 2);
  REQUIRE(result.threads_used == 1);

  REQUIRE(fs::exists(dir.path / "manifest.json"));
  REQUIRE(fs::exists(dir.path / "metrics.csv"));
  REQUIRE(fs::exists(dir.path / "report.json"));
  REQUIRE(fs::exists(dir.path / "transforms.json"));
  for (const char* row : {"tuned", "walk"}) {
    REQUIRE(fs::exists(dir.path / (std::string(row) + ".samples.csv")));
    REQUIRE(fs::exists(dir.path / (std::string(row) + ".costs.csv")));
  }

  auto manifest = patt::detail::load_json_file(dir.path / "manifest.json");
  REQUIRE(manifest.at("status") == "complete");
  REQUIRE(manifest.at("completed_rows").size() == 2);
  REQUIRE(manifest.contains("config"));
  REQUIRE(manifest.at("config_hash").get<std::string>().size() == 16);

  auto report = patt::detail::load_json_file(dir.path / "report.json");
  REQUIRE(report.at("rows").size() == 2);
  const auto& row0 = report.at("rows").at(0);
  REQUIRE(row0.at("name") == "tuned");
  REQUIRE(row0.at("update_times") == patt::json::array({10, 25}));
  REQUIRE(row0.at("final_transform").at("kind") == "diagonal");

  auto transforms = patt::detail::load_json_file(dir.path / "transforms.json");
  REQUIRE(transforms.at("tuned").at("mode") == "entangled");
  REQUIRE(transforms.at("tuned").at("history").size() == 2);
  REQUIRE(transforms.at("walk").at("mode") == "independent");
  REQUIRE(transforms.at("walk").at("chains").size() == 3);

  // sample dump layout: header plus (burn + main + 1 init row) per chain
  std::ifstream in(dir.path / "tuned.samples.csv");
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "iteration,chain,x1,x2");
  std::int64_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  REQUIRE(lines == 3 * (10 + 60 + 1));
}

TEST_CASE("recomputing a run directory reproduces the metrics", "[experiment]") {
  temp_dir dir("patt_exp_recompute");
  auto cfg = tiny_config();
  auto result = patt::run_experiment(cfg, dir.path);

  std::vector<std::string> notes;
  auto rows = patt::recompute_run_dir(dir.path, &notes);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& fresh = result.rows[i].stats;
    const auto& redo = rows[i];
    REQUIRE(redo.name == fresh.name);
    REQUIRE(redo.window_iterations == fresh.window_iterations);
    REQUIRE(redo.tde_per_it == Catch::Approx(fresh.tde_per_it).epsilon(1e-12));
    REQUIRE(redo.mss == Catch::Approx(fresh.mss).epsilon(1e-9));
    if (std::isnan(fresh.mean_iat)) {
      REQUIRE(std::isnan(redo.mean_iat));
    } else {
      REQUIRE(redo.mean_iat == Catch::Approx(fresh.mean_iat).epsilon(1e-9));
    }
    // timing-derived columns rebuild from the dumped per-transition seconds
    REQUIRE(redo.samples_per_s == Catch::Approx(fresh.samples_per_s).epsilon(1e-6));
  }
}

TEST_CASE("disabling sample dumps degrades recomputation honestly", "[experiment]") {
  temp_dir dir("patt_exp_nodump");
  auto cfg = tiny_config();
  cfg.dump.samples = false;
  auto result = patt::run_experiment(cfg, dir.path);
  REQUIRE_FALSE(fs::exists(dir.path / "tuned.samples.csv"));
  REQUIRE(fs::exists(dir.path / "tuned.costs.csv"));

  std::vector<std::string> notes;
  auto rows = patt::recompute_run_dir(dir.path, &notes);
  REQUIRE(std::isnan(rows[0].mean_iat));
  REQUIRE(std::isnan(rows[0].mss));
  REQUIRE(rows[0].tde_per_it == Catch::Approx(result.rows[0].stats.tde_per_it).epsilon(1e-12));
  bool noted = false;
  for (const auto& n : notes)
    if (n.find("no sample dump") != std::string::npos) noted = true;
  REQUIRE(noted);
}

TEST_CASE("duplicate sampler names are rejected before any work", "[experiment]") {
  auto cfg = tiny_config();
  cfg.samplers[1].name = "tuned";
  REQUIRE_THROWS_AS(patt::run_experiment(cfg, std::nullopt), patt::usage_error);
}

TEST_CASE("abs_shift must match the target dimension", "[experiment]") {
  auto cfg = tiny_config();
  cfg.abs_shift = Eigen::VectorXd::Zero(5);
  REQUIRE_THROWS_AS(patt::run_experiment(cfg, std::nullopt), patt::usage_error);
}

TEST_CASE("thread override beats the config value", "[experiment]") {
  auto cfg = tiny_config();
  cfg.threads = 1;
  auto result = patt::run_experiment(cfg, std::nullopt, 2);
  REQUIRE(result.threads_used == 2);
}

TEST_CASE("the synthetic regression target reports its pipeline", "[experiment]") {
  patt::target_config t;
  t.family = "logistic_synthetic";
  t.n = 40;
  t.d = 3;
  t.data_seed = 5;
  t.normalize = true;
  t.interactions = true;
  auto built = patt::build_target_from_config(t);
  // 3 features + 6 interactions + intercept
  REQUIRE(built.density.dim() == 10);
  bool has_dim_note = false;
  for (const auto& n : built.notes)
    if (n.find("regression dimension 10") != std::string::npos) has_dim_note = true;
  REQUIRE(has_dim_note);
}

TEST_CASE("measurement-model targets build from the config", "[experiment]") {
  patt::target_config t;
  t.family = "exp_measurement_posterior";
  t.dim = 4;
  t.n_measurements = 7;
  t.data_seed = 3;
  auto built = patt::build_target_from_config(t);
  REQUIRE(built.density.dim() == 4);
  auto model = patt::make_exp_measurement_model(4, 7, 3);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.25);
  double want = -x.norm();
  for (std::size_t m = 0; m < model.chol.size(); ++m) {
    Eigen::VectorXd r = model.z.row(static_cast<Eigen::Index>(m)).transpose() - x;
    want -= std::sqrt(patt::quadform_from_chol(model.chol[m], r));
  }
  REQUIRE(built.density(x) == Catch::Approx(want).epsilon(1e-12));
}
