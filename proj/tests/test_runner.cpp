#include <catch2/catch_amalgamated.hpp>

#include <patt/runner.hpp>
#include <patt/targets.hpp>

#include <cmath>
#include <numeric>

namespace {

patt::log_density shifted_gaussian(Eigen::Index d, double shift) {
  Eigen::VectorXd tau = Eigen::VectorXd::Constant(d, shift);
  Eigen::MatrixXd pi = Eigen::MatrixXd::Identity(d, d);
  return patt::gaussian_target(tau, pi);
}

patt::sampler_setup gpss_cen_var(std::optional<patt::update_schedule> sched) {
  patt::sampler_setup s;
  s.name = "probe";
  s.params = patt::default_params(patt::sampler_kind::gpss);
  s.adjustments.centering = patt::centering_kind::mean;
  s.adjustments.scaling = patt::scaling_kind::variance;
  s.schedule = std::move(sched);
  return s;
}

bool states_identical(const patt::run_report& a, const patt::run_report& b) {
  if (a.chains.size() != b.chains.size()) return false;
  for (std::size_t i = 0; i < a.chains.size(); ++i) {
    const auto& sa = a.chains[i].states;
    const auto& sb = b.chains[i].states;
    if (sa.rows() != sb.rows() || sa.cols() != sb.cols()) return false;
    if (!(sa.array() == sb.array()).all()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("trace shapes and counters are consistent", "[runner]") {
  auto target = shifted_gaussian(3, 1.0);
  auto setup = gpss_cen_var(patt::update_schedule::explicit_times({5, 10}));
  patt::run_config cfg;
  cfg.p = 2;
  cfg.n_its = 40;
  cfg.n_burn = 10;
  cfg.seed = 11;
  cfg.threads = 1;
  auto rep = patt::run_sampler(target, setup, cfg);
  REQUIRE(rep.p == 2);
  REQUIRE(rep.n_burn == 10);
  REQUIRE(rep.dim == 3);
  for (const auto& c : rep.chains) {
    REQUIRE(c.states.rows() == 10 + 40 + 1);  // init row + burn-in + main phase
    REQUIRE(c.tde.size() == 50);
    REQUIRE(c.seconds.size() == 50);
    const std::uint64_t total =
        std::accumulate(c.tde.begin(), c.tde.end(), std::uint64_t{0});
    REQUIRE(c.evals == total);
  }
  REQUIRE(rep.update_times == std::vector<std::int64_t>{5, 10});
  REQUIRE(rep.update_seconds.size() == 2);
  for (const auto& c : rep.chains) REQUIRE(c.waits.size() == 2);
}

TEST_CASE("default burn-in is a tenth of the main phase", "[runner]") {
  auto target = shifted_gaussian(2, 0.0);
  auto setup = gpss_cen_var(patt::update_schedule::none());
  patt::run_config cfg;
  cfg.p = 1;
  cfg.n_its = 50;
  cfg.seed = 2;
  cfg.threads = 1;
  auto rep = patt::run_sampler(target, setup, cfg);
  REQUIRE(rep.n_burn == 5);
  REQUIRE(rep.chains[0].states.rows() == 5 + 50 + 1);
}

TEST_CASE("thread counts do not change the trajectories", "[runner]") {
  auto target = shifted_gaussian(4, 2.0);
  patt::run_config cfg;
  cfg.p = 4;
  cfg.n_its = 120;
  cfg.n_burn = 20;
  cfg.seed = 33;
  cfg.init.sd = 2.0;

  for (auto mode : {patt::parallel_mode::entangled, patt::parallel_mode::independent}) {
    auto setup = gpss_cen_var(patt::update_schedule::explicit_times({10, 30, 60}));
    setup.mode = mode;
    cfg.threads = 1;
    auto seq = patt::run_sampler(target, setup, cfg);
    cfg.threads = 0;  // one thread per chain
    auto par = patt::run_sampler(target, setup, cfg);
    cfg.threads = 3;  // ragged split across workers
    auto rag = patt::run_sampler(target, setup, cfg);
    REQUIRE(states_identical(seq, par));
    REQUIRE(states_identical(seq, rag));
  }
}

TEST_CASE("the transform log freezes once the schedule is exhausted", "[runner]") {
  auto target = shifted_gaussian(3, 5.0);
  auto setup = gpss_cen_var(patt::update_schedule::explicit_times({10, 20}));
  patt::run_config cfg;
  cfg.p = 3;
  cfg.n_its = 200;
  cfg.n_burn = 0;
  cfg.seed = 4;
  cfg.threads = 1;
  auto rep = patt::run_sampler(target, setup, cfg);
  REQUIRE(rep.transforms.size() == 2);
  REQUIRE(rep.transforms[0].iteration == 10);
  REQUIRE(rep.transforms[1].iteration == 20);
  // the final transform is the map built at the last schedule time
  const auto& fin = rep.final_transform();
  REQUIRE(fin.kind() == patt::map_kind::diagonal);
  REQUIRE((fin.center() - rep.transforms[1].map.center()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("every-iteration scheduling rebuilds at 2..n", "[runner]") {
  auto target = shifted_gaussian(2, 1.0);
  auto setup = gpss_cen_var(patt::update_schedule::every_iteration());
  patt::run_config cfg;
  cfg.p = 2;
  cfg.n_its = 12;
  cfg.n_burn = 0;
  cfg.seed = 9;
  cfg.threads = 1;
  auto rep = patt::run_sampler(target, setup, cfg);
  std::vector<std::int64_t> want(11);
  std::iota(want.begin(), want.end(), 2);
  REQUIRE(rep.update_times == want);
  REQUIRE(rep.transforms.size() == want.size());
}

TEST_CASE("burn-in samples feed adaptation only when asked", "[runner]") {
  auto target = shifted_gaussian(2, 3.0);
  patt::run_config cfg;
  cfg.p = 2;
  cfg.n_its = 30;
  cfg.n_burn = 20;
  cfg.seed = 21;
  cfg.threads = 1;
  cfg.init.point = true;
  cfg.init.mean = Eigen::VectorXd::Constant(2, -50.0);  // far from the target

  auto plain = gpss_cen_var(patt::update_schedule::explicit_times({2}));
  auto rep_without = patt::run_sampler(target, plain, cfg);

  auto with = gpss_cen_var(patt::update_schedule::explicit_times({2}));
  with.include_burnin_in_adaptation = true;
  auto rep_with = patt::run_sampler(target, with, cfg);

  REQUIRE(rep_without.transforms.size() == 1);
  REQUIRE(rep_with.transforms.size() == 1);
  const auto& c0 = rep_without.transforms[0].map.center();
  const auto& c1 = rep_with.transforms[0].map.center();
  // burn-in rows start at -50 and dominate the pooled mean when included
  REQUIRE(c1[0] < c0[0]);
  REQUIRE((c0 - c1).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("independent chains match single-chain runs stream for stream", "[runner]") {
  auto target = shifted_gaussian(3, 1.5);
  patt::run_config multi;
  multi.p = 3;
  multi.n_its = 80;
  multi.n_burn = 10;
  multi.seed = 77;
  multi.threads = 1;

  auto setup = gpss_cen_var(patt::update_schedule::explicit_times({15, 40}));
  setup.mode = patt::parallel_mode::independent;
  auto rep = patt::run_sampler(target, setup, multi);
  REQUIRE(rep.transforms.empty());  // tuning history lives on the chains
  for (const auto& c : rep.chains) {
    REQUIRE(c.transforms.size() == 2);
    REQUIRE(c.transforms[0].iteration == 15);
  }

  // chain 0 of the ensemble is bitwise the chain of a p=1 run
  patt::run_config solo = multi;
  solo.p = 1;
  auto one = patt::run_sampler(target, setup, solo);
  REQUIRE((one.chains[0].states.array() == rep.chains[0].states.array()).all());
}

TEST_CASE("analysis windows cover the tail of the main phase", "[runner]") {
  auto target = shifted_gaussian(2, 0.0);
  auto setup = gpss_cen_var(std::nullopt);  // adjustment-default schedule
  patt::run_config cfg;
  cfg.p = 1;
  cfg.n_its = 10;
  cfg.n_burn = 4;
  cfg.seed = 5;
  cfg.threads = 1;
  auto rep = patt::run_sampler(target, setup, cfg);
  REQUIRE(rep.window_rows(0.5) == 5);
  REQUIRE(rep.window_rows(1.0) == 10);
  auto block = rep.analysis_block(0, 0.5);
  REQUIRE(block.rows() == 5);
  // the last window row is the last state
  const auto& st = rep.chains[0].states;
  REQUIRE((block.row(4) - st.row(st.rows() - 1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid run configurations are rejected", "[runner]") {
  auto target = shifted_gaussian(2, 0.0);
  auto setup = gpss_cen_var(std::nullopt);
  patt::run_config cfg;
  cfg.p = 0;
  cfg.n_its = 10;
  REQUIRE_THROWS_AS(patt::run_sampler(target, setup, cfg), patt::usage_error);
  cfg.p = 2;
  cfg.n_its = 0;
  REQUIRE_THROWS_AS(patt::run_sampler(target, setup, cfg), patt::usage_error);
  // out-of-range worker counts are clamped, not rejected
  cfg.n_its = 10;
  cfg.threads = 50;
  REQUIRE_NOTHROW(patt::run_sampler(target, setup, cfg));
}
