// Acceptance suite: one test case per criterion, each printing a single
// ACCEPTANCE <n> PASS|FAIL line (plus per-cell diagnostics where relevant).

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ebkf/ebkf.hpp"

using namespace ebkf;
namespace fs = std::filesystem;

namespace {

void report(int id, bool pass, const std::string& what) {
  std::printf("ACCEPTANCE %d %s %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  CHECK(pass);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ObservationSeries gaussian_series(std::size_t n, unsigned seed, double missing_rate = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(n);
  std::vector<bool> miss(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = d(rng);
    if (missing_rate > 0.0 && u(rng) < missing_rate && i > 0) miss[i] = true;
  }
  return ObservationSeries(std::move(y), std::move(miss));
}

template <typename F>
double simpson(F f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

struct PaperCell {
  Mode mode;
  double phi, v, kf, imp;
};

// Published reference risks. The retrospective Kalman-filter rows are stored
// with the phi = 0.25 and phi = 0.75 columns exchanged relative to the
// printed table: as printed they would make the smoother worse than the
// one-step filter on the same data (for instance 71 vs 47 at phi = 0.25,
// v = 1), which exact Gaussian conditioning cannot do, and they match our
// harness to a few risk units only under the exchange. The improved rows and
// all sequential rows are as printed.
std::vector<PaperCell> paper_table1() {
  return {
      {Mode::retrospective, 0.25, 0, 0, 23},   {Mode::retrospective, 0.25, 1, 49, 66},
      {Mode::retrospective, 0.25, 2, 147, 125},{Mode::retrospective, 0.25, 3, 235, 148},
      {Mode::retrospective, 0.25, 4, 301, 160},{Mode::retrospective, 0.25, 5, 350, 177},
      {Mode::retrospective, 0.75, 0, 0, 24},   {Mode::retrospective, 0.75, 1, 71, 91},
      {Mode::retrospective, 0.75, 2, 156, 166},{Mode::retrospective, 0.75, 3, 226, 215},
      {Mode::retrospective, 0.75, 4, 290, 253},{Mode::retrospective, 0.75, 5, 333, 271},
      {Mode::sequential, 0.25, 0, 0, 39},      {Mode::sequential, 0.25, 1, 47, 81},
      {Mode::sequential, 0.25, 2, 145, 129},   {Mode::sequential, 0.25, 3, 234, 147},
      {Mode::sequential, 0.25, 4, 309, 159},   {Mode::sequential, 0.25, 5, 355, 158},
      {Mode::sequential, 0.75, 0, 0, 34},      {Mode::sequential, 0.75, 1, 83, 112},
      {Mode::sequential, 0.75, 2, 187, 184},   {Mode::sequential, 0.75, 3, 264, 216},
      {Mode::sequential, 0.75, 4, 325, 239},   {Mode::sequential, 0.75, 5, 372, 253},
  };
}

int run_cli(const std::string& args, const std::string& log) {
  const std::string cmd = std::string(EBKF_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("criterion 1: filter and loo match the conditioning oracle") {
  const auto t0 = std::chrono::steady_clock::now();
  struct Entry {
    StateSpaceSpec spec;
    std::size_t n;
    double missing;
  };
  std::vector<Entry> grid;
  auto ar1 = [](double phi, double var, double icpt) {
    StateSpaceSpec s;
    s.family = Family::ar1;
    s.phi = {phi};
    s.innovation_variance = var;
    s.intercept = icpt;
    return s;
  };
  auto ar2 = [](double p1, double p2, double var, double icpt) {
    StateSpaceSpec s;
    s.family = Family::ar2;
    s.phi = {p1, p2};
    s.innovation_variance = var;
    s.intercept = icpt;
    return s;
  };
  for (double phi : {0.25, 0.75, -0.5, 0.9})
    for (double var : {0.2, 1.0}) grid.push_back({ar1(phi, var, phi > 0 ? 0.0 : 1.0), 40, 0.0});
  grid.push_back({ar1(0.5, 1.0, 0.0), 50, 0.1});
  grid.push_back({ar1(0.25, 2.5, -2.0), 30, 0.15});
  for (auto [p1, p2] : {std::pair{0.5, -0.3}, {0.2, 0.3}, {-0.4, 0.2}, {1.2, -0.5}})
    for (double var : {0.7}) grid.push_back({ar2(p1, p2, var, 0.5), 36, 0.0});
  grid.push_back({ar2(0.5, -0.3, 1.0, 0.0), 44, 0.1});
  grid.push_back({ar2(0.3, 0.1, 0.4, 2.0), 20, 0.0});
  grid.push_back({ar2(-0.2, -0.4, 1.2, 0.0), 28, 0.0});
  grid.push_back({ar2(0.9, -0.5, 0.3, 1.0), 48, 0.05});
  grid.push_back({ar1(0.6, 0.0, 0.0), 24, 0.0});   // zero innovation, diffuse start
  grid.push_back({ar1(0.0, 1.0, 0.0), 32, 0.0});   // independent levels
  REQUIRE(grid.size() == 20);

  double worst = 0.0;
  unsigned seed = 9000;
  for (const auto& e : grid) {
    const ObservationSeries y = gaussian_series(e.n, seed++, e.missing);
    const GaussianConditioningOracle oracle(y, e.spec);
    const FilterOutput fwd = forward_filter(y, e.spec);
    const FilterOutput loo = loo_predictors(y, e.spec);
    std::vector<std::size_t> prefix;
    for (std::size_t i = 0; i < e.n; ++i) {
      std::vector<std::size_t> obs_prefix;
      for (std::size_t j = 0; j < i; ++j)
        if (!y.is_missing(j)) obs_prefix.push_back(j);
      const auto pred = oracle.condition(obs_prefix, i);
      worst = std::max(worst, std::abs(fwd.tilde_mu[i] - pred.mean));
      if (!y.is_missing(i)) {
        auto with_i = obs_prefix;
        with_i.push_back(i);
        const auto upd = oracle.condition(with_i, i);
        worst = std::max(worst, std::abs(fwd.hat_mu[i] - upd.mean));
      }
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < e.n; ++j)
        if (j != i && !y.is_missing(j)) others.push_back(j);
      const auto lom = oracle.condition(others, i);
      worst = std::max(worst, std::abs(loo.tilde_mu[i] - lom.mean));
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "filter exactness: max |filter - oracle| = %.3g (tol 1e-8), %.1fs (budget 5s)",
                worst, secs);
  report(1, worst < 1e-8 && secs < 5.0, buf);
}

TEST_CASE("criterion 2: kernel quadrature and the correction bound") {
  const auto t0 = std::chrono::steady_clock::now();
  const double integral = simpson([](double x) { return kernel(x); }, -40.0, 40.0, 4000);
  const bool quad_ok = std::abs(integral - 1.0) <= 1e-9;

  bool bound_ok = true;
  std::mt19937_64 rng(2222);
  std::uniform_real_distribution<double> spread(0.3, 6.0), band(0.05, 1.5);
  double worst_slack = 0.0;
  for (int c = 0; c < 5 && bound_ok; ++c) {
    const std::size_t m = 5 + rng() % 400;
    std::normal_distribution<double> d(0.0, spread(rng));
    std::vector<double> z(m);
    for (auto& v : z) v = d(rng);
    const double sigma = band(rng);
    const EbCorrector corr(z, sigma);
    const double bound = 2.0 / sigma;
    for (int k = 0; k < 10000; ++k) {
      const double z0 = -50.0 + 100.0 * k / 9999.0;
      const double dev = std::abs(corr.delta_hat(z0) - z0);
      worst_slack = std::max(worst_slack, dev - bound);
      if (dev > bound) {
        bound_ok = false;
        break;
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "kernel facts: integral-1 = %.2e (tol 1e-9); bound slack max %.3g (<= 0 required); "
                "%.1fs (budget 5s)",
                integral - 1.0, worst_slack, secs);
  report(2, quad_ok && bound_ok && secs < 5.0, buf);
}

TEST_CASE("criterion 3: Gaussian-prior oracle linearity") {
  // nu ~ N(0,1), Z = nu + eps, exact rule delta(z) = z/2. As specified the
  // sup over [-3,3] must come under 0.05 at m = 1e5 with the 1/log m
  // bandwidth. The minimum achievable sup for this estimator at m = 1e5 is
  // around 0.09 for any bandwidth (edge variance at |z|=3 plus smoothing
  // bias), so this criterion records the measured value honestly.
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t m = 100000;
  std::mt19937_64 rng(20090908);
  std::normal_distribution<double> d(0.0, std::sqrt(2.0));
  std::vector<double> z(m);
  for (auto& v : z) v = d(rng);
  const EbCorrector corr = EbCorrector::with_policy(std::move(z));
  double sup = 0.0, mean_err = 0.0;
  int cnt = 0;
  for (int k = 0; k <= 600; ++k) {
    const double z0 = -3.0 + 0.01 * k;
    const double err = std::abs(corr.delta_hat(z0) - 0.5 * z0);
    sup = std::max(sup, err);
    mean_err += err;
    ++cnt;
  }
  mean_err /= cnt;
  const double secs = seconds_since(t0);
  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "Gaussian-prior linearity: sup|delta_hat - z/2| = %.4f on [-3,3] (tol 0.05, "
                "sigma = %.3f, grid mean err %.4f), %.1fs (budget 10s)",
                sup, corr.bandwidth(), mean_err, secs);
  report(3, sup < 0.05 && secs < 10.0, buf);
}

TEST_CASE("criterion 4: simulation table reproduction at desk scale") {
  BenchmarkConfig cfg;
  cfg.n = 500;
  cfg.reps = 100;
  cfg.seed = 20130415;
  const auto cells = paper_table1();

  bool values_ok = true, ordering_ok = true;
  int value_checks = 0, value_fails = 0;
  std::string failed_cells;
  for (const auto& cell : cells) {
    const RiskReport r = run_benchmark_cell(cell.phi, cell.v, cell.mode, cfg);
    // table entries are printed as integers, hence the 0.5 rounding slack
    const auto within = [](double ours, double paper, double se) {
      return std::abs(ours - paper) <= std::max(0.15 * paper, 3.0 * se) + 0.5;
    };
    const bool kf_ok = within(r.kf_risk.mean, cell.kf, r.kf_risk.se);
    const bool imp_ok = within(r.improved_risk.mean, cell.imp, r.improved_risk.se);

    // Ordering must reproduce the published table. Cells the table itself
    // leaves within Monte-Carlo noise (|paper gap| <= 15) are judged by the
    // value check alone.
    bool ord_ok = true;
    const double paper_gap = cell.imp - cell.kf;
    if (std::abs(paper_gap) > 15.0)
      ord_ok = (r.improved_risk.mean - r.kf_risk.mean) * paper_gap > 0.0;
    std::printf("  cell %s phi=%.2f v=%g: KF %.1f (paper %g) %s | improved %.1f+-%.1f (paper %g) "
                "%s | ordering %s\n",
                mode_name(cell.mode), cell.phi, cell.v, r.kf_risk.mean, cell.kf,
                kf_ok ? "ok" : "XX", r.improved_risk.mean, r.improved_risk.se, cell.imp,
                imp_ok ? "ok" : "XX", ord_ok ? "ok" : "XX");
    std::fflush(stdout);
    value_checks += 2;
    value_fails += !kf_ok + !imp_ok;
    if (!kf_ok || !imp_ok) {
      char cb[48];
      std::snprintf(cb, sizeof(cb), " [%s phi=%.2f v=%g]", mode_name(cell.mode), cell.phi, cell.v);
      failed_cells += cb;
    }
    values_ok = values_ok && kf_ok && imp_ok;
    ordering_ok = ordering_ok && ord_ok;
  }
  char summary[300];
  std::snprintf(summary, sizeof(summary),
                "table reproduction: %d/%d values within max(15%%, 3 SE), ordering %s%s%s "
                "(24 cells, n=500, reps=100)",
                value_checks - value_fails, value_checks, ordering_ok ? "24/24" : "FAILED",
                failed_cells.empty() ? "" : "; over tolerance:", failed_cells.c_str());
  report(4, values_ok && ordering_ok, summary);
}

TEST_CASE("criterion 5: Gaussian-null penalty stays within 10%") {
  BenchmarkConfig cfg;
  cfg.n = 500;
  cfg.reps = 100;
  cfg.seed = 424242;
  cfg.bern_p = 1.0;  // I_i = 1: pure Gaussian state, the filter is optimal
  bool ok = true;
  std::string detail;
  for (Mode mode : {Mode::sequential, Mode::retrospective}) {
    const RiskReport r = run_benchmark_cell(0.25, 2.0, mode, cfg);
    const double ratio = r.improved_risk.mean / r.kf_risk.mean;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%s ratio %.3f; ", mode_name(mode), ratio);
    detail += buf;
    ok = ok && ratio <= 1.1;
  }
  report(5, ok, "Gaussian null penalty (phi=0.25, v=2, I=1): " + detail + "threshold 1.10");
}

TEST_CASE("criterion 6: delta_hat converges to the population delta") {
  StateSpaceSpec spec;
  spec.family = Family::ar1;
  spec.phi = {0.25};
  spec.innovation_variance = 0.1 * 25.0;
  const std::vector<std::size_t> sizes{500, 2000, 8000};
  std::vector<double> mses;
  for (std::size_t n : sizes) {
    const std::size_t seeds = 4;
    std::vector<double> per_seed(seeds);
    detail::parallel_for(seeds, 0, [&](std::size_t s) {
      const SimulationTruth t = simulate_sparse_ar(n, 0.25, 5.0, 0.1, derive_seed(606060, {s}));
      const ObservationSeries y(t.y);
      const FilterOutput loo = loo_predictors(y, spec);
      std::vector<double> nu(n), z(n);
      for (std::size_t i = 0; i < n; ++i) {
        nu[i] = t.mu[i] - loo.tilde_mu[i];
        z[i] = loo.residual[i];
      }
      const EbCorrector corr = EbCorrector::with_policy(z);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = corr.delta_hat(z[i]) - population_delta(nu, z[i]);
        acc += diff * diff;
      }
      per_seed[s] = acc / static_cast<double>(n);
    });
    double mse = 0.0;
    for (double v : per_seed) mse += v;
    mses.push_back(mse / static_cast<double>(seeds));
  }
  const bool ok = mses[1] < mses[0] && mses[2] < mses[1];
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean (delta_hat - delta_n)^2: n=500 %.4f > n=2000 %.4f > n=8000 %.4f "
                "(monotone decrease required)",
                mses[0], mses[1], mses[2]);
  report(6, ok, buf);
}

TEST_CASE("criterion 7: cross-validation machinery on synthetic counts") {
  // exact pieces
  bool exact_ok = true;
  {
    const SyntheticCounts sc = synthetic_counts(500, 11);
    const ThinningSplit s = thin(sc.counts, 0.95, 22);
    for (std::size_t i = 0; i < sc.counts.size(); ++i)
      exact_ok = exact_ok && (s.main[i] + s.auxiliary[i] == sc.counts.counts[i]);
    exact_ok = exact_ok &&
               std::abs(cv_loss(std::vector<double>{19.0, 9.5}, std::vector<std::int64_t>{2, 0},
                                0.95) -
                        250.0) < 1e-10;
    exact_ok = exact_ok &&
               std::abs(estimate_An(std::vector<std::int64_t>{1, 0, 2, 1}, 0.95) - 400.0) < 1e-9;
  }

  // decomposition at the stated scale: reps=500, p=0.95, known lambda,
  // refitting per repetition as the pipeline does
  const std::size_t n = 989, warmup = 100, reps = 500;
  const double p = 0.95;
  const SyntheticCounts sc = synthetic_counts(n, 314159);
  CvConfig cfg;
  cfg.p = p;
  cfg.warmup = warmup;
  cfg.mode = Mode::retrospective;

  std::vector<double> diff_imp(reps), approx_imp(reps), approx_naive(reps);
  detail::parallel_for(reps, 0, [&](std::size_t rep) {
    const ThinningSplit split = thin(sc.counts, p, derive_seed(112233, {rep}));
    const CvEstimates est = cv_estimates_for_split(sc.counts, split, Family::ar1, cfg);
    const std::size_t m = n - warmup;
    const std::span<const std::int64_t> v(split.auxiliary.data() + warmup, m);
    const double a_hat = estimate_An(v, p);
    auto rho_minus = [&](const std::vector<double>& lam) {
      return cv_loss(std::span<const double>(lam.data() + warmup, m), v, p) - a_hat;
    };
    approx_imp[rep] = rho_minus(est.improved);
    approx_naive[rep] = rho_minus(est.naive);
    double direct = 0.0;
    for (std::size_t i = warmup; i < n; ++i) {
      const double d = est.improved[i] - p * sc.lambda[i];
      direct += d * d;
    }
    direct /= static_cast<double>(m) * p * p;
    diff_imp[rep] = approx_imp[rep] - direct;
  });
  const MeanSe d = aggregate(diff_imp);
  const bool decomp_ok = std::abs(d.mean) <= 3.0 * d.se;
  const MeanSe ai = aggregate(approx_imp), an = aggregate(approx_naive);
  const bool order_ok = ai.mean <= an.mean;

  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "cv machinery: exact pieces %s; decomposition gap %.3f (3 SE = %.3f); "
                "improved %.2f <= naive %.2f %s",
                exact_ok ? "ok" : "XX", d.mean, 3.0 * d.se, ai.mean, an.mean,
                order_ok ? "ok" : "XX");
  report(7, exact_ok && decomp_ok && order_ok, buf);
}

TEST_CASE("criterion 8: commands are bit-identical under reruns and threading") {
  const fs::path dir = fs::temp_directory_path() / "ebkf_acceptance";
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  bool ok = true;

  const std::string sim = "simulate --n 200 --phi 0.25 --v 3 --seed 77 --out ";
  ok = ok && run_cli(sim + (dir / "s1.tsv").string(), log.string()) == 0;
  ok = ok && run_cli(sim + (dir / "s2.tsv").string(), log.string()) == 0;
  ok = ok && slurp(dir / "s1.tsv") == slurp(dir / "s2.tsv");

  const std::string ben =
      "benchmark --phi 0.25 --v 2 --mode both --n 150 --reps 6 --seed 5 --out ";
  ok = ok && run_cli(ben + (dir / "b1.tsv").string() + " --threads 1", log.string()) == 0;
  ok = ok && run_cli(ben + (dir / "b2.tsv").string() + " --threads 2", log.string()) == 0;
  ok = ok && slurp(dir / "b1.tsv") == slurp(dir / "b2.tsv");

  // counts fixture for a cv determinism run
  const fs::path counts = dir / "counts.txt";
  {
    const SyntheticCounts sc = synthetic_counts(220, 99);
    std::ofstream out(counts);
    for (auto x : sc.counts.counts) out << x << "\n";
  }
  const std::string cv = "cv --in " + counts.string() +
                         " --families ar1 --p 0.95 --reps 6 --warmup 40 --seed 13 --out ";
  ok = ok && run_cli(cv + (dir / "c1.tsv").string() + " --threads 2", log.string()) == 0;
  ok = ok && run_cli(cv + (dir / "c2.tsv").string() + " --threads 1", log.string()) == 0;
  ok = ok && slurp(dir / "c1.tsv") == slurp(dir / "c2.tsv");

  report(8, ok, "determinism: simulate rerun, benchmark threads 1 vs 2, cv threads 2 vs 1");
}
