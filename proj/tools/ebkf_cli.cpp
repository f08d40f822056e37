// Command-line surface for the ebkf library: simulate, filter, improve,
// benchmark and cv subcommands over delimited text files.
//
// Exit codes: 0 success, 2 usage error, 3 data/spec error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ebkf/ebkf.hpp"

namespace {

struct SpecFlags {
  std::string family = "ar1";
  std::vector<double> phi{0.0};
  double intercept = 0.0;
  double innovation_var = 1.0;
  double obs_var = 1.0;
  double diffuse_scale = 1e7;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "Model family: ar1, ar2 or arima110")
        ->check(CLI::IsMember({"ar1", "ar2", "arima110"}));
    cmd->add_option("--phi", phi, "AR coefficients (1 for ar1/arima110, 2 for ar2)")
        ->delimiter(',');
    cmd->add_option("--intercept", intercept, "Mean level (drift per step for arima110)");
    cmd->add_option("--innovation-var", innovation_var, "State shock variance");
    cmd->add_option("--obs-var", obs_var, "Observation noise variance");
    cmd->add_option("--diffuse-scale", diffuse_scale, "Initial state variance without a stationary start");
  }

  ebkf::StateSpaceSpec to_spec() const {
    ebkf::StateSpaceSpec s;
    s.family = ebkf::family_from_name(family);
    s.phi = phi;
    s.intercept = intercept;
    s.innovation_variance = innovation_var;
    s.obs_noise_variance = obs_var;
    s.diffuse_scale = diffuse_scale;
    ebkf::validate_spec(s);
    return s;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ebkf::data_error("cannot open output file '" + path + "'");
  return out;
}

ebkf::BandwidthPolicy bandwidth_policy(double scale, double fixed) {
  ebkf::BandwidthPolicy p;
  p.scale = scale;
  if (fixed > 0.0) p.fixed = fixed;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical-Bayes improved Kalman filtering for Gaussian and count series"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file (flags win)");

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Generate a sparse-shock AR(1) realization");
  std::size_t sim_n = 500;
  double sim_phi = 0.25, sim_v = 1.0, sim_p = 0.1;
  ebkf::Seed sim_seed = 1;
  std::string sim_out;
  sim->add_option("--n", sim_n, "Series length");
  sim->add_option("--phi", sim_phi, "AR coefficient");
  sim->add_option("--v", sim_v, "Shock standard deviation");
  sim->add_option("--bern-p", sim_p, "Shock indicator probability")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "Output file")->required();

  // --- filter ---
  auto* fil = app.add_subcommand("filter", "Run the forward Kalman filter on a series file");
  SpecFlags fil_spec;
  std::string fil_in, fil_out;
  fil->add_option("--in", fil_in, "Series file (one value per line, NA = missing)")->required();
  fil->add_option("--out", fil_out, "Output file")->required();
  fil_spec.attach(fil);

  // --- improve ---
  auto* imp = app.add_subcommand("improve", "Apply the empirical-Bayes improvement");
  SpecFlags imp_spec;
  std::string imp_in, imp_out, imp_mode = "retrospective";
  std::size_t imp_warmup = 100;
  double imp_bw_scale = 3.0, imp_bw_fixed = 0.0;
  imp->add_option("--in", imp_in, "Series file")->required();
  imp->add_option("--out", imp_out, "Output file")->required();
  imp->add_option("--mode", imp_mode, "retrospective or sequential")
      ->check(CLI::IsMember({"retrospective", "sequential"}));
  imp->add_option("--warmup", imp_warmup, "Plain-KF warm-up length (sequential mode)");
  imp->add_option("--bandwidth-scale", imp_bw_scale, "Bandwidth rule scale / ln(m)");
  imp->add_option("--bandwidth", imp_bw_fixed, "Fixed bandwidth override (> 0 to enable)");
  imp_spec.attach(imp);

  // --- benchmark ---
  auto* ben = app.add_subcommand("benchmark", "Monte-Carlo risk benchmark over a (phi, v) grid");
  std::vector<double> ben_phi{0.25, 0.75};
  std::vector<double> ben_v{0, 1, 2, 3, 4, 5};
  std::string ben_mode = "both", ben_out, ben_format = "tsv";
  ebkf::BenchmarkConfig ben_cfg;
  std::size_t ben_warmup = 0;
  double ben_bw_scale = 3.0;
  ben->add_option("--phi", ben_phi, "AR coefficients of the grid")->delimiter(',');
  ben->add_option("--v", ben_v, "Shock standard deviations of the grid")->delimiter(',');
  ben->add_option("--mode", ben_mode, "sequential, retrospective or both")
      ->check(CLI::IsMember({"sequential", "retrospective", "both"}));
  ben->add_option("--n", ben_cfg.n, "Scored series length");
  ben->add_option("--warmup", ben_warmup, "Warm-up pad (0 = mode default: 100 seq / 50 retro)");
  ben->add_option("--reps", ben_cfg.reps, "Replications per cell");
  ben->add_option("--bern-p", ben_cfg.bern_p, "Shock indicator probability");
  ben->add_option("--seed", ben_cfg.seed, "RNG seed");
  ben->add_option("--threads", ben_cfg.threads, "Worker threads (0 = all cores)");
  ben->add_option("--bandwidth-scale", ben_bw_scale, "Bandwidth rule scale / ln(m)");
  ben->add_option("--format", ben_format, "tsv or jsonl")->check(CLI::IsMember({"tsv", "jsonl"}));
  ben->add_option("--out", ben_out, "Output file")->required();

  // --- cv ---
  auto* cv = app.add_subcommand("cv", "Binomial-thinning cross-validation on a counts file");
  std::vector<std::string> cv_families{"ar1"};
  std::string cv_in, cv_out, cv_mode = "retrospective", cv_format = "tsv";
  ebkf::CvConfig cv_cfg;
  std::vector<double> cv_inject_phi;
  double cv_inject_intercept = 0.0, cv_inject_var = 0.0;
  double cv_bw_scale = 3.0;
  cv->add_option("--in", cv_in, "Counts file (one nonnegative integer per line)")->required();
  cv->add_option("--out", cv_out, "Output file")->required();
  cv->add_option("--families", cv_families, "Model families to evaluate")->delimiter(',');
  cv->add_option("--p", cv_cfg.p, "Thinning retention probability");
  cv->add_option("--reps", cv_cfg.reps, "Cross-validation repetitions");
  cv->add_option("--mode", cv_mode, "retrospective or sequential")
      ->check(CLI::IsMember({"retrospective", "sequential"}));
  cv->add_option("--warmup", cv_cfg.warmup, "Indices excluded from scoring");
  cv->add_option("--seed", cv_cfg.seed, "RNG seed");
  cv->add_option("--threads", cv_cfg.threads, "Worker threads (0 = all cores)");
  cv->add_option("--bandwidth-scale", cv_bw_scale, "Bandwidth rule scale / ln(m)");
  cv->add_option("--format", cv_format, "tsv or jsonl")->check(CLI::IsMember({"tsv", "jsonl"}));
  auto* inj_phi = cv->add_option("--inject-phi", cv_inject_phi,
                                 "Skip fitting: AR coefficients (requires exactly one family)")
                      ->delimiter(',');
  cv->add_option("--inject-intercept", cv_inject_intercept, "Injected intercept")->needs(inj_phi);
  cv->add_option("--inject-var", cv_inject_var, "Injected innovation variance")->needs(inj_phi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      const ebkf::SimulationTruth t = ebkf::simulate_sparse_ar(sim_n, sim_phi, sim_v, sim_p, sim_seed);
      auto out = open_out(sim_out);
      ebkf::write_simulation(out, t);
    } else if (fil->parsed()) {
      const ebkf::ObservationSeries series = ebkf::read_series_file(fil_in);
      const ebkf::FilterOutput out = ebkf::forward_filter(series, fil_spec.to_spec());
      auto os = open_out(fil_out);
      ebkf::write_filter_output(os, series, out);
    } else if (imp->parsed()) {
      const ebkf::ObservationSeries series = ebkf::read_series_file(imp_in);
      const ebkf::StateSpaceSpec spec = imp_spec.to_spec();
      const ebkf::BandwidthPolicy bw = bandwidth_policy(imp_bw_scale, imp_bw_fixed);
      ebkf::FilterOutput out;
      std::vector<double> improved;
      if (imp_mode == "sequential") {
        out = ebkf::forward_filter(series, spec);
        improved = ebkf::improve_sequential(series, spec, imp_warmup, bw);
      } else {
        out = ebkf::loo_predictors(series, spec);
        improved = ebkf::improve_retrospective(series, out, bw);
      }
      auto os = open_out(imp_out);
      ebkf::write_filter_output(os, series, out, improved);
    } else if (ben->parsed()) {
      if (ben_warmup > 0) ben_cfg.warmup = ben_warmup;
      ben_cfg.bandwidth = bandwidth_policy(ben_bw_scale, 0.0);
      std::vector<std::pair<double, double>> grid;
      for (double p : ben_phi)
        for (double v : ben_v) grid.emplace_back(p, v);
      std::vector<ebkf::RiskReport> reports;
      if (ben_mode == "sequential" || ben_mode == "both") {
        auto r = ebkf::run_benchmark(grid, ebkf::Mode::sequential, ben_cfg);
        reports.insert(reports.end(), r.begin(), r.end());
      }
      if (ben_mode == "retrospective" || ben_mode == "both") {
        auto r = ebkf::run_benchmark(grid, ebkf::Mode::retrospective, ben_cfg);
        reports.insert(reports.end(), r.begin(), r.end());
      }
      auto os = open_out(ben_out);
      if (ben_format == "jsonl")
        ebkf::write_benchmark_jsonl(os, reports);
      else
        ebkf::write_benchmark_tsv(os, reports);
    } else if (cv->parsed()) {
      const ebkf::CountSeries counts = ebkf::read_counts_file(cv_in);
      cv_cfg.mode = ebkf::mode_from_name(cv_mode);
      cv_cfg.bandwidth = bandwidth_policy(cv_bw_scale, 0.0);
      std::vector<ebkf::Family> families;
      for (const auto& f : cv_families) families.push_back(ebkf::family_from_name(f));
      if (!cv_inject_phi.empty()) {
        ebkf::StateSpaceSpec inj;
        inj.family = families.size() == 1 ? families[0] : ebkf::Family::ar1;
        inj.phi = cv_inject_phi;
        inj.intercept = cv_inject_intercept;
        inj.innovation_variance = cv_inject_var;
        cv_cfg.injected = inj;
      }
      const auto reports = ebkf::run_cv(counts, families, cv_cfg);
      auto os = open_out(cv_out);
      if (cv_format == "jsonl")
        ebkf::write_cv_jsonl(os, reports);
      else
        ebkf::write_cv_tsv(os, reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "ebkf: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
