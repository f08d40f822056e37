#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ebkf/benchmark.hpp"
#include "ebkf/errors.hpp"
#include "ebkf/filter_output.hpp"
#include "ebkf/poisson.hpp"
#include "ebkf/series.hpp"
#include "ebkf/simulate.hpp"

namespace ebkf {

/// Round-trip-exact text form of a double; missing values print as NA.
inline std::string format_value(double x) {
  if (std::isnan(x)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Series and count files: one value per line, NA marks a missing observation,
// blank lines and lines starting with '#' are skipped.
// ---------------------------------------------------------------------------

inline ObservationSeries read_series(std::istream& in, const std::string& name) {
  std::vector<double> values;
  std::vector<bool> missing;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(a, b - a + 1);
    if (tok == "NA" || tok == "na") {
      values.push_back(std::numeric_limits<double>::quiet_NaN());
      missing.push_back(true);
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      values.push_back(v);
      missing.push_back(false);
    } catch (const std::exception&) {
      throw data_error(name + ":" + std::to_string(lineno) + ": cannot parse observation '" + tok + "'");
    }
  }
  if (values.empty()) throw data_error(name + ": no observations found");
  return ObservationSeries(std::move(values), std::move(missing));
}

inline ObservationSeries read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open series file '" + path + "'");
  return read_series(in, path);
}

inline void write_series(std::ostream& out, const ObservationSeries& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    out << (s.is_missing(i) ? std::string("NA") : format_value(s.value(i))) << '\n';
}

inline CountSeries read_counts(std::istream& in, const std::string& name) {
  CountSeries c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos || line[a] == '#') continue;
    std::size_t b = line.find_last_not_of(" \t\r");
    const std::string tok = line.substr(a, b - a + 1);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
      c.counts.push_back(v);
    } catch (const std::exception&) {
      throw data_error(name + ":" + std::to_string(lineno) + ": cannot parse count '" + tok + "'");
    }
  }
  if (c.counts.empty()) throw data_error(name + ": no counts found");
  return c;
}

inline CountSeries read_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open counts file '" + path + "'");
  return read_counts(in, path);
}

// ---------------------------------------------------------------------------
// Report writers. Each format carries a schema marker so golden tests can pin
// the layout.
// ---------------------------------------------------------------------------

inline void write_simulation(std::ostream& out, const SimulationTruth& t) {
  out << "# ebkf.sim.v1\n";
  out << "index\tmu\ty\tshock_indicator\n";
  for (std::size_t i = 0; i < t.mu.size(); ++i)
    out << (i + 1) << '\t' << format_value(t.mu[i]) << '\t' << format_value(t.y[i]) << '\t'
        << static_cast<int>(t.indicators[i]) << '\n';
}

inline void write_filter_output(std::ostream& out, const ObservationSeries& s, const FilterOutput& f,
                                std::span<const double> improved = {}) {
  const bool with_improved = !improved.empty();
  out << (with_improved ? "# ebkf.improve.v1\n" : "# ebkf.filter.v1\n");
  out << "index\ty\ttilde_mu\that_mu\tgain\tresidual\tposterior_var";
  if (with_improved) out << "\timproved";
  out << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << (i + 1) << '\t' << (s.is_missing(i) ? std::string("NA") : format_value(s.value(i))) << '\t'
        << format_value(f.tilde_mu[i]) << '\t' << format_value(f.hat_mu[i]) << '\t'
        << format_value(f.gain[i]) << '\t' << format_value(f.residual[i]) << '\t'
        << format_value(f.posterior_variance[i]);
    if (with_improved) out << '\t' << format_value(improved[i]);
    out << '\n';
  }
}

inline void write_benchmark_tsv(std::ostream& out, std::span<const RiskReport> reports) {
  out << "# ebkf.benchmark.v1\n";
  out << "mode\tphi\tv\tn\twarmup\treps\tinterior_lo\tinterior_hi\tkf_mean\tkf_se\t"
         "improved_mean\timproved_se\tnaive_mean\tnaive_se\n";
  for (const RiskReport& r : reports) {
    out << mode_name(r.mode) << '\t' << format_value(r.phi) << '\t' << format_value(r.v) << '\t'
        << r.n << '\t' << r.warmup << '\t' << r.reps << '\t' << r.interior_lo << '\t'
        << r.interior_hi << '\t' << format_value(r.kf_risk.mean) << '\t'
        << format_value(r.kf_risk.se) << '\t' << format_value(r.improved_risk.mean) << '\t'
        << format_value(r.improved_risk.se) << '\t' << format_value(r.naive_risk.mean) << '\t'
        << format_value(r.naive_risk.se) << '\n';
  }
}

inline void write_benchmark_jsonl(std::ostream& out, std::span<const RiskReport> reports) {
  for (const RiskReport& r : reports) {
    nlohmann::json j{{"schema", "ebkf.benchmark.v1"},
                     {"mode", mode_name(r.mode)},
                     {"phi", r.phi},
                     {"v", r.v},
                     {"n", r.n},
                     {"warmup", r.warmup},
                     {"reps", r.reps},
                     {"interior_lo", r.interior_lo},
                     {"interior_hi", r.interior_hi},
                     {"kf_mean", r.kf_risk.mean},
                     {"kf_se", r.kf_risk.se},
                     {"improved_mean", r.improved_risk.mean},
                     {"improved_se", r.improved_risk.se},
                     {"naive_mean", r.naive_risk.mean},
                     {"naive_se", r.naive_risk.se}};
    out << j.dump() << '\n';
  }
}

inline void write_cv_tsv(std::ostream& out, std::span<const CvFamilyReport> reports) {
  out << "# ebkf.cv.v1\n";
  out << "family\tmethod\tp\tmode\treps\twarmup\trisk_mean\trisk_se\n";
  for (const CvFamilyReport& r : reports)
    for (const CvMethodSummary& m : r.methods)
      out << family_name(r.family) << '\t' << m.method << '\t' << format_value(r.p) << '\t'
          << mode_name(r.mode) << '\t' << r.reps << '\t' << r.warmup << '\t'
          << format_value(m.risk.mean) << '\t' << format_value(m.risk.se) << '\n';
}

inline void write_cv_jsonl(std::ostream& out, std::span<const CvFamilyReport> reports) {
  for (const CvFamilyReport& r : reports)
    for (const CvMethodSummary& m : r.methods) {
      nlohmann::json j{{"schema", "ebkf.cv.v1"},     {"family", family_name(r.family)},
                       {"method", m.method},         {"p", r.p},
                       {"mode", mode_name(r.mode)},  {"reps", r.reps},
                       {"warmup", r.warmup},         {"risk_mean", m.risk.mean},
                       {"risk_se", m.risk.se}};
      out << j.dump() << '\n';
    }
}

}  // namespace ebkf
