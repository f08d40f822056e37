#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace ebkf::detail {

struct NmResult {
  std::vector<double> x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead simplex minimizer (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Deterministic.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, const std::vector<double>& step,
                            int max_evals = 4000, double ftol = 1e-10) {
  const std::size_t d = x0.size();
  NmResult res;
  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= d; ++i) {
    fv[i] = f(simplex[i]);
    ++res.evaluations;
  }

  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  while (res.evaluations < max_evals) {
    std::vector<std::size_t> order(d + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[d], second = order[d - 1];

    const double spread = std::abs(fv[worst] - fv[best]);
    if (spread <= ftol * (std::abs(fv[best]) + ftol)) {
      res.converged = true;
      break;
    }

    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        if (i != worst) s += simplex[i][k];
      centroid[k] = s / static_cast<double>(d);
    }
    auto blend = [&](std::vector<double>& out, double coef) {
      for (std::size_t k = 0; k < d; ++k) out[k] = centroid[k] + coef * (centroid[k] - simplex[worst][k]);
    };

    blend(xr, 1.0);
    const double fr = f(xr);
    ++res.evaluations;
    if (fr < fv[best]) {
      blend(xe, 2.0);
      const double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      blend(xc, fr < fv[worst] ? 0.5 : -0.5);
      const double fc = f(xc);
      ++res.evaluations;
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < d; ++k)
            simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
          fv[i] = f(simplex[i]);
          ++res.evaluations;
        }
      }
    }
  }

  std::size_t arg = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[arg]) arg = i;
  res.x = simplex[arg];
  res.fx = fv[arg];
  return res;
}

}  // namespace ebkf::detail
