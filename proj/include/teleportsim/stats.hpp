#pragma once
// Least-squares fitting and Poissonian bootstrap uncertainty propagation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "teleportsim/core.hpp"

namespace tsim {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class FitModel {
  kQuadratic,           // y = a*x^2 + b*x + c,            params {a, b, c}
  kGaussianDip,         // y = B*(1 - V*exp(-(x-t0)^2/(2w^2))), params {B, V, t0, w}
  kSinusoidFixedPeriod  // y = A*(1 + V*cos(x + p0)),      params {A, V, p0}
};

struct FitResult {
  std::vector<double> params;
  std::vector<double> std_errors;
  double residual_norm = 0.0;  // sqrt(sum of squared residuals)
  int iterations = 0;
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false when singular.
template <int N>
bool solve_linear(std::array<std::array<double, N>, N> a,
                  std::array<double, N> b, std::array<double, N>& x) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = N - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < N; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

// Inverts a small symmetric positive matrix via Gauss-Jordan; returns false
// when singular. Used for parameter covariance.
template <int N>
bool invert(std::array<std::array<double, N>, N> a,
            std::array<std::array<double, N>, N>& inv) {
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) inv[r][c] = (r == c) ? 1.0 : 0.0;
  }
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return false;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (int c = 0; c < N; ++c) {
      a[col][c] /= d;
      inv[col][c] /= d;
    }
    for (int r = 0; r < N; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < N; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return true;
}

inline void require_points(const std::vector<Point2>& pts, std::size_t n_params,
                           const char* model) {
  if (pts.size() < n_params + 1) {
    std::ostringstream os;
    os << model << " fit needs at least " << n_params + 1 << " points, got "
       << pts.size();
    throw FitError(os.str());
  }
}

// Weighted quadratic least squares via normal equations. Weights may be
// empty (unweighted). Errors from the inverse normal matrix scaled by the
// reduced chi-square; exact fits report zero standard errors.
inline FitResult fit_quadratic(const std::vector<Point2>& pts,
                               const std::vector<double>& weights) {
  require_points(pts, 3, "quadratic");
  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const std::array<double, 3> row = {pts[i].x * pts[i].x, pts[i].x, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ata[r][c] += w * row[r] * row[c];
      atb[r] += w * row[r] * pts[i].y;
    }
  }
  std::array<double, 3> sol{};
  if (!solve_linear<3>(ata, atb, sol)) {
    throw FitError("quadratic fit is degenerate (collinear or repeated x)");
  }
  FitResult out;
  out.params = {sol[0], sol[1], sol[2]};
  double rss = 0.0;
  double wrss = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double r = pts[i].y - (sol[0] * pts[i].x * pts[i].x + sol[1] * pts[i].x + sol[2]);
    rss += r * r;
    wrss += w * r * r;
  }
  out.residual_norm = std::sqrt(rss);
  const double dof = static_cast<double>(pts.size()) - 3.0;
  const double s2 = dof > 0.0 ? wrss / dof : 0.0;
  std::array<std::array<double, 3>, 3> cov{};
  if (invert<3>(ata, cov)) {
    out.std_errors = {std::sqrt(std::max(0.0, s2 * cov[0][0])),
                      std::sqrt(std::max(0.0, s2 * cov[1][1])),
                      std::sqrt(std::max(0.0, s2 * cov[2][2]))};
  } else {
    out.std_errors = {0.0, 0.0, 0.0};
  }
  out.iterations = 0;
  return out;
}

// Fixed-period sinusoid, linear in (c0, c1, c2) with
// y = c0 + c1*cos(x) + c2*sin(x), then A = c0, V = |c|/c0,
// p0 = atan2(-c2, c1). Solved by normal equations; standard errors by the
// delta method from the linear covariance.
inline FitResult fit_sinusoid(const std::vector<Point2>& pts) {
  require_points(pts, 3, "sinusoid");
  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (const Point2& p : pts) {
    const std::array<double, 3> row = {1.0, std::cos(p.x), std::sin(p.x)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
      atb[r] += row[r] * p.y;
    }
  }
  std::array<double, 3> sol{};
  if (!solve_linear<3>(ata, atb, sol)) {
    throw FitError("sinusoid fit is degenerate (phases do not span a period)");
  }
  const double a = sol[0];
  const double c1 = sol[1];
  const double c2 = sol[2];
  if (!(a > 0.0)) {
    throw FitError("sinusoid fit gave a non-positive mean level");
  }
  const double rho = std::hypot(c1, c2);
  FitResult out;
  out.params = {a, rho / a, rho > 0.0 ? wrap_phase(std::atan2(-c2, c1)) : 0.0};
  double rss = 0.0;
  for (const Point2& p : pts) {
    const double r = p.y - (a + c1 * std::cos(p.x) + c2 * std::sin(p.x));
    rss += r * r;
  }
  out.residual_norm = std::sqrt(rss);
  const double dof = static_cast<double>(pts.size()) - 3.0;
  const double s2 = dof > 0.0 ? rss / dof : 0.0;
  std::array<std::array<double, 3>, 3> cov{};
  out.std_errors = {0.0, 0.0, 0.0};
  if (invert<3>(ata, cov)) {
    const double var_a = s2 * cov[0][0];
    out.std_errors[0] = std::sqrt(std::max(0.0, var_a));
    if (rho > 0.0) {
      // V = rho/a: gradient (dV/da, dV/dc1, dV/dc2).
      const std::array<double, 3> gv = {-rho / (a * a), c1 / (rho * a),
                                        c2 / (rho * a)};
      // p0 = atan2(-c2, c1): gradient wrt (a, c1, c2).
      const std::array<double, 3> gp = {0.0, c2 / (rho * rho),
                                        -c1 / (rho * rho)};
      double vv = 0.0;
      double vp = 0.0;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          vv += gv[r] * s2 * cov[r][c] * gv[c];
          vp += gp[r] * s2 * cov[r][c] * gp[c];
        }
      }
      out.std_errors[1] = std::sqrt(std::max(0.0, vv));
      out.std_errors[2] = std::sqrt(std::max(0.0, vp));
    } else {
      out.std_errors[1] = std::sqrt(std::max(0.0, s2 * (cov[1][1] + cov[2][2]))) / a;
    }
  }
  out.iterations = 0;
  return out;
}

// Gaussian dip by damped Gauss-Newton. Steps are only accepted when the
// residual norm decreases, so the reported norm is non-increasing over
// iterations. Throws FitError with the last iterate on non-convergence.
inline FitResult fit_gaussian_dip(const std::vector<Point2>& pts,
                                  const std::vector<double>& init) {
  require_points(pts, 4, "gaussian dip");
  const std::size_t n = pts.size();

  std::array<double, 4> th{};  // {B, V, t0, w}
  if (!init.empty()) {
    if (init.size() != 4) throw InputError("gaussian dip expects 4 initial parameters");
    std::copy(init.begin(), init.end(), th.begin());
  } else {
    double ymax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    std::size_t imin = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ymax = std::max(ymax, pts[i].y);
      if (pts[i].y < ymin) {
        ymin = pts[i].y;
        imin = i;
      }
    }
    const double span = pts.back().x - pts.front().x;
    th[0] = ymax > 0.0 ? ymax : 1.0;
    th[1] = std::clamp(1.0 - ymin / th[0], 0.0, 0.999);
    th[2] = pts[imin].x;
    // Half width at half depth from the points below the mid level.
    double lo = th[2];
    double hi = th[2];
    const double mid = th[0] * (1.0 - 0.5 * th[1]);
    for (std::size_t i = 0; i < n; ++i) {
      if (pts[i].y < mid) {
        lo = std::min(lo, pts[i].x);
        hi = std::max(hi, pts[i].x);
      }
    }
    th[3] = (hi > lo) ? (hi - lo) / 2.355 : std::max(span / 6.0, 1e-6);
  }
  if (!(th[3] != 0.0)) th[3] = 1e-6;

  auto rss_at = [&](const std::array<double, 4>& t) {
    double rss = 0.0;
    for (const Point2& p : pts) {
      const double z = (p.x - t[2]) / t[3];
      const double model = t[0] * (1.0 - t[1] * std::exp(-0.5 * z * z));
      const double r = p.y - model;
      rss += r * r;
    }
    return rss;
  };

  double rss = rss_at(th);
  double lambda = 1e-3;
  const int kMaxIter = 200;
  int iter = 0;
  bool converged = false;
  while (iter < kMaxIter && !converged) {
    ++iter;
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    for (const Point2& p : pts) {
      const double z = (p.x - th[2]) / th[3];
      const double g = std::exp(-0.5 * z * z);
      const double model = th[0] * (1.0 - th[1] * g);
      const double r = p.y - model;
      const std::array<double, 4> jac = {
          1.0 - th[1] * g,                       // d/dB
          -th[0] * g,                            // d/dV
          -th[0] * th[1] * g * z / th[3],        // d/dt0
          -th[0] * th[1] * g * z * z / th[3]};   // d/dw
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) jtj[a][b] += jac[a] * jac[b];
        jtr[a] += jac[a] * r;
      }
    }
    bool stepped = false;
    while (lambda <= 1e12) {
      std::array<std::array<double, 4>, 4> damped = jtj;
      for (int a = 0; a < 4; ++a) {
        damped[a][a] += lambda * std::max(jtj[a][a], 1e-12);
      }
      std::array<double, 4> delta{};
      if (solve_linear<4>(damped, jtr, delta)) {
        std::array<double, 4> cand = th;
        for (int a = 0; a < 4; ++a) cand[a] += delta[a];
        if (cand[3] == 0.0) cand[3] = 1e-12;
        const double cand_rss = rss_at(cand);
        if (cand_rss <= rss) {
          double step2 = 0.0;
          double scale2 = 0.0;
          for (int a = 0; a < 4; ++a) {
            step2 += delta[a] * delta[a];
            scale2 += th[a] * th[a];
          }
          th = cand;
          rss = cand_rss;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          if (step2 <= 1e-20 * std::max(scale2, 1.0)) converged = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    // No damping level yields a descent step: numerically at a minimum.
    if (!stepped) converged = true;
  }

  // Negative width is the same curve; report the positive branch.
  th[3] = std::abs(th[3]);

  FitResult out;
  out.params = {th[0], th[1], th[2], th[3]};
  out.residual_norm = std::sqrt(rss);
  out.iterations = iter;

  if (!converged || !std::isfinite(rss)) {
    std::ostringstream os;
    os << "gaussian dip fit did not converge after " << iter
       << " iterations; last iterate B=" << th[0] << " V=" << th[1]
       << " t0=" << th[2] << " w=" << th[3]
       << " residual_norm=" << out.residual_norm;
    throw FitError(os.str());
  }

  std::array<std::array<double, 4>, 4> jtj{};
  for (const Point2& p : pts) {
    const double z = (p.x - th[2]) / th[3];
    const double g = std::exp(-0.5 * z * z);
    const std::array<double, 4> jac = {1.0 - th[1] * g, -th[0] * g,
                                       -th[0] * th[1] * g * z / th[3],
                                       -th[0] * th[1] * g * z * z / th[3]};
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) jtj[a][b] += jac[a] * jac[b];
    }
  }
  const double dof = static_cast<double>(n) - 4.0;
  const double s2 = dof > 0.0 ? rss / dof : 0.0;
  std::array<std::array<double, 4>, 4> cov{};
  out.std_errors = {0.0, 0.0, 0.0, 0.0};
  if (invert<4>(jtj, cov)) {
    for (int a = 0; a < 4; ++a) {
      out.std_errors[a] = std::sqrt(std::max(0.0, s2 * cov[a][a]));
    }
  }
  return out;
}

}  // namespace detail

// Fits one of the supported models. initial_guess may be empty (a heuristic
// guess is derived from the data); it is only used by the nonlinear model.
inline FitResult least_squares(const std::vector<Point2>& points, FitModel model,
                               const std::vector<double>& initial_guess = {}) {
  switch (model) {
    case FitModel::kQuadratic:
      return detail::fit_quadratic(points, {});
    case FitModel::kGaussianDip:
      return detail::fit_gaussian_dip(points, initial_guess);
    case FitModel::kSinusoidFixedPeriod:
      return detail::fit_sinusoid(points);
  }
  throw InputError("unknown fit model");
}

inline FitResult weighted_quadratic(const std::vector<Point2>& points,
                                    const std::vector<double>& weights) {
  if (weights.size() != points.size()) {
    throw InputError("weights must match points");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw InputError("weights must be > 0");
  }
  return detail::fit_quadratic(points, weights);
}

using CountMap = std::map<std::string, std::int64_t>;

struct BootstrapConfig {
  int trials = 1000;
  std::uint64_t seed = 0;
};

struct BootstrapResult {
  double mean = 0.0;
  double sigma = 0.0;
  int failed_trials = 0;
};

// Resamples every count as Poisson(observed) per trial and propagates the
// spread of the estimator. Trials where the estimator throws or returns a
// non-finite value are dropped; more than 5% failures aborts.
inline BootstrapResult poisson_bootstrap(
    const CountMap& counts,
    const std::function<double(const CountMap&)>& estimator,
    const BootstrapConfig& cfg = {}) {
  if (cfg.trials < 100) throw InputError("bootstrap trials must be >= 100");
  for (const auto& [label, n] : counts) {
    if (n < 0) throw InputError("count \"" + label + "\" is negative");
  }
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(cfg.trials));
  int failed = 0;
  std::string first_failure;
  for (int t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ (0x5eedULL + t)));
    CountMap resampled;
    for (const auto& [label, n] : counts) {
      if (n == 0) {
        resampled[label] = 0;
        continue;
      }
      std::poisson_distribution<std::int64_t> pois(static_cast<double>(n));
      resampled[label] = pois(rng);
    }
    try {
      const double est = estimator(resampled);
      if (!std::isfinite(est)) throw NumericalError("estimator returned non-finite value");
      estimates.push_back(est);
    } catch (const std::exception& e) {
      ++failed;
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  if (failed * 20 > cfg.trials) {
    std::ostringstream os;
    os << "bootstrap aborted: " << failed << "/" << cfg.trials
       << " trials failed (first failure: " << first_failure << ")";
    throw NumericalError(os.str());
  }
  BootstrapResult out;
  out.failed_trials = failed;
  const double n = static_cast<double>(estimates.size());
  for (double e : estimates) out.mean += e;
  out.mean /= n;
  double ss = 0.0;
  for (double e : estimates) ss += (e - out.mean) * (e - out.mean);
  out.sigma = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return out;
}

// How many standard deviations a value sits above a bound.
inline double sigma_violation(double value, double sigma, double bound = 2.0 / 3.0) {
  if (!(sigma > 0.0)) throw InputError("sigma must be > 0");
  return (value - bound) / sigma;
}

}  // namespace tsim
