#include "relchange/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "relchange/error.hpp"

namespace relchange {

namespace {

template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

// Integrates over [a, b] split at the kinks of the Jackknife kernels.
template <class F>
double integrate_split(F f, double a, double b) {
  constexpr double kKink = 0.70710678118654752440;
  double points[] = {a, -kKink, 0.0, kKink, b};
  double total = 0.0;
  double left = a;
  for (double p : points) {
    if (p <= left || p > b) continue;
    total += integrate(f, left, p);
    left = p;
  }
  return total;
}

double factorial(int k) {
  return std::tgamma(static_cast<double>(k) + 1.0);
}

}  // namespace

double power_indicator_integral(const Kernel& k_d, int order) {
  const int p = order + 1;
  return integrate([&](double z) { return k_d(std::pow(z, p)); }, -1.0, 0.0) +
         integrate([&](double z) { return k_d(std::pow(z, p)); }, 0.0, 1.0);
}

double interior_kernel_energy(const Kernel& kernel) {
  const JackknifeKernels jk(kernel);
  return integrate_split([&](double x) { const double v = jk.k_star(x); return v * v; }, -1.0, 1.0);
}

double boundary_kernel_energy(const Kernel& kernel) {
  const JackknifeKernels jk(kernel);
  return integrate_split([&](double x) { const double v = jk.k_bar_star(x); return v * v; }, 0.0,
                         1.0);
}

RegularVariance theoretical_variance_regular(std::span<const RegularRoot> roots,
                                             double mu0_curvature,
                                             const std::function<double(double)>& lrv,
                                             const Kernel& kernel, double bandwidth) {
  const double mu1 = kernel.moment(1);
  const double mu2 = kernel.moment(2);
  const auto [c0, c2] = kernel_constants(kernel);
  const double k_energy = integrate([&](double x) { return kernel(x) * kernel(x); }, -1.0, 1.0);
  const double boundary_energy = integrate(
      [&](double t) {
        const double v = (mu2 - t * mu1) * kernel(t);
        return v * v;
      },
      0.0, 1.0);

  double interior = 0.0, inverse_slopes = 0.0, curvature_ratio = 0.0;
  for (const auto& root : roots) {
    if (root.slope == 0.0) {
      fail(ErrorCode::kZeroDerivative,
           "root at t = " + std::to_string(root.t) + " has zero slope");
    }
    interior += lrv(root.t) / (root.slope * root.slope);
    inverse_slopes += 1.0 / std::abs(root.slope);
    curvature_ratio += root.curvature / std::abs(root.slope);
  }
  RegularVariance out;
  out.tau1_sq = interior * k_energy;
  out.tau2_sq = lrv(0.0) / (c0 * c0) * inverse_slopes * inverse_slopes * boundary_energy;
  const double b2 = bandwidth * bandwidth;
  out.bias = mu2 * b2 * curvature_ratio - b2 * c2 * mu0_curvature / (2.0 * c0) * inverse_slopes;
  return out;
}

namespace {

struct MaxOrderSums {
  int order = -1;
  double variance_weighted = 0.0;  // sum lrv(t) / |d|^(2/p)
  double inverse_root = 0.0;       // sum |d|^(-1/p)
};

MaxOrderSums collect(std::span<const CriticalRoot> roots,
                     const std::function<double(double)>& lrv) {
  MaxOrderSums s;
  for (const auto& r : roots) {
    if (r.order < 0) fail(ErrorCode::kInvalidArgument, "critical order must be >= 0");
    if (r.derivative == 0.0) {
      fail(ErrorCode::kZeroDerivative, "root at t = " + std::to_string(r.t) +
                                           " has a vanishing leading derivative");
    }
    s.order = std::max(s.order, r.order);
  }
  for (const auto& r : roots) {
    if (r.order != s.order) continue;
    const double p = s.order + 1.0;
    const double mag = std::abs(r.derivative);
    s.variance_weighted += lrv(r.t) / std::pow(mag, 2.0 / p);
    s.inverse_root += std::pow(mag, -1.0 / p);
  }
  return s;
}

// Fixed Gauss-Legendre over [a, b] after splitting at the given breakpoints.
// The integrands below are smooth between their kinks, so this is exact for
// polynomial kernels and fast for the nested triple integral.
template <class F>
double integrate_pieces(F f, double a, double b, std::vector<double> cuts) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double left = a;
  for (double p : cuts) {
    if (p <= left) continue;
    if (p > b) break;
    total += boost::math::quadrature::gauss<double, 30>::integrate(f, left, p);
    left = p;
  }
  return total;
}

// int int int K*(u) K*(w) K_d(z^p) K_d((z + s (w - u))^p) du dw dz, written
// as an integral over the lag d = w - u of the K* autocorrelation.
double balanced_interior_integral(const JackknifeKernels& jk, const Kernel& k_d, int p, double s) {
  constexpr double kKink = 0.70710678118654752440;
  const double kernel_kinks[] = {-1.0, -kKink, 0.0, kKink, 1.0};
  auto autocorr = [&](double d) {
    std::vector<double> cuts;
    for (double k : kernel_kinks) {
      cuts.push_back(k);
      cuts.push_back(k - d);
    }
    const double lo = std::max(-1.0, -1.0 - d);
    const double hi = std::min(1.0, 1.0 - d);
    return integrate_pieces([&](double u) { return jk.k_star(u) * jk.k_star(u + d); }, lo, hi,
                            cuts);
  };
  auto overlap = [&](double d) {
    const double shift = s * d;
    return integrate_pieces(
        [&](double z) { return k_d(std::pow(z, p)) * k_d(std::pow(z + shift, p)); }, -1.0, 1.0,
        {0.0, -shift, -1.0 - shift, 1.0 - shift});
  };
  if (s == 0.0) {
    const double area = integrate_split([&](double u) { return jk.k_star(u); }, -1.0, 1.0);
    return area * area * overlap(0.0);
  }
  // Lags where the autocorrelation or the overlap changes form.
  std::vector<double> cuts{0.0, 2.0 / s, -2.0 / s, 1.0 / s, -1.0 / s};
  for (double a : kernel_kinks) {
    for (double b : kernel_kinks) cuts.push_back(a - b);
  }
  return integrate_pieces([&](double d) { return autocorr(d) * overlap(d); }, -2.0, 2.0, cuts);
}

SideVariance side_variance(const MaxOrderSums& s, const std::function<double(double)>& lrv,
                           const Kernel& k_d, BandwidthRegime regime,
                           double ratio, double interior_energy, double boundary_energy) {
  SideVariance out;
  out.max_order = s.order;
  if (s.order < 0) return out;
  const int p = s.order + 1;
  const double fact = factorial(p);
  const double ind = power_indicator_integral(k_d, s.order);
  const double scale2 = std::pow(fact, 2.0 / p);
  const double second =
      lrv(0.0) * scale2 * boundary_energy * std::pow(s.inverse_root * ind, 2.0);

  if (regime == BandwidthRegime::kSmoothIndicatorNegligible) {
    out.first = ind * ind * scale2 * s.variance_weighted * interior_energy;
    out.second = second;
    return out;
  }
  // Balanced regime: the interior term needs a per-root triple integral and
  // is filled in by the caller.
  out.second = ratio > 0.0 ? second / ratio : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

CriticalVariance theoretical_variance_critical(std::span<const CriticalRoot> roots_plus,
                                               std::span<const CriticalRoot> roots_minus,
                                               const std::function<double(double)>& lrv,
                                               const Kernel& kernel, const Kernel& k_d,
                                               BandwidthRegime regime, double ratio) {
  if (ratio < 0.0) fail(ErrorCode::kInvalidArgument, "bandwidth ratio must be >= 0");
  const JackknifeKernels jk(kernel);
  const double interior_energy = interior_kernel_energy(kernel);
  const double boundary_energy = boundary_kernel_energy(kernel);

  const MaxOrderSums plus = collect(roots_plus, lrv);
  const MaxOrderSums minus = collect(roots_minus, lrv);

  CriticalVariance out;
  out.plus = side_variance(plus, lrv, k_d, regime, ratio, interior_energy,
                           boundary_energy);
  out.minus = side_variance(minus, lrv, k_d, regime, ratio, interior_energy,
                            boundary_energy);

  if (regime == BandwidthRegime::kBalanced) {
    auto fill = [&](SideVariance& side, std::span<const CriticalRoot> roots) {
      if (side.max_order < 0) return;
      const int p = side.max_order + 1;
      const double fact = factorial(p);
      double total = 0.0;
      for (const auto& r : roots) {
        if (r.order != side.max_order) continue;
        const double mag = std::abs(r.derivative);
        const double s = ratio * std::pow(fact / mag, -1.0 / p);
        total += lrv(r.t) / std::pow(mag, 2.0 / p) * balanced_interior_integral(jk, k_d, p, s);
      }
      side.first = std::pow(fact, 1.0 / p) * total;
    };
    fill(out.plus, roots_plus);
    fill(out.minus, roots_minus);
  }

  out.sigma[0][0] = out.plus.first + out.plus.second;
  out.sigma[1][1] = out.minus.first + out.minus.second;
  double cross = 0.0;
  if (plus.order >= 0 && minus.order >= 0) {
    if (regime == BandwidthRegime::kBalanced) {
      cross = std::numeric_limits<double>::quiet_NaN();
    } else {
      const int pp = plus.order + 1;
      const int pm = minus.order + 1;
      cross = -lrv(0.0) * std::pow(factorial(pp), 1.0 / pp) * std::pow(factorial(pm), 1.0 / pm) *
              boundary_energy * (power_indicator_integral(k_d, plus.order) * plus.inverse_root) *
              (power_indicator_integral(k_d, minus.order) * minus.inverse_root);
    }
  }
  out.sigma[0][1] = out.sigma[1][0] = cross;
  return out;
}

}  // namespace relchange
