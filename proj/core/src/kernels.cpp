#include "relchange/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "relchange/error.hpp"

namespace relchange {
namespace {

constexpr double kQuadTolerance = 1e-12;
constexpr unsigned kQuadDepth = 20;

template <class F>
double integrate(F&& f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), lo, hi, kQuadDepth, kQuadTolerance);
}

}  // namespace

Kernel::Kernel(Kind kind, std::string name, Function density)
    : kind_(kind), name_(std::move(name)), density_(std::move(density)) {
  if (kind_ == Kind::kEpanechnikov) {
    moments_ = {0.5, 3.0 / 16.0, 1.0 / 10.0, 1.0 / 16.0};
    return;
  }
  for (int l = 0; l < 4; ++l) {
    moments_[static_cast<std::size_t>(l)] =
        integrate([&](double x) { return std::pow(x, l) * density_(x); }, 0.0, 1.0);
  }
}

Kernel Kernel::epanechnikov() { return Kernel(Kind::kEpanechnikov, "epanechnikov", {}); }

Kernel Kernel::from_function(std::string name, Function density) {
  if (!density) fail(ErrorCode::kInvalidArgument, "kernel density is empty");
  Kernel k(Kind::kCustom, std::move(name), std::move(density));
  if (std::abs(2.0 * k.moments_[0] - 1.0) > 1e-8) {
    fail(ErrorCode::kInvalidArgument, "kernel '" + k.name_ + "' does not integrate to 1");
  }
  for (int i = 0; i <= 20; ++i) {
    const double x = i / 20.0;
    if (std::abs(k.density_(x) - k.density_(-x)) > 1e-12) {
      fail(ErrorCode::kInvalidArgument, "kernel '" + k.name_ + "' is not symmetric");
    }
  }
  return k;
}

double Kernel::cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (kind_ == Kind::kEpanechnikov) return 0.5 + 0.75 * x - 0.25 * x * x * x;
  // Symmetry keeps the integration interval at most of length one.
  if (x < 0.0) return 0.5 - integrate(density_, x, 0.0);
  return 0.5 + integrate(density_, 0.0, x);
}

Kernel kernel_by_name(std::string_view name) {
  if (name == "epanechnikov") return Kernel::epanechnikov();
  fail(ErrorCode::kConfigError, "unknown kernel '" + std::string(name) + "'");
}

KernelConstants kernel_constants(const Kernel& k) {
  const auto& m = k.moments();
  return {m[0] * m[2] - m[1] * m[1], m[2] * m[2] - m[1] * m[3]};
}

JackknifeKernels::JackknifeKernels(Kernel k)
    : base_(std::move(k)),
      mu1_(base_.moment(1)),
      mu2_(base_.moment(2)),
      c0_(kernel_constants(base_).c0) {}

JackknifeKernels derive_jackknife(const Kernel& k) { return JackknifeKernels(k); }

}  // namespace relchange
