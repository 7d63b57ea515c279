#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>

namespace relchange {

/// Symmetric smoothing kernel supported on [-1, 1].
///
/// Half-line moments mu_l = int_0^1 x^l K(x) dx (l = 0..3) are computed once
/// at construction. The Epanechnikov kernel uses closed forms; any other
/// kernel falls back to adaptive Gauss-Kronrod quadrature for its moments
/// and its CDF.
class Kernel {
 public:
  using Function = std::function<double(double)>;

  static Kernel epanechnikov();

  /// Wraps a user density. Throws InvalidArgument unless it is symmetric and
  /// integrates to one over [-1, 1].
  static Kernel from_function(std::string name, Function density);

  double operator()(double x) const noexcept {
    if (x < -1.0 || x > 1.0) return 0.0;
    if (kind_ == Kind::kEpanechnikov) return 0.75 * (1.0 - x * x);
    return density_(x);
  }

  /// int_{-1}^{x} K(u) du.
  double cdf(double x) const;

  double moment(int l) const { return moments_.at(static_cast<std::size_t>(l)); }
  const std::array<double, 4>& moments() const noexcept { return moments_; }
  std::string_view name() const noexcept { return name_; }
  bool is_epanechnikov() const noexcept { return kind_ == Kind::kEpanechnikov; }

 private:
  enum class Kind { kEpanechnikov, kCustom };

  Kernel(Kind kind, std::string name, Function density);

  Kind kind_;
  std::string name_;
  Function density_;
  std::array<double, 4> moments_{};
};

/// Looks up a registered kernel ("epanechnikov"). Throws ConfigError otherwise.
Kernel kernel_by_name(std::string_view name);

struct KernelConstants {
  double c0;  // mu0 * mu2 - mu1^2
  double c2;  // mu2^2 - mu1 * mu3
};

KernelConstants kernel_constants(const Kernel& k);

/// Kernels equivalent to the Jackknife-corrected local linear smoother:
/// K*(x) = 2 sqrt2 K(sqrt2 x) - K(x) in the interior and the boundary kernel
/// Kbar*(x) = 2 sqrt2 Kbar(sqrt2 x) - Kbar(x) at t = 0, where
/// Kbar(x) = (mu2 - x mu1) K(x) / c0 on [0, 1] and zero elsewhere.
class JackknifeKernels {
 public:
  explicit JackknifeKernels(Kernel k);

  double k_star(double x) const noexcept {
    return kTwoSqrt2 * base_(kSqrt2 * x) - base_(x);
  }
  double k_bar(double x) const noexcept {
    if (x < 0.0) return 0.0;
    return (mu2_ - x * mu1_) * base_(x) / c0_;
  }
  double k_bar_star(double x) const noexcept {
    return kTwoSqrt2 * k_bar(kSqrt2 * x) - k_bar(x);
  }
  double k_star_at_zero() const noexcept { return (kTwoSqrt2 - 1.0) * base_(0.0); }

  const Kernel& base() const noexcept { return base_; }

  static constexpr double kSqrt2 = 1.41421356237309504880;
  static constexpr double kTwoSqrt2 = 2.0 * kSqrt2;

 private:
  Kernel base_;
  double mu1_;
  double mu2_;
  double c0_;
};

JackknifeKernels derive_jackknife(const Kernel& k);

}  // namespace relchange
