#pragma once

// Preconditioned Chebyshev iteration for a symmetric positive semidefinite
// operator A with a preconditioner B^+ whose spectrum of B^+ A lies in
// [lambda_min, lambda_max] on the working subspace.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "sddkit/error.hpp"
#include "sddkit/vector_ops.hpp"

namespace sddkit {

struct ChebyshevParams {
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  std::size_t t = 1;

  double d() const noexcept { return 0.5 * (lambda_max + lambda_min); }
  double c() const noexcept { return 0.5 * (lambda_max - lambda_min); }

  static ChebyshevParams make(double lambda_min, double lambda_max, std::size_t t) {
    if (!(lambda_min > 0.0) || !std::isfinite(lambda_max) || lambda_min > lambda_max)
      throw ValidationError("Chebyshev bounds need 0 < lambda_min <= lambda_max, got [" +
                            std::to_string(lambda_min) + ", " + std::to_string(lambda_max) + "]");
    if (t == 0) throw ValidationError("Chebyshev iteration count must be >= 1");
    return {lambda_min, lambda_max, t};
  }
};

/// Step-wise Chebyshev state: x, the residual r = b - A x, and the search
/// direction s. Starts from x = 0. Each step costs one preconditioner call
/// and one product with A.
template <class ApplyA, class Precond>
class ChebyshevIteration {
 public:
  ChebyshevIteration(ApplyA apply_a, Precond precond, std::span<const double> b,
                     double lambda_min, double lambda_max)
      : apply_a_(std::move(apply_a)),
        precond_(std::move(precond)),
        d_(0.5 * (lambda_max + lambda_min)),
        c_(0.5 * (lambda_max - lambda_min)),
        x_(b.size(), 0.0),
        r_(b.begin(), b.end()),
        s_(b.size(), 0.0),
        z_(b.size()),
        as_(b.size()) {
    ChebyshevParams::make(lambda_min, lambda_max, 1);
  }

  void step() {
    precond_(std::span<const double>(r_), z_);
    if (k_ == 0) {
      alpha_ = 1.0 / d_;
      s_ = z_;
    } else {
      const double beta =
          k_ == 1 ? 0.5 * (c_ * alpha_) * (c_ * alpha_) : 0.25 * (c_ * alpha_) * (c_ * alpha_);
      alpha_ = 1.0 / (d_ - beta / alpha_);
      for (std::size_t i = 0; i < s_.size(); ++i) s_[i] = z_[i] + beta * s_[i];
    }
    apply_a_(std::span<const double>(s_), as_);
    axpy(alpha_, s_, x_);
    axpy(-alpha_, as_, r_);
    ++k_;
    if (!std::isfinite(alpha_) || !all_finite(x_))
      throw NumericalError("Chebyshev iteration produced non-finite values at step " +
                           std::to_string(k_));
  }

  std::size_t steps() const noexcept { return k_; }
  const Vector& x() const noexcept { return x_; }
  const Vector& residual() const noexcept { return r_; }
  Vector take_x() { return std::move(x_); }

 private:
  ApplyA apply_a_;
  Precond precond_;
  double d_, c_;
  double alpha_ = 0.0;
  std::size_t k_ = 0;
  Vector x_, r_, s_, z_, as_;
};

/// Runs params.t Chebyshev steps from x = 0 and returns x. apply_a(in, out)
/// writes A in; precond(in, out) writes the preconditioned vector.
template <class ApplyA, class Precond>
Vector p_chebyshev(ApplyA&& apply_a, std::span<const double> b, const ChebyshevParams& params,
                   Precond&& precond) {
  ChebyshevParams::make(params.lambda_min, params.lambda_max, params.t);
  ChebyshevIteration it(std::forward<ApplyA>(apply_a), std::forward<Precond>(precond), b,
                        params.lambda_min, params.lambda_max);
  for (std::size_t k = 0; k < params.t; ++k) it.step();
  return it.take_x();
}

}  // namespace sddkit
