#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>

#include "qroof/types.hpp"

namespace qroof {

enum class FunctionalKind {
  von_neumann,
  renyi,
  alpha_tangle,
  truncated_entropy,
  pure_indicator,
  custom,
};

/// Unitarily invariant function of a state, evaluated through its spectrum.
/// von_neumann / renyi(p<=1) / alpha_tangle vanish exactly on pure states.
class SpectralFunctional {
 public:
  using EigenvalueFn = std::function<double(const RealVector&)>;

  static SpectralFunctional von_neumann(double log_base = 2.0) {
    return SpectralFunctional(FunctionalKind::von_neumann, log_base);
  }
  static SpectralFunctional renyi(double p, double log_base = 2.0) {
    if (p < 0) throw DomainError("renyi order must be >= 0");
    SpectralFunctional f(FunctionalKind::renyi, log_base);
    f.p_ = p;
    return f;
  }
  static SpectralFunctional alpha_tangle(double alpha, double log_base = 2.0) {
    if (alpha <= 1) throw DomainError("alpha_tangle requires alpha > 1");
    SpectralFunctional f(FunctionalKind::alpha_tangle, log_base);
    f.alpha_ = alpha;
    return f;
  }
  static SpectralFunctional pure_indicator(PureStateVector target,
                                           double match_tol = tol::match) {
    SpectralFunctional f(FunctionalKind::pure_indicator, 2.0);
    f.target_ = std::make_shared<PureStateVector>(std::move(target));
    f.match_tol_ = match_tol;
    return f;
  }
  static SpectralFunctional custom(EigenvalueFn fn, bool concave = false,
                                   double log_base = 2.0) {
    SpectralFunctional f(FunctionalKind::custom, log_base);
    f.custom_ = std::move(fn);
    f.concave_ = concave;
    return f;
  }
  // Placeholder carrying the truncation level; evaluation is wired up by the
  // monotone layer which owns the decomposition search.
  static SpectralFunctional truncated_entropy_spec(int n, double log_base = 2.0) {
    if (n < 1) throw DomainError("truncation level must be >= 1");
    SpectralFunctional f(FunctionalKind::truncated_entropy, log_base);
    f.n_ = n;
    return f;
  }

  FunctionalKind kind() const { return kind_; }
  double log_base() const { return log_base_; }
  double order_p() const { return p_; }
  double alpha() const { return alpha_; }
  int truncation_level() const { return n_; }
  const PureStateVector& indicator_target() const { return *target_; }

  bool concave() const {
    switch (kind_) {
      case FunctionalKind::von_neumann:
      case FunctionalKind::alpha_tangle:
        return true;
      case FunctionalKind::renyi:
        return p_ <= 1.0;
      case FunctionalKind::truncated_entropy:
        return true;
      case FunctionalKind::custom:
        return concave_;
      default:
        return false;
    }
  }

  // H and R_p (p in [0,1]) are subadditive over tensor products; f_alpha is not
  // asserted to be.
  bool subadditive() const {
    return kind_ == FunctionalKind::von_neumann ||
           (kind_ == FunctionalKind::renyi && p_ <= 1.0) ||
           kind_ == FunctionalKind::truncated_entropy;
  }

  double eval_eigenvalues(const RealVector& lambda) const {
    const double logb = std::log(log_base_);
    switch (kind_) {
      case FunctionalKind::von_neumann:
        return entropy(lambda, logb);
      case FunctionalKind::renyi: {
        if (std::abs(p_ - 1.0) < 1e-6) return entropy(lambda, logb);
        if (p_ == 0.0) {
          int r = 0;
          for (int i = 0; i < lambda.size(); ++i)
            if (lambda(i) > tol::rank) ++r;
          return std::log(static_cast<double>(r)) / logb;
        }
        double s = 0;
        for (int i = 0; i < lambda.size(); ++i)
          if (lambda(i) > tol::eig_floor) s += std::pow(lambda(i), p_);
        return std::log(s) / logb / (1.0 - p_);
      }
      case FunctionalKind::alpha_tangle: {
        double s = 0;
        for (int i = 0; i < lambda.size(); ++i)
          if (lambda(i) > tol::eig_floor) s += std::pow(lambda(i), alpha_);
        return 2.0 * (1.0 - s);
      }
      case FunctionalKind::custom:
        return custom_(lambda);
      case FunctionalKind::truncated_entropy:
        throw DomainError(
            "truncated_entropy evaluation requires the decomposition search; "
            "use the monotone layer");
      case FunctionalKind::pure_indicator:
        throw DomainError("pure_indicator needs the full matrix, not eigenvalues");
    }
    throw DomainError("unknown functional kind");
  }

  double eval(const DensityMatrix& rho) const {
    if (kind_ == FunctionalKind::pure_indicator) {
      if (rho.dim() != target_->dim())
        throw ShapeError("pure_indicator: dimension mismatch");
      const Matrix proj = target_->amplitudes() * target_->amplitudes().adjoint();
      return trace_norm_herm(rho.matrix() - proj) <= match_tol_ ? 1.0 : 0.0;
    }
    return eval_eigenvalues(rho.eigenvalues());
  }

  double operator()(const DensityMatrix& rho) const { return eval(rho); }

 private:
  SpectralFunctional(FunctionalKind k, double log_base)
      : kind_(k), log_base_(log_base) {
    if (log_base <= 1.0) throw DomainError("log base must be > 1");
  }

  static double entropy(const RealVector& lambda, double logb) {
    double h = 0;
    for (int i = 0; i < lambda.size(); ++i) {
      const double l = lambda(i);
      if (l > tol::eig_floor) h -= l * std::log(l);
    }
    return h / logb;
  }

  FunctionalKind kind_;
  double log_base_;
  double p_ = 1.0;
  double alpha_ = 2.0;
  int n_ = 2;
  double match_tol_ = tol::match;
  bool concave_ = false;
  std::shared_ptr<PureStateVector> target_;
  EigenvalueFn custom_;
};

/// Arbitrary real function of a state, plus the hints the hull/closure
/// optimizers exploit when they are known.
struct StateFunction {
  std::function<double(const DensityMatrix&)> fn;
  bool concave = false;
  // For indicator-like functionals: a point worth probing explicitly.
  std::optional<Vector> special_pure_point;

  StateFunction(std::function<double(const DensityMatrix&)> f, bool is_concave = false)
      : fn(std::move(f)), concave(is_concave) {}

  StateFunction(const SpectralFunctional& f)  // NOLINT(google-explicit-constructor)
      : fn([f](const DensityMatrix& rho) { return f.eval(rho); }), concave(f.concave()) {
    if (f.kind() == FunctionalKind::pure_indicator)
      special_pure_point = f.indicator_target().amplitudes();
  }

  double operator()(const DensityMatrix& rho) const { return fn(rho); }
};

}  // namespace qroof
