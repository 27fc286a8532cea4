#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qroof/monotones.hpp"

namespace qroof {

struct TrialRow {
  int index;
  double lhs;
  double rhs;
  bool pass;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  int trials;
  int failures;
  std::vector<TrialRow> rows;

  bool passed() const { return failures == 0; }
};

namespace detail {

inline void record(SuiteReport& rep, int idx, double lhs, double rhs, bool pass,
                   std::string note = {}) {
  rep.rows.push_back({idx, lhs, rhs, pass, std::move(note)});
  if (!pass) ++rep.failures;
}

}  // namespace detail

/// Random one-sided instrument: `n_outcomes` single-Kraus outcomes drawn from a
/// Haar isometry on the chosen local factor, lifted to the composite.
inline Instrument sample_local_instrument(const BipartiteShape& shape, Side side,
                                          int n_outcomes, std::uint64_t seed) {
  const int d = side == Side::keep_A ? shape.dim_A : shape.dim_B;
  Rng rng(seed);
  PureDecompositionParam iso = random_isometry(d * n_outcomes, d, rng);
  std::vector<std::vector<Matrix>> outcomes;
  for (int k = 0; k < n_outcomes; ++k)
    outcomes.push_back({Matrix(iso.V.block(k * d, 0, d, d))});
  return lift_local(Instrument(std::move(outcomes)), shape, side);
}

/// Discrete Jensen: concave direction for H, convex for -H, exact equality for
/// the affine functional Tr(A rho).
inline SuiteReport jensen_suite(int trials, std::uint64_t seed) {
  SuiteReport rep{"jensen", trials, 0, {}};
  const SpectralFunctional h = SpectralFunctional::von_neumann();
  const StateFunction neg_h(
      [h](const DensityMatrix& rho) { return -h.eval(rho); });
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + 2 * t);
    std::uniform_int_distribution<int> na(2, 5);
    const Ensemble e = sample_random_ensemble(3, na(rng), seed + 2 * t + 1);
    const auto concave = jensen_check(h, e, JensenDirection::concave, 1e-9);
    const auto convex = jensen_check(neg_h, e, JensenDirection::convex, 1e-9);
    Matrix g = random_gaussian_matrix(3, 3, rng);
    const Matrix a = 0.5 * (g + g.adjoint());
    const StateFunction affine(
        [a](const DensityMatrix& rho) { return (a * rho.matrix()).trace().real(); });
    const auto eq = jensen_check(affine, e, JensenDirection::convex, 1e-12);
    const bool affine_ok = std::abs(eq.lhs - eq.rhs) <= 1e-12;
    detail::record(rep, t, concave.lhs, concave.rhs,
                   concave.satisfied && convex.satisfied && affine_ok);
  }
  return rep;
}

inline SuiteReport concavity_suite(int trials, std::uint64_t seed) {
  SuiteReport rep{"concavity", trials, 0, {}};
  const std::vector<SpectralFunctional> fs{SpectralFunctional::von_neumann(),
                                           SpectralFunctional::renyi(0.5),
                                           SpectralFunctional::alpha_tangle(2.0)};
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + t);
    std::uniform_int_distribution<int> na(2, 4);
    const Ensemble e = sample_random_ensemble(3, na(rng), seed + 100000 + t);
    bool ok = true;
    double worst_lhs = 0, worst_rhs = 0;
    for (const auto& f : fs) {
      const auto r = jensen_check(f, e, JensenDirection::concave, 1e-9);
      if (!r.satisfied) {
        ok = false;
        worst_lhs = r.lhs;
        worst_rhs = r.rhs;
      }
    }
    detail::record(rep, t, worst_lhs, worst_rhs, ok);
  }
  return rep;
}

/// Hull of a concave function vs roof of its pure-state restriction; the two
/// agree for H, R_{1/2}, f_2 (all vanish on pure states, so both sides sit at
/// the same infimum).
inline SuiteReport roof_hull_suite(int trials, std::uint64_t seed,
                                   const OptimizerConfig& cfg, int dim = 3,
                                   double tolerance = 2e-3) {
  SuiteReport rep{"roof-hull", trials, 0, {}};
  const SpectralFunctional h = SpectralFunctional::von_neumann();
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + t);
    std::uniform_int_distribution<int> rk(1, dim);
    const DensityMatrix rho = sample_induced_mixed(dim, rk(rng), seed + 5000 + t);
    const OptimizerConfig c = cfg.with_seed(seed + 31 * t);
    const double hull = convex_hull(h, rho, c).value;
    const PureFn pure_h = [&h](const Vector& v) {
      return h.eval(DensityMatrix::trusted(v * v.adjoint()));
    };
    const double roof = convex_roof(pure_h, rho, c).value;
    detail::record(rep, t, hull, roof, std::abs(hull - roof) <= tolerance);
  }
  return rep;
}

/// Hull vs closure of the single-pure-state indicator: the hull keeps the
/// spike (value 1 at the target), the closure flattens to ~0.
inline SuiteReport closure_gap_suite(std::uint64_t seed, const OptimizerConfig& cfg,
                                     int dim = 2) {
  SuiteReport rep{"closure-gap", 1, 0, {}};
  const PureStateVector psi = sample_haar_pure(dim, seed);
  const StateFunction f = SpectralFunctional::pure_indicator(psi);
  const DensityMatrix rho(psi);
  const double hull = convex_hull(f, rho, cfg.with_seed(seed + 1)).value;
  const BiconjugateResult closure =
      fenchel_biconjugate(f, rho, cfg.with_seed(seed + 2));
  const bool pass = std::abs(hull - 1.0) <= 1e-9 && closure.value <= 1e-2;
  detail::record(rep, 0, hull, closure.value, pass, "hull vs closure at target");
  return rep;
}

inline SuiteReport locc_suite(int trials, std::uint64_t seed, const OptimizerConfig& cfg,
                              double axiom_tol = 5e-3) {
  SuiteReport rep{"locc", trials, 0, {}};
  const BipartiteShape shape(2, 2);
  const MonotoneSpec spec{SpectralFunctional::von_neumann(), TracedSide::trace_out_B,
                          shape};
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + t);
    std::uniform_int_distribution<int> rk(1, 4);
    std::uniform_int_distribution<int> side_pick(0, 1);
    const DensityMatrix w = sample_induced_mixed(4, rk(rng), seed + 40000 + t);
    const Side side = side_pick(rng) == 0 ? Side::keep_A : Side::keep_B;
    const Instrument m = sample_local_instrument(shape, side, 2, seed + 80000 + t);
    const auto mode = t % 2 == 0 ? MonotonicityMode::selective
                                 : MonotonicityMode::nonselective;
    const auto r = monotonicity_check(spec, w, m, mode, cfg.with_seed(seed + 7 * t),
                                      axiom_tol);
    detail::record(rep, t, r.before, r.after, r.holds);
  }
  return rep;
}

inline SuiteReport subadd_suite(int trials, std::uint64_t seed,
                                const OptimizerConfig& cfg, double tolerance = 5e-3) {
  SuiteReport rep{"subadd", trials, 0, {}};
  const BipartiteShape shape(2, 2);
  const MonotoneSpec spec{SpectralFunctional::von_neumann(), TracedSide::trace_out_B,
                          shape};
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + t);
    std::uniform_int_distribution<int> rk(1, 4);
    const DensityMatrix w1 = sample_induced_mixed(4, rk(rng), seed + 60000 + 2 * t);
    const DensityMatrix w2 = sample_induced_mixed(4, rk(rng), seed + 60001 + 2 * t);
    const auto r = subadditivity_check(spec, spec, w1, w2, cfg.with_seed(seed + 13 * t),
                                       tolerance);
    detail::record(rep, t, r.lhs, r.rhs, r.holds);
  }
  return rep;
}

/// E^n_F non-decreasing in n and reaching the entropy roof at n = dim of the
/// smaller factor, on seeded dim x dim states.
inline SuiteReport convergence_suite(int n_states, std::uint64_t seed,
                                     const OptimizerConfig& cfg, int dim = 3,
                                     double step_tol = 2e-3, double limit_tol = 1e-2) {
  SuiteReport rep{"convergence", n_states, 0, {}};
  const BipartiteShape shape(dim, dim);
  const MonotoneSpec ef_spec{SpectralFunctional::von_neumann(),
                             TracedSide::trace_out_B, shape};
  for (int t = 0; t < n_states; ++t) {
    Rng rng(seed + t);
    std::uniform_int_distribution<int> rk(1, 3);
    const DensityMatrix w = sample_induced_mixed(dim * dim, rk(rng), seed + 90000 + t);
    std::vector<double> values;
    for (int n = 1; n <= dim; ++n)
      values.push_back(eof_truncated(shape, w, n, cfg.with_seed(seed + 17 * t + n)).value);
    const double ef = entanglement_monotone(ef_spec, w, cfg.with_seed(seed + 23 * t)).value;
    bool ok = true;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1] - step_tol) ok = false;
    if (std::abs(values.back() - ef) > limit_tol) ok = false;
    detail::record(rep, t, values.back(), ef, ok);
  }
  return rep;
}

inline SuiteReport energy_continuity_suite(std::uint64_t seed,
                                           const OptimizerConfig& cfg) {
  SuiteReport rep{"energy-continuity", 1, 0, {}};
  const BipartiteShape shape(3, 3);
  const MonotoneSpec spec{SpectralFunctional::von_neumann(), TracedSide::trace_out_B,
                          shape};
  RealVector levels(3);
  levels << 0, 1, 2;
  const EnergyConstraint constraint(ConstraintOperator::diagonal(levels), 1.0);
  const ContinuityTable table =
      energy_continuity_probe(spec, constraint, 4, 0.2, cfg.with_seed(seed));
  detail::record(rep, 0, table.rows.front().max_gap, table.rows.back().max_gap,
                 table.gaps_shrink, "max gap at widest vs tightest separation");
  return rep;
}

}  // namespace qroof
