#include <catch2/catch_amalgamated.hpp>

#include "qroof/monotones.hpp"
#include "qroof/random.hpp"

using namespace qroof;

namespace {

OptimizerConfig quick() {
  OptimizerConfig cfg;
  cfg.restarts = 8;
  cfg.max_iters = 500;
  cfg.seed = 3;
  cfg.ensemble_size_override = 8;
  return cfg;
}

// For tests comparing against closed forms: the roof needs long local runs
// more than it needs restarts.
OptimizerConfig precise() {
  OptimizerConfig cfg = quick();
  cfg.max_iters = 4000;
  return cfg;
}

Vector bell_phi_plus() {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

MonotoneSpec ef_spec(const BipartiteShape& shape) {
  return {SpectralFunctional::von_neumann(), TracedSide::trace_out_B, shape};
}

double binary_entropy(double x) {
  double h = 0;
  for (double t : {x, 1.0 - x})
    if (t > 1e-12) h -= t * std::log2(t);
  return h;
}

// Closed-form two-qubit entanglement of formation via the concurrence
// (spin-flip construction), used purely as an independent cross-check.
double concurrence_eof(const DensityMatrix& rho) {
  Matrix yy = Matrix::Zero(4, 4);
  yy(0, 3) = -1;
  yy(1, 2) = 1;
  yy(2, 1) = 1;
  yy(3, 0) = -1;
  const Matrix r = rho.matrix() * yy * rho.matrix().conjugate() * yy;
  Eigen::ComplexEigenSolver<Matrix> es(r);
  std::vector<double> lam;
  for (int i = 0; i < 4; ++i)
    lam.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  const double c = std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

DensityMatrix werner(double w) {
  Vector singlet = Vector::Zero(4);
  singlet(1) = 1.0 / std::sqrt(2.0);
  singlet(2) = -1.0 / std::sqrt(2.0);
  return DensityMatrix::trusted(w * (singlet * singlet.adjoint()) +
                                (1.0 - w) * Matrix::Identity(4, 4) / 4.0);
}

}  // namespace

TEST_CASE("Bell-state monotone values") {
  const DensityMatrix bell{PureStateVector(bell_phi_plus())};
  const BipartiteShape shape(2, 2);
  const OptimizerConfig cfg = quick();

  const double ef = entanglement_monotone(ef_spec(shape), bell, cfg).value;
  CHECK(ef == Catch::Approx(1.0).margin(1e-6));

  const MonotoneSpec tangle{SpectralFunctional::alpha_tangle(2.0),
                            TracedSide::trace_out_B, shape};
  CHECK(entanglement_monotone(tangle, bell, cfg).value ==
        Catch::Approx(1.0).margin(1e-6));

  const MonotoneSpec renyi_half{SpectralFunctional::renyi(0.5),
                                TracedSide::trace_out_B, shape};
  CHECK(entanglement_monotone(renyi_half, bell, cfg).value ==
        Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("pure states get single-atom witnesses with exact values") {
  const BipartiteShape shape(2, 3);
  const SpectralFunctional h = SpectralFunctional::von_neumann();
  for (int t = 0; t < 25; ++t) {
    const PureStateVector psi = sample_haar_pure(6, 3000 + t);
    const HullResult r =
        entanglement_monotone(ef_spec(shape), DensityMatrix(psi), quick());
    CHECK(r.witness.size() == 1);
    const double expected =
        h.eval(partial_trace(DensityMatrix(psi), shape, Side::keep_A));
    CHECK(r.value == Catch::Approx(expected).margin(1e-10));
  }
}

TEST_CASE("separable mixtures are certified near zero") {
  const BipartiteShape shape(2, 2);
  for (int t = 0; t < 6; ++t) {
    const SeparableSample s = sample_separable_mixture(shape, 3, 3100 + t);
    const double v =
        entanglement_monotone(ef_spec(shape), s.state, quick().with_seed(t)).value;
    CHECK(v <= 5e-3);
  }
}

TEST_CASE("EoF matches the concurrence closed form on random two-qubit states") {
  const BipartiteShape shape(2, 2);
  for (int t = 0; t < 6; ++t) {
    const DensityMatrix rho = sample_induced_mixed(4, 1 + t % 4, 3200 + t);
    const double roof =
        entanglement_monotone(ef_spec(shape), rho, precise().with_seed(50 + t)).value;
    CHECK(roof == Catch::Approx(concurrence_eof(rho)).margin(2e-3));
  }
}

TEST_CASE("Werner family against the closed form") {
  const BipartiteShape shape(2, 2);
  for (double w : {0.5, 0.7, 0.9}) {
    const double roof =
        entanglement_monotone(ef_spec(shape), werner(w), precise().with_seed(77)).value;
    CHECK(roof == Catch::Approx(concurrence_eof(werner(w))).margin(1e-3));
  }
}

TEST_CASE("local unitary invariance") {
  const BipartiteShape shape(2, 2);
  Rng rng(31);
  for (int t = 0; t < 4; ++t) {
    const DensityMatrix rho = sample_induced_mixed(4, 2, 3300 + t);
    const Matrix uv = kron(random_unitary(2, rng), random_unitary(2, rng));
    const DensityMatrix conj = DensityMatrix::trusted(uv * rho.matrix() * uv.adjoint());
    const double a = entanglement_monotone(ef_spec(shape), rho, quick()).value;
    const double b = entanglement_monotone(ef_spec(shape), conj, quick()).value;
    CHECK(std::abs(a - b) <= 2e-3);
  }
}

TEST_CASE("PPT flag certifies the test states independently") {
  const BipartiteShape shape(2, 2);
  CHECK_FALSE(is_ppt(DensityMatrix{PureStateVector(bell_phi_plus())}, shape));
  CHECK_FALSE(is_ppt(werner(0.9), shape));
  CHECK(is_ppt(sample_separable_mixture(shape, 4, 32).state, shape));
  // Entangled Werner states carry strictly positive EoF.
  CHECK(entanglement_monotone(ef_spec(shape), werner(0.9), quick()).value > 0.1);
}

TEST_CASE("truncated entropy contracts") {
  const OptimizerConfig cfg = quick();
  const DensityMatrix low = sample_induced_mixed(4, 2, 3400);
  const SpectralFunctional h = SpectralFunctional::von_neumann();
  CHECK(truncated_entropy(low, 2, cfg) == Catch::Approx(h.eval(low)).margin(1e-6));
  CHECK(truncated_entropy(low, 3, cfg) == Catch::Approx(h.eval(low)).margin(1e-6));

  const DensityMatrix full = sample_induced_mixed(4, 4, 3401);
  double prev = 0;
  for (int n = 2; n <= 4; ++n) {
    const double v = truncated_entropy(full, n, cfg);
    CHECK(v <= std::log2(double(n)) + 1e-9);
    CHECK(v >= prev - 2e-3);
    prev = v;
  }
  CHECK(prev == Catch::Approx(h.eval(full)).margin(1e-6));  // n = rank
  CHECK_THROWS_AS(truncated_entropy(full, 1, cfg), DomainError);
}

TEST_CASE("truncated roofs: two-qubit equality region and ordering") {
  const BipartiteShape shape(2, 2);
  const DensityMatrix rho = sample_induced_mixed(4, 2, 3500);
  const OptimizerConfig cfg = quick();
  const double ef = entanglement_monotone(ef_spec(shape), rho, cfg).value;
  const double e2 = eof_truncated(shape, rho, 2, cfg).value;
  CHECK(std::abs(e2 - ef) <= 2e-3);  // all two-qubit reduced states have rank <= 2
  CHECK(e2 <= std::log2(2.0) + 1e-9);

  const SeparableSample sep = sample_separable_mixture(shape, 3, 3501);
  CHECK(eof_truncated(shape, sep.state, 2, cfg).value <= 5e-3);
}

TEST_CASE("renyi monotone family is non-increasing in p") {
  const BipartiteShape shape(2, 2);
  const DensityMatrix rho = sample_induced_mixed(4, 2, 3600);
  double prev = 1e300;
  for (double p : {0.3, 0.7, 1.0}) {
    const MonotoneSpec spec{SpectralFunctional::renyi(p), TracedSide::trace_out_B,
                            shape};
    const double v = entanglement_monotone(spec, rho, quick()).value;
    CHECK(v <= prev + 2e-3);
    prev = v;
  }
}

TEST_CASE("alpha-tangle monotone varies continuously in alpha") {
  const BipartiteShape shape(2, 2);
  const DensityMatrix rho = sample_induced_mixed(4, 2, 3700);
  std::vector<double> values;
  for (double a : {1.5, 1.75, 2.0, 2.25}) {
    const MonotoneSpec spec{SpectralFunctional::alpha_tangle(a),
                            TracedSide::trace_out_B, shape};
    values.push_back(entanglement_monotone(spec, rho, quick()).value);
  }
  for (std::size_t i = 1; i < values.size(); ++i)
    CHECK(std::abs(values[i] - values[i - 1]) < 0.2);
}

TEST_CASE("convexity of the monotone on mixtures") {
  const BipartiteShape shape(2, 2);
  const DensityMatrix r1 = sample_induced_mixed(4, 2, 3800);
  const DensityMatrix r2 = sample_induced_mixed(4, 2, 3801);
  const OptimizerConfig cfg = quick();
  const double v1 = entanglement_monotone(ef_spec(shape), r1, cfg).value;
  const double v2 = entanglement_monotone(ef_spec(shape), r2, cfg).value;
  const DensityMatrix mix =
      DensityMatrix::trusted(0.5 * r1.matrix() + 0.5 * r2.matrix());
  CHECK(entanglement_monotone(ef_spec(shape), mix, cfg).value <=
        0.5 * v1 + 0.5 * v2 + 5e-3);
}

TEST_CASE("subadditivity probe") {
  const BipartiteShape shape(2, 2);
  const MonotoneSpec spec = ef_spec(shape);
  const OptimizerConfig cfg = quick();

  SECTION("appending a pure product state changes nothing") {
    const DensityMatrix w1 = sample_induced_mixed(4, 2, 3900);
    Vector prod = Vector::Zero(4);
    prod(0) = 1.0;
    const DensityMatrix w2{PureStateVector(prod)};
    const auto r = subadditivity_check(spec, spec, w1, w2, cfg);
    CHECK(r.holds);
    CHECK(std::abs(r.lhs - entanglement_monotone(spec, w1, cfg).value) <= 5e-3);
  }
  SECTION("two Bell pairs stay below two bits") {
    const DensityMatrix bell{PureStateVector(bell_phi_plus())};
    const auto r = subadditivity_check(spec, spec, bell, bell, cfg);
    CHECK(r.holds);
    CHECK(r.lhs <= 2.0 + 5e-3);
    CHECK(r.rhs == Catch::Approx(2.0).margin(1e-6));
  }
  SECTION("non-subadditive base is rejected") {
    const MonotoneSpec tangle{SpectralFunctional::alpha_tangle(2.0),
                              TracedSide::trace_out_B, shape};
    const DensityMatrix w = sample_induced_mixed(4, 2, 3901);
    CHECK_THROWS_AS(subadditivity_check(tangle, tangle, w, w, cfg), DomainError);
  }
}

TEST_CASE("holevo capacity routes") {
  OptimizerConfig cfg = quick();
  cfg.restarts = 16;
  cfg.max_iters = 1200;

  SECTION("identity qubit channel gives one bit") {
    std::vector<Matrix> kraus{Matrix::Identity(2, 2)};
    const auto rep =
        holevo_capacity_estimate(QuantumChannel(std::move(kraus)), std::nullopt,
                                 {1.5, 1.25, 1.1}, cfg);
    CHECK(rep.extrapolated == Catch::Approx(1.0).margin(1e-2));
    CHECK(rep.chi_direct == Catch::Approx(1.0).margin(1e-2));
  }
  SECTION("completely depolarizing channel gives zero") {
    std::vector<Matrix> kraus;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Matrix k = Matrix::Zero(2, 2);
        k(i, j) = 1.0 / std::sqrt(2.0);
        kraus.push_back(k);
      }
    const auto rep = holevo_capacity_estimate(QuantumChannel(std::move(kraus)),
                                              std::nullopt, {1.5, 1.25}, cfg);
    CHECK(rep.extrapolated == Catch::Approx(0.0).margin(1e-2));
    CHECK(rep.chi_direct == Catch::Approx(0.0).margin(1e-2));
  }
  SECTION("bad schedules are rejected") {
    std::vector<Matrix> kraus{Matrix::Identity(2, 2)};
    const QuantumChannel id{std::move(kraus)};
    CHECK_THROWS_AS(holevo_capacity_estimate(id, std::nullopt, {1.1, 1.5}, cfg),
                    DomainError);
    CHECK_THROWS_AS(holevo_capacity_estimate(id, std::nullopt, {0.9}, cfg),
                    DomainError);
  }
}

TEST_CASE("energy continuity probe shrinks with separation") {
  const BipartiteShape shape(2, 2);
  RealVector levels(2);
  levels << 0, 1;
  const EnergyConstraint constraint(ConstraintOperator::diagonal(levels), 0.8);
  const ContinuityTable t =
      energy_continuity_probe(ef_spec(shape), constraint, 3, 0.2, quick());
  REQUIRE(t.rows.size() == 3);
  CHECK(t.gaps_shrink);
}
