#include "collapse/hilbert.hpp"

#include <doctest.h>

#include <random>

#include "collapse/report.hpp"
#include "oracles.hpp"

using namespace collapse;

namespace {

StateVector single_state(const std::string& id, std::vector<Complex> amps,
                         std::vector<std::string> tags = {}) {
  Vector v(static_cast<long>(amps.size()));
  for (size_t i = 0; i < amps.size(); ++i) v(i) = amps[i];
  return StateVector(
      TensorSpace::single(id, static_cast<int>(amps.size()), std::move(tags)),
      std::move(v));
}

}  // namespace

TEST_CASE("tensor space index arithmetic round-trips") {
  TensorSpace space({Factor{"a", 2, {}}, Factor{"b", 3, {}}, Factor{"c", 2, {}}});
  CHECK(space.total_dim() == 12);
  CHECK(space.stride(0) == 6);
  CHECK(space.stride(1) == 2);
  CHECK(space.stride(2) == 1);
  for (long g = 0; g < space.total_dim(); ++g) {
    CHECK(space.pack(space.unpack(g)) == g);
  }
  CHECK(space.factor_position("b") == 1);
  CHECK_THROWS_AS(space.factor_position("nope"), DimensionError);
}

TEST_CASE("tensor space rejects duplicate ids and tags") {
  CHECK_THROWS_AS(TensorSpace({Factor{"a", 2, {}}, Factor{"a", 2, {}}}),
                  DimensionError);
  CHECK_THROWS_AS(TensorSpace({Factor{"a", 2, {"x", "x"}}}), DimensionError);
  CHECK_THROWS_AS(TensorSpace({Factor{"a", 2, {"x"}}}), DimensionError);
  CHECK_THROWS_AS(TensorSpace({Factor{"a", 0, {}}}), DimensionError);
}

TEST_CASE("basis labels resolve by tag, explicit and implicit") {
  TensorSpace space({Factor{"4a", 4, {"1x", "1y", "2u", "2v"}}, Factor{"n", 2, {}}});
  CHECK(space.tag_index("4a", "2u") == 2);
  CHECK(space.label(0, 1) == BasisLabel{"4a", "1y"});
  CHECK(space.tag_index("n", "2") == 1);
  CHECK(space.label(1, 0) == BasisLabel{"n", "1"});
  CHECK_THROWS_AS(space.tag_index("4a", "3z"), DimensionError);
  CHECK_THROWS_AS(space.tag_index("n", "3"), DimensionError);
}

TEST_CASE("tensor product of basis states") {
  StateVector a = single_state("a", {1.0, 0.0});
  StateVector b = single_state("b", {1.0, 0.0});
  StateVector prod = tensor_product({a, b});
  CHECK(prod.amplitudes()(0) == Complex(1.0));
  CHECK(prod.amplitudes().tail(3).norm() == 0.0);
}

TEST_CASE("tensor product distributes over a basis factor") {
  const Complex ca(0.3, 0.4);
  const Complex cb(-0.5, 0.7);
  StateVector prod = tensor_product(
      {single_state("a", {ca, cb}), single_state("b", {1.0, 0.0})});
  CHECK(prod.amplitudes()(0) == ca);
  CHECK(prod.amplitudes()(1) == Complex(0.0));
  CHECK(prod.amplitudes()(2) == cb);
  CHECK(prod.amplitudes()(3) == Complex(0.0));
}

TEST_CASE("tensor product norm is multiplicative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Vector u = oracles::random_vector(rng, 3);
    Vector v = oracles::random_vector(rng, 4);
    StateVector su(TensorSpace::single("u", 3), u);
    StateVector sv(TensorSpace::single("v", 4), v);
    StateVector prod = tensor_product({su, sv});
    CHECK(prod.norm() == doctest::Approx(su.norm() * sv.norm()).epsilon(1e-12));
  }
}

TEST_CASE("tensor product matches the raw Kronecker oracle and associates") {
  std::mt19937_64 rng(12);
  Vector u = oracles::random_vector(rng, 2);
  Vector v = oracles::random_vector(rng, 3);
  Vector w = oracles::random_vector(rng, 2);
  StateVector su(TensorSpace::single("u", 2), u);
  StateVector sv(TensorSpace::single("v", 3), v);
  StateVector sw(TensorSpace::single("w", 2), w);

  const Vector flat = tensor_product({su, sv, sw}).amplitudes();
  const Vector left = oracles::kron(oracles::kron(u, v), w);
  const Vector right = oracles::kron(u, oracles::kron(v, w));
  CHECK((flat - left).norm() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK((left - right).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("tensor product rejects multi-factor inputs and duplicate ids") {
  StateVector a = single_state("a", {1.0, 0.0});
  StateVector b = single_state("b", {1.0, 0.0});
  StateVector ab = tensor_product({a, b});
  CHECK_THROWS_AS(tensor_product({ab, a}), DimensionError);
  CHECK_THROWS_AS(tensor_product({a, a}), DimensionError);
}

TEST_CASE("outer projector of basis and superposition states") {
  Projector p1 = outer_projector(single_state("q", {1.0, 0.0}));
  CHECK(p1.matrix()(0, 0) == Complex(1.0));
  CHECK(p1.matrix()(1, 1) == Complex(0.0));

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Projector p2 = outer_projector(single_state("q", {inv_sqrt2, inv_sqrt2}));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(p2.matrix()(i, j).real() == doctest::Approx(0.5).epsilon(1e-14));
    }
  }
  CHECK(p2.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("outer projector rejects non-normalized input") {
  CHECK_THROWS_AS(outer_projector(single_state("q", {1.0, 1.0})),
                  NormalizationError);
}

TEST_CASE("projectors from random unit vectors are idempotent") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    Vector v = oracles::random_unit_vector(rng, 6);
    Projector p = outer_projector(StateVector(TensorSpace::single("q", 6), v));
    const Matrix& m = p.matrix();
    CHECK((m * m - m).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("lift embeds a factor projector with identities elsewhere") {
  TensorSpace target({Factor{"a", 2, {}}, Factor{"b", 2, {}}});
  Projector local = outer_projector(single_state("a", {1.0, 0.0}));
  Projector lifted = lift_to_space(local, target, "a");
  lifted.validate(1e-10, 1e-10);
  // rank multiplies by the co-dimension
  CHECK(lifted.matrix().trace().real() == doctest::Approx(2.0).epsilon(1e-14));

  // against the raw Kronecker oracle, for both factor positions
  Matrix expected = oracles::kron(local.matrix(), Matrix::Identity(2, 2));
  CHECK((lifted.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-14);
  Projector lifted_b = lift_to_space(local, target, "b");
  Matrix expected_b = oracles::kron(Matrix::Identity(2, 2), local.matrix());
  REQUIRE(local.dim() == 2);
  CHECK((lifted_b.matrix() - expected_b).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("lifting the identity gives the identity on the total space") {
  TensorSpace target({Factor{"a", 3, {}}, Factor{"b", 2, {}}});
  Projector local(TensorSpace::single("a", 3), Matrix::Identity(3, 3));
  Projector lifted = lift_to_space(local, target, "a");
  CHECK((lifted.matrix() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("lift trace scales by the co-dimension product") {
  std::mt19937_64 rng(14);
  TensorSpace target({Factor{"a", 2, {}}, Factor{"b", 3, {}}, Factor{"c", 2, {}}});
  Vector v = oracles::random_unit_vector(rng, 3);
  Projector local = outer_projector(StateVector(TensorSpace::single("b", 3), v));
  Projector lifted = lift_to_space(local, target, "b");
  lifted.validate(1e-10, 1e-10);
  CHECK(lifted.matrix().trace().real() ==
        doctest::Approx(local.matrix().trace().real() * 4.0).epsilon(1e-12));
}

TEST_CASE("lift rejects unknown factors and mismatched dimensions") {
  TensorSpace target({Factor{"a", 2, {}}, Factor{"b", 3, {}}});
  Projector local = outer_projector(single_state("a", {1.0, 0.0}));
  CHECK_THROWS_AS(lift_to_space(local, target, "zz"), DimensionError);
  CHECK_THROWS_AS(lift_to_space(local, target, "b"), DimensionError);
}

TEST_CASE("trace of identity and rank-one operators") {
  TensorSpace space = TensorSpace::single("q", 4);
  DensityOperator identity(space, Matrix::Identity(4, 4) / 4.0);
  CHECK(trace(identity).real() == doctest::Approx(1.0));

  std::mt19937_64 rng(15);
  Vector v = oracles::random_unit_vector(rng, 4);
  DensityOperator pure(space, v * v.adjoint());
  CHECK(trace(pure).real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((Matrix::Identity(4, 4)).trace().real() == 4.0);
}

TEST_CASE("trace is invariant under unitary conjugation") {
  std::mt19937_64 rng(16);
  TensorSpace space = TensorSpace::single("q", 5);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v = oracles::random_unit_vector(rng, 5);
    Matrix x = v * v.adjoint();
    Matrix u = oracles::haar_unitary(rng, 5);
    DensityOperator original(space, x);
    DensityOperator rotated(space, u * x * u.adjoint(), 1e-8);
    CHECK(std::abs(trace(rotated) - trace(original)) <= 1e-10);
  }
}

TEST_CASE("event probability: certainty, exclusion, and diagonal case") {
  TensorSpace space = TensorSpace::single("q", 2);
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.36;
  rho(1, 1) = 0.64;
  DensityOperator state(space, rho);

  Projector identity(space, Matrix::Identity(2, 2));
  CHECK(event_probability(identity, state) == doctest::Approx(1.0));

  Projector p0 = outer_projector(single_state("q", {1.0, 0.0}));
  CHECK(event_probability(p0, state) == doctest::Approx(0.36).epsilon(1e-14));

  // orthogonal to the support
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1.0;
  DensityOperator only_first(space, pure);
  Projector p1 = outer_projector(single_state("q", {0.0, 1.0}));
  CHECK(event_probability(p1, only_first) == doctest::Approx(0.0));
}

TEST_CASE("event probability equals trace for the identity projector") {
  std::mt19937_64 rng(17);
  TensorSpace space = TensorSpace::single("q", 4);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v = oracles::random_unit_vector(rng, 4);
    DensityOperator rho(space, v * v.adjoint());
    Projector identity(space, Matrix::Identity(4, 4));
    CHECK(event_probability(identity, rho) ==
          doctest::Approx(trace(rho).real()).epsilon(1e-13));
  }
}

TEST_CASE("event probability rejects mismatched shapes") {
  TensorSpace s2 = TensorSpace::single("q", 2);
  TensorSpace s3 = TensorSpace::single("q", 3);
  Projector p(s3, Matrix::Identity(3, 3));
  DensityOperator rho(s2, Matrix::Identity(2, 2) / 2.0);
  CHECK_THROWS_AS(event_probability(p, rho), DimensionError);
}

TEST_CASE("event probability rejects values outside the unit interval") {
  TensorSpace space = TensorSpace::single("q", 2);
  // a scaled "projector" pushes the trace beyond 1
  Projector inflated(space, 3.0 * Matrix::Identity(2, 2));
  DensityOperator rho(space, Matrix::Identity(2, 2) / 2.0);
  CHECK_THROWS_AS(event_probability(inflated, rho), NormalizationError);
  CHECK(clamp_probability(1.0 + 1e-9) == 1.0);
  CHECK(clamp_probability(-1e-9) == 0.0);
}

TEST_CASE("collapse onto a basis state's own projector is the identity") {
  StateVector v = single_state("q", {0.0, 1.0});
  Projector p = outer_projector(v);
  auto [collapsed, probability] = collapse::collapse(v, p);
  CHECK(probability == doctest::Approx(1.0));
  CHECK((collapsed.amplitudes() - v.amplitudes()).norm() <= 1e-12);
}

TEST_CASE("collapse implements the two-level jump rule") {
  const Complex a(0.48, 0.36);  // |a|^2 = 0.36
  const Complex b(0.0, 0.8);
  StateVector v = single_state("q", {a, b});
  Projector p = outer_projector(single_state("q", {1.0, 0.0}));
  auto [collapsed, probability] = collapse::collapse(v, p);
  CHECK(probability == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(std::abs(collapsed.amplitudes()(0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(collapsed.amplitudes()(1)) == 0.0);
  CHECK(collapsed.is_normalized(1e-12));
}

TEST_CASE("collapse of the two-observer superposition by a lifted brain projector") {
  // State with branch amplitudes (a, b) and brain amplitudes (e, f) etc.,
  // assembled from primitives; collapsing onto the first brain tag of
  // observer a must carry probability |a e|^2.
  const Complex a(0.6, 0.0), b(0.0, 0.8);
  const Complex e(0.28, 0.48), f(std::sqrt(1.0 - 0.28 * 0.28 - 0.48 * 0.48), 0.0);
  const Complex g(0.8, 0.0), h(0.0, 0.6);

  auto basis = [](const std::string& id, int dim, int idx,
                  std::vector<std::string> tags = {}) {
    Vector amp = Vector::Zero(dim);
    amp(idx) = 1.0;
    return StateVector(TensorSpace::single(id, dim, std::move(tags)), amp);
  };
  std::vector<std::string> tags_a = {"1x", "1y", "2u", "2v"};
  std::vector<std::string> tags_b = {"1z", "1w", "2c", "2d"};

  Vector brain_a1 = Vector::Zero(4);
  brain_a1(0) = e;
  brain_a1(1) = f;
  Vector brain_b1 = Vector::Zero(4);
  brain_b1(0) = g;
  brain_b1(1) = h;

  StateVector branch1 = tensor_product(
      {basis("1", 2, 0), basis("2", 2, 0), basis("3a", 2, 0),
       StateVector(TensorSpace::single("4a", 4, tags_a), brain_a1),
       basis("3b", 2, 0),
       StateVector(TensorSpace::single("4b", 4, tags_b), brain_b1)});
  StateVector branch2 = tensor_product(
      {basis("1", 2, 1), basis("2", 2, 1), basis("3a", 2, 1),
       basis("4a", 4, 2, tags_a), basis("3b", 2, 1), basis("4b", 4, 2, tags_b)});
  StateVector psi(branch1.space(),
                  a * branch1.amplitudes() + b * branch2.amplitudes());
  REQUIRE(psi.is_normalized(1e-12));

  Projector brain_projector = lift_to_space(
      outer_projector(basis("4a", 4, 0, tags_a)), psi.space(), "4a");
  auto [collapsed, probability] = collapse::collapse(psi, brain_projector);
  CHECK(probability ==
        doctest::Approx(std::norm(a) * std::norm(e)).epsilon(1e-12));
  CHECK(collapsed.is_normalized(1e-12));
}

TEST_CASE("collapse preserves unit norm whenever the probability is not tiny") {
  std::mt19937_64 rng(18);
  TensorSpace space = TensorSpace::single("q", 5);
  int exercised = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Vector v = oracles::random_unit_vector(rng, 5);
    Vector w = oracles::random_unit_vector(rng, 5);
    Projector p = outer_projector(StateVector(space, w));
    const double expected = std::norm(w.dot(v));
    if (expected <= 1e-8) continue;
    auto [collapsed, probability] = collapse::collapse(StateVector(space, v), p);
    CHECK(std::abs(collapsed.norm_squared() - 1.0) <= 1e-12);
    CHECK(probability == doctest::Approx(expected).epsilon(1e-11));
    ++exercised;
  }
  CHECK(exercised > 150);
}

TEST_CASE("zero-probability collapse raises a distinct error, never NaN") {
  StateVector v = single_state("q", {1.0, 0.0});
  Projector p = outer_projector(single_state("q", {0.0, 1.0}));
  CHECK_THROWS_AS(collapse::collapse(v, p), ZeroProbabilityError);
}

TEST_CASE("sum of the two basis projectors is the identity") {
  Projector p1 = outer_projector(single_state("q", {1.0, 0.0}));
  Projector p2 = outer_projector(single_state("q", {0.0, 1.0}));
  Projector sum = sum_projectors({p1, p2});
  CHECK((sum.matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-14);

  Projector alone = sum_projectors({p1});
  CHECK((alone.matrix() - p1.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sums of random orthogonal projectors stay idempotent") {
  std::mt19937_64 rng(19);
  TensorSpace space = TensorSpace::single("q", 5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix u = oracles::haar_unitary(rng, 5);
    std::vector<Projector> ps;
    for (int k = 0; k < 3; ++k) {
      ps.push_back(outer_projector(StateVector(space, u.col(k))));
    }
    Projector sum = sum_projectors(ps);
    const Matrix& m = sum.matrix();
    CHECK((m * m - m).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("non-orthogonal projector sums are rejected with the overlap norm") {
  Projector p1 = outer_projector(single_state("q", {1.0, 0.0}));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Projector p2 = outer_projector(single_state("q", {inv_sqrt2, inv_sqrt2}));
  CHECK_THROWS_WITH_AS(sum_projectors({p1, p2}),
                       doctest::Contains("not orthogonal"),
                       OrthogonalityError);
}

TEST_CASE("apply_factor_operator matches the lifted matrix") {
  std::mt19937_64 rng(20);
  TensorSpace space({Factor{"a", 2, {}}, Factor{"b", 3, {}}, Factor{"c", 2, {}}});
  Vector v = oracles::random_unit_vector(rng, space.total_dim());
  Vector w = oracles::random_unit_vector(rng, 3);
  Projector local = outer_projector(StateVector(TensorSpace::single("b", 3), w));
  Projector lifted = lift_to_space(local, space, "b");

  StateVector fast = apply_factor_operator(StateVector(space, v), "b",
                                           local.matrix());
  Vector slow = lifted.matrix() * v;
  CHECK((fast.amplitudes() - slow).norm() <= 1e-13);
}

TEST_CASE("density operator construction rejects non-Hermitian input") {
  TensorSpace space = TensorSpace::single("q", 2);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(DensityOperator(space, bad), DimensionError);
}

TEST_CASE("state vector construction rejects mismatched lengths and NaNs") {
  TensorSpace space = TensorSpace::single("q", 2);
  CHECK_THROWS_AS(StateVector(space, Vector::Zero(3)), DimensionError);
  Vector nan_amps(2);
  nan_amps << Complex(std::nan("")), Complex(0.0);
  CHECK_THROWS_AS(StateVector(space, nan_amps), NormalizationError);
}
