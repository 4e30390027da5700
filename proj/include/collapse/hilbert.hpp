#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "collapse/errors.hpp"

namespace collapse {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Default numeric tolerances. Every check that uses one accepts an override.
inline constexpr double kTolNorm = 1e-9;   // |norm^2 - 1| for "normalized" states
inline constexpr double kTolHerm = 1e-9;   // max |M - M^dagger| entrywise
inline constexpr double kTolIdem = 1e-9;   // max |P^2 - P| entrywise
inline constexpr double kTolPsd = 1e-8;    // eigenvalue floor for density operators
inline constexpr double kTolZero = 1e-12;  // probability treated as zero

// (factor, state) pair identifying one basis vector of one subsystem.
struct BasisLabel {
  std::string factor_id;
  std::string state_tag;

  bool operator==(const BasisLabel& other) const = default;
};

// One subsystem of a tensor-product space. Tags name the basis states of
// this factor; an empty list means the implicit numeric tags "1", "2", ...
// (kept implicit so large grid factors stay cheap to copy).
struct Factor {
  std::string id;
  int dim = 0;
  std::vector<std::string> tags;

  std::string tag(int state_index) const;
};

// Ordered list of factors with row-major index arithmetic: the first
// declared factor varies slowest, matching Kronecker-product layout.
class TensorSpace {
 public:
  TensorSpace() = default;
  explicit TensorSpace(std::vector<Factor> factors);

  static TensorSpace single(std::string id, int dim,
                            std::vector<std::string> tags = {});

  const std::vector<Factor>& factors() const { return factors_; }
  long total_dim() const { return total_dim_; }

  int factor_position(const std::string& factor_id) const;
  const Factor& factor(const std::string& factor_id) const;
  long stride(int factor_position) const;
  int tag_index(const std::string& factor_id, const std::string& tag) const;
  BasisLabel label(int factor_position, int state_index) const;

  std::vector<int> unpack(long global_index) const;
  long pack(const std::vector<int>& per_factor_indices) const;

  bool operator==(const TensorSpace& other) const;

 private:
  std::vector<Factor> factors_;
  long total_dim_ = 1;
};

// Complex amplitude vector over a labeled basis. Immutable after
// construction; amplitudes must be finite.
class StateVector {
 public:
  StateVector(TensorSpace space, Vector amplitudes);

  const TensorSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  long dim() const { return amps_.size(); }

  double norm_squared() const { return amps_.squaredNorm(); }
  double norm() const { return amps_.norm(); }
  bool is_normalized(double tol = kTolNorm) const;

 private:
  TensorSpace space_;
  Vector amps_;
};

// Hermitian (to within tol_herm) complex matrix over a labeled basis.
class DensityOperator {
 public:
  DensityOperator(TensorSpace space, Matrix matrix, double tol_herm = kTolHerm);

  const TensorSpace& space() const { return space_; }
  const Matrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }

  Complex trace() const { return mat_.trace(); }
  double min_eigenvalue() const;
  bool is_positive_semidefinite(double tol = kTolPsd) const;

 private:
  TensorSpace space_;
  Matrix mat_;
};

// Hermitian idempotent operator. Constructors guarantee the algebraic
// properties by construction; validate() re-checks them numerically.
class Projector {
 public:
  Projector(TensorSpace space, Matrix matrix);

  const TensorSpace& space() const { return space_; }
  const Matrix& matrix() const { return mat_; }
  long dim() const { return mat_.rows(); }

  void validate(double tol_idem = kTolIdem, double tol_herm = kTolHerm) const;

 private:
  TensorSpace space_;
  Matrix mat_;
};

// Kronecker product of states on distinct single-factor spaces, in the
// given order. Output norm is the product of input norms.
StateVector tensor_product(const std::vector<StateVector>& states);

// |v><v| for a normalized v; rank 1, trace 1.
Projector outer_projector(const StateVector& v, double tol_norm = kTolNorm);

// Embed a single-factor projector as p (x) identity on all other factors of
// the target space, with the target's factor ordering.
Projector lift_to_space(const Projector& p, const TensorSpace& target,
                        const std::string& factor_id);

Complex trace(const DensityOperator& x);

// Tr(P rho). The result must be real (imaginary part below tol_herm) and is
// returned unclamped; reports clamp to [0, 1] at the presentation layer.
double event_probability(const Projector& p, const DensityOperator& rho,
                         double tol_herm = kTolHerm,
                         double tol_trace = 1e-6);

// Projective jump: returns (P|v> renormalized, ||P|v>||^2). A projection
// with probability <= tol_zero raises ZeroProbabilityError.
std::pair<StateVector, double> collapse(const StateVector& v,
                                        const Projector& p,
                                        double tol_zero = kTolZero);

// Sum of pairwise orthogonal projectors; the sum is itself a projector.
Projector sum_projectors(const std::vector<Projector>& ps,
                         double tol_orth = kTolIdem);

// Apply a dim x dim one-factor operator to the named factor of a state,
// leaving the other factors untouched. Equivalent to acting with the lifted
// operator but never materializes the full matrix, so it scales to spaces
// whose total dimension admits only vectors.
StateVector apply_factor_operator(const StateVector& v,
                                  const std::string& factor_id,
                                  const Matrix& op);

namespace detail {
// max |A - B| entrywise; helper shared by the checks above.
double max_abs_diff(const Matrix& a, const Matrix& b);
}  // namespace detail

}  // namespace collapse
