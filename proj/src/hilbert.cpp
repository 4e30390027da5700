#include "collapse/hilbert.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace collapse {

std::string Factor::tag(int state_index) const {
  return tags.empty() ? std::to_string(state_index + 1) : tags.at(state_index);
}

TensorSpace::TensorSpace(std::vector<Factor> factors)
    : factors_(std::move(factors)) {
  std::set<std::string> seen_ids;
  total_dim_ = 1;
  for (auto& f : factors_) {
    if (f.dim < 1) {
      throw DimensionError("factor '" + f.id + "' has dimension " +
                           std::to_string(f.dim) + "; must be >= 1");
    }
    if (!seen_ids.insert(f.id).second) {
      throw DimensionError("duplicate factor id '" + f.id + "'");
    }
    if (!f.tags.empty()) {
      if (static_cast<int>(f.tags.size()) != f.dim) {
        throw DimensionError("factor '" + f.id + "' declares " +
                             std::to_string(f.tags.size()) +
                             " tags for dimension " + std::to_string(f.dim));
      }
      std::set<std::string> seen_tags(f.tags.begin(), f.tags.end());
      if (static_cast<int>(seen_tags.size()) != f.dim) {
        throw DimensionError("factor '" + f.id + "' has duplicate state tags");
      }
    }
    total_dim_ *= f.dim;
  }
}

TensorSpace TensorSpace::single(std::string id, int dim,
                                std::vector<std::string> tags) {
  return TensorSpace({Factor{std::move(id), dim, std::move(tags)}});
}

int TensorSpace::factor_position(const std::string& factor_id) const {
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].id == factor_id) return static_cast<int>(i);
  }
  throw DimensionError("unknown factor id '" + factor_id + "'");
}

const Factor& TensorSpace::factor(const std::string& factor_id) const {
  return factors_[factor_position(factor_id)];
}

long TensorSpace::stride(int factor_position) const {
  long s = 1;
  for (size_t i = factor_position + 1; i < factors_.size(); ++i) {
    s *= factors_[i].dim;
  }
  return s;
}

int TensorSpace::tag_index(const std::string& factor_id,
                           const std::string& tag) const {
  const Factor& f = factor(factor_id);
  if (f.tags.empty()) {
    // Implicit numeric tags.
    try {
      const int i = std::stoi(tag);
      if (i >= 1 && i <= f.dim) return i - 1;
    } catch (const std::exception&) {
    }
  } else {
    for (int i = 0; i < f.dim; ++i) {
      if (f.tags[i] == tag) return i;
    }
  }
  throw DimensionError("factor '" + factor_id + "' has no state tag '" + tag +
                       "'");
}

BasisLabel TensorSpace::label(int factor_position, int state_index) const {
  const Factor& f = factors_.at(factor_position);
  return BasisLabel{f.id, f.tag(state_index)};
}

std::vector<int> TensorSpace::unpack(long global_index) const {
  std::vector<int> idx(factors_.size());
  long rest = global_index;
  for (int i = static_cast<int>(factors_.size()) - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(rest % factors_[i].dim);
    rest /= factors_[i].dim;
  }
  return idx;
}

long TensorSpace::pack(const std::vector<int>& per_factor_indices) const {
  if (per_factor_indices.size() != factors_.size()) {
    throw DimensionError("pack() got " +
                         std::to_string(per_factor_indices.size()) +
                         " indices for " + std::to_string(factors_.size()) +
                         " factors");
  }
  long g = 0;
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (per_factor_indices[i] < 0 || per_factor_indices[i] >= factors_[i].dim) {
      throw DimensionError("index out of range for factor '" + factors_[i].id +
                           "'");
    }
    g = g * factors_[i].dim + per_factor_indices[i];
  }
  return g;
}

bool TensorSpace::operator==(const TensorSpace& other) const {
  if (factors_.size() != other.factors_.size()) return false;
  for (size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].id != other.factors_[i].id ||
        factors_[i].dim != other.factors_[i].dim ||
        factors_[i].tags != other.factors_[i].tags) {
      return false;
    }
  }
  return true;
}

StateVector::StateVector(TensorSpace space, Vector amplitudes)
    : space_(std::move(space)), amps_(std::move(amplitudes)) {
  if (amps_.size() != space_.total_dim()) {
    throw DimensionError("amplitude length " + std::to_string(amps_.size()) +
                         " does not match space dimension " +
                         std::to_string(space_.total_dim()));
  }
  if (!std::isfinite(amps_.squaredNorm())) {
    throw NormalizationError("state has non-finite norm");
  }
}

bool StateVector::is_normalized(double tol) const {
  return std::abs(norm_squared() - 1.0) <= tol;
}

DensityOperator::DensityOperator(TensorSpace space, Matrix matrix,
                                 double tol_herm)
    : space_(std::move(space)), mat_(std::move(matrix)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() != space_.total_dim()) {
    throw DimensionError("operator shape does not match space dimension " +
                         std::to_string(space_.total_dim()));
  }
  const double herm = detail::max_abs_diff(mat_, mat_.adjoint());
  if (!(herm <= tol_herm)) {
    std::ostringstream msg;
    msg << "operator is not Hermitian: max |M - M^dagger| = " << herm;
    throw DimensionError(msg.str());
  }
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_,
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool DensityOperator::is_positive_semidefinite(double tol) const {
  return min_eigenvalue() >= -tol;
}

Projector::Projector(TensorSpace space, Matrix matrix)
    : space_(std::move(space)), mat_(std::move(matrix)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() != space_.total_dim()) {
    throw DimensionError("projector shape does not match space dimension " +
                         std::to_string(space_.total_dim()));
  }
}

void Projector::validate(double tol_idem, double tol_herm) const {
  const double herm = detail::max_abs_diff(mat_, mat_.adjoint());
  if (!(herm <= tol_herm)) {
    std::ostringstream msg;
    msg << "projector is not Hermitian: max |P - P^dagger| = " << herm;
    throw OrthogonalityError(msg.str());
  }
  const double idem = detail::max_abs_diff(mat_ * mat_, mat_);
  if (!(idem <= tol_idem)) {
    std::ostringstream msg;
    msg << "projector is not idempotent: max |P^2 - P| = " << idem;
    throw OrthogonalityError(msg.str());
  }
}

StateVector tensor_product(const std::vector<StateVector>& states) {
  if (states.empty()) {
    throw DimensionError("tensor_product needs at least one state");
  }
  std::vector<Factor> factors;
  for (const auto& s : states) {
    if (s.space().factors().size() != 1) {
      throw DimensionError(
          "tensor_product inputs must live on single-factor spaces");
    }
    factors.push_back(s.space().factors()[0]);
  }
  TensorSpace combined(std::move(factors));  // rejects duplicate factor ids

  Vector amps = states[0].amplitudes();
  for (size_t k = 1; k < states.size(); ++k) {
    const Vector& b = states[k].amplitudes();
    Vector next(amps.size() * b.size());
    for (long i = 0; i < amps.size(); ++i) {
      next.segment(i * b.size(), b.size()) = amps(i) * b;
    }
    amps = std::move(next);
  }
  return StateVector(std::move(combined), std::move(amps));
}

Projector outer_projector(const StateVector& v, double tol_norm) {
  if (std::abs(v.norm_squared() - 1.0) > tol_norm) {
    std::ostringstream msg;
    msg << "outer_projector requires a normalized state; got norm^2 = "
        << v.norm_squared();
    throw NormalizationError(msg.str());
  }
  Matrix m = v.amplitudes() * v.amplitudes().adjoint();
  return Projector(v.space(), std::move(m));
}

Projector lift_to_space(const Projector& p, const TensorSpace& target,
                        const std::string& factor_id) {
  const int pos = target.factor_position(factor_id);
  const Factor& f = target.factors()[pos];
  if (p.dim() != f.dim) {
    throw DimensionError("projector dimension " + std::to_string(p.dim()) +
                         " does not match factor '" + factor_id +
                         "' dimension " + std::to_string(f.dim));
  }
  const long total = target.total_dim();
  const long stride = target.stride(pos);
  const long block = stride * f.dim;  // span of one full cycle of this factor

  Matrix out = Matrix::Zero(total, total);
  // Entry rule: <i|lift|j> = p(i_f, j_f) when all other factor indices agree.
  for (long base = 0; base < total; base += block) {
    for (long rest = 0; rest < stride; ++rest) {
      for (int a = 0; a < f.dim; ++a) {
        for (int b = 0; b < f.dim; ++b) {
          out(base + a * stride + rest, base + b * stride + rest) =
              p.matrix()(a, b);
        }
      }
    }
  }
  return Projector(target, std::move(out));
}

Complex trace(const DensityOperator& x) { return x.trace(); }

double event_probability(const Projector& p, const DensityOperator& rho,
                         double tol_herm, double tol_trace) {
  if (!(p.space() == rho.space())) {
    throw DimensionError("projector and density operator live on different spaces");
  }
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tol_trace) {
    std::ostringstream msg;
    msg << "event_probability requires a unit-trace state; got trace = " << tr;
    throw NormalizationError(msg.str());
  }
  const Complex value = (p.matrix() * rho.matrix()).trace();
  if (std::abs(value.imag()) > tol_herm) {
    std::ostringstream msg;
    msg << "Tr(P rho) has non-real value " << value.imag();
    throw DimensionError(msg.str());
  }
  if (value.real() < -tol_trace || value.real() > 1.0 + tol_trace) {
    std::ostringstream msg;
    msg << "Tr(P rho) = " << value.real()
        << " is not a probability; operands are not a projector/state pair";
    throw NormalizationError(msg.str());
  }
  return value.real();
}

std::pair<StateVector, double> collapse(const StateVector& v,
                                        const Projector& p, double tol_zero) {
  if (!(p.space() == v.space())) {
    throw DimensionError("projector and state live on different spaces");
  }
  Vector projected = p.matrix() * v.amplitudes();
  const double probability = projected.squaredNorm();
  if (probability <= tol_zero) {
    std::ostringstream msg;
    msg << "collapse onto a zero-probability subspace (||P v||^2 = "
        << probability << ")";
    throw ZeroProbabilityError(msg.str());
  }
  projected /= std::sqrt(probability);
  return {StateVector(v.space(), std::move(projected)), probability};
}

Projector sum_projectors(const std::vector<Projector>& ps, double tol_orth) {
  if (ps.empty()) {
    throw DimensionError("sum_projectors needs at least one projector");
  }
  for (size_t i = 1; i < ps.size(); ++i) {
    if (!(ps[i].space() == ps[0].space())) {
      throw DimensionError("sum_projectors inputs live on different spaces");
    }
  }
  for (size_t i = 0; i < ps.size(); ++i) {
    for (size_t j = i + 1; j < ps.size(); ++j) {
      const double overlap =
          (ps[i].matrix() * ps[j].matrix()).cwiseAbs().maxCoeff();
      if (overlap > tol_orth) {
        std::ostringstream msg;
        msg << "projectors " << i << " and " << j
            << " are not orthogonal: max |P_i P_j| = " << overlap;
        throw OrthogonalityError(msg.str());
      }
    }
  }
  Matrix sum = ps[0].matrix();
  for (size_t i = 1; i < ps.size(); ++i) sum += ps[i].matrix();
  Projector result(ps[0].space(), std::move(sum));
  result.validate();
  return result;
}

StateVector apply_factor_operator(const StateVector& v,
                                  const std::string& factor_id,
                                  const Matrix& op) {
  const TensorSpace& space = v.space();
  const int pos = space.factor_position(factor_id);
  const int d = space.factors()[pos].dim;
  if (op.rows() != d || op.cols() != d) {
    throw DimensionError("operator shape does not match factor '" + factor_id +
                         "' dimension " + std::to_string(d));
  }
  const long stride = space.stride(pos);
  const long block = stride * d;
  const long total = space.total_dim();

  Vector out = Vector::Zero(total);
  for (long base = 0; base < total; base += block) {
    for (long rest = 0; rest < stride; ++rest) {
      for (int a = 0; a < d; ++a) {
        Complex acc = 0.0;
        for (int b = 0; b < d; ++b) {
          acc += op(a, b) * v.amplitudes()(base + b * stride + rest);
        }
        out(base + a * stride + rest) = acc;
      }
    }
  }
  return StateVector(space, std::move(out));
}

namespace detail {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace detail

}  // namespace collapse
