#include "catsim/fock.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include <nlohmann/json.hpp>

namespace catsim {

void Cutoff::validate() const {
  if (n_max < 1) throw std::invalid_argument("Cutoff: n_max must be >= 1");
  if (!(leakage_bound > 0)) throw std::invalid_argument("Cutoff: leakage bound must be positive");
}

namespace {

int pow_dim(int dim, int modes) { return modes == 1 ? dim : dim * dim; }

void require_same_basis(const Cutoff& a, const Cutoff& b, const char* op) {
  if (!same_basis(a, b)) {
    throw std::invalid_argument(std::string(op) + ": cutoff mismatch (n_max " +
                                std::to_string(a.n_max) + " vs " + std::to_string(b.n_max) + ")");
  }
}

}  // namespace

FockVector FockVector::zero(int modes, Cutoff cutoff) {
  cutoff.validate();
  if (modes != 1 && modes != 2) throw std::invalid_argument("FockVector: modes must be 1 or 2");
  return FockVector(CVec::Zero(pow_dim(cutoff.dim(), modes)), modes, cutoff);
}

FockVector FockVector::basis(int n, Cutoff cutoff) {
  cutoff.validate();
  if (n < 0 || n > cutoff.n_max) throw std::invalid_argument("FockVector::basis: index out of range");
  CVec amp = CVec::Zero(cutoff.dim());
  amp[n] = 1.0;
  return FockVector(std::move(amp), 1, cutoff);
}

FockVector FockVector::basis(int n_signal, int n_idler, Cutoff cutoff) {
  cutoff.validate();
  const int d = cutoff.dim();
  if (n_signal < 0 || n_signal > cutoff.n_max || n_idler < 0 || n_idler > cutoff.n_max)
    throw std::invalid_argument("FockVector::basis: index out of range");
  CVec amp = CVec::Zero(d * d);
  amp[n_signal * d + n_idler] = 1.0;
  return FockVector(std::move(amp), 2, cutoff);
}

FockVector FockVector::from_amplitudes(CVec amplitudes, int modes, Cutoff cutoff) {
  cutoff.validate();
  if (modes != 1 && modes != 2) throw std::invalid_argument("FockVector: modes must be 1 or 2");
  if (amplitudes.size() != pow_dim(cutoff.dim(), modes))
    throw std::invalid_argument("FockVector: amplitude length does not match cutoff/modes");
  return FockVector(std::move(amplitudes), modes, cutoff);
}

Complex FockVector::amplitude(int n) const {
  if (modes_ != 1) throw std::invalid_argument("FockVector::amplitude(n): not a single-mode state");
  return amplitudes_[n];
}

Complex FockVector::amplitude(int n_signal, int n_idler) const {
  if (modes_ != 2) throw std::invalid_argument("FockVector::amplitude(s,i): not a two-mode state");
  return amplitudes_[n_signal * cutoff_.dim() + n_idler];
}

FockVector FockVector::normalized() const {
  const double n = norm();
  if (n < 1e-300) throw std::invalid_argument("FockVector::normalized: zero vector");
  return FockVector(amplitudes_ / n, modes_, cutoff_);
}

std::vector<double> FockVector::mode_populations(ModeIndex mode) const {
  const int d = cutoff_.dim();
  std::vector<double> pops(d, 0.0);
  if (modes_ == 1) {
    for (int n = 0; n < d; ++n) pops[n] = std::norm(amplitudes_[n]);
    return pops;
  }
  for (int s = 0; s < d; ++s)
    for (int i = 0; i < d; ++i) {
      const double w = std::norm(amplitudes_[s * d + i]);
      pops[mode == ModeIndex::signal ? s : i] += w;
    }
  return pops;
}

void FockVector::check_leakage(int suggested_n_max) const {
  const double bound = cutoff_.leakage_bound;
  for (int m = 0; m < modes_; ++m) {
    const auto pops = mode_populations(m == 0 ? ModeIndex::signal : ModeIndex::idler);
    const int top = cutoff_.n_max;
    const double leak = std::max(pops[top], top >= 1 ? pops[top - 1] : 0.0);
    if (leak > bound) {
      throw CutoffTooSmall("cutoff too small: population " + std::to_string(leak) +
                               " near index " + std::to_string(top) + " exceeds leakage bound " +
                               std::to_string(bound) +
                               (suggested_n_max > 0
                                    ? "; suggested n_max >= " + std::to_string(suggested_n_max)
                                    : ""),
                           suggested_n_max);
    }
  }
}

DensityOperator DensityOperator::from_pure(const FockVector& psi) {
  const CVec& a = psi.amplitudes();
  CMat m = a * a.adjoint();
  return DensityOperator(std::move(m), psi.modes(), psi.cutoff());
}

DensityOperator DensityOperator::from_matrix(CMat matrix, int modes, Cutoff cutoff) {
  cutoff.validate();
  if (modes != 1 && modes != 2) throw std::invalid_argument("DensityOperator: modes must be 1 or 2");
  if (matrix.rows() != matrix.cols() || matrix.rows() != pow_dim(cutoff.dim(), modes))
    throw std::invalid_argument("DensityOperator: matrix shape does not match cutoff/modes");
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermiticityTolerance)
    throw std::invalid_argument("DensityOperator: not Hermitian (deviation " + std::to_string(herm) + ")");
  const double tr = matrix.trace().real();
  if (std::abs(tr - 1.0) > kNormTolerance)
    throw std::invalid_argument("DensityOperator: trace deviates from 1 by " + std::to_string(tr - 1.0));
  return DensityOperator(std::move(matrix), modes, cutoff);
}

std::vector<double> DensityOperator::diagonal() const {
  std::vector<double> d(dim());
  for (int i = 0; i < dim(); ++i) d[i] = matrix_(i, i).real();
  return d;
}

double DensityOperator::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMat> es(matrix_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void DensityOperator::validate(double eigenvalue_floor) const {
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermiticityTolerance)
    throw std::runtime_error("DensityOperator: Hermiticity violated: " + std::to_string(herm));
  if (std::abs(trace_real() - 1.0) > kNormTolerance)
    throw std::runtime_error("DensityOperator: trace violated: " + std::to_string(trace_real()));
  const double lo = min_eigenvalue();
  if (lo < eigenvalue_floor)
    throw std::runtime_error("DensityOperator: eigenvalue " + std::to_string(lo) + " below floor");
}

std::string DensityOperator::to_json() const {
  nlohmann::json j;
  j["cutoff"] = cutoff_.n_max;
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < dim(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < dim(); ++c)
      row.push_back({matrix_(r, c).real(), matrix_(r, c).imag()});
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j.dump();
}

DensityOperator DensityOperator::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("cutoff") || !j.contains("matrix"))
    throw std::invalid_argument("DensityOperator JSON: missing cutoff or matrix");
  const int n_max = j.at("cutoff").get<int>();
  Cutoff cutoff{n_max};
  cutoff.validate();
  const auto& rows = j.at("matrix");
  const int size = static_cast<int>(rows.size());
  int modes = 0;
  if (size == cutoff.dim()) modes = 1;
  else if (size == cutoff.dim() * cutoff.dim()) modes = 2;
  else throw std::invalid_argument("DensityOperator JSON: matrix size matches neither 1 nor 2 modes");
  CMat m(size, size);
  for (int r = 0; r < size; ++r) {
    const auto& row = rows.at(r);
    if (static_cast<int>(row.size()) != size)
      throw std::invalid_argument("DensityOperator JSON: ragged matrix");
    for (int c = 0; c < size; ++c) {
      const auto& e = row.at(c);
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return from_matrix(std::move(m), modes, cutoff);
}

LadderMatrices ladder_matrices(Cutoff cutoff) {
  cutoff.validate();
  const int d = cutoff.dim();
  LadderMatrices out{RMat::Zero(d, d), RMat::Zero(d, d), RMat::Zero(d, d)};
  for (int m = 1; m <= cutoff.n_max; ++m) {
    out.lowering(m - 1, m) = std::sqrt(static_cast<double>(m));
    out.raising(m, m - 1) = std::sqrt(static_cast<double>(m));
  }
  for (int n = 0; n < d; ++n) out.number(n, n) = n;
  return out;
}

FockVector tensor(const FockVector& signal, const FockVector& idler) {
  if (signal.modes() != 1 || idler.modes() != 1)
    throw std::invalid_argument("tensor: operands must be single-mode");
  require_same_basis(signal.cutoff(), idler.cutoff(), "tensor");
  const int d = signal.cutoff().dim();
  CVec joint(d * d);
  for (int s = 0; s < d; ++s)
    for (int i = 0; i < d; ++i)
      joint[s * d + i] = signal.amplitudes()[s] * idler.amplitudes()[i];
  return FockVector::from_amplitudes(std::move(joint), 2, signal.cutoff());
}

DensityOperator tensor(const DensityOperator& signal, const DensityOperator& idler) {
  if (signal.modes() != 1 || idler.modes() != 1)
    throw std::invalid_argument("tensor: operands must be single-mode");
  require_same_basis(signal.cutoff(), idler.cutoff(), "tensor");
  const int d = signal.cutoff().dim();
  CMat joint(d * d, d * d);
  for (int s = 0; s < d; ++s)
    for (int sp = 0; sp < d; ++sp)
      for (int i = 0; i < d; ++i)
        for (int ip = 0; ip < d; ++ip)
          joint(s * d + i, sp * d + ip) = signal.matrix()(s, sp) * idler.matrix()(i, ip);
  return DensityOperator::from_matrix(std::move(joint), 2, signal.cutoff());
}

Conditioned condition_on_fock(const FockVector& joint, ModeIndex mode, int n) {
  if (joint.modes() != 2) throw std::invalid_argument("condition_on_fock: need a two-mode state");
  if (n < 0 || n > joint.cutoff().n_max)
    throw std::invalid_argument("condition_on_fock: outcome index out of range");
  const int d = joint.cutoff().dim();
  CVec rest(d);
  for (int k = 0; k < d; ++k)
    rest[k] = mode == ModeIndex::idler ? joint.amplitudes()[k * d + n]
                                       : joint.amplitudes()[n * d + k];
  const double p = rest.squaredNorm();
  if (p < 1e-300)
    throw ImpossibleOutcome("condition_on_fock: outcome n=" + std::to_string(n) +
                            " has zero probability (impossible outcome)");
  rest /= std::sqrt(p);
  return {FockVector::from_amplitudes(std::move(rest), 1, joint.cutoff()), p};
}

namespace {

void require_normalized(double norm, const char* what) {
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument(std::string(what) + ": input not normalized (norm " +
                                std::to_string(norm) + ")");
}

}  // namespace

double fidelity(const FockVector& a, const FockVector& b) {
  require_same_basis(a.cutoff(), b.cutoff(), "fidelity");
  if (a.modes() != b.modes()) throw std::invalid_argument("fidelity: mode count mismatch");
  require_normalized(a.norm(), "fidelity");
  require_normalized(b.norm(), "fidelity");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double fidelity(const DensityOperator& rho, const FockVector& target) {
  require_same_basis(rho.cutoff(), target.cutoff(), "fidelity");
  if (rho.modes() != target.modes()) throw std::invalid_argument("fidelity: mode count mismatch");
  require_normalized(rho.trace_real(), "fidelity");
  require_normalized(target.norm(), "fidelity");
  const Complex v = target.amplitudes().dot(rho.matrix() * target.amplitudes());
  return std::max(0.0, v.real());
}

double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  require_same_basis(rho.cutoff(), sigma.cutoff(), "uhlmann_fidelity");
  if (rho.modes() != sigma.modes())
    throw std::invalid_argument("uhlmann_fidelity: mode count mismatch");
  require_normalized(rho.trace_real(), "uhlmann_fidelity");
  require_normalized(sigma.trace_real(), "uhlmann_fidelity");
  Eigen::SelfAdjointEigenSolver<CMat> es(rho.matrix());
  const CVec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<Complex>();
  const CMat sqrt_rho = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
  CMat inner = sqrt_rho * sigma.matrix() * sqrt_rho;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es2(inner, Eigen::EigenvaluesOnly);
  const double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::min(1.0, tr * tr);
}

DensityOperator partial_trace(const DensityOperator& joint, ModeIndex keep) {
  if (joint.modes() != 2) throw std::invalid_argument("partial_trace: need a two-mode operator");
  const int d = joint.cutoff().dim();
  CMat out = CMat::Zero(d, d);
  const CMat& m = joint.matrix();
  if (keep == ModeIndex::signal) {
    for (int s = 0; s < d; ++s)
      for (int sp = 0; sp < d; ++sp) {
        Complex acc = 0.0;
        for (int i = 0; i < d; ++i) acc += m(s * d + i, sp * d + i);
        out(s, sp) = acc;
      }
  } else {
    for (int i = 0; i < d; ++i)
      for (int ip = 0; ip < d; ++ip) {
        Complex acc = 0.0;
        for (int s = 0; s < d; ++s) acc += m(s * d + i, s * d + ip);
        out(i, ip) = acc;
      }
  }
  // symmetrize away roundoff before the constructor's Hermiticity check
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator::from_matrix(std::move(out), 1, joint.cutoff());
}

namespace detail {

CMat diagonal_povm_condition(const CMat& rho2, int dim, ModeIndex mode,
                             const RVec& weights, double* probability) {
  CMat out = CMat::Zero(dim, dim);
  if (mode == ModeIndex::idler) {
    for (int s = 0; s < dim; ++s)
      for (int sp = 0; sp < dim; ++sp) {
        Complex acc = 0.0;
        for (int n = 0; n < dim; ++n) acc += weights[n] * rho2(s * dim + n, sp * dim + n);
        out(s, sp) = acc;
      }
  } else {
    for (int i = 0; i < dim; ++i)
      for (int ip = 0; ip < dim; ++ip) {
        Complex acc = 0.0;
        for (int n = 0; n < dim; ++n) acc += weights[n] * rho2(n * dim + i, n * dim + ip);
        out(i, ip) = acc;
      }
  }
  if (probability) *probability = out.trace().real();
  return out;
}

}  // namespace detail

}  // namespace catsim
