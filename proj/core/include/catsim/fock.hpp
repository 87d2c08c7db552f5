#pragma once

// Truncated number-basis states and operators, and the handful of exact
// operations (tensor, conditioning, fidelity, partial trace) everything
// else is built from.
//
// Conventions, fixed project-wide:
//   - basis per mode: |0>..|n_max>, dimension n_max+1
//   - two-mode flattening is signal-major: joint index = s*(n_max+1) + i
//   - quadratures: x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)),
//     [x,p] = i, vacuum variance 1/2

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace catsim {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kDefaultLeakageBound = 1e-8;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-9;

/// Raised when a state cannot be represented at the requested cutoff
/// without exceeding its leakage bound. `suggested_n_max` is the smallest
/// cutoff known to work, or -1 when no analytic estimate is available.
class CutoffTooSmall : public std::runtime_error {
 public:
  CutoffTooSmall(const std::string& what, int suggested)
      : std::runtime_error(what), suggested_n_max(suggested) {}
  int suggested_n_max;
};

/// Raised when conditioning on an outcome whose probability is numerically zero.
class ImpossibleOutcome : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Basis truncation: highest retained Fock index per mode, plus the
/// leakage bound enforced on constructed physical states.
struct Cutoff {
  int n_max = 1;
  double leakage_bound = kDefaultLeakageBound;

  int dim() const { return n_max + 1; }
  void validate() const;
};

/// True when both cutoffs describe the same basis (leakage policy is not
/// part of the basis identity).
inline bool same_basis(const Cutoff& a, const Cutoff& b) { return a.n_max == b.n_max; }

enum class ModeIndex { signal = 0, idler = 1 };

class FockVector {
 public:
  FockVector() = default;

  static FockVector zero(int modes, Cutoff cutoff);
  /// Single-mode basis state |n>.
  static FockVector basis(int n, Cutoff cutoff);
  /// Two-mode basis state |n_signal, n_idler>.
  static FockVector basis(int n_signal, int n_idler, Cutoff cutoff);
  /// Wraps raw amplitudes; length must be dim^modes.
  static FockVector from_amplitudes(CVec amplitudes, int modes, Cutoff cutoff);

  int modes() const { return modes_; }
  const Cutoff& cutoff() const { return cutoff_; }
  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const CVec& amplitudes() const { return amplitudes_; }

  Complex amplitude(int n) const;
  Complex amplitude(int n_signal, int n_idler) const;

  double norm() const { return amplitudes_.norm(); }
  FockVector normalized() const;

  /// Number distribution of one mode (marginal for two-mode states).
  std::vector<double> mode_populations(ModeIndex mode) const;

  /// Throws CutoffTooSmall when the top of any mode's marginal exceeds the
  /// leakage bound. Checks the top two indices so parity-constrained states
  /// cannot slip through on an empty top slot.
  void check_leakage(int suggested_n_max = -1) const;

 private:
  FockVector(CVec amplitudes, int modes, Cutoff cutoff)
      : amplitudes_(std::move(amplitudes)), modes_(modes), cutoff_(cutoff) {}

  CVec amplitudes_;
  int modes_ = 1;
  Cutoff cutoff_{};
};

class DensityOperator {
 public:
  DensityOperator() = default;

  static DensityOperator from_pure(const FockVector& psi);
  /// Wraps a matrix after checking Hermiticity (1e-10) and unit trace (1e-10).
  static DensityOperator from_matrix(CMat matrix, int modes, Cutoff cutoff);

  int modes() const { return modes_; }
  const Cutoff& cutoff() const { return cutoff_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  const CMat& matrix() const { return matrix_; }

  double trace_real() const { return matrix_.trace().real(); }
  std::vector<double> diagonal() const;
  double min_eigenvalue() const;

  /// Full validity check including the PSD floor; O(dim^3).
  void validate(double eigenvalue_floor = kEigenvalueFloor) const;

  std::string to_json() const;
  static DensityOperator from_json(const std::string& text);

 private:
  DensityOperator(CMat matrix, int modes, Cutoff cutoff)
      : matrix_(std::move(matrix)), modes_(modes), cutoff_(cutoff) {}

  CMat matrix_;
  int modes_ = 1;
  Cutoff cutoff_{};
};

struct LadderMatrices {
  RMat lowering;  // a: lowering[m-1][m] = sqrt(m)
  RMat raising;   // a^dag
  RMat number;    // diag(0..n_max)
};

LadderMatrices ladder_matrices(Cutoff cutoff);

/// Kronecker composition, first argument = signal (major index).
FockVector tensor(const FockVector& signal, const FockVector& idler);
DensityOperator tensor(const DensityOperator& signal, const DensityOperator& idler);

struct Conditioned {
  FockVector state;    // normalized single-mode remainder
  double probability;  // squared norm before normalization
};

/// Projects one mode of a two-mode pure state onto |n> and normalizes the rest.
Conditioned condition_on_fock(const FockVector& joint, ModeIndex mode, int n);

/// |<a|b>|^2 for pure states, <target|rho|target> for mixed inputs.
/// Rejects inputs whose norm/trace deviates from 1 by more than 1e-8.
double fidelity(const FockVector& a, const FockVector& b);
double fidelity(const DensityOperator& rho, const FockVector& target);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 between two mixed
/// states; reduces to the overlap forms above on pure inputs.
double uhlmann_fidelity(const DensityOperator& rho, const DensityOperator& sigma);

DensityOperator partial_trace(const DensityOperator& joint, ModeIndex keep);

namespace detail {
/// Condition a two-mode density operator with a diagonal POVM on one mode:
/// rho_kept = sum_n w_n <n|rho|n> (partial sandwich), probability = trace.
/// Returns unnormalized matrix; caller normalizes.
CMat diagonal_povm_condition(const CMat& rho2, int dim, ModeIndex mode,
                             const RVec& weights, double* probability);
}  // namespace detail

}  // namespace catsim
