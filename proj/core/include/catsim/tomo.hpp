#pragma once

// Phase-space and measurement layer: Wigner functions on the unit-integral
// convention (vacuum peak 1/pi), homodyne quadrature statistics and
// deterministic sampling, and iterative R*rho*R maximum-likelihood
// reconstruction with efficiency-aware POVMs.

#include <cstdint>
#include <string>
#include <vector>

#include "catsim/fock.hpp"
#include "catsim/gaussian.hpp"

namespace catsim {

struct WignerAxes {
  double x_min = -5.0, x_max = 5.0;
  int x_steps = 201;
  double p_min = -5.0, p_max = 5.0;
  int p_steps = 201;
  void validate() const;
};

class WignerGrid {
 public:
  WignerGrid() = default;
  WignerGrid(std::vector<double> x_axis, std::vector<double> p_axis);

  const std::vector<double>& x_axis() const { return x_; }
  const std::vector<double>& p_axis() const { return p_; }
  const RMat& values() const { return values_; }  // values(ix, ip)
  RMat& values() { return values_; }

  double min_value() const;
  /// (x, p) of the most negative grid point.
  std::pair<double, double> min_location() const;
  /// Riemann sum * dx * dp; 1 +- 1e-3 when the state fits the grid.
  double integral() const;

  /// CSV with header x,p,w, row-major (x outer).
  std::string to_csv() const;
  static WignerGrid from_csv(const std::string& text);
  std::string sidecar_json() const;

 private:
  std::vector<double> x_, p_;
  RMat values_;
};

/// W(x,p) from the Fock-basis displaced-parity kernel. Errors out when more
/// than 1e-4 of either quadrature marginal lies outside the grid.
WignerGrid wigner(const DensityOperator& rho, const WignerAxes& axes);

/// p(x | phi) = sum_mn rho_mn psi_m(x) psi_n(x) e^{i(n-m) phi}.
RVec quadrature_pdf(const DensityOperator& rho, double phase, const std::vector<double>& xs);

struct QuadratureSample {
  double phase = 0.0;  // in [0, pi)
  double value = 0.0;  // measured x_phi
};

/// Inverse-CDF homodyne sampling, round-robin over the phases, one
/// deterministic RNG stream per phase (identical seed => identical stream).
std::vector<QuadratureSample> sample_homodyne(const DensityOperator& rho,
                                              const std::vector<double>& phases, int n_samples,
                                              std::uint64_t seed);

std::string samples_to_csv(const std::vector<QuadratureSample>& samples);
std::vector<QuadratureSample> samples_from_csv(const std::string& text);

struct MleConfig {
  Cutoff cutoff{10};
  double eta = 1.0;            // detection efficiency absorbed into the POVM
  int phase_bins = 12;         // expected number of distinct phases
  double quad_bin_width = 0.1;
  double quad_range = 6.0;     // bins cover [-quad_range, quad_range]
  int max_iters = 2000;
  double tol = 1e-6;           // max diagonal change per iteration
  void validate() const;
};

struct MleResult {
  DensityOperator rho;
  bool converged = false;
  int iterations = 0;
  std::vector<double> log_likelihood;  // one entry per iteration
  long dropped_samples = 0;            // outside the binned range
};

/// Iterative R*rho*R expectation-maximization over binned quadrature POVMs.
/// With eta < 1 each projector is smeared by the adjoint loss map, so the
/// result estimates the pre-detection state. Non-convergence inside
/// max_iters is reported through the flag, not an exception.
MleResult mle_reconstruct(const std::vector<QuadratureSample>& samples, const MleConfig& config);

namespace detail {
/// Orthonormal Hermite functions psi_0..psi_{n_max} at x (vacuum variance 1/2).
RVec hermite_functions(int n_max, double x);
}  // namespace detail

}  // namespace catsim
