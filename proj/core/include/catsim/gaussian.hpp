#pragma once

// Gaussian resources and channels: coherent states, squeezers, two-mode
// squeezed vacuum, beamsplitters, pure loss and Gaussian phase dither.
//
// Squeezing bookkeeping: s = e^{-2 xi}, lambda = tanh(xi),
// dB = -10 log10(s); "4 dB" means the squeezed x quadrature has variance
// 0.5 * 10^{-0.4} under x = (a + a^dag)/sqrt(2).

#include <vector>

#include "catsim/fock.hpp"

namespace catsim {

/// Squeezing strength in its four equivalent parameterizations,
/// constructible from any single one.
class SqueezeParam {
 public:
  SqueezeParam() = default;

  static SqueezeParam from_xi(double xi);
  static SqueezeParam from_lambda(double lambda);
  static SqueezeParam from_s(double s);
  static SqueezeParam from_db(double db);

  double xi() const { return xi_; }
  double lambda() const { return std::tanh(xi_); }
  double s() const { return std::exp(-2.0 * xi_); }
  double db() const { return 20.0 * xi_ / std::log(10.0); }

 private:
  explicit SqueezeParam(double xi) : xi_(xi) {}
  double xi_ = 0.0;
};

struct LossBudget {
  double eta_opo = 1.0;     // per-photon escape efficiency, both modes, pre-mixing
  double eta_det = 1.0;     // homodyne detection efficiency, signal, last
  double eta_herald = 1.0;  // heralding-path efficiency, idler, post-mixing
  void validate() const;
};

/// |alpha> truncated and renormalized; mean photon number |alpha|^2.
FockVector coherent(Complex alpha, Cutoff cutoff);

/// Single-mode squeezer exp[(xi/2)(e^{-i phase} a^2 - e^{i phase} a^dag^2)],
/// built at a padded cutoff and cropped. phase=0 squeezes x, phase=pi squeezes p.
CMat squeeze_unitary(const SqueezeParam& param, double phase, Cutoff cutoff);

/// sqrt(1-lambda^2) sum_n lambda^n |n,n>, truncated and renormalized.
FockVector two_mode_squeezed_vacuum(double lambda, Cutoff cutoff);

/// Two-mode mixer exp[theta (e^{i phase} a^dag b - e^{-i phase} a b^dag)]
/// with t = cos(theta) the transmittance amplitude (a = signal, b = idler).
/// Built exactly per total-photon-number sector; entries are free of
/// truncation error and sectors with N <= n_max are exactly unitary.
CMat beamsplitter_unitary(double transmittance_amplitude, double phase, Cutoff cutoff);

/// Pure-loss (generalized Bernoulli) channel, Kraus realization.
DensityOperator loss_channel(const DensityOperator& rho, double eta);

/// Same channel realized by an ancilla beamsplitter plus partial trace;
/// agrees with the Kraus route to numerical precision.
DensityOperator loss_channel_via_ancilla(const DensityOperator& rho, double eta);

/// Loss on one mode of a two-mode operator.
DensityOperator loss_channel_on_mode(const DensityOperator& rho, ModeIndex mode, double eta);

/// Kraus operators A_k of the pure-loss channel, A_k |j> =
/// sqrt(C(j,k) eta^{j-k} (1-eta)^k) |j-k>.
std::vector<RMat> loss_kraus(double eta, Cutoff cutoff);

/// Gaussian-averaged phase rotation: rho_{mn} *= exp(-sigma^2 (m-n)^2 / 2).
DensityOperator dephase_channel(const DensityOperator& rho, double sigma_phi);

/// U rho U^dag, re-symmetrized against roundoff.
DensityOperator apply_unitary(const DensityOperator& rho, const CMat& u);
FockVector apply_unitary(const FockVector& psi, const CMat& u);

namespace detail {
/// Dense squeezer at an explicit dimension, no cropping or leakage checks.
CMat squeeze_unitary_dense(double xi, double phase, int dim);
/// Squeezed-vacuum number population P(n) (exact, untruncated); zero for odd n.
double squeezed_vacuum_population(double xi, int n);
/// Smallest n_max whose top-two squeezed-vacuum populations are below bound.
int suggest_cutoff_squeezed_vacuum(double xi, double bound);
}  // namespace detail

}  // namespace catsim
