#pragma once

// The synthesis protocol: mix the two modes of a TMSV with a small
// asymmetry epsilon, detect n photons in the idler output, and deliver the
// heralded signal state, under ideal (photon-number resolving) or realistic
// (on-off coincidence) detector models.
//
// Loss ordering mirrors the physical chain: eta_opo on both modes before
// mixing, eta_herald on the idler after mixing, eta_det on the signal last
// (applied separately by output_loss).

#include <string>

#include "catsim/fock.hpp"
#include "catsim/gaussian.hpp"

namespace catsim {

/// Mixing strength: epsilon = sin(2 theta) for half-wave-plate angle theta,
/// r = sqrt((1+epsilon)/2) the equivalent beamsplitter asymmetry.
class MixingParam {
 public:
  MixingParam() = default;

  static MixingParam from_theta_deg(double theta_deg);
  static MixingParam from_epsilon(double epsilon);

  double theta_deg() const;
  double epsilon() const { return epsilon_; }
  double r() const { return std::sqrt((1.0 + epsilon_) / 2.0); }

 private:
  explicit MixingParam(double epsilon) : epsilon_(epsilon) {}
  double epsilon_ = 0.0;
};

enum class DetectorModel { pnr, coincidence_onoff };

struct HeraldScenario {
  SqueezeParam squeeze;  // supplies lambda
  MixingParam mixing;
  int n_herald = 2;
  DetectorModel detector = DetectorModel::pnr;
  LossBudget losses;
  Cutoff cutoff{12};
  double bs_phase = 0.0;         // pi flips the |n-2>/|n> relative sign
  double dark_click_prob = 0.0;  // per heralding arm, coincidence model only

  void validate() const;
  std::string to_json() const;
  static HeraldScenario from_json(const std::string& text);
};

struct HeraldOutcome {
  DensityOperator state;
  double herald_probability = 0.0;
};

struct CoreState {
  FockVector state;
  bool degenerate = false;  // n in {0,1}: the |n-2> branch vanished
};

/// Closed-form heralded state
///   (eps sqrt(n(n-1)) |n-2> + lambda |n>) / sqrt(n(n-1) eps^2 + lambda^2),
/// the lambda -> 0 limit of the pipeline.
CoreState core_state(int n, double epsilon, double lambda, Cutoff cutoff);

/// Full pipeline with a photon-number resolving detector on the idler.
HeraldOutcome herald_pnr(const HeraldScenario& scenario);

/// Idler split on a balanced beamsplitter with an on-off detector per arm;
/// the herald is a coincidence click. Valid for n_herald = 2.
HeraldOutcome herald_coincidence(const HeraldScenario& scenario);

/// Detection-loss view of a heralded state: include_detection applies
/// eta_det to the signal (the "uncorrected" view); otherwise the state is
/// returned as seen by a perfect detector (the "corrected" view).
DensityOperator output_loss(const HeraldOutcome& outcome, const LossBudget& losses,
                            bool include_detection);

namespace detail {
/// Diagonal of the single-mode idler POVM for a coincidence click behind a
/// balanced splitter, with loss eta applied before splitting and an optional
/// dark-click probability per arm.
RVec coincidence_povm_diagonal(Cutoff cutoff, double eta_herald, double dark_click_prob);
/// Same POVM built explicitly from the two-arm construction (test oracle).
RVec coincidence_povm_diagonal_constructed(Cutoff cutoff, double eta_herald,
                                           double dark_click_prob);
/// The mixed two-mode state just before idler detection (pure fast path
/// kept as a density operator for uniformity).
DensityOperator premeasurement_state(const HeraldScenario& scenario);
}  // namespace detail

}  // namespace catsim
