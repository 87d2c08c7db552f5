#pragma once

// Squeezed coherent-state-superposition targets and fidelity optimization
// over size |alpha|^2 and squeezing dB.

#include <string>
#include <vector>

#include "catsim/fock.hpp"
#include "catsim/gaussian.hpp"
#include "catsim/herald.hpp"

namespace catsim {

enum class Parity { even, odd };

/// Orientation of the target's squeezing axis relative to the cat axis
/// (the line through the two coherent components, i.e. the axis of alpha).
enum class SqueezeAxis { x, p };

struct CssTarget {
  Complex alpha;             // coherent amplitude, size = |alpha|^2
  double squeeze_db = 0.0;   // squeezing of the squeezed quadrature in dB
  Parity parity = Parity::even;
  SqueezeAxis axis = SqueezeAxis::x;  // x: squeeze along the cat axis
};

/// Normalized S(xi') (|alpha> +/- |-alpha>), squeezing applied after the
/// superposition, built at a padded cutoff and cropped. Throws
/// CutoffTooSmall when the cropped state exceeds the leakage bound.
FockVector squeezed_css(const CssTarget& target, Cutoff cutoff);

struct GridSpec {
  double alpha_sq_min = 0.2, alpha_sq_max = 6.0, alpha_sq_step = 0.05;
  double db_min = 0.0, db_max = 8.0, db_step = 0.1;
  SqueezeAxis axis = SqueezeAxis::x;

  std::vector<double> alpha_sq_grid() const;
  std::vector<double> db_grid() const;
  void validate() const;
};

struct LandscapePoint {
  double alpha_sq = 0.0;
  double db = 0.0;
  double fidelity = 0.0;
};

class FidelityLandscape {
 public:
  FidelityLandscape() = default;
  FidelityLandscape(std::vector<double> alpha_sq_grid, std::vector<double> db_grid);

  const std::vector<double>& alpha_sq_grid() const { return alpha_sq_; }
  const std::vector<double>& db_grid() const { return db_; }
  const RMat& values() const { return values_; }
  RMat& values() { return values_; }

  /// Raw grid argmax under the tie-break rule: first smallest |alpha|^2,
  /// then smallest dB.
  LandscapePoint grid_argmax() const;
  /// Refined (off-grid) argmax; falls back to the grid argmax until set.
  LandscapePoint argmax() const { return refined_set_ ? refined_ : grid_argmax(); }
  void set_refined_argmax(const LandscapePoint& p);

  /// CSV with header alpha_sq,db,fidelity, row-major over the grid.
  std::string to_csv() const;
  static FidelityLandscape from_csv(const std::string& text);
  /// JSON sidecar: grid spec, raw and refined argmax.
  std::string sidecar_json() const;

 private:
  std::vector<double> alpha_sq_, db_;
  RMat values_;
  LandscapePoint refined_{};
  bool refined_set_ = false;
};

/// Landscape of <target|rho|target> over the grid, with golden-section
/// refinement of the argmax (tolerance 1e-4 in F). Grid cells are
/// independent; `workers` threads split the rows with bit-identical results.
FidelityLandscape best_fit_css(const DensityOperator& state, Parity parity,
                               const GridSpec& grid = {}, int workers = 1);
FidelityLandscape best_fit_css(const FockVector& state, Parity parity,
                               const GridSpec& grid = {}, int workers = 1);

struct RatioPoint {
  double ratio = 0.0;          // epsilon / lambda
  double fidelity_star = 0.0;  // optimized fidelity
  double alpha_sq_star = 0.0;
  double db_star = 0.0;
  double weight_low = 0.0;     // |n-2> component weight of the core state
  double weight_high = 0.0;    // |n> component weight
};

/// Fidelity of the closed-form core state with the best-fit squeezed CSS as
/// a function of epsilon/lambda. Parity follows n (even cat for even n).
std::vector<RatioPoint> protocol_fidelity_curve(int n, const std::vector<double>& ratio_grid,
                                                double lambda, Cutoff cutoff,
                                                const GridSpec& grid = {});

/// Chooses lambda so the lossless protocol's refined best-fit size equals
/// target_alpha_sq for the given mixing. Monotone bisection on lambda.
double infer_lambda_for_size(int n, double epsilon, double target_alpha_sq, Cutoff cutoff,
                             const GridSpec& grid = {});

namespace detail {
/// Target constructor used by the landscape: built at a padded cutoff,
/// cropped and renormalized, no leakage guard. The cropped mass is
/// negligible except at extreme grid corners, where it only biases the
/// landscape by the cropped tail.
FockVector squeezed_css_relaxed(const CssTarget& target, Cutoff cutoff);
}  // namespace detail

}  // namespace catsim
