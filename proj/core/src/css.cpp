#include "catsim/css.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace catsim {

namespace {

constexpr int kTargetPad = 10;
constexpr double kRefineTolF = 1e-4;

std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  g.reserve(count);
  for (int i = 0; i < count; ++i) g.push_back(lo + i * step);
  return g;
}

FockVector build_target(const CssTarget& target, Cutoff cutoff, bool guard) {
  cutoff.validate();
  if (!(target.squeeze_db >= 0.0))
    throw std::invalid_argument("squeezed_css: squeeze_db must be >= 0");
  // relaxed mode disables every leakage guard, including the padded
  // constructors'; the cropped tail is the accepted truncation bias
  const Cutoff padded{cutoff.n_max + kTargetPad, guard ? cutoff.leakage_bound : 2.0};
  const FockVector plus = coherent(target.alpha, padded);
  const FockVector minus = coherent(-target.alpha, padded);
  const double sign = target.parity == Parity::even ? 1.0 : -1.0;
  CVec cat = plus.amplitudes() + sign * minus.amplitudes();
  const double cat_norm = cat.norm();
  if (cat_norm < 1e-150)
    throw std::invalid_argument("squeezed_css: superposition vanishes (odd cat at alpha = 0)");
  cat /= cat_norm;

  const double xi = SqueezeParam::from_db(target.squeeze_db).xi();
  const double axis_phase =
      (target.axis == SqueezeAxis::x ? 0.0 : std::numbers::pi) + 2.0 * std::arg(target.alpha);
  const CMat s = detail::squeeze_unitary_dense(xi, axis_phase, padded.dim());
  CVec squeezed = s * cat;

  CVec cropped = squeezed.head(cutoff.dim());
  cropped /= cropped.norm();
  FockVector out = FockVector::from_amplitudes(std::move(cropped), 1, cutoff);
  if (guard) out.check_leakage();
  return out;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, double* best_x) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && (b - a) > 1e-6; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a); f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  *best_x = x;
  return fx;
}

using FidelityFn = std::function<double(const FockVector&)>;

FidelityLandscape run_landscape(const FidelityFn& fid, Parity parity, const GridSpec& grid,
                                Cutoff cutoff, int workers) {
  grid.validate();
  FidelityLandscape land(grid.alpha_sq_grid(), grid.db_grid());
  const auto& as = land.alpha_sq_grid();
  const auto& dbs = land.db_grid();
  const int rows = static_cast<int>(as.size());
  const int cols = static_cast<int>(dbs.size());

  auto eval = [&](double alpha_sq, double db) {
    CssTarget t{std::sqrt(alpha_sq), db, parity, grid.axis};
    return fid(detail::squeezed_css_relaxed(t, cutoff));
  };

  auto fill_rows = [&](int row_begin, int row_end) {
    for (int i = row_begin; i < row_end; ++i)
      for (int j = 0; j < cols; ++j) land.values()(i, j) = eval(as[i], dbs[j]);
  };

  const int n_threads = std::max(1, std::min(workers, rows));
  if (n_threads == 1) {
    fill_rows(0, rows);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    const int chunk = (rows + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        try {
          fill_rows(std::min(t * chunk, rows), std::min((t + 1) * chunk, rows));
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  // golden-section refinement around the tie-broken grid argmax
  const LandscapePoint raw = land.grid_argmax();
  int bi = 0, bj = 0;
  for (int i = 0; i < rows; ++i) if (as[i] == raw.alpha_sq) bi = i;
  for (int j = 0; j < cols; ++j) if (dbs[j] == raw.db) bj = j;
  double a_lo = as[std::max(0, bi - 1)], a_hi = as[std::min(rows - 1, bi + 1)];
  double d_lo = dbs[std::max(0, bj - 1)], d_hi = dbs[std::min(cols - 1, bj + 1)];

  double a_star = raw.alpha_sq, d_star = raw.db, f_star = raw.fidelity;
  for (int round = 0; round < 4; ++round) {
    const double f_before = f_star;
    double ax;
    const double fa = golden_max([&](double a) { return eval(a, d_star); }, a_lo, a_hi, &ax);
    if (fa > f_star) { f_star = fa; a_star = ax; }
    double dx;
    const double fd = golden_max([&](double d) { return eval(a_star, d); }, d_lo, d_hi, &dx);
    if (fd > f_star) { f_star = fd; d_star = dx; }
    if (f_star - f_before < kRefineTolF) break;
  }
  land.set_refined_argmax({a_star, d_star, std::max(f_star, raw.fidelity)});
  return land;
}

}  // namespace

FockVector squeezed_css(const CssTarget& target, Cutoff cutoff) {
  return build_target(target, cutoff, /*guard=*/true);
}

namespace detail {
FockVector squeezed_css_relaxed(const CssTarget& target, Cutoff cutoff) {
  return build_target(target, cutoff, /*guard=*/false);
}
}  // namespace detail

void GridSpec::validate() const {
  if (!(alpha_sq_step > 0) || !(db_step > 0))
    throw std::invalid_argument("GridSpec: steps must be positive");
  if (alpha_sq_max < alpha_sq_min || db_max < db_min)
    throw std::invalid_argument("GridSpec: empty range");
  if (!(alpha_sq_min > 0)) throw std::invalid_argument("GridSpec: alpha_sq_min must be > 0");
  if (!(db_min >= 0)) throw std::invalid_argument("GridSpec: db_min must be >= 0");
}

std::vector<double> GridSpec::alpha_sq_grid() const {
  return uniform_grid(alpha_sq_min, alpha_sq_max, alpha_sq_step);
}
std::vector<double> GridSpec::db_grid() const { return uniform_grid(db_min, db_max, db_step); }

FidelityLandscape::FidelityLandscape(std::vector<double> alpha_sq_grid, std::vector<double> db_grid)
    : alpha_sq_(std::move(alpha_sq_grid)), db_(std::move(db_grid)) {
  if (alpha_sq_.empty() || db_.empty())
    throw std::invalid_argument("FidelityLandscape: empty grid");
  values_ = RMat::Zero(alpha_sq_.size(), db_.size());
}

LandscapePoint FidelityLandscape::grid_argmax() const {
  int bi = 0, bj = 0;
  double best = values_(0, 0);
  for (int i = 0; i < values_.rows(); ++i)
    for (int j = 0; j < values_.cols(); ++j)
      if (values_(i, j) > best) { best = values_(i, j); bi = i; bj = j; }
  return {alpha_sq_[bi], db_[bj], best};
}

void FidelityLandscape::set_refined_argmax(const LandscapePoint& p) {
  refined_ = p;
  refined_set_ = true;
}

std::string FidelityLandscape::to_csv() const {
  std::ostringstream out;
  out << "alpha_sq,db,fidelity\n";
  char line[128];
  for (int i = 0; i < values_.rows(); ++i)
    for (int j = 0; j < values_.cols(); ++j) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", alpha_sq_[i], db_[j],
                    values_(i, j));
      out << line;
    }
  return out.str();
}

FidelityLandscape FidelityLandscape::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header != "alpha_sq,db,fidelity")
    throw std::invalid_argument("FidelityLandscape CSV: bad header");
  std::vector<double> as, dbs, vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double a, d, f;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &a, &d, &f) != 3)
      throw std::invalid_argument("FidelityLandscape CSV: bad row \"" + line + "\"");
    if (as.empty() || a != as.back()) as.push_back(a);
    if (as.size() == 1) dbs.push_back(d);
    vals.push_back(f);
  }
  if (vals.size() != as.size() * dbs.size())
    throw std::invalid_argument("FidelityLandscape CSV: not a full row-major grid");
  FidelityLandscape land(std::move(as), std::move(dbs));
  for (int i = 0, k = 0; i < land.values().rows(); ++i)
    for (int j = 0; j < land.values().cols(); ++j, ++k) land.values()(i, j) = vals[k];
  return land;
}

std::string FidelityLandscape::sidecar_json() const {
  nlohmann::json j;
  j["alpha_sq_grid"] = {{"min", alpha_sq_.front()},
                        {"max", alpha_sq_.back()},
                        {"count", alpha_sq_.size()}};
  j["db_grid"] = {{"min", db_.front()}, {"max", db_.back()}, {"count", db_.size()}};
  const auto raw = grid_argmax();
  j["grid_argmax"] = {{"alpha_sq", raw.alpha_sq}, {"db", raw.db}, {"fidelity", raw.fidelity}};
  const auto best = argmax();
  j["argmax"] = {{"alpha_sq", best.alpha_sq}, {"db", best.db}, {"fidelity", best.fidelity}};
  return j.dump(2);
}

FidelityLandscape best_fit_css(const DensityOperator& state, Parity parity, const GridSpec& grid,
                               int workers) {
  if (state.modes() != 1) throw std::invalid_argument("best_fit_css: single-mode state expected");
  return run_landscape([&](const FockVector& t) { return fidelity(state, t); }, parity, grid,
                       state.cutoff(), workers);
}

FidelityLandscape best_fit_css(const FockVector& state, Parity parity, const GridSpec& grid,
                               int workers) {
  if (state.modes() != 1) throw std::invalid_argument("best_fit_css: single-mode state expected");
  return run_landscape([&](const FockVector& t) { return fidelity(state, t); }, parity, grid,
                       state.cutoff(), workers);
}

std::vector<RatioPoint> protocol_fidelity_curve(int n, const std::vector<double>& ratio_grid,
                                                double lambda, Cutoff cutoff,
                                                const GridSpec& grid) {
  if (ratio_grid.empty()) throw std::invalid_argument("protocol_fidelity_curve: empty ratio grid");
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("protocol_fidelity_curve: lambda must lie in (0,1)");
  const Parity parity = n % 2 == 0 ? Parity::even : Parity::odd;
  std::vector<RatioPoint> curve;
  curve.reserve(ratio_grid.size());
  for (const double ratio : ratio_grid) {
    const double eps = ratio * lambda;
    const CoreState core = core_state(n, eps, lambda, cutoff);
    const auto land = best_fit_css(core.state, parity, grid);
    const auto best = land.argmax();
    const double low = static_cast<double>(n) * (n - 1) * eps * eps;
    const double denom = low + lambda * lambda;
    curve.push_back({ratio, best.fidelity, best.alpha_sq, best.db, low / denom,
                     lambda * lambda / denom});
  }
  return curve;
}

double infer_lambda_for_size(int n, double epsilon, double target_alpha_sq, Cutoff cutoff,
                             const GridSpec& grid) {
  const Parity parity = n % 2 == 0 ? Parity::even : Parity::odd;
  auto alpha_star = [&](double lambda) {
    const CoreState core = core_state(n, epsilon, lambda, cutoff);
    return best_fit_css(core.state, parity, grid).argmax().alpha_sq;
  };
  // alpha* grows with lambda (the |n> weight grows); bracket then bisect
  double lo = std::max(epsilon, 0.02), hi = lo;
  if (alpha_star(lo) > target_alpha_sq)
    throw std::invalid_argument("infer_lambda_for_size: target size below bracket");
  for (double l = lo; l < 0.95; l *= 1.4) {
    hi = l;
    if (alpha_star(l) > target_alpha_sq) break;
    lo = l;
  }
  if (alpha_star(hi) < target_alpha_sq)
    throw std::invalid_argument("infer_lambda_for_size: target size not reachable");
  for (int it = 0; it < 60 && hi - lo > 1e-5; ++it) {
    const double mid = 0.5 * (lo + hi);
    (alpha_star(mid) < target_alpha_sq ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace catsim
