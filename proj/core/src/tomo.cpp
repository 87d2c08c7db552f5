#include "catsim/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace catsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double lo, double hi, int steps) {
  std::vector<double> g(steps);
  for (int i = 0; i < steps; ++i)
    g[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  return g;
}

}  // namespace

namespace detail {

RVec hermite_functions(int n_max, double x) {
  RVec psi(n_max + 1);
  psi[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n < n_max; ++n)
    psi[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * psi[n] - std::sqrt(n / (n + 1.0)) * psi[n - 1];
  return psi;
}

}  // namespace detail

void WignerAxes::validate() const {
  if (x_steps < 2 || p_steps < 2) throw std::invalid_argument("WignerAxes: need >= 2 steps per axis");
  if (!(x_max > x_min) || !(p_max > p_min))
    throw std::invalid_argument("WignerAxes: empty range");
}

WignerGrid::WignerGrid(std::vector<double> x_axis, std::vector<double> p_axis)
    : x_(std::move(x_axis)), p_(std::move(p_axis)) {
  if (x_.size() < 2 || p_.size() < 2) throw std::invalid_argument("WignerGrid: axes too short");
  values_ = RMat::Zero(x_.size(), p_.size());
}

double WignerGrid::min_value() const { return values_.minCoeff(); }

std::pair<double, double> WignerGrid::min_location() const {
  Eigen::Index ix = 0, ip = 0;
  values_.minCoeff(&ix, &ip);
  return {x_[ix], p_[ip]};
}

double WignerGrid::integral() const {
  const double dx = x_[1] - x_[0];
  const double dp = p_[1] - p_[0];
  return values_.sum() * dx * dp;
}

std::string WignerGrid::to_csv() const {
  std::ostringstream out;
  out << "x,p,w\n";
  char line[128];
  for (int i = 0; i < values_.rows(); ++i)
    for (int j = 0; j < values_.cols(); ++j) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", x_[i], p_[j], values_(i, j));
      out << line;
    }
  return out.str();
}

WignerGrid WignerGrid::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header != "x,p,w")
    throw std::invalid_argument("WignerGrid CSV: bad header");
  std::vector<double> xs, ps, vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, p, w;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &x, &p, &w) != 3)
      throw std::invalid_argument("WignerGrid CSV: bad row \"" + line + "\"");
    if (xs.empty() || x != xs.back()) xs.push_back(x);
    if (xs.size() == 1) ps.push_back(p);
    vals.push_back(w);
  }
  if (vals.size() != xs.size() * ps.size())
    throw std::invalid_argument("WignerGrid CSV: not a full row-major grid");
  WignerGrid grid(std::move(xs), std::move(ps));
  for (int i = 0, k = 0; i < grid.values().rows(); ++i)
    for (int j = 0; j < grid.values().cols(); ++j, ++k) grid.values()(i, j) = vals[k];
  return grid;
}

std::string WignerGrid::sidecar_json() const {
  nlohmann::json j;
  j["x_axis"] = {{"min", x_.front()}, {"max", x_.back()}, {"count", x_.size()}};
  j["p_axis"] = {{"min", p_.front()}, {"max", p_.back()}, {"count", p_.size()}};
  const auto [mx, mp] = min_location();
  j["min"] = {{"value", min_value()}, {"x", mx}, {"p", mp}};
  j["integral"] = integral();
  return j.dump(2);
}

namespace {

// Mass of a quadrature marginal outside [lo, hi], by fine trapezoid inside
// an enlarged window.
double marginal_mass_outside(const DensityOperator& rho, double phase, double lo, double hi) {
  const double span = std::sqrt(2.0 * rho.cutoff().n_max + 1.0) + 5.0;
  const double wide = std::max({std::abs(lo), std::abs(hi), span});
  const int n = 2001;
  const auto xs = linspace(-wide, wide, n);
  const RVec pdf = quadrature_pdf(rho, phase, xs);
  const double dx = xs[1] - xs[0];
  double inside = 0.0, total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double seg = 0.5 * (pdf[i] + pdf[i + 1]) * dx;
    total += seg;
    const double mid = 0.5 * (xs[i] + xs[i + 1]);
    if (mid >= lo && mid <= hi) inside += seg;
  }
  return std::max(0.0, total - inside);
}

}  // namespace

WignerGrid wigner(const DensityOperator& rho, const WignerAxes& axes) {
  axes.validate();
  if (rho.modes() != 1) throw std::invalid_argument("wigner: single-mode state expected");
  if (marginal_mass_outside(rho, 0.0, axes.x_min, axes.x_max) > 1e-4 ||
      marginal_mass_outside(rho, kPi / 2.0, axes.p_min, axes.p_max) > 1e-4)
    throw std::invalid_argument("wigner: grid does not cover the state's support");

  const int d = rho.dim();
  // sqrt(m!/n!) for n >= m
  RMat ratio = RMat::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    ratio(n, n) = 1.0;
    for (int m = n - 1; m >= 0; --m) ratio(n, m) = ratio(n, m + 1) / std::sqrt(double(m + 1));
  }

  WignerGrid grid(linspace(axes.x_min, axes.x_max, axes.x_steps),
                  linspace(axes.p_min, axes.p_max, axes.p_steps));
  const CMat& m = rho.matrix();

  // W(x,p) = e^{-z/2}/pi [ sum_n rho_nn (-1)^n L_n(z)
  //   + sum_{m<n} 2 Re( rho_mn (-1)^m sqrt(m!/n!) beta^{n-m} L_m^{n-m}(z) ) ],
  // beta = sqrt(2) (x + i p), z = |beta|^2.
  RMat lag(d, d);     // lag(k, a) = L_k^{(a)}(z)
  std::vector<Complex> bpow(d);
  for (int ix = 0; ix < static_cast<int>(grid.x_axis().size()); ++ix) {
    const double x = grid.x_axis()[ix];
    for (int ip = 0; ip < static_cast<int>(grid.p_axis().size()); ++ip) {
      const double p = grid.p_axis()[ip];
      const Complex beta = std::sqrt(2.0) * Complex(x, p);
      const double z = std::norm(beta);
      for (int a = 0; a < d; ++a) {
        lag(0, a) = 1.0;
        if (d > 1) lag(1, a) = 1.0 + a - z;
        for (int k = 2; k + a < d + 1 && k < d; ++k)
          lag(k, a) = ((2.0 * k - 1.0 + a - z) * lag(k - 1, a) - (k - 1.0 + a) * lag(k - 2, a)) / k;
      }
      bpow[0] = 1.0;
      for (int k = 1; k < d; ++k) bpow[k] = bpow[k - 1] * beta;

      double acc = 0.0;
      for (int n = 0; n < d; ++n)
        acc += m(n, n).real() * (n % 2 == 0 ? 1.0 : -1.0) * lag(n, 0);
      for (int mm = 0; mm < d; ++mm)
        for (int n = mm + 1; n < d; ++n) {
          const Complex term = m(mm, n) * bpow[n - mm];
          const double sign = mm % 2 == 0 ? 1.0 : -1.0;
          acc += 2.0 * sign * ratio(n, mm) * lag(mm, n - mm) * term.real();
        }
      grid.values()(ix, ip) = acc * std::exp(-0.5 * z) / kPi;
    }
  }
  return grid;
}

RVec quadrature_pdf(const DensityOperator& rho, double phase, const std::vector<double>& xs) {
  if (rho.modes() != 1) throw std::invalid_argument("quadrature_pdf: single-mode state expected");
  const int d = rho.dim();
  CVec w(d);
  RVec out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const RVec psi = detail::hermite_functions(rho.cutoff().n_max, xs[i]);
    for (int n = 0; n < d; ++n) w[n] = psi[n] * std::exp(Complex(0.0, n * phase));
    out[i] = std::real(w.dot(rho.matrix() * w));
  }
  return out;
}

std::vector<QuadratureSample> sample_homodyne(const DensityOperator& rho,
                                              const std::vector<double>& phases, int n_samples,
                                              std::uint64_t seed) {
  if (phases.empty()) throw std::invalid_argument("sample_homodyne: need at least one phase");
  if (n_samples < 1) throw std::invalid_argument("sample_homodyne: n_samples must be >= 1");

  const double range = std::sqrt(2.0 * rho.cutoff().n_max + 1.0) + 4.0;
  const double dx = 0.005;
  const int npts = static_cast<int>(std::ceil(2.0 * range / dx)) + 1;
  const auto xs = linspace(-range, range, npts);

  // per-phase inverse CDF tables
  std::vector<std::vector<double>> cdfs(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const RVec pdf = quadrature_pdf(rho, phases[k], xs);
    std::vector<double> cdf(npts, 0.0);
    for (int i = 1; i < npts; ++i)
      cdf[i] = cdf[i - 1] + 0.5 * (std::max(0.0, pdf[i - 1]) + std::max(0.0, pdf[i])) * dx;
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    cdfs[k] = std::move(cdf);
  }

  // one named stream per phase, split from the master seed
  std::vector<std::mt19937_64> rngs;
  rngs.reserve(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(k)};
    rngs.emplace_back(sseq);
  }

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<QuadratureSample> samples;
  samples.reserve(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    const std::size_t k = j % phases.size();
    const auto& cdf = cdfs[k];
    const double u = uni(rngs[k]);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    double value;
    if (it == cdf.begin()) {
      value = xs.front();
    } else {
      const std::size_t hi = it - cdf.begin();
      const double c0 = cdf[hi - 1], c1 = cdf[hi];
      const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
      value = xs[hi - 1] + t * dx;
    }
    samples.push_back({phases[k], value});
  }
  return samples;
}

std::string samples_to_csv(const std::vector<QuadratureSample>& samples) {
  std::ostringstream out;
  out << "phase_rad,quadrature\n";
  char line[80];
  for (const auto& s : samples) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", s.phase, s.value);
    out << line;
  }
  return out.str();
}

std::vector<QuadratureSample> samples_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header != "phase_rad,quadrature")
    throw std::invalid_argument("samples CSV: bad header");
  std::vector<QuadratureSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    QuadratureSample s;
    if (std::sscanf(line.c_str(), "%lg,%lg", &s.phase, &s.value) != 2)
      throw std::invalid_argument("samples CSV: bad row \"" + line + "\"");
    out.push_back(s);
  }
  return out;
}

void MleConfig::validate() const {
  cutoff.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("MleConfig: eta must lie in [0,1]");
  if (phase_bins < 1) throw std::invalid_argument("MleConfig: phase_bins must be >= 1");
  if (!(quad_bin_width > 0)) throw std::invalid_argument("MleConfig: bin width must be positive");
  if (!(quad_range > 0)) throw std::invalid_argument("MleConfig: quad_range must be positive");
  if (max_iters < 1) throw std::invalid_argument("MleConfig: max_iters must be >= 1");
  if (!(tol > 0)) throw std::invalid_argument("MleConfig: tol must be positive");
}

MleResult mle_reconstruct(const std::vector<QuadratureSample>& samples, const MleConfig& config) {
  config.validate();
  if (samples.empty()) throw std::invalid_argument("mle_reconstruct: no samples");
  const int d = config.cutoff.dim();
  const int nbins = static_cast<int>(std::round(2.0 * config.quad_range / config.quad_bin_width));

  // histogram over (exact phase value, x bin)
  std::map<std::pair<double, int>, long> counts;
  long dropped = 0;
  for (const auto& s : samples) {
    const double pos = (s.value + config.quad_range) / config.quad_bin_width;
    const int b = static_cast<int>(std::floor(pos));
    if (b < 0 || b >= nbins) {
      ++dropped;
      continue;
    }
    ++counts[{s.phase, b}];
  }
  if (counts.empty()) throw std::invalid_argument("mle_reconstruct: all samples out of range");
  const long n_used = std::accumulate(
      counts.begin(), counts.end(), 0L, [](long acc, const auto& kv) { return acc + kv.second; });

  // phase-independent bin overlap matrices G_b[m,n] = int_bin psi_m psi_n dx (Simpson)
  std::vector<int> used_bins;
  for (const auto& [key, cnt] : counts)
    if (std::find(used_bins.begin(), used_bins.end(), key.second) == used_bins.end())
      used_bins.push_back(key.second);
  std::map<int, RMat> overlaps;
  constexpr int kSimpsonPoints = 9;  // per bin, even count of intervals
  for (const int b : used_bins) {
    const double lo = -config.quad_range + b * config.quad_bin_width;
    const double h = config.quad_bin_width / (kSimpsonPoints - 1);
    RMat g = RMat::Zero(d, d);
    for (int i = 0; i < kSimpsonPoints; ++i) {
      const RVec psi = detail::hermite_functions(config.cutoff.n_max, lo + i * h);
      const double w = (i == 0 || i == kSimpsonPoints - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      g += (w * h / 3.0) * (psi * psi.transpose());
    }
    overlaps.emplace(b, std::move(g));
  }

  // POVM per occupied (phase, bin), loss-smeared when eta < 1
  const auto kraus = config.eta < 1.0 ? loss_kraus(config.eta, config.cutoff) : std::vector<RMat>{};
  std::vector<CMat> povms;
  std::vector<long> freq;
  povms.reserve(counts.size());
  for (const auto& [key, cnt] : counts) {
    const auto& [phase, b] = key;
    const RMat& g = overlaps.at(b);
    CMat pi(d, d);
    for (int mm = 0; mm < d; ++mm)
      for (int n = 0; n < d; ++n)
        pi(mm, n) = g(mm, n) * std::exp(Complex(0.0, (n - mm) * phase));
    if (!kraus.empty()) {
      CMat smeared = CMat::Zero(d, d);
      for (const RMat& a : kraus) smeared += a.transpose() * pi * a;
      pi = std::move(smeared);
    }
    povms.push_back(std::move(pi));
    freq.push_back(cnt);
  }

  // R*rho*R fixed point from the maximally mixed state
  CMat rho = CMat::Identity(d, d) / static_cast<double>(d);
  MleResult result;
  result.dropped_samples = dropped;
  RVec prev_diag = rho.diagonal().real();
  for (int iter = 0; iter < config.max_iters; ++iter) {
    CMat r = CMat::Zero(d, d);
    double ll = 0.0;
    for (std::size_t j = 0; j < povms.size(); ++j) {
      const double pj = std::max(1e-300, (rho * povms[j]).trace().real());
      ll += freq[j] * std::log(pj);
      r += (static_cast<double>(freq[j]) / (n_used * pj)) * povms[j];
    }
    result.log_likelihood.push_back(ll);
    rho = r * rho * r;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    result.iterations = iter + 1;
    const RVec diag = rho.diagonal().real();
    const double change = (diag - prev_diag).cwiseAbs().maxCoeff();
    prev_diag = diag;
    if (change < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.rho = DensityOperator::from_matrix(std::move(rho), 1, config.cutoff);
  return result;
}

}  // namespace catsim
