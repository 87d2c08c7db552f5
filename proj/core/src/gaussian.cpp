#include "catsim/gaussian.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace catsim {

namespace {

constexpr int kSqueezePad = 10;

// Memo for dense unitaries keyed by exact parameter bits. Concurrent
// readers share the lock; the map is cleared if it ever grows absurd.
using CacheKey = std::tuple<int, int, std::uint64_t, std::uint64_t>;

class UnitaryCache {
 public:
  const CMat* find(const CacheKey& key) {
    std::shared_lock lock(mutex_);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }
  const CMat& put(const CacheKey& key, CMat value) {
    std::unique_lock lock(mutex_);
    if (map_.size() > 4096) map_.clear();
    return map_.try_emplace(key, std::move(value)).first->second;
  }

 private:
  std::shared_mutex mutex_;
  std::map<CacheKey, CMat> map_;
};

UnitaryCache& cache() {
  static UnitaryCache instance;
  return instance;
}

CacheKey make_key(int kind, int dim, double a, double b) {
  return {kind, dim, std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)};
}

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
}

}  // namespace

SqueezeParam SqueezeParam::from_xi(double xi) {
  if (!(xi >= 0.0)) throw std::invalid_argument("SqueezeParam: xi must be >= 0");
  return SqueezeParam(xi);
}

SqueezeParam SqueezeParam::from_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("SqueezeParam: lambda must lie in [0,1)");
  return SqueezeParam(std::atanh(lambda));
}

SqueezeParam SqueezeParam::from_s(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("SqueezeParam: s must lie in (0,1]");
  return SqueezeParam(-0.5 * std::log(s));
}

SqueezeParam SqueezeParam::from_db(double db) {
  if (!(db >= 0.0)) throw std::invalid_argument("SqueezeParam: dB must be >= 0");
  return SqueezeParam(db * std::log(10.0) / 20.0);
}

void LossBudget::validate() const {
  require_unit_interval(eta_opo, "eta_opo");
  require_unit_interval(eta_det, "eta_det");
  require_unit_interval(eta_herald, "eta_herald");
}

FockVector coherent(Complex alpha, Cutoff cutoff) {
  cutoff.validate();
  const double asq = std::norm(alpha);
  const int d = cutoff.dim();
  CVec amp(d);
  // c_n = e^{-|a|^2/2} alpha^n / sqrt(n!) via the stable ratio recurrence
  amp[0] = std::exp(-asq / 2.0);
  for (int n = 1; n < d; ++n) amp[n] = amp[n - 1] * alpha / std::sqrt(static_cast<double>(n));

  // exact Poisson populations at the top two slots decide admissibility
  const double top = std::norm(amp[d - 1]);
  const double sub = d >= 2 ? std::norm(amp[d - 2]) : 0.0;
  if (std::max(top, sub) > cutoff.leakage_bound) {
    // scan the Poisson pmf for the first index where it and its successor fit
    const double logb = std::log(cutoff.leakage_bound);
    int n = cutoff.n_max;
    double logp = -asq + n * std::log(asq) - std::lgamma(n + 1.0);
    double lognext = logp + std::log(asq) - std::log(n + 1.0);
    while (n < 100000 && (logp > logb || lognext > logb)) {
      ++n;
      logp = lognext;
      lognext += std::log(asq) - std::log(n + 1.0);
    }
    throw CutoffTooSmall("coherent: |alpha|^2 = " + std::to_string(asq) +
                             " leaks past n_max = " + std::to_string(cutoff.n_max) +
                             "; suggested n_max >= " + std::to_string(n + 1),
                         n + 1);
  }
  amp /= amp.norm();
  return FockVector::from_amplitudes(std::move(amp), 1, cutoff);
}

namespace detail {

CMat squeeze_unitary_dense(double xi, double phase, int dim) {
  const auto key = make_key(0, dim, xi, phase);
  if (const CMat* hit = cache().find(key)) return *hit;

  // H = i K with K = (xi/2)(e^{-i phase} a^2 - e^{i phase} a^dag^2); exp(K) = exp(-iH)
  CMat h = CMat::Zero(dim, dim);
  const Complex ip(0.0, 1.0);
  const Complex g = ip * (xi / 2.0) * std::exp(Complex(0.0, -phase));
  for (int n = 0; n + 2 < dim; ++n) {
    const double f = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    h(n, n + 2) = g * f;  // from the a^2 term
    h(n + 2, n) = std::conj(h(n, n + 2));
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  const CVec ph = (-ip * es.eigenvalues().array().cast<Complex>()).exp().matrix();
  CMat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return cache().put(key, std::move(u));
}

double squeezed_vacuum_population(double xi, int n) {
  if (n % 2 != 0) return 0.0;
  if (xi == 0.0) return n == 0 ? 1.0 : 0.0;
  const int m = n / 2;
  // P(2m) = sech(xi) tanh(xi)^{2m} C(2m,m) / 4^m, evaluated in logs
  const double logp = -std::log(std::cosh(xi)) + 2.0 * m * std::log(std::tanh(xi)) +
                      std::lgamma(2.0 * m + 1.0) - 2.0 * std::lgamma(m + 1.0) -
                      m * std::log(4.0);
  return std::exp(logp);
}

int suggest_cutoff_squeezed_vacuum(double xi, double bound) {
  for (int n_max = 2; n_max < 100000; n_max += 2) {
    if (squeezed_vacuum_population(xi, n_max) < bound &&
        squeezed_vacuum_population(xi, n_max + 2) < bound)
      return n_max + 1;  // odd top index: both populated slots below bound
  }
  throw std::invalid_argument("suggest_cutoff_squeezed_vacuum: no admissible cutoff found");
}

}  // namespace detail

CMat squeeze_unitary(const SqueezeParam& param, double phase, Cutoff cutoff) {
  cutoff.validate();
  const double xi = param.xi();
  const int top = cutoff.n_max;
  const double leak = std::max(detail::squeezed_vacuum_population(xi, top),
                               detail::squeezed_vacuum_population(xi, top - 1));
  if (leak > cutoff.leakage_bound) {
    const int sugg = detail::suggest_cutoff_squeezed_vacuum(xi, cutoff.leakage_bound);
    throw CutoffTooSmall("squeeze_unitary: squeezed vacuum at xi = " + std::to_string(xi) +
                             " leaks past n_max = " + std::to_string(top) +
                             "; suggested n_max >= " + std::to_string(sugg),
                         sugg);
  }
  const CMat full = detail::squeeze_unitary_dense(xi, phase, cutoff.dim() + kSqueezePad);
  return full.topLeftCorner(cutoff.dim(), cutoff.dim());
}

FockVector two_mode_squeezed_vacuum(double lambda, Cutoff cutoff) {
  cutoff.validate();
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("two_mode_squeezed_vacuum: lambda must lie in [0,1)");
  const int d = cutoff.dim();
  const double norm0 = std::sqrt(1.0 - lambda * lambda);

  const double top = norm0 * norm0 * std::pow(lambda, 2.0 * cutoff.n_max);
  const double sub = norm0 * norm0 * std::pow(lambda, 2.0 * (cutoff.n_max - 1));
  if (std::max(top, sub) > cutoff.leakage_bound) {
    const int sugg =
        1 + static_cast<int>(std::ceil(std::log(cutoff.leakage_bound / (norm0 * norm0)) /
                                       (2.0 * std::log(lambda))));
    throw CutoffTooSmall("two_mode_squeezed_vacuum: lambda = " + std::to_string(lambda) +
                             " leaks past n_max = " + std::to_string(cutoff.n_max) +
                             "; suggested n_max >= " + std::to_string(sugg),
                         sugg);
  }

  CVec amp = CVec::Zero(d * d);
  double c = norm0;
  for (int n = 0; n < d; ++n) {
    amp[n * d + n] = c;
    c *= lambda;
  }
  amp /= amp.norm();
  return FockVector::from_amplitudes(std::move(amp), 2, cutoff);
}

CMat beamsplitter_unitary(double transmittance_amplitude, double phase, Cutoff cutoff) {
  cutoff.validate();
  const double t = transmittance_amplitude;
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("beamsplitter_unitary: transmittance amplitude must lie in [0,1]");
  const auto key = make_key(1, cutoff.n_max, t, phase);
  if (const CMat* hit = cache().find(key)) return *hit;

  const double theta = std::acos(std::min(1.0, std::max(0.0, t)));
  const int d = cutoff.dim();
  CMat u = CMat::Zero(d * d, d * d);
  const Complex ip(0.0, 1.0);

  // Per total-photon sector N the generator is tridiagonal in k of |k, N-k>;
  // exponentiating the full sector and scattering the in-range entries keeps
  // the matrix exactly number-conserving and unitary on complete sectors.
  for (int total = 0; total <= 2 * cutoff.n_max; ++total) {
    const int sector = total + 1;
    CMat h = CMat::Zero(sector, sector);
    const Complex g = ip * theta * std::exp(Complex(0.0, phase));
    for (int k = 0; k + 1 < sector; ++k) {
      // a^dag b : |k, N-k> -> sqrt((k+1)(N-k)) |k+1, N-k-1>
      const double f = std::sqrt(static_cast<double>((k + 1) * (total - k)));
      h(k + 1, k) = g * f;
      h(k, k + 1) = std::conj(h(k + 1, k));
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const CVec ph = (-ip * es.eigenvalues().array().cast<Complex>()).exp().matrix();
    const CMat block = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    for (int kr = std::max(0, total - cutoff.n_max); kr <= std::min(total, cutoff.n_max); ++kr)
      for (int kc = std::max(0, total - cutoff.n_max); kc <= std::min(total, cutoff.n_max); ++kc)
        u(kr * d + (total - kr), kc * d + (total - kc)) = block(kr, kc);
  }
  return cache().put(key, std::move(u));
}

std::vector<RMat> loss_kraus(double eta, Cutoff cutoff) {
  cutoff.validate();
  require_unit_interval(eta, "eta");
  const int d = cutoff.dim();
  // binomial table C(j,k) in doubles (exact for this range)
  RMat binom = RMat::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    binom(j, 0) = 1.0;
    for (int k = 1; k <= j; ++k)
      binom(j, k) = binom(j - 1, k - 1) + (k <= j - 1 ? binom(j - 1, k) : 0.0);
  }
  std::vector<RMat> kraus;
  kraus.reserve(d);
  for (int k = 0; k < d; ++k) {
    RMat a = RMat::Zero(d, d);
    for (int j = k; j < d; ++j) {
      const double w = binom(j, k) * std::pow(eta, j - k) * std::pow(1.0 - eta, k);
      a(j - k, j) = std::sqrt(w);
    }
    kraus.push_back(std::move(a));
    if (eta == 1.0) break;  // only A_0 = I survives
  }
  return kraus;
}

DensityOperator loss_channel(const DensityOperator& rho, double eta) {
  require_unit_interval(eta, "eta");
  if (rho.modes() != 1) throw std::invalid_argument("loss_channel: single-mode input expected");
  if (eta == 1.0) return rho;
  const auto kraus = loss_kraus(eta, rho.cutoff());
  CMat out = CMat::Zero(rho.dim(), rho.dim());
  for (const RMat& a : kraus) out += a * rho.matrix() * a.transpose();
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator::from_matrix(std::move(out), 1, rho.cutoff());
}

DensityOperator loss_channel_via_ancilla(const DensityOperator& rho, double eta) {
  require_unit_interval(eta, "eta");
  if (rho.modes() != 1) throw std::invalid_argument("loss_channel_via_ancilla: single-mode input");
  const auto vac = DensityOperator::from_pure(FockVector::basis(0, rho.cutoff()));
  const auto joint = tensor(rho, vac);
  const CMat u = beamsplitter_unitary(std::sqrt(eta), 0.0, rho.cutoff());
  return partial_trace(apply_unitary(joint, u), ModeIndex::signal);
}

DensityOperator loss_channel_on_mode(const DensityOperator& rho, ModeIndex mode, double eta) {
  require_unit_interval(eta, "eta");
  if (rho.modes() != 2) throw std::invalid_argument("loss_channel_on_mode: two-mode input expected");
  if (eta == 1.0) return rho;
  const int d = rho.cutoff().dim();
  const auto kraus = loss_kraus(eta, rho.cutoff());
  const CMat& m = rho.matrix();
  CMat out = CMat::Zero(d * d, d * d);
  // A_k is a single band: A_k[j-k, j]. Contract it on the chosen mode.
  for (int k = 0; k < static_cast<int>(kraus.size()); ++k) {
    const RMat& a = kraus[k];
    for (int i = 0; i + k < d; ++i)
      for (int ip = 0; ip + k < d; ++ip) {
        const double c = a(i, i + k) * a(ip, ip + k);
        if (c == 0.0) continue;
        if (mode == ModeIndex::idler) {
          for (int s = 0; s < d; ++s)
            for (int sp = 0; sp < d; ++sp)
              out(s * d + i, sp * d + ip) += c * m(s * d + i + k, sp * d + ip + k);
        } else {
          for (int s = 0; s < d; ++s)
            for (int sp = 0; sp < d; ++sp)
              out(i * d + s, ip * d + sp) += c * m((i + k) * d + s, (ip + k) * d + sp);
        }
      }
  }
  out = 0.5 * (out + out.adjoint()).eval();
  return DensityOperator::from_matrix(std::move(out), 2, rho.cutoff());
}

DensityOperator dephase_channel(const DensityOperator& rho, double sigma_phi) {
  if (!(sigma_phi >= 0.0)) throw std::invalid_argument("dephase_channel: sigma_phi must be >= 0");
  if (rho.modes() != 1) throw std::invalid_argument("dephase_channel: single-mode input expected");
  if (sigma_phi == 0.0) return rho;
  CMat out = rho.matrix();
  const int d = rho.dim();
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      out(m, n) *= std::exp(-0.5 * sigma_phi * sigma_phi * (m - n) * (m - n));
  return DensityOperator::from_matrix(std::move(out), 1, rho.cutoff());
}

DensityOperator apply_unitary(const DensityOperator& rho, const CMat& u) {
  if (u.rows() != rho.dim() || u.cols() != rho.dim())
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  CMat out = u * rho.matrix() * u.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  const double tr = out.trace().real();
  out /= tr;  // normalize away sub-unitary truncation of cropped matrices
  return DensityOperator::from_matrix(std::move(out), rho.modes(), rho.cutoff());
}

FockVector apply_unitary(const FockVector& psi, const CMat& u) {
  if (u.rows() != psi.dim() || u.cols() != psi.dim())
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  return FockVector::from_amplitudes(u * psi.amplitudes(), psi.modes(), psi.cutoff());
}

}  // namespace catsim
