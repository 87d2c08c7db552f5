#include "catsim/herald.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace catsim {

namespace {

constexpr double kNegligibleProbability = 1e-15;

// Mixing convention: beamsplitter at t = sqrt(1-eps^2), phase pi + bs_phase.
// The pi offset makes the heralded superposition carry a positive |n-2>
// coefficient, matching the closed form of core_state.
CMat mixing_unitary(const HeraldScenario& sc) {
  const double eps = sc.mixing.epsilon();
  const double t = std::sqrt(std::max(0.0, 1.0 - eps * eps));
  return beamsplitter_unitary(t, std::numbers::pi + sc.bs_phase, sc.cutoff);
}

struct Premeasure {
  bool pure = false;
  FockVector psi;       // valid when pure
  DensityOperator rho;  // valid otherwise
};

Premeasure premeasure(const HeraldScenario& sc) {
  const FockVector tmsv = two_mode_squeezed_vacuum(sc.squeeze.lambda(), sc.cutoff);
  const CMat u = mixing_unitary(sc);
  Premeasure out;
  if (sc.losses.eta_opo == 1.0) {
    out.pure = true;
    out.psi = apply_unitary(tmsv, u);
    return out;
  }
  DensityOperator rho = DensityOperator::from_pure(tmsv);
  rho = loss_channel_on_mode(rho, ModeIndex::signal, sc.losses.eta_opo);
  rho = loss_channel_on_mode(rho, ModeIndex::idler, sc.losses.eta_opo);
  out.rho = apply_unitary(rho, u);
  return out;
}

// Heralds with a diagonal idler POVM. Pure inputs decompose into idler
// branches; mixed inputs go through the partial sandwich.
HeraldOutcome herald_with_diagonal_povm(const Premeasure& pre, const Cutoff& cutoff,
                                        const RVec& weights) {
  const int d = cutoff.dim();
  CMat sig = CMat::Zero(d, d);
  double p = 0.0;
  if (pre.pure) {
    for (int n = 0; n < d; ++n) {
      if (weights[n] == 0.0) continue;
      CVec branch(d);
      for (int s = 0; s < d; ++s) branch[s] = pre.psi.amplitudes()[s * d + n];
      sig += weights[n] * (branch * branch.adjoint());
    }
    p = sig.trace().real();
  } else {
    sig = detail::diagonal_povm_condition(pre.rho.matrix(), d, ModeIndex::idler, weights, &p);
  }
  if (p < kNegligibleProbability)
    throw ImpossibleOutcome("herald: negligible-probability scenario (p = " + std::to_string(p) + ")");
  sig /= p;
  sig = 0.5 * (sig + sig.adjoint()).eval();
  return {DensityOperator::from_matrix(std::move(sig), 1, cutoff), p};
}

// Adjoint pure-loss map on a diagonal POVM: E'(n) = sum_j B(n,j) eta^j (1-eta)^{n-j} E(j).
RVec smear_diagonal_by_loss(const RVec& e, double eta) {
  if (eta == 1.0) return e;
  const int d = static_cast<int>(e.size());
  RMat binom = RMat::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    binom(n, 0) = 1.0;
    for (int j = 1; j <= n; ++j)
      binom(n, j) = binom(n - 1, j - 1) + (j <= n - 1 ? binom(n - 1, j) : 0.0);
  }
  RVec out = RVec::Zero(d);
  for (int n = 0; n < d; ++n)
    for (int j = 0; j <= n; ++j)
      out[n] += binom(n, j) * std::pow(eta, j) * std::pow(1.0 - eta, n - j) * e[j];
  return out;
}

}  // namespace

MixingParam MixingParam::from_theta_deg(double theta_deg) {
  const double eps = std::sin(2.0 * theta_deg * std::numbers::pi / 180.0);
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("MixingParam: theta must give epsilon in [0,1]");
  return MixingParam(eps);
}

MixingParam MixingParam::from_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("MixingParam: epsilon must lie in [0,1]");
  return MixingParam(epsilon);
}

double MixingParam::theta_deg() const {
  return 0.5 * std::asin(epsilon_) * 180.0 / std::numbers::pi;
}

void HeraldScenario::validate() const {
  cutoff.validate();
  losses.validate();
  if (n_herald < 1) throw std::invalid_argument("HeraldScenario: n_herald must be >= 1");
  if (n_herald > cutoff.n_max)
    throw std::invalid_argument("HeraldScenario: n_herald exceeds cutoff");
  if (detector == DetectorModel::coincidence_onoff && n_herald != 2)
    throw std::invalid_argument("HeraldScenario: coincidence_onoff requires n_herald = 2");
  if (!(dark_click_prob >= 0.0 && dark_click_prob < 1.0))
    throw std::invalid_argument("HeraldScenario: dark_click_prob must lie in [0,1)");
}

CoreState core_state(int n, double epsilon, double lambda, Cutoff cutoff) {
  cutoff.validate();
  if (n < 0 || n > cutoff.n_max)
    throw std::invalid_argument("core_state: n out of range for cutoff");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("core_state: epsilon must lie in [0,1]");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("core_state: lambda must lie in [0,1)");
  const double low = epsilon * std::sqrt(static_cast<double>(n) * (n - 1));
  const double norm_sq = low * low + lambda * lambda;
  if (norm_sq < 1e-300)
    throw std::invalid_argument("core_state: undefined superposition (epsilon = lambda = 0)");
  CVec amp = CVec::Zero(cutoff.dim());
  if (n >= 2) amp[n - 2] = low / std::sqrt(norm_sq);
  amp[n] += lambda / std::sqrt(norm_sq);
  return {FockVector::from_amplitudes(std::move(amp), 1, cutoff), n < 2};
}

HeraldOutcome herald_pnr(const HeraldScenario& scenario) {
  scenario.validate();
  if (scenario.detector != DetectorModel::pnr)
    throw std::invalid_argument("herald_pnr: scenario detector is not pnr");
  const Premeasure pre = premeasure(scenario);
  RVec projector = RVec::Zero(scenario.cutoff.dim());
  projector[scenario.n_herald] = 1.0;
  return herald_with_diagonal_povm(pre, scenario.cutoff,
                                   smear_diagonal_by_loss(projector, scenario.losses.eta_herald));
}

HeraldOutcome herald_coincidence(const HeraldScenario& scenario) {
  scenario.validate();
  if (scenario.detector != DetectorModel::coincidence_onoff)
    throw std::invalid_argument("herald_coincidence: scenario detector is not coincidence_onoff");
  const Premeasure pre = premeasure(scenario);
  const RVec povm = detail::coincidence_povm_diagonal(scenario.cutoff, scenario.losses.eta_herald,
                                                      scenario.dark_click_prob);
  return herald_with_diagonal_povm(pre, scenario.cutoff, povm);
}

DensityOperator output_loss(const HeraldOutcome& outcome, const LossBudget& losses,
                            bool include_detection) {
  losses.validate();
  if (!include_detection) return outcome.state;
  return loss_channel(outcome.state, losses.eta_det);
}

namespace detail {

RVec coincidence_povm_diagonal(Cutoff cutoff, double eta_herald, double dark_click_prob) {
  cutoff.validate();
  const int d = cutoff.dim();
  const double q = 1.0 - dark_click_prob;
  RVec e(d);
  // k photons behind the balanced splitter: both arms click unless one
  // stays dark, P(no click | arm empty) = 1 - dark.
  for (int k = 0; k < d; ++k)
    e[k] = 1.0 - 2.0 * q * std::pow(0.5, k) + (k == 0 ? q * q : 0.0);
  return smear_diagonal_by_loss(e, eta_herald);
}

RVec coincidence_povm_diagonal_constructed(Cutoff cutoff, double eta_herald,
                                           double dark_click_prob) {
  cutoff.validate();
  const int d = cutoff.dim();
  const CMat u = beamsplitter_unitary(std::sqrt(0.5), 0.0, cutoff);
  const double q = 1.0 - dark_click_prob;
  RVec e = RVec::Zero(d);
  for (int n = 0; n < d; ++n) {
    const FockVector split = apply_unitary(FockVector::basis(n, 0, cutoff), u);
    double acc = 0.0;
    for (int k1 = 0; k1 < d; ++k1)
      for (int k2 = 0; k2 < d; ++k2) {
        const double w = std::norm(split.amplitude(k1, k2));
        const double click1 = 1.0 - (k1 == 0 ? q : 0.0);
        const double click2 = 1.0 - (k2 == 0 ? q : 0.0);
        acc += w * click1 * click2;
      }
    e[n] = acc;
  }
  return smear_diagonal_by_loss(e, eta_herald);
}

DensityOperator premeasurement_state(const HeraldScenario& scenario) {
  scenario.validate();
  const Premeasure pre = premeasure(scenario);
  return pre.pure ? DensityOperator::from_pure(pre.psi) : pre.rho;
}

}  // namespace detail

HeraldScenario HeraldScenario::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("HeraldScenario JSON: expected an object");
  static const std::vector<std::string> known = {
      "lambda",  "theta_deg", "epsilon", "n_herald",        "detector", "eta_opo",
      "eta_det", "eta_herald", "cutoff",  "bs_phase",        "dark_click_prob"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok) throw std::invalid_argument("HeraldScenario JSON: unknown field \"" + key + "\"");
  }
  HeraldScenario sc;
  if (!j.contains("lambda")) throw std::invalid_argument("HeraldScenario JSON: missing lambda");
  sc.squeeze = SqueezeParam::from_lambda(j.at("lambda").get<double>());
  const bool has_theta = j.contains("theta_deg");
  const bool has_eps = j.contains("epsilon");
  if (has_theta == has_eps)
    throw std::invalid_argument("HeraldScenario JSON: provide exactly one of theta_deg, epsilon");
  sc.mixing = has_theta ? MixingParam::from_theta_deg(j.at("theta_deg").get<double>())
                        : MixingParam::from_epsilon(j.at("epsilon").get<double>());
  if (!j.contains("n_herald")) throw std::invalid_argument("HeraldScenario JSON: missing n_herald");
  sc.n_herald = j.at("n_herald").get<int>();
  if (j.contains("detector")) {
    const std::string det = j.at("detector").get<std::string>();
    if (det == "pnr") sc.detector = DetectorModel::pnr;
    else if (det == "coincidence_onoff") sc.detector = DetectorModel::coincidence_onoff;
    else throw std::invalid_argument("HeraldScenario JSON: unknown detector \"" + det + "\"");
  }
  sc.losses.eta_opo = j.value("eta_opo", 1.0);
  sc.losses.eta_det = j.value("eta_det", 1.0);
  sc.losses.eta_herald = j.value("eta_herald", 1.0);
  if (!j.contains("cutoff")) throw std::invalid_argument("HeraldScenario JSON: missing cutoff");
  sc.cutoff = Cutoff{j.at("cutoff").get<int>()};
  sc.bs_phase = j.value("bs_phase", 0.0);
  sc.dark_click_prob = j.value("dark_click_prob", 0.0);
  sc.validate();
  return sc;
}

std::string HeraldScenario::to_json() const {
  nlohmann::json j;
  j["lambda"] = squeeze.lambda();
  j["epsilon"] = mixing.epsilon();
  j["n_herald"] = n_herald;
  j["detector"] = detector == DetectorModel::pnr ? "pnr" : "coincidence_onoff";
  j["eta_opo"] = losses.eta_opo;
  j["eta_det"] = losses.eta_det;
  j["eta_herald"] = losses.eta_herald;
  j["cutoff"] = cutoff.n_max;
  j["bs_phase"] = bs_phase;
  j["dark_click_prob"] = dark_click_prob;
  return j.dump();
}

}  // namespace catsim
