// The sequential round trip: brute-force Kraus oracle and the closed-form
// output states for the optimal phase state and the M&M state.
//
// One round applies, in order: phase(phi + theta), loss(eta1), U(M),
// phase(theta), loss(eta2). Closed forms cover a single round with
// eta1 = eta2 = eta; anything else goes through the oracle.
#pragma once

#include "interf/fock.hpp"
#include "interf/states.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace interf {

struct RoundTripConfig {
  double phi = 0.0;
  double theta = 0.0;
  double eta1 = 1.0;
  double eta2 = 1.0;
  int m = 0;
  int rounds = 1;

  void check() const {
    require_finite(phi, "phi");
    require_finite(theta, "theta");
    require_transmissivity(eta1);
    require_transmissivity(eta2);
    if (m < 0) throw std::invalid_argument("M must be >= 0");
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  }
};

/// Precomputed single-round channel pieces for a fixed configuration.
class RoundTrip {
 public:
  explicit RoundTrip(const RoundTripConfig& cfg)
      : cfg_((cfg.check(), cfg)),
        loss1_(loss_channel(cfg.eta1, cfg.m + 1)),
        loss2_(loss_channel(cfg.eta2, cfg.m + 1)),
        u_(cfg.m, cfg.m + 1) {}

  const RoundTripConfig& config() const { return cfg_; }

  DensityMatrix one_round(const DensityMatrix& rho) const {
    if (rho.dim() != cfg_.m + 1) throw std::invalid_argument("state dimension must equal M+1");
    DensityMatrix r = apply_phase(rho, cfg_.phi + cfg_.theta);
    r = apply_channel(r, loss1_);
    r = u_.apply(r);
    r = apply_phase(r, cfg_.theta);
    return apply_channel(r, loss2_);
  }

  DensityMatrix run(const DensityMatrix& rho) const {
    DensityMatrix r = rho;
    for (int k = 0; k < cfg_.rounds; ++k) r = one_round(r);
    return r;
  }

 private:
  RoundTripConfig cfg_;
  KrausChannel loss1_;
  KrausChannel loss2_;
  PermutationUnitary u_;
};

/// Ground truth: explicit Kraus sums, no closed forms.
inline DensityMatrix roundtrip_oracle(const FockVector& input, const RoundTripConfig& cfg) {
  if (input.dim() != cfg.m + 1) throw std::invalid_argument("input dimension must equal M+1");
  return RoundTrip(cfg).run(DensityMatrix::pure(input));
}

inline DensityMatrix roundtrip_oracle(const DensityMatrix& input, const RoundTripConfig& cfg) {
  return RoundTrip(cfg).run(input);
}

/// Output of the protocol as a function of phi.
///
/// U e^{i phi n} U = e^{i M phi} e^{-i phi n} and phases commute with loss,
/// so R rounds give rho(phi) = e^{-i s phi n} rho(0) e^{i s phi n} with
/// s = R mod 2. Even round counts carry no phase information.
class PhaseFamily {
 public:
  PhaseFamily(DensityMatrix at_zero, int phase_weight) : rho0_(std::move(at_zero)), weight_(phase_weight) {}

  static PhaseFamily from_oracle(const FockVector& input, RoundTripConfig cfg) {
    cfg.phi = 0.0;
    const int w = cfg.rounds % 2;
    return PhaseFamily(roundtrip_oracle(input, cfg), w);
  }

  const DensityMatrix& at_zero() const { return rho0_; }
  int phase_weight() const { return weight_; }
  DensityMatrix at(double phi) const { return weight_ == 0 ? rho0_ : apply_phase(rho0_, -weight_ * phi); }

 private:
  DensityMatrix rho0_;
  int weight_;
};

// ---------------------------------------------------------------------------
// Closed form for the optimal phase state.
// ---------------------------------------------------------------------------

/// rho = 2/(M+1) sum_{i,j} (1-eta)^{i+j} eta^{M-j} sum_{n,m} w_n w_m e^{i phi (m-n)} |n><m|
/// with w_k = sqrt(C(k+j, j) C(M-k-j+i, i)) sin(pi (M-k-j+i+1/2)/(M+1)) and
/// n, m in [max(0, i-j), M-j].
inline DensityMatrix closed_form_rho(int m, double eta, double phi) {
  if (m < 1) throw std::invalid_argument("closed-form rho needs M >= 1");
  require_transmissivity(eta);
  require_finite(phi, "phi");
  const int d = m + 1;
  CMatrix rho = CMatrix::Zero(d, d);
  CVector ph(d);
  for (int k = 0; k < d; ++k) ph(k) = std::polar(1.0, -k * phi);
  std::vector<double> w(d);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const double pref = 2.0 / (m + 1) * std::pow(1.0 - eta, i + j) * std::pow(eta, m - j);
      if (pref == 0.0) continue;
      const int lo = std::max(0, i - j);
      const int hi = m - j;
      if (lo > hi) continue;
      for (int k = lo; k <= hi; ++k)
        w[k] = std::sqrt(binomial(k + j, j) * binomial(m - k - j + i, i)) *
               std::sin(std::numbers::pi * (m - k - j + i + 0.5) / (m + 1));
      for (int n = lo; n <= hi; ++n)
        for (int mm = lo; mm <= hi; ++mm) rho(n, mm) += pref * w[n] * w[mm] * ph(n) * std::conj(ph(mm));
    }
  }
  return DensityMatrix(std::move(rho));
}

// ---------------------------------------------------------------------------
// Closed form for the M&M state.
// ---------------------------------------------------------------------------

/// alpha_j (j = -delta..M', placed on |j+delta>), beta_j (j = 0..M) and
/// gamma_j (j = 0..M'), all with f_ij = (1-eta)^{2i-j} eta^{M-i+j}.
/// Labels are post-permutation Fock indices.
struct MmCoefficients {
  int m = 0;
  int m_prime = 0;
  std::vector<double> alpha;  // alpha[j + delta]
  std::vector<double> beta;
  std::vector<double> gamma;

  int delta() const { return m - m_prime; }
  double alpha_at(int j) const {
    const int idx = j + delta();
    return (idx >= 0 && idx < static_cast<int>(alpha.size())) ? alpha[idx] : 0.0;
  }
  double beta_at(int j) const { return (j >= 0 && j < static_cast<int>(beta.size())) ? beta[j] : 0.0; }
  double gamma_at(int j) const { return (j >= 0 && j < static_cast<int>(gamma.size())) ? gamma[j] : 0.0; }
};

inline MmCoefficients mm_coefficients(const MmStateSpec& spec, double eta) {
  require_transmissivity(eta);
  const int m = spec.m;
  const int mp = spec.m_prime;
  const int delta = spec.delta();
  auto f = [&](int i, int j) { return std::pow(1.0 - eta, 2 * i - j) * std::pow(eta, m - i + j); };

  MmCoefficients c;
  c.m = m;
  c.m_prime = mp;
  c.alpha.assign(mp + delta + 1, 0.0);
  for (int j = -delta; j <= mp; ++j) {
    double s = 0.0;
    for (int i = std::max(0, j); i <= mp; ++i) s += f(i, j) * binomial(mp, i) * binomial(i + delta, i - j) / 2.0;
    c.alpha[j + delta] = s;
  }
  c.beta.assign(m + 1, 0.0);
  for (int j = 0; j <= m; ++j) {
    double s = 0.0;
    for (int i = j; i <= m; ++i) s += f(i, j) * binomial(m, i) * binomial(i, j) / 2.0;
    c.beta[j] = s;
  }
  c.gamma.assign(mp + 1, 0.0);
  for (int j = 0; j <= mp; ++j) {
    double s = 0.0;
    for (int i = j; i <= mp; ++i)
      s += f(i, j) * std::sqrt(binomial(mp, i) * binomial(m, i) * binomial(i + delta, i - j) * binomial(i, j));
    c.gamma[j] = s;
  }
  return c;
}

/// sigma = sum alpha_j |j+d><j+d| + sum beta_j |j><j|
///       + 1/2 sum gamma_j (e^{-i d phi} |j+d><j| + e^{i d phi} |j><j+d|).
inline DensityMatrix closed_form_sigma(const MmStateSpec& spec, double eta, double phi) {
  require_finite(phi, "phi");
  const auto c = mm_coefficients(spec, eta);
  const int d = spec.m + 1;
  const int delta = spec.delta();
  CMatrix s = CMatrix::Zero(d, d);
  for (int j = -delta; j <= spec.m_prime; ++j) s(j + delta, j + delta) += c.alpha_at(j);
  for (int j = 0; j <= spec.m; ++j) s(j, j) += c.beta_at(j);
  const Complex down = std::polar(0.5, -delta * phi);
  for (int j = 0; j <= spec.m_prime; ++j) {
    s(j + delta, j) += c.gamma_at(j) * down;
    s(j, j + delta) += c.gamma_at(j) * std::conj(down);
  }
  return DensityMatrix(std::move(s));
}

// ---------------------------------------------------------------------------
// Closed form vs oracle sweep.
// ---------------------------------------------------------------------------

struct ValidationCell {
  std::string form;  // "rho" or "sigma"
  int m = 0;
  int m_prime = -1;  // -1 for rho
  double eta = 1.0;
  double phi = 0.0;
  double max_dev = 0.0;
  int row = 0;
  int col = 0;
};

struct ValidationReport {
  double tolerance = 1e-10;
  std::vector<ValidationCell> cells;
  ValidationCell worst;

  double max_dev() const { return worst.max_dev; }
  bool passed() const { return !cells.empty() && worst.max_dev < tolerance; }

  std::string to_table() const {
    std::ostringstream os;
    char buf[160];
    os << "form   M   M'  eta       phi       max_dev       row col\n";
    for (const auto& c : cells) {
      std::snprintf(buf, sizeof buf, "%-5s %3d %3d  %-8.4g  %-8.4g  %.6e  %3d %3d\n", c.form.c_str(), c.m, c.m_prime,
                    c.eta, c.phi, c.max_dev, c.row, c.col);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "worst: %s M=%d M'=%d eta=%.6g phi=%.6g dev=%.6e (tolerance %.1e) -> %s\n",
                  worst.form.c_str(), worst.m, worst.m_prime, worst.eta, worst.phi, worst.max_dev, tolerance,
                  passed() ? "PASS" : "FAIL");
    os << buf;
    return os.str();
  }

  std::string to_key_value() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "max_dev=%.12g\nargmax_m=%d\nargmax_eta=%.12g\nargmax_phi=%.12g\nstatus=%s\n",
                  worst.max_dev, worst.m, worst.eta, worst.phi, passed() ? "pass" : "fail");
    return buf;
  }
};

inline ValidationCell compare_cell(const DensityMatrix& closed, const DensityMatrix& oracle) {
  ValidationCell c;
  const Eigen::MatrixXd diff = (closed.elems() - oracle.elems()).cwiseAbs();
  Eigen::Index r = 0, k = 0;
  c.max_dev = diff.maxCoeff(&r, &k);
  c.row = static_cast<int>(r);
  c.col = static_cast<int>(k);
  return c;
}

/// Compares both closed forms with the oracle for every M <= max_m (and every
/// M' < M) on the given eta and phi grids.
inline ValidationReport validate_closed_forms(int max_m, const std::vector<double>& eta_grid,
                                              const std::vector<double>& phi_grid, double tolerance = 1e-10) {
  ValidationReport rep;
  rep.tolerance = tolerance;
  auto record = [&](ValidationCell c) {
    if (rep.cells.empty() || c.max_dev > rep.worst.max_dev) rep.worst = c;
    rep.cells.push_back(std::move(c));
  };
  for (int m = 1; m <= max_m; ++m) {
    for (double eta : eta_grid) {
      for (double phi : phi_grid) {
        RoundTripConfig cfg{phi, 0.0, eta, eta, m, 1};
        auto c = compare_cell(closed_form_rho(m, eta, phi), roundtrip_oracle(optimal_phase_state(m), cfg));
        c.form = "rho";
        c.m = m;
        c.eta = eta;
        c.phi = phi;
        record(c);
        for (int mp = 0; mp < m; ++mp) {
          const MmStateSpec spec(m, mp);
          auto s = compare_cell(closed_form_sigma(spec, eta, phi), roundtrip_oracle(mm_state(spec), cfg));
          s.form = "sigma";
          s.m = m;
          s.m_prime = mp;
          s.eta = eta;
          s.phi = phi;
          record(s);
        }
      }
    }
  }
  return rep;
}

}  // namespace interf
