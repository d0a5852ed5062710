// Measurement statistics and phase-error figures.
#pragma once

#include "interf/fock.hpp"
#include "interf/roundtrip.hpp"
#include "interf/states.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace interf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps x into [0, 2 pi).
inline double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

/// Minimal distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
  const double d = wrap_phase(a - b);
  return d > std::numbers::pi ? kTwoPi - d : d;
}

// ---------------------------------------------------------------------------
// Pegg-Barnett outcome distribution
// ---------------------------------------------------------------------------

/// p(l) over the M+1 discrete Pegg-Barnett outcomes. Outcome l estimates
/// phi_hat_l = -Phi_l (mod 2 pi).
class OutcomeDistribution {
 public:
  OutcomeDistribution(int m, std::vector<double> probs, double true_phi) : m_(m), probs_(std::move(probs)), phi_(true_phi) {
    if (m < 0 || static_cast<int>(probs_.size()) != m + 1)
      throw std::invalid_argument("outcome distribution needs M+1 probabilities");
    double s = 0.0;
    for (double& p : probs_) {
      if (!(p >= -1e-12)) throw std::domain_error("negative outcome probability " + std::to_string(p));
      if (p < 0.0) p = 0.0;
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-10) throw std::domain_error("outcome probabilities sum to " + std::to_string(s));
  }

  int m() const { return m_; }
  double true_phi() const { return phi_; }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](int l) const { return probs_[l]; }
  double outcome_phase(int l) const { return pegg_barnett_phase(m_, l); }
  double estimate(int l) const { return wrap_phase(-outcome_phase(l)); }

 private:
  int m_;
  std::vector<double> probs_;
  double phi_;
};

/// p(l) = <Phi_l| rho |Phi_l>, l = 0..M. Only the 0..M block of rho is seen.
inline OutcomeDistribution povm_distribution(const DensityMatrix& rho, int m, double true_phi = 0.0) {
  if (m < 0 || rho.dim() < m + 1) throw std::invalid_argument("state dimension smaller than M+1");
  std::vector<double> p(m + 1);
  const CMatrix block = rho.elems().topLeftCorner(m + 1, m + 1);
  for (int l = 0; l <= m; ++l) {
    const CVector v = pegg_barnett_vector(m, pegg_barnett_phase(m, l)).amps();
    p[l] = (v.adjoint() * block * v)(0, 0).real();
  }
  return OutcomeDistribution(m, std::move(p), true_phi);
}

/// p(l) = 2/(M+1)^2 sum_{i,j} (1-eta)^{i+j} eta^{M-j} |sum_n w_n e^{-i n (phi + Phi_l)}|^2.
inline OutcomeDistribution closed_form_p(int m, double eta, double phi) {
  if (m < 1) throw std::invalid_argument("closed-form p needs M >= 1");
  require_transmissivity(eta);
  require_finite(phi, "phi");
  std::vector<double> p(m + 1, 0.0);
  std::vector<double> w(m + 1);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const double pref = 2.0 / ((m + 1.0) * (m + 1.0)) * std::pow(1.0 - eta, i + j) * std::pow(eta, m - j);
      if (pref == 0.0) continue;
      const int lo = std::max(0, i - j);
      const int hi = m - j;
      if (lo > hi) continue;
      for (int k = lo; k <= hi; ++k)
        w[k] = std::sqrt(binomial(k + j, j) * binomial(m - k - j + i, i)) *
               std::sin(std::numbers::pi * (m - k - j + i + 0.5) / (m + 1));
      for (int l = 0; l <= m; ++l) {
        Complex s = 0.0;
        const double x = phi + pegg_barnett_phase(m, l);
        for (int n = lo; n <= hi; ++n) s += w[n] * std::polar(1.0, -n * x);
        p[l] += pref * std::norm(s);
      }
    }
  }
  return OutcomeDistribution(m, std::move(p), phi);
}

/// Fast p(l; phi) for a phase-covariant family rho(phi) = e^{-i w phi n} rho0 e^{i w phi n}.
/// p_l depends on rho0 only through its diagonal sums c_d = sum_{m-n=d} rho0(n,m).
class PovmResponse {
 public:
  PovmResponse(const PhaseFamily& fam, int m) : m_(m), weight_(fam.phase_weight()), c_(m + 1) {
    const auto& r = fam.at_zero();
    if (m < 0 || r.dim() < m + 1) throw std::invalid_argument("state dimension smaller than M+1");
    for (int d = 0; d <= m; ++d) {
      Complex s = 0.0;
      for (int n = 0; n + d <= m; ++n) s += r(n, n + d);
      c_[d] = s;
    }
  }

  OutcomeDistribution at(double phi) const {
    std::vector<double> p(m_ + 1);
    const double norm = 1.0 / (m_ + 1);
    for (int l = 0; l <= m_; ++l) {
      const double x = weight_ * phi + pegg_barnett_phase(m_, l);
      double s = c_[0].real();
      for (int d = 1; d <= m_; ++d) s += 2.0 * (c_[d] * std::polar(1.0, d * x)).real();
      p[l] = s * norm;
    }
    return OutcomeDistribution(m_, std::move(p), phi);
  }

 private:
  int m_;
  int weight_;
  std::vector<Complex> c_;
};

// ---------------------------------------------------------------------------
// Error figures
// ---------------------------------------------------------------------------

/// sqrt(sum_l p(l) d(phi_hat_l, phi)^2) with d the circular distance.
inline double circular_rms(const OutcomeDistribution& dist) {
  double s = 0.0;
  for (int l = 0; l <= dist.m(); ++l) {
    const double d = circular_distance(dist.estimate(l), dist.true_phi());
    s += dist[l] * d * d;
  }
  return std::sqrt(s);
}

/// Spread about the circular mean instead of the true phase. Diagnostic only.
inline double circular_rms_about_mean(const OutcomeDistribution& dist) {
  Complex z = 0.0;
  for (int l = 0; l <= dist.m(); ++l) z += dist[l] * std::polar(1.0, dist.estimate(l));
  const double mean = std::abs(z) > 0.0 ? std::arg(z) : dist.true_phi();
  double s = 0.0;
  for (int l = 0; l <= dist.m(); ++l) {
    const double d = circular_distance(dist.estimate(l), mean);
    s += dist[l] * d * d;
  }
  return std::sqrt(s);
}

/// |<e^{i Phi}>| under the continuous phase POVM (M+1)/(2 pi) |Phi><Phi| dPhi,
/// which integrates to the first sub-diagonal sum of rho.
inline double phase_sharpness(const DensityMatrix& rho) {
  Complex s = 0.0;
  for (int n = 0; n + 1 < rho.dim(); ++n) s += rho(n + 1, n);
  return std::abs(s);
}

/// (S^-2 - 1)^{1/2}; +inf when S = 0.
inline double holevo_variance(const DensityMatrix& rho) {
  const double s = phase_sharpness(rho);
  if (s == 0.0) return kInf;
  return std::sqrt(std::max(0.0, 1.0 / (s * s) - 1.0));
}

// ---------------------------------------------------------------------------
// M&M observable and error propagation
// ---------------------------------------------------------------------------

/// True when the index sets {M-k} and {M'-k}, k = 0..M', overlap (delta <= M').
inline bool observable_a_overlaps(int m, int m_prime) { return m - m_prime <= m_prime; }

/// A = sum_{k=0}^{M'} |M-k><M'-k| + |M'-k><M-k|.
inline CMatrix observable_a(int m, int m_prime, int dim) {
  if (m_prime < 0 || m <= m_prime) throw std::invalid_argument("observable A needs M > M' >= 0");
  if (dim < m + 1) throw std::invalid_argument("dimension must be at least M+1");
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int k = 0; k <= m_prime; ++k) {
    a(m - k, m_prime - k) += 1.0;
    a(m_prime - k, m - k) += 1.0;
  }
  return a;
}

/// d/dphi tr(obs rho(phi)) for rho(phi) = e^{-i w phi n} rho0 e^{i w phi n}, evaluated at rho.
inline double phase_derivative(const DensityMatrix& rho, const CMatrix& obs, int phase_weight = 1) {
  Complex s = 0.0;
  for (int n = 0; n < rho.dim(); ++n)
    for (int k = 0; k < rho.dim(); ++k)
      if (n != k) s += obs(k, n) * Complex(0.0, -static_cast<double>(phase_weight) * (n - k)) * rho(n, k);
  return s.real();
}

inline double error_propagation(double mean, double mean_sq, double slope) {
  if (!(std::abs(slope) > 1e-12)) return kInf;
  return std::sqrt(std::max(0.0, mean_sq - mean * mean)) / std::abs(slope);
}

/// Delta A / |d<A>/dphi| from a state matrix.
inline double mm_error(const DensityMatrix& sigma, const MmStateSpec& spec, int phase_weight = 1) {
  const CMatrix a = observable_a(spec.m, spec.m_prime, sigma.dim());
  const double mean = expectation(sigma, a);
  const double mean_sq = expectation(sigma, a * a);
  const double slope = phase_derivative(sigma, a, phase_weight);
  // same cutoff as mm_error_closed: |sin(d phi) Gamma| <= 1e-12
  if (!(std::abs(slope) > 1e-12 * spec.delta())) return kInf;
  return std::sqrt(std::max(0.0, mean_sq - mean * mean)) / std::abs(slope);
}

struct MmErrorInputs {
  double theta_sum = 0.0;  // Theta
  double gamma_sum = 0.0;  // Gamma
  int delta = 1;
};

/// Theta = sum_{k=0}^{M'} alpha_k + alpha_{k-d} + beta_k + beta_{k+d}; Gamma = sum_k gamma_k.
inline MmErrorInputs mm_error_inputs(const MmCoefficients& c) {
  MmErrorInputs in;
  in.delta = c.delta();
  for (int k = 0; k <= c.m_prime; ++k) {
    in.theta_sum += c.alpha_at(k) + c.alpha_at(k - in.delta) + c.beta_at(k) + c.beta_at(k + in.delta);
    in.gamma_sum += c.gamma_at(k);
  }
  return in;
}

inline MmErrorInputs mm_error_inputs(const MmStateSpec& spec, double eta) {
  return mm_error_inputs(mm_coefficients(spec, eta));
}

/// sqrt(Theta - cos^2(d phi) Gamma^2) / (d |sin(d phi) Gamma|).
inline double mm_error_closed(const MmErrorInputs& in, double phi) {
  const double s = std::sin(in.delta * phi);
  if (!(std::abs(s * in.gamma_sum) > 1e-12)) return kInf;
  // Theta - c^2 Gamma^2 rewritten as (Theta - Gamma^2) + s^2 Gamma^2 to avoid cancellation near sin = 0
  const double g2 = in.gamma_sum * in.gamma_sum;
  const double var = std::max(0.0, in.theta_sum - g2) + s * s * g2;
  return std::sqrt(var) / (in.delta * std::abs(s * in.gamma_sum));
}

// ---------------------------------------------------------------------------
// Optimization and averaging over phi
// ---------------------------------------------------------------------------

struct PhaseOptimum {
  double phi = 0.0;
  double value = kInf;
};

struct PhaseAverage {
  double mean = kInf;
  int excluded = 0;  // non-finite grid points left out
};

/// Grid scan over [0, period) then golden-section refinement inside the best
/// cell's neighbours until the bracket is narrower than tol. Never returns a
/// value above the best grid sample.
template <class Fn>
PhaseOptimum minimize_over_phase(Fn&& fn, double period, int grid_points = 720, double tol = 1e-6) {
  if (!(period > 0.0) || grid_points < 3) throw std::invalid_argument("bad phase grid");
  const double h = period / grid_points;
  PhaseOptimum best;
  int best_k = -1;
  for (int k = 0; k < grid_points; ++k) {
    const double x = k * h;
    const double v = fn(x);
    if (std::isfinite(v) && (best_k < 0 || v < best.value)) {
      best = {x, v};
      best_k = k;
    }
  }
  if (best_k < 0) throw std::domain_error("error function is non-finite on the whole phase grid");

  constexpr double inv_phi = 0.6180339887498949;
  // A non-finite neighbour marks a singular point; the variance there is a
  // difference of nearly equal terms, so keep the refinement a half cell away.
  double a = best.phi - (std::isfinite(fn(best.phi - h)) ? h : 0.5 * h);
  double b = best.phi + (std::isfinite(fn(best.phi + h)) ? h : 0.5 * h);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = fn(x1);
  double f2 = fn(x2);
  auto lt = [](double u, double v) { return std::isfinite(u) && (!std::isfinite(v) || u < v); };
  while (b - a > tol) {
    if (lt(f1, f2)) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = fn(xm);
  for (auto [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}, std::pair{xm, fm}}) {
    if (lt(v, best.value)) best = {x, v};
  }
  best.phi = std::fmod(best.phi, period);
  if (best.phi < 0.0) best.phi += period;
  return best;
}

/// Mean over the same grid minimize_over_phase scans, skipping non-finite points.
template <class Fn>
PhaseAverage average_over_phase(Fn&& fn, double period, int grid_points = 720) {
  if (!(period > 0.0) || grid_points < 1) throw std::invalid_argument("bad phase grid");
  const double h = period / grid_points;
  double s = 0.0;
  PhaseAverage out;
  out.excluded = 0;
  for (int k = 0; k < grid_points; ++k) {
    const double v = fn(k * h);
    if (std::isfinite(v))
      s += v;
    else
      ++out.excluded;
  }
  if (out.excluded == grid_points) throw std::domain_error("error function is non-finite on the whole phase grid");
  out.mean = s / (grid_points - out.excluded);
  return out;
}

// ---------------------------------------------------------------------------
// Reference baselines
// ---------------------------------------------------------------------------

struct Baselines {
  double shot_noise = 0.0;
  double heisenberg = 0.0;
  double noon_error = 0.0;
};

/// min_phi Delta phi for (|N0>+|0N>)/sqrt(2) with loss eta in both arms:
/// <A2> = eta^N cos(N phi), <A2^2> = eta^N, so the minimum is 1/(N eta^{N/2}).
inline double noon_error_closed(double n, double eta) {
  if (!(n >= 1.0)) throw std::invalid_argument("NOON baseline needs N >= 1");
  require_transmissivity(eta);
  return 1.0 / (n * std::pow(eta, 0.5 * n));
}

inline Baselines baselines(double n, double eta) {
  if (!(n >= 1.0)) throw std::invalid_argument("baselines need N >= 1");
  require_transmissivity(eta);
  return {1.0 / std::sqrt(n * eta), 1.0 / n, noon_error_closed(n, eta)};
}

/// NOON state after independent loss eta in each arm, at phi = 0.
inline DensityMatrix lossy_noon(int n, double eta) {
  const auto psi = noon_state(n);
  const int d = psi.d1();
  const auto loss = loss_channel(eta, d);
  DensityMatrix rho = two_mode_density(psi);
  rho = apply_channel(rho, lift_to_arm(loss, 0, d, d));
  return apply_channel(rho, lift_to_arm(loss, 1, d, d));
}

/// A2 = |N,0><0,N| + |0,N><N,0|.
inline CMatrix noon_observable(int n) {
  const int d = n + 1;
  CMatrix a = CMatrix::Zero(d * d, d * d);
  a(n * d, n) = 1.0;
  a(n, n * d) = 1.0;
  return a;
}

/// Error propagation for A2 on the lossy NOON state, phase e^{i phi n1} on arm 0.
inline double noon_error_at(const DensityMatrix& lossy, int n, double phi) {
  const int d = n + 1;
  const DensityMatrix rho = apply_phase_arm0(lossy, d, d, phi);
  const CMatrix a = noon_observable(n);
  const double mean = expectation(rho, a);
  const double mean_sq = expectation(rho, a * a);
  Complex slope = 0.0;
  for (int r = 0; r < rho.dim(); ++r)
    for (int c = 0; c < rho.dim(); ++c) {
      const int dn = r / d - c / d;
      if (dn != 0 && a(c, r) != 0.0) slope += a(c, r) * Complex(0.0, static_cast<double>(dn)) * rho(r, c);
    }
  return error_propagation(mean, mean_sq, slope.real());
}

/// Brute-force two-mode Kraus evolution plus error propagation, minimized over phi.
inline PhaseOptimum noon_error_bruteforce(int n, double eta, int grid_points = 720) {
  const DensityMatrix lossy = lossy_noon(n, eta);
  return minimize_over_phase([&](double phi) { return noon_error_at(lossy, n, phi); }, kTwoPi / n, grid_points);
}

}  // namespace interf
