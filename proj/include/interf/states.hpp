// Input states, Pegg-Barnett phase vectors and the two-mode NOON baseline.
#pragma once

#include "interf/fock.hpp"

namespace interf {

/// Sine-amplitude optimal phase state; mean photon number M/2.
struct OptimalPhaseStateSpec {
  int m = 1;

  explicit OptimalPhaseStateSpec(int m_) : m(m_) {
    if (m < 1) throw std::invalid_argument("optimal phase state needs M >= 1");
  }
  double n_avg() const { return 0.5 * m; }
};

/// (|M> + |M'>)/sqrt(2) with M > M' >= 0.
struct MmStateSpec {
  int m = 1;
  int m_prime = 0;

  MmStateSpec(int m_, int m_prime_) : m(m_), m_prime(m_prime_) {
    if (m_prime < 0 || m <= m_prime) throw std::invalid_argument("M&M state needs M > M' >= 0");
  }
  int delta() const { return m - m_prime; }
  double n_avg() const { return 0.5 * (m + m_prime); }

  /// The NO state (|2N> + |0>)/sqrt(2).
  static MmStateSpec no_state(int n) { return MmStateSpec(2 * n, 0); }
};

inline FockVector optimal_phase_state(const OptimalPhaseStateSpec& spec) {
  const int m = spec.m;
  CVector amps(m + 1);
  const double pref = std::sqrt(2.0 / (m + 1));
  for (int n = 0; n <= m; ++n) amps(n) = pref * std::sin(std::numbers::pi * (n + 0.5) / (m + 1));
  return FockVector(std::move(amps));
}

inline FockVector optimal_phase_state(int m) { return optimal_phase_state(OptimalPhaseStateSpec(m)); }

/// Truncated to dimension M+1, the smallest space the round trip needs.
inline FockVector mm_state(const MmStateSpec& spec) {
  CVector amps = CVector::Zero(spec.m + 1);
  amps(spec.m) = std::numbers::sqrt2 / 2.0;
  amps(spec.m_prime) = std::numbers::sqrt2 / 2.0;
  return FockVector(std::move(amps));
}

/// Phase value of the l-th discrete Pegg-Barnett outcome, 2 pi l / (M+1).
inline double pegg_barnett_phase(int m, int l) { return 2.0 * std::numbers::pi * l / (m + 1); }

/// |Phi> = sum_{n=0}^{M} e^{i n Phi} |n> / sqrt(M+1).
inline FockVector pegg_barnett_vector(int m, double phase) {
  if (m < 0) throw std::invalid_argument("Pegg-Barnett vector needs M >= 0");
  require_finite(phase, "Pegg-Barnett phase");
  CVector amps(m + 1);
  const double s = 1.0 / std::sqrt(static_cast<double>(m + 1));
  for (int n = 0; n <= m; ++n) amps(n) = std::polar(s, n * phase);
  return FockVector(std::move(amps));
}

// ---------------------------------------------------------------------------
// Two-mode product space, used only for the NOON baseline.
// ---------------------------------------------------------------------------

/// Amplitudes over |n1> (x) |n2>, flattened as n1 * d2 + n2.
class TwoModeFockVector {
 public:
  TwoModeFockVector(int d1, int d2, CVector amps) : d1_(d1), d2_(d2), amps_(std::move(amps)) {
    if (d1 < 1 || d2 < 1 || amps_.size() != static_cast<Eigen::Index>(d1) * d2)
      throw std::invalid_argument("two-mode amplitude shape mismatch");
    const double n = amps_.norm();
    if (!(n > 0.0)) throw std::invalid_argument("two-mode amplitudes cannot be normalized");
    if (std::abs(n - 1.0) > kNormTol) amps_ /= n;
  }

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  int dim() const { return d1_ * d2_; }
  int index(int n1, int n2) const { return n1 * d2_ + n2; }
  Complex operator()(int n1, int n2) const { return amps_(index(n1, n2)); }
  const CVector& amps() const { return amps_; }

 private:
  int d1_;
  int d2_;
  CVector amps_;
};

/// (|N,0> + |0,N>)/sqrt(2) in the (N+1)x(N+1) product space.
inline TwoModeFockVector noon_state(int n) {
  if (n < 1) throw std::invalid_argument("NOON state needs N >= 1");
  const int d = n + 1;
  CVector amps = CVector::Zero(d * d);
  amps(n * d + 0) = std::numbers::sqrt2 / 2.0;
  amps(0 * d + n) = std::numbers::sqrt2 / 2.0;
  return TwoModeFockVector(d, d, std::move(amps));
}

inline DensityMatrix two_mode_density(const TwoModeFockVector& psi) {
  return DensityMatrix(psi.amps() * psi.amps().adjoint());
}

/// Kronecker product a (x) b for square matrices.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Lifts a single-mode channel onto arm 0 or arm 1 of a d1 x d2 product space.
inline KrausChannel lift_to_arm(const KrausChannel& ch, int arm, int d1, int d2) {
  if (arm != 0 && arm != 1) throw std::invalid_argument("arm must be 0 or 1");
  if ((arm == 0 ? d1 : d2) != ch.dim()) throw std::invalid_argument("channel dimension does not match arm");
  std::vector<CMatrix> ks;
  ks.reserve(ch.kraus().size());
  for (const auto& k : ch.kraus())
    ks.push_back(arm == 0 ? kron(k, CMatrix::Identity(d2, d2)) : kron(CMatrix::Identity(d1, d1), k));
  return KrausChannel(std::move(ks));
}

/// e^{i phi n1} on arm 0 of a two-mode density matrix.
inline DensityMatrix apply_phase_arm0(const DensityMatrix& rho, int d1, int d2, double phi) {
  require_finite(phi, "phase");
  if (rho.dim() != d1 * d2) throw std::invalid_argument("two-mode dimension mismatch");
  CVector ph(d1 * d2);
  for (int n1 = 0; n1 < d1; ++n1)
    for (int n2 = 0; n2 < d2; ++n2) ph(n1 * d2 + n2) = std::polar(1.0, n1 * phi);
  return DensityMatrix(ph.asDiagonal() * rho.elems() * ph.conjugate().asDiagonal());
}

}  // namespace interf
