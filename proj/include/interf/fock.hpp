// Truncated single-mode Fock-space linear algebra.
//
// States live on the basis |0>..|D-1>. Density matrices, Kraus channels and
// the index-reversal unitary are dense Eigen matrices; D stays at a few
// hundred at most.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace interf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-9;
inline constexpr double kCompletenessTol = 1e-10;

#ifdef NDEBUG
inline constexpr bool kCheckInvariants = false;
#else
inline constexpr bool kCheckInvariants = true;
#endif

/// Binomial coefficient C(n, k) as a double. Exact through integer arithmetic
/// for n <= 60, log-gamma above that.
inline double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  if (n <= 60) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(r);
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

inline void require_transmissivity(double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("transmissivity eta must lie in (0, 1], got " + std::to_string(eta));
}

// ---------------------------------------------------------------------------
// FockVector
// ---------------------------------------------------------------------------

/// Normalized pure state of one optical mode over |0>..|D-1>.
class FockVector {
 public:
  /// Normalizes `amps`; rejects an empty or zero vector.
  explicit FockVector(CVector amps) : amps_(std::move(amps)) {
    if (amps_.size() < 1) throw std::invalid_argument("FockVector needs dim >= 1");
    const double n = amps_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("FockVector amplitudes cannot be normalized");
    if (std::abs(n - 1.0) > kNormTol) amps_ /= n;
  }

  static FockVector basis(int n, int dim) {
    if (n < 0 || n >= dim) throw std::invalid_argument("basis index outside truncation");
    CVector v = CVector::Zero(dim);
    v(n) = 1.0;
    return FockVector(std::move(v));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amps() const { return amps_; }
  Complex operator[](int n) const { return amps_(n); }

  double mean_photon_number() const {
    double s = 0.0;
    for (int n = 0; n < dim(); ++n) s += n * std::norm(amps_(n));
    return s;
  }

 private:
  CVector amps_;
};

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

struct DensityDiagnostics {
  double hermiticity_error = 0.0;  // max |rho - rho^dagger| elementwise
  double trace_error = 0.0;        // |tr rho - 1|
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermiticity_error <= kHermitianTol && trace_error <= kTraceTol && min_eigenvalue >= -kPositivityTol;
  }
};

class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix elems) : elems_(std::move(elems)) {
    if (elems_.rows() < 1 || elems_.rows() != elems_.cols())
      throw std::invalid_argument("density matrix must be square with dim >= 1");
  }

  static DensityMatrix pure(const FockVector& psi) { return DensityMatrix(psi.amps() * psi.amps().adjoint()); }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  int dim() const { return static_cast<int>(elems_.rows()); }
  const CMatrix& elems() const { return elems_; }
  Complex operator()(int n, int m) const { return elems_(n, m); }
  Complex trace() const { return elems_.trace(); }

  /// Full invariant check; the eigenvalue solve dominates for large D.
  DensityDiagnostics diagnose() const {
    DensityDiagnostics d;
    d.hermiticity_error = (elems_ - elems_.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(elems_.trace() - Complex(1.0));
    const CMatrix herm = 0.5 * (elems_ + elems_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    return d;
  }

  /// Throws std::domain_error when any invariant is violated.
  void check() const {
    const auto d = diagnose();
    if (!d.ok())
      throw std::domain_error("invalid density matrix: hermiticity " + std::to_string(d.hermiticity_error) +
                              ", trace " + std::to_string(d.trace_error) + ", min eigenvalue " +
                              std::to_string(d.min_eigenvalue));
  }

 private:
  CMatrix elems_;
};

inline double max_abs_difference(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  return (a.elems() - b.elems()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Phase shift e^{i phi a^dagger a}
// ---------------------------------------------------------------------------

inline FockVector apply_phase(const FockVector& psi, double phi) {
  require_finite(phi, "phase");
  CVector out = psi.amps();
  for (int n = 0; n < psi.dim(); ++n) out(n) *= std::polar(1.0, n * phi);
  return FockVector(std::move(out));
}

inline DensityMatrix apply_phase(const DensityMatrix& rho, double phi) {
  require_finite(phi, "phase");
  const int d = rho.dim();
  CVector ph(d);
  for (int n = 0; n < d; ++n) ph(n) = std::polar(1.0, n * phi);
  CMatrix out = ph.asDiagonal() * rho.elems() * ph.conjugate().asDiagonal();
  return DensityMatrix(std::move(out));
}

// ---------------------------------------------------------------------------
// Kraus channels
// ---------------------------------------------------------------------------

class KrausChannel {
 public:
  explicit KrausChannel(std::vector<CMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
    const auto d = kraus_.front().rows();
    for (const auto& k : kraus_)
      if (k.rows() != d || k.cols() != d) throw std::invalid_argument("Kraus operators must share one square shape");
  }

  static KrausChannel identity(int dim) { return KrausChannel({CMatrix::Identity(dim, dim)}); }

  int dim() const { return static_cast<int>(kraus_.front().rows()); }
  const std::vector<CMatrix>& kraus() const { return kraus_; }

  /// max |sum_i K_i^dagger K_i - I| elementwise.
  double completeness_error() const {
    CMatrix s = CMatrix::Zero(dim(), dim());
    for (const auto& k : kraus_) s.noalias() += k.adjoint() * k;
    return (s - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

 private:
  std::vector<CMatrix> kraus_;
};

/// Photon-loss channel of transmissivity eta on D levels. K_i for i = 0..D-1
/// with K_i|n> = sqrt(C(n,i)) (1-eta)^{i/2} eta^{(n-i)/2} |n-i>.
inline KrausChannel loss_channel(double eta, int dim) {
  require_transmissivity(eta);
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  std::vector<CMatrix> ks;
  ks.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    CMatrix k = CMatrix::Zero(dim, dim);
    for (int n = i; n < dim; ++n)
      k(n - i, n) = std::sqrt(binomial(n, i)) * std::pow(1.0 - eta, 0.5 * i) * std::pow(eta, 0.5 * (n - i));
    ks.push_back(std::move(k));
  }
  return KrausChannel(std::move(ks));
}

inline DensityMatrix apply_channel(const DensityMatrix& rho, const KrausChannel& ch) {
  if (rho.dim() != ch.dim()) throw std::invalid_argument("channel and state dimensions differ");
  CMatrix out = CMatrix::Zero(rho.dim(), rho.dim());
  CMatrix tmp(rho.dim(), rho.dim());
  for (const auto& k : ch.kraus()) {
    if (k.isZero(0.0)) continue;
    tmp.noalias() = k * rho.elems();
    out.noalias() += tmp * k.adjoint();
  }
  DensityMatrix res(std::move(out));
  if constexpr (kCheckInvariants) res.check();
  return res;
}

// ---------------------------------------------------------------------------
// Index-reversal unitary U = sum_{n<=M} |M-n><n| + sum_{n>M} |n><n|
// ---------------------------------------------------------------------------

class PermutationUnitary {
 public:
  PermutationUnitary(int m, int dim) : m_(m), dim_(dim) {
    if (m < 0) throw std::invalid_argument("permutation parameter M must be >= 0");
    if (dim < m + 1) throw std::invalid_argument("dimension must be at least M+1");
  }

  int m() const { return m_; }
  int dim() const { return dim_; }

  int image(int n) const { return n <= m_ ? m_ - n : n; }

  CMatrix matrix() const {
    CMatrix u = CMatrix::Zero(dim_, dim_);
    for (int n = 0; n < dim_; ++n) u(image(n), n) = 1.0;
    return u;
  }

  FockVector apply(const FockVector& psi) const {
    check_dim(psi.dim());
    CVector out(dim_);
    for (int n = 0; n < dim_; ++n) out(image(n)) = psi[n];
    return FockVector(std::move(out));
  }

  DensityMatrix apply(const DensityMatrix& rho) const {
    check_dim(rho.dim());
    CMatrix out(dim_, dim_);
    for (int n = 0; n < dim_; ++n)
      for (int k = 0; k < dim_; ++k) out(image(n), image(k)) = rho(n, k);
    return DensityMatrix(std::move(out));
  }

 private:
  void check_dim(int d) const {
    if (d != dim_) throw std::invalid_argument("state dimension does not match permutation");
  }
  int m_;
  int dim_;
};

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

inline CMatrix number_operator(int dim) {
  CMatrix n = CMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline double hermiticity_error(const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

/// tr(rho * obs) for a Hermitian observable.
inline double expectation(const DensityMatrix& rho, const CMatrix& obs) {
  if (obs.rows() != rho.dim() || obs.cols() != rho.dim())
    throw std::invalid_argument("observable and state dimensions differ");
  if (hermiticity_error(obs) > 1e-10) throw std::invalid_argument("observable is not Hermitian");
  const Complex v = (rho.elems().cwiseProduct(obs.transpose())).sum();
  const double scale = std::max(1.0, obs.cwiseAbs().maxCoeff());
  if (std::abs(v.imag()) > 1e-10 * scale)
    throw std::domain_error("expectation value has imaginary part " + std::to_string(v.imag()));
  return v.real();
}

}  // namespace interf
