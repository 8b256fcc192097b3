#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "qfd/errors.hpp"

namespace qfd {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

// A Hilbert--Schmidt vector is just a matrix carried with the tr(x^* y)
// inner product; no separate wrapper type is needed.
using hs_vector = cmat;

inline cplx hs_inner(const hs_vector& x, const hs_vector& y) {
  return (x.adjoint() * y).trace();
}

inline double hs_norm(const hs_vector& x) { return x.norm(); }

inline cmat identity(int dim) { return cmat::Identity(dim, dim); }

inline cmat tensor(const cmat& a, const cmat& b) {
  cmat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline void check_square(const cmat& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw dimension_mismatch("expected a nonempty square matrix, got " +
                             std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()));
}

inline double max_abs_entry(const cmat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const cmat& a, double tol_scale = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double tol = tol_scale * std::max(1.0, max_abs_entry(a));
  return max_abs_entry(a - a.adjoint()) <= tol;
}

inline void check_hermitian(const cmat& a) {
  check_square(a);
  if (!is_hermitian(a))
    throw non_hermitian_input("matrix deviates from its adjoint beyond tolerance");
}

// Eigen-decomposition of a Hermitian matrix with deterministic phases:
// eigenvalues ascending, each eigenvector rotated so its largest-modulus
// component is real and positive.
struct spectral_decomposition {
  rvec eigenvalues;    // ascending
  cmat eigenvectors;   // column i pairs with eigenvalues(i)

  int dim() const { return static_cast<int>(eigenvalues.size()); }

  cmat reconstruct() const {
    return eigenvectors * eigenvalues.cast<cplx>().asDiagonal() *
           eigenvectors.adjoint();
  }
};

inline spectral_decomposition eig_hermitian(const cmat& a) {
  check_hermitian(a);
  const cmat sym = (a + a.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<cmat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw convergence_failure("Hermitian eigensolver did not converge");
  spectral_decomposition sd{solver.eigenvalues(), solver.eigenvectors()};
  const int n = sd.dim();
  for (int j = 0; j < n; ++j) {
    int imax = 0;
    sd.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    const cplx pivot = sd.eigenvectors(imax, j);
    const double mag = std::abs(pivot);
    if (mag > 0.0) sd.eigenvectors.col(j) *= std::conj(pivot) / mag;
  }
  const double unit_err = (sd.eigenvectors.adjoint() * sd.eigenvectors -
                           cmat::Identity(n, n))
                              .norm();
  if (unit_err > 1e-10 * n)
    throw convergence_failure("eigenvector matrix is not unitary");
  const double rec_err = (sd.reconstruct() - sym).norm();
  if (rec_err > 1e-10 * n * std::max(sym.norm(), 1e-300))
    throw convergence_failure("spectral reconstruction error too large");
  return sd;
}

// U g(lambda) U^* for a scalar function g acting on the spectrum.  g may
// return double or complex values.
template <class F>
cmat matrix_function(const spectral_decomposition& sd, F&& g) {
  const int n = sd.dim();
  cvec d(n);
  for (int i = 0; i < n; ++i) d(i) = cplx(g(sd.eigenvalues(i)));
  return sd.eigenvectors * d.asDiagonal() * sd.eigenvectors.adjoint();
}

template <class F>
cmat matrix_function(const cmat& a, F&& g) {
  return matrix_function(eig_hermitian(a), std::forward<F>(g));
}

// a^z for Hermitian positive semidefinite a and complex z, with
// lambda^z = exp(z log lambda).  Zero eigenvalues are admitted only when
// Re z > 0 (giving 0) or z == 0 (giving 1); otherwise the matrix is
// reported singular.  Negative eigenvalues beyond roundoff are a domain
// error.
inline cmat complex_power(const spectral_decomposition& sd, cplx z) {
  const int n = sd.dim();
  const double lam_max = sd.eigenvalues(n - 1);
  const double zero_tol = 1e-12 * std::max(1.0, std::abs(lam_max));
  cvec d(n);
  for (int i = 0; i < n; ++i) {
    double lam = sd.eigenvalues(i);
    if (lam < -zero_tol)
      throw domain_error("complex power of a matrix with negative spectrum");
    if (lam <= zero_tol) lam = 0.0;
    if (lam == 0.0) {
      if (z == cplx(0.0, 0.0)) {
        d(i) = 1.0;
      } else if (z.real() > 0.0) {
        d(i) = 0.0;
      } else {
        throw singular_matrix("complex power with nonpositive real exponent "
                              "of a singular matrix");
      }
    } else {
      d(i) = std::exp(z * std::log(lam));
    }
  }
  return sd.eigenvectors * d.asDiagonal() * sd.eigenvectors.adjoint();
}

inline cmat complex_power(const cmat& a, cplx z) {
  return complex_power(eig_hermitian(a), z);
}

inline rvec singular_values(const cmat& a) {
  Eigen::JacobiSVD<cmat> svd(a);
  return svd.singularValues();
}

// Schatten p-(quasi)norm for p in (0, inf].
inline double schatten_norm(const cmat& a, double p) {
  if (!(p > 0.0)) throw domain_error("Schatten norm requires p > 0");
  const rvec s = singular_values(a);
  if (s.size() == 0) return 0.0;
  if (std::isinf(p)) return s(0);
  if (p == 1.0) return s.sum();
  if (p == 2.0) return s.norm();
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) acc += std::pow(s(i), p);
  return std::pow(acc, 1.0 / p);
}

inline double trace_norm(const cmat& a) { return schatten_norm(a, 1.0); }

inline double trace_distance(const cmat& a, const cmat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw dimension_mismatch("trace distance of differently shaped matrices");
  return trace_norm(a - b);
}

// Partial trace over one tensor factor of an operator on C^dl (x) C^dr.
// keep == 0 returns the left-factor reduction, keep == 1 the right one.
inline cmat partial_trace(const cmat& a, int dim_left, int dim_right,
                          int keep) {
  check_square(a);
  if (dim_left <= 0 || dim_right <= 0 ||
      a.rows() != static_cast<long>(dim_left) * dim_right)
    throw dimension_mismatch("factor dimensions do not match the operator");
  if (keep != 0 && keep != 1)
    throw domain_error("keep selector must be 0 (left) or 1 (right)");
  if (keep == 0) {
    cmat out = cmat::Zero(dim_left, dim_left);
    for (int i = 0; i < dim_left; ++i)
      for (int j = 0; j < dim_left; ++j)
        for (int k = 0; k < dim_right; ++k)
          out(i, j) += a(i * dim_right + k, j * dim_right + k);
    return out;
  }
  cmat out = cmat::Zero(dim_right, dim_right);
  for (int i = 0; i < dim_right; ++i)
    for (int j = 0; j < dim_right; ++j)
      for (int k = 0; k < dim_left; ++k)
        out(i, j) += a(k * dim_right + i, k * dim_right + j);
  return out;
}

// Faithful density operator: unit trace, spectrum floored at
// k_floor_ratio times the largest eigenvalue and renormalized, with the
// spectral decomposition cached for repeated functional calculus.
class density_operator {
 public:
  static constexpr double k_floor_ratio = 1e-12;
  static constexpr double k_trace_tol = 1e-10;
  static constexpr double k_negativity_tol = 1e-12;

  static density_operator from_matrix(const cmat& m) {
    check_square(m);
    if (!is_hermitian(m))
      throw non_hermitian_input("density operator must be Hermitian");
    spectral_decomposition sd = eig_hermitian(m);
    const int n = sd.dim();
    const double tr = sd.eigenvalues.sum();
    if (std::abs(tr - 1.0) > k_trace_tol)
      throw invalid_density("density operator trace deviates from 1 by " +
                            std::to_string(tr - 1.0));
    if (sd.eigenvalues(0) < -k_negativity_tol)
      throw invalid_density("density operator has eigenvalue " +
                            std::to_string(sd.eigenvalues(0)));
    const double lam_max = sd.eigenvalues(n - 1);
    if (!(lam_max > 0.0))
      throw invalid_density("density operator has no positive eigenvalue");
    const double floor = k_floor_ratio * lam_max;
    for (int i = 0; i < n; ++i)
      sd.eigenvalues(i) = std::max(sd.eigenvalues(i), floor);
    sd.eigenvalues /= sd.eigenvalues.sum();
    density_operator rho;
    rho.sd_ = std::move(sd);
    rho.m_ = rho.sd_.reconstruct();
    return rho;
  }

  // Row-major [re, im] pairs, as used by the state-file format.
  static density_operator from_entries(int dim, const double* re_im) {
    cmat m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double* p = re_im + 2 * (i * dim + j);
        m(i, j) = cplx(p[0], p[1]);
      }
    return from_matrix(m);
  }

  int dim() const { return sd_.dim(); }
  const cmat& matrix() const { return m_; }
  const spectral_decomposition& spec() const { return sd_; }
  const rvec& eigenvalues() const { return sd_.eigenvalues; }
  const cmat& eigenvectors() const { return sd_.eigenvectors; }
  double min_eigenvalue() const { return sd_.eigenvalues(0); }

  cmat power(double p) const { return complex_power(sd_, cplx(p, 0.0)); }
  cmat cpower(cplx z) const { return complex_power(sd_, z); }
  cmat sqrt() const { return power(0.5); }
  cmat log() const {
    return matrix_function(sd_, [](double x) { return std::log(x); });
  }

 private:
  density_operator() = default;
  cmat m_;
  spectral_decomposition sd_;
};

inline double trace_distance(const density_operator& a,
                             const density_operator& b) {
  return trace_distance(a.matrix(), b.matrix());
}

// --- deterministic randomness -------------------------------------------

// splitmix64 step, used to derive independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

// Standard-normal stream built on mt19937_64 with an explicit Box--Muller
// transform, so the sequence is identical on every platform (the standard
// does not pin down std::normal_distribution).
class gaussian_stream {
 public:
  explicit gaussian_stream(std::uint64_t seed) : eng_(seed) {}

  double uniform01() {  // in (0, 1]
    const std::uint64_t v = eng_();
    return static_cast<double>((v >> 11) + 1) * 0x1.0p-53;
  }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  cplx normal_complex() {
    const double re = normal();
    const double im = normal();
    return cplx(re, im);
  }

 private:
  std::mt19937_64 eng_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

inline cmat ginibre(int rows, int cols, gaussian_stream& g) {
  cmat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g.normal_complex();
  return m;
}

// Unnormalized-spectrum Wishart state G G^* / tr(G G^*) with G a dim x rank
// Ginibre block; rank < dim yields a rank-deficient matrix (before any
// clipping by density_operator).
inline cmat random_density_raw(int dim, int rank, std::uint64_t seed) {
  if (dim <= 0) throw dimension_mismatch("dimension must be positive");
  if (rank < 1 || rank > dim)
    throw invalid_rank("rank " + std::to_string(rank) +
                       " outside [1, " + std::to_string(dim) + "]");
  gaussian_stream g(seed);
  const cmat gm = ginibre(dim, rank, g);
  const cmat prod = gm * gm.adjoint();
  cmat w = (prod + prod.adjoint()) / 2.0;
  const double tr = w.real().trace();
  if (!(tr > 0.0)) throw invalid_density("degenerate random draw");
  return w / tr;
}

inline density_operator random_density(int dim, int rank,
                                       std::uint64_t seed) {
  return density_operator::from_matrix(random_density_raw(dim, rank, seed));
}

inline density_operator random_density(int dim, std::uint64_t seed) {
  return random_density(dim, dim, seed);
}

// Haar-distributed unitary via QR of a Ginibre matrix with the standard
// phase correction.
inline cmat random_unitary(int dim, std::uint64_t seed) {
  if (dim <= 0) throw dimension_mismatch("dimension must be positive");
  gaussian_stream g(seed);
  const cmat gm = ginibre(dim, dim, g);
  Eigen::HouseholderQR<cmat> qr(gm);
  cmat q = qr.householderQ();
  const cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : cplx(1.0, 0.0);
  }
  return q;
}

}  // namespace qfd
