#pragma once

#include <cmath>
#include <limits>

#include "qfd/errors.hpp"
#include "qfd/fclass.hpp"
#include "qfd/qmat.hpp"

namespace qfd {

// Joint spectral data of a pair of faithful states: eigenvalues s_i of
// sigma, r_j of rho, and weights w_ij = |(U_sigma^* U_rho)_ij|^2 r_j.  The
// relative modular operator acting on rho^{1/2} has spectrum {s_i / r_j}
// with exactly these weights, so every spectral functional of the pair
// reduces to a weighted sum over ratios.
struct relative_modular_spectrum {
  rvec sigma_eigs;
  rvec rho_eigs;
  Eigen::MatrixXd weights;  // indexed (i, j) = (sigma level, rho level)

  relative_modular_spectrum(const density_operator& rho,
                            const density_operator& sigma) {
    if (rho.dim() != sigma.dim())
      throw dimension_mismatch("states live on different spaces");
    sigma_eigs = sigma.eigenvalues();
    rho_eigs = rho.eigenvalues();
    const cmat overlap = sigma.eigenvectors().adjoint() * rho.eigenvectors();
    const int n = rho.dim();
    weights.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        weights(i, j) = std::norm(overlap(i, j)) * rho_eigs(j);
    const double total = weights.sum();
    if (std::abs(total - 1.0) > 1e-9)
      throw convergence_failure("modular weights sum to " +
                                std::to_string(total));
  }

  int dim() const { return static_cast<int>(rho_eigs.size()); }

  // sum_ij w_ij g(s_i / r_j) for a scalar g.
  template <class G>
  double apply_scalar(G&& g) const {
    const int n = dim();
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += weights(i, j) * g(sigma_eigs(i) / rho_eigs(j));
    return acc;
  }

  double apply(const f_function& f) const {
    return apply_scalar([&f](double x) { return f.eval(x); });
  }

  // sum_ij w_ij (s_i / r_j)^p  ( = tr rho^{1/2} sigma^p rho^{1/2} rho^{-p} ).
  double moment(double p) const {
    return apply_scalar([p](double x) { return std::pow(x, p); });
  }
};

// Q_f(rho || sigma) = <rho^{1/2}| f(Delta(sigma, rho)) |rho^{1/2}>.
inline double standard_f_divergence(const density_operator& rho,
                                    const density_operator& sigma,
                                    const f_function& f) {
  return relative_modular_spectrum(rho, sigma).apply(f);
}

// Q_lambda = <rho^{1/2}| (lambda + Delta)^{-1} |rho^{1/2}>, lambda >= 0.
inline double q_lambda(const relative_modular_spectrum& rms, double lambda) {
  if (lambda < 0.0)
    throw negative_lambda("resolvent parameter must be nonnegative");
  return rms.apply_scalar([lambda](double x) { return 1.0 / (lambda + x); });
}

inline double q_lambda(const density_operator& rho,
                       const density_operator& sigma, double lambda) {
  return q_lambda(relative_modular_spectrum(rho, sigma), lambda);
}

// Relative entropy tr rho (ln rho - ln sigma), in nats.
inline double umegaki(const density_operator& rho,
                      const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  double h = 0.0;
  for (int i = 0; i < rho.dim(); ++i) {
    const double r = rho.eigenvalues()(i);
    h += r * std::log(r);
  }
  const double cross = (rho.matrix() * sigma.log()).trace().real();
  return h - cross;
}

// tr rho^{-1} sigma^2, the second moment of the modular spectrum.
inline double q_quadratic(const density_operator& rho,
                          const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  return (sigma.matrix() * rho.power(-1.0) * sigma.matrix()).trace().real();
}

// tr rho^2 sigma^{-1}, the inverse moment of the modular spectrum.
inline double q_inverse(const density_operator& rho,
                        const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  return (rho.matrix() * sigma.power(-1.0) * rho.matrix()).trace().real();
}

// Q_s = tr rho^{1-s} sigma^s for s in (-1, 0) u (0, 1).
inline double petz_renyi_quasi(const density_operator& rho,
                               const density_operator& sigma, double s) {
  if (!(s > -1.0 && s < 1.0) || s == 0.0)
    throw domain_error("power parameter must lie in (-1,0) or (0,1)");
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  return (rho.power(1.0 - s) * sigma.power(s)).trace().real();
}

// D_alpha = ln( tr rho^alpha sigma^{1-alpha} ) / (alpha - 1) for
// alpha in (0, 1) u (1, 2).
inline double petz_renyi(const density_operator& rho,
                         const density_operator& sigma, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
    throw domain_error("order must lie in (0,1) or (1,2)");
  const double q = petz_renyi_quasi(rho, sigma, 1.0 - alpha);
  return std::log(q) / (alpha - 1.0);
}

// (tr rho^{1/2} sigma^{1/2})^2.
inline double holevo_fidelity(const density_operator& rho,
                              const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  const double t = (rho.sqrt() * sigma.sqrt()).trace().real();
  return t * t;
}

// (tr |rho^{1/2} sigma^{1/2}|)^2 = | rho^{1/2} sigma rho^{1/2} |_{1/2}.
inline double uhlmann_fidelity(const density_operator& rho,
                               const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  const double t = trace_norm(rho.sqrt() * sigma.sqrt());
  return t * t;
}

// Sandwiched quasi-divergence
//   Q~_alpha = | rho^{1/2} sigma^{(1-alpha)/alpha} rho^{1/2} |_alpha
// for alpha in (1/2, 1) u (1, inf); alpha = 1/2 evaluates to the Uhlmann
// fidelity and alpha = inf to the max-divergence base quantity
// | rho^{1/2} sigma^{-1} rho^{1/2} |_inf.
inline double sandwiched_quasi(const density_operator& rho,
                               const density_operator& sigma, double alpha) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("states live on different spaces");
  if (alpha == 0.5) return uhlmann_fidelity(rho, sigma);
  if (std::isinf(alpha)) {
    const cmat a = rho.sqrt() * sigma.power(-1.0) * rho.sqrt();
    return schatten_norm(a, std::numeric_limits<double>::infinity());
  }
  if (!(alpha > 0.5) || alpha == 1.0)
    throw domain_error("order must be 1/2, in (1/2,1) u (1,inf), or inf");
  const double expo = (1.0 - alpha) / alpha;  // = -1/alpha'
  const cmat a = rho.sqrt() * sigma.power(expo) * rho.sqrt();
  return schatten_norm(a, alpha);
}

// D~_alpha = alpha' ln Q~_alpha with alpha' = alpha/(alpha-1); at
// alpha = 1/2 this is -ln F and at alpha = inf it is ln Q~_inf.
inline double sandwiched(const density_operator& rho,
                         const density_operator& sigma, double alpha) {
  const double q = sandwiched_quasi(rho, sigma, alpha);
  if (std::isinf(alpha)) return std::log(q);
  const double conj = alpha / (alpha - 1.0);
  return conj * std::log(q);
}

}  // namespace qfd
