#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qfd/divergence.hpp"
#include "qfd/errors.hpp"
#include "qfd/fclass.hpp"
#include "qfd/qmat.hpp"

namespace qfd {

// Optimized divergences: the supremum over faithful states omega of
//
//   <rho^{1/2}| f(Delta(sigma, omega)) |rho^{1/2}>
//
// for operator anti-monotone f.  Power-law members have closed-form
// extremizers (Holder duality); everything else is handled by a projected
// gradient ascent over the parameterization omega = H^2 / tr(H^2).

struct optimizer_config {
  double gradient_step = 1e-5;    // central-difference step in H space
  int max_iterations = 500;       // hard cap on ascent iterations
  double improvement_tol = 1e-9;  // relative improvement considered "flat"
  int patience = 5;               // flat steps in a row before declaring done
  double initial_step = 0.25;     // starting line-search step length
};

struct optimization_result {
  double value;                      // best objective value reached
  density_operator optimizer_state;  // omega achieving it (faithful)
  int iterations;                    // ascent iterations consumed
  bool converged;                    // improvement stayed flat long enough
  double gap_estimate;               // value minus closed form (NaN if none)
};

namespace detail {

inline void check_opt_inputs(const density_operator& rho,
                             const density_operator& sigma,
                             const density_operator& omega) {
  if (rho.dim() != sigma.dim() || rho.dim() != omega.dim())
    throw dimension_mismatch("optimized divergence needs equal dimensions");
  if (!(rho.min_eigenvalue() > 0.0) || !(sigma.min_eigenvalue() > 0.0) ||
      !(omega.min_eigenvalue() > 0.0))
    throw non_faithful("optimized divergence needs faithful states");
}

}  // namespace detail

// The inner objective of the optimized divergence at a fixed omega: the
// double sum over eigenvalue ratios s_i / w_j of (sigma, omega), weighted by
// |<s_i| rho^{1/2} |w_j>|^2.
inline double opt_objective(const density_operator& rho,
                            const density_operator& sigma,
                            const density_operator& omega,
                            const f_function& f) {
  detail::check_opt_inputs(rho, sigma, omega);
  const cmat m = sigma.eigenvectors().adjoint() * rho.sqrt() *
                 omega.eigenvectors();
  const int n = rho.dim();
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      acc += std::norm(m(i, j)) *
             f.eval(sigma.eigenvalues()(i) / omega.eigenvalues()(j));
  return acc;
}

// Closed-form optimizer for the power family.  With alpha' = alpha/(alpha-1)
// and A = rho^{1/2} sigma^{-1/alpha'} rho^{1/2}, the extremizer is
// A^alpha / tr(A^alpha) and the optimal value is the Schatten alpha-(quasi-)
// norm of A: +||A||_alpha for alpha > 1 (f = x^{-1/alpha'}) and -||A||_alpha
// for alpha in (1/2, 1) (f = -x^{-1/alpha'}).
inline optimization_result holder_extremizer(const density_operator& rho,
                                             const density_operator& sigma,
                                             double alpha) {
  if (!((alpha > 0.5 && alpha < 1.0) || alpha > 1.0) ||
      !std::isfinite(alpha))
    throw param_out_of_range("alpha must lie in (1/2,1) or (1,inf)");
  detail::check_opt_inputs(rho, sigma, rho);
  const double expo = (1.0 - alpha) / alpha;  // equals -1/alpha'
  const cmat sq = rho.sqrt();
  const cmat a_raw = sq * sigma.power(expo) * sq;
  const cmat a = (a_raw + a_raw.adjoint()) / 2.0;
  const spectral_decomposition asd = eig_hermitian(a);
  double sum = 0.0;
  for (int i = 0; i < asd.dim(); ++i)
    sum += std::pow(std::max(asd.eigenvalues(i), 0.0), alpha);
  const double norm_alpha = std::pow(sum, 1.0 / alpha);
  cmat state = matrix_function(
      asd, [alpha](double x) { return std::pow(std::max(x, 0.0), alpha); });
  state /= state.trace().real();
  const cmat state_h = (state + state.adjoint()).eval() / 2.0;
  return optimization_result{
      alpha > 1.0 ? norm_alpha : -norm_alpha,
      density_operator::from_matrix(state_h), 0, true, 0.0};
}

namespace detail {

// Orthonormal Hermitian basis of d x d matrices for the HS inner product.
inline std::vector<cmat> hermitian_basis(int d) {
  std::vector<cmat> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < d; ++k) {
    cmat e = cmat::Zero(d, d);
    e(k, k) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      cmat x = cmat::Zero(d, d);
      x(i, j) = inv_sqrt2;
      x(j, i) = inv_sqrt2;
      basis.push_back(x);
      cmat y = cmat::Zero(d, d);
      y(i, j) = cplx(0.0, inv_sqrt2);
      y(j, i) = cplx(0.0, -inv_sqrt2);
      basis.push_back(y);
    }
  return basis;
}

inline density_operator omega_from_root(const cmat& h) {
  const cmat h2 = h * h;
  const double tr = h2.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw convergence_failure("optimizer parameterization collapsed");
  const cmat w = h2 / tr;
  const cmat ws = (w + w.adjoint()).eval() / 2.0;
  return density_operator::from_matrix(ws);
}

// Closed-form reference value for catalog members that have one, plus the
// matching warm-start state.  Returns NaN (and leaves init untouched) when
// no closed form applies.
inline double closed_form_and_init(const density_operator& rho,
                                   const density_operator& sigma,
                                   const f_function& f,
                                   density_operator* init) {
  const double p = f.power_exponent();
  if (std::isfinite(p)) {
    if (f.negated() && p == 1.0) {
      // f(x) = -x: optimum at A^{1/2}/tr(A^{1/2}) for A = rho^{1/2} sigma
      // rho^{1/2}, with value minus the Uhlmann fidelity.
      const cmat sq = rho.sqrt();
      const cmat a_raw = sq * sigma.matrix() * sq;
      const cmat a = (a_raw + a_raw.adjoint()).eval() / 2.0;
      cmat root = matrix_function(eig_hermitian(a), [](double x) {
        return std::sqrt(std::max(x, 0.0));
      });
      root /= root.trace().real();
      const cmat root_h = (root + root.adjoint()).eval() / 2.0;
      *init = density_operator::from_matrix(root_h);
      return -uhlmann_fidelity(rho, sigma);
    }
    const bool neg_branch = f.negated() && p > 0.0 && p < 1.0;
    const bool pos_branch = !f.negated() && p > -1.0 && p < 0.0;
    if (neg_branch || pos_branch) {
      const double alpha = 1.0 / (1.0 + p);
      optimization_result h = holder_extremizer(rho, sigma, alpha);
      *init = h.optimizer_state;
      return h.value;
    }
  }
  if (f.name() == "neg_log") return umegaki(rho, sigma);
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// Iterative maximization of opt_objective over faithful omega.  The search
// runs over Hermitian roots H with omega = H^2/tr(H^2): gradients are
// estimated by central differences on an orthonormal Hermitian basis and a
// backtracking line search (with greedy doubling once a step is accepted)
// keeps the accepted objective values nondecreasing.
inline optimization_result optimized_f_divergence(
    const density_operator& rho, const density_operator& sigma,
    const f_function& f, const optimizer_config& cfg = optimizer_config{}) {
  detail::check_opt_inputs(rho, sigma, rho);
  if (f.kind() != f_kind::anti_monotone)
    throw domain_error(
        "optimized divergence takes operator anti-monotone functions");
  const int d = rho.dim();
  density_operator init =
      density_operator::from_matrix(identity(d) / static_cast<double>(d));
  const double closed = detail::closed_form_and_init(rho, sigma, f, &init);

  const std::vector<cmat> basis = detail::hermitian_basis(d);
  auto eval = [&](const cmat& h) {
    return opt_objective(rho, sigma, detail::omega_from_root(h), f);
  };

  cmat h = matrix_function(init.spec(), [](double x) {
    return std::sqrt(std::max(x, 0.0));
  });
  double cur = eval(h);
  double step = cfg.initial_step;
  int streak = 0;
  bool converged = false;
  int used = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    used = it;
    cmat grad = cmat::Zero(d, d);
    for (const cmat& b : basis) {
      const double plus = eval(h + cfg.gradient_step * b);
      const double minus = eval(h - cfg.gradient_step * b);
      grad += ((plus - minus) / (2.0 * cfg.gradient_step)) * b;
    }
    double improvement = 0.0;
    const double gnorm = grad.norm();
    if (gnorm > 0.0 && std::isfinite(gnorm)) {
      const cmat dir = grad / gnorm;
      double s = step;
      double accepted = 0.0;
      double best = cur;
      cmat best_h = h;
      for (int k = 0; k < 48 && s >= 1e-14; ++k, s *= 0.5) {
        const cmat cand = h + s * dir;
        const double v = eval(cand);
        if (v > best) {
          best = v;
          best_h = cand;
          accepted = s;
          break;
        }
      }
      while (accepted > 0.0 && accepted < 1e6) {
        const cmat cand = h + (2.0 * accepted) * dir;
        const double v = eval(cand);
        if (!(v > best)) break;
        best = v;
        best_h = cand;
        accepted *= 2.0;
      }
      if (accepted > 0.0) {
        improvement = best - cur;
        cur = best;
        h = best_h;
        step = accepted;
      } else {
        step = std::max(step * 0.25, 1e-12);
      }
    }
    if (improvement / std::max(1.0, std::abs(cur)) < cfg.improvement_tol) {
      if (++streak >= cfg.patience) {
        converged = true;
        break;
      }
    } else {
      streak = 0;
    }
  }
  const double gap =
      std::isnan(closed) ? std::numeric_limits<double>::quiet_NaN()
                         : cur - closed;
  return optimization_result{cur, detail::omega_from_root(h), used,
                             converged, gap};
}

}  // namespace qfd
