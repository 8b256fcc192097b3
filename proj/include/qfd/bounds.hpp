#pragma once

// Recovery-bound machinery: the Hilbert--Schmidt embedding of a
// subalgebra's GNS space, the compression identity driving every
// estimate, resolvent-difference vectors and their rotated-time
// counterparts, three-term split bounds on recovery trace distances,
// and machine-checkable certificates for each named bound family.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "qfd/divergence.hpp"
#include "qfd/errors.hpp"
#include "qfd/fclass.hpp"
#include "qfd/optdiv.hpp"
#include "qfd/qmat.hpp"
#include "qfd/recovery.hpp"

namespace qfd {

// Absolute slack allowed on a certificate margin before it is failed.
inline constexpr double k_default_certificate_tolerance = 1e-8;
// Divergence differences at or below this magnitude count as exact
// saturation: the certificate then checks the recovery directly.
inline constexpr double k_saturation_tolerance = 1e-10;
// Largest tolerated numerical undershoot of a difference that must be
// nonnegative; anything worse raises negative_difference.
inline constexpr double k_difference_floor = 1e-8;
// A state counts as faithful only when its smallest eigenvalue clears
// this floor; it matches the singularity cutoff of the spectral
// calculus, so anything accepted here can safely be inverted.
inline constexpr double k_faithful_floor = 1e-12;

namespace detail {

inline bool is_faithful(const density_operator& rho) {
  return rho.min_eigenvalue() > k_faithful_floor;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spectral action of x -> left x right^{-1} on matrix space
// ---------------------------------------------------------------------------

// The two-sided multiplication operator x -> left . x . right^{-1} is
// positive on the Hilbert--Schmidt space when both operators are, and
// scalar calculus acts entrywise on the ratio spectrum l_i / r_j in the
// product eigenbasis.  Matrices of a subalgebra containing both
// operators form an invariant subspace, so feeding restricted operators
// reproduces the subalgebra's own action on embedded elements.
class modular_action {
 public:
  modular_action(const density_operator& left, const density_operator& right)
      : ul_(left.eigenvectors()),
        ur_(right.eigenvectors()),
        l_(left.eigenvalues()),
        r_(right.eigenvalues()) {
    if (left.dim() != right.dim())
      throw dimension_mismatch("two-sided action needs operators of equal dimension");
    if (!detail::is_faithful(left) || !detail::is_faithful(right))
      throw non_faithful("two-sided action needs faithful operators");
  }

  int dim() const { return static_cast<int>(l_.size()); }

  // g(action) applied to x, for real- or complex-valued g of the
  // positive ratio spectrum.
  template <class G>
  cmat apply_scalar(const cmat& x, G&& g) const {
    check_square(x);
    if (static_cast<int>(x.rows()) != dim())
      throw dimension_mismatch("operand does not match the action's dimension");
    cmat y = ul_.adjoint() * x * ur_;
    for (int i = 0; i < dim(); ++i)
      for (int j = 0; j < dim(); ++j) y(i, j) *= g(l_(i) / r_(j));
    return ul_ * y * ur_.adjoint();
  }

  cmat apply(const cmat& x) const {
    return apply_scalar(x, [](double v) { return v; });
  }

  cmat resolvent(const cmat& x, double lambda) const {
    if (!(lambda >= 0.0))
      throw negative_lambda("resolvent shift must be nonnegative");
    return apply_scalar(x, [lambda](double v) { return 1.0 / (lambda + v); });
  }

  cmat cpower(const cmat& x, cplx z) const {
    return apply_scalar(x, [z](double v) { return std::exp(z * std::log(v)); });
  }

  // Re <x| action |x> -- the squared norm of the square-root action.
  double quadratic_form(const cmat& x) const {
    return hs_inner(x, apply(x)).real();
  }

 private:
  cmat ul_, ur_;
  rvec l_, r_;
};

// ---------------------------------------------------------------------------
// Isometric embedding of the restricted GNS space
// ---------------------------------------------------------------------------

// x -> x rho_N^{-1/2} rho^{1/2}.  On vectors of the form a rho_N^{1/2}
// with a in the subalgebra this is isometric, sends |rho_N^{1/2}> to
// |rho^{1/2}>, and compresses the ambient two-sided action to the
// restricted one.
inline cmat hs_isometry_v(const density_operator& rho,
                          const subalgebra_spec& alg, const cmat& x) {
  check_square(x);
  if (rho.dim() != alg.dim() || static_cast<int>(x.rows()) != rho.dim())
    throw dimension_mismatch("embedding inputs disagree in dimension");
  if (!detail::is_faithful(rho))
    throw non_faithful("embedding needs a faithful reference state");
  const density_operator rho_n = alg.expect(rho);
  return x * rho_n.power(-0.5) * rho.sqrt();
}

// ---------------------------------------------------------------------------
// Compression identity for inverses
// ---------------------------------------------------------------------------

struct lemma_key_result {
  double gap;        // <h|U* A^{-1} U|h> - <h|(U* A U)^{-1}|h>
  double quadratic;  // <v|A|v> for the explicit difference vector v
};

// For an isometry U and positive definite A, compressing the inverse
// dominates inverting the compression, and the defect equals the
// A-energy of v = A^{-1} U h - U (U* A U)^{-1} h.  Both sides are
// returned so callers can confirm they agree and are nonnegative.
inline lemma_key_result lemma_key_residual(const cmat& u, const cmat& a,
                                           const cvec& h) {
  if (u.rows() < u.cols())
    throw dimension_mismatch("isometry must have at least as many rows as columns");
  if (a.rows() != a.cols() || a.rows() != u.rows())
    throw dimension_mismatch("operator must be square on the isometry's target");
  if (h.size() != u.cols())
    throw dimension_mismatch("vector must live on the isometry's source");
  const cmat gram = u.adjoint() * u;
  if (max_abs_entry(gram - cmat(identity(static_cast<int>(u.cols())))) > 1e-8)
    throw domain_error("matrix is not an isometry");
  check_hermitian(a);
  const spectral_decomposition sd = eig_hermitian(a);
  const double top = sd.eigenvalues.maxCoeff();
  if (!(sd.eigenvalues.minCoeff() > 1e-12 * std::max(1.0, top)))
    throw singular_matrix("compression identity needs a positive definite operator");
  const cmat a_inv = matrix_function(sd, [](double v) { return 1.0 / v; });
  cmat b = u.adjoint() * a * u;
  b = ((b + b.adjoint()) / 2.0).eval();
  const spectral_decomposition sb = eig_hermitian(b);
  if (!(sb.eigenvalues.minCoeff() > 0.0))
    throw singular_matrix("compressed operator is singular");
  const cmat b_inv = matrix_function(sb, [](double v) { return 1.0 / v; });
  const cvec uh = u * h;
  const cvec lifted = a_inv * uh;
  const cvec folded = u * (b_inv * h).eval();
  lemma_key_result out;
  out.gap = uh.dot(lifted).real() - h.dot((b_inv * h).eval()).real();
  const cvec v = lifted - folded;
  out.quadratic = v.dot((a * v).eval()).real();
  return out;
}

// ---------------------------------------------------------------------------
// Resolvent-difference vector and integrand
// ---------------------------------------------------------------------------

struct f_lambda_result {
  double value;  // nonnegative integrand F(lambda)
  cmat w;        // resolvent-difference vector w_lambda
};

namespace detail {

inline void check_bound_inputs(const density_operator& rho,
                               const density_operator& sigma,
                               const subalgebra_spec& alg) {
  if (rho.dim() != sigma.dim() || rho.dim() != alg.dim())
    throw dimension_mismatch("states and subalgebra disagree in dimension");
  if (!is_faithful(rho) || !is_faithful(sigma))
    throw non_faithful("recovery bounds need faithful states");
}

}  // namespace detail

// w_lambda = (D_M + lambda)^{-1}|rho^{1/2}> - V (D_N + lambda)^{-1}|rho_N^{1/2}>
// for the ambient and restricted two-sided actions D of (sigma, rho),
// together with F(lambda) = <w|D_M|w> + lambda <w|w> >= 0, the density
// of every divergence difference against the representing measure.
inline f_lambda_result f_lambda(const density_operator& rho,
                                const density_operator& sigma,
                                const subalgebra_spec& alg, double lambda) {
  detail::check_bound_inputs(rho, sigma, alg);
  if (!(lambda >= 0.0))
    throw negative_lambda("resolvent parameter must be nonnegative");
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const modular_action ambient(sigma, rho);
  const modular_action restricted(sigma_n, rho_n);
  const cmat bridge = rho_n.power(-0.5) * rho.sqrt();
  f_lambda_result out;
  if (lambda <= 1.0) {
    const cmat lifted = ambient.resolvent(rho.sqrt(), lambda);
    const cmat folded = restricted.resolvent(rho_n.sqrt(), lambda);
    out.w = lifted - folded * bridge;
  } else {
    // Both resolvents are 1/lambda to leading order and those parts
    // cancel exactly (the embedding maps the restricted square root to
    // the ambient one), so subtract them analytically: the remainder
    // form keeps full relative accuracy at large shifts, where the
    // direct difference would be swamped by cancellation.
    const auto g = [lambda](double v) { return v / (v + lambda); };
    const cmat lifted = ambient.apply_scalar(rho.sqrt(), g);
    const cmat folded = restricted.apply_scalar(rho_n.sqrt(), g);
    out.w = (folded * bridge - lifted) / lambda;
  }
  out.value = ambient.quadratic_form(out.w) + lambda * hs_inner(out.w, out.w).real();
  return out;
}

// ---------------------------------------------------------------------------
// Rotated difference vectors
// ---------------------------------------------------------------------------

// sigma^{1/2+it} rho^{-it} - sigma_N^{1/2+it} rho_N^{-1/2-it} rho^{1/2}.
// Twice its norm dominates the trace distance between sigma and the
// rotated recovery (anchored at rho, rotation t) of sigma's restriction.
inline cmat w_t_vector(const density_operator& rho,
                       const density_operator& sigma,
                       const subalgebra_spec& alg, double t) {
  detail::check_bound_inputs(rho, sigma, alg);
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const cplx up(0.5, t);
  return sigma.cpower(up) * rho.cpower(cplx(0.0, -t)) -
         sigma_n.cpower(up) * rho_n.cpower(cplx(-0.5, -t)) * rho.sqrt();
}

// rho^{1/2} - sigma^{1/2+it} sigma_N^{-1/2-it} rho_N^{1/2+it} rho^{-it}.
// Twice its norm dominates the trace distance between rho and the
// rotated recovery (anchored at sigma, rotation -t) of rho's restriction.
inline cmat v_t_vector(const density_operator& rho,
                       const density_operator& sigma,
                       const subalgebra_spec& alg, double t) {
  detail::check_bound_inputs(rho, sigma, alg);
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const cplx up(0.5, t);
  return rho.sqrt() - sigma.cpower(up) * sigma_n.cpower(cplx(-0.5, -t)) *
                          rho_n.cpower(up) * rho.cpower(cplx(0.0, -t));
}

// Variant of the previous vector threaded through an auxiliary faithful
// state omega of the subalgebra and its recovery under the map anchored
// at rho.  Twice its norm again dominates the trace distance between
// rho and the rotated recovery (anchored at sigma, rotation -t) of
// rho's restriction, for any admissible omega.
inline cmat u_t_vector(const density_operator& rho,
                       const density_operator& sigma,
                       const subalgebra_spec& alg,
                       const density_operator& omega_n, double t) {
  detail::check_bound_inputs(rho, sigma, alg);
  if (omega_n.dim() != rho.dim())
    throw dimension_mismatch("auxiliary state dimension mismatch");
  if (!detail::is_faithful(omega_n))
    throw non_faithful("auxiliary state must be faithful");
  if (max_abs_entry(alg.expect(omega_n.matrix()) - omega_n.matrix()) > 1e-8)
    throw domain_error("auxiliary state must belong to the subalgebra");
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const cmat bridge = rho_n.power(-0.5) * rho.sqrt();
  cmat rec_raw = bridge.adjoint() * omega_n.matrix() * bridge;
  rec_raw = ((rec_raw + rec_raw.adjoint()) / 2.0).eval();
  const density_operator recovered_omega = density_operator::from_matrix(rec_raw);
  const cplx up(0.5, t);
  return rho.sqrt() - sigma.cpower(up) * sigma_n.cpower(cplx(-0.5, -t)) *
                          rho_n.sqrt() * omega_n.cpower(up) *
                          rho_n.power(-0.5) * rho.sqrt() *
                          recovered_omega.cpower(cplx(-0.5, -t));
}

// ---------------------------------------------------------------------------
// Three-term split bounds
// ---------------------------------------------------------------------------

enum class bound_direction { sigma_side, rho_side_standard, rho_side_optimized };

namespace detail {

// head + sqrt(c * band * qdiff) + tail, scaled by 2 cosh(pi t) / pi.
inline double compose_split_bound(double qdiff, double c, double band,
                                  double head, double tail, double t) {
  if (qdiff < -k_difference_floor)
    throw negative_difference(
        "divergence difference is negative beyond tolerance");
  const double middle = std::sqrt(c * band * std::max(qdiff, 0.0));
  return (2.0 * std::cosh(M_PI * t) / M_PI) * (head + middle + tail);
}

// Optimized divergence value, preferring exact closed forms; when only
// the iterative search applies, *gap receives a widening allowance.
inline double optimized_value_with_gap(const density_operator& rho,
                                       const density_operator& sigma,
                                       const f_function& f,
                                       const optimizer_config& cfg,
                                       double* gap) {
  density_operator init = density_operator::from_matrix(
      cmat(identity(rho.dim())) / static_cast<double>(rho.dim()));
  const double closed = closed_form_and_init(rho, sigma, f, &init);
  if (std::isfinite(closed)) {
    *gap = 0.0;
    return closed;
  }
  const optimization_result res = optimized_f_divergence(rho, sigma, f, cfg);
  *gap = std::isfinite(res.gap_estimate)
             ? std::abs(res.gap_estimate)
             : 1e-6 * std::max(1.0, std::abs(res.value));
  return res.value;
}

}  // namespace detail

// Bound on a recovery trace distance assembled from three pieces: a
// near-zero spectral band of width S, a divergence-difference term over
// (S, T) weighted by the regularity constant of f, and a tail beyond T.
// The returned value is checked against the distance it must dominate.
inline double generic_recovery_bound(bound_direction dir,
                                     const density_operator& rho,
                                     const density_operator& sigma,
                                     const subalgebra_spec& alg,
                                     const f_function& f, double split_low,
                                     double split_high, double t,
                                     const optimizer_config& cfg = {}) {
  detail::check_bound_inputs(rho, sigma, alg);
  if (!(split_low >= 0.0) || !(split_high > split_low) ||
      !std::isfinite(split_high))
    throw param_out_of_range("split points must satisfy 0 <= S < T < inf");
  const bool rho_side = dir != bound_direction::sigma_side;
  if (rho_side && !(split_low > 0.0))
    throw param_out_of_range("this direction needs a strictly positive S");
  const double c = c_bound(f, split_low, split_high);
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  double qdiff = 0.0, head = 0.0, tail = 0.0, band = 0.0, gap = 0.0;
  if (dir == bound_direction::sigma_side) {
    const double sign = (f.kind() == f_kind::monotone) ? -1.0 : 1.0;
    qdiff = sign * (standard_f_divergence(rho, sigma, f) -
                    standard_f_divergence(rho_n, sigma_n, f));
    head = 4.0 * std::sqrt(split_low);
    tail = 4.0 * std::sqrt(q_quadratic(rho, sigma) / split_high);
    band = split_high - split_low;
  } else {
    band = std::log(split_high / split_low);
    tail = 4.0 / std::sqrt(split_high);
    if (dir == bound_direction::rho_side_standard) {
      const double sign = (f.kind() == f_kind::monotone) ? -1.0 : 1.0;
      qdiff = sign * (standard_f_divergence(rho, sigma, f) -
                      standard_f_divergence(rho_n, sigma_n, f));
      head = 4.0 * std::sqrt(split_low * q_inverse(rho, sigma));
    } else {
      if (f.kind() != f_kind::anti_monotone)
        throw domain_error("optimized bounds need an anti-monotone function");
      double gap_big = 0.0, gap_small = 0.0;
      const double big =
          detail::optimized_value_with_gap(rho, sigma, f, cfg, &gap_big);
      const double small =
          detail::optimized_value_with_gap(rho_n, sigma_n, f, cfg, &gap_small);
      qdiff = big - small;
      gap = gap_big + gap_small;
      const double q_inf =
          sandwiched_quasi(rho, sigma, std::numeric_limits<double>::infinity());
      head = 4.0 * std::sqrt(split_low * q_inf);
    }
  }

  const double bound = detail::compose_split_bound(qdiff, c, band, head, tail, t);
  const double widened =
      gap > 0.0 ? detail::compose_split_bound(qdiff + gap, c, band, head, tail, t)
                : bound;
  double dist = 0.0;
  if (dir == bound_direction::sigma_side) {
    dist = trace_distance(sigma.matrix(),
                          rotated_petz_subalg(rho, alg, t).apply(sigma_n.matrix()));
  } else {
    dist = trace_distance(rho.matrix(),
                          rotated_petz_subalg(sigma, alg, t).apply(rho_n.matrix()));
  }
  if (dist > widened + 1e-9)
    throw bound_violation("computed bound fails to dominate the measured distance");
  return bound;
}

// ---------------------------------------------------------------------------
// Certificate families
// ---------------------------------------------------------------------------

enum class theorem_id {
  re_fwd,     // relative entropy difference vs sigma-side recovery
  prq_fwd,    // quasi-entropy difference (order s) vs sigma-side recovery
  pre_fwd,    // Renyi relative entropy difference vs sigma-side recovery
  re_rev,     // relative entropy difference vs rho-side recovery
  prq_rev,    // quasi-entropy difference (order s) vs rho-side recovery
  pre_rev,    // Renyi relative entropy difference vs rho-side recovery
  sandq,      // minimal quasi-entropy difference vs rho-side recovery
  sande,      // minimal Renyi relative entropy difference vs rho-side recovery
  re_fwd_u,   // re_fwd against the averaged (rotation-free) recovery
  prq_fwd_u,  // prq_fwd against the averaged recovery
  re_rev_u,   // re_rev against the averaged recovery
  prq_rev_u,  // prq_rev against the averaged recovery
  sandq_u,    // sandq against the averaged recovery
};

inline constexpr int k_theorem_count = 13;

inline const std::array<theorem_id, k_theorem_count>& all_theorem_ids() {
  static const std::array<theorem_id, k_theorem_count> ids = {
      theorem_id::re_fwd,   theorem_id::prq_fwd,   theorem_id::pre_fwd,
      theorem_id::re_rev,   theorem_id::prq_rev,   theorem_id::pre_rev,
      theorem_id::sandq,    theorem_id::sande,     theorem_id::re_fwd_u,
      theorem_id::prq_fwd_u, theorem_id::re_rev_u, theorem_id::prq_rev_u,
      theorem_id::sandq_u,
  };
  return ids;
}

inline const char* theorem_name(theorem_id id) {
  switch (id) {
    case theorem_id::re_fwd: return "RE_FWD";
    case theorem_id::prq_fwd: return "PRQ_FWD";
    case theorem_id::pre_fwd: return "PRE_FWD";
    case theorem_id::re_rev: return "RE_REV";
    case theorem_id::prq_rev: return "PRQ_REV";
    case theorem_id::pre_rev: return "PRE_REV";
    case theorem_id::sandq: return "SANDQ";
    case theorem_id::sande: return "SANDE";
    case theorem_id::re_fwd_u: return "RE_FWD_U";
    case theorem_id::prq_fwd_u: return "PRQ_FWD_U";
    case theorem_id::re_rev_u: return "RE_REV_U";
    case theorem_id::prq_rev_u: return "PRQ_REV_U";
    case theorem_id::sandq_u: return "SANDQ_U";
  }
  throw param_out_of_range("unknown theorem id");
}

inline theorem_id parse_theorem_id(std::string_view name) {
  for (theorem_id id : all_theorem_ids())
    if (name == theorem_name(id)) return id;
  throw config_error("unknown theorem id: " + std::string(name));
}

inline bool theorem_is_universal(theorem_id id) {
  switch (id) {
    case theorem_id::re_fwd_u:
    case theorem_id::prq_fwd_u:
    case theorem_id::re_rev_u:
    case theorem_id::prq_rev_u:
    case theorem_id::sandq_u:
      return true;
    default:
      return false;
  }
}

enum class recovery_side { sigma_side, rho_side };

// Which state the certificate's recovery map must reproduce.
inline recovery_side theorem_recovery_side(theorem_id id) {
  switch (id) {
    case theorem_id::re_fwd:
    case theorem_id::prq_fwd:
    case theorem_id::pre_fwd:
    case theorem_id::re_fwd_u:
    case theorem_id::prq_fwd_u:
      return recovery_side::sigma_side;
    default:
      return recovery_side::rho_side;
  }
}

inline bool theorem_needs_s(theorem_id id) {
  switch (id) {
    case theorem_id::prq_fwd:
    case theorem_id::prq_rev:
    case theorem_id::prq_fwd_u:
    case theorem_id::prq_rev_u:
      return true;
    default:
      return false;
  }
}

inline bool theorem_needs_alpha(theorem_id id) {
  switch (id) {
    case theorem_id::pre_fwd:
    case theorem_id::pre_rev:
    case theorem_id::sandq:
    case theorem_id::sande:
    case theorem_id::sandq_u:
      return true;
    default:
      return false;
  }
}

inline bool theorem_needs_epsilon(theorem_id id) {
  switch (id) {
    case theorem_id::re_rev:
    case theorem_id::prq_rev:
    case theorem_id::pre_rev:
    case theorem_id::sandq:
    case theorem_id::sande:
    case theorem_id::re_rev_u:
    case theorem_id::prq_rev_u:
    case theorem_id::sandq_u:
      return true;
    default:
      return false;
  }
}

inline bool admissible_quasi_order(double s) {
  return std::isfinite(s) && s > -1.0 && s < 1.0 && s != 0.0;
}

// Whether the given order parameter (s for quasi families, alpha for
// Renyi and minimal families) is inside the family's admitted interval.
inline bool theorem_admits_order(theorem_id id, double value) {
  if (theorem_needs_s(id)) return admissible_quasi_order(value);
  switch (id) {
    case theorem_id::pre_fwd:
    case theorem_id::pre_rev:
      return std::isfinite(value) && value > 0.0 && value < 2.0 && value != 1.0;
    case theorem_id::sandq:
    case theorem_id::sande:
    case theorem_id::sandq_u:
      return std::isfinite(value) && value > 0.5 && value != 1.0;
    default:
      return true;
  }
}

struct bound_params {
  double t = 0.0;  // rotation parameter of the recovery map
  double s = std::numeric_limits<double>::quiet_NaN();        // quasi order
  double alpha = std::numeric_limits<double>::quiet_NaN();    // Renyi order
  double epsilon = std::numeric_limits<double>::quiet_NaN();  // exponent slack
  double S = std::numeric_limits<double>::quiet_NaN();  // split diag (low)
  double T = std::numeric_limits<double>::quiet_NaN();  // split diag (high)
  theorem_id id = theorem_id::re_fwd;
};

// Upper end of the open epsilon interval admitted by the family, given
// its (already validated) order parameters; NaN when no epsilon enters.
inline double epsilon_upper_bound(theorem_id id, const bound_params& p) {
  switch (id) {
    case theorem_id::re_rev:
    case theorem_id::re_rev_u:
      return 0.5;
    case theorem_id::prq_rev:
    case theorem_id::prq_rev_u:
      return (1.0 - std::abs(p.s)) / 2.0;
    case theorem_id::pre_rev:
      return p.alpha < 1.0 ? p.alpha / 2.0 : (2.0 - p.alpha) / 2.0;
    case theorem_id::sandq:
    case theorem_id::sande:
    case theorem_id::sandq_u:
      return (1.0 - std::fabs(p.alpha - 1.0) / p.alpha) / 2.0;
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

inline double midpoint_epsilon(theorem_id id, const bound_params& p) {
  return 0.5 * epsilon_upper_bound(id, p);
}

// ---------------------------------------------------------------------------
// Named constants of the certificate right-hand sides
// ---------------------------------------------------------------------------

// Sigma-side quasi-entropy constant K(s, Q_{x^2}).
inline double quasi_forward_constant(double s, double q_x2) {
  if (!admissible_quasi_order(s))
    throw param_out_of_range("quasi order s must lie in (-1,0) u (0,1)");
  if (!(q_x2 > 0.0)) throw param_out_of_range("second moment must be positive");
  const double as = std::abs(s);
  if (s < 0.0)
    return (std::sin(M_PI * as) / M_PI) *
           std::pow((as + 1.0) * (as + 1.0) / (16.0 * q_x2), as + 1.0);
  return (std::sin(M_PI * s) / (M_PI * q_x2)) * std::pow(s, 2.0 * s) /
         std::pow(16.0, s + 1.0);
}

// Rho-side relative entropy constant K(Q_{x^{-1}}, epsilon).
inline double relative_reverse_constant(double q_xinv, double epsilon) {
  if (!(q_xinv > 0.0) || !(epsilon > 0.0))
    throw param_out_of_range("constant needs positive moment and epsilon");
  return 1.0 / (4.0 * std::sqrt(q_xinv) + 4.0 +
                1.0 / std::sqrt(epsilon * M_E));
}

// Rho-side quasi-entropy constant K(s, Q_{x^{-1}}, epsilon).
inline double quasi_reverse_constant(double s, double q_xinv, double epsilon) {
  if (!admissible_quasi_order(s))
    throw param_out_of_range("quasi order s must lie in (-1,0) u (0,1)");
  if (!(q_xinv > 0.0) || !(epsilon > 0.0))
    throw param_out_of_range("constant needs positive moment and epsilon");
  const double as = std::abs(s);
  return 1.0 / (4.0 * std::sqrt(q_xinv) +
                std::sqrt(M_PI / (M_E * epsilon * std::sin(M_PI * as))) + 4.0);
}

// Minimal-family constant K(alpha, Q_inf, epsilon), with the conjugate
// exponent magnitude beta = |alpha - 1| / alpha.
inline double sandwiched_reverse_constant(double alpha, double q_inf,
                                          double epsilon) {
  if (!(std::isfinite(alpha) && alpha > 0.5 && alpha != 1.0))
    throw param_out_of_range("order alpha must lie in (1/2,1) u (1,inf)");
  if (!(q_inf > 0.0) || !(epsilon > 0.0))
    throw param_out_of_range("constant needs positive moment and epsilon");
  const double beta = std::fabs(alpha - 1.0) / alpha;
  return 1.0 / (4.0 * std::sqrt(q_inf) +
                std::sqrt(M_PI / (M_E * epsilon * std::sin(M_PI * beta))) + 4.0);
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct bound_certificate {
  theorem_id id = theorem_id::re_fwd;
  bound_params params;        // echoed inputs plus derived s and splits
  double lhs = 0.0;           // divergence difference being certified
  double rhs = 0.0;           // certified lower bound on it
  double margin = 0.0;        // lhs - rhs; nonnegative up to tolerance
  double recovery_error = 0.0;  // measured trace distance in [0, 2]
  double tolerance = 0.0;     // slack applied when judging the margin
  bool passed = false;        // margin >= -tolerance
  std::map<std::string, double> aux;  // named constants and moments
  std::string instance_fingerprint;   // stable hash of inputs and params
};

namespace detail {

class fnv1a_hasher {
 public:
  void eat_bytes(const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= bytes[i];
      h_ *= 1099511628211ULL;
    }
  }
  void eat_double(double x) {
    if (x == 0.0) x = 0.0;  // fold -0 into +0
    if (std::isnan(x)) x = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    eat_bytes(&bits, sizeof bits);
  }
  void eat_string(std::string_view s) { eat_bytes(s.data(), s.size()); }
  void eat_matrix(const cmat& m) {
    const std::int64_t rows = m.rows(), cols = m.cols();
    eat_bytes(&rows, sizeof rows);
    eat_bytes(&cols, sizeof cols);
    for (std::int64_t i = 0; i < rows; ++i)
      for (std::int64_t j = 0; j < cols; ++j) {
        eat_double(m(i, j).real());
        eat_double(m(i, j).imag());
      }
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h_));
    return std::string(buf);
  }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

}  // namespace detail

// Deterministic identifier of a certified instance: theorem, both
// states, their restrictions, and the scalar parameters.
inline std::string certificate_fingerprint(theorem_id id,
                                           const density_operator& rho,
                                           const density_operator& sigma,
                                           const density_operator& rho_n,
                                           const density_operator& sigma_n,
                                           const bound_params& p) {
  detail::fnv1a_hasher hash;
  hash.eat_string(theorem_name(id));
  hash.eat_matrix(rho.matrix());
  hash.eat_matrix(sigma.matrix());
  hash.eat_matrix(rho_n.matrix());
  hash.eat_matrix(sigma_n.matrix());
  hash.eat_double(p.t);
  hash.eat_double(p.s);
  hash.eat_double(p.alpha);
  hash.eat_double(p.epsilon);
  return hash.hex();
}

namespace detail {

struct split_points {
  double low = std::numeric_limits<double>::quiet_NaN();
  double high = std::numeric_limits<double>::quiet_NaN();
};

// Split points minimizing the sigma-side three-term bound for the
// power-family density at order s, given the observed difference.
inline split_points forward_split_points(double s, double qdiff, double q_x2) {
  split_points out;
  if (!(qdiff > k_saturation_tolerance)) return out;
  const double as = std::abs(s);
  const double c3 = 4.0 * std::sqrt(q_x2);
  if (s > 0.0) {
    const double b = std::sqrt(M_PI / std::sin(M_PI * s)) * std::sqrt(qdiff);
    const double core = c3 * b * s * s / 16.0;
    out.low = std::pow(core, 2.0 / (s + 2.0));
    out.high = out.low + std::pow(core, s / (s + 2.0)) * (c3 / b);
  } else {
    const double b = std::sqrt(M_PI / std::sin(M_PI * as)) * std::sqrt(qdiff);
    out.low = 0.0;
    out.high = std::pow(c3 / (b * (as + 1.0)), 2.0 / (as + 2.0));
  }
  return out;
}

// Reciprocal pair S = min(qdiff, 1), T = 1/S used by the rho-side
// certificates.
inline split_points reverse_split_points(double qdiff) {
  split_points out;
  if (!(qdiff > k_saturation_tolerance)) return out;
  out.low = std::min(qdiff, 1.0);
  out.high = 1.0 / out.low;
  return out;
}

}  // namespace detail

// Evaluate one certificate: compute the divergence difference, the
// measured recovery error, and the certified right-hand side, then
// judge the margin.  When the difference is exactly saturated (at or
// below the saturation tolerance) the certificate instead checks that
// the recovery is exact, recording rhs = recovery_error.
inline bound_certificate certificate(
    theorem_id id, const density_operator& rho, const density_operator& sigma,
    const subalgebra_spec& alg, bound_params params,
    double tolerance = k_default_certificate_tolerance) {
  detail::check_bound_inputs(rho, sigma, alg);
  if (!std::isfinite(params.t))
    throw param_out_of_range("rotation parameter must be finite");
  if (!(tolerance >= 0.0))
    throw param_out_of_range("tolerance must be nonnegative");
  if (theorem_needs_s(id) && !admissible_quasi_order(params.s))
    throw param_out_of_range("quasi order s must lie in (-1,0) u (0,1)");
  if (theorem_needs_alpha(id) && !theorem_admits_order(id, params.alpha))
    throw param_out_of_range("order alpha outside the admitted interval");
  if (theorem_needs_epsilon(id)) {
    const double ub = epsilon_upper_bound(id, params);
    if (!(params.epsilon > 0.0 && params.epsilon < ub))
      throw param_out_of_range("epsilon outside its admitted interval");
  }
  params.id = id;

  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const bool universal = theorem_is_universal(id);
  const double cosh_t = std::cosh(M_PI * params.t);

  double dist = 0.0;
  if (theorem_recovery_side(id) == recovery_side::sigma_side) {
    dist = universal
               ? trace_distance(sigma.matrix(), universal_petz_subalg(rho, alg)
                                                    .apply(sigma_n.matrix()))
               : trace_distance(sigma.matrix(),
                                rotated_petz_subalg(rho, alg, params.t)
                                    .apply(sigma_n.matrix()));
  } else {
    dist = universal
               ? trace_distance(rho.matrix(), universal_petz_subalg(sigma, alg)
                                                  .apply(rho_n.matrix()))
               : trace_distance(rho.matrix(),
                                rotated_petz_subalg(sigma, alg, params.t)
                                    .apply(rho_n.matrix()));
  }

  double lhs = 0.0;
  std::map<std::string, double> aux;
  std::function<double(double)> rhs_of;

  switch (id) {
    case theorem_id::re_fwd:
    case theorem_id::re_fwd_u: {
      lhs = umegaki(rho, sigma) - umegaki(rho_n, sigma_n);
      const double q2 = q_quadratic(rho, sigma);
      aux["q_x2"] = q2;
      if (id == theorem_id::re_fwd) {
        rhs_of = [q2, cosh_t](double d) {
          return std::pow(M_PI * d / (8.0 * cosh_t), 4.0) / q2;
        };
      } else {
        rhs_of = [q2](double d) { return std::pow(d, 4.0) / (256.0 * q2); };
      }
      if (lhs > k_saturation_tolerance) {
        params.S = 0.0;
        params.T = 4.0 * std::sqrt(q2 / lhs);
      }
      break;
    }
    case theorem_id::prq_fwd:
    case theorem_id::prq_fwd_u: {
      const double s = params.s;
      const double as = std::abs(s);
      lhs = std::abs(petz_renyi_quasi(rho, sigma, s) -
                     petz_renyi_quasi(rho_n, sigma_n, s));
      const double q2 = q_quadratic(rho, sigma);
      const double k = quasi_forward_constant(s, q2);
      aux["q_x2"] = q2;
      aux["k_constant"] = k;
      const double expo = 4.0 + 2.0 * as;
      if (id == theorem_id::prq_fwd) {
        rhs_of = [k, expo, cosh_t](double d) {
          return k * std::pow(M_PI * d / (expo * cosh_t), expo);
        };
      } else {
        rhs_of = [k, expo, as](double d) {
          return k * std::pow(d / (2.0 + as), expo);
        };
      }
      const detail::split_points sp = detail::forward_split_points(s, lhs, q2);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
    case theorem_id::pre_fwd: {
      const double alpha = params.alpha;
      const double s = 1.0 - alpha;
      params.s = s;
      lhs = petz_renyi(rho, sigma, alpha) - petz_renyi(rho_n, sigma_n, alpha);
      const double q2 = q_quadratic(rho, sigma);
      const double k = quasi_forward_constant(s, q2);
      const double quasi_gap = std::abs(petz_renyi_quasi(rho, sigma, s) -
                                        petz_renyi_quasi(rho_n, sigma_n, s));
      aux["q_x2"] = q2;
      aux["k_constant"] = k;
      aux["quasi_gap"] = quasi_gap;
      if (alpha < 1.0) {
        const double expo = 2.0 * (3.0 - alpha);
        rhs_of = [k, expo, alpha, cosh_t](double d) {
          return std::log1p(k * std::pow(M_PI * d / (2.0 * (3.0 - alpha) * cosh_t),
                                         expo)) /
                 (1.0 - alpha);
        };
      } else {
        const double qinv = q_inverse(rho, sigma);
        aux["q_xinv"] = qinv;
        const double expo = 2.0 * (alpha + 1.0);
        rhs_of = [k, expo, alpha, qinv, cosh_t](double d) {
          return std::log1p(
                     k *
                     std::pow(M_PI * d / (2.0 * (alpha + 1.0) * cosh_t), expo) /
                     std::pow(qinv, alpha - 1.0)) /
                 (alpha - 1.0);
        };
      }
      const detail::split_points sp =
          detail::forward_split_points(s, quasi_gap, q2);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
    case theorem_id::re_rev:
    case theorem_id::re_rev_u: {
      lhs = umegaki(rho, sigma) - umegaki(rho_n, sigma_n);
      const double qinv = q_inverse(rho, sigma);
      const double k = relative_reverse_constant(qinv, params.epsilon);
      aux["q_xinv"] = qinv;
      aux["k_constant"] = k;
      const double expo = 1.0 / (0.5 - params.epsilon);
      if (id == theorem_id::re_rev) {
        rhs_of = [k, expo, cosh_t](double d) {
          return std::pow(k * M_PI * d / (2.0 * cosh_t), expo);
        };
      } else {
        rhs_of = [k, expo](double d) { return std::pow(k * d, expo); };
      }
      const detail::split_points sp = detail::reverse_split_points(lhs);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
    case theorem_id::prq_rev:
    case theorem_id::prq_rev_u: {
      const double s = params.s;
      const double as = std::abs(s);
      lhs = std::abs(petz_renyi_quasi(rho, sigma, s) -
                     petz_renyi_quasi(rho_n, sigma_n, s));
      const double qinv = q_inverse(rho, sigma);
      const double k = quasi_reverse_constant(s, qinv, params.epsilon);
      aux["q_xinv"] = qinv;
      aux["k_constant"] = k;
      const double expo = 1.0 / ((1.0 - as) / 2.0 - params.epsilon);
      if (id == theorem_id::prq_rev) {
        rhs_of = [k, expo, cosh_t](double d) {
          return std::pow(k * M_PI * d / (2.0 * cosh_t), expo);
        };
      } else {
        rhs_of = [k, expo](double d) { return std::pow(k * d, expo); };
      }
      const detail::split_points sp = detail::reverse_split_points(lhs);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
    case theorem_id::pre_rev: {
      const double alpha = params.alpha;
      const double s = 1.0 - alpha;
      params.s = s;
      lhs = petz_renyi(rho, sigma, alpha) - petz_renyi(rho_n, sigma_n, alpha);
      const double qinv = q_inverse(rho, sigma);
      const double k = quasi_reverse_constant(s, qinv, params.epsilon);
      const double quasi_gap = std::abs(petz_renyi_quasi(rho, sigma, s) -
                                        petz_renyi_quasi(rho_n, sigma_n, s));
      aux["q_xinv"] = qinv;
      aux["k_constant"] = k;
      aux["quasi_gap"] = quasi_gap;
      if (alpha < 1.0) {
        const double expo = 1.0 / (alpha / 2.0 - params.epsilon);
        rhs_of = [k, expo, alpha, cosh_t](double d) {
          return std::log1p(std::pow(k * M_PI * d / (2.0 * cosh_t), expo)) /
                 (1.0 - alpha);
        };
      } else {
        const double expo = 1.0 / ((2.0 - alpha) / 2.0 - params.epsilon);
        rhs_of = [k, expo, alpha, qinv, cosh_t](double d) {
          return std::log1p(
                     std::pow(k * M_PI * d / (2.0 * (alpha + 1.0) * cosh_t),
                              expo) /
                     std::pow(qinv, alpha - 1.0)) /
                 (alpha - 1.0);
        };
      }
      const detail::split_points sp = detail::reverse_split_points(quasi_gap);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
    case theorem_id::sandq:
    case theorem_id::sandq_u:
    case theorem_id::sande: {
      const double alpha = params.alpha;
      const double beta = std::fabs(alpha - 1.0) / alpha;
      const double q_big = sandwiched_quasi(rho, sigma, alpha);
      const double q_small = sandwiched_quasi(rho_n, sigma_n, alpha);
      const double quasi_gap = std::abs(q_big - q_small);
      const double q_inf =
          sandwiched_quasi(rho, sigma, std::numeric_limits<double>::infinity());
      const double k =
          sandwiched_reverse_constant(alpha, q_inf, params.epsilon);
      aux["q_opt_inf"] = q_inf;
      aux["k_constant"] = k;
      aux["gap_estimate"] = 0.0;  // closed-form evaluation, no search gap
      const double expo = 1.0 / ((1.0 - beta) / 2.0 - params.epsilon);
      if (id == theorem_id::sande) {
        lhs = sandwiched(rho, sigma, alpha) - sandwiched(rho_n, sigma_n, alpha);
        aux["quasi_gap"] = quasi_gap;
        const double conj = alpha / (alpha - 1.0);
        if (alpha < 1.0) {
          rhs_of = [k, expo, conj, cosh_t](double d) {
            return std::fabs(conj) *
                   std::log1p(std::pow(k * M_PI * d / (2.0 * cosh_t), expo));
          };
        } else {
          rhs_of = [k, expo, conj, beta, q_inf, cosh_t](double d) {
            return conj *
                   std::log1p(std::pow(k * M_PI * d / (2.0 * cosh_t), expo) *
                              std::pow(q_inf, -beta));
          };
        }
      } else {
        lhs = quasi_gap;
        if (id == theorem_id::sandq) {
          rhs_of = [k, expo, cosh_t](double d) {
            return std::pow(k * M_PI * d / (2.0 * cosh_t), expo);
          };
        } else {
          rhs_of = [k, expo](double d) { return std::pow(0.5 * k * d, expo); };
        }
      }
      const detail::split_points sp = detail::reverse_split_points(quasi_gap);
      params.S = sp.low;
      params.T = sp.high;
      break;
    }
  }

  double rhs = rhs_of(dist);
  aux["rhs_unit"] = rhs_of(1.0);
  if (!universal) aux["cosh_weight"] = cosh_t;
  const auto gap_it = aux.find("gap_estimate");
  const double gap = gap_it == aux.end() ? 0.0 : gap_it->second;

  if (std::abs(lhs) <= k_saturation_tolerance) {
    rhs = dist;  // saturation: demand the recovery itself be exact
    aux["saturation_short_circuit"] = 1.0;
    params.S = std::numeric_limits<double>::quiet_NaN();
    params.T = std::numeric_limits<double>::quiet_NaN();
  }

  bound_certificate cert;
  cert.id = id;
  cert.params = params;
  cert.lhs = lhs;
  cert.rhs = rhs;
  cert.margin = lhs - rhs;
  cert.recovery_error = dist;
  cert.tolerance = tolerance + gap;
  cert.passed = cert.margin >= -cert.tolerance;
  cert.aux = std::move(aux);
  cert.instance_fingerprint =
      certificate_fingerprint(id, rho, sigma, rho_n, sigma_n, cert.params);
  return cert;
}

// ---------------------------------------------------------------------------
// Exact-recovery equivalences
// ---------------------------------------------------------------------------

// Residuals of seven conditions that vanish together exactly when the
// restriction loses nothing: each is zero (to numerical precision) on a
// lossless instance, and a strictly positive relative entropy gap
// forces every other residual positive as well.
struct equivalence_report {
  double relative_entropy_gap = 0.0;        // divergence difference, -log kernel
  double sandwiched_entropy_gap = 0.0;      // minimal Renyi gap, orders 3/4 and 2
  double optimized_inverse_root_gap = 0.0;  // minimal quasi gap at order 2
  double optimized_sample_gap = 0.0;        // minimal quasi gap, sampled orders
  double sigma_recovery_distance = 0.0;     // rho-anchored recovery of sigma_N
  double rho_recovery_distance = 0.0;       // sigma-anchored recovery of rho_N
  double petz_witness_distance = 0.0;       // rotation-free witness channel

  std::array<double, 7> as_array() const {
    return {relative_entropy_gap,       sandwiched_entropy_gap,
            optimized_inverse_root_gap, optimized_sample_gap,
            sigma_recovery_distance,    rho_recovery_distance,
            petz_witness_distance};
  }
  double max_residual() const {
    double m = 0.0;
    for (double r : as_array()) m = std::max(m, r);
    return m;
  }
};

inline equivalence_report equivalence_suite(const density_operator& rho,
                                            const density_operator& sigma,
                                            const subalgebra_spec& alg) {
  detail::check_bound_inputs(rho, sigma, alg);
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  equivalence_report rep;
  rep.relative_entropy_gap =
      std::abs(umegaki(rho, sigma) - umegaki(rho_n, sigma_n));
  for (double alpha : {0.75, 2.0}) {
    rep.sandwiched_entropy_gap = std::max(
        rep.sandwiched_entropy_gap, std::abs(sandwiched(rho, sigma, alpha) -
                                             sandwiched(rho_n, sigma_n, alpha)));
  }
  rep.optimized_inverse_root_gap = std::abs(
      sandwiched_quasi(rho, sigma, 2.0) - sandwiched_quasi(rho_n, sigma_n, 2.0));
  for (double alpha : {10.0 / 3.0, 5.0 / 7.0}) {
    rep.optimized_sample_gap = std::max(
        rep.optimized_sample_gap, std::abs(sandwiched_quasi(rho, sigma, alpha) -
                                           sandwiched_quasi(rho_n, sigma_n,
                                                            alpha)));
  }
  for (double t : {0.0, 1.0, -1.0}) {
    rep.sigma_recovery_distance =
        std::max(rep.sigma_recovery_distance,
                 trace_distance(sigma.matrix(), rotated_petz_subalg(rho, alg, t)
                                                    .apply(sigma_n.matrix())));
    rep.rho_recovery_distance =
        std::max(rep.rho_recovery_distance,
                 trace_distance(rho.matrix(), rotated_petz_subalg(sigma, alg, t)
                                                  .apply(rho_n.matrix())));
  }
  rep.petz_witness_distance = trace_distance(
      sigma.matrix(), petz_subalg(rho, alg).apply(sigma_n.matrix()));
  return rep;
}

}  // namespace qfd
