#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "frozen_values.hpp"
#include "qfd/bounds.hpp"
#include "qfd/quadrature.hpp"

using namespace qfd;
using namespace qfd_frozen;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

density_operator rho4() { return density_operator::from_entries(4, kRho4); }
density_operator sig4() { return density_operator::from_entries(4, kSig4); }
subalgebra_spec factor_alg() { return subalgebra_spec::tensor_factor(2, 2, 0); }

std::vector<subalgebra_spec> sample_algebras() {
  std::vector<subalgebra_spec> algs;
  algs.push_back(subalgebra_spec::tensor_factor(2, 2, 0));
  algs.push_back(subalgebra_spec::tensor_factor(2, 2, 1));
  algs.push_back(subalgebra_spec::block({1, 3}));
  algs.push_back(subalgebra_spec::block({2, 2}));
  const cmat u = random_unitary(4, 88u);
  cmat p0 = cmat::Zero(4, 4), p1 = cmat::Zero(4, 4);
  p0(0, 0) = p0(1, 1) = 1.0;
  p1(2, 2) = p1(3, 3) = 1.0;
  algs.push_back(subalgebra_spec::pinching(
      {u * p0 * u.adjoint(), u * p1 * u.adjoint()}));
  return algs;
}

// two states sharing an exact product structure with a common second
// factor: the factor restriction then recovers both states exactly
std::pair<density_operator, density_operator> product_pair(std::uint64_t seed) {
  const density_operator a = random_density(2, seed);
  const density_operator b = random_density(2, derive_seed(seed, 7));
  const density_operator tau = random_density(2, derive_seed(seed, 13));
  return {density_operator::from_matrix(tensor(a.matrix(), tau.matrix())),
          density_operator::from_matrix(tensor(b.matrix(), tau.matrix()))};
}

// auxiliary faithful state of the subalgebra used by the u-vector: the
// order-2 extremizer of the restricted pair
density_operator embedded_extremizer(const density_operator& rho_n,
                                     const density_operator& sigma_n) {
  return holder_extremizer(rho_n, sigma_n, 2.0).optimizer_state;
}

// integral over (0, infinity) split at 1, mapping the upper half back
// to the unit interval via lambda -> 1/lambda
template <class G>
auto half_line_split(G&& g, double tol) {
  quad_options opt;
  opt.abs_tol = tol;
  opt.rel_tol = 1e-10;
  auto lower = integrate_gk([&](double lam) { return g(lam); }, 0.0, 1.0, opt);
  auto upper = integrate_gk(
      [&](double u) {
        const double lam = 1.0 / u;
        return decltype(g(lam))(g(lam) * (lam * lam));
      },
      0.0, 1.0, opt);
  return decltype(lower)(lower + upper);
}

void close(double got, double want, double rel = 1e-10) {
  REQUIRE(std::abs(got - want) <= rel * std::max(1.0, std::abs(want)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Compression identity
// ---------------------------------------------------------------------------

TEST_CASE("inverse-compression gap equals its quadratic form") {
  SECTION("square unitary compression loses nothing") {
    const cmat u = random_unitary(4, 301u);
    gaussian_stream g(302u);
    const cmat raw = ginibre(4, 4, g);
    cmat a = raw * raw.adjoint();
    a += 0.2 * identity(4);
    cvec h(4);
    for (int i = 0; i < 4; ++i) h(i) = g.normal_complex();
    const lemma_key_result r = lemma_key_residual(u, a, h);
    REQUIRE(std::abs(r.gap) < 1e-12);
    REQUIRE(std::abs(r.quadratic) < 1e-12);
  }

  SECTION("identity operator compresses exactly") {
    const cmat u = random_unitary(5, 303u).leftCols(3);
    gaussian_stream g(304u);
    cvec h(3);
    for (int i = 0; i < 3; ++i) h(i) = g.normal_complex();
    const lemma_key_result r = lemma_key_residual(u, identity(5), h);
    REQUIRE(std::abs(r.gap) < 1e-12);
    REQUIRE(std::abs(r.quadratic) < 1e-12);
  }

  SECTION("random isometries: gap and quadratic form agree") {
    gaussian_stream g(305u);
    const int dims[3][2] = {{4, 2}, {5, 3}, {6, 4}};
    int checked = 0;
    for (int rep = 0; rep < 9; ++rep) {
      const int big = dims[rep % 3][0], small = dims[rep % 3][1];
      const cmat u =
          random_unitary(big, derive_seed(306u, rep)).leftCols(small);
      const cmat raw = ginibre(big, big, g);
      cmat a = raw * raw.adjoint();
      a += 0.1 * identity(big);
      cvec h(small);
      for (int i = 0; i < small; ++i) h(i) = g.normal_complex();
      const lemma_key_result r = lemma_key_residual(u, a, h);
      REQUIRE(r.gap >= -1e-12);
      REQUIRE(r.quadratic >= -1e-12);
      REQUIRE(std::abs(r.gap - r.quadratic) <=
              1e-10 * std::max(1.0, r.quadratic));
      ++checked;
    }
    REQUIRE(checked == 9);
  }

  SECTION("rejects bad inputs") {
    gaussian_stream g(307u);
    const cmat u = random_unitary(4, 308u).leftCols(2);
    cvec h(2);
    h << cplx(1, 0), cplx(0, 1);
    const cmat low = ginibre(4, 2, g);
    REQUIRE_THROWS_AS(lemma_key_residual(u, low * low.adjoint(), h),
                      singular_matrix);
    REQUIRE_THROWS_AS(lemma_key_residual(2.0 * u, identity(4), h),
                      domain_error);
    cvec tall(4);
    tall.setZero();
    REQUIRE_THROWS_AS(lemma_key_residual(u, identity(4), tall),
                      dimension_mismatch);
  }
}

// ---------------------------------------------------------------------------
// Isometric embedding
// ---------------------------------------------------------------------------

TEST_CASE("embedding is isometric and compresses the two-sided action") {
  const density_operator rho = random_density(4, 411u);
  const density_operator sigma = random_density(4, 412u);
  gaussian_stream g(413u);
  for (const auto& alg : sample_algebras()) {
    const density_operator rho_n = alg.expect(rho);
    const density_operator sigma_n = alg.expect(sigma);
    SECTION("algebra dim " + std::to_string(alg.dim()) + " shape " +
            std::to_string(static_cast<int>(alg.shape()))) {
      // the restricted square root maps to the ambient one
      REQUIRE(max_abs_entry(hs_isometry_v(rho, alg, rho_n.sqrt()) -
                            rho.sqrt()) < 1e-12);
      const modular_action ambient(sigma, rho);
      const modular_action restricted(sigma_n, rho_n);
      for (int rep = 0; rep < 3; ++rep) {
        const cmat x = alg.expect(ginibre(4, 4, g));  // element of the algebra
        const cmat vx = hs_isometry_v(rho, alg, x);
        // isometric on the algebra
        close(hs_norm(vx), hs_norm(x), 1e-10);
        // compresses the ambient action to the restricted one
        close(ambient.quadratic_form(vx), restricted.quadratic_form(x), 1e-9);
      }
    }
  }

  SECTION("tracial reference state embeds as the identity map") {
    const density_operator flat =
        density_operator::from_matrix(cmat(identity(4)) / 4.0);
    const subalgebra_spec alg = factor_alg();
    const cmat x = alg.expect(ginibre(4, 4, g));
    REQUIRE(max_abs_entry(hs_isometry_v(flat, alg, x) - x) < 1e-12);
  }

  SECTION("rejects unfaithful reference states") {
    const density_operator thin = random_density(4, 2, 414u);
    REQUIRE_THROWS_AS(hs_isometry_v(thin, factor_alg(), identity(4)),
                      non_faithful);
  }
}

// ---------------------------------------------------------------------------
// Resolvent-difference integrand
// ---------------------------------------------------------------------------

TEST_CASE("resolvent-difference integrand matches the moment identity") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  SECTION("F(lambda) equals the resolvent-moment difference") {
    for (double lam : {0.0, 0.1, 1.0, 5.0}) {
      const f_lambda_result r = f_lambda(rho, sigma, alg, lam);
      const double direct =
          q_lambda(rho, sigma, lam) - q_lambda(rho_n, sigma_n, lam);
      REQUIRE(r.value >= -1e-12);
      REQUIRE(std::abs(r.value - direct) < 1e-9);
    }
  }

  SECTION("integrand decays like the inverse cube") {
    const double far = f_lambda(rho, sigma, alg, 1e6).value;
    REQUIRE(far >= -1e-15);
    REQUIRE(far * 1e12 < 1e-3);
  }

  SECTION("product instances have vanishing integrand") {
    const auto [p, q] = product_pair(415u);
    for (double lam : {0.25, 1.0}) {
      const f_lambda_result r = f_lambda(p, q, factor_alg(), lam);
      REQUIRE(std::abs(r.value) < 1e-12);
      REQUIRE(hs_norm(r.w) < 1e-9);
    }
  }

  SECTION("rejects negative shifts") {
    REQUIRE_THROWS_AS(f_lambda(rho, sigma, alg, -1.0), negative_lambda);
  }
}

// ---------------------------------------------------------------------------
// Rotated difference vectors
// ---------------------------------------------------------------------------

TEST_CASE("rotation vectors match frozen norms and dominate distances") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);
  const density_operator omega = embedded_extremizer(rho_n, sigma_n);

  SECTION("frozen norms at t = 0 and t = 1/2") {
    close(hs_norm(w_t_vector(rho, sigma, alg, 0.0)), k_wnorm_t0, 1e-9);
    close(hs_norm(w_t_vector(rho, sigma, alg, 0.5)), k_wnorm_t05, 1e-9);
    close(hs_norm(v_t_vector(rho, sigma, alg, 0.0)), k_vnorm_t0, 1e-9);
    close(hs_norm(v_t_vector(rho, sigma, alg, 0.5)), k_vnorm_t05, 1e-9);
    close(hs_norm(u_t_vector(rho, sigma, alg, omega, 0.0)), k_unorm_t0, 1e-9);
    close(hs_norm(u_t_vector(rho, sigma, alg, omega, 0.5)), k_unorm_t05, 1e-9);
  }

  SECTION("twice the w norm dominates the sigma-side recovery error") {
    for (double t : {0.0, 0.5, 1.0, -0.5, -1.0}) {
      const double dist = trace_distance(
          sigma.matrix(), rotated_petz_subalg(rho, alg, t).apply(sigma_n.matrix()));
      REQUIRE(2.0 * hs_norm(w_t_vector(rho, sigma, alg, t)) >= dist - 1e-9);
    }
  }

  SECTION("twice the v norm dominates the rho-side error at reversed rotation") {
    for (double t : {0.0, 0.5, 1.0, -0.5, -1.0}) {
      const double dist = trace_distance(
          rho.matrix(), rotated_petz_subalg(sigma, alg, -t).apply(rho_n.matrix()));
      REQUIRE(2.0 * hs_norm(v_t_vector(rho, sigma, alg, t)) >= dist - 1e-9);
    }
  }

  SECTION("twice the u norm dominates the same rho-side error") {
    for (double t : {0.0, 0.5, 1.0, -0.5}) {
      const double dist = trace_distance(
          rho.matrix(), rotated_petz_subalg(sigma, alg, -t).apply(rho_n.matrix()));
      REQUIRE(2.0 * hs_norm(u_t_vector(rho, sigma, alg, omega, t)) >=
              dist - 1e-9);
    }
  }

  SECTION("product instances have vanishing vectors") {
    const auto [p, q] = product_pair(416u);
    const subalgebra_spec palg = factor_alg();
    const density_operator p_n = palg.expect(p);
    const density_operator q_n = palg.expect(q);
    const density_operator pomega = embedded_extremizer(p_n, q_n);
    for (double t : {0.0, 0.7}) {
      REQUIRE(hs_norm(w_t_vector(p, q, palg, t)) < 1e-9);
      REQUIRE(hs_norm(v_t_vector(p, q, palg, t)) < 1e-9);
      REQUIRE(hs_norm(u_t_vector(p, q, palg, pomega, t)) < 1e-9);
    }
  }

  SECTION("auxiliary state must belong to the subalgebra") {
    REQUIRE_THROWS_AS(u_t_vector(rho, sigma, alg, random_density(4, 417u), 0.0),
                      domain_error);
  }
}

TEST_CASE("rotation vectors satisfy their half-line integral identities") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  SECTION("w vector as a resolvent integral") {
    for (double t : {0.0, 0.5}) {
      const cmat via_integral =
          -(std::cosh(M_PI * t) / M_PI) *
          half_line_split(
              [&](double lam) {
                return cmat(std::pow(cplx(lam, 0.0), cplx(0.5, t)) *
                            f_lambda(rho, sigma, alg, lam).w);
              },
              1e-8);
      REQUIRE(hs_norm(via_integral - w_t_vector(rho, sigma, alg, t)) < 1e-6);
    }
  }

  SECTION("u vector as a resolvent integral through the auxiliary chain") {
    const density_operator omega = embedded_extremizer(rho_n, sigma_n);
    const density_operator recovered = petz_subalg(rho, alg).apply(omega);
    const modular_action lifted(sigma, recovered);
    const modular_action folded(sigma_n, omega);
    const cmat bridge = rho_n.power(-0.5) * rho.sqrt();
    auto u_lambda = [&](double lam) {
      return cmat(lifted.resolvent(rho.sqrt(), lam) -
                  folded.resolvent(rho_n.sqrt(), lam) * bridge);
    };

    // the integrand energy is the resolvent-moment difference of the chain
    for (double lam : {0.1, 1.0, 4.0}) {
      const cmat u = u_lambda(lam);
      const double energy =
          lifted.quadratic_form(u) + lam * hs_inner(u, u).real();
      const double direct =
          hs_inner(rho.sqrt(), lifted.resolvent(rho.sqrt(), lam)).real() -
          hs_inner(rho_n.sqrt(), folded.resolvent(rho_n.sqrt(), lam)).real();
      REQUIRE(energy >= -1e-12);
      REQUIRE(std::abs(energy - direct) < 1e-9);
    }

    for (double t : {0.0, 0.5}) {
      const cmat raw = half_line_split(
          [&](double lam) {
            return cmat(std::pow(cplx(lam, 0.0), cplx(-0.5, -t)) *
                        u_lambda(lam));
          },
          1e-8);
      const cmat via_integral =
          (std::cosh(M_PI * t) / M_PI) * lifted.cpower(raw, cplx(0.5, t));
      REQUIRE(hs_norm(via_integral - u_t_vector(rho, sigma, alg, omega, t)) <
              1e-6);
    }
  }
}

TEST_CASE("divergence differences integrate the resolvent gap") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  auto weighted_integral = [&](const f_function& f) {
    return half_line_split(
        [&](double lam) {
          return f_lambda(rho, sigma, alg, lam).value * f.density(lam);
        },
        1e-8);
  };

  SECTION("logarithmic kernel reproduces the entropy difference") {
    const double diff = umegaki(rho, sigma) - umegaki(rho_n, sigma_n);
    REQUIRE(std::abs(weighted_integral(make_neg_log()) - diff) < 1e-6);
  }

  SECTION("inverse-root kernel reproduces its moment difference") {
    const double diff = petz_renyi_quasi(rho, sigma, -0.5) -
                        petz_renyi_quasi(rho_n, sigma_n, -0.5);
    REQUIRE(std::abs(weighted_integral(make_power(-0.5)) - diff) < 1e-6);
  }

  SECTION("square-root kernel reproduces the reversed moment difference") {
    const double diff = petz_renyi_quasi(rho_n, sigma_n, 0.5) -
                        petz_renyi_quasi(rho, sigma, 0.5);
    REQUIRE(std::abs(weighted_integral(make_power(0.5)) - diff) < 1e-6);
  }
}

// ---------------------------------------------------------------------------
// Three-term split bounds
// ---------------------------------------------------------------------------

TEST_CASE("split bounds dominate measured recovery distances") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  const density_operator rho_n = alg.expect(rho);
  const density_operator sigma_n = alg.expect(sigma);

  SECTION("logarithmic kernel with the optimal tail split") {
    const double lhs = umegaki(rho, sigma) - umegaki(rho_n, sigma_n);
    const double q2 = q_quadratic(rho, sigma);
    const double top = 4.0 * std::sqrt(q2 / lhs);
    for (double t : {0.0, 0.5}) {
      const double bound = generic_recovery_bound(
          bound_direction::sigma_side, rho, sigma, alg, make_neg_log(), 0.0,
          top, t);
      const double expected = (8.0 * std::cosh(M_PI * t) / M_PI) *
                              std::pow(lhs * q2, 0.25);
      close(bound, expected, 1e-10);
      const double dist = trace_distance(
          sigma.matrix(),
          rotated_petz_subalg(rho, alg, t).apply(sigma_n.matrix()));
      REQUIRE(bound >= dist);
    }
  }

  SECTION("reciprocal split on the opposite side") {
    const f_function f = make_power(-0.5);
    const double gap = std::abs(petz_renyi_quasi(rho, sigma, -0.5) -
                                petz_renyi_quasi(rho_n, sigma_n, -0.5));
    const double delta = std::min(gap, 1.0);
    const double bound =
        generic_recovery_bound(bound_direction::rho_side_standard, rho, sigma,
                               alg, f, delta, 1.0 / delta, 0.5);
    const double dist = trace_distance(
        rho.matrix(), rotated_petz_subalg(sigma, alg, 0.5).apply(rho_n.matrix()));
    REQUIRE(bound >= dist);
  }

  SECTION("optimized direction with a closed-form kernel") {
    const f_function f = make_negated_power(0.5);
    const double bound = generic_recovery_bound(
        bound_direction::rho_side_optimized, rho, sigma, alg, f, 0.04, 25.0,
        0.0);
    const double dist = trace_distance(
        rho.matrix(), petz_subalg(sigma, alg).apply(rho_n.matrix()));
    REQUIRE(bound >= dist);
  }

  SECTION("parameter and kernel validation") {
    REQUIRE_THROWS_AS(
        generic_recovery_bound(bound_direction::rho_side_standard, rho, sigma,
                               alg, make_neg_log(), 0.0, 4.0, 0.0),
        param_out_of_range);
    REQUIRE_THROWS_AS(
        generic_recovery_bound(bound_direction::sigma_side, rho, sigma, alg,
                               make_neg_log(), 0.0, kInf, 0.0),
        param_out_of_range);
    REQUIRE_THROWS_AS(
        generic_recovery_bound(bound_direction::sigma_side, rho, sigma, alg,
                               make_neg_log(), 2.0, 1.0, 0.0),
        param_out_of_range);
    REQUIRE_THROWS_AS(
        generic_recovery_bound(bound_direction::sigma_side, rho, sigma, alg,
                               make_negative_identity(), 0.5, 2.0, 0.0),
        not_regular);
    REQUIRE_THROWS_AS(
        generic_recovery_bound(bound_direction::rho_side_optimized, rho, sigma,
                               alg, make_power(0.5), 0.5, 2.0, 0.0),
        domain_error);
  }

  SECTION("negative differences are rejected, tiny undershoot tolerated") {
    REQUIRE_THROWS_AS(detail::compose_split_bound(-1e-6, 1.0, 1.0, 0.0, 0.0, 0.0),
                      negative_difference);
    REQUIRE(detail::compose_split_bound(-1e-9, 1.0, 1.0, 0.0, 0.0, 0.0) == 0.0);
  }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

namespace {

// admissible sample orders per family
std::vector<bound_params> sample_params(theorem_id id, double t) {
  std::vector<bound_params> out;
  bound_params base;
  base.t = t;
  if (theorem_needs_s(id)) {
    for (double s : {-0.5, -0.3, 0.3, 0.5}) {
      bound_params p = base;
      p.s = s;
      out.push_back(p);
    }
  } else if (theorem_needs_alpha(id)) {
    const std::vector<double> grid =
        (id == theorem_id::pre_fwd || id == theorem_id::pre_rev)
            ? std::vector<double>{0.6, 1.5}
            : std::vector<double>{0.75, 2.0, 3.0};
    for (double alpha : grid) {
      bound_params p = base;
      p.alpha = alpha;
      out.push_back(p);
    }
  } else {
    out.push_back(base);
  }
  for (auto& p : out)
    if (theorem_needs_epsilon(id)) p.epsilon = midpoint_epsilon(id, p);
  return out;
}

}  // namespace

TEST_CASE("certificates pass on the fixed instance across all families") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();

  for (theorem_id id : all_theorem_ids()) {
    const std::vector<double> t_grid =
        theorem_is_universal(id) ? std::vector<double>{0.0}
                                 : std::vector<double>{0.0, 0.5, -0.5};
    for (double t : t_grid) {
      for (const bound_params& p : sample_params(id, t)) {
        INFO(theorem_name(id) << " t=" << t << " s=" << p.s
                              << " alpha=" << p.alpha);
        const bound_certificate cert = certificate(id, rho, sigma, alg, p);
        REQUIRE(cert.passed);
        REQUIRE(cert.margin >= -1e-8);
        REQUIRE(cert.rhs >= 0.0);
        REQUIRE(cert.recovery_error >= 0.0);
        REQUIRE(cert.recovery_error <= 2.0);
        REQUIRE(cert.instance_fingerprint.size() == 16);
        REQUIRE(cert.passed == (cert.margin >= -cert.tolerance));
        REQUIRE(cert.aux.count("rhs_unit") == 1);
      }
    }
  }
}

TEST_CASE("certificate recovery errors match frozen distances") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();

  bound_params p;
  p.t = 0.0;
  close(certificate(theorem_id::re_fwd, rho, sigma, alg, p).recovery_error,
        k_dist_sig_t0, 1e-9);
  p.t = 0.5;
  close(certificate(theorem_id::re_fwd, rho, sigma, alg, p).recovery_error,
        k_dist_sig_t05, 1e-9);
  p.t = 1.0;
  close(certificate(theorem_id::re_fwd, rho, sigma, alg, p).recovery_error,
        k_dist_sig_t1, 1e-9);

  bound_params q;
  q.epsilon = 0.25;
  q.t = 0.0;
  close(certificate(theorem_id::re_rev, rho, sigma, alg, q).recovery_error,
        k_dist_rho_t0, 1e-9);
  q.t = 0.5;
  close(certificate(theorem_id::re_rev, rho, sigma, alg, q).recovery_error,
        k_dist_rho_t05, 1e-9);
  q.t = 1.0;
  close(certificate(theorem_id::re_rev, rho, sigma, alg, q).recovery_error,
        k_dist_rho_t1, 1e-9);

  bound_params u;
  close(certificate(theorem_id::re_fwd_u, rho, sigma, alg, u).recovery_error,
        k_dist_sig_u, 1e-9);
  u.epsilon = 0.25;
  close(certificate(theorem_id::re_rev_u, rho, sigma, alg, u).recovery_error,
        k_dist_rho_u, 1e-9);
}

TEST_CASE("certificate constants match their closed forms") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();

  SECTION("reverse relative-entropy constant at unit inverse moment") {
    // on identical states the inverse moment is exactly one
    bound_params p;
    p.epsilon = 0.25;
    const bound_certificate cert =
        certificate(theorem_id::re_rev, rho, rho, alg, p);
    const double expected = 1.0 / (8.0 + 1.0 / std::sqrt(0.25 * M_E));
    close(cert.aux.at("k_constant"), expected, 1e-12);
    REQUIRE(cert.aux.count("saturation_short_circuit") == 1);
  }

  SECTION("half-order forward constant specializes to 1/(128 pi Q)") {
    bound_params p;
    p.s = 0.5;
    const bound_certificate cert =
        certificate(theorem_id::prq_fwd, rho, sigma, alg, p);
    const double q2 = cert.aux.at("q_x2");
    close(cert.aux.at("k_constant"), 1.0 / (128.0 * M_PI * q2), 1e-12);
    const double d = cert.recovery_error;
    close(cert.rhs, std::pow(M_PI * d / 5.0, 5.0) / (128.0 * M_PI * q2),
          1e-12);
  }

  SECTION("unit-distance right-hand side is even in the rotation") {
    for (theorem_id id :
         {theorem_id::re_fwd, theorem_id::re_rev, theorem_id::sandq}) {
      bound_params plus, minus;
      plus.t = 0.7;
      minus.t = -0.7;
      if (theorem_needs_alpha(id)) plus.alpha = minus.alpha = 2.0;
      if (theorem_needs_epsilon(id)) {
        plus.epsilon = midpoint_epsilon(id, plus);
        minus.epsilon = midpoint_epsilon(id, minus);
      }
      const bound_certificate a = certificate(id, rho, sigma, alg, plus);
      const bound_certificate b = certificate(id, rho, sigma, alg, minus);
      close(a.aux.at("rhs_unit"), b.aux.at("rhs_unit"), 1e-13);
      close(a.aux.at("cosh_weight"), b.aux.at("cosh_weight"), 1e-15);
    }
  }
}

TEST_CASE("certificates pass on random instances") {
  for (std::uint64_t seed : {901u, 902u, 903u}) {
    const density_operator rho = random_density(4, seed);
    const density_operator sigma = random_density(4, derive_seed(seed, 1));
    const subalgebra_spec alg = subalgebra_spec::block({2, 2});
    for (theorem_id id : all_theorem_ids()) {
      const double t = theorem_is_universal(id) ? 0.0 : 0.5;
      for (const bound_params& p : sample_params(id, t)) {
        INFO("seed " << seed << " " << theorem_name(id) << " s=" << p.s
                     << " alpha=" << p.alpha);
        const bound_certificate cert = certificate(id, rho, sigma, alg, p);
        REQUIRE(cert.passed);
      }
    }
  }
}

TEST_CASE("certificates are deterministic") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();
  bound_params p;
  p.t = 0.5;
  p.s = 0.3;
  const bound_certificate a = certificate(theorem_id::prq_fwd, rho, sigma, alg, p);
  const bound_certificate b = certificate(theorem_id::prq_fwd, rho, sigma, alg, p);
  REQUIRE(a.instance_fingerprint == b.instance_fingerprint);
  REQUIRE(a.margin == b.margin);
  REQUIRE(a.rhs == b.rhs);
}

TEST_CASE("certificate parameter validation") {
  const density_operator rho = rho4();
  const density_operator sigma = sig4();
  const subalgebra_spec alg = factor_alg();

  auto expect_reject = [&](theorem_id id, bound_params p) {
    REQUIRE_THROWS_AS(certificate(id, rho, sigma, alg, p), param_out_of_range);
  };

  bound_params p;
  p.alpha = 0.5;
  p.epsilon = 0.1;
  expect_reject(theorem_id::sandq, p);
  p.alpha = 1.0;
  expect_reject(theorem_id::sandq, p);
  p.alpha = kInf;
  expect_reject(theorem_id::sandq, p);

  bound_params q;
  q.alpha = 2.0;
  expect_reject(theorem_id::pre_fwd, q);
  q.alpha = 1.5;
  q.epsilon = 0.26;  // above (2 - alpha)/2 = 0.25
  expect_reject(theorem_id::pre_rev, q);

  bound_params r;
  r.s = 0.0;
  expect_reject(theorem_id::prq_fwd, r);
  r.s = 1.0;
  expect_reject(theorem_id::prq_fwd, r);

  bound_params w;
  w.epsilon = 0.5;
  expect_reject(theorem_id::re_rev, w);
  w.epsilon = -0.1;
  expect_reject(theorem_id::re_rev, w);

  bound_params s2;
  s2.alpha = 2.0;
  s2.epsilon = 0.25;  // at the boundary (1 - 1/2)/2
  expect_reject(theorem_id::sandq, s2);

  REQUIRE_THROWS_AS(certificate(theorem_id::re_fwd, random_density(4, 2, 905u),
                                sigma, alg, bound_params{}),
                    non_faithful);
}

TEST_CASE("theorem id names round trip") {
  int count = 0;
  for (theorem_id id : all_theorem_ids()) {
    REQUIRE(parse_theorem_id(theorem_name(id)) == id);
    ++count;
  }
  REQUIRE(count == k_theorem_count);
  REQUIRE_THROWS_AS(parse_theorem_id("NOT_A_FAMILY"), config_error);
  REQUIRE(theorem_recovery_side(theorem_id::prq_fwd_u) ==
          recovery_side::sigma_side);
  REQUIRE(theorem_recovery_side(theorem_id::sande) == recovery_side::rho_side);
}

TEST_CASE("saturated instances short-circuit to direct recovery checks") {
  SECTION("product pair saturates every family") {
    const auto [p, q] = product_pair(906u);
    const subalgebra_spec alg = factor_alg();
    for (theorem_id id : all_theorem_ids()) {
      for (const bound_params& bp : sample_params(id, 0.0)) {
        INFO(theorem_name(id));
        const bound_certificate cert = certificate(id, p, q, alg, bp);
        REQUIRE(cert.aux.count("saturation_short_circuit") == 1);
        REQUIRE(cert.recovery_error < 1e-8);
        REQUIRE(cert.rhs == cert.recovery_error);
        REQUIRE(cert.passed);
        REQUIRE(std::isnan(cert.params.S));
      }
    }
  }

  SECTION("identical states saturate with exact recovery") {
    const density_operator rho = random_density(4, 907u);
    bound_params p;
    const bound_certificate cert =
        certificate(theorem_id::re_fwd, rho, rho, factor_alg(), p);
    REQUIRE(cert.aux.count("saturation_short_circuit") == 1);
    REQUIRE(cert.recovery_error < 1e-9);
    REQUIRE(cert.passed);
  }
}

// ---------------------------------------------------------------------------
// Equivalence suite
// ---------------------------------------------------------------------------

TEST_CASE("lossless instances zero every equivalence residual") {
  const auto [p, q] = product_pair(908u);
  const equivalence_report rep = equivalence_suite(p, q, factor_alg());
  REQUIRE(rep.max_residual() <= 1e-8);
  REQUIRE(rep.as_array().size() == 7);

  const density_operator rho = random_density(4, 909u);
  const equivalence_report same = equivalence_suite(rho, rho, factor_alg());
  REQUIRE(same.max_residual() <= 1e-9);
}

TEST_CASE("lossy instances light up every equivalence residual") {
  int lossy = 0;
  for (std::uint64_t seed = 910u; seed < 920u; ++seed) {
    const density_operator rho = random_density(4, seed);
    const density_operator sigma = random_density(4, derive_seed(seed, 3));
    const equivalence_report rep = equivalence_suite(rho, sigma, factor_alg());
    if (rep.relative_entropy_gap > 1e-4) {
      ++lossy;
      for (double r : rep.as_array()) REQUIRE(r > 1e-8);
    }
  }
  REQUIRE(lossy >= 8);  // generic instances are lossy
}
