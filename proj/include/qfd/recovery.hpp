#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qfd/errors.hpp"
#include "qfd/qmat.hpp"
#include "qfd/quadrature.hpp"

namespace qfd {

// A *-subalgebra of the ambient matrix algebra, described by one of three
// shapes: a tensor factor (operators X (x) I or I (x) X), a pinching by an
// orthogonal family of projectors summing to the identity, or the special
// case of contiguous diagonal blocks.  The trace-preserving conditional
// expectation onto the subalgebra is the workhorse: tr(x E(y)) = tr(x y)
// for every subalgebra element x.
class subalgebra_spec {
 public:
  enum class kind { tensor_factor, pinching, block };

  static subalgebra_spec tensor_factor(int dim_left, int dim_right,
                                       int keep) {
    if (dim_left <= 0 || dim_right <= 0)
      throw dimension_mismatch("factor dimensions must be positive");
    if (keep != 0 && keep != 1)
      throw domain_error("keep selector must be 0 (left) or 1 (right)");
    subalgebra_spec s;
    s.kind_ = kind::tensor_factor;
    s.dim_ = dim_left * dim_right;
    s.dim_left_ = dim_left;
    s.dim_right_ = dim_right;
    s.keep_ = keep;
    return s;
  }

  static subalgebra_spec pinching(std::vector<cmat> projectors) {
    if (projectors.empty())
      throw domain_error("pinching needs at least one projector");
    const int n = static_cast<int>(projectors.front().rows());
    cmat sum = cmat::Zero(n, n);
    for (const cmat& p : projectors) {
      check_square(p);
      if (p.rows() != n)
        throw dimension_mismatch("projectors of mixed dimensions");
      if (!is_hermitian(p))
        throw non_hermitian_input("projector is not Hermitian");
      if (max_abs_entry(p * p - p) > 1e-10)
        throw domain_error("pinching element is not idempotent");
      sum += p;
    }
    if (max_abs_entry(sum - cmat::Identity(n, n)) > 1e-10)
      throw domain_error("projectors do not resolve the identity");
    for (std::size_t a = 0; a + 1 < projectors.size(); ++a)
      for (std::size_t b = a + 1; b < projectors.size(); ++b)
        if (max_abs_entry(projectors[a] * projectors[b]) > 1e-10)
          throw domain_error("projectors are not mutually orthogonal");
    subalgebra_spec s;
    s.kind_ = kind::pinching;
    s.dim_ = n;
    s.projectors_ = std::move(projectors);
    return s;
  }

  static subalgebra_spec block(const std::vector<int>& sizes) {
    if (sizes.empty()) throw domain_error("block partition is empty");
    int total = 0;
    for (int b : sizes) {
      if (b <= 0) throw domain_error("block sizes must be positive");
      total += b;
    }
    std::vector<cmat> projectors;
    projectors.reserve(sizes.size());
    int offset = 0;
    for (int b : sizes) {
      cmat p = cmat::Zero(total, total);
      p.block(offset, offset, b, b) = cmat::Identity(b, b);
      projectors.push_back(std::move(p));
      offset += b;
    }
    subalgebra_spec s = pinching(std::move(projectors));
    s.kind_ = kind::block;
    return s;
  }

  kind shape() const { return kind_; }
  int dim() const { return dim_; }

  // Trace-preserving conditional expectation onto the subalgebra,
  // expressed on the ambient space.
  cmat expect(const cmat& x) const {
    check_square(x);
    if (x.rows() != dim_)
      throw dimension_mismatch("operator does not live on this space");
    switch (kind_) {
      case kind::tensor_factor: {
        if (keep_ == 0) {
          const cmat red = partial_trace(x, dim_left_, dim_right_, 0);
          return tensor(red, cmat::Identity(dim_right_, dim_right_) /
                                 static_cast<double>(dim_right_));
        }
        const cmat red = partial_trace(x, dim_left_, dim_right_, 1);
        return tensor(cmat::Identity(dim_left_, dim_left_) /
                          static_cast<double>(dim_left_),
                      red);
      }
      case kind::pinching:
      case kind::block: {
        cmat out = cmat::Zero(dim_, dim_);
        for (const cmat& p : projectors_) out += p * x * p;
        return out;
      }
    }
    throw domain_error("unreachable subalgebra shape");
  }

  density_operator expect(const density_operator& rho) const {
    return density_operator::from_matrix(expect(rho.matrix()));
  }

 private:
  subalgebra_spec() = default;
  kind kind_ = kind::block;
  int dim_ = 0;
  int dim_left_ = 0, dim_right_ = 0, keep_ = 0;
  std::vector<cmat> projectors_;
};

inline cmat conditional_expectation(const subalgebra_spec& alg,
                                    const cmat& x) {
  return alg.expect(x);
}

inline density_operator conditional_expectation(const subalgebra_spec& alg,
                                                const density_operator& rho) {
  return alg.expect(rho);
}

// Rotated recovery map for a subalgebra, anchored at a faithful state rho:
//   x  |->  rho^{1/2 - it} rho_N^{-1/2 + it} x rho_N^{-1/2 - it} rho^{1/2 + it}
// with rho_N the conditional expectation of rho.  A single-element
// congruence, hence completely positive; it preserves the trace of
// subalgebra elements and maps rho_N back to rho for every t.
class subalg_recovery {
 public:
  subalg_recovery(const density_operator& rho, const subalgebra_spec& alg,
                  double t)
      : t_(t) {
    const density_operator rho_n = alg.expect(rho);
    k_ = rho.cpower(cplx(0.5, -t)) * rho_n.cpower(cplx(-0.5, t));
  }

  double t() const { return t_; }
  const cmat& element() const { return k_; }

  cmat apply(const cmat& x) const { return k_ * x * k_.adjoint(); }

  density_operator apply(const density_operator& x) const {
    return density_operator::from_matrix(apply(x.matrix()));
  }

  // Trace-pairing adjoint: tr(adjoint_apply(x) y) = tr(x apply(y)).
  cmat adjoint_apply(const cmat& x) const {
    return k_.adjoint() * x * k_;
  }

 private:
  double t_;
  cmat k_;
};

inline subalg_recovery petz_subalg(const density_operator& rho,
                                   const subalgebra_spec& alg) {
  return subalg_recovery(rho, alg, 0.0);
}

inline subalg_recovery rotated_petz_subalg(const density_operator& rho,
                                           const subalgebra_spec& alg,
                                           double t) {
  return subalg_recovery(rho, alg, t);
}

// Nodes and weights of the universal mixing profile
// (pi/2) (cosh(pi t) + 1)^{-1} dt, discretized by a 201-point
// Gauss-Legendre rule on [-12, 12] (the omitted tails carry less than
// 1e-16 of the unit mass).
inline const std::vector<std::pair<double, double>>& mixing_profile() {
  static const std::vector<std::pair<double, double>> table = [] {
    auto [x, w] = gauss_legendre(201, -12.0, 12.0);
    std::vector<std::pair<double, double>> t;
    t.reserve(201);
    for (int i = 0; i < 201; ++i) {
      const double density = (M_PI / 2.0) / (std::cosh(M_PI * x(i)) + 1.0);
      t.emplace_back(x(i), w(i) * density);
    }
    return t;
  }();
  return table;
}

// Universal (state-independent-in-t) recovery map: the mixture of rotated
// maps at half angle, x |-> int R^{t/2}(x) dbeta(t).
class universal_subalg_recovery {
 public:
  universal_subalg_recovery(const density_operator& rho,
                            const subalgebra_spec& alg) {
    const density_operator rho_n = alg.expect(rho);
    const auto& profile = mixing_profile();
    terms_.reserve(profile.size());
    double mass = 0.0;
    for (const auto& [t, w] : profile) {
      const cmat k = rho.cpower(cplx(0.5, -t / 2.0)) *
                     rho_n.cpower(cplx(-0.5, t / 2.0));
      terms_.emplace_back(w, k);
      mass += w;
    }
    if (std::abs(mass - 1.0) > 1e-10)
      throw convergence_failure("mixing profile mass " +
                                std::to_string(mass));
  }

  double total_mass() const {
    double m = 0.0;
    for (const auto& [w, k] : terms_) m += w;
    return m;
  }

  cmat apply(const cmat& x) const {
    cmat out = cmat::Zero(x.rows(), x.cols());
    for (const auto& [w, k] : terms_) out += w * (k * x * k.adjoint());
    return out;
  }

  density_operator apply(const density_operator& x) const {
    return density_operator::from_matrix(apply(x.matrix()));
  }

 private:
  std::vector<std::pair<double, cmat>> terms_;
};

inline universal_subalg_recovery universal_petz_subalg(
    const density_operator& rho, const subalgebra_spec& alg) {
  return universal_subalg_recovery(rho, alg);
}

// A completely positive trace-preserving map in Kraus form.
class quantum_channel {
 public:
  static quantum_channel from_kraus(std::vector<cmat> kraus) {
    if (kraus.empty()) throw domain_error("channel needs Kraus elements");
    const int din = static_cast<int>(kraus.front().cols());
    const int dout = static_cast<int>(kraus.front().rows());
    cmat acc = cmat::Zero(din, din);
    for (const cmat& k : kraus) {
      if (k.rows() != dout || k.cols() != din)
        throw dimension_mismatch("Kraus elements of mixed shapes");
      acc += k.adjoint() * k;
    }
    if (max_abs_entry(acc - cmat::Identity(din, din)) > 1e-10 * din)
      throw domain_error("Kraus elements do not preserve the trace");
    quantum_channel c;
    c.kraus_ = std::move(kraus);
    c.din_ = din;
    c.dout_ = dout;
    return c;
  }

  // Stinespring construction: QR of a Ginibre block gives an isometry
  // V : C^din -> C^dout (x) C^denv whose environment slices are the Kraus
  // elements.
  static quantum_channel random(int dim_in, int dim_out, int env_dim,
                                std::uint64_t seed) {
    if (dim_in <= 0 || dim_out <= 0 || env_dim <= 0)
      throw dimension_mismatch("channel dimensions must be positive");
    if (dim_out * env_dim < dim_in)
      throw dimension_mismatch("no isometry into so small a target");
    gaussian_stream g(seed);
    const cmat gm = ginibre(dim_out * env_dim, dim_in, g);
    Eigen::HouseholderQR<cmat> qr(gm);
    cmat v = qr.householderQ() * cmat::Identity(dim_out * env_dim, dim_in);
    const cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim_in; ++j) {
      const cplx d = r(j, j);
      const double mag = std::abs(d);
      v.col(j) *= (mag > 0.0) ? std::conj(d) / mag : cplx(1.0, 0.0);
    }
    std::vector<cmat> kraus(env_dim, cmat::Zero(dim_out, dim_in));
    for (int e = 0; e < env_dim; ++e)
      for (int o = 0; o < dim_out; ++o)
        for (int j = 0; j < dim_in; ++j)
          kraus[e](o, j) = v(o * env_dim + e, j);
    return from_kraus(std::move(kraus));
  }

  int dim_in() const { return din_; }
  int dim_out() const { return dout_; }
  const std::vector<cmat>& kraus() const { return kraus_; }

  cmat apply(const cmat& x) const {
    if (x.rows() != din_ || x.cols() != din_)
      throw dimension_mismatch("channel input has the wrong dimension");
    cmat out = cmat::Zero(dout_, dout_);
    for (const cmat& k : kraus_) out += k * x * k.adjoint();
    return out;
  }

  density_operator apply(const density_operator& rho) const {
    return density_operator::from_matrix(apply(rho.matrix()));
  }

  cmat apply_adjoint(const cmat& y) const {
    if (y.rows() != dout_ || y.cols() != dout_)
      throw dimension_mismatch("adjoint input has the wrong dimension");
    cmat out = cmat::Zero(din_, din_);
    for (const cmat& k : kraus_) out += k.adjoint() * y * k;
    return out;
  }

  // Choi operator sum_ij E_ij (x) Phi(E_ij); positive semidefinite iff the
  // map is completely positive.
  cmat choi() const {
    cmat c = cmat::Zero(din_ * dout_, din_ * dout_);
    for (int i = 0; i < din_; ++i)
      for (int j = 0; j < din_; ++j) {
        cmat eij = cmat::Zero(din_, din_);
        eij(i, j) = 1.0;
        cmat unit = cmat::Zero(din_, din_);
        unit(i, j) = 1.0;
        c += tensor(unit, apply(eij));
      }
    return c;
  }

 private:
  quantum_channel() = default;
  std::vector<cmat> kraus_;
  int din_ = 0, dout_ = 0;
};

// Rotated recovery map for a channel Phi, anchored at sigma:
//   y |-> sigma^{1/2-it} Phi*( Phi(sigma)^{-1/2+it} y Phi(sigma)^{-1/2-it} ) sigma^{1/2+it}
class channel_recovery {
 public:
  channel_recovery(const quantum_channel& phi, const density_operator& sigma,
                   double t)
      : phi_(phi), t_(t) {
    if (sigma.dim() != phi.dim_in())
      throw dimension_mismatch("anchor state must live on the channel input");
    const density_operator out =
        density_operator::from_matrix(phi.apply(sigma.matrix()));
    pre_ = out.cpower(cplx(-0.5, t));
    post_ = sigma.cpower(cplx(0.5, -t));
  }

  double t() const { return t_; }

  cmat apply(const cmat& y) const {
    return post_ * phi_.apply_adjoint(pre_ * y * pre_.adjoint()) *
           post_.adjoint();
  }

  density_operator apply(const density_operator& y) const {
    return density_operator::from_matrix(apply(y.matrix()));
  }

 private:
  quantum_channel phi_;
  double t_;
  cmat pre_;   // Phi(sigma)^{-1/2+it}
  cmat post_;  // sigma^{1/2-it}
};

inline channel_recovery petz_channel(const quantum_channel& phi,
                                     const density_operator& sigma) {
  return channel_recovery(phi, sigma, 0.0);
}

inline channel_recovery rotated_petz_channel(const quantum_channel& phi,
                                             const density_operator& sigma,
                                             double t) {
  return channel_recovery(phi, sigma, t);
}

}  // namespace qfd
