#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qfd/errors.hpp"
#include "qfd/qmat.hpp"

namespace qfd {

struct quad_options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
  bool strict = true;  // throw if the error target is not met
};

namespace detail {

// Gauss--Kronrod 7/15 constants.  Nodes are for the positive half of
// [-1, 1], outermost first; the last entry is the center.  Odd positions
// (1, 3, 5) and the center carry the embedded Gauss rule.
inline constexpr double kK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
};
inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

inline double quad_abs(double x) { return std::abs(x); }
inline double quad_abs(const cmat& m) { return m.norm(); }

template <class F>
auto gk15_segment(F& f, double a, double b, double& err)
    -> std::decay_t<decltype(f(0.5 * (a + b)))> {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  using R = std::decay_t<decltype(f(c))>;
  R fc = f(c);
  R k = fc * kK15Weights[7];
  R g = fc * kG7Weights[3];
  for (int i = 0; i < 7; ++i) {
    R fsum = f(c + h * kK15Nodes[i]);
    fsum += f(c - h * kK15Nodes[i]);
    k += fsum * kK15Weights[i];
    if (i % 2 == 1) g += fsum * kG7Weights[(i - 1) / 2];
  }
  k *= h;
  g *= h;
  err = quad_abs(R(k - g));
  return k;
}

}  // namespace detail

// Adaptive Gauss--Kronrod integration on [a, b].  The integrand may return
// double or a matrix; the error is measured in absolute value resp.
// Frobenius norm.  Subdivision order is fully deterministic (worst error
// first, ties broken by position), as is the final summation order.
template <class F>
auto integrate_gk(F&& f, double a, double b, const quad_options& opt = {},
                  double* err_out = nullptr)
    -> std::decay_t<decltype(f(0.5 * (a + b)))> {
  using R = std::decay_t<decltype(f(0.5 * (a + b)))>;
  struct segment {
    double a, b, err;
    R val;
  };
  struct worse {
    bool operator()(const segment& x, const segment& y) const {
      if (x.err != y.err) return x.err < y.err;  // larger error on top
      if (x.a != y.a) return x.a > y.a;          // then leftmost on top
      return x.b > y.b;
    }
  };
  std::priority_queue<segment, std::vector<segment>, worse> heap;
  double err0 = 0.0;
  R val0 = detail::gk15_segment(f, a, b, err0);
  heap.push(segment{a, b, err0, std::move(val0)});
  double total_err = err0;
  double total_mag = detail::quad_abs(heap.top().val);
  int count = 1;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * total_mag) &&
         count < opt.max_intervals) {
    segment s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) {  // interval exhausted by roundoff
      heap.push(std::move(s));
      break;
    }
    double el = 0.0, er = 0.0;
    R vl = detail::gk15_segment(f, s.a, mid, el);
    R vr = detail::gk15_segment(f, mid, s.b, er);
    total_err += el + er - s.err;
    heap.push(segment{s.a, mid, el, std::move(vl)});
    heap.push(segment{mid, s.b, er, std::move(vr)});
    ++count;
    if ((count & 63) == 0) {
      // refresh the magnitude estimate occasionally
      total_mag = std::max(total_mag, detail::quad_abs(heap.top().val));
    }
  }
  std::vector<segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(),
            [](const segment& x, const segment& y) { return x.a < y.a; });
  R total = segs.front().val;
  for (std::size_t i = 1; i < segs.size(); ++i) total += segs[i].val;
  total_err = 0.0;
  for (const segment& s : segs) total_err += s.err;
  if (err_out) *err_out = total_err;
  if (opt.strict &&
      total_err > std::max(opt.abs_tol,
                           opt.rel_tol * detail::quad_abs(total)))
    throw convergence_failure(
        "quadrature stalled at error " + std::to_string(total_err) +
        " over [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return total;
}

// Integral over (0, inf) via the substitution x = tan(theta).  Suitable for
// integrands with an integrable singularity at 0 and at least O(x^{-2-d})
// decay times an integrable-power correction at infinity.
template <class F>
auto integrate_half_line(F&& f, const quad_options& opt = {},
                         double* err_out = nullptr) {
  auto g = [&f](double theta) {
    const double t = std::tan(theta);
    const double jac = 1.0 + t * t;
    return f(t) * jac;
  };
  return integrate_gk(g, 0.0, M_PI / 2.0, opt, err_out);
}

// Integral over the whole real line for integrands that decay at least
// exponentially in both directions: a central window plus width-16 blocks
// appended on either side until a block contributes less than the budget.
template <class F>
auto integrate_real_line(F&& f, const quad_options& opt = {},
                         double* err_out = nullptr)
    -> std::decay_t<decltype(f(0.0))> {
  using R = std::decay_t<decltype(f(0.0))>;
  quad_options piece = opt;
  piece.strict = false;
  piece.abs_tol = opt.abs_tol / 32.0;  // block budgets add up
  piece.rel_tol = opt.rel_tol / 32.0;
  const double block_tol = opt.abs_tol / 8.0;
  double err_total = 0.0, e = 0.0;
  R total = integrate_gk(f, -16.0, 16.0, piece, &e);
  err_total += e;
  bool settled_hi = false, settled_lo = false;
  double edge = 16.0;
  for (int k = 0; k < 64 && !(settled_hi && settled_lo); ++k) {
    if (!settled_hi) {
      R part = integrate_gk(f, edge, edge + 16.0, piece, &e);
      err_total += e;
      if (detail::quad_abs(part) + e < block_tol) settled_hi = true;
      total += part;
    }
    if (!settled_lo) {
      R part = integrate_gk(f, -edge - 16.0, -edge, piece, &e);
      err_total += e;
      if (detail::quad_abs(part) + e < block_tol) settled_lo = true;
      total += part;
    }
    edge += 16.0;
  }
  if (err_out) *err_out = err_total;
  if (opt.strict) {
    if (!(settled_hi && settled_lo))
      throw convergence_failure("real-line integral tail did not settle");
    if (err_total > std::max(opt.abs_tol,
                             opt.rel_tol * detail::quad_abs(total)))
      throw convergence_failure("real-line integral stalled at error " +
                                std::to_string(err_total));
  }
  return total;
}

// Integral over (0, inf) on the logarithmic axis (x = e^y), for integrands
// whose product with x decays like a positive power of x at 0 and a
// negative power at infinity.
template <class F>
auto integrate_log_axis(F&& f, const quad_options& opt = {},
                        double* err_out = nullptr) {
  auto g = [&f](double y) {
    const double x = std::exp(y);
    return f(x) * x;
  };
  return integrate_real_line(g, opt, err_out);
}

namespace detail {

inline std::pair<rvec, rvec> gauss_legendre_build(int n) {
  rvec x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * xi * p1 - k * p2) / (k + 1.0);
      }
      // p0 = P_n(xi), p1 = P_{n-1}(xi)
      pp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      const double dx = -p0 / pp;
      xi += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x(i) = -xi;
    x(n - 1 - i) = xi;
    const double wi = 2.0 / ((1.0 - xi * xi) * pp * pp);
    w(i) = wi;
    w(n - 1 - i) = wi;
  }
  if (n % 2 == 1) x(m - 1) = 0.0;
  return {x, w};
}

}  // namespace detail

// Gauss--Legendre nodes and weights on [-1, 1], ascending, cached per order.
inline const std::pair<rvec, rvec>& gauss_legendre(int n) {
  if (n < 1) throw domain_error("Gauss-Legendre order must be >= 1");
  static std::map<int, std::pair<rvec, rvec>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, detail::gauss_legendre_build(n)).first;
  return it->second;
}

// Same rule affinely mapped to [a, b].
inline std::pair<rvec, rvec> gauss_legendre(int n, double a, double b) {
  const auto& base = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  rvec x = (base.first.array() * half + mid).matrix();
  rvec w = base.second * half;
  return {x, w};
}

}  // namespace qfd
