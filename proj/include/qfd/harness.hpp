#pragma once

// Campaign harness: deterministic instance generation, certificate
// sweeps over parameter grids, report serialization in JSON and CSV,
// and replay of individual serialized certificates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qfd/bounds.hpp"
#include "qfd/errors.hpp"
#include "qfd/qmat.hpp"
#include "qfd/recovery.hpp"

namespace qfd {

using ordered_json = nlohmann::ordered_json;

// Largest total dimension a campaign accepts by default; the dense
// spectral routines stay fast and well-conditioned below this.
inline constexpr int k_max_campaign_dim = 8;

// ---------------------------------------------------------------------------
// Instance shapes
// ---------------------------------------------------------------------------

// Either a tensor split d_a x d_b (subalgebra = first factor) or a
// plain dimension d_a (subalgebra = two diagonal blocks of sizes
// ceil(d/2) and floor(d/2)).
struct dim_entry {
  int d_a = 0;
  int d_b = 0;  // 0 marks a plain dimension

  bool is_tensor() const { return d_b > 0; }
  int total() const { return is_tensor() ? d_a * d_b : d_a; }

  std::string text() const {
    return is_tensor() ? std::to_string(d_a) + "x" + std::to_string(d_b)
                       : std::to_string(d_a);
  }

  subalgebra_spec algebra() const {
    if (is_tensor()) return subalgebra_spec::tensor_factor(d_a, d_b, 0);
    const int k = d_a - d_a / 2;
    return subalgebra_spec::block({k, d_a - k});
  }
};

inline dim_entry parse_dim_entry(const std::string& s) {
  const auto bad = [&] {
    return config_error("bad dims entry '" + s +
                        "': expected a dimension like 4 or a split like 2x2");
  };
  dim_entry out;
  std::size_t pos = 0;
  try {
    out.d_a = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw bad();
  }
  if (pos < s.size()) {
    if (s[pos] != 'x') throw bad();
    std::size_t pos2 = 0;
    const std::string rest = s.substr(pos + 1);
    try {
      out.d_b = std::stoi(rest, &pos2);
    } catch (const std::exception&) {
      throw bad();
    }
    if (pos2 != rest.size()) throw bad();
    if (out.d_a < 2 || out.d_b < 2)
      throw config_error("each tensor factor needs dimension at least 2");
  } else {
    if (out.d_a < 2) throw config_error("plain dimension must be at least 2");
  }
  if (out.total() > k_max_campaign_dim)
    throw config_error("dims entry '" + s + "' exceeds the total-dimension " +
                       "guard of " + std::to_string(k_max_campaign_dim));
  return out;
}

// ---------------------------------------------------------------------------
// Campaign configuration
// ---------------------------------------------------------------------------

struct campaign_config {
  std::vector<dim_entry> dims = {parse_dim_entry("2x2"), parse_dim_entry("2x3")};
  int trials = 200;
  std::uint64_t seed = 1234;
  std::vector<theorem_id> theorems = [] {
    const auto all = all_theorem_ids();
    return std::vector<theorem_id>(all.begin(), all.end());
  }();
  std::vector<double> t_grid = {0.0, 0.5, -0.5, 1.0, -1.0};
  std::string epsilon_policy = "midpoint";  // "midpoint" or "grid"
  std::vector<double> epsilon_grid;         // used when policy == "grid"
  std::vector<double> alpha_grid = {0.6, 0.75, 2.0, 3.0};
  std::vector<double> s_grid = {-0.5, -0.3, 0.3, 0.5};
  double tolerance = k_default_certificate_tolerance;
  std::string output_path;
  std::string format = "json";  // "json" or "csv"
  int workers = 1;
};

namespace detail {

inline bool needs_alpha_grid(const campaign_config& cfg) {
  for (theorem_id id : cfg.theorems)
    if (theorem_needs_alpha(id)) return true;
  return false;
}

inline bool needs_s_grid(const campaign_config& cfg) {
  for (theorem_id id : cfg.theorems)
    if (theorem_needs_s(id)) return true;
  return false;
}

}  // namespace detail

inline void validate_config(const campaign_config& cfg) {
  if (cfg.trials < 1) throw config_error("trials must be at least 1");
  if (cfg.dims.empty()) throw config_error("dims list must not be empty");
  for (const dim_entry& d : cfg.dims)
    if (d.total() < 2 || d.total() > k_max_campaign_dim)
      throw config_error("dims entry '" + d.text() + "' outside [2, " +
                         std::to_string(k_max_campaign_dim) + "]");
  if (cfg.theorems.empty()) throw config_error("theorem list must not be empty");
  if (cfg.t_grid.empty()) throw config_error("t grid must not be empty");
  for (double t : cfg.t_grid)
    if (!std::isfinite(t)) throw config_error("t grid entries must be finite");
  if (detail::needs_alpha_grid(cfg) && cfg.alpha_grid.empty())
    throw config_error("alpha grid must not be empty for the chosen theorems");
  if (detail::needs_s_grid(cfg) && cfg.s_grid.empty())
    throw config_error("s grid must not be empty for the chosen theorems");
  if (cfg.epsilon_policy != "midpoint" && cfg.epsilon_policy != "grid")
    throw config_error("epsilon policy must be 'midpoint' or 'grid'");
  if (cfg.epsilon_policy == "grid" && cfg.epsilon_grid.empty())
    throw config_error("epsilon grid must not be empty under the grid policy");
  if (!(cfg.tolerance >= 0.0))
    throw config_error("tolerance must be nonnegative");
  if (cfg.format != "json" && cfg.format != "csv")
    throw config_error("format must be 'json' or 'csv'");
  if (cfg.workers < 1) throw config_error("workers must be at least 1");
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

// One eigenvalue pinned just above the faithfulness floor: stresses the
// inverse moments without leaving the faithful domain.
inline density_operator near_degenerate_density(int dim, std::uint64_t seed) {
  const density_operator raw = random_density(dim, seed);
  rvec ev = raw.eigenvalues();
  ev(0) = 10.0 * k_faithful_floor;
  ev /= ev.sum();
  const cmat u = raw.eigenvectors();
  const cvec evc = ev.cast<cplx>();
  return density_operator::from_matrix(u * evc.asDiagonal() * u.adjoint());
}

struct campaign_instance {
  density_operator rho;
  density_operator sigma;
  dim_entry dims;
  std::string kind;  // "generic", "near_degenerate", or "product"
};

inline const char* instance_kind_of(int trial) {
  const int r = trial % 10;
  if (r == 9) return "product";
  if (r == 7 || r == 8) return "near_degenerate";
  return "generic";
}

namespace detail {

// draw a mass strictly inside (0, 1) from two squared normals
inline double unit_mass(gaussian_stream& g) {
  const double x = std::norm(g.normal_complex());
  const double y = std::norm(g.normal_complex());
  return (x + 0.1) / (x + y + 0.2);
}

inline density_operator two_block_density(int k, int m, std::uint64_t seed) {
  const density_operator top = random_density(k, derive_seed(seed, 1));
  const density_operator bot = random_density(m, derive_seed(seed, 2));
  gaussian_stream g(derive_seed(seed, 3));
  const double p = unit_mass(g);
  cmat out = cmat::Zero(k + m, k + m);
  out.topLeftCorner(k, k) = p * top.matrix();
  out.bottomRightCorner(m, m) = (1.0 - p) * bot.matrix();
  return density_operator::from_matrix(out);
}

}  // namespace detail

// Deterministic instance for (dims, seed, trial).  Per ten trials the
// mix is seven generic pairs, two pairs with one near-degenerate state
// (first the left state, then the right), and one exactly recoverable
// construction (shared tensor factor, or a pair already inside the
// block subalgebra).
inline campaign_instance make_instance(const dim_entry& dims,
                                       std::uint64_t base_seed, int trial) {
  if (trial < 0) throw config_error("trial index must be nonnegative");
  const std::uint64_t code =
      static_cast<std::uint64_t>(dims.d_a) * 100 +
      static_cast<std::uint64_t>(dims.d_b);
  const std::uint64_t inst =
      derive_seed(base_seed, code * 1000003ull + static_cast<std::uint64_t>(trial));
  const int n = dims.total();
  const std::string kind = instance_kind_of(trial);
  const int r = trial % 10;

  if (r == 9) {
    if (dims.is_tensor()) {
      const density_operator a = random_density(dims.d_a, derive_seed(inst, 1));
      const density_operator b = random_density(dims.d_a, derive_seed(inst, 2));
      const density_operator tau = random_density(dims.d_b, derive_seed(inst, 3));
      return {density_operator::from_matrix(tensor(a.matrix(), tau.matrix())),
              density_operator::from_matrix(tensor(b.matrix(), tau.matrix())),
              dims, kind};
    }
    const int k = dims.d_a - dims.d_a / 2;
    const int m = dims.d_a - k;
    return {detail::two_block_density(k, m, derive_seed(inst, 1)),
            detail::two_block_density(k, m, derive_seed(inst, 2)), dims, kind};
  }

  density_operator rho = (r == 7)
                             ? near_degenerate_density(n, derive_seed(inst, 1))
                             : random_density(n, derive_seed(inst, 1));
  density_operator sigma = (r == 8)
                               ? near_degenerate_density(n, derive_seed(inst, 2))
                               : random_density(n, derive_seed(inst, 2));
  return {std::move(rho), std::move(sigma), dims, kind};
}

// ---------------------------------------------------------------------------
// Parameter sweep
// ---------------------------------------------------------------------------

namespace detail {

struct sweep_point {
  theorem_id id;
  bound_params params;
};

// Expand the configured grids into concrete certificate parameters,
// keeping only admissible orders and epsilons for each family.
inline std::vector<sweep_point> build_sweep(const campaign_config& cfg) {
  std::vector<sweep_point> out;
  for (theorem_id id : cfg.theorems) {
    const std::vector<double> t_values =
        theorem_is_universal(id) ? std::vector<double>{0.0} : cfg.t_grid;

    std::vector<bound_params> ordered;
    if (theorem_needs_s(id)) {
      for (double s : cfg.s_grid) {
        if (!admissible_quasi_order(s)) continue;
        bound_params p;
        p.s = s;
        ordered.push_back(p);
      }
      if (ordered.empty())
        throw config_error(std::string("s grid has no admissible value for ") +
                           theorem_name(id));
    } else if (theorem_needs_alpha(id)) {
      for (double alpha : cfg.alpha_grid) {
        if (!theorem_admits_order(id, alpha)) continue;
        bound_params p;
        p.alpha = alpha;
        ordered.push_back(p);
      }
      if (ordered.empty())
        throw config_error(
            std::string("alpha grid has no admissible value for ") +
            theorem_name(id));
    } else {
      ordered.emplace_back();
    }

    for (double t : t_values) {
      for (bound_params base : ordered) {
        base.t = t;
        base.id = id;
        if (!theorem_needs_epsilon(id)) {
          out.push_back({id, base});
          continue;
        }
        if (cfg.epsilon_policy == "midpoint") {
          bound_params p = base;
          p.epsilon = midpoint_epsilon(id, p);
          out.push_back({id, p});
          continue;
        }
        const double ub = epsilon_upper_bound(id, base);
        bool any = false;
        for (double eps : cfg.epsilon_grid) {
          if (!(eps > 0.0 && eps < ub)) continue;
          bound_params p = base;
          p.epsilon = eps;
          out.push_back({id, p});
          any = true;
        }
        if (!any)
          throw config_error(
              std::string("epsilon grid has no admissible value for ") +
              theorem_name(id));
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::size_t expected_record_count(const campaign_config& cfg) {
  validate_config(cfg);
  return detail::build_sweep(cfg).size() * cfg.dims.size() *
         static_cast<std::size_t>(cfg.trials);
}

// ---------------------------------------------------------------------------
// Records and reports
// ---------------------------------------------------------------------------

struct campaign_record {
  int trial = 0;
  std::string dims;
  std::string kind;
  std::uint64_t seed = 0;  // campaign base seed, for replay regeneration
  bound_certificate cert;
  // failing certificates carry their states inline so the instance can
  // be replayed even without the generator
  bool has_instance = false;
  cmat rho_matrix;
  cmat sigma_matrix;
};

struct theorem_summary {
  int count = 0;
  int passed = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  std::string worst_fingerprint;
};

struct campaign_summary {
  int total = 0;
  int passed = 0;
  int failed = 0;
  std::map<std::string, theorem_summary> per_theorem;
};

struct campaign_report {
  campaign_config config;
  std::vector<campaign_record> records;
  campaign_summary summary;
  double wall_time_seconds = 0.0;

  bool all_passed() const { return summary.failed == 0; }
};

inline campaign_summary summarize(const std::vector<campaign_record>& records) {
  campaign_summary s;
  s.total = static_cast<int>(records.size());
  for (const campaign_record& r : records) {
    theorem_summary& t = s.per_theorem[theorem_name(r.cert.id)];
    ++t.count;
    if (r.cert.passed) {
      ++t.passed;
      ++s.passed;
    } else {
      ++s.failed;
    }
    if (r.cert.margin < t.min_margin) {
      t.min_margin = r.cert.margin;
      t.worst_fingerprint = r.cert.instance_fingerprint;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Campaign execution
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<campaign_record> run_one_job(const campaign_config& cfg,
                                                const std::vector<sweep_point>& sweep,
                                                int dims_index, int trial) {
  const dim_entry& dims = cfg.dims[static_cast<std::size_t>(dims_index)];
  const campaign_instance inst = make_instance(dims, cfg.seed, trial);
  const subalgebra_spec alg = dims.algebra();
  std::vector<campaign_record> out;
  out.reserve(sweep.size());
  for (const sweep_point& sp : sweep) {
    campaign_record rec;
    rec.trial = trial;
    rec.dims = dims.text();
    rec.kind = inst.kind;
    rec.seed = cfg.seed;
    rec.cert = certificate(sp.id, inst.rho, inst.sigma, alg, sp.params,
                           cfg.tolerance);
    if (!rec.cert.passed) {
      rec.has_instance = true;
      rec.rho_matrix = inst.rho.matrix();
      rec.sigma_matrix = inst.sigma.matrix();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

// Deterministic sweep over all (dims, trial, parameter) combinations.
// Trials are independent jobs; with several workers the jobs are
// striped across threads and merged back in job order, so the record
// list does not depend on the worker count.
inline campaign_report run_campaign(const campaign_config& cfg) {
  validate_config(cfg);
  const auto started = std::chrono::steady_clock::now();
  const std::vector<detail::sweep_point> sweep = detail::build_sweep(cfg);

  const int jobs = static_cast<int>(cfg.dims.size()) * cfg.trials;
  std::vector<std::vector<campaign_record>> slots(
      static_cast<std::size_t>(jobs));

  const int workers = std::max(1, std::min(cfg.workers, jobs));
  if (workers == 1) {
    for (int j = 0; j < jobs; ++j)
      slots[static_cast<std::size_t>(j)] =
          detail::run_one_job(cfg, sweep, j / cfg.trials, j % cfg.trials);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int j = w; j < jobs; j += workers)
            slots[static_cast<std::size_t>(j)] =
                detail::run_one_job(cfg, sweep, j / cfg.trials, j % cfg.trials);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  campaign_report report;
  report.config = cfg;
  for (std::vector<campaign_record>& slot : slots)
    for (campaign_record& rec : slot) report.records.push_back(std::move(rec));
  report.summary = summarize(report.records);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline ordered_json entries_json(const cmat& m) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      a.push_back({m(i, j).real(), m(i, j).imag()});
  return a;
}

inline cmat entries_matrix(int dim, const ordered_json& a) {
  if (dim < 1) throw parse_error("matrix dimension must be positive");
  if (!a.is_array() ||
      a.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
    throw parse_error("matrix entry list does not match the declared dimension");
  cmat m(dim, dim);
  std::size_t idx = 0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j, ++idx) {
      const ordered_json& e = a[idx];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number())
        throw parse_error("matrix entries must be [re, im] number pairs");
      m(i, j) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

inline void put_if_finite(ordered_json& j, const char* key, double v) {
  if (std::isfinite(v)) j[key] = v;
}

inline ordered_json params_json(const bound_params& p) {
  ordered_json j = ordered_json::object();
  j["t"] = p.t;
  put_if_finite(j, "s", p.s);
  put_if_finite(j, "alpha", p.alpha);
  put_if_finite(j, "epsilon", p.epsilon);
  put_if_finite(j, "S", p.S);
  put_if_finite(j, "T", p.T);
  return j;
}

inline double get_param(const ordered_json& j, const char* key) {
  if (!j.contains(key)) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

}  // namespace detail

inline ordered_json record_to_json(const campaign_record& rec) {
  ordered_json j = ordered_json::object();
  j["trial"] = rec.trial;
  j["dims"] = rec.dims;
  j["kind"] = rec.kind;
  j["seed"] = rec.seed;
  j["theorem"] = theorem_name(rec.cert.id);
  j["params"] = detail::params_json(rec.cert.params);
  j["lhs"] = rec.cert.lhs;
  j["rhs"] = rec.cert.rhs;
  j["margin"] = rec.cert.margin;
  j["recovery_error"] = rec.cert.recovery_error;
  j["tolerance"] = rec.cert.tolerance;
  j["passed"] = rec.cert.passed;
  j["fingerprint"] = rec.cert.instance_fingerprint;
  ordered_json aux = ordered_json::object();
  for (const auto& [key, value] : rec.cert.aux) aux[key] = value;
  j["aux"] = aux;
  if (rec.has_instance) {
    ordered_json inst = ordered_json::object();
    inst["dim"] = static_cast<int>(rec.rho_matrix.rows());
    inst["rho"] = detail::entries_json(rec.rho_matrix);
    inst["sigma"] = detail::entries_json(rec.sigma_matrix);
    j["instance"] = inst;
  }
  return j;
}

inline campaign_record record_from_json(const ordered_json& j) {
  try {
    campaign_record rec;
    rec.trial = j.at("trial").get<int>();
    rec.dims = j.at("dims").get<std::string>();
    rec.kind = j.at("kind").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    try {
      rec.cert.id = parse_theorem_id(j.at("theorem").get<std::string>());
    } catch (const config_error& e) {
      throw parse_error(e.what());
    }
    const ordered_json& p = j.at("params");
    rec.cert.params.t = p.at("t").get<double>();
    rec.cert.params.s = detail::get_param(p, "s");
    rec.cert.params.alpha = detail::get_param(p, "alpha");
    rec.cert.params.epsilon = detail::get_param(p, "epsilon");
    rec.cert.params.S = detail::get_param(p, "S");
    rec.cert.params.T = detail::get_param(p, "T");
    rec.cert.params.id = rec.cert.id;
    rec.cert.lhs = j.at("lhs").get<double>();
    rec.cert.rhs = j.at("rhs").get<double>();
    rec.cert.margin = j.at("margin").get<double>();
    rec.cert.recovery_error = j.at("recovery_error").get<double>();
    rec.cert.tolerance = j.at("tolerance").get<double>();
    rec.cert.passed = j.at("passed").get<bool>();
    rec.cert.instance_fingerprint = j.at("fingerprint").get<std::string>();
    for (const auto& [key, value] : j.at("aux").items())
      rec.cert.aux[key] = value.get<double>();
    if (j.contains("instance")) {
      const ordered_json& inst = j.at("instance");
      const int dim = inst.at("dim").get<int>();
      rec.has_instance = true;
      rec.rho_matrix = detail::entries_matrix(dim, inst.at("rho"));
      rec.sigma_matrix = detail::entries_matrix(dim, inst.at("sigma"));
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad certificate record: ") + e.what());
  }
}

inline ordered_json config_to_json(const campaign_config& cfg) {
  ordered_json j = ordered_json::object();
  ordered_json dims = ordered_json::array();
  for (const dim_entry& d : cfg.dims) dims.push_back(d.text());
  j["dims"] = dims;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  ordered_json names = ordered_json::array();
  for (theorem_id id : cfg.theorems) names.push_back(theorem_name(id));
  j["theorems"] = names;
  j["t_grid"] = cfg.t_grid;
  j["epsilon_policy"] = cfg.epsilon_policy;
  j["epsilon_grid"] = cfg.epsilon_grid;
  j["alpha_grid"] = cfg.alpha_grid;
  j["s_grid"] = cfg.s_grid;
  j["tolerance"] = cfg.tolerance;
  j["output_path"] = cfg.output_path;
  j["format"] = cfg.format;
  j["workers"] = cfg.workers;
  return j;
}

inline campaign_config config_from_json(const ordered_json& j) {
  try {
    campaign_config cfg;
    cfg.dims.clear();
    for (const auto& d : j.at("dims"))
      cfg.dims.push_back(parse_dim_entry(d.get<std::string>()));
    cfg.trials = j.at("trials").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.theorems.clear();
    for (const auto& name : j.at("theorems"))
      cfg.theorems.push_back(parse_theorem_id(name.get<std::string>()));
    cfg.t_grid = j.at("t_grid").get<std::vector<double>>();
    cfg.epsilon_policy = j.at("epsilon_policy").get<std::string>();
    cfg.epsilon_grid = j.at("epsilon_grid").get<std::vector<double>>();
    cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    cfg.s_grid = j.at("s_grid").get<std::vector<double>>();
    cfg.tolerance = j.at("tolerance").get<double>();
    cfg.output_path = j.at("output_path").get<std::string>();
    cfg.format = j.at("format").get<std::string>();
    cfg.workers = j.at("workers").get<int>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad campaign config: ") + e.what());
  } catch (const config_error& e) {
    throw parse_error(e.what());
  }
}

inline ordered_json summary_to_json(const campaign_summary& s) {
  ordered_json j = ordered_json::object();
  j["total"] = s.total;
  j["passed"] = s.passed;
  j["failed"] = s.failed;
  ordered_json per = ordered_json::object();
  for (const auto& [name, t] : s.per_theorem) {
    ordered_json e = ordered_json::object();
    e["count"] = t.count;
    e["passed"] = t.passed;
    e["min_margin"] = t.min_margin;
    e["worst_fingerprint"] = t.worst_fingerprint;
    per[name] = e;
  }
  j["per_theorem"] = per;
  return j;
}

inline campaign_summary summary_from_json(const ordered_json& j) {
  try {
    campaign_summary s;
    s.total = j.at("total").get<int>();
    s.passed = j.at("passed").get<int>();
    s.failed = j.at("failed").get<int>();
    for (const auto& [name, e] : j.at("per_theorem").items()) {
      theorem_summary t;
      t.count = e.at("count").get<int>();
      t.passed = e.at("passed").get<int>();
      t.min_margin = e.at("min_margin").get<double>();
      t.worst_fingerprint = e.at("worst_fingerprint").get<std::string>();
      s.per_theorem[name] = t;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad campaign summary: ") + e.what());
  }
}

inline std::string serialize_records(const std::vector<campaign_record>& recs) {
  ordered_json a = ordered_json::array();
  for (const campaign_record& r : recs) a.push_back(record_to_json(r));
  return a.dump(2) + "\n";
}

inline std::string serialize_report(const campaign_report& report) {
  ordered_json j = ordered_json::object();
  j["config"] = config_to_json(report.config);
  ordered_json recs = ordered_json::array();
  for (const campaign_record& r : report.records)
    recs.push_back(record_to_json(r));
  j["records"] = recs;
  j["summary"] = summary_to_json(report.summary);
  j["wall_time_seconds"] = report.wall_time_seconds;
  return j.dump(2) + "\n";
}

inline campaign_report parse_report(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad report JSON: ") + e.what());
  }
  try {
    campaign_report report;
    report.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("records"))
      report.records.push_back(record_from_json(r));
    report.summary = summary_from_json(j.at("summary"));
    report.wall_time_seconds = j.at("wall_time_seconds").get<double>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad report JSON: ") + e.what());
  }
}

namespace detail {

inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Records-only tabular export; the JSON format is the round-trippable
// report of record.
inline std::string report_to_csv(const campaign_report& report) {
  std::string out =
      "trial,dims,kind,theorem,t,s,alpha,epsilon,lhs,rhs,margin,"
      "recovery_error,tolerance,passed,fingerprint\n";
  for (const campaign_record& r : report.records) {
    const bound_params& p = r.cert.params;
    out += std::to_string(r.trial) + ',' + r.dims + ',' + r.kind + ',' +
           theorem_name(r.cert.id) + ',' + detail::csv_number(p.t) + ',' +
           detail::csv_number(p.s) + ',' + detail::csv_number(p.alpha) + ',' +
           detail::csv_number(p.epsilon) + ',' + detail::csv_number(r.cert.lhs) +
           ',' + detail::csv_number(r.cert.rhs) + ',' +
           detail::csv_number(r.cert.margin) + ',' +
           detail::csv_number(r.cert.recovery_error) + ',' +
           detail::csv_number(r.cert.tolerance) + ',' +
           (r.cert.passed ? "1" : "0") + ',' + r.cert.instance_fingerprint +
           '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// State-pair files
// ---------------------------------------------------------------------------

inline std::string serialize_state_pair(const density_operator& rho,
                                        const density_operator& sigma) {
  if (rho.dim() != sigma.dim())
    throw dimension_mismatch("state pair must share one dimension");
  ordered_json j = ordered_json::object();
  j["dim"] = rho.dim();
  j["rho"] = detail::entries_json(rho.matrix());
  j["sigma"] = detail::entries_json(sigma.matrix());
  return j.dump(2) + "\n";
}

// Densities are validated on load: non-Hermitian entries, trace away
// from one, or negative spectra are rejected by the constructor.
inline std::pair<density_operator, density_operator> parse_state_pair(
    const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad state file: ") + e.what());
  }
  int dim = 0;
  cmat rho_m, sigma_m;
  try {
    dim = j.at("dim").get<int>();
    rho_m = detail::entries_matrix(dim, j.at("rho"));
    sigma_m = detail::entries_matrix(dim, j.at("sigma"));
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad state file: ") + e.what());
  }
  return {density_operator::from_matrix(rho_m),
          density_operator::from_matrix(sigma_m)};
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

struct replay_result {
  bound_certificate cert;
  double recorded_margin = 0.0;
  bool margin_matches = false;
};

// Re-evaluate one serialized certificate record.  States come from the
// inline instance payload when present, otherwise they are regenerated
// from the recorded (seed, dims, trial) coordinates.  Without an
// override the recomputed margin must reproduce the recorded one.
inline replay_result replay(const std::string& record_text,
                            std::optional<double> t_override = std::nullopt) {
  ordered_json j;
  try {
    j = ordered_json::parse(record_text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("bad record JSON: ") + e.what());
  }
  const campaign_record rec = record_from_json(j);

  dim_entry dims;
  try {
    dims = parse_dim_entry(rec.dims);
  } catch (const config_error& e) {
    throw parse_error(e.what());
  }

  const auto [rho, sigma] =
      [&]() -> std::pair<density_operator, density_operator> {
    if (rec.has_instance)
      return {density_operator::from_matrix(rec.rho_matrix),
              density_operator::from_matrix(rec.sigma_matrix)};
    campaign_instance inst = make_instance(dims, rec.seed, rec.trial);
    return {std::move(inst.rho), std::move(inst.sigma)};
  }();

  bound_params params = rec.cert.params;
  if (t_override) params.t = *t_override;

  replay_result out;
  out.cert = certificate(rec.cert.id, rho, sigma, dims.algebra(), params,
                         rec.cert.tolerance);
  out.recorded_margin = rec.cert.margin;
  out.margin_matches =
      !t_override && std::abs(out.cert.margin - rec.cert.margin) <= 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("failed reading '" + path + "'");
  return buf.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace qfd
