// Command-line interface: one-shot divergence and residual computations,
// single bound certificates, campaign sweeps over generated instances,
// and replay of serialized certificate records.
//
// Exit codes: 0 when everything requested passed, 1 when any certificate
// failed its bound, 2 on usage, configuration, parse, or input errors.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qfd/divergence.hpp"
#include "qfd/harness.hpp"
#include "qfd/optdiv.hpp"

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Shared option blocks
// ---------------------------------------------------------------------------

struct state_source {
  std::string states_path;   // state-pair JSON file; empty -> generate
  std::string dims = "2x2";  // instance shape, also fixes the restriction
  std::uint64_t seed = 1234;
  int trial = 0;
  std::string save_path;  // optionally write the states used
};

void add_state_options(CLI::App* cmd, state_source& src) {
  cmd->add_option("--states", src.states_path,
                  "state-pair JSON file {dim, rho, sigma} with row-major "
                  "[re, im] entries; omit to generate an instance");
  cmd->add_option("--dims", src.dims,
                  "instance shape: a split like 2x2 (restriction = first "
                  "factor) or a plain dimension like 4 (restriction = two "
                  "diagonal blocks)");
  cmd->add_option("--seed", src.seed, "base seed for generated instances");
  cmd->add_option("--trial", src.trial,
                  "trial index selecting the generated instance (its mix "
                  "slot: 0-6 generic, 7-8 near-degenerate, 9 lossless)");
  cmd->add_option("--save-states", src.save_path,
                  "also write the states used to this state-pair JSON file");
}

struct loaded_states {
  qfd::density_operator rho;
  qfd::density_operator sigma;
  qfd::dim_entry dims;
  std::string kind;
  std::string origin;
};

loaded_states load_states(const state_source& src) {
  const qfd::dim_entry dims = qfd::parse_dim_entry(src.dims);
  if (!src.states_path.empty()) {
    auto [rho, sigma] = qfd::parse_state_pair(qfd::read_text_file(src.states_path));
    if (rho.dim() != dims.total())
      throw qfd::config_error(
          "state file dimension " + std::to_string(rho.dim()) +
          " does not match --dims " + dims.text());
    loaded_states out{std::move(rho), std::move(sigma), dims, "file",
                      "file:" + src.states_path};
    if (!src.save_path.empty())
      qfd::write_text_file(src.save_path,
                           qfd::serialize_state_pair(out.rho, out.sigma));
    return out;
  }
  qfd::campaign_instance inst = qfd::make_instance(dims, src.seed, src.trial);
  loaded_states out{std::move(inst.rho), std::move(inst.sigma), dims,
                    inst.kind,
                    "generated:" + dims.text() + "/" +
                        std::to_string(src.seed) + "/" +
                        std::to_string(src.trial)};
  if (!src.save_path.empty())
    qfd::write_text_file(src.save_path,
                         qfd::serialize_state_pair(out.rho, out.sigma));
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  qfd::write_text_file(out_path, text);
}

// ---------------------------------------------------------------------------
// compute
// ---------------------------------------------------------------------------

struct compute_options {
  state_source src;
  std::string divergence;
  bool equivalence = false;
  double alpha = kNaN;
  double s = kNaN;
  double tolerance = 1e-8;
  std::string out_path;
};

double evaluate_divergence(const compute_options& opt,
                           const qfd::density_operator& rho,
                           const qfd::density_operator& sigma) {
  const std::string& name = opt.divergence;
  const auto need_alpha = [&] {
    if (std::isnan(opt.alpha))
      throw qfd::config_error("divergence '" + name + "' requires --alpha");
    return opt.alpha;
  };
  if (name == "umegaki") return qfd::umegaki(rho, sigma);
  if (name == "petz-renyi") return qfd::petz_renyi(rho, sigma, need_alpha());
  if (name == "petz-quasi") {
    if (std::isnan(opt.s))
      throw qfd::config_error("divergence 'petz-quasi' requires --s");
    return qfd::petz_renyi_quasi(rho, sigma, opt.s);
  }
  if (name == "sandwiched") return qfd::sandwiched(rho, sigma, need_alpha());
  if (name == "sandwiched-quasi")
    return qfd::sandwiched_quasi(rho, sigma, need_alpha());
  if (name == "fidelity") return qfd::uhlmann_fidelity(rho, sigma);
  if (name == "holevo-fidelity") return qfd::holevo_fidelity(rho, sigma);
  if (name == "q-quadratic") return qfd::q_quadratic(rho, sigma);
  if (name == "q-inverse") return qfd::q_inverse(rho, sigma);
  if (name == "optimized-power")
    return qfd::holder_extremizer(rho, sigma, need_alpha()).value;
  throw qfd::config_error(
      "unknown divergence '" + name +
      "'; choose from umegaki, petz-renyi, petz-quasi, sandwiched, "
      "sandwiched-quasi, fidelity, holevo-fidelity, q-quadratic, q-inverse, "
      "optimized-power");
}

int run_compute(const compute_options& opt) {
  if (opt.divergence.empty() == !opt.equivalence)
    throw qfd::config_error(
        "compute needs exactly one of --divergence NAME or --equivalence");
  const loaded_states st = load_states(opt.src);

  qfd::ordered_json j;
  j["states"] = st.origin;
  if (!opt.divergence.empty()) {
    j["divergence"] = opt.divergence;
    if (!std::isnan(opt.alpha)) j["alpha"] = opt.alpha;
    if (!std::isnan(opt.s)) j["s"] = opt.s;
    j["value"] = evaluate_divergence(opt, st.rho, st.sigma);
  } else {
    const qfd::equivalence_report eq =
        qfd::equivalence_suite(st.rho, st.sigma, st.dims.algebra());
    j["dims"] = st.dims.text();
    qfd::ordered_json res;
    res["relative_entropy_gap"] = eq.relative_entropy_gap;
    res["sandwiched_entropy_gap"] = eq.sandwiched_entropy_gap;
    res["optimized_inverse_root_gap"] = eq.optimized_inverse_root_gap;
    res["optimized_sample_gap"] = eq.optimized_sample_gap;
    res["sigma_recovery_distance"] = eq.sigma_recovery_distance;
    res["rho_recovery_distance"] = eq.rho_recovery_distance;
    res["petz_witness_distance"] = eq.petz_witness_distance;
    j["residuals"] = res;
    j["max_residual"] = eq.max_residual();
    j["tolerance"] = opt.tolerance;
    j["lossless"] = eq.max_residual() <= opt.tolerance;
  }
  emit(j.dump(2) + "\n", opt.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

struct certify_options {
  state_source src;
  std::string theorem;
  double t = 0.0;
  double alpha = kNaN;
  double s = kNaN;
  double epsilon = kNaN;
  double tolerance = qfd::k_default_certificate_tolerance;
  std::string out_path;
};

int run_certify(const certify_options& opt) {
  if (opt.theorem.empty())
    throw qfd::config_error("certify requires --theorem NAME");
  const qfd::theorem_id id = qfd::parse_theorem_id(opt.theorem);
  const loaded_states st = load_states(opt.src);

  qfd::bound_params params;
  params.t = opt.t;
  params.id = id;
  if (qfd::theorem_needs_s(id)) {
    if (std::isnan(opt.s))
      throw qfd::config_error(std::string(qfd::theorem_name(id)) +
                              " requires --s");
    params.s = opt.s;
  }
  if (qfd::theorem_needs_alpha(id)) {
    if (std::isnan(opt.alpha))
      throw qfd::config_error(std::string(qfd::theorem_name(id)) +
                              " requires --alpha");
    params.alpha = opt.alpha;
  }
  if (qfd::theorem_needs_epsilon(id))
    params.epsilon =
        std::isnan(opt.epsilon) ? qfd::midpoint_epsilon(id, params) : opt.epsilon;

  qfd::campaign_record rec;
  rec.trial = opt.src.trial;
  rec.dims = st.dims.text();
  rec.kind = st.kind;
  rec.seed = opt.src.seed;
  rec.cert = qfd::certificate(id, st.rho, st.sigma, st.dims.algebra(), params,
                              opt.tolerance);
  // always embed the states so the record replays standalone
  rec.has_instance = true;
  rec.rho_matrix = st.rho.matrix();
  rec.sigma_matrix = st.sigma.matrix();

  emit(qfd::record_to_json(rec).dump(2) + "\n", opt.out_path);
  return rec.cert.passed ? 0 : 1;
}

// ---------------------------------------------------------------------------
// campaign
// ---------------------------------------------------------------------------

struct campaign_options {
  std::vector<std::string> dims;
  int trials = 200;
  std::uint64_t seed = 1234;
  std::vector<std::string> theorems;
  std::vector<double> t_grid;
  std::vector<double> alpha_grid;
  std::vector<double> s_grid;
  std::string epsilon = "midpoint";
  double tolerance = qfd::k_default_certificate_tolerance;
  std::string out_path;
  std::string format = "json";
  int workers = 1;
};

std::vector<std::string> split_commas(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& token : raw) {
    std::size_t start = 0;
    while (start <= token.size()) {
      const std::size_t comma = token.find(',', start);
      const std::string piece =
          token.substr(start, comma == std::string::npos ? std::string::npos
                                                         : comma - start);
      if (!piece.empty()) out.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

int run_campaign_cmd(const campaign_options& opt) {
  qfd::campaign_config cfg;
  if (!opt.dims.empty()) {
    cfg.dims.clear();
    for (const std::string& d : split_commas(opt.dims))
      cfg.dims.push_back(qfd::parse_dim_entry(d));
  }
  cfg.trials = opt.trials;
  cfg.seed = opt.seed;
  if (!opt.theorems.empty()) {
    cfg.theorems.clear();
    for (const std::string& name : split_commas(opt.theorems))
      cfg.theorems.push_back(qfd::parse_theorem_id(name));
  }
  if (!opt.t_grid.empty()) cfg.t_grid = opt.t_grid;
  if (!opt.alpha_grid.empty()) cfg.alpha_grid = opt.alpha_grid;
  if (!opt.s_grid.empty()) cfg.s_grid = opt.s_grid;
  if (opt.epsilon == "midpoint") {
    cfg.epsilon_policy = "midpoint";
  } else {
    cfg.epsilon_policy = "grid";
    cfg.epsilon_grid.clear();
    for (const std::string& piece : split_commas({opt.epsilon})) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(piece, &pos);
        if (pos != piece.size()) throw std::invalid_argument(piece);
        cfg.epsilon_grid.push_back(v);
      } catch (const std::exception&) {
        throw qfd::config_error("--epsilon wants 'midpoint' or a comma list "
                                "of numbers, got '" + piece + "'");
      }
    }
  }
  cfg.tolerance = opt.tolerance;
  cfg.format = opt.format;
  cfg.workers = opt.workers;

  // resolve the output target before the long run so config errors are
  // cheap: --out wins; otherwise the default-output directory from the
  // environment, if set, receives a default-named report; else stdout
  std::string out_path = opt.out_path;
  if (out_path.empty()) {
    if (const char* dir = std::getenv("QFD_OUT_DIR"); dir != nullptr && *dir) {
      std::filesystem::create_directories(dir);
      out_path = (std::filesystem::path(dir) /
                  (cfg.format == "csv" ? "campaign_report.csv"
                                       : "campaign_report.json"))
                     .string();
    }
  }
  cfg.output_path = out_path;

  const qfd::campaign_report report = qfd::run_campaign(cfg);
  const std::string text = cfg.format == "csv" ? qfd::report_to_csv(report)
                                               : qfd::serialize_report(report);
  emit(text, out_path);

  std::fprintf(stderr, "records=%zu passed=%d failed=%d wall=%.2fs%s%s\n",
               report.records.size(), report.summary.passed,
               report.summary.failed, report.wall_time_seconds,
               out_path.empty() ? "" : " out=",
               out_path.empty() ? "" : out_path.c_str());
  return report.all_passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

struct replay_options {
  std::string record_path;
  std::string report_path;
  int index = 0;
  double t_override = kNaN;
};

int run_replay(const replay_options& opt) {
  if (opt.record_path.empty() == opt.report_path.empty())
    throw qfd::config_error(
        "replay needs exactly one of --in RECORD_FILE or --report "
        "REPORT_FILE (with --index)");

  std::string record_text;
  if (!opt.record_path.empty()) {
    record_text = qfd::read_text_file(opt.record_path);
  } else {
    const qfd::campaign_report report =
        qfd::parse_report(qfd::read_text_file(opt.report_path));
    if (opt.index < 0 ||
        static_cast<std::size_t>(opt.index) >= report.records.size())
      throw qfd::config_error(
          "--index " + std::to_string(opt.index) + " outside the " +
          std::to_string(report.records.size()) + " records in the report");
    record_text =
        qfd::record_to_json(report.records[static_cast<std::size_t>(opt.index)])
            .dump();
  }

  const std::optional<double> t_override =
      std::isnan(opt.t_override) ? std::nullopt
                                 : std::optional<double>(opt.t_override);
  const qfd::replay_result res = qfd::replay(record_text, t_override);

  qfd::ordered_json j;
  j["theorem"] = qfd::theorem_name(res.cert.id);
  j["lhs"] = res.cert.lhs;
  j["rhs"] = res.cert.rhs;
  j["margin"] = res.cert.margin;
  j["recovery_error"] = res.cert.recovery_error;
  j["tolerance"] = res.cert.tolerance;
  j["passed"] = res.cert.passed;
  j["fingerprint"] = res.cert.instance_fingerprint;
  j["recorded_margin"] = res.recorded_margin;
  j["margin_matches"] = res.margin_matches;
  if (t_override) j["t_override"] = *t_override;
  std::cout << j.dump(2) << "\n";

  if (!res.cert.passed) return 1;
  if (!t_override && !res.margin_matches) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qfd: checks that restricting a pair of quantum states to a "
      "subalgebra can only shrink their divergences, and certifies "
      "quantitative lower bounds on the loss in terms of how well the "
      "restricted pair can be recovered"};
  app.require_subcommand(1);

  compute_options copt;
  CLI::App* compute = app.add_subcommand(
      "compute", "evaluate one divergence or the lossless-recovery residuals");
  add_state_options(compute, copt.src);
  compute->add_option("--divergence", copt.divergence,
                      "one of: umegaki, petz-renyi, petz-quasi, sandwiched, "
                      "sandwiched-quasi, fidelity, holevo-fidelity, "
                      "q-quadratic, q-inverse, optimized-power");
  compute->add_flag("--equivalence", copt.equivalence,
                    "report the seven residuals that vanish together exactly "
                    "when the restriction loses nothing");
  compute->add_option("--alpha", copt.alpha, "order parameter when required");
  compute->add_option("--s", copt.s, "quasi order parameter when required");
  compute->add_option("--tolerance", copt.tolerance,
                      "losslessness threshold for --equivalence");
  compute->add_option("--out", copt.out_path, "write JSON here, not stdout");

  certify_options eopt;
  CLI::App* certify = app.add_subcommand(
      "certify", "evaluate one recovery bound certificate on a state pair");
  add_state_options(certify, eopt.src);
  certify->add_option("--theorem", eopt.theorem,
                      "certificate family name, e.g. RE_FWD or SANDQ_U");
  certify->add_option("--t", eopt.t, "rotation parameter of the recovery map");
  certify->add_option("--alpha", eopt.alpha, "order when the family needs it");
  certify->add_option("--s", eopt.s, "quasi order when the family needs it");
  certify->add_option("--epsilon", eopt.epsilon,
                      "exponent slack when the family needs it (default: "
                      "midpoint of the admissible interval)");
  certify->add_option("--tolerance", eopt.tolerance,
                      "slack applied when judging the margin");
  certify->add_option("--out", eopt.out_path, "write JSON here, not stdout");

  campaign_options popt;
  CLI::App* campaign = app.add_subcommand(
      "campaign", "sweep certificates over deterministically generated "
                  "instances and write a report");
  campaign->add_option("--dims", popt.dims,
                       "instance shapes (repeatable or comma list; default "
                       "2x2 2x3)");
  campaign->add_option("--trials", popt.trials, "instances per shape");
  campaign->add_option("--seed", popt.seed, "base seed");
  campaign->add_option("--theorems", popt.theorems,
                       "certificate families (comma list; default all)");
  campaign->add_option("--t-grid", popt.t_grid,
                       "rotation parameters (default 0 0.5 -0.5 1 -1)");
  campaign->add_option("--alpha-grid", popt.alpha_grid,
                       "orders for the order families (default 0.6 0.75 2 3)");
  campaign->add_option("--s-grid", popt.s_grid,
                       "quasi orders (default -0.5 -0.3 0.3 0.5)");
  campaign->add_option("--epsilon", popt.epsilon,
                       "'midpoint' or a comma list of slack values");
  campaign->add_option("--tolerance", popt.tolerance,
                       "slack applied when judging margins");
  campaign->add_option("--out", popt.out_path,
                       "report file; default: campaign_report.json inside "
                       "the QFD_OUT_DIR directory if that is set, else "
                       "stdout");
  campaign->add_option("--format", popt.format, "json (default) or csv");
  campaign->add_option("--workers", popt.workers,
                       "worker threads; the report is identical for any "
                       "worker count");

  replay_options ropt;
  CLI::App* replay_cmd = app.add_subcommand(
      "replay", "re-evaluate one serialized certificate record");
  replay_cmd->add_option("--in", ropt.record_path,
                         "record JSON file (as written by certify, or one "
                         "element of a report's records array)");
  replay_cmd->add_option("--report", ropt.report_path,
                         "report JSON file to take a record from");
  replay_cmd->add_option("--index", ropt.index,
                         "record index within --report (default 0)");
  replay_cmd->add_option("--t", ropt.t_override,
                         "override the rotation parameter and recompute");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (compute->parsed()) return run_compute(copt);
    if (certify->parsed()) return run_certify(eopt);
    if (campaign->parsed()) return run_campaign_cmd(popt);
    if (replay_cmd->parsed()) return run_replay(ropt);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const qfd::qfd_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
