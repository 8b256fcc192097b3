#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "qfd/harness.hpp"

using namespace qfd;

namespace {

campaign_config small_config() {
  campaign_config cfg;
  cfg.dims = {parse_dim_entry("2x2")};
  cfg.trials = 10;
  cfg.seed = 77;
  cfg.t_grid = {0.0, 0.5};
  return cfg;
}

double entry_distance(const cmat& a, const cmat& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

int count_for(const campaign_report& rep, const char* name) {
  const auto it = rep.summary.per_theorem.find(name);
  return it == rep.summary.per_theorem.end() ? 0 : it->second.count;
}

}  // namespace

TEST_CASE("dimension entries parse and guard") {
  const dim_entry plain = parse_dim_entry("4");
  CHECK(plain.d_a == 4);
  CHECK(plain.d_b == 0);
  CHECK_FALSE(plain.is_tensor());
  CHECK(plain.total() == 4);
  CHECK(plain.text() == "4");
  CHECK(plain.algebra().dim() == 4);

  const dim_entry split = parse_dim_entry("2x3");
  CHECK(split.is_tensor());
  CHECK(split.total() == 6);
  CHECK(split.text() == "2x3");
  CHECK(split.algebra().dim() == 6);

  CHECK(parse_dim_entry("2x4").total() == 8);

  CHECK_THROWS_AS(parse_dim_entry("9"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("2x5"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("3x3"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("1"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("0"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("-4"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("1x4"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("4x1"), config_error);
  CHECK_THROWS_AS(parse_dim_entry(""), config_error);
  CHECK_THROWS_AS(parse_dim_entry("abc"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("x3"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("2x"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("2xx3"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("2x3x"), config_error);
  CHECK_THROWS_AS(parse_dim_entry("3y3"), config_error);
}

TEST_CASE("campaign configuration validation") {
  CHECK_NOTHROW(validate_config(campaign_config{}));

  campaign_config cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.dims.clear();
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.theorems.clear();
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.t_grid.clear();
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.t_grid = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  // order grids may only be empty when no chosen family consumes them
  cfg = campaign_config{};
  cfg.alpha_grid.clear();
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg.theorems = {theorem_id::re_fwd, theorem_id::re_rev_u};
  CHECK_NOTHROW(validate_config(cfg));

  cfg = campaign_config{};
  cfg.s_grid.clear();
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg.theorems = {theorem_id::re_fwd};
  CHECK_NOTHROW(validate_config(cfg));

  cfg = campaign_config{};
  cfg.epsilon_policy = "banana";
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.epsilon_policy = "grid";
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg.epsilon_grid = {0.1};
  CHECK_NOTHROW(validate_config(cfg));

  cfg = campaign_config{};
  cfg.format = "xml";
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.workers = 0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);

  cfg = campaign_config{};
  cfg.tolerance = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
}

TEST_CASE("instances are deterministic with the planned mix") {
  const dim_entry dims = parse_dim_entry("2x2");

  const campaign_instance a = make_instance(dims, 99, 3);
  const campaign_instance b = make_instance(dims, 99, 3);
  CHECK(a.kind == "generic");
  CHECK(entry_distance(a.rho.matrix(), b.rho.matrix()) == 0.0);
  CHECK(entry_distance(a.sigma.matrix(), b.sigma.matrix()) == 0.0);

  const campaign_instance c = make_instance(dims, 99, 4);
  CHECK(entry_distance(a.rho.matrix(), c.rho.matrix()) > 1e-8);

  const campaign_instance d = make_instance(dims, 100, 3);
  CHECK(entry_distance(a.rho.matrix(), d.rho.matrix()) > 1e-8);

  CHECK(std::string(instance_kind_of(0)) == "generic");
  CHECK(std::string(instance_kind_of(6)) == "generic");
  CHECK(std::string(instance_kind_of(7)) == "near_degenerate");
  CHECK(std::string(instance_kind_of(8)) == "near_degenerate");
  CHECK(std::string(instance_kind_of(9)) == "product");
  CHECK(std::string(instance_kind_of(19)) == "product");

  const campaign_instance nd_rho = make_instance(dims, 99, 7);
  CHECK(nd_rho.kind == "near_degenerate");
  CHECK(nd_rho.rho.min_eigenvalue() >= 9e-12);
  CHECK(nd_rho.rho.min_eigenvalue() <= 1.2e-11);
  CHECK(nd_rho.sigma.min_eigenvalue() > 1e-6);

  const campaign_instance nd_sig = make_instance(dims, 99, 8);
  CHECK(nd_sig.sigma.min_eigenvalue() >= 9e-12);
  CHECK(nd_sig.sigma.min_eigenvalue() <= 1.2e-11);

  const campaign_instance prod = make_instance(dims, 99, 9);
  CHECK(prod.kind == "product");
  CHECK(equivalence_suite(prod.rho, prod.sigma, dims.algebra()).max_residual() <=
        1e-8);

  const dim_entry plain = parse_dim_entry("4");
  const campaign_instance blocks = make_instance(plain, 99, 9);
  CHECK(blocks.kind == "product");
  CHECK(equivalence_suite(blocks.rho, blocks.sigma, plain.algebra())
            .max_residual() <= 1e-8);

  CHECK_THROWS_AS(make_instance(dims, 99, -1), config_error);

  const density_operator nd = near_degenerate_density(4, 1234);
  CHECK(nd.min_eigenvalue() >= 9e-12);
  CHECK(nd.min_eigenvalue() <= 1.2e-11);
  CHECK(std::abs(nd.eigenvalues().sum() - 1.0) < 1e-12);
}

TEST_CASE("small campaign counts, passes, and summarizes") {
  const campaign_config cfg = small_config();
  const std::size_t expected = expected_record_count(cfg);
  CHECK(expected == 580);

  const campaign_report rep = run_campaign(cfg);
  REQUIRE(rep.records.size() == expected);
  CHECK(rep.wall_time_seconds > 0.0);
  CHECK(rep.all_passed());

  for (const campaign_record& r : rep.records) {
    CHECK(r.cert.passed);
    CHECK(r.cert.margin >= -1e-6);
    CHECK_FALSE(r.has_instance);
    CHECK(r.kind == instance_kind_of(r.trial));
    CHECK(r.dims == "2x2");
    CHECK(r.seed == cfg.seed);
    CHECK(r.cert.instance_fingerprint.size() == 16);
  }

  CHECK(rep.summary.total == static_cast<int>(expected));
  CHECK(rep.summary.passed == static_cast<int>(expected));
  CHECK(rep.summary.failed == 0);
  REQUIRE(rep.summary.per_theorem.size() == k_theorem_count);

  // per-family multiplicities: trials x |t values| x |orders|
  CHECK(count_for(rep, "RE_FWD") == 20);
  CHECK(count_for(rep, "RE_FWD_U") == 10);
  CHECK(count_for(rep, "RE_REV") == 20);
  CHECK(count_for(rep, "RE_REV_U") == 10);
  CHECK(count_for(rep, "PRQ_FWD") == 80);

  int total = 0;
  for (const auto& [name, t] : rep.summary.per_theorem) {
    CHECK_NOTHROW(parse_theorem_id(name));
    CHECK(t.passed == t.count);
    CHECK(std::isfinite(t.min_margin));
    CHECK(t.worst_fingerprint.size() == 16);
    total += t.count;
  }
  CHECK(total == static_cast<int>(expected));

  // the summary is a pure function of the records
  const campaign_summary redo = summarize(rep.records);
  CHECK(summary_to_json(redo).dump() == summary_to_json(rep.summary).dump());

  for (const auto& [name, t] : rep.summary.per_theorem) {
    double min_margin = std::numeric_limits<double>::infinity();
    std::string worst;
    for (const campaign_record& r : rep.records) {
      if (std::string(theorem_name(r.cert.id)) != name) continue;
      if (r.cert.margin < min_margin) {
        min_margin = r.cert.margin;
        worst = r.cert.instance_fingerprint;
      }
    }
    CHECK(t.min_margin == min_margin);
    CHECK(t.worst_fingerprint == worst);
  }
}

TEST_CASE("campaigns are reproducible and worker-invariant") {
  const campaign_config cfg = small_config();
  const campaign_report first = run_campaign(cfg);
  const campaign_report second = run_campaign(cfg);
  CHECK(serialize_records(first.records) == serialize_records(second.records));

  campaign_config threaded = cfg;
  threaded.workers = 3;
  const campaign_report parallel = run_campaign(threaded);
  REQUIRE(parallel.records.size() == first.records.size());
  CHECK(serialize_records(parallel.records) ==
        serialize_records(first.records));
  CHECK(summary_to_json(parallel.summary).dump() ==
        summary_to_json(first.summary).dump());
}

TEST_CASE("failing certificates carry their instances and replay") {
  campaign_config cfg = small_config();
  cfg.tolerance = 0.0;  // saturated lossless trials land within rounding of 0
  const campaign_report rep = run_campaign(cfg);
  CHECK_FALSE(rep.all_passed());
  CHECK(rep.summary.failed > 0);
  CHECK(rep.summary.passed + rep.summary.failed == rep.summary.total);

  const campaign_record* failing = nullptr;
  const campaign_record* passing = nullptr;
  for (const campaign_record& r : rep.records) {
    CHECK(r.has_instance == !r.cert.passed);
    if (!r.cert.passed && failing == nullptr) failing = &r;
    if (r.cert.passed && passing == nullptr) passing = &r;
  }
  REQUIRE(failing != nullptr);
  REQUIRE(passing != nullptr);

  // failing records embed enough state to reproduce the margin; loading
  // the payload re-derives the spectra, so agreement is to 1e-12 rather
  // than bit-for-bit, and repeated replays of one payload are identical
  const std::string failing_text = record_to_json(*failing).dump();
  const replay_result from_payload = replay(failing_text);
  CHECK(from_payload.margin_matches);
  CHECK(from_payload.recorded_margin == failing->cert.margin);
  CHECK(std::abs(from_payload.cert.margin - failing->cert.margin) <= 1e-12);
  const replay_result from_payload_again = replay(failing_text);
  CHECK(from_payload_again.cert.margin == from_payload.cert.margin);
  CHECK(from_payload_again.cert.instance_fingerprint ==
        from_payload.cert.instance_fingerprint);

  // passing records replay through deterministic regeneration instead
  const replay_result regenerated = replay(record_to_json(*passing).dump());
  CHECK(regenerated.margin_matches);
  CHECK(regenerated.cert.margin == passing->cert.margin);

  // an override recomputes rather than confirms
  const replay_result overridden = replay(failing_text, 0.25);
  CHECK_FALSE(overridden.margin_matches);
  CHECK(overridden.cert.params.t == 0.25);
  CHECK(std::isfinite(overridden.cert.margin));

  const std::string csv = report_to_csv(rep);
  std::size_t lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == rep.records.size() + 1);
  CHECK(csv.rfind("trial,dims,kind,theorem,t,s,alpha,epsilon,lhs,rhs,margin,"
                  "recovery_error,tolerance,passed,fingerprint\n",
                  0) == 0);
}

TEST_CASE("records and reports round-trip byte for byte") {
  campaign_config cfg;
  cfg.dims = {parse_dim_entry("2x2"), parse_dim_entry("3")};
  cfg.trials = 3;
  cfg.seed = 41;
  cfg.t_grid = {0.5};
  const campaign_report rep = run_campaign(cfg);
  REQUIRE(rep.records.size() == expected_record_count(cfg));

  const std::string text = serialize_report(rep);
  const campaign_report parsed = parse_report(text);
  CHECK(serialize_report(parsed) == text);
  CHECK(parsed.records.size() == rep.records.size());
  CHECK(parsed.config.seed == cfg.seed);
  CHECK(parsed.config.dims.size() == 2);
  CHECK(parsed.summary.total == rep.summary.total);
  CHECK(parsed.wall_time_seconds == rep.wall_time_seconds);

  CHECK_THROWS_AS(parse_report("{"), parse_error);
  CHECK_THROWS_AS(parse_report("{\"config\": {}}"), parse_error);

  ordered_json rec = record_to_json(rep.records.front());
  ordered_json bad_theorem = rec;
  bad_theorem["theorem"] = "NOPE";
  CHECK_THROWS_AS(record_from_json(bad_theorem), parse_error);
  ordered_json missing = rec;
  missing.erase("margin");
  CHECK_THROWS_AS(record_from_json(missing), parse_error);

  CHECK_THROWS_AS(replay("{"), parse_error);
  ordered_json bad_dims = rec;
  bad_dims["dims"] = "banana";
  CHECK_THROWS_AS(replay(bad_dims.dump()), parse_error);

  const campaign_record back = record_from_json(rec);
  CHECK(record_to_json(back).dump() == rec.dump());
}

TEST_CASE("state pairs serialize and validate") {
  const density_operator rho = random_density(3, 7100u);
  const density_operator sigma = random_density(3, 7200u);
  const std::string text = serialize_state_pair(rho, sigma);
  const auto [rho_back, sigma_back] = parse_state_pair(text);
  CHECK(entry_distance(rho_back.matrix(), rho.matrix()) < 1e-12);
  CHECK(entry_distance(sigma_back.matrix(), sigma.matrix()) < 1e-12);

  CHECK_THROWS_AS(serialize_state_pair(rho, random_density(4, 7300u)),
                  dimension_mismatch);

  CHECK_THROWS_AS(parse_state_pair("not json"), parse_error);
  CHECK_THROWS_AS(parse_state_pair("{\"dim\": 2, \"rho\": [[1,0]]}"),
                  parse_error);

  ordered_json j;
  j["dim"] = 2;
  j["rho"] = ordered_json::array({{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}});
  j["sigma"] = j["rho"];
  CHECK_NOTHROW(parse_state_pair(j.dump()));

  ordered_json doubled = j;
  doubled["sigma"] =
      ordered_json::array({{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(parse_state_pair(doubled.dump()), invalid_density);

  ordered_json skew = j;
  skew["sigma"] =
      ordered_json::array({{0.5, 0.0}, {0.2, 0.0}, {-0.2, 0.0}, {0.5, 0.0}});
  CHECK_THROWS_AS(parse_state_pair(skew.dump()), non_hermitian_input);

  ordered_json malformed = j;
  malformed["rho"][1] = ordered_json::array({0.0});
  CHECK_THROWS_AS(parse_state_pair(malformed.dump()), parse_error);
}

TEST_CASE("epsilon grid policy filters and errors") {
  campaign_config cfg;
  cfg.dims = {parse_dim_entry("2x2")};
  cfg.trials = 2;
  cfg.seed = 5;
  cfg.t_grid = {0.0};
  cfg.theorems = {theorem_id::re_rev};
  cfg.epsilon_policy = "grid";
  cfg.epsilon_grid = {0.1, 0.2, 0.9};  // 0.9 exceeds the admissible interval
  CHECK(expected_record_count(cfg) == 4);
  const campaign_report rep = run_campaign(cfg);
  REQUIRE(rep.records.size() == 4);
  CHECK(rep.records[0].cert.params.epsilon == 0.1);
  CHECK(rep.records[1].cert.params.epsilon == 0.2);
  CHECK(rep.all_passed());

  campaign_config none = cfg;
  none.theorems = {theorem_id::prq_rev};
  none.epsilon_grid = {0.4};  // above every admissible quasi-order interval
  CHECK_THROWS_AS(expected_record_count(none), config_error);
  CHECK_THROWS_AS(run_campaign(none), config_error);

  // partially admissible grids must fail loudly, not drop orders silently
  campaign_config partial = none;
  partial.epsilon_grid = {0.3};
  CHECK_THROWS_AS(run_campaign(partial), config_error);
  partial.s_grid = {0.3, -0.3};
  CHECK(expected_record_count(partial) == 4);

  campaign_config mid;
  mid.dims = {parse_dim_entry("2x2")};
  mid.trials = 1;
  mid.seed = 5;
  mid.t_grid = {0.0};
  mid.theorems = {theorem_id::re_rev};
  const campaign_report mrep = run_campaign(mid);
  REQUIRE(mrep.records.size() == 1);
  CHECK(mrep.records[0].cert.params.epsilon == 0.25);
}

TEST_CASE("text files read and write through explicit errors") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/qfd/file.json"), io_error);
  CHECK_THROWS_AS(write_text_file("/nonexistent/qfd/file.json", "x"), io_error);

  const std::string path = "qfd_harness_io_probe.tmp";
  const std::string payload = "line one\nline two\n";
  write_text_file(path, payload);
  CHECK(read_text_file(path) == payload);
  std::remove(path.c_str());
}
