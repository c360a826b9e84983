#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "naqs/checkpoint.hpp"
#include "naqs/config.hpp"
#include "naqs/records.hpp"

using namespace naqs;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("checkpoints round-trip bit-exactly") {
    const Lattice lattice = Lattice::chain_open(6);
    const SiteOrdering ordering = build_ordering(OrderingKind::Linear, lattice);
    RandomStream rng(42);
    ProbabilityNetwork prob(ordering, 3, 2, rng);
    PhaseNetwork phase(6, 3, 2, rng);
    const Naqs state(lattice, std::move(prob), std::move(phase), true, false);

    const auto path = temp_file("naqs_ckpt_test.json");
    save_checkpoint(path.string(), state);
    const Naqs loaded = load_checkpoint(path.string());

    CHECK(loaded.z2());
    CHECK_FALSE(loaded.translational());
    CHECK(loaded.phase_model() == PhaseModelKind::PhaseNetwork);
    CHECK(loaded.prob().net().flatten() == state.prob().net().flatten());
    CHECK(loaded.phase_network().net().flatten() == state.phase_network().net().flatten());

    // saving the loaded state reproduces the file byte for byte
    const auto path2 = temp_file("naqs_ckpt_test2.json");
    save_checkpoint(path2.string(), loaded);
    CHECK(slurp(path) == slurp(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("reverse checkpoints round-trip") {
    const Lattice lattice = Lattice::square_periodic(3);
    const SiteOrdering ordering = build_ordering(OrderingKind::Spiral, lattice);
    RandomStream rng(7);
    NaqsReverse reverse(ReverseNetwork(ordering, 3, 2, rng), true);

    const auto path = temp_file("naqs_rev_ckpt_test.json");
    save_reverse_checkpoint(path.string(), reverse, lattice, OrderingKind::Spiral);
    LoadedReverse loaded = load_reverse_checkpoint(path.string());
    CHECK(loaded.reverse.z2());
    CHECK(loaded.ordering_kind == OrderingKind::Spiral);
    CHECK(loaded.lattice.kind() == LatticeKind::SquarePeriodic);
    CHECK(loaded.reverse.network().reversed_net().net().flatten() ==
          reverse.network().reversed_net().net().flatten());
    std::filesystem::remove(path);

    CHECK_THROWS(load_reverse_checkpoint(temp_file("missing_ckpt.json").string()));
}

TEST_CASE("loading a state checkpoint as reverse fails") {
    const Lattice lattice = Lattice::chain_open(4);
    RandomStream rng(1);
    ProbabilityNetwork prob(build_ordering(OrderingKind::Linear, lattice), 2, 2, rng);
    const Naqs state(lattice, std::move(prob), PhaseModelKind::MarshallRule, false, false);
    const auto path = temp_file("naqs_role_test.json");
    save_checkpoint(path.string(), state);
    CHECK_THROWS_AS(load_reverse_checkpoint(path.string()), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("result records round-trip through json lines") {
    ResultRecord r;
    r.command = "entropy";
    r.config_digest = "00ff00ff00ff00ff";
    r.tags["method"] = "cs";
    r.params["n"] = 4;
    r.params["cut"] = 3;
    r.params["seed"] = 17;
    r.metrics["trace"] = 0.12500000000000003;
    r.metrics["entropy"] = 0.6931471805599453;
    r.errors["trace"] = 1.25e-5;

    const ResultRecord parsed = record_from_json_line(record_to_json_line(r));
    CHECK(parsed == r);

    const auto path = temp_file("naqs_records_test.jsonl");
    emit_results({r, r}, RecordFormat::JsonLines, path.string());
    const auto loaded = read_json_records(path.string());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == r);
    CHECK(loaded[1] == r);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_results({}, RecordFormat::JsonLines, path.string()), std::invalid_argument);
}

TEST_CASE("csv export has one row per record and stable headers") {
    ResultRecord r1;
    r1.command = "entropy";
    r1.config_digest = "abc";
    r1.tags["method"] = "ds";
    r1.params["n"] = 2;
    r1.params["cut"] = 1;
    r1.metrics["entropy"] = 0.5;
    r1.errors["entropy"] = 0.01;
    ResultRecord r2 = r1;
    r2.params["cut"] = 2;

    const auto path = temp_file("naqs_records_test.csv");
    emit_results({r1, r2}, RecordFormat::Csv, path.string());
    std::ifstream in(path);
    std::string header, row1, row2, extra;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK_FALSE(std::getline(in, extra));
    CHECK(header == "command,config_digest,method,cut,n,entropy,entropy_stderr");
    CHECK(row1.find("ds") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("config digest is deterministic") {
    CHECK(config_digest("a=1\n") == config_digest("a=1\n"));
    CHECK(config_digest("a=1\n") != config_digest("a=2\n"));
    CHECK(config_digest("x").size() == 16);
}

TEST_CASE("config parsing, overrides, and schema validation") {
    const std::string text = R"(
# spin chain run
[lattice]
kind = "chain-open"
sites = 12

[network]
depth = 3
width = 8
phase_model = "marshall-rule"
z2 = true

[training]
stages = [[100, 1e-3, 50], [50, 1e-4, 100]]
penalty_weight = 0.05
seed = 7

[estimator]
method = "cs"
orders = "2..5"
cuts = all
batches = 500
seed = 11
workers = 2

[io]
checkpoint = "state.json"
)";
    ConfigTable table = parse_config_text(text);
    RunConfig cfg = make_run_config(table);
    CHECK(cfg.lattice_kind == LatticeKind::ChainOpen);
    CHECK(cfg.sites == 12);
    CHECK(cfg.z2);
    CHECK(cfg.training.stages.size() == 2);
    CHECK(cfg.training.stages[1].learning_rate == doctest::Approx(1e-4));
    CHECK(cfg.training.penalty_weight == doctest::Approx(0.05));
    CHECK(cfg.orders == std::vector<int>{2, 3, 4, 5});
    CHECK(cfg.cuts_all);
    CHECK(cfg.resolve_cuts(12) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(cfg.batches == 500);
    REQUIRE(cfg.estimator_seed.has_value());
    CHECK(*cfg.estimator_seed == 11);
    CHECK(cfg.workers == 2);
    CHECK(cfg.checkpoint_path == "state.json");
    CHECK_FALSE(cfg.digest.empty());

    // overrides change the digest and the value
    ConfigTable table2 = parse_config_text(text);
    apply_override(table2, "estimator.batches=900");
    apply_override(table2, "estimator.cuts=[3, 5]");
    RunConfig cfg2 = make_run_config(table2);
    CHECK(cfg2.batches == 900);
    CHECK_FALSE(cfg2.cuts_all);
    CHECK(cfg2.cuts == std::vector<int>{3, 5});
    CHECK(cfg2.digest != cfg.digest);

    // unknown keys are rejected
    ConfigTable bad = parse_config_text(text);
    apply_override(bad, "estimator.luck=13");
    CHECK_THROWS_AS(make_run_config(bad), ConfigError);
    ConfigTable bad2 = parse_config_text("[nonsense]\nx = 1\n");
    CHECK_THROWS_AS(make_run_config(bad2), ConfigError);

    // malformed text
    CHECK_THROWS_AS(parse_config_text("key_without_section = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[a\nb = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[a]\nb = [1, 2\n"), ConfigError);
}

TEST_CASE("square lattice config requires a side") {
    ConfigTable table = parse_config_text("[lattice]\nkind = \"square-periodic\"\nside = 4\n");
    RunConfig cfg = make_run_config(table);
    CHECK(cfg.sites == 4);
    CHECK(cfg.make_lattice().num_sites() == 16);

    ConfigTable missing = parse_config_text("[lattice]\nkind = \"square-periodic\"\n");
    CHECK_THROWS_AS(make_run_config(missing), ConfigError);
}
