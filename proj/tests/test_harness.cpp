#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ineqlab/suites.hpp"

using namespace ineqlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing") {
    SECTION("values, comments, whitespace") {
        auto cfg = Config::parse(
            "# comment line\n"
            "n = 1\n"
            "alpha= 0.25  # trailing comment\n"
            "  N =4096\n"
            "name_like = 80\n");
        REQUIRE(cfg.get_unsigned("n", 0) == 1);
        REQUIRE(cfg.get_double("alpha", 0.0) == 0.25);
        REQUIRE(cfg.get_unsigned("N", 0) == 4096);
        REQUIRE(cfg.get_double("missing", 7.5) == 7.5);
        REQUIRE(cfg.has("name_like"));
    }

    SECTION("parse errors") {
        REQUIRE_THROWS_AS(Config::parse("just a line\n"), ConfigParse);
        REQUIRE_THROWS_AS(Config::parse("key = \n"), ConfigParse);
        REQUIRE_THROWS_AS(Config::parse("x = abc\n").get_double("x", 0.0),
                          ConfigParse);
    }

    SECTION("hash is canonical over ordering and layout") {
        auto a = Config::parse("a = 1\nb = 2\n");
        auto b = Config::parse("b =  2   # note\n\na=1\n");
        REQUIRE(a.hash() == b.hash());
        auto c = Config::parse("a = 1\nb = 3\n");
        REQUIRE(a.hash() != c.hash());
    }
}

TEST_CASE("deficit report invariant") {
    auto r = DeficitReport::make("s", "c", 1, 2, {0.5}, 1.0, -0.5, 1.0);
    REQUIRE(r.pass);  // margin -0.5 >= -budget -1.0
    auto f = DeficitReport::make("s", "c", 1, 2, {0.5}, 1.0, -2.0, 1.0);
    REQUIRE_FALSE(f.pass);
}

TEST_CASE("report serialization") {
    TempDir dir("ineqlab_report_test");
    std::vector<DeficitReport> reports;
    reports.push_back(
        DeficitReport::make("lp", "demo", 42, 7, {1.0, 2.0}, 0.1, 0.05, 0.0));
    reports.push_back(
        DeficitReport::make("lp", "other", 42, 8, {}, 0.0, -1.0, 0.5, "note"));

    const auto json_path = (dir.path / "report.json").string();
    const auto csv_path = (dir.path / "summary.csv").string();
    write_report_json(reports, json_path);
    write_summary_csv(reports, csv_path);

    auto parsed = nlohmann::json::parse(slurp(json_path));
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 2);
    REQUIRE(parsed[0]["check"] == "demo");
    REQUIRE(parsed[0]["pass"] == true);
    REQUIRE(parsed[1]["pass"] == false);
    REQUIRE(parsed[1]["note"] == "note");

    const auto csv = slurp(csv_path);
    REQUIRE(csv.find("config_hash,check,min_margin,budget,pass") == 0);
    REQUIRE(csv.find("lp/demo") != std::string::npos);
}

TEST_CASE("describe lists checks without aborting") {
    const auto transfer = suites::describe("transfer");
    REQUIRE(transfer.find("transfer_slack_nonneg") != std::string::npos);
    REQUIRE(transfer.find("dual_transfer_constant") != std::string::npos);

    const auto flow = suites::describe("flow");
    REQUIRE(flow.find("deficit_monotonicity") != std::string::npos);
    REQUIRE(flow.find("mass_conservation") != std::string::npos);

    REQUIRE_THROWS_AS(suites::describe("bogus"), UnknownSuite);

    const auto all = suites::describe("all");
    for (const auto& name : suite_names())
        if (name != "all") REQUIRE(all.find("suite " + name) != std::string::npos);
}

TEST_CASE("duality suite runs green and deterministically") {
    TempDir dir1("ineqlab_suite_run1");
    TempDir dir2("ineqlab_suite_run2");

    SuiteSpec spec;
    spec.suite = "duality";
    spec.config = Config::parse("");
    spec.seed = 99;
    spec.samples = 0.05;

    spec.out_dir = dir1.path.string();
    auto r1 = suites::run(spec);
    REQUIRE_FALSE(r1.empty());
    for (const auto& r : r1) {
        INFO(r.check << ": " << r.note);
        REQUIRE(r.pass);
    }

    spec.out_dir = dir2.path.string();
    auto r2 = suites::run(spec);
    REQUIRE(slurp((dir1.path / "summary.csv").string()) ==
            slurp((dir2.path / "summary.csv").string()));
    REQUIRE(slurp((dir1.path / "report.json").string()) ==
            slurp((dir2.path / "report.json").string()));
}

TEST_CASE("zero sample multiplier yields warning rows that pass") {
    TempDir dir("ineqlab_zero_samples");
    SuiteSpec spec;
    spec.suite = "duality";
    spec.config = Config::parse("");
    spec.seed = 7;
    spec.samples = 0.0;
    spec.out_dir = dir.path.string();
    auto reports = suites::run(spec);
    bool saw_warning = false;
    for (const auto& r : reports) {
        REQUIRE(r.pass);
        if (r.note.find("zero samples") != std::string::npos) saw_warning = true;
    }
    REQUIRE(saw_warning);
}

TEST_CASE("unknown suite is rejected") {
    SuiteSpec spec;
    spec.suite = "bogus";
    REQUIRE_THROWS_AS(suites::run(spec), UnknownSuite);
}

TEST_CASE("fault injection: a wrong constant localizes to the deficit checks") {
    TempDir dir("ineqlab_fault_injection");
    SuiteSpec spec;
    spec.suite = "hls";
    // the override halves the constant: gradient images of optimizers must
    // then show negative deficits, which no self-calibrated budget absorbs
    spec.config = Config::parse(
        "n = 1\nalpha = 0.25\nN = 1024\nL = 80\n"
        "hls_samples = 40\nsobolev_bubbles = 5\nS_override = 0.9\n");
    spec.seed = 3;
    spec.samples = 1.0;
    spec.out_dir = dir.path.string();
    auto reports = suites::run(spec);

    bool image_failed = false;
    for (const auto& r : reports) {
        if (r.check == "dual_image_deficit_floor") {
            image_failed = !r.pass;
            REQUIRE(r.margin < 0.0);
        }
        // the kernel cross-check runs on its own subsystem and stays green
        if (r.check == "riesz_kernel_crosscheck") REQUIRE(r.pass);
    }
    REQUIRE(image_failed);
}

TEST_CASE("isolation: a failing check does not suppress later checks") {
    // S_override makes random_deficit_nonneg fail; rows after it must still
    // be present (same run as above, structural assertion)
    TempDir dir("ineqlab_isolation");
    SuiteSpec spec;
    spec.suite = "sobolev";
    spec.config = Config::parse(
        "n = 1\nalpha = 0.25\nN = 1024\nL = 80\n"
        "sobolev_samples = 40\nsobolev_bubbles = 4\nS_override = 0.9\n");
    spec.seed = 4;
    spec.out_dir = dir.path.string();
    auto reports = suites::run(spec);
    std::vector<std::string> order;
    for (const auto& r : reports) order.push_back(r.check);
    REQUIRE(std::find(order.begin(), order.end(), "random_deficit_nonneg") !=
            order.end());
    REQUIRE(order.back() == "fit_recovery_and_fixed_point");
}
