// Batch driver: runs the verification suites from a key-value configuration
// and persists the report records. Exit status 0 means every check passed.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ineqlab/suites.hpp"

using namespace ineqlab;

int main(int argc, char** argv) {
    CLI::App app{"ineqlab - numerical verification suites"};
    app.require_subcommand(1);

    std::string suite = "all";
    std::string config_path;
    std::string out_dir = "ineqlab_out";
    std::uint64_t seed = 12345;
    double samples = 1.0;

    auto* run_cmd = app.add_subcommand("run", "execute a verification suite");
    run_cmd->add_option("--suite", suite, "suite name")->required();
    run_cmd->add_option("--config", config_path, "key-value configuration file");
    run_cmd->add_option("--out", out_dir, "output directory");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "random seed");
    run_cmd->add_option("--samples", samples, "sample-count multiplier")
        ->check(CLI::NonNegativeNumber);

    std::string describe_suite;
    auto* describe_cmd = app.add_subcommand("describe", "list a suite's checks");
    describe_cmd->add_option("--suite", describe_suite, "suite name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (describe_cmd->parsed()) {
            std::cout << suites::describe(describe_suite);
            return 0;
        }

        SuiteSpec spec;
        spec.suite = suite;
        if (std::find(suite_names().begin(), suite_names().end(), suite) ==
            suite_names().end())
            throw UnknownSuite(suite);
        if (!config_path.empty()) spec.config = Config::parse_file(config_path);
        spec.out_dir = out_dir;
        spec.seed = (seed_opt->count() > 0)
                        ? seed
                        : spec.config.get_u64("seed", seed);
        spec.samples = samples;

        const auto reports = suites::run(spec);
        bool all_pass = true;
        for (const auto& r : reports) {
            std::printf("[%s] %s/%s margin=%.6g budget=%.6g%s%s\n",
                        r.pass ? "PASS" : "FAIL", r.suite.c_str(),
                        r.check.c_str(), r.margin, r.budget,
                        r.note.empty() ? "" : "  ", r.note.c_str());
            all_pass = all_pass && r.pass;
        }
        std::printf("%zu checks, %s\n", reports.size(),
                    all_pass ? "all passed" : "FAILURES PRESENT");
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
