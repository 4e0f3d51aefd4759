// klrlab command-line entry point.
//
//   klrlab run --config <file>
//   klrlab catalog
//   klrlab ingest-check --x <file> --y <file> --scenario theorem3
//
// Exit status: 0 pass, 1 reject, 2 error (diagnostic JSON on stderr).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "klrlab/config.hpp"
#include "klrlab/error.hpp"
#include "klrlab/experiment.hpp"

namespace {

int fail(const std::exception& e) {
    std::cerr << klrlab::diagnostic_json(e).dump(2) << '\n';
    return 2;
}

nlohmann::json summary(const klrlab::RunReport& run) {
    nlohmann::json j = run.report;
    j.erase("params");
    j.erase("specs");
    j.erase("test");
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo checks of Gaussian characterizations by linear regression"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the scenario described by a config file");
    run->add_option("--config", config_path, "scenario config file")->required();

    auto* catalog = app.add_subcommand("catalog", "list scenarios and their parameters");

    std::string x_path, y_path, scenario = "theorem3", output_dir = "klrlab_out";
    std::size_t n = 0;
    auto* ingest = app.add_subcommand("ingest-check", "run a scenario on external samples");
    ingest->add_option("--x", x_path, "file of X values, one per line")->required();
    ingest->add_option("--y", y_path, "file of Y values, one per line");
    ingest->add_option("--scenario", scenario, "scenario to run on the samples");
    ingest->add_option("--n", n, "tuple size (default from the scenario)");
    ingest->add_option("--output-dir", output_dir, "directory for report.json and CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (catalog->parsed()) {
            std::cout << klrlab::catalog_json().dump(2) << '\n';
            return 0;
        }
        klrlab::ExperimentConfig config;
        if (run->parsed()) {
            config = klrlab::load_config(config_path);
        } else {
            config = klrlab::default_config(scenario);
            config.x_path = x_path;
            config.y_path = y_path;
            config.output_dir = output_dir;
            if (n != 0) config.n = n;
            if (n == 1) throw klrlab::ConfigError("n", "must be >= 2");
        }
        const klrlab::RunReport result = klrlab::run_scenario(config);
        std::cout << summary(result).dump(2) << '\n';
        return result.exit_code;
    } catch (const std::exception& e) {
        return fail(e);
    }
}
