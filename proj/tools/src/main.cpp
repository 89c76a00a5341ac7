#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "homog/error.hpp"
#include "homog_app/check.hpp"
#include "homog_app/config.hpp"
#include "homog_app/experiments.hpp"
#include "homog_app/report.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunFlags {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string out;
    bool deterministic = false;
};

void add_run_flags(CLI::App& cmd, RunFlags& flags) {
    cmd.add_option("--config", flags.config_file, "key = value config file")->check(CLI::ExistingFile);
    cmd.add_option("--set", flags.overrides, "override one key, key=value (repeatable)");
    cmd.add_option("--out", flags.out, "output directory (overrides the out key)");
    cmd.add_flag("--deterministic", flags.deterministic, "fixed reduction order for bit-identical reruns");
}

homog::app::RunConfig resolve(const RunFlags& flags, bool is_fem) {
    std::vector<std::string> overrides = flags.overrides;
    if (is_fem) overrides.push_back("method=fem");
    if (!flags.out.empty()) overrides.push_back("out=" + flags.out);
    if (flags.deterministic) overrides.push_back("deterministic=true");
    return homog::app::load_config(flags.config_file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective conductivity of a periodic two-phase cell: FEM reference, PINN/VPINN training, bounds."};
    app.require_subcommand(1);

    RunFlags fem_flags, train_flags;
    auto* fem = app.add_subcommand("fem", "finite-element bounds for both forms");
    add_run_flags(*fem, fem_flags);
    auto* train = app.add_subcommand("train", "train primal and/or dual networks and bound them");
    add_run_flags(*train, train_flags);

    std::vector<std::string> report_inputs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "consolidate run records into one CSV table");
    report->add_option("inputs", report_inputs, "run directories, run.json files or earlier report CSVs");
    report->add_option("--out", report_out, "also write report.csv into this directory");

    homog::app::CheckOptions check_options;
    auto* check = app.add_subcommand("check", "run the property suite");
    check->add_option("--seed", check_options.seed, "random seed");
    check->add_option("--trials", check_options.trials, "random cases per property")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (fem->parsed() || train->parsed()) {
            const bool is_fem = fem->parsed();
            homog::app::RunConfig config = resolve(is_fem ? fem_flags : train_flags, is_fem);
            if (is_fem) {
                homog::app::run_fem(config, std::cout);
                return 0;
            }
            const auto record = homog::app::run_train(config, std::cout);
            if (homog::app::record_aborted(record)) {
                std::cerr << "error: training aborted on a non-finite value; see run.json\n";
                return kExitNumerical;
            }
            return 0;
        }
        if (report->parsed()) {
            std::vector<std::filesystem::path> inputs(report_inputs.begin(), report_inputs.end());
            auto collected = homog::app::collect_rows(inputs);
            for (const auto& w : collected.warnings) std::cerr << "warning: " << w << "\n";
            homog::app::mark_best_in_group(collected.rows);
            const std::string csv = homog::app::format_report_csv(collected.rows);
            std::cout << csv;
            if (!report_out.empty()) {
                std::filesystem::create_directories(report_out);
                std::ofstream(std::filesystem::path(report_out) / "report.csv") << csv;
            }
            return 0;
        }
        if (check->parsed()) {
            const auto outcomes = homog::app::run_property_checks(check_options, std::cout);
            for (const auto& o : outcomes) {
                if (!o.pass) return kExitNumerical;
            }
            return 0;
        }
    } catch (const homog::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const homog::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
