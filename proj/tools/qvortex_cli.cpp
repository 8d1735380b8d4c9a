// Batch CLI for the axisymmetric vortex solver.
//
//   qvortex solve <config.ini>                 minimize and write artifacts
//   qvortex verify-seed <config.ini>           seed feasibility + energy bound
//   qvortex check-potential <config.ini>       W1-W4 hypothesis report
//   qvortex identities <config.ini> --csv f    re-run diagnostics on saved fields
//   qvortex sweep <config.ini> --param p --values a,b,c

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvortex/qvortex.hpp"

namespace {

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = qvortex::detail::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int fail(const std::string& type, const std::string& reason, int code) {
    qvortex::json err;
    err["error"] = {{"type", type}, {"reason", reason}};
    std::cerr << err.dump(2) << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-energy electro-magneto-static vortex solver"};
    app.require_subcommand(1);

    std::string config_path, csv_path, param, values;

    auto* solve = app.add_subcommand("solve", "minimize E_sigma_q and write artifacts");
    solve->add_option("config", config_path, "config file")->required();

    auto* verify = app.add_subcommand("verify-seed", "torus-seed feasibility and energy bound");
    verify->add_option("config", config_path, "config file")->required();

    auto* checkpot = app.add_subcommand("check-potential", "verify the W1-W4 hypotheses");
    checkpot->add_option("config", config_path, "config file")->required();

    auto* ident = app.add_subcommand("identities", "re-run diagnostics on a saved field CSV");
    ident->add_option("config", config_path, "config file")->required();
    ident->add_option("--csv", csv_path, "field CSV produced by solve")->required();

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep, write a CSV table");
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--param", param, "sigma, q, D, l or grid")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const qvortex::RunConfig cfg = qvortex::parse_run_config_file(config_path);
        if (solve->parsed()) {
            qvortex::SolveOutput out = qvortex::run_solve(cfg);
            std::cout << out.summary.dump(2) << "\n";
            for (const auto& p : out.paths) std::cerr << "wrote " << p << "\n";
            return 0;
        }
        if (verify->parsed()) {
            std::cout << qvortex::run_verify_seed(cfg).dump(2) << "\n";
            return 0;
        }
        if (checkpot->parsed()) {
            std::cout << qvortex::run_check_potential(cfg).dump(2) << "\n";
            return 0;
        }
        if (ident->parsed()) {
            std::cout << qvortex::run_identities(cfg, csv_path).dump(2) << "\n";
            return 0;
        }
        if (sweep->parsed()) {
            const std::string path = qvortex::run_sweep(cfg, param, split_csv_list(values));
            std::cerr << "wrote " << path << "\n";
            return 0;
        }
    } catch (const qvortex::ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const qvortex::SolverError& e) {
        return fail("solver", e.what(), 3);
    } catch (const qvortex::EvalError& e) {
        return fail("evaluation", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 1;
}
