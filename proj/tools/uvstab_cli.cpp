// Command line front end: uvstab_cli <classify|simulate|sweep|continue|nf-check> [options]
#include "uvstab/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Stability toolkit for vertical relative equilibria of an underwater vehicle"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path, out_path, preset_name;
    std::optional<double> periods, eps;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--preset", preset_name, "named parameter profile")
        ->check(CLI::IsMember(uvstab::preset_names()));
    app.add_option("--periods", periods, "run length in linear periods");
    app.add_option("--eps", eps, "dissipation strength (nf-check: perturbation size)");

    auto* classify = app.add_subcommand("classify", "thresholds, region, spectrum, twist conditions");
    auto* simulate = app.add_subcommand("simulate", "single dissipative run, CSV trajectory");
    auto* sweep = app.add_subcommand("sweep", "max r over a Pe grid");
    auto* cont = app.add_subcommand("continue", "Newton continuation of the equilibrium and its spectrum");
    auto* nfcheck = app.add_subcommand("nf-check", "normal-form period table");

    CLI11_PARSE(app, argc, argv);

    try {
        uvstab::ExperimentConfig cfg = preset_name.empty() ? uvstab::ExperimentConfig{} : uvstab::preset(preset_name);
        bool eps_given = preset_name == "nf-table";
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            const auto j = nlohmann::json::parse(in, nullptr, false);
            if (j.is_discarded()) throw uvstab::ConfigError("config parse error in " + config_path);
            uvstab::apply_json(cfg, j);
            eps_given = eps_given || j.contains("eps");
        }
        if (periods) cfg.periods = *periods;
        if (eps) {
            cfg.eps = {*eps};
            eps_given = true;
        }

        std::ofstream file;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) throw std::runtime_error("cannot write " + out_path);
        }
        std::ostream& os = out_path.empty() ? std::cout : file;

        if (*classify) uvstab::cmd_classify(cfg, os);
        else if (*simulate) uvstab::cmd_simulate(cfg, os);
        else if (*sweep) uvstab::cmd_sweep(cfg, os);
        else if (*cont) uvstab::cmd_continue(cfg, os);
        else if (*nfcheck) uvstab::cmd_nfcheck(eps_given ? cfg.eps : uvstab::preset("nf-table").eps, os);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
