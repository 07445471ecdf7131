#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "shiftwave/commands.hpp"
#include "shiftwave/errors.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs& args, bool config_is_dir = false) {
    sub->add_option("--config", args.config,
                    config_is_dir ? "directory with the acceptance configs"
                                  : "scenario config file")
        ->required();
    sub->add_option("--out", args.out, "output directory (default ./out)");
    sub->add_option("--override", args.overrides,
                    "section.key=value applied after parsing (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shiftwave: forced waves and spreading dynamics of a shifting-habitat "
                 "predator-prey system (nonlocal or local dispersal)"};
    app.require_subcommand(1);

    CommonArgs speeds_args, wave_args, sim_args, classify_args, sweep_args, accept_args;
    std::vector<int> accept_only;

    CLI::App* sp = app.add_subcommand("speeds", "critical speed report (CSV)");
    add_common(sp, speeds_args);
    CLI::App* wv = app.add_subcommand("wave", "construct and solve a forced wave");
    add_common(wv, wave_args);
    CLI::App* sim = app.add_subcommand("simulate", "integrate the Cauchy problem with probes");
    add_common(sim, sim_args);
    CLI::App* cl = app.add_subcommand("classify", "classify persistence from a probe CSV");
    add_common(cl, classify_args);
    CLI::App* sw = app.add_subcommand("sweep", "simulate+classify across an s list");
    add_common(sw, sweep_args);
    CLI::App* ac = app.add_subcommand("accept", "run the acceptance experiment suite");
    add_common(ac, accept_args, true);
    ac->add_option("--criterion", accept_only, "run only these criterion ids (1-9)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sp->parsed()) {
            return shiftwave::cmd_speeds(
                shiftwave::load_config(speeds_args.config, speeds_args.overrides),
                speeds_args.out);
        }
        if (wv->parsed()) {
            return shiftwave::cmd_wave(
                shiftwave::load_config(wave_args.config, wave_args.overrides), wave_args.out);
        }
        if (sim->parsed()) {
            return shiftwave::cmd_simulate(
                shiftwave::load_config(sim_args.config, sim_args.overrides), sim_args.out);
        }
        if (cl->parsed()) {
            return shiftwave::cmd_classify(
                shiftwave::load_config(classify_args.config, classify_args.overrides),
                classify_args.out);
        }
        if (sw->parsed()) {
            return shiftwave::cmd_sweep(
                shiftwave::load_config(sweep_args.config, sweep_args.overrides), sweep_args.out);
        }
        if (ac->parsed()) {
            return shiftwave::cmd_accept(accept_args.config, accept_args.out,
                                         accept_args.overrides, accept_only);
        }
    } catch (const shiftwave::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const shiftwave::RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 2;
    } catch (const shiftwave::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 2;
    } catch (const shiftwave::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
