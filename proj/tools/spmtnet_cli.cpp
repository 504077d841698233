#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spmtnet/commands.hpp"
#include "spmtnet/errors.hpp"

namespace {

using namespace spmtnet;

template <class T>
void optional_flag(CLI::App* cmd, const std::string& name, std::optional<T>& target,
                   const std::string& help)
{
    cmd->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

void solver_flags(CLI::App* cmd, app::SolverOverrides& s)
{
    optional_flag(cmd, "--nr", s.N_r, "Radial nodes per particle");
    optional_flag(cmd, "--dt", s.dt, "Time step (s)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App cli{"SPMT electrochemical-thermal model with hybrid neural-network correction"};
    cli.require_subcommand(1);
    std::string params = "data/params/lco_graphite.json";

    app::GenDataOptions gen;
    std::optional<std::uint64_t> gen_seed;
    auto* c_gen = cli.add_subcommand("gen-data", "Generate training and test datasets");
    c_gen->add_option("--params", params, "Cell parameter file")->check(CLI::ExistingFile);
    c_gen->add_option("--truth", gen.truth, "Truth-model file")->required()->check(CLI::ExistingFile);
    c_gen->add_option("--out", gen.out, "Dataset directory")->required();
    optional_flag(c_gen, "--seed", gen_seed, "Drive-cycle seed override");
    solver_flags(c_gen, gen.solver);

    app::TrainOptions tr;
    std::string wiring = "hybrid-1", features;
    std::optional<std::uint64_t> tr_seed;
    std::optional<int> tr_epochs;
    std::string tr_config;
    auto* c_train = cli.add_subcommand("train", "Train a hybrid model");
    c_train->add_option("--params", params, "Cell parameter file")->check(CLI::ExistingFile);
    c_train->add_option("--data", tr.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c_train->add_option("--out", tr.out, "Model directory")->required();
    c_train->add_option("--wiring", wiring, "hybrid-1 or hybrid-2")
        ->check(CLI::IsMember({"hybrid-1", "hybrid-2"}));
    c_train->add_option("--config", tr_config, "Training configuration file")->check(CLI::ExistingFile);
    c_train->add_option("--features", features, "full or no-state")
        ->check(CLI::IsMember({"full", "no-state"}));
    c_train->add_option("--name", tr.name, "Model file stem");
    optional_flag(c_train, "--seed", tr_seed, "Network seed override");
    optional_flag(c_train, "--epochs", tr_epochs, "Epoch count override");
    solver_flags(c_train, tr.solver);

    app::EvalOptions ev;
    auto* c_eval = cli.add_subcommand("eval", "Evaluate hybrid models against the datasets");
    c_eval->add_option("--params", params, "Cell parameter file")->check(CLI::ExistingFile);
    c_eval->add_option("--data", ev.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    c_eval->add_option("--model", ev.models, "Hybrid model file (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    c_eval->add_option("--out", ev.out, "Report directory")->required();
    c_eval->add_option("--split", ev.splits, "train and/or test")->check(CLI::IsMember({"train", "test"}));
    c_eval->add_option("--threads", ev.threads, "Worker threads")->check(CLI::PositiveNumber);
    solver_flags(c_eval, ev.solver);

    app::SimulateOptions sim;
    std::string sim_out, sim_model;
    std::optional<double> t_end;
    auto* c_sim = cli.add_subcommand("simulate", "Run one SPMT simulation and write its trace");
    c_sim->add_option("--params", params, "Cell parameter file")->check(CLI::ExistingFile);
    c_sim->add_option("--profile", sim.profile, "cc:<rate>, udds:<seed>, us06:<seed> or rest");
    c_sim->add_option("--soc0", sim.soc0, "Initial state of charge")->check(CLI::Range(0.0, 1.0));
    c_sim->add_option("--T-amb", sim.T_amb, "Ambient and initial temperature (K)");
    optional_flag(c_sim, "--t-end", t_end, "Profile length (s)");
    c_sim->add_option("--model", sim_model, "Hybrid model file; adds a V_hybrid column")
        ->check(CLI::ExistingFile);
    c_sim->add_option("--out", sim_out, "Trace file (stdout if omitted)");
    solver_flags(c_sim, sim.solver);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (c_gen->parsed()) {
            gen.params = params;
            gen.seed = gen_seed;
            app::gen_data(gen, std::cerr);
        } else if (c_train->parsed()) {
            tr.params = params;
            tr.wiring = hybrid::wiring_from_string(wiring);
            if (!features.empty())
                tr.features = hybrid::feature_set_from_string(features);
            if (!tr_config.empty())
                tr.config = tr_config;
            tr.seed = tr_seed;
            tr.epochs = tr_epochs;
            app::train(tr, std::cerr);
        } else if (c_eval->parsed()) {
            ev.params = params;
            const auto reports = app::evaluate(ev, std::cout);
            bool all_failed = true;
            for (const auto& r : reports)
                all_failed = all_failed && r.all_failed();
            if (all_failed) {
                std::cerr << "error: every evaluation cell failed\n";
                return 2;
            }
        } else if (c_sim->parsed()) {
            sim.params = params;
            sim.t_end = t_end;
            if (!sim_model.empty())
                sim.model = sim_model;
            if (!sim_out.empty())
                sim.out = sim_out;
            app::simulate(sim, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return app::exit_code_for(e);
    }
    return 0;
}
