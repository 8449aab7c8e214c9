// dcimc: cost estimation, design space exploration, functional simulation and
// netlist generation for digital compute-in-memory macros.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcim/cli.hpp"

int main(int argc, char** argv) {
    using namespace dcim;
    CLI::App app{"dcimc: DCIM macro cost model, explorer, simulator and netlist generator"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out_dir;
    std::vector<std::string> filters, selects;
    bool plot = false;
    cli::Options opt;
    std::string tech;

    for (auto name : cli::command_names) {
        auto* sub = app.add_subcommand(std::string(name));
        sub->add_option("config", config_path, "key = value configuration file");
        sub->add_option("--set", sets, "override a configuration key (key=value)")->take_all();
        sub->add_option("--seed", seed, "sets ga.seed and simulate.seed");
        sub->add_option("--jobs", jobs, "worker threads");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--tech", tech, "technology library file");
        if (name == "generate") {
            sub->add_option("--filter", filters, "metric<=value style constraint, repeatable")
                ->allow_extra_args(false)
                ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
            sub->add_option("--select", selects, "design tag to keep, repeatable")
                ->allow_extra_args(false)
                ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
            sub->add_option("--frontier", opt.frontier_path, "frontier.json to distill");
        }
        if (name == "explore") sub->add_flag("--emit-plot-data", plot, "write plot_data.csv");
        if (name == "simulate") sub->add_option("--trace", opt.trace_path, "write the first trial's cycle trace");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : cli::exit_validation;
    }

    const auto* sub = app.get_subcommands().front();
    const auto cmd = *cli::command_from_name(sub->get_name());

    if (seed) {
        sets.push_back("ga.seed=" + std::to_string(*seed));
        sets.push_back("simulate.seed=" + std::to_string(*seed));
    }
    if (jobs) sets.push_back("jobs=" + std::to_string(*jobs));
    if (!out_dir.empty()) sets.push_back("output.dir=\"" + out_dir + "\"");
    if (!tech.empty()) sets.push_back("tech.path=\"" + tech + "\"");
    if (plot) sets.push_back("output.plot_data=true");

    cfg::RunConfig cfg;
    try {
        cfg = cfg::load_spec_config(config_path, sets);
        for (const auto& f : filters) cfg.filters.push_back(cfg::parse_filter(f, "--filter"));
        cfg.select.insert(cfg.select.end(), selects.begin(), selects.end());
    } catch (const Error& e) {
        std::cerr << cli::error_json(e).dump() << "\n";
        return cli::exit_code_for(e.code());
    }
    return cli::run_command(cfg, cmd, std::cout, std::cerr, opt);
}
