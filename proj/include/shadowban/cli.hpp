#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shadowban/config.hpp"
#include "shadowban/engine.hpp"
#include "shadowban/generate.hpp"
#include "shadowban/io.hpp"
#include "shadowban/runio.hpp"

namespace shadowban {

namespace cli_detail {

inline std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    for (std::string_view field : split_csv(text)) {
        double v;
        if (!parse_double(trim(field), v))
            throw std::invalid_argument(flag + ": malformed number `" + std::string(trim(field)) + "`");
        values.push_back(v);
    }
    if (values.empty()) throw std::invalid_argument(flag + ": empty list");
    return values;
}

inline std::vector<std::uint32_t> parse_u32_list(const std::string& text, const std::string& flag) {
    std::vector<std::uint32_t> values;
    for (std::string_view field : split_csv(text)) {
        std::uint64_t v;
        if (!parse_uint64(trim(field), v) || v > 0xffffffffull)
            throw std::invalid_argument(flag + ": malformed integer `" + std::string(trim(field)) + "`");
        values.push_back(static_cast<std::uint32_t>(v));
    }
    if (values.empty()) throw std::invalid_argument(flag + ": empty list");
    return values;
}

/// Rows separated by `;`, entries by `,`: "1,0.05;0.05,1".
inline std::vector<std::vector<double>> parse_matrix(const std::string& text, const std::string& flag) {
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(';', start);
        rows.push_back(parse_double_list(
            text.substr(start, pos == std::string::npos ? std::string::npos : pos - start), flag));
        if (pos == std::string::npos) return rows;
        start = pos + 1;
    }
}

inline TrajectoryFrame execute_run(const RunSpec& spec) {
    if (spec.edges.empty() || spec.nodes.empty())
        throw std::invalid_argument("--edges and --nodes are required (as flags or config keys)");
    if (spec.bins < 1) throw std::invalid_argument("--bins must be >= 1");
    spec.sim.validate();
    std::filesystem::create_directories(spec.out);
    write_config(spec.out + "/config.json", spec);

    NetworkBundle bundle = load_network(spec.edges, spec.nodes);
    const std::vector<std::string> ids =
        bundle.dense_ids ? std::vector<std::string>{} : bundle.external_ids;
    write_histogram_csv(spec.out + "/histogram_initial.csv", histogram(bundle.opinions, spec.bins));

    std::ofstream log(spec.out + "/run.log");
    if (!log) throw io_error("cannot open " + spec.out + "/run.log for writing");
    PolicyObserver observer = [&](double day, const ShadowBanPolicy& policy, const OpinionVector&) {
        log << "day=" << format_double(day)
            << " mean_ban_strength=" << format_double(policy.mean_strength())
            << " banned_edges=" << policy.banned_edge_count() << "\n";
        if (spec.save_policies)
            write_policy_snapshot(spec.out + "/" + policy_snapshot_name(day), bundle.network,
                                  policy, ids);
    };

    RunResult result = run(spec.sim, bundle.network, bundle.opinions, observer);
    log.flush();
    if (!log) throw io_error("write failed on " + spec.out + "/run.log");

    write_trajectory_csv(spec.out + "/trajectory.csv", result.frames);
    write_histogram_csv(spec.out + "/histogram_final.csv",
                        histogram(result.final_opinions, spec.bins));
    write_opinions_csv(spec.out + "/final_opinions.csv", result.final_opinions, ids);
    return result.frames.back();
}

inline int execute_sweep(const RunSpec& spec) {
    if (spec.edges.empty() || spec.nodes.empty())
        throw std::invalid_argument("--edges and --nodes are required (as flags or config keys)");
    spec.sim.validate();
    std::filesystem::create_directories(spec.out);
    write_config(spec.out + "/config.json", spec, true);
    NetworkBundle bundle = load_network(spec.edges, spec.nodes);
    const std::vector<SweepRow> rows =
        sweep(spec.sim, spec.grid, bundle.network, bundle.opinions, spec.workers);
    write_sweep_csv(spec.out + "/sweep.csv", rows);
    std::size_t failed = 0;
    for (const SweepRow& row : rows) failed += !row.relative.has_value();
    std::cout << "rows=" << rows.size() << " failed=" << failed
              << " sweep=" << spec.out + "/sweep.csv" << "\n";
    return failed == 0 ? 0 : 2;
}

inline std::size_t execute_analyze(const std::string& run_dir, std::string report_path) {
    const RunSpec spec = read_config(run_dir + "/config.json");
    if (report_path.empty()) report_path = run_dir + "/analyze_report.csv";
    NetworkBundle bundle = load_network(spec.edges, spec.nodes);

    const std::size_t intervals = spec.sim.interval_count();
    std::vector<std::string> missing;
    for (std::size_t k = 0; k < intervals; ++k) {
        const double day = static_cast<double>(k) * spec.sim.policy_interval_days;
        const std::string name = policy_snapshot_name(day);
        if (!std::filesystem::exists(run_dir + "/" + name)) missing.push_back(name);
    }
    if (!missing.empty()) {
        std::string msg = "missing policy snapshots in " + run_dir + " (expected " +
                          std::to_string(intervals) + " files):";
        const std::size_t shown = missing.size() <= 24 ? missing.size() : 12;
        for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i];
        if (shown < missing.size())
            msg += " ... and " + std::to_string(missing.size() - shown) + " more";
        throw io_error(msg + "; re-run simulate with --save-policies");
    }

    std::unordered_map<std::string, std::uint32_t> id_of;
    for (std::uint32_t v = 0; v < bundle.network.vertex_count(); ++v)
        id_of.emplace(bundle.external_ids[v], v);
    const auto lookup = edge_lookup(bundle.network);

    OpinionVector theta = bundle.opinions;
    std::vector<double> deriv_buffer;
    std::vector<BiasReportRow> report;
    for (std::size_t k = 0; k < intervals; ++k) {
        const double day = static_cast<double>(k) * spec.sim.policy_interval_days;
        const ShadowBanPolicy policy =
            read_policy_snapshot(run_dir + "/" + policy_snapshot_name(day), bundle.network, id_of,
                                 lookup, spec.sim.budget, day);
        if (policy.banned_edge_count() > 0)
            report.push_back({day, shadow_ban_rate(bundle.network, policy, theta),
                              edge_polarity_ban_stats(bundle.network, policy, theta)});
        integrate_interval(bundle.network, theta, policy.u, spec.sim.dynamics,
                           spec.sim.policy_interval_days, deriv_buffer);
    }
    write_bias_report(report_path, report);
    std::cout << "report=" << report_path << " rows=" << report.size() << "\n";
    return report.size();
}

} // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Shadow-ban policy simulation over opinion dynamics"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write synthetic network files");
    gen->require_subcommand(1);
    std::string out_edges = "edges.csv", out_nodes = "nodes.csv";

    std::uint32_t path_n = 0;
    auto* gen_path = gen->add_subcommand("path", "Bidirectional path with linear opinions");
    gen_path->add_option("--n", path_n, "vertex count")->required();
    gen_path->add_option("--out-edges", out_edges, "edge CSV path");
    gen_path->add_option("--out-nodes", out_nodes, "node CSV path");
    gen_path->callback([&] {
        auto [network, opinions] = generate_path(path_n);
        save_network(network, opinions, out_edges, out_nodes);
    });

    std::string sbm_sizes, sbm_p, sbm_opinions;
    std::uint64_t sbm_seed = 0;
    auto* gen_sbm = gen->add_subcommand("sbm", "Directed stochastic block model");
    gen_sbm->add_option("--sizes", sbm_sizes, "cluster sizes, e.g. 5,5")->required();
    gen_sbm->add_option("--p", sbm_p, "connection matrix, e.g. 1,0.05;0.05,1")->required();
    gen_sbm->add_option("--opinions", sbm_opinions, "cluster opinions, e.g. 0.35,0.65")->required();
    gen_sbm->add_option("--seed", sbm_seed, "RNG seed");
    gen_sbm->add_option("--out-edges", out_edges, "edge CSV path");
    gen_sbm->add_option("--out-nodes", out_nodes, "node CSV path");
    gen_sbm->callback([&] {
        auto [network, opinions] =
            generate_sbm(cli_detail::parse_u32_list(sbm_sizes, "--sizes"),
                         cli_detail::parse_matrix(sbm_p, "--p"),
                         cli_detail::parse_double_list(sbm_opinions, "--opinions"), sbm_seed);
        save_network(network, opinions, out_edges, out_nodes);
    });

    std::uint32_t er_n = 0;
    double er_p = 0.0;
    std::uint64_t er_seed = 0;
    auto* gen_er = gen->add_subcommand("er", "Directed Erdos-Renyi graph, uniform random opinions");
    gen_er->add_option("--n", er_n, "vertex count")->required();
    gen_er->add_option("--p", er_p, "edge probability")->required();
    gen_er->add_option("--seed", er_seed, "RNG seed");
    gen_er->add_option("--out-edges", out_edges, "edge CSV path");
    gen_er->add_option("--out-nodes", out_nodes, "node CSV path");
    gen_er->callback([&] {
        DirectedNetwork network = generate_er(er_n, er_p, er_seed);
        std::mt19937_64 opinion_gen(er_seed ^ 0xc2b2ae3d27d4eb4full);
        OpinionVector opinions(network.vertex_count());
        for (double& v : opinions) v = uniform01(opinion_gen);
        save_network(network, opinions, out_edges, out_nodes);
    });

    // flags shared by simulate and sweep
    struct FlagSet {
        std::string config_path, edges, nodes, out, objective;
        double horizon = 0, policy_interval = 0, record_interval = 0, dt_max = 0;
        std::int64_t seed = 0;
        std::size_t bins = 0;
    };
    auto add_common = [](CLI::App* cmd, FlagSet& f) {
        cmd->add_option("--config", f.config_path, "JSON config; flags override its values");
        cmd->add_option("--edges", f.edges, "edge CSV path");
        cmd->add_option("--nodes", f.nodes, "node CSV path");
        cmd->add_option("--out", f.out, "output directory");
        cmd->add_option("--objective", f.objective, "max-mean, min-var, or max-var");
        cmd->add_option("--horizon-days", f.horizon, "simulated days");
        cmd->add_option("--policy-interval-days", f.policy_interval, "days between policy solves");
        cmd->add_option("--record-interval-days", f.record_interval, "days between trajectory rows");
        cmd->add_option("--dt-max", f.dt_max, "largest Euler step");
        cmd->add_option("--seed", f.seed, "RNG seed");
        cmd->add_option("--bins", f.bins, "histogram bin count");
    };
    auto overlay = [](CLI::App* cmd, const FlagSet& f) {
        RunSpec spec;
        if (cmd->count("--config")) spec = read_config(f.config_path);
        if (cmd->count("--edges")) spec.edges = f.edges;
        if (cmd->count("--nodes")) spec.nodes = f.nodes;
        if (cmd->count("--out")) spec.out = f.out;
        if (cmd->count("--bins")) spec.bins = f.bins;
        if (cmd->count("--objective")) spec.sim.objective = parse_objective(f.objective);
        if (cmd->count("--horizon-days")) spec.sim.horizon_days = f.horizon;
        if (cmd->count("--policy-interval-days")) spec.sim.policy_interval_days = f.policy_interval;
        if (cmd->count("--record-interval-days")) spec.sim.record_interval_days = f.record_interval;
        if (cmd->count("--dt-max")) spec.sim.dynamics.dt_max = f.dt_max;
        if (cmd->count("--seed")) spec.sim.seed = f.seed;
        return spec;
    };

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run one simulation into a run directory");
    FlagSet sim_flags;
    double sim_s_network = 0, sim_s_edge = 0, sim_omega = 0, sim_epsilon = 0;
    bool sim_baseline = false, sim_save_policies = false;
    add_common(sim, sim_flags);
    sim->add_option("--s-network", sim_s_network, "network-wide mean ban budget");
    sim->add_option("--s-edge", sim_s_edge, "per-edge ban cap");
    sim->add_option("--omega", sim_omega, "per-post shift gain");
    sim->add_option("--epsilon", sim_epsilon, "confidence half-width");
    sim->add_flag("--baseline", sim_baseline, "force the zero policy");
    sim->add_flag("--save-policies", sim_save_policies, "write policy_day_<d>.csv snapshots");
    sim->callback([&] {
        RunSpec spec = overlay(sim, sim_flags);
        if (sim->count("--s-network")) spec.sim.budget.s_network = sim_s_network;
        if (sim->count("--s-edge")) spec.sim.budget.s_edge = sim_s_edge;
        if (sim->count("--omega")) spec.sim.dynamics.omega = sim_omega;
        if (sim->count("--epsilon")) spec.sim.dynamics.epsilon = sim_epsilon;
        if (sim_baseline) spec.sim.baseline = true;
        if (sim_save_policies) spec.save_policies = true;
        const TrajectoryFrame terminal = cli_detail::execute_run(spec);
        std::cout << "terminal_mean=" << format_double(terminal.mean)
                  << " terminal_variance=" << format_double(terminal.variance)
                  << " mean_ban=" << format_double(terminal.mean_ban_strength) << "\n";
    });

    // sweep
    auto* swp = app.add_subcommand("sweep", "Relative objective over a parameter grid");
    FlagSet sweep_flags;
    std::string grid_s_network, grid_s_edge, grid_epsilon, grid_omega;
    std::size_t workers = 1;
    int sweep_exit = 0;
    add_common(swp, sweep_flags);
    swp->add_option("--s-network", grid_s_network, "comma list of s_network values");
    swp->add_option("--s-edge", grid_s_edge, "comma list of s_edge values");
    swp->add_option("--epsilon", grid_epsilon, "comma list of epsilon values");
    swp->add_option("--omega", grid_omega, "comma list of omega values");
    swp->add_option("--workers", workers, "concurrent sweep points");
    swp->callback([&] {
        RunSpec spec = overlay(swp, sweep_flags);
        if (swp->count("--s-network"))
            spec.grid.s_network = cli_detail::parse_double_list(grid_s_network, "--s-network");
        if (swp->count("--s-edge"))
            spec.grid.s_edge = cli_detail::parse_double_list(grid_s_edge, "--s-edge");
        if (swp->count("--epsilon"))
            spec.grid.epsilon = cli_detail::parse_double_list(grid_epsilon, "--epsilon");
        if (swp->count("--omega"))
            spec.grid.omega = cli_detail::parse_double_list(grid_omega, "--omega");
        if (swp->count("--workers")) spec.workers = workers;
        sweep_exit = cli_detail::execute_sweep(spec);
    });

    // analyze
    auto* ana = app.add_subcommand("analyze", "Partisan-bias report from stored policy snapshots");
    std::string run_dir, report_path;
    ana->add_option("--run", run_dir, "run directory with config.json and snapshots")->required();
    ana->add_option("--out", report_path, "report CSV path (default <run>/analyze_report.csv)");
    ana->callback([&] { cli_detail::execute_analyze(run_dir, report_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return sweep_exit;
}

/// Convenience entry point for in-process tests.
inline int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("shadowban");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace shadowban
