#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dagsim/dagsim.hpp"

namespace {

struct CliOptions {
    std::size_t txs = 0;
    double dep_ratio = 0;
    std::string strategy;
    std::string contract;
    std::uint64_t seed = 0;
    std::size_t block_size = 0;
    double ttl_ms = 0;
    bool no_prioritize = false;
    double validation_cost_us = 0;
    unsigned workers = 0;
    long long amount = 0;
    long long fund_multiple = 0;
    std::string config_path;
    std::string out;
    std::string replay_in;
    std::string replay_out;
    std::string outcomes;
};

void add_run_flags(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--txs", o.txs, "transactions to generate");
    cmd->add_option("--dep-ratio", o.dep_ratio, "fraction of dependent transactions [0,1]");
    cmd->add_option("--strategy", o.strategy,
                    "commit strategy: original | dag-dynamic | dag-fixed:K");
    cmd->add_option("--contract", o.contract, "contract: voting | asset | wallet");
    cmd->add_option("--seed", o.seed, "workload seed");
    cmd->add_option("--block-size", o.block_size, "transactions per block");
    cmd->add_option("--ttl-ms", o.ttl_ms, "endorsement time-to-live in ms");
    cmd->add_flag("--no-prioritize", o.no_prioritize,
                  "keep endorsement order inside blocks instead of independents first");
    cmd->add_option("--validation-cost-us", o.validation_cost_us,
                    "per-transaction commit validation latency in microseconds");
    cmd->add_option("--workers", o.workers, "cap on commit workers (0 = detected cores)");
    cmd->add_option("--amount", o.amount, "per-operation amount");
    cmd->add_option("--fund-multiple", o.fund_multiple, "setup balance = amount * multiple");
    cmd->add_option("--config", o.config_path, "flat key = value config file");
    cmd->add_option("--out", o.out, "write a CSV row (or sweep CSV) to this path");
}

dagsim::RunConfig make_config(const CLI::App* cmd, const CliOptions& o) {
    dagsim::RunConfig cfg;
    if (cmd->count("--config") > 0) dagsim::apply_config_file(cfg, o.config_path);
    if (cmd->count("--txs") > 0) cfg.workload.tx_count = o.txs;
    if (cmd->count("--dep-ratio") > 0) cfg.workload.dependency_ratio = o.dep_ratio;
    if (cmd->count("--strategy") > 0) {
        auto strategy = dagsim::parse_strategy(o.strategy);
        if (!strategy) throw dagsim::ConfigError("unknown strategy: " + o.strategy);
        cfg.strategy = *strategy;
    }
    if (cmd->count("--contract") > 0) {
        auto kind = dagsim::parse_contract(o.contract);
        if (!kind) throw dagsim::ConfigError("unknown contract: " + o.contract);
        cfg.workload.contract = *kind;
    }
    if (cmd->count("--seed") > 0) cfg.workload.seed = o.seed;
    if (cmd->count("--block-size") > 0) cfg.block_size = o.block_size;
    if (cmd->count("--ttl-ms") > 0) cfg.endorsement_ttl_ms = o.ttl_ms;
    if (cmd->count("--no-prioritize") > 0) cfg.prioritize_independent = false;
    if (cmd->count("--validation-cost-us") > 0)
        cfg.validation_cost_ms = o.validation_cost_us / 1000.0;
    if (cmd->count("--workers") > 0) cfg.max_workers = o.workers;
    if (cmd->count("--amount") > 0) cfg.workload.amount = o.amount;
    if (cmd->count("--fund-multiple") > 0) cfg.workload.fund_multiple = o.fund_multiple;
    dagsim::validate_run_config(cfg);
    return cfg;
}

void print_summary(const dagsim::RunConfig& cfg, const dagsim::MetricsReport& r) {
    std::printf("contract       %s\n", dagsim::contract_name(cfg.workload.contract));
    std::printf("strategy       %s\n", cfg.strategy.name().c_str());
    std::printf("transactions   %zu in %zu blocks\n", r.records.size(), r.blocks);
    std::printf("flagged        %zu dependent at endorsement\n", r.flagged);
    std::printf("committed      %zu\n", r.committed);
    std::printf("aborted        %zu", r.aborted);
    if (!r.abort_reasons.empty()) {
        std::printf(" (");
        bool sep = false;
        for (const auto& [reason, count] : r.abort_reasons) {
            std::printf("%s%s: %zu", sep ? ", " : "", dagsim::reason_name(reason), count);
            sep = true;
        }
        std::printf(")");
    }
    std::printf("\n");
    std::printf("duration       %.3f ms\n", r.duration_ms);
    std::printf("throughput     %.3f tx/s (committed-only %.3f tx/s)\n", r.throughput_tps,
                r.committed_tps);
    std::printf("art            all %.3f ms, committed %.3f ms, aborted %.3f ms\n", r.art_all_ms,
                r.art_committed_ms, r.art_aborted_ms);
    std::printf("schedule       depth %zu, widest level %zu, workers %u\n", r.max_level_depth,
                r.widest_level, r.workers_used);
}

int run_command(const CLI::App* cmd, const CliOptions& o) {
    dagsim::RunConfig cfg = make_config(cmd, o);

    dagsim::GeneratedWorkload workload;
    if (!o.replay_in.empty()) {
        dagsim::ReplayData replay = dagsim::load_replay_file(o.replay_in);
        cfg.workload = replay.config;
        workload = std::move(replay.workload);
    } else {
        workload = dagsim::generate(cfg.workload);
    }
    if (!o.replay_out.empty())
        dagsim::write_replay_file(o.replay_out, cfg.workload, workload.proposals);

    dagsim::MetricsReport report = dagsim::run_with_workload(cfg, workload);
    print_summary(cfg, report);

    if (!o.outcomes.empty())
        dagsim::write_text_file(o.outcomes, dagsim::render_outcome_log(report));
    if (!o.out.empty()) {
        dagsim::write_text_file(o.out, std::string(dagsim::kCsvHeader) + "\n" +
                                           dagsim::csv_row("run", cfg, report) + "\n");
        std::printf("csv            %s\n", o.out.c_str());
    }
    return 0;
}

int sweep_command(const CLI::App* cmd, const CliOptions& o, const std::string& experiment) {
    dagsim::RunConfig base = make_config(cmd, o);
    std::string csv;
    if (experiment == "exp1")
        csv = dagsim::sweep_experiment1(base);
    else if (experiment == "exp2")
        csv = dagsim::sweep_experiment2(base);
    else if (experiment == "exp3")
        csv = dagsim::sweep_experiment3(base);
    else
        throw dagsim::ConfigError("unknown experiment: " + experiment);

    if (o.out.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        dagsim::write_text_file(o.out, csv);
        std::printf("csv            %s\n", o.out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependency-aware block commit simulator"};
    app.require_subcommand(1);

    CliOptions run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment configuration");
    add_run_flags(run_cmd, run_opts);
    run_cmd->add_option("--replay-in", run_opts.replay_in,
                        "load proposals from a replay file instead of generating");
    run_cmd->add_option("--replay-out", run_opts.replay_out,
                        "write the generated proposals as a replay file");
    run_cmd->add_option("--outcomes", run_opts.outcomes,
                        "write the per-transaction outcome log to this path");

    CliOptions sweep_opts;
    std::string experiment;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a predefined experiment grid");
    sweep_cmd->add_option("experiment", experiment, "exp1 | exp2 | exp3")->required();
    add_run_flags(sweep_cmd, sweep_opts);

    std::string plot_csv;
    std::string plot_dir = "plots";
    CLI::App* plot_cmd = app.add_subcommand("plot", "render sweep CSV to SVG charts");
    plot_cmd->add_option("csv", plot_csv, "sweep CSV file")->required();
    plot_cmd->add_option("--out", plot_dir, "output directory for SVG files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return run_command(run_cmd, run_opts);
        if (sweep_cmd->parsed()) return sweep_command(sweep_cmd, sweep_opts, experiment);
        if (plot_cmd->parsed()) {
            for (const std::string& path : dagsim::emit_plots(plot_csv, plot_dir))
                std::printf("wrote          %s\n", path.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
