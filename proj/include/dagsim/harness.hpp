#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/committer.hpp"
#include "dagsim/contracts.hpp"
#include "dagsim/endorser.hpp"
#include "dagsim/model.hpp"
#include "dagsim/orderer.hpp"
#include "dagsim/workload.hpp"

namespace dagsim {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    WorkloadConfig workload;
    CommitStrategy strategy = CommitStrategy::sequential_mvcc();
    std::size_t block_size = 100;
    TimeMs endorsement_ttl_ms = 60000;
    bool prioritize_independent = true;
    TimeMs validation_cost_ms = 0.1;
    unsigned max_workers = 0;  // 0 = available_cores()
    Clock clock = wall_clock();
};

struct TxRecord {
    TxId tx_id = 0;
    TxStatus status = TxStatus::Aborted;
    AbortReason reason = AbortReason::None;
    TimeMs submit_time = 0;
    TimeMs finish_time = 0;
};

struct MetricsReport {
    std::vector<TxRecord> records;  // sorted by tx_id
    std::size_t committed = 0;
    std::size_t aborted = 0;
    std::map<AbortReason, std::size_t> abort_reasons;
    double duration_ms = 0;
    double throughput_tps = 0;
    double committed_tps = 0;
    double art_all_ms = 0;
    double art_committed_ms = 0;
    double art_aborted_ms = 0;
    std::size_t blocks = 0;
    std::size_t flagged = 0;          // endorsed with flag=1
    std::size_t max_level_depth = 0;  // deepest schedule across blocks
    std::size_t widest_level = 0;
    unsigned workers_used = 0;
    WorldState final_state;
};

inline void validate_run_config(const RunConfig& cfg) {
    if (cfg.workload.tx_count == 0) throw ConfigError("tx count must be at least 1");
    if (cfg.workload.dependency_ratio < 0.0 || cfg.workload.dependency_ratio > 1.0)
        throw ConfigError("dependency ratio must be within [0, 1]");
    if (cfg.workload.amount <= 0) throw ConfigError("amount must be positive");
    if (cfg.workload.fund_multiple <= 0) throw ConfigError("fund multiple must be positive");
    if (cfg.block_size == 0) throw ConfigError("block size must be at least 1");
    if (cfg.endorsement_ttl_ms <= 0) throw ConfigError("ttl must be positive");
    if (cfg.validation_cost_ms < 0) throw ConfigError("validation cost must be non-negative");
    if (cfg.strategy.kind == CommitStrategy::Kind::DagParallel &&
        cfg.strategy.degree_mode == CommitStrategy::DegreeMode::Fixed &&
        cfg.strategy.fixed_degree == 0)
        throw ConfigError("fixed degree must be at least 1");
    if (!cfg.clock) throw ConfigError("clock must be set");
}

namespace detail {

inline WorldState apply_setup(const std::vector<ContractCall>& setup) {
    WorldState world;
    for (const auto& call : setup) {
        SimulationResult sim = simulate(call, world);
        if (!sim.ok)
            throw std::runtime_error("setup call " + call.function + " failed: " + sim.reason);
        apply_writeset_inplace(world, sim.rwset.writes);
    }
    return world;
}

}  // namespace detail

// Full pipeline over a prepared workload: endorse every proposal in order
// against the post-setup snapshot, then alternately cut and commit blocks
// until the queue drains. Every proposal ends in exactly one record.
inline MetricsReport run_with_workload(const RunConfig& cfg, const GeneratedWorkload& workload) {
    validate_run_config(cfg);

    MetricsReport report;
    WorldState world = detail::apply_setup(workload.setup);

    Endorser endorser({cfg.endorsement_ttl_ms, cfg.clock});
    const TimeMs start = cfg.clock();

    std::vector<EndorsedTransaction> pending;
    pending.reserve(workload.proposals.size());
    std::map<TxId, TimeMs> submit_times;

    auto record = [&](TxId id, TxStatus status, AbortReason reason, TimeMs finish) {
        TxRecord r;
        r.tx_id = id;
        r.status = status;
        r.reason = reason;
        r.submit_time = submit_times.at(id);
        r.finish_time = finish;
        report.records.push_back(r);
    };

    for (TransactionProposal proposal : workload.proposals) {
        proposal.submit_time = cfg.clock();
        if (!submit_times.emplace(proposal.tx_id, proposal.submit_time).second)
            throw ConfigError("duplicate tx id in workload: " + std::to_string(proposal.tx_id));
        EndorseResult res = endorser.endorse(proposal, world);
        if (!res.accepted()) {
            record(proposal.tx_id, TxStatus::Aborted, AbortReason::SimulationFailed, cfg.clock());
            continue;
        }
        if (res.tx->flag == 1) ++report.flagged;
        pending.push_back(std::move(*res.tx));
    }

    OrdererConfig ocfg{cfg.block_size, cfg.prioritize_independent};
    CommitterConfig ccfg{cfg.strategy, cfg.clock, cfg.validation_cost_ms, cfg.max_workers};

    std::uint64_t block_number = 0;
    while (!pending.empty()) {
        try {
            BuildBlockResult built = build_block(pending, block_number, ocfg, cfg.clock());
            for (TxId id : built.dropped)
                record(id, TxStatus::Aborted, AbortReason::Expired, cfg.clock());
            pending.erase(pending.begin(),
                          pending.begin() + static_cast<std::ptrdiff_t>(built.consumed));

            BlockCommitResult res = commit_block(world, built.block, ccfg);
            ++block_number;
            ++report.blocks;
            for (const CommitOutcome& o : res.outcomes)
                record(o.tx_id, o.status, o.reason, o.commit_time);
            report.workers_used = std::max(report.workers_used, res.workers_used);
            report.max_level_depth = std::max(report.max_level_depth, res.schedule.levels.size());
            for (const auto& members : res.schedule.levels)
                report.widest_level = std::max(report.widest_level, members.size());
        } catch (const EmptyBlockError& e) {
            for (TxId id : e.dropped())
                record(id, TxStatus::Aborted, AbortReason::Expired, cfg.clock());
            pending.clear();
        }
    }

    const TimeMs finish = cfg.clock();
    report.duration_ms = finish - start;

    std::sort(report.records.begin(), report.records.end(),
              [](const TxRecord& a, const TxRecord& b) { return a.tx_id < b.tx_id; });

    double sum_all = 0, sum_committed = 0, sum_aborted = 0;
    for (const TxRecord& r : report.records) {
        const double latency = r.finish_time - r.submit_time;
        sum_all += latency;
        if (r.status == TxStatus::Committed) {
            ++report.committed;
            sum_committed += latency;
        } else {
            ++report.aborted;
            ++report.abort_reasons[r.reason];
            sum_aborted += latency;
        }
    }
    const double seconds = report.duration_ms / 1000.0;
    if (seconds > 0) {
        report.throughput_tps = static_cast<double>(report.records.size()) / seconds;
        report.committed_tps = static_cast<double>(report.committed) / seconds;
    }
    if (!report.records.empty())
        report.art_all_ms = sum_all / static_cast<double>(report.records.size());
    if (report.committed > 0)
        report.art_committed_ms = sum_committed / static_cast<double>(report.committed);
    if (report.aborted > 0)
        report.art_aborted_ms = sum_aborted / static_cast<double>(report.aborted);

    report.final_state = std::move(world);
    return report;
}

inline MetricsReport run(const RunConfig& cfg) {
    validate_run_config(cfg);
    return run_with_workload(cfg, generate(cfg.workload));
}

inline constexpr const char* kCsvHeader =
    "experiment,contract,strategy,tx_count,dep_ratio,block_size,seed,throughput_tps,"
    "committed_tps,art_all_ms,art_committed_ms,art_aborted_ms,committed,aborted";

inline std::string csv_row(const std::string& experiment, const RunConfig& cfg,
                           const MetricsReport& report) {
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%g", cfg.workload.dependency_ratio);
    char metrics[160];
    std::snprintf(metrics, sizeof metrics, "%.3f,%.3f,%.3f,%.3f,%.3f", report.throughput_tps,
                  report.committed_tps, report.art_all_ms, report.art_committed_ms,
                  report.art_aborted_ms);
    std::ostringstream out;
    out << experiment << ',' << contract_name(cfg.workload.contract) << ','
        << cfg.strategy.name() << ',' << cfg.workload.tx_count << ',' << ratio << ','
        << cfg.block_size << ',' << cfg.workload.seed << ',' << metrics << ','
        << report.committed << ',' << report.aborted;
    return out.str();
}

inline std::vector<CommitStrategy> sweep_strategies() {
    return {CommitStrategy::sequential_mvcc(), CommitStrategy::dag_dynamic(),
            CommitStrategy::dag_fixed(2), CommitStrategy::dag_fixed(4)};
}

namespace detail {

inline std::string sweep_over_tx_counts(const char* label, RunConfig base) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (std::size_t txs : {1000u, 2000u, 3000u, 4000u, 5000u}) {
        for (const CommitStrategy& strategy : sweep_strategies()) {
            RunConfig cfg = base;
            cfg.workload.tx_count = txs;
            cfg.strategy = strategy;
            out << csv_row(label, cfg, run(cfg)) << '\n';
        }
    }
    return out.str();
}

}  // namespace detail

// Experiment 1: throughput as transaction count grows (1000..5000).
inline std::string sweep_experiment1(const RunConfig& base) {
    return detail::sweep_over_tx_counts("exp1", base);
}

// Experiment 2: response-time latencies over the same grid.
inline std::string sweep_experiment2(const RunConfig& base) {
    return detail::sweep_over_tx_counts("exp2", base);
}

// Experiment 3: latency as the dependency ratio sweeps 0.0..0.9 at a fixed
// transaction count.
inline std::string sweep_experiment3(const RunConfig& base) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (int tenths = 0; tenths <= 9; ++tenths) {
        for (const CommitStrategy& strategy : sweep_strategies()) {
            RunConfig cfg = base;
            cfg.workload.dependency_ratio = tenths / 10.0;
            cfg.strategy = strategy;
            out << csv_row("exp3", cfg, run(cfg)) << '\n';
        }
    }
    return out.str();
}

// Outcome log: statuses and reasons only, no timings, so identical seeds
// yield identical bytes.
inline std::string render_outcome_log(const MetricsReport& report) {
    std::ostringstream out;
    for (const TxRecord& r : report.records)
        out << r.tx_id << '\t' << status_name(r.status) << '\t' << reason_name(r.reason) << '\n';
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::optional<CommitStrategy> parse_strategy(const std::string& name) {
    if (name == "original") return CommitStrategy::sequential_mvcc();
    if (name == "dag-dynamic") return CommitStrategy::dag_dynamic();
    const std::string prefix = "dag-fixed:";
    if (name.rfind(prefix, 0) == 0) {
        const std::string digits = name.substr(prefix.size());
        if (digits.empty() ||
            digits.find_first_not_of("0123456789") != std::string::npos)
            return std::nullopt;
        try {
            const unsigned long k = std::stoul(digits);
            if (k == 0 || k > 4096) return std::nullopt;
            return CommitStrategy::dag_fixed(static_cast<unsigned>(k));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + value);
}

}  // namespace detail

// Flat `key = value` config text. '#' starts a comment, blank lines skipped.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        entries[key] = value;
    }
    return entries;
}

// Applies one config-file entry. Keys mirror the CLI flag names.
inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "txs") {
            cfg.workload.tx_count = std::stoull(value);
        } else if (key == "dep-ratio") {
            cfg.workload.dependency_ratio = std::stod(value);
        } else if (key == "strategy") {
            auto strategy = parse_strategy(value);
            if (!strategy) throw ConfigError("unknown strategy: " + value);
            cfg.strategy = *strategy;
        } else if (key == "contract") {
            auto kind = parse_contract(value);
            if (!kind) throw ConfigError("unknown contract: " + value);
            cfg.workload.contract = *kind;
        } else if (key == "seed") {
            cfg.workload.seed = std::stoull(value);
        } else if (key == "block-size") {
            cfg.block_size = std::stoull(value);
        } else if (key == "ttl-ms") {
            cfg.endorsement_ttl_ms = std::stod(value);
        } else if (key == "prioritize") {
            cfg.prioritize_independent = detail::parse_bool(value, key);
        } else if (key == "validation-cost-us") {
            cfg.validation_cost_ms = std::stod(value) / 1000.0;
        } else if (key == "workers") {
            cfg.max_workers = static_cast<unsigned>(std::stoul(value));
        } else if (key == "amount") {
            cfg.workload.amount = std::stoll(value);
        } else if (key == "fund-multiple") {
            cfg.workload.fund_multiple = std::stoll(value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": " + value);
    }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
    for (const auto& [key, value] : parse_config_text(read_text_file(path)))
        apply_config_entry(cfg, key, value);
}

}  // namespace dagsim
