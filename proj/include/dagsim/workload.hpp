#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/model.hpp"

namespace dagsim {

struct WorkloadConfig {
    std::size_t tx_count = 1000;
    double dependency_ratio = 0.5;
    ContractKind contract = ContractKind::AssetTransfer;
    std::uint64_t seed = 42;
    std::int64_t amount = 100;       // per-operation amount
    std::int64_t fund_multiple = 3;  // setup balance = amount * fund_multiple
};

struct GeneratedWorkload {
    std::vector<ContractCall> setup;
    std::vector<TransactionProposal> proposals;
    std::vector<std::size_t> dependent_positions;  // sorted, never contains 0
};

class ReplayFormatError : public std::runtime_error {
  public:
    explicit ReplayFormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// rng() % n is biased for huge n but byte-stable across platforms, unlike
// std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

inline std::string funding_value(const WorkloadConfig& cfg) {
    return std::to_string(cfg.amount * cfg.fund_multiple);
}

}  // namespace detail

// Setup calls that create every entity the proposals touch, one call per
// entity in order of first appearance. Proposals that themselves create an
// entity (CreateAsset, Open, RegisterVoter) claim the name without setup.
inline std::vector<ContractCall> derive_setup(const std::vector<TransactionProposal>& proposals,
                                              std::int64_t amount, std::int64_t fund_multiple) {
    const std::string funding = std::to_string(amount * fund_multiple);
    std::set<std::pair<ContractKind, std::string>> seen;
    std::vector<ContractCall> setup;

    auto claim = [&](ContractKind kind, const std::string& id) {
        return seen.emplace(kind, id).second;
    };
    auto fund = [&](ContractKind kind, const std::string& id) {
        if (!claim(kind, id)) return;
        switch (kind) {
            case ContractKind::AssetTransfer:
                setup.push_back({kind, "CreateAsset", {id, funding}});
                break;
            case ContractKind::Wallet:
                setup.push_back({kind, "Open", {id, funding}});
                break;
            case ContractKind::Voting:
                setup.push_back({kind, "RegisterVoter", {id}});
                break;
        }
    };

    for (const auto& p : proposals) {
        const auto& call = p.call;
        if (call.args.empty()) continue;
        const std::string& first = call.args[0];
        switch (call.contract) {
            case ContractKind::AssetTransfer:
                if (call.function == "CreateAsset")
                    claim(call.contract, first);
                else
                    fund(call.contract, first);
                break;
            case ContractKind::Wallet:
                if (call.function == "Open") {
                    claim(call.contract, first);
                } else {
                    fund(call.contract, first);
                    if (call.function == "Transfer" && call.args.size() >= 2)
                        fund(call.contract, call.args[1]);
                }
                break;
            case ContractKind::Voting:
                if (call.function == "RegisterVoter")
                    claim(call.contract, first);
                else
                    fund(call.contract, first);
                break;
        }
    }
    return setup;
}

// Seeded synthetic batch. Exactly round(ratio * n) proposals re-target an
// entity some earlier proposal used (drawn uniformly from the distinct
// earlier targets); the rest touch fresh entities. Position 0 is always
// fresh, so every dependent draw has a candidate.
inline GeneratedWorkload generate(const WorkloadConfig& cfg) {
    if (cfg.tx_count == 0) throw std::invalid_argument("tx_count must be positive");
    if (cfg.dependency_ratio < 0.0 || cfg.dependency_ratio > 1.0)
        throw std::invalid_argument("dependency_ratio must be within [0, 1]");
    if (cfg.amount <= 0 || cfg.fund_multiple <= 0)
        throw std::invalid_argument("amount and fund_multiple must be positive");

    const std::size_t n = cfg.tx_count;
    std::size_t dependents =
        static_cast<std::size_t>(std::llround(cfg.dependency_ratio * static_cast<double>(n)));
    if (dependents > n - 1) dependents = n - 1;

    std::mt19937_64 rng(cfg.seed);

    // Partial Fisher-Yates over positions 1..n-1 picks the dependent slots.
    std::vector<std::size_t> slots(n - 1);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i + 1;
    for (std::size_t j = 0; j < dependents; ++j) {
        const std::size_t pick =
            j + static_cast<std::size_t>(detail::uniform_below(rng, slots.size() - j));
        std::swap(slots[j], slots[pick]);
    }
    std::vector<bool> dependent(n, false);
    GeneratedWorkload out;
    for (std::size_t j = 0; j < dependents; ++j) dependent[slots[j]] = true;
    for (std::size_t i = 1; i < n; ++i)
        if (dependent[i]) out.dependent_positions.push_back(i);

    auto entity_name = [&](std::size_t k) {
        switch (cfg.contract) {
            case ContractKind::AssetTransfer: return "a" + std::to_string(k);
            case ContractKind::Wallet: return "w" + std::to_string(k);
            case ContractKind::Voting: return "v" + std::to_string(k);
        }
        return std::string();
    };
    const std::string amount_arg = std::to_string(cfg.amount);

    std::size_t fresh = 0;
    out.proposals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t target;
        if (dependent[i]) {
            target = static_cast<std::size_t>(detail::uniform_below(rng, fresh));
        } else {
            target = fresh++;
        }

        ContractCall call;
        call.contract = cfg.contract;
        switch (cfg.contract) {
            case ContractKind::AssetTransfer:
                call.function = "Deduct";
                call.args = {entity_name(target), amount_arg};
                break;
            case ContractKind::Wallet:
                call.function = dependent[i] && detail::uniform_below(rng, 2) == 0 ? "Deposit"
                                                                                   : "Withdraw";
                call.args = {entity_name(target), amount_arg};
                break;
            case ContractKind::Voting:
                call.function = "CastVote";
                call.args = {entity_name(target), "c" + std::to_string(target)};
                break;
        }

        TransactionProposal p;
        p.tx_id = static_cast<TxId>(i + 1);
        p.call = std::move(call);
        p.submit_time = 0;
        out.proposals.push_back(std::move(p));
    }

    out.setup = derive_setup(out.proposals, cfg.amount, cfg.fund_multiple);
    return out;
}

// Replay file: '#' comment lines carry the generating config, then one
// proposal per line with tab-separated fields (tx_id, contract, function,
// args...).
inline std::string render_replay(const WorkloadConfig& cfg,
                                 const std::vector<TransactionProposal>& proposals) {
    std::ostringstream out;
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%g", cfg.dependency_ratio);
    out << "# dagsim replay v1\n";
    out << "# contract=" << contract_name(cfg.contract) << " tx_count=" << cfg.tx_count
        << " dep_ratio=" << ratio << " seed=" << cfg.seed << " amount=" << cfg.amount
        << " fund_multiple=" << cfg.fund_multiple << "\n";
    for (const auto& p : proposals) {
        out << p.tx_id << '\t' << contract_name(p.call.contract) << '\t' << p.call.function;
        for (const auto& arg : p.call.args) out << '\t' << arg;
        out << '\n';
    }
    return out.str();
}

inline void write_replay_file(const std::string& path, const WorkloadConfig& cfg,
                              const std::vector<TransactionProposal>& proposals) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open replay file for writing: " + path);
    out << render_replay(cfg, proposals);
}

struct ReplayData {
    WorkloadConfig config;
    GeneratedWorkload workload;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

inline void apply_header_field(WorkloadConfig& cfg, const std::string& key,
                               const std::string& value, std::size_t line_no) {
    try {
        if (key == "contract") {
            auto kind = parse_contract(value);
            if (!kind) throw ReplayFormatError("unknown contract: " + value);
            cfg.contract = *kind;
        } else if (key == "tx_count") {
            cfg.tx_count = std::stoull(value);
        } else if (key == "dep_ratio") {
            cfg.dependency_ratio = std::stod(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "amount") {
            cfg.amount = std::stoll(value);
        } else if (key == "fund_multiple") {
            cfg.fund_multiple = std::stoll(value);
        }  // unknown header keys are ignored for forward compatibility
    } catch (const ReplayFormatError&) {
        throw;
    } catch (const std::exception&) {
        throw ReplayFormatError("bad header value at line " + std::to_string(line_no) + ": " +
                                key + "=" + value);
    }
}

}  // namespace detail

inline ReplayData parse_replay(std::istream& in) {
    ReplayData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream header(line.substr(1));
            std::string token;
            while (header >> token) {
                const std::size_t eq = token.find('=');
                if (eq == std::string::npos) continue;
                detail::apply_header_field(data.config, token.substr(0, eq),
                                           token.substr(eq + 1), line_no);
            }
            continue;
        }
        const auto fields = detail::split_tabs(line);
        if (fields.size() < 3)
            throw ReplayFormatError("line " + std::to_string(line_no) +
                                    ": expected tx_id, contract, function");
        TransactionProposal p;
        try {
            p.tx_id = std::stoull(fields[0]);
        } catch (const std::exception&) {
            throw ReplayFormatError("line " + std::to_string(line_no) + ": bad tx_id " +
                                    fields[0]);
        }
        auto kind = parse_contract(fields[1]);
        if (!kind)
            throw ReplayFormatError("line " + std::to_string(line_no) + ": unknown contract " +
                                    fields[1]);
        p.call.contract = *kind;
        p.call.function = fields[2];
        p.call.args.assign(fields.begin() + 3, fields.end());
        p.submit_time = 0;
        data.workload.proposals.push_back(std::move(p));
    }
    if (data.workload.proposals.empty()) throw ReplayFormatError("replay holds no proposals");
    data.workload.setup =
        derive_setup(data.workload.proposals, data.config.amount, data.config.fund_multiple);
    return data;
}

inline ReplayData load_replay_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open replay file: " + path);
    return parse_replay(in);
}

}  // namespace dagsim
