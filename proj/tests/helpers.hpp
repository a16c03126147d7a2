#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/dagsim.hpp"

namespace testutil {

using namespace dagsim;

inline StateKey asset_key(const std::string& id) { return {"asset", "asset/" + id}; }
inline StateKey wallet_key(const std::string& id) { return {"wallet", "wallet/" + id}; }

inline WorldState asset_world(std::initializer_list<std::pair<std::string, std::int64_t>> assets) {
    WorldState world;
    for (const auto& [id, balance] : assets)
        world.entries[asset_key(id)] = {std::to_string(balance), 1};
    return world;
}

inline TransactionProposal deduct(TxId id, const std::string& asset, std::int64_t amount,
                                  TimeMs submit = 0) {
    return {id, {ContractKind::AssetTransfer, "Deduct", {asset, std::to_string(amount)}}, submit};
}

inline std::vector<EndorsedTransaction> endorse_all(Endorser& endorser, const WorldState& world,
                                                    const std::vector<TransactionProposal>& ps) {
    std::vector<EndorsedTransaction> out;
    for (const auto& p : ps) {
        EndorseResult r = endorser.endorse(p, world);
        if (!r.accepted()) throw std::runtime_error("endorsement rejected: " + r.reject_reason);
        out.push_back(std::move(*r.tx));
    }
    return out;
}

// Synthetic endorsed tx for structural orderer/committer tests; the rwset
// writes the given keys, the call body is never executed.
inline EndorsedTransaction synthetic_tx(TxId id, std::uint64_t seq,
                                        const std::vector<StateKey>& keys, int flag,
                                        std::vector<ParentLink> parents,
                                        TimeMs deadline = 1e12) {
    EndorsedTransaction tx;
    tx.proposal = {id, {ContractKind::AssetTransfer, "ReadAsset", {"x"}}, 0};
    for (const auto& k : keys) tx.rwset.writes.push_back({k, std::string("v")});
    tx.flag = flag;
    tx.parents = std::move(parents);
    tx.endorse_seq = seq;
    tx.endorse_time = static_cast<TimeMs>(seq);
    tx.expiry_deadline = deadline;
    return tx;
}

inline Block block_of(std::vector<EndorsedTransaction> txs, std::uint64_t number = 0) {
    Block b;
    b.block_number = number;
    b.txs = std::move(txs);
    for (const auto& tx : b.txs) b.metadata.push_back({tx.flag, tx.parents});
    return b;
}

// Brute-force flagging oracle: keeps the full endorsement history and, for
// each new footprint, scans backwards for the latest live toucher per key.
class FlagOracle {
  public:
    struct Expectation {
        int flag = 0;
        std::vector<ParentLink> parents;
    };

    Expectation expect(const std::vector<StateKey>& footprint, TimeMs now) const {
        Expectation e;
        for (const StateKey& key : footprint) {
            for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
                if (it->deadline < now) continue;
                if (std::find(it->footprint.begin(), it->footprint.end(), key) ==
                    it->footprint.end())
                    continue;
                e.parents.push_back({key, it->id});
                break;
            }
        }
        e.flag = e.parents.empty() ? 0 : 1;
        return e;
    }

    void note(const EndorsedTransaction& tx) {
        history_.push_back({tx.id(), tx.rwset.footprint(), tx.expiry_deadline});
    }

  private:
    struct Entry {
        TxId id;
        std::vector<StateKey> footprint;
        TimeMs deadline;
    };
    std::vector<Entry> history_;
};

struct ReplayOutcome {
    TxStatus status = TxStatus::Aborted;
    AbortReason reason = AbortReason::None;
};

// Single-worker oracle: walk the block in order, re-simulating each live tx
// against the evolving world.
inline std::pair<WorldState, std::vector<ReplayOutcome>> block_order_replay(WorldState world,
                                                                            const Block& block,
                                                                            TimeMs now) {
    std::vector<ReplayOutcome> outcomes;
    for (const auto& tx : block.txs) {
        if (tx.expiry_deadline < now) {
            outcomes.push_back({TxStatus::Aborted, AbortReason::Expired});
            continue;
        }
        SimulationResult sim = simulate(tx.proposal.call, world);
        if (sim.ok) {
            apply_writeset_inplace(world, sim.rwset.writes);
            outcomes.push_back({TxStatus::Committed, AbortReason::None});
        } else {
            outcomes.push_back({TxStatus::Aborted, AbortReason::ChaincodeRejected});
        }
    }
    return {std::move(world), std::move(outcomes)};
}

// End-to-end pipeline up to a single ordered block, endorsed at time 0 with
// a far-off TTL.
struct PipelineBlock {
    WorldState setup_world;
    Block block;
};

inline PipelineBlock pipeline_block(const WorkloadConfig& wcfg, bool prioritize = true) {
    GeneratedWorkload workload = generate(wcfg);
    WorldState world;
    for (const auto& call : workload.setup) {
        SimulationResult sim = simulate(call, world);
        if (!sim.ok) throw std::runtime_error("setup failed: " + sim.reason);
        apply_writeset_inplace(world, sim.rwset.writes);
    }
    ManualClock clock;
    Endorser endorser({1e12, clock.clock()});
    auto endorsed = endorse_all(endorser, world, workload.proposals);
    auto built = build_block(endorsed, 0, {endorsed.size(), prioritize}, clock.now);
    return {std::move(world), std::move(built.block)};
}

inline std::vector<std::pair<TxStatus, AbortReason>> outcome_pairs(
    const std::vector<CommitOutcome>& outcomes) {
    std::vector<std::pair<TxStatus, AbortReason>> v;
    v.reserve(outcomes.size());
    for (const auto& o : outcomes) v.emplace_back(o.status, o.reason);
    return v;
}

inline double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace testutil
