#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "dagsim/contracts.hpp"
#include "dagsim/model.hpp"

namespace dagsim {

// One entry per recently endorsed key: who touched it last and until when
// that endorsement is considered live. Live while now <= expiry_deadline.
struct ActiveKeyEntry {
    TxId last_tx_id = 0;
    TimeMs expiry_deadline = 0;
};

// The endorser's recent-key-usage table. Entries past their deadline are
// semantically absent: lookups skip them, purge_expired removes them.
class ActiveKeyTable {
  public:
    std::optional<ActiveKeyEntry> lookup(const StateKey& key, TimeMs now) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        if (it->second.expiry_deadline < now) return std::nullopt;
        return it->second;
    }

    void point_at(const StateKey& key, TxId tx, TimeMs deadline) {
        entries_[key] = {tx, deadline};
    }

    std::size_t purge_expired(TimeMs now) {
        std::size_t purged = 0;
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (it->second.expiry_deadline < now) {
                it = entries_.erase(it);
                ++purged;
            } else {
                ++it;
            }
        }
        return purged;
    }

    std::size_t size() const { return entries_.size(); }
    const std::map<StateKey, ActiveKeyEntry>& entries() const { return entries_; }

  private:
    std::map<StateKey, ActiveKeyEntry> entries_;
};

struct EndorserConfig {
    TimeMs endorsement_ttl_ms = 60000;
    Clock clock = wall_clock();
};

// Endorsement either produces a flagged transaction or a client-visible
// rejection when simulation fails.
struct EndorseResult {
    std::optional<EndorsedTransaction> tx;
    std::string reject_reason;

    bool accepted() const { return tx.has_value(); }
};

// The leader endorser: simulates each proposal against the latest committed
// snapshot, flags it dependent when any footprint key was recently endorsed,
// records parent links, and re-points the touched keys at itself.
//
// Proposals are processed strictly sequentially in submit order; this object
// is the single owner of the table and is not thread-safe.
class Endorser {
  public:
    explicit Endorser(EndorserConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.endorsement_ttl_ms <= 0)
            throw std::invalid_argument("endorsement ttl must be positive");
    }

    EndorseResult endorse(const TransactionProposal& proposal, const WorldState& world) {
        const TimeMs now = cfg_.clock();
        SimulationResult sim = simulate(proposal.call, world);
        if (!sim.ok) return {std::nullopt, sim.reason};

        EndorsedTransaction tx;
        tx.proposal = proposal;
        tx.rwset = std::move(sim.rwset);
        tx.endorse_seq = next_seq_++;
        tx.endorse_time = now;
        tx.expiry_deadline = now + cfg_.endorsement_ttl_ms;

        const auto footprint = tx.rwset.footprint();
        for (const auto& key : footprint) {
            if (auto hit = table_.lookup(key, now))
                tx.parents.push_back({key, hit->last_tx_id});
        }
        tx.flag = tx.parents.empty() ? 0 : 1;

        for (const auto& key : footprint)
            table_.point_at(key, proposal.tx_id, tx.expiry_deadline);

        return {std::move(tx), {}};
    }

    std::size_t purge_expired(TimeMs now) { return table_.purge_expired(now); }

    ActiveKeyTable& table() { return table_; }
    const ActiveKeyTable& table() const { return table_; }
    const EndorserConfig& config() const { return cfg_; }

  private:
    EndorserConfig cfg_;
    ActiveKeyTable table_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace dagsim
