#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dagsim/clock.hpp"

namespace dagsim {

using TxId = std::uint64_t;

// Per-key version counter: 1 on creation, +1 per committed write.
using Version = std::uint64_t;

enum class ContractKind { Voting, AssetTransfer, Wallet };

inline const char* contract_name(ContractKind c) {
    switch (c) {
        case ContractKind::Voting: return "voting";
        case ContractKind::AssetTransfer: return "asset";
        case ContractKind::Wallet: return "wallet";
    }
    return "?";
}

inline std::optional<ContractKind> parse_contract(const std::string& s) {
    if (s == "voting") return ContractKind::Voting;
    if (s == "asset") return ContractKind::AssetTransfer;
    if (s == "wallet") return ContractKind::Wallet;
    return std::nullopt;
}

// World-state key, namespaced by contract so keys from different contracts
// never collide.
struct StateKey {
    std::string ns;
    std::string name;

    friend auto operator<=>(const StateKey&, const StateKey&) = default;
    friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct VersionedValue {
    std::string value;
    Version version = 0;

    friend bool operator==(const VersionedValue&, const VersionedValue&) = default;
};

// Versioned key-value store. An ordered map keeps iteration canonical, so two
// states produced on different schedules compare field-for-field.
struct WorldState {
    std::map<StateKey, VersionedValue> entries;

    std::optional<VersionedValue> get(const StateKey& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const StateKey& key) const { return entries.count(key) != 0; }

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

// Read observation from a snapshot. nullopt version = key was absent, which
// is recorded explicitly so commit-time validation can catch create/create
// races.
struct ReadEntry {
    StateKey key;
    std::optional<Version> version;

    friend bool operator==(const ReadEntry&, const ReadEntry&) = default;
};

// Pending write. nullopt value = delete marker.
struct WriteEntry {
    StateKey key;
    std::optional<std::string> value;

    friend bool operator==(const WriteEntry&, const WriteEntry&) = default;
};

struct ReadWriteSet {
    std::vector<ReadEntry> reads;    // no duplicate keys
    std::vector<WriteEntry> writes;  // no duplicate keys

    // Conflict footprint: reads ∪ writes, sorted and distinct.
    std::vector<StateKey> footprint() const {
        std::vector<StateKey> keys;
        keys.reserve(reads.size() + writes.size());
        for (const auto& r : reads) keys.push_back(r.key);
        for (const auto& w : writes) keys.push_back(w.key);
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        return keys;
    }

    friend bool operator==(const ReadWriteSet&, const ReadWriteSet&) = default;
};

struct ContractCall {
    ContractKind contract = ContractKind::Voting;
    std::string function;
    std::vector<std::string> args;

    friend bool operator==(const ContractCall&, const ContractCall&) = default;
};

struct TransactionProposal {
    TxId tx_id = 0;  // unique and monotone within a run
    ContractCall call;
    TimeMs submit_time = 0;
};

// Dependency link recorded at endorsement: this transaction conflicts on
// `key` with the earlier transaction `parent`.
struct ParentLink {
    StateKey key;
    TxId parent = 0;

    friend bool operator==(const ParentLink&, const ParentLink&) = default;
};

struct EndorsedTransaction {
    TransactionProposal proposal;
    ReadWriteSet rwset;
    int flag = 0;  // 0 = independent, 1 = dependent (flag == 1 iff parents nonempty)
    std::vector<ParentLink> parents;
    std::uint64_t endorse_seq = 0;  // position in the endorsement stream
    TimeMs endorse_time = 0;
    TimeMs expiry_deadline = 0;  // endorse_time + ttl; live while now <= deadline

    TxId id() const { return proposal.tx_id; }
};

// Per-transaction dependency metadata embedded in the block, copied verbatim
// from the endorsement. The committer reads only this, never recomputing.
struct TxMetadata {
    int flag = 0;
    std::vector<ParentLink> parents;

    friend bool operator==(const TxMetadata&, const TxMetadata&) = default;
};

struct Block {
    std::uint64_t block_number = 0;
    std::vector<EndorsedTransaction> txs;
    std::vector<TxMetadata> metadata;  // one entry per tx, same order
};

enum class TxStatus { Committed, Aborted };

enum class AbortReason { None, VersionMismatch, ChaincodeRejected, Expired, SimulationFailed };

inline const char* status_name(TxStatus s) {
    return s == TxStatus::Committed ? "committed" : "aborted";
}

inline const char* reason_name(AbortReason r) {
    switch (r) {
        case AbortReason::None: return "none";
        case AbortReason::VersionMismatch: return "version-mismatch";
        case AbortReason::ChaincodeRejected: return "chaincode-rejected";
        case AbortReason::Expired: return "expired";
        case AbortReason::SimulationFailed: return "simulation-failed";
    }
    return "?";
}

struct CommitOutcome {
    TxId tx_id = 0;
    TxStatus status = TxStatus::Aborted;
    AbortReason reason = AbortReason::None;  // None iff Committed
    TimeMs commit_time = 0;

    static CommitOutcome committed(TxId id, TimeMs at) {
        return {id, TxStatus::Committed, AbortReason::None, at};
    }
    static CommitOutcome aborted(TxId id, AbortReason why, TimeMs at) {
        assert(why != AbortReason::None);
        return {id, TxStatus::Aborted, why, at};
    }
};

// Applies a write set in place: created keys get version 1, overwritten keys
// get version + 1, delete markers erase. `writes` must not repeat keys.
inline void apply_writeset_inplace(WorldState& world, const std::vector<WriteEntry>& writes) {
    for (const auto& w : writes) {
        if (!w.value) {
            world.entries.erase(w.key);
            continue;
        }
        auto it = world.entries.find(w.key);
        if (it == world.entries.end()) {
            world.entries.emplace(w.key, VersionedValue{*w.value, 1});
        } else {
            it->second.value = *w.value;
            it->second.version += 1;
        }
    }
}

inline WorldState apply_writeset(WorldState world, const std::vector<WriteEntry>& writes) {
    apply_writeset_inplace(world, writes);
    return world;
}

// True iff every read observation still matches the current state: same
// version for present keys, and still-absent for absent reads.
inline bool mvcc_validate(const WorldState& world, const std::vector<ReadEntry>& reads) {
    for (const auto& r : reads) {
        auto cur = world.get(r.key);
        if (r.version.has_value() != cur.has_value()) return false;
        if (cur && *r.version != cur->version) return false;
    }
    return true;
}

}  // namespace dagsim
