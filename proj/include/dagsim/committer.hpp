#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dagsim/contracts.hpp"
#include "dagsim/model.hpp"

namespace dagsim {

struct CommitStrategy {
    enum class Kind { SequentialMvcc, DagParallel };
    enum class DegreeMode { Dynamic, Fixed };

    Kind kind = Kind::SequentialMvcc;
    DegreeMode degree_mode = DegreeMode::Dynamic;
    unsigned fixed_degree = 0;

    static CommitStrategy sequential_mvcc() { return {Kind::SequentialMvcc, DegreeMode::Dynamic, 0}; }
    static CommitStrategy dag_dynamic() { return {Kind::DagParallel, DegreeMode::Dynamic, 0}; }
    static CommitStrategy dag_fixed(unsigned degree) {
        if (degree == 0) throw std::invalid_argument("fixed degree must be positive");
        return {Kind::DagParallel, DegreeMode::Fixed, degree};
    }

    std::string name() const {
        if (kind == Kind::SequentialMvcc) return "original";
        if (degree_mode == DegreeMode::Dynamic) return "dag-dynamic";
        return "dag-fixed:" + std::to_string(fixed_degree);
    }

    bool operator==(const CommitStrategy&) const = default;
};

class MalformedMetadataError : public std::runtime_error {
  public:
    explicit MalformedMetadataError(const std::string& what) : std::runtime_error(what) {}
};

class CycleDetectedError : public std::runtime_error {
  public:
    CycleDetectedError() : std::runtime_error("dependency metadata forms a cycle") {}
};

// Worker pool size: DAGSIM_CORES overrides detection, otherwise whatever the
// runtime reports, floored at 1.
inline unsigned available_cores() {
    if (const char* env = std::getenv("DAGSIM_CORES")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != nullptr && *end == '\0' && v >= 1 && v <= 4096) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Intra-block dependency graph. Nodes are block positions; edges come from
// parent links whose parent landed in the same block.
struct DependencyDag {
    std::vector<std::vector<std::size_t>> parents;
    std::vector<std::vector<std::size_t>> children;

    std::size_t size() const { return parents.size(); }
};

struct DagSchedule {
    // levels[k] holds block positions runnable once levels 0..k-1 finished,
    // each level sorted in block order.
    std::vector<std::vector<std::size_t>> levels;
};

inline DependencyDag build_dag(const Block& block) {
    const std::size_t n = block.txs.size();
    if (block.metadata.size() != n)
        throw MalformedMetadataError("metadata count does not match transaction count");

    std::map<TxId, std::size_t> position;
    for (std::size_t i = 0; i < n; ++i) {
        if (!position.emplace(block.txs[i].id(), i).second)
            throw MalformedMetadataError("duplicate transaction id in block");
    }

    DependencyDag dag;
    dag.parents.resize(n);
    dag.children.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TxMetadata& meta = block.metadata[i];
        if (meta.flag != 0 && meta.flag != 1)
            throw MalformedMetadataError("dependency flag must be 0 or 1");
        if (meta.flag == 0 && !meta.parents.empty())
            throw MalformedMetadataError("flag=0 transaction lists parents");
        if (meta.flag == 1 && meta.parents.empty())
            throw MalformedMetadataError("flag=1 transaction lists no parents");
        for (const ParentLink& link : meta.parents) {
            if (link.parent == block.txs[i].id())
                throw MalformedMetadataError("transaction depends on itself");
            auto it = position.find(link.parent);
            if (it == position.end()) continue;  // parent settled in an earlier block
            const std::size_t p = it->second;
            if (block.txs[p].endorse_seq >= block.txs[i].endorse_seq)
                throw MalformedMetadataError("parent endorsed after dependent");
            dag.parents[i].push_back(p);
        }
        auto& ps = dag.parents[i];
        std::sort(ps.begin(), ps.end());
        ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
        for (std::size_t p : ps) dag.children[p].push_back(i);
    }
    return dag;
}

// Longest-path levelling over the whole DAG or, with a mask, over the
// subgraph induced by the included nodes.
inline DagSchedule levelize(const DependencyDag& dag, const std::vector<bool>& include) {
    const std::size_t n = dag.size();
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p : dag.parents[i])
            if (include[i] && include[p]) ++indegree[i];

    std::vector<std::size_t> level(n, 0);
    std::queue<std::size_t> ready;
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!include[i]) continue;
        ++total;
        if (indegree[i] == 0) ready.push(i);
    }

    std::size_t processed = 0;
    std::size_t max_level = 0;
    while (!ready.empty()) {
        const std::size_t i = ready.front();
        ready.pop();
        ++processed;
        max_level = std::max(max_level, level[i]);
        for (std::size_t c : dag.children[i]) {
            if (!include[c]) continue;
            level[c] = std::max(level[c], level[i] + 1);
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (processed != total) throw CycleDetectedError();

    DagSchedule schedule;
    if (total == 0) return schedule;
    schedule.levels.resize(max_level + 1);
    for (std::size_t i = 0; i < n; ++i)
        if (include[i]) schedule.levels[level[i]].push_back(i);
    for (auto& members : schedule.levels) std::sort(members.begin(), members.end());
    return schedule;
}

inline DagSchedule levelize(const DependencyDag& dag) {
    return levelize(dag, std::vector<bool>(dag.size(), true));
}

// Partition one level into groups whose state footprints are pairwise
// disjoint. Groups can run concurrently; members inside a group keep block
// order. Groups come out ordered by their earliest member.
inline std::vector<std::vector<std::size_t>> conflict_groups(const Block& block,
                                                             const std::vector<std::size_t>& members) {
    std::vector<std::size_t> root(members.size());
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](std::size_t x) {
        while (root[x] != x) {
            root[x] = root[root[x]];
            x = root[x];
        }
        return x;
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) root[std::max(a, b)] = std::min(a, b);
    };

    std::map<StateKey, std::size_t> owner;  // key -> member slot that saw it first
    for (std::size_t m = 0; m < members.size(); ++m) {
        for (const StateKey& key : block.txs[members[m]].rwset.footprint()) {
            auto [it, inserted] = owner.emplace(key, m);
            if (!inserted) unite(it->second, m);
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> grouped;
    for (std::size_t m = 0; m < members.size(); ++m) grouped[find(m)].push_back(members[m]);
    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(grouped.size());
    for (auto& [rep, idxs] : grouped) groups.push_back(std::move(idxs));
    return groups;
}

struct CommitterConfig {
    CommitStrategy strategy = CommitStrategy::sequential_mvcc();
    Clock clock = wall_clock();
    // Per-transaction commit-time validation latency, charged identically to
    // every live transaction under every strategy.
    TimeMs validation_cost_ms = 0.1;
    unsigned max_workers = 0;  // 0 = available_cores()
};

struct LevelSpan {
    TimeMs start = 0;
    TimeMs end = 0;
};

struct BlockCommitResult {
    std::vector<CommitOutcome> outcomes;  // block order
    DagSchedule schedule;                 // live transactions only; empty for sequential
    std::vector<LevelSpan> level_spans;
    unsigned workers_used = 0;  // peak concurrent workers across levels
};

namespace detail {

inline void charge_validation_cost(TimeMs cost_ms) {
    if (cost_ms > 0)
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(cost_ms));
}

}  // namespace detail

// Settle one block against the world state. The sequential strategy mirrors
// classic optimistic validation: endorsement-time read sets are version
// checked and endorsement-time write sets applied verbatim. The DAG strategy
// levelizes the embedded metadata, runs footprint-disjoint groups of each
// level concurrently, and re-simulates every transaction against the current
// state instead of version checking.
inline BlockCommitResult commit_block(WorldState& world, const Block& block,
                                      const CommitterConfig& cfg) {
    const std::size_t n = block.txs.size();
    BlockCommitResult result;
    result.outcomes.resize(n);

    const TimeMs start = cfg.clock();
    std::vector<bool> live(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tx = block.txs[i];
        if (tx.expiry_deadline < start)
            result.outcomes[i] = CommitOutcome::aborted(tx.id(), AbortReason::Expired, start);
        else
            live[i] = true;
    }

    if (cfg.strategy.kind == CommitStrategy::Kind::SequentialMvcc) {
        result.workers_used = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (!live[i]) continue;
            const auto& tx = block.txs[i];
            detail::charge_validation_cost(cfg.validation_cost_ms);
            if (mvcc_validate(world, tx.rwset.reads)) {
                apply_writeset_inplace(world, tx.rwset.writes);
                result.outcomes[i] = CommitOutcome::committed(tx.id(), cfg.clock());
            } else {
                result.outcomes[i] =
                    CommitOutcome::aborted(tx.id(), AbortReason::VersionMismatch, cfg.clock());
            }
        }
        return result;
    }

    const DependencyDag dag = build_dag(block);
    result.schedule = levelize(dag, live);

    const unsigned cores = cfg.max_workers != 0 ? cfg.max_workers : available_cores();
    const unsigned cap = cfg.strategy.degree_mode == CommitStrategy::DegreeMode::Fixed
                             ? cfg.strategy.fixed_degree
                             : cores;

    std::mutex world_mutex;
    auto settle_one = [&](std::size_t i) {
        const auto& tx = block.txs[i];
        detail::charge_validation_cost(cfg.validation_cost_ms);
        bool ok = false;
        {
            std::lock_guard<std::mutex> guard(world_mutex);
            SimulationResult sim = simulate(tx.proposal.call, world);
            ok = sim.ok;
            if (ok) apply_writeset_inplace(world, sim.rwset.writes);
        }
        result.outcomes[i] = ok ? CommitOutcome::committed(tx.id(), cfg.clock())
                                : CommitOutcome::aborted(tx.id(), AbortReason::ChaincodeRejected,
                                                         cfg.clock());
    };

    for (const auto& members : result.schedule.levels) {
        const auto groups = conflict_groups(block, members);
        const unsigned workers =
            static_cast<unsigned>(std::min<std::size_t>(std::max(1u, cap), groups.size()));
        result.workers_used = std::max(result.workers_used, workers);

        LevelSpan span;
        span.start = cfg.clock();
        if (workers <= 1) {
            for (const auto& group : groups)
                for (std::size_t i : group) settle_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    while (true) {
                        const std::size_t g = next.fetch_add(1);
                        if (g >= groups.size()) return;
                        for (std::size_t i : groups[g]) settle_one(i);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }
        span.end = cfg.clock();
        result.level_spans.push_back(span);
    }
    return result;
}

}  // namespace dagsim
