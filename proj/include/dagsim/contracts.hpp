#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/model.hpp"

namespace dagsim {

// Result of simulating a contract call against an immutable snapshot.
struct SimulationResult {
    bool ok = false;
    ReadWriteSet rwset;  // meaningful when ok
    std::string reason;  // meaningful when !ok

    static SimulationResult success(ReadWriteSet rw) { return {true, std::move(rw), {}}; }
    static SimulationResult failure(std::string why) { return {false, {}, std::move(why)}; }
};

namespace detail {

// Tracks exactly which keys a contract consulted, so the read set reflects
// the real data dependencies of the call.
class SimContext {
  public:
    explicit SimContext(const WorldState& snapshot) : snapshot_(snapshot) {}

    std::optional<std::string> get(const StateKey& key) {
        auto cur = snapshot_.get(key);
        record_read(key, cur ? std::optional<Version>(cur->version) : std::nullopt);
        if (!cur) return std::nullopt;
        return cur->value;
    }

    void put(const StateKey& key, std::string value) {
        rwset_.writes.push_back({key, std::move(value)});
    }

    ReadWriteSet take() { return std::move(rwset_); }

  private:
    void record_read(const StateKey& key, std::optional<Version> v) {
        for (const auto& r : rwset_.reads)
            if (r.key == key) return;
        rwset_.reads.push_back({key, v});
    }

    const WorldState& snapshot_;
    ReadWriteSet rwset_;
};

// Amounts travel as decimal strings; only strictly positive values are legal.
inline std::optional<std::int64_t> parse_amount(const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (v <= 0) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_stored(const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline StateKey asset_key(const std::string& id) { return {"asset", "asset/" + id}; }
inline StateKey wallet_key(const std::string& id) { return {"wallet", "wallet/" + id}; }
inline StateKey voter_key(const std::string& vid) { return {"voting", "voted/" + vid}; }
inline StateKey tally_key(const std::string& cand) { return {"voting", "tally/" + cand}; }

inline SimulationResult simulate_asset(const ContractCall& call, SimContext& ctx) {
    const auto& f = call.function;
    const auto& a = call.args;
    if (f == "CreateAsset" && a.size() == 2) {
        auto value = parse_amount(a[1]);
        if (!value) return SimulationResult::failure("invalid amount");
        if (ctx.get(asset_key(a[0]))) return SimulationResult::failure("asset already exists");
        ctx.put(asset_key(a[0]), a[1]);
        return SimulationResult::success(ctx.take());
    }
    if (f == "ReadAsset" && a.size() == 1) {
        if (!ctx.get(asset_key(a[0]))) return SimulationResult::failure("missing asset");
        return SimulationResult::success(ctx.take());
    }
    if (f == "Deduct" && a.size() == 2) {
        auto amount = parse_amount(a[1]);
        if (!amount) return SimulationResult::failure("invalid amount");
        auto stored = ctx.get(asset_key(a[0]));
        if (!stored) return SimulationResult::failure("missing asset");
        auto balance = parse_stored(*stored);
        if (!balance) return SimulationResult::failure("corrupt balance");
        if (*balance < *amount) return SimulationResult::failure("insufficient balance");
        ctx.put(asset_key(a[0]), std::to_string(*balance - *amount));
        return SimulationResult::success(ctx.take());
    }
    return SimulationResult::failure("unknown function: " + f);
}

inline SimulationResult simulate_voting(const ContractCall& call, SimContext& ctx) {
    const auto& f = call.function;
    const auto& a = call.args;
    if (f == "RegisterVoter" && a.size() == 1) {
        if (ctx.get(voter_key(a[0]))) return SimulationResult::failure("voter already registered");
        ctx.put(voter_key(a[0]), "0");
        return SimulationResult::success(ctx.take());
    }
    if (f == "CastVote" && a.size() == 2) {
        auto mark = ctx.get(voter_key(a[0]));
        if (!mark) return SimulationResult::failure("unknown voter");
        if (*mark == "1") return SimulationResult::failure("already voted");
        auto tally = ctx.get(tally_key(a[1]));
        std::int64_t count = 0;
        if (tally) {
            auto parsed = parse_stored(*tally);
            if (!parsed) return SimulationResult::failure("corrupt tally");
            count = *parsed;
        }
        ctx.put(voter_key(a[0]), "1");
        ctx.put(tally_key(a[1]), std::to_string(count + 1));
        return SimulationResult::success(ctx.take());
    }
    return SimulationResult::failure("unknown function: " + f);
}

inline SimulationResult simulate_wallet(const ContractCall& call, SimContext& ctx) {
    const auto& f = call.function;
    const auto& a = call.args;
    auto balance_of = [&](const std::string& wid) -> std::optional<std::int64_t> {
        auto stored = ctx.get(wallet_key(wid));
        if (!stored) return std::nullopt;
        return parse_stored(*stored);
    };
    if (f == "Open" && a.size() == 2) {
        auto amount = parse_amount(a[1]);
        if (!amount) return SimulationResult::failure("invalid amount");
        if (ctx.get(wallet_key(a[0]))) return SimulationResult::failure("wallet already exists");
        ctx.put(wallet_key(a[0]), a[1]);
        return SimulationResult::success(ctx.take());
    }
    if ((f == "Deposit" || f == "Withdraw") && a.size() == 2) {
        auto amount = parse_amount(a[1]);
        if (!amount) return SimulationResult::failure("invalid amount");
        auto balance = balance_of(a[0]);
        if (!balance) return SimulationResult::failure("missing wallet");
        if (f == "Withdraw" && *balance < *amount)
            return SimulationResult::failure("insufficient balance");
        std::int64_t next = f == "Deposit" ? *balance + *amount : *balance - *amount;
        ctx.put(wallet_key(a[0]), std::to_string(next));
        return SimulationResult::success(ctx.take());
    }
    if (f == "Transfer" && a.size() == 3) {
        auto amount = parse_amount(a[2]);
        if (!amount) return SimulationResult::failure("invalid amount");
        if (a[0] == a[1]) return SimulationResult::failure("self transfer");
        auto src = balance_of(a[0]);
        if (!src) return SimulationResult::failure("missing wallet");
        auto dst = balance_of(a[1]);
        if (!dst) return SimulationResult::failure("missing wallet");
        if (*src < *amount) return SimulationResult::failure("insufficient balance");
        ctx.put(wallet_key(a[0]), std::to_string(*src - *amount));
        ctx.put(wallet_key(a[1]), std::to_string(*dst + *amount));
        return SimulationResult::success(ctx.take());
    }
    return SimulationResult::failure("unknown function: " + f);
}

}  // namespace detail

// Executes the call against the snapshot without mutating it. Pure: the same
// call on the same snapshot always yields the same result, and the returned
// read set lists exactly the keys the contract consulted.
inline SimulationResult simulate(const ContractCall& call, const WorldState& snapshot) {
    detail::SimContext ctx(snapshot);
    switch (call.contract) {
        case ContractKind::AssetTransfer: return detail::simulate_asset(call, ctx);
        case ContractKind::Voting: return detail::simulate_voting(call, ctx);
        case ContractKind::Wallet: return detail::simulate_wallet(call, ctx);
    }
    return SimulationResult::failure("unknown contract");
}

}  // namespace dagsim
