#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagsim/model.hpp"

namespace dagsim {

struct OrdererConfig {
    std::size_t block_size = 100;
    // Place flag=0 transactions ahead of flagged ones inside the block,
    // preserving relative endorsement order within each class.
    bool prioritize_independent = true;
};

// Raised when every candidate transaction for a block had already expired.
// Carries the dropped ids so callers can account for them.
class EmptyBlockError : public std::runtime_error {
  public:
    explicit EmptyBlockError(std::vector<TxId> dropped)
        : std::runtime_error("all transactions for the block expired"),
          dropped_(std::move(dropped)) {}

    const std::vector<TxId>& dropped() const { return dropped_; }

  private:
    std::vector<TxId> dropped_;
};

struct BuildBlockResult {
    Block block;
    std::vector<TxId> dropped;  // expired before ordering, never blocked
    std::size_t consumed = 0;   // entries taken from the front of pending
};

inline void validate_config(const OrdererConfig& cfg) {
    if (cfg.block_size == 0) throw std::invalid_argument("block size must be positive");
}

// Cut one block from the front of the pending queue. Expired endorsements are
// dropped while filling, so a block holds up to block_size live transactions.
// Metadata mirrors the final tx order entry for entry.
inline BuildBlockResult build_block(const std::vector<EndorsedTransaction>& pending,
                                    std::uint64_t block_number, const OrdererConfig& cfg,
                                    TimeMs now) {
    validate_config(cfg);

    BuildBlockResult result;
    std::vector<EndorsedTransaction> live;
    live.reserve(cfg.block_size);

    std::size_t i = 0;
    for (; i < pending.size() && live.size() < cfg.block_size; ++i) {
        const auto& tx = pending[i];
        if (tx.expiry_deadline < now)
            result.dropped.push_back(tx.id());
        else
            live.push_back(tx);
    }
    result.consumed = i;

    if (live.empty()) throw EmptyBlockError(std::move(result.dropped));

    if (cfg.prioritize_independent)
        std::stable_partition(live.begin(), live.end(),
                              [](const EndorsedTransaction& tx) { return tx.flag == 0; });

    result.block.block_number = block_number;
    result.block.txs = std::move(live);
    result.block.metadata.reserve(result.block.txs.size());
    for (const auto& tx : result.block.txs)
        result.block.metadata.push_back({tx.flag, tx.parents});
    return result;
}

}  // namespace dagsim
