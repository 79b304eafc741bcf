// Copyright 2026 The splitfuse-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace splitfuse {

enum class SequenceId : std::uint64_t {};

constexpr std::uint64_t to_underlying(SequenceId id) {
  return static_cast<std::uint64_t>(id);
}

using BlockId = std::int64_t;

inline std::int64_t blocks_required(std::int64_t tokens,
                                    std::int64_t block_size) {
  if (tokens <= 0) return 0;
  return (tokens + block_size - 1) / block_size;
}

class DuplicateSequence : public std::logic_error {
 public:
  explicit DuplicateSequence(SequenceId id)
      : std::logic_error("sequence " + std::to_string(to_underlying(id)) +
                         " already owns a block table") {}
};

class UnknownSequence : public std::out_of_range {
 public:
  explicit UnknownSequence(SequenceId id)
      : std::out_of_range("sequence " + std::to_string(to_underlying(id)) +
                          " has no block table") {}
};

struct BlockTable {
  SequenceId sequence_id{};
  std::vector<BlockId> blocks;
  std::int64_t tokens_stored = 0;
};

/**
 * Paged KV-cache bookkeeping: a fixed pool of equally sized blocks handed
 * out to sequences on demand. Blocks of one sequence need not be contiguous,
 * so an allocation fails only when the pool runs out of free blocks.
 *
 * Freed blocks are reused lowest id first.
 */
class BlockPool {
 public:
  BlockPool(std::int64_t total_blocks, std::int64_t block_size)
      : total_blocks_(total_blocks), block_size_(block_size) {
    if (total_blocks < 1) {
      throw std::invalid_argument("kv_cache.total_blocks must be >= 1");
    }
    if (block_size < 1) {
      throw std::invalid_argument("kv_cache.block_size_tokens must be >= 1");
    }
    owner_.resize(static_cast<std::size_t>(total_blocks));
    for (BlockId b = 0; b < total_blocks; ++b) free_list_.insert(free_list_.end(), b);
  }

  std::int64_t total_blocks() const { return total_blocks_; }
  std::int64_t block_size() const { return block_size_; }
  std::int64_t free_blocks() const {
    return static_cast<std::int64_t>(free_list_.size());
  }
  std::int64_t used_blocks() const { return used_; }

  double utilization() const {
    return static_cast<double>(used_) / static_cast<double>(total_blocks_);
  }

  bool contains(SequenceId id) const { return tables_.count(id) != 0; }

  const BlockTable& table(SequenceId id) const {
    auto it = tables_.find(id);
    if (it == tables_.end()) throw UnknownSequence(id);
    return it->second;
  }

  std::size_t live_sequences() const { return tables_.size(); }

  /// Blocks a live (or not yet allocated) sequence would need to grow by
  /// `additional_tokens`.
  std::int64_t blocks_to_grow(SequenceId id,
                              std::int64_t additional_tokens) const {
    auto it = tables_.find(id);
    const std::int64_t stored = it == tables_.end() ? 0 : it->second.tokens_stored;
    return blocks_required(stored + additional_tokens, block_size_) -
           blocks_required(stored, block_size_);
  }

  /// Returns std::nullopt (pool unchanged) when there are not enough free
  /// blocks. Throws DuplicateSequence if `id` already has a table.
  std::optional<BlockTable> allocate(SequenceId id, std::int64_t tokens) {
    if (contains(id)) throw DuplicateSequence(id);
    if (tokens < 0) throw std::invalid_argument("negative token count");
    const std::int64_t needed = blocks_required(tokens, block_size_);
    if (needed > free_blocks()) return std::nullopt;

    BlockTable table{id, {}, tokens};
    take_blocks(id, needed, table.blocks);
    return tables_.emplace(id, std::move(table)).first->second;
  }

  /// Returns the number of blocks appended, or std::nullopt (nothing
  /// changed) when the pool cannot cover the growth.
  std::optional<std::int64_t> extend(SequenceId id,
                                     std::int64_t additional_tokens) {
    auto it = tables_.find(id);
    if (it == tables_.end()) throw UnknownSequence(id);
    if (additional_tokens < 0) throw std::invalid_argument("negative token count");
    BlockTable& table = it->second;
    const std::int64_t needed = blocks_to_grow(id, additional_tokens);
    if (needed > free_blocks()) return std::nullopt;

    take_blocks(id, needed, table.blocks);
    table.tokens_stored += additional_tokens;
    return needed;
  }

  /// Releases every block of `id`; returns how many were released.
  std::int64_t free(SequenceId id) {
    auto it = tables_.find(id);
    if (it == tables_.end()) throw UnknownSequence(id);
    const auto released = static_cast<std::int64_t>(it->second.blocks.size());
    for (BlockId b : it->second.blocks) {
      owner_[static_cast<std::size_t>(b)].reset();
      free_list_.insert(b);
    }
    used_ -= released;
    tables_.erase(it);
    return released;
  }

  /// Full structural check; used by tests after every mutation.
  bool check_invariants() const {
    if (free_blocks() + used_ != total_blocks_) return false;
    std::int64_t owned = 0;
    for (BlockId b = 0; b < total_blocks_; ++b) {
      const bool is_free = free_list_.count(b) != 0;
      const bool is_owned = owner_[static_cast<std::size_t>(b)].has_value();
      if (is_free == is_owned) return false;
      owned += is_owned ? 1 : 0;
    }
    if (owned != used_) return false;
    std::int64_t in_tables = 0;
    for (const auto& [id, table] : tables_) {
      if (static_cast<std::int64_t>(table.blocks.size()) !=
          blocks_required(table.tokens_stored, block_size_)) {
        return false;
      }
      for (BlockId b : table.blocks) {
        if (owner_[static_cast<std::size_t>(b)] != id) return false;
      }
      in_tables += static_cast<std::int64_t>(table.blocks.size());
    }
    return in_tables == used_;
  }

 private:
  void take_blocks(SequenceId id, std::int64_t count,
                   std::vector<BlockId>& out) {
    for (std::int64_t i = 0; i < count; ++i) {
      const BlockId b = *free_list_.begin();
      free_list_.erase(free_list_.begin());
      owner_[static_cast<std::size_t>(b)] = id;
      out.push_back(b);
    }
    used_ += count;
  }

  std::int64_t total_blocks_;
  std::int64_t block_size_;
  std::set<BlockId> free_list_;
  std::vector<std::optional<SequenceId>> owner_;
  std::map<SequenceId, BlockTable> tables_;
  std::int64_t used_ = 0;
};

}  // namespace splitfuse
