// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "moviebench/common.hpp"

namespace moviebench {

// LRU over a byte budget. Charge is the value size; a get bumps recency.
class LruByteCache {
 public:
  explicit LruByteCache(uint64_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::optional<std::string> get(const std::string& key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) {
      misses_++;
      return std::nullopt;
    }
    hits_++;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  Status put(const std::string& key, std::string value) {
    if (value.size() > capacity_) {
      return Error{Errc::oversize_value,
                   std::to_string(value.size()) + " > capacity " + std::to_string(capacity_)};
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it != map_.end()) {
      used_ -= it->second->second.size();
      used_ += value.size();
      it->second->second = std::move(value);
      order_.splice(order_.begin(), order_, it->second);
    } else {
      order_.emplace_front(key, std::move(value));
      map_[key] = order_.begin();
      used_ += order_.begin()->second.size();
    }
    while (used_ > capacity_ && !order_.empty()) {
      auto& victim = order_.back();
      used_ -= victim.second.size();
      map_.erase(victim.first);
      order_.pop_back();
      evictions_++;
    }
    return ok_status();
  }

  uint64_t used_bytes() const {
    std::lock_guard<std::mutex> lock(mu_);
    return used_;
  }
  size_t entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
  }
  uint64_t capacity() const { return capacity_; }
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }

 private:
  uint64_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<std::string, std::string>> order_;  // front = most recent
  std::unordered_map<std::string, decltype(order_)::iterator> map_;
  uint64_t used_ = 0;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
  uint64_t evictions_ = 0;
};

}  // namespace moviebench
