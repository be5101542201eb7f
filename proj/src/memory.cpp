// Copyright 2026 The slimcast Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slimcast/memory.hpp"

namespace slimcast::memory {
namespace {

std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_allocations{0};

}  // namespace

Stats stats() noexcept {
  return Stats{g_current.load(std::memory_order_relaxed),
               g_peak.load(std::memory_order_relaxed),
               g_allocations.load(std::memory_order_relaxed)};
}

void reset_peak() noexcept {
  g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

void record_allocation(std::size_t bytes) noexcept {
  const std::size_t now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  g_allocations.fetch_add(1, std::memory_order_relaxed);
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void record_deallocation(std::size_t bytes) noexcept {
  g_current.fetch_sub(bytes, std::memory_order_relaxed);
}

PeakScope::PeakScope() noexcept : baseline_(stats().current_bytes) { reset_peak(); }

std::size_t PeakScope::peak_delta() const noexcept {
  const std::size_t peak = stats().peak_bytes;
  return peak > baseline_ ? peak - baseline_ : 0;
}

}  // namespace slimcast::memory
