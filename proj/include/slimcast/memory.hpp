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

#pragma once

#include <atomic>
#include <cstddef>
#include <new>

namespace slimcast::memory {

/// Byte counters for every tensor buffer allocated through CountingAllocator.
struct Stats {
  std::size_t current_bytes = 0;
  std::size_t peak_bytes = 0;
  std::size_t allocations = 0;
};

Stats stats() noexcept;

/// Resets the peak watermark to the current live byte count.
void reset_peak() noexcept;

void record_allocation(std::size_t bytes) noexcept;
void record_deallocation(std::size_t bytes) noexcept;

/// Peak bytes above the live total at construction time.
class PeakScope {
 public:
  PeakScope() noexcept;
  std::size_t peak_delta() const noexcept;

 private:
  std::size_t baseline_;
};

template <class T>
struct CountingAllocator {
  using value_type = T;

  CountingAllocator() noexcept = default;
  template <class U>
  CountingAllocator(const CountingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = n * sizeof(T);
    T* p = static_cast<T*>(::operator new(bytes));
    record_allocation(bytes);
    return p;
  }

  void deallocate(T* p, std::size_t n) noexcept {
    record_deallocation(n * sizeof(T));
    ::operator delete(p);
  }

  template <class U>
  bool operator==(const CountingAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace slimcast::memory
