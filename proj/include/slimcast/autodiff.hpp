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

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "slimcast/tensor.hpp"

namespace slimcast {

/// A learnable tensor with its accumulated gradient. The name is the stable id used by
/// checkpoints and the optimizer.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  const std::string& name() const noexcept { return name_; }
  const Shape& shape() const noexcept { return value_.shape(); }

  Tensor& value() noexcept { return value_; }
  const Tensor& value() const noexcept { return value_; }
  Tensor& grad() noexcept { return grad_; }
  const Tensor& grad() const noexcept { return grad_; }

  /// Replaces the value; the shape must not change.
  void assign(const Tensor& value);
  void zero_grad() noexcept { grad_.fill(0.0); }

 private:
  std::string name_;
  Tensor value_;
  Tensor grad_;
};

class Tape;

/// Handle to a value recorded on a Tape. Valid until the tape is cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const;
  std::size_t index() const noexcept { return index_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// What a backward rule sees. grads[k] is null when input k needs no gradient.
struct BackwardContext {
  const Tensor& output;
  const Tensor& grad_output;
  std::span<const Tensor* const> inputs;
  std::span<Tensor* const> grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

/// Linear record of executed operations for reverse-mode differentiation. Node indices
/// increase with execution order, so reverse index order is a valid topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf with no gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is accumulated into p.grad() on backward. The parameter must
  /// outlive the tape's current recording.
  Var parameter(Parameter& p);

  /// Records an operation output. backward may be empty when no input needs a gradient.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  bool requires_grad(const Var& v) const;
  const Tensor& value(std::size_t index) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1, propagates to every reachable Parameter, then clears.
  void backward(const Var& loss);
  void clear() noexcept { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external_value = nullptr;
    Tensor grad;
    Tensor* external_grad = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  void check_owned(const Var& v, const char* what) const;
  Tensor& grad_slot(Node& node);

  std::deque<Node> nodes_;
};

}  // namespace slimcast
