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

#include "slimcast/autodiff.hpp"

#include <stdexcept>

namespace slimcast {

Parameter::Parameter(std::string name, Tensor value)
    : name_(std::move(name)), value_(std::move(value)), grad_(value_.shape()) {}

void Parameter::assign(const Tensor& value) {
  if (value.shape() != value_.shape()) {
    throw std::invalid_argument("Parameter " + name_ + ": cannot assign " +
                                to_string(value.shape()) + " to " + to_string(value_.shape()));
  }
  value_ = value;
}

const Tensor& Var::value() const {
  if (!tape_) throw std::logic_error("Var::value: empty handle");
  return tape_->value(index_);
}

Tape& Var::tape() const {
  if (!tape_) throw std::logic_error("Var::tape: empty handle");
  return *tape_;
}

Var Tape::constant(Tensor value) {
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  Node& node = nodes_.emplace_back();
  node.external_value = &p.value();
  node.external_grad = &p.grad();
  node.requires_grad = true;
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs_grad = false;
  std::vector<std::size_t> ids;
  ids.reserve(inputs.size());
  for (const Var& v : inputs) {
    check_owned(v, "record");
    ids.push_back(v.index());
    needs_grad = needs_grad || nodes_[v.index()].requires_grad;
  }
  Node& node = nodes_.emplace_back();
  node.value = std::move(value);
  node.inputs = std::move(ids);
  node.requires_grad = needs_grad && backward;
  if (node.requires_grad) node.backward = std::move(backward);
  return Var(this, nodes_.size() - 1);
}

bool Tape::requires_grad(const Var& v) const {
  check_owned(v, "requires_grad");
  return nodes_[v.index()].requires_grad;
}

const Tensor& Tape::value(std::size_t index) const {
  if (index >= nodes_.size()) throw std::out_of_range("Tape::value: stale variable");
  const Node& node = nodes_[index];
  return node.external_value ? *node.external_value : node.value;
}

void Tape::check_owned(const Var& v, const char* what) const {
  if (!v.valid() || &v.tape() != this || v.index() >= nodes_.size()) {
    throw std::invalid_argument(std::string("Tape::") + what +
                                ": variable does not belong to this tape");
  }
}

Tensor& Tape::grad_slot(Node& node) {
  if (node.external_grad) return *node.external_grad;
  if (node.grad.empty() && !(node.external_value ? *node.external_value : node.value).empty()) {
    node.grad = Tensor((node.external_value ? *node.external_value : node.value).shape());
  }
  return node.grad;
}

void Tape::backward(const Var& loss) {
  if (!loss.valid() || &loss.tape() != this || loss.index() >= nodes_.size()) {
    throw std::invalid_argument("Tape::backward: loss is not recorded on this tape");
  }
  const Tensor& loss_value = value(loss.index());
  if (loss_value.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be a scalar, got shape " +
                                to_string(loss_value.shape()));
  }
  Node& root = nodes_[loss.index()];
  if (!root.requires_grad) {
    clear();
    return;
  }
  if (root.external_grad) {
    (*root.external_grad)[0] += 1.0;
    clear();
    return;
  }
  root.grad = Tensor(loss_value.shape(), 1.0);

  std::vector<const Tensor*> input_values;
  std::vector<Tensor*> input_grads;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    input_values.clear();
    input_grads.clear();
    for (std::size_t id : node.inputs) {
      Node& in = nodes_[id];
      input_values.push_back(in.external_value ? in.external_value : &in.value);
      input_grads.push_back(in.requires_grad ? &grad_slot(in) : nullptr);
    }
    const BackwardContext ctx{node.value, node.grad, input_values, input_grads};
    node.backward(ctx);
    // Intermediate gradients are dead once propagated.
    node.grad = Tensor();
  }
  clear();
}

}  // namespace slimcast
