// Copyright 2026 The relate-kg Authors
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

#include "relate/tensor.hpp"

#include <algorithm>

#include "relate/error.hpp"

namespace relate {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::size_t ParameterSet::add(std::string name, Matrix value) {
  tensors_.push_back({std::move(name), std::move(value)});
  return tensors_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return i;
  }
  throw InternalError("no parameter tensor named '" + name + "'");
}

std::size_t ParameterSet::total_entries() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.name == b.name && a.value == b.value;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  return a.tensors_ == b.tensors_;
}

Gradient::Gradient(const ParameterSet& like) {
  grads_.reserve(like.size());
  for (const auto& t : like) {
    grads_.emplace_back(t.value.rows(), t.value.cols());
    flags_.emplace_back(t.value.rows(), 0);
  }
  touched_.resize(like.size());
}

std::span<double> Gradient::row(std::size_t t, std::size_t r) {
  if (!flags_[t][r]) {
    flags_[t][r] = 1;
    touched_[t].push_back(r);
  }
  return grads_[t].row(r);
}

void Gradient::merge(const Gradient& other) {
  if (other.grads_.size() != grads_.size()) {
    throw InternalError("gradient merge: tensor count mismatch");
  }
  for (std::size_t t = 0; t < grads_.size(); ++t) {
    if (other.grads_[t].rows() != grads_[t].rows() ||
        other.grads_[t].cols() != grads_[t].cols()) {
      throw InternalError("gradient merge: shape mismatch in tensor " + std::to_string(t));
    }
    for (std::size_t r : other.touched_[t]) {
      auto dst = row(t, r);
      auto src = other.grads_[t].row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
}

void Gradient::scale(double factor) {
  for (std::size_t t = 0; t < grads_.size(); ++t) {
    for (std::size_t r : touched_[t]) {
      for (double& v : grads_[t].row(r)) v *= factor;
    }
  }
}

double Gradient::squared_norm() const {
  double s = 0.0;
  for (std::size_t t = 0; t < grads_.size(); ++t) {
    for (std::size_t r : touched_[t]) {
      for (double v : grads_[t].row(r)) s += v * v;
    }
  }
  return s;
}

void Gradient::clear() {
  for (std::size_t t = 0; t < grads_.size(); ++t) {
    for (std::size_t r : touched_[t]) {
      for (double& v : grads_[t].row(r)) v = 0.0;
      flags_[t][r] = 0;
    }
    touched_[t].clear();
  }
}

}  // namespace relate
