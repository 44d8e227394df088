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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace relate {

// Dense row-major matrix of doubles. Rows are entity or relation indices in
// every parameter tensor, which is what the sparse optimizer keys on.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A named learnable tensor.
struct Tensor {
  std::string name;
  Matrix value;
};

// Collection of named tensors that the optimizer, the regularizer and the
// checkpoint writer all walk uniformly.
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const { return tensors_.size(); }
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor>::iterator begin() { return tensors_.begin(); }
  std::vector<Tensor>::iterator end() { return tensors_.end(); }
  std::vector<Tensor>::const_iterator begin() const { return tensors_.begin(); }
  std::vector<Tensor>::const_iterator end() const { return tensors_.end(); }

  // Index of the tensor with the given name; throws InternalError if absent.
  std::size_t index_of(const std::string& name) const;
  Matrix& at(const std::string& name) { return tensors_[index_of(name)].value; }
  const Matrix& at(const std::string& name) const { return tensors_[index_of(name)].value; }

  std::size_t total_entries() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&);

 private:
  std::vector<Tensor> tensors_;
};

bool operator==(const Tensor& a, const Tensor& b);

// Row-sparse gradient accumulator mirroring a ParameterSet's shapes. Values
// are stored densely; touched rows are tracked so that clearing, merging and
// the optimizer only visit rows a batch actually reached.
class Gradient {
 public:
  Gradient() = default;
  explicit Gradient(const ParameterSet& like);

  std::size_t size() const { return grads_.size(); }

  // Mutable row of tensor `t`, marking it touched.
  std::span<double> row(std::size_t t, std::size_t r);
  std::span<const double> row(std::size_t t, std::size_t r) const { return grads_[t].row(r); }
  const Matrix& dense(std::size_t t) const { return grads_[t]; }

  const std::vector<std::size_t>& touched_rows(std::size_t t) const { return touched_[t]; }
  bool is_touched(std::size_t t, std::size_t r) const { return flags_[t][r] != 0; }

  // Adds `other` into this accumulator. Shapes must match.
  void merge(const Gradient& other);
  void scale(double factor);
  double squared_norm() const;
  // Zeroes touched rows and forgets them.
  void clear();

 private:
  std::vector<Matrix> grads_;
  std::vector<std::vector<std::size_t>> touched_;
  std::vector<std::vector<char>> flags_;
};

}  // namespace relate
