#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "uniord/errors.hpp"

namespace uniord {

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DomainError("Matrix: data size does not match shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DomainError("Matrix::append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Features plus 1-based ordinal labels over k classes.
struct LabeledSet {
  Matrix X;
  std::vector<int> y;
  int k = 0;

  std::size_t size() const { return y.size(); }

  void check() const {
    if (X.rows() != y.size()) throw DomainError("LabeledSet: feature rows and labels differ in count");
    for (int label : y)
      if (label < 1 || label > k) throw DomainError("LabeledSet: label " + std::to_string(label) + " outside 1..k");
  }

  LabeledSet subset(std::span<const std::size_t> idx) const {
    LabeledSet out{X.select_rows(idx), {}, k};
    out.y.reserve(idx.size());
    for (std::size_t i : idx) out.y.push_back(y[i]);
    return out;
  }
};

}  // namespace uniord
