#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deeprm/random.hpp"

namespace deeprm {

// Row-major block of states, one state of dimension `dim` per row.
class StateMatrix {
 public:
  StateMatrix() = default;
  StateMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0) {}

  std::size_t size() const { return rows_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> s) {
    if (rows_ == 0 && dim_ == 0) dim_ = s.size();
    data_.insert(data_.end(), s.begin(), s.end());
    ++rows_;
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// i.i.d. Uniform[0,1]^dim states.
inline StateMatrix sample_uniform_states(std::size_t n, std::size_t dim, Rng& rng) {
  StateMatrix states(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (double& v : states.row(i)) v = uniform01(rng);
  return states;
}

}  // namespace deeprm
