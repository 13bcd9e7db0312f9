#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mstl {

// Discrete-time d-dimensional signal. Samples are indexed by tau in [1, T]
// with a unit time step; storage is row-major (time, dimension).
class Signal {
 public:
  Signal() = default;
  Signal(int steps, int dim)
      : steps_(steps), dim_(dim), data_(static_cast<size_t>(steps) * dim, 0.0) {
    if (steps < 1 || dim < 1) throw std::invalid_argument("Signal: T >= 1 and d >= 1 required");
  }
  Signal(int steps, int dim, std::vector<double> data)
      : steps_(steps), dim_(dim), data_(std::move(data)) {
    if (steps < 1 || dim < 1) throw std::invalid_argument("Signal: T >= 1 and d >= 1 required");
    if (data_.size() != static_cast<size_t>(steps) * dim)
      throw std::invalid_argument("Signal: data size does not match T*d");
  }

  int steps() const { return steps_; }
  int dim() const { return dim_; }

  // tau is 1-based; the dimension index k is 0-based.
  double at(int tau, int k) const { return data_[static_cast<size_t>(tau - 1) * dim_ + k]; }
  double& at(int tau, int k) { return data_[static_cast<size_t>(tau - 1) * dim_ + k]; }

  std::span<const double> sample(int tau) const {
    return {data_.data() + static_cast<size_t>(tau - 1) * dim_, static_cast<size_t>(dim_)};
  }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Signal& o) const = default;

 private:
  int steps_ = 0;
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace mstl
