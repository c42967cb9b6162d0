#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace rationd {

// Dense row-major table indexed by (agent, category).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, const T& fill = T())
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return cells_[r * cols_ + c];
  }

  const std::vector<T>& cells() const noexcept { return cells_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> cells_;
};

}  // namespace rationd
