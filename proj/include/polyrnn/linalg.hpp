#pragma once

// Dense row-major matrices and vectors, plus block assembly.
//
// Network weights are small integers, dyadic rationals, or 1/D. Products
// accumulate left to right with zero weights skipped, so composite networks
// built by block assembly reproduce their component networks bit for bit.
//
// The element type is normally double. Any exact ordered field type (a GMP
// rational, say) also works, which lets tests check error bounds that sit
// below double rounding.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polyrnn {

class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class T>
concept Scalar = std::floating_point<T> || requires(const T a, const T b) {
  { a + b } -> std::convertible_to<T>;
  { a - b } -> std::convertible_to<T>;
  { a * b } -> std::convertible_to<T>;
  { a < b } -> std::convertible_to<bool>;
  T(0.5);
};

namespace detail {

template <Scalar T>
bool is_finite(const T& x) {
  if constexpr (std::floating_point<T>) {
    return std::isfinite(x);
  } else {
    return true;
  }
}

template <Scalar T>
T abs_value(const T& x) {
  if (x < T(0)) return T(-x);
  return x;
}

inline std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <Scalar T>
void require_finite(std::span<const T> xs, const char* what) {
  for (const T& x : xs) {
    if (!is_finite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

}  // namespace detail

template <Scalar T>
class BasicVector {
 public:
  using value_type = T;

  BasicVector() = default;
  explicit BasicVector(std::size_t dim, T fill = T(0)) : data_(dim, fill) {}
  BasicVector(std::initializer_list<T> xs) : data_(xs) {
    detail::require_finite<T>(data_, "Vector");
  }
  explicit BasicVector(std::vector<T> xs) : data_(std::move(xs)) {
    detail::require_finite<T>(data_, "Vector");
  }

  template <Scalar U>
  explicit BasicVector(const BasicVector<U>& other)
      : data_(other.begin(), other.end()) {}

  std::size_t dim() const noexcept { return data_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<const T> span() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  bool operator==(const BasicVector&) const = default;

 private:
  std::vector<T> data_;
};

template <Scalar T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> row_major)
      : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
      throw dimension_error("Matrix " + detail::shape_str(rows_, cols_) +
                            " given " + std::to_string(data_.size()) +
                            " entries");
    }
    detail::require_finite<T>(data_, "Matrix");
  }
  // Nested rows, e.g. Matrix{{1, 0}, {0, 1}}.
  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw dimension_error("Matrix: ragged rows");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    detail::require_finite<T>(data_, "Matrix");
  }

  template <Scalar U>
  explicit BasicMatrix(const BasicMatrix<U>& other)
      : rows_(other.rows()), cols_(other.cols()),
        data_(other.values().begin(), other.values().end()) {}

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<const T> row(std::size_t r) const {
    return std::span<const T>(data_).subspan(r * cols_, cols_);
  }

  const std::vector<T>& values() const noexcept { return data_; }

  bool operator==(const BasicMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Vector = BasicVector<double>;
using Matrix = BasicMatrix<double>;

namespace detail {

// Neumaier summation. The clock's decaying coordinate is summed against
// terms of size 1 that cancel; plain summation would drop it. Exact types
// just add.
template <Scalar T>
struct CompensatedSum {
  T sum = T(0);
  T comp = T(0);

  void add(const T& x) {
    if constexpr (std::floating_point<T>) {
      const T t = sum + x;
      if (std::abs(sum) >= std::abs(x)) {
        comp += (sum - t) + x;
      } else {
        comp += (x - t) + sum;
      }
      sum = t;
    } else {
      sum += x;
    }
  }

  T value() const { return sum + comp; }
};

template <Scalar T>
void accumulate_row(CompensatedSum<T>& acc, std::span<const T> row,
                    const BasicVector<T>& v) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    // A zero weight times a finite entry only adds a signed zero.
    if (row[c] != T(0)) acc.add(row[c] * v[c]);
  }
}

}  // namespace detail

template <Scalar T>
BasicVector<T> matvec(const BasicMatrix<T>& a, const BasicVector<T>& v) {
  if (a.cols() != v.dim()) {
    throw dimension_error("matvec: " + detail::shape_str(a.rows(), a.cols()) +
                          " times vector of dim " + std::to_string(v.dim()));
  }
  BasicVector<T> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    detail::CompensatedSum<T> acc;
    detail::accumulate_row(acc, a.row(r), v);
    out[r] = acc.value();
  }
  return out;
}

// a·v + b, with the bias inside the same compensated sum.
template <Scalar T>
BasicVector<T> affine(const BasicMatrix<T>& a, const BasicVector<T>& v,
                      const BasicVector<T>& b) {
  if (b.dim() != a.rows()) {
    throw dimension_error("affine: bias dim " + std::to_string(b.dim()) +
                          " for " + std::to_string(a.rows()) + " rows");
  }
  if (a.cols() != v.dim()) {
    throw dimension_error("affine: " + detail::shape_str(a.rows(), a.cols()) +
                          " times vector of dim " + std::to_string(v.dim()));
  }
  BasicVector<T> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    detail::CompensatedSum<T> acc;
    detail::accumulate_row(acc, a.row(r), v);
    acc.add(b[r]);
    out[r] = acc.value();
  }
  return out;
}

// a·v + b over the nonzero weights only. Same terms in the same order as
// affine(), so the results are identical; it is just faster on the sparse
// block matrices the constructions produce.
template <Scalar T>
class SparseAffine {
 public:
  SparseAffine(const BasicMatrix<T>& a, const BasicVector<T>& b)
      : cols_(a.cols()), bias_(b) {
    if (b.dim() != a.rows()) throw dimension_error("SparseAffine: bias dim");
    start_.push_back(0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
      auto row = a.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] != T(0)) {
          index_.push_back(c);
          value_.push_back(row[c]);
        }
      }
      start_.push_back(index_.size());
    }
  }

  BasicVector<T> apply(const BasicVector<T>& v) const {
    if (v.dim() != cols_) throw dimension_error("SparseAffine: input dim");
    BasicVector<T> out(bias_.dim());
    for (std::size_t r = 0; r < bias_.dim(); ++r) {
      detail::CompensatedSum<T> acc;
      for (std::size_t i = start_[r]; i < start_[r + 1]; ++i)
        acc.add(value_[i] * v[index_[i]]);
      acc.add(bias_[r]);
      out[r] = acc.value();
    }
    return out;
  }

 private:
  std::size_t cols_;
  BasicVector<T> bias_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> index_;
  std::vector<T> value_;
};

template <Scalar T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw dimension_error("matmul: " + detail::shape_str(a.rows(), a.cols()) +
                          " times " + detail::shape_str(b.rows(), b.cols()));
  }
  BasicMatrix<T> out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      T acc = T(0);
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

template <Scalar T>
BasicVector<T> relu(BasicVector<T> v) {
  for (T& x : v) {
    if (!(T(0) < x)) x = T(0);
  }
  return v;
}

template <Scalar T>
T max_abs(const BasicVector<T>& v) {
  T m = T(0);
  for (const T& x : v) m = std::max(m, detail::abs_value(x));
  return m;
}

template <Scalar T>
BasicVector<T> concat(std::span<const BasicVector<T>> parts) {
  std::vector<T> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return BasicVector<T>(std::move(out));
}

template <Scalar T>
BasicVector<T> concat(std::initializer_list<BasicVector<T>> parts) {
  return concat<T>(std::span<const BasicVector<T>>(parts.begin(), parts.size()));
}

template <Scalar T>
BasicVector<T> slice(const BasicVector<T>& v, std::size_t first,
                     std::size_t count) {
  if (first + count > v.dim()) throw dimension_error("slice out of range");
  return BasicVector<T>(
      std::vector<T>(v.begin() + first, v.begin() + first + count));
}

// Grid of optional cells with declared block sizes; empty cells are zero.
template <Scalar T>
class BlockLayout {
 public:
  BlockLayout(std::vector<std::size_t> row_sizes,
              std::vector<std::size_t> col_sizes)
      : row_sizes_(std::move(row_sizes)), col_sizes_(std::move(col_sizes)),
        cells_(row_sizes_.size() * col_sizes_.size()) {}

  BlockLayout& set(std::size_t block_row, std::size_t block_col,
                   BasicMatrix<T> cell) {
    if (block_row >= row_sizes_.size() || block_col >= col_sizes_.size()) {
      throw dimension_error("BlockLayout: cell index out of range");
    }
    if (cell.rows() != row_sizes_[block_row] ||
        cell.cols() != col_sizes_[block_col]) {
      throw dimension_error(
          "BlockLayout: cell (" + std::to_string(block_row) + "," +
          std::to_string(block_col) + ") is " +
          detail::shape_str(cell.rows(), cell.cols()) + ", block expects " +
          detail::shape_str(row_sizes_[block_row], col_sizes_[block_col]));
    }
    cells_[block_row * col_sizes_.size() + block_col] = std::move(cell);
    return *this;
  }

  const std::vector<std::size_t>& row_sizes() const { return row_sizes_; }
  const std::vector<std::size_t>& col_sizes() const { return col_sizes_; }
  const std::optional<BasicMatrix<T>>& cell(std::size_t r,
                                            std::size_t c) const {
    return cells_[r * col_sizes_.size() + c];
  }

 private:
  std::vector<std::size_t> row_sizes_;
  std::vector<std::size_t> col_sizes_;
  std::vector<std::optional<BasicMatrix<T>>> cells_;
};

template <Scalar T>
BasicMatrix<T> block_assemble(const BlockLayout<T>& layout) {
  std::size_t rows = 0, cols = 0;
  for (auto s : layout.row_sizes()) rows += s;
  for (auto s : layout.col_sizes()) cols += s;
  BasicMatrix<T> out(rows, cols);
  std::size_t r0 = 0;
  for (std::size_t br = 0; br < layout.row_sizes().size(); ++br) {
    std::size_t c0 = 0;
    for (std::size_t bc = 0; bc < layout.col_sizes().size(); ++bc) {
      if (const auto& cell = layout.cell(br, bc)) {
        for (std::size_t i = 0; i < cell->rows(); ++i)
          for (std::size_t j = 0; j < cell->cols(); ++j)
            out(r0 + i, c0 + j) = (*cell)(i, j);
      }
      c0 += layout.col_sizes()[bc];
    }
    r0 += layout.row_sizes()[br];
  }
  return out;
}

// Block-diagonal matrix from a list of blocks.
template <Scalar T>
BasicMatrix<T> block_diag(std::span<const BasicMatrix<T>> blocks) {
  std::vector<std::size_t> rs, cs;
  for (const auto& b : blocks) {
    rs.push_back(b.rows());
    cs.push_back(b.cols());
  }
  BlockLayout<T> layout(rs, cs);
  for (std::size_t i = 0; i < blocks.size(); ++i) layout.set(i, i, blocks[i]);
  return block_assemble(layout);
}

template <Scalar T>
BasicMatrix<T> scaled(BasicMatrix<T> a, T s) {
  BasicMatrix<T> out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = s * a(r, c);
  return out;
}

// Rows [first, first+count) of a.
template <Scalar T>
BasicMatrix<T> row_slice(const BasicMatrix<T>& a, std::size_t first,
                         std::size_t count) {
  if (first + count > a.rows()) throw dimension_error("row_slice out of range");
  std::vector<T> data(a.values().begin() + first * a.cols(),
                      a.values().begin() + (first + count) * a.cols());
  return BasicMatrix<T>(count, a.cols(), std::move(data));
}

}  // namespace polyrnn
