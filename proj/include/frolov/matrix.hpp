#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace frolov {

/// Dense row-major square matrix; small d only.
template <class T>
class square_matrix {
 public:
  square_matrix() = default;
  explicit square_matrix(std::size_t dim) : dim_(dim), data_(dim * dim, T(0)) {}

  static square_matrix identity(std::size_t dim) {
    square_matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  T& operator()(std::size_t i, std::size_t j) noexcept {
    assert(i < dim_ && j < dim_);
    return data_[i * dim_ + j];
  }
  T const& operator()(std::size_t i, std::size_t j) const noexcept {
    assert(i < dim_ && j < dim_);
    return data_[i * dim_ + j];
  }

  std::span<T const> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<T const> values() const noexcept { return data_; }

  square_matrix transposed() const {
    square_matrix t(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  template <class U, class F>
  square_matrix<U> map(F&& f) const {
    square_matrix<U> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out(i, j) = f((*this)(i, j));
    return out;
  }

  friend bool operator==(square_matrix const&, square_matrix const&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<T> data_;
};

template <class T>
square_matrix<T> operator*(square_matrix<T> const& a, square_matrix<T> const& b) {
  assert(a.dim() == b.dim());
  square_matrix<T> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t k = 0; k < a.dim(); ++k)
      for (std::size_t j = 0; j < a.dim(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

}  // namespace frolov
