#pragma once

// LLL reduction of the columns of a small real basis, tracking the
// unimodular change of basis and its inverse exactly in integers.

#include <cmath>
#include <cstdint>
#include <vector>

#include "frolov/matrix.hpp"

namespace frolov {

struct lll_result {
  /// basis * transform
  square_matrix<double> reduced;
  square_matrix<std::int64_t> transform;
  square_matrix<std::int64_t> inverse_transform;
};

inline lll_result lll_reduce(square_matrix<double> const& basis, double delta = 0.99) {
  std::size_t const d = basis.dim();
  lll_result r{basis, square_matrix<std::int64_t>::identity(d), square_matrix<std::int64_t>::identity(d)};
  auto& b = r.reduced;
  auto& u = r.transform;
  auto& ui = r.inverse_transform;

  std::vector<std::vector<double>> bstar(d, std::vector<double>(d));
  std::vector<double> norm2(d);
  square_matrix<double> mu(d);

  auto gram_schmidt = [&] {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t row = 0; row < d; ++row) bstar[i][row] = b(row, i);
      for (std::size_t j = 0; j < i; ++j) {
        double dot = 0;
        for (std::size_t row = 0; row < d; ++row) dot += b(row, i) * bstar[j][row];
        mu(i, j) = norm2[j] > 0 ? dot / norm2[j] : 0;
        for (std::size_t row = 0; row < d; ++row) bstar[i][row] -= mu(i, j) * bstar[j][row];
      }
      norm2[i] = 0;
      for (std::size_t row = 0; row < d; ++row) norm2[i] += bstar[i][row] * bstar[i][row];
    }
  };

  // column j -= q * column k
  auto reduce = [&](std::size_t j, std::size_t k, std::int64_t q) {
    if (q == 0) return;
    for (std::size_t row = 0; row < d; ++row) {
      b(row, j) -= static_cast<double>(q) * b(row, k);
      u(row, j) -= q * u(row, k);
    }
    for (std::size_t col = 0; col < d; ++col) ui(k, col) += q * ui(j, col);
  };
  auto swap_cols = [&](std::size_t j, std::size_t k) {
    for (std::size_t row = 0; row < d; ++row) {
      std::swap(b(row, j), b(row, k));
      std::swap(u(row, j), u(row, k));
    }
    for (std::size_t col = 0; col < d; ++col) std::swap(ui(j, col), ui(k, col));
  };

  gram_schmidt();
  std::size_t k = 1;
  int guard = 0;
  while (k < d && guard++ < 100000) {
    for (std::size_t j = k; j-- > 0;) {
      double const m = mu(k, j);
      if (std::fabs(m) > 0.5) {
        reduce(k, j, static_cast<std::int64_t>(std::llround(m)));
        gram_schmidt();
      }
    }
    if (norm2[k] >= (delta - mu(k, k - 1) * mu(k, k - 1)) * norm2[k - 1]) {
      ++k;
    } else {
      swap_cols(k, k - 1);
      gram_schmidt();
      k = k > 1 ? k - 1 : 1;
    }
  }
  return r;
}

}  // namespace frolov
