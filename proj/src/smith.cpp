#include "toric/smith.hpp"

#include <utility>

namespace toric {

namespace {

void swap_rows(ZMat& m, std::size_t i, std::size_t j) { std::swap(m[i], m[j]); }

void swap_cols(ZMat& m, std::size_t i, std::size_t j) {
  for (auto& row : m) std::swap(row[i], row[j]);
}

// row_i -= f * row_j
void add_row(ZMat& m, std::size_t i, std::size_t j, const Int& f) {
  for (std::size_t k = 0; k < m[i].size(); ++k) m[i][k] -= f * m[j][k];
}

void add_col(ZMat& m, std::size_t i, std::size_t j, const Int& f) {
  for (auto& row : m) row[i] -= f * row[j];
}

void negate_row(ZMat& m, std::size_t i) {
  for (auto& x : m[i]) x = -x;
}

Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

}  // namespace

ZMat identity_z(std::size_t n) {
  ZMat id(n, ZVec(n, 0));
  for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
  return id;
}

ZMat mul(const ZMat& a, const ZMat& b) {
  if (a.empty()) return {};
  const std::size_t inner = b.size(), cols = b.empty() ? 0 : b[0].size();
  ZMat out(a.size(), ZVec(cols, 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < inner; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < cols; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  return out;
}

std::vector<Int> SmithForm::elementary_divisors() const {
  std::vector<Int> out;
  for (std::size_t i = 0; i < diagonal.size() && i < (diagonal.empty() ? 0 : diagonal[0].size()); ++i)
    out.push_back(diagonal[i][i]);
  return out;
}

SmithForm smith_normal_form(const ZMat& a) {
  SmithForm sf;
  sf.diagonal = a;
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  sf.left = identity_z(rows);
  sf.right = identity_z(cols);
  ZMat& d = sf.diagonal;

  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    for (;;) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      std::size_t pr = rows, pc = cols;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (d[i][j] != 0 && (pr == rows || abs(d[i][j]) < abs(d[pr][pc]))) {
            pr = i;
            pc = j;
          }
      if (pr == rows) return sf;
      swap_rows(d, t, pr);
      swap_rows(sf.left, t, pr);
      swap_cols(d, t, pc);
      swap_cols(sf.right, t, pc);

      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (d[i][t] == 0) continue;
        Int q = floor_div(d[i][t], d[t][t]);
        add_row(d, i, t, q);
        add_row(sf.left, i, t, q);
        if (d[i][t] != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (d[t][j] == 0) continue;
        Int q = floor_div(d[t][j], d[t][t]);
        add_col(d, j, t, q);
        add_col(sf.right, j, t, q);
        if (d[t][j] != 0) clean = false;
      }
      if (!clean) continue;

      // Divisibility: fold any offending row into the pivot row and retry.
      bool divisible = true;
      for (std::size_t i = t + 1; i < rows && divisible; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (d[i][j] % d[t][t] != 0) {
            add_row(d, t, i, Int(-1));
            add_row(sf.left, t, i, Int(-1));
            divisible = false;
            break;
          }
      if (divisible) break;
    }
    if (d[t][t] < 0) {
      negate_row(d, t);
      negate_row(sf.left, t);
    }
  }
  return sf;
}

ZMat hermite_transform(const ZMat& a) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a[0].size();
  ZMat m = a;
  ZMat g = identity_z(rows);
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    // Euclid on column c among rows r.. until a single nonzero remains.
    for (;;) {
      std::size_t p = rows;
      for (std::size_t i = r; i < rows; ++i)
        if (m[i][c] != 0 && (p == rows || abs(m[i][c]) < abs(m[p][c]))) p = i;
      if (p == rows) break;
      swap_rows(m, r, p);
      swap_rows(g, r, p);
      bool done = true;
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (m[i][c] == 0) continue;
        Int q = floor_div(m[i][c], m[r][c]);
        add_row(m, i, r, q);
        add_row(g, i, r, q);
        if (m[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (m[r][c] == 0) continue;
    if (m[r][c] < 0) {
      negate_row(m, r);
      negate_row(g, r);
    }
    for (std::size_t i = 0; i < r; ++i) {
      Int q = floor_div(m[i][c], m[r][c]);
      if (q == 0) continue;
      add_row(m, i, r, q);
      add_row(g, i, r, q);
    }
    ++r;
  }
  return g;
}

ZMat unimodular_inverse(const ZMat& u) {
  QMat q(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (const auto& z : u[i]) q[i].emplace_back(z);
  auto inv = inverse(q);
  if (!inv) throw InternalError("matrix is not invertible");
  ZMat out(u.size(), ZVec(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) {
      if ((*inv)[i][j].get_den() != 1) throw InternalError("matrix is not unimodular");
      out[i][j] = (*inv)[i][j].get_num();
    }
  return out;
}

}  // namespace toric
