#include "toric/arith.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace toric {

std::string to_string(const Rat& r) { return r.get_str(); }
std::string to_string(const Int& z) { return z.get_str(); }

Rat parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t first = 0;
  while (first < s.size() && std::isspace(static_cast<unsigned char>(s[first]))) ++first;
  s = s.substr(first);
  if (s.empty()) throw ValidationError("empty rational literal");
  if (s.front() == '+') s.erase(s.begin());
  auto valid_int = [](std::string_view t) {
    if (t.empty()) return false;
    std::size_t i = (t.front() == '-') ? 1 : 0;
    if (i == t.size()) return false;
    return std::all_of(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den.front() == '-')
    throw ValidationError("malformed rational literal '" + s + "'");
  Int d{den};
  if (d == 0) throw ValidationError("zero denominator in '" + s + "'");
  Rat r{Int{num}, d};
  r.canonicalize();
  return r;
}

QVec to_q(const IVec& v) {
  QVec out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(static_cast<long>(x));
  return out;
}

QMat to_q(const IMat& m) {
  QMat out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(to_q(row));
  return out;
}

IVec to_ivec(const ZVec& v) {
  IVec out;
  out.reserve(v.size());
  for (const auto& z : v) {
    if (!z.fits_slong_p()) throw BudgetError("integer does not fit in 64 bits: " + z.get_str());
    out.push_back(z.get_si());
  }
  return out;
}

Rat dot(const QVec& a, const QVec& b) {
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::int64_t dot(const IVec& a, const IVec& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rat determinant(QMat m) {
  const std::size_t n = m.size();
  Rat det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      Rat f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

Int determinant(const ZMat& m) {
  QMat q(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (const auto& z : m[i]) q[i].emplace_back(z);
  Rat d = determinant(std::move(q));
  return d.get_num();
}

std::int64_t determinant(const IMat& m) {
  Rat d = determinant(to_q(m));
  Int n = d.get_num();
  if (!n.fits_slong_p()) throw BudgetError("determinant overflows 64 bits");
  return n.get_si();
}

std::size_t rank(QMat m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      Rat f = m[i][c] / m[r][c];
      for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[r][k];
    }
    ++r;
  }
  return r;
}

std::optional<QMat> inverse(const QMat& m) {
  const std::size_t n = m.size();
  QMat a(n, QVec(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j];
    a[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    Rat inv = 1 / a[c][c];
    for (auto& x : a[c]) x *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rat f = a[r][c];
      for (std::size_t k = 0; k < 2 * n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  QMat out(n, QVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = a[i][n + j];
  return out;
}

std::optional<QVec> solve(const QMat& m, const QVec& b) {
  auto inv = inverse(m);
  if (!inv) return std::nullopt;
  return mul(*inv, b);
}

QMat transpose(const QMat& m) {
  if (m.empty()) return {};
  QMat t(m[0].size(), QVec(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

IMat transpose(const IMat& m) {
  if (m.empty()) return {};
  IMat t(m[0].size(), IVec(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

QVec mul(const QMat& m, const QVec& v) {
  QVec out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = dot(m[i], v);
  return out;
}

QMat mul(const QMat& a, const QMat& b) {
  QMat bt = transpose(b);
  QMat out(a.size(), QVec(bt.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < bt.size(); ++j) out[i][j] = dot(a[i], bt[j]);
  return out;
}

QMat null_space(QMat m, std::size_t cols) {
  // Reduced row echelon form, then one basis vector per free column.
  const std::size_t rows = m.size();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    Rat inv = 1 / m[r][c];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rat f = m[i][c];
      for (std::size_t k = 0; k < cols; ++k) m[i][k] -= f * m[r][k];
    }
    pivots.push_back(c);
    ++r;
  }
  QMat basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
    QVec v(cols);
    v[free] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

QVec primitive(const QVec& v) {
  Int l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  Int g = 0;
  for (const auto& x : v) {
    Int num = x.get_num() * (l / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), num.get_mpz_t());
  }
  if (g == 0) return v;
  QVec out;
  out.reserve(v.size());
  for (const auto& x : v) out.emplace_back(Int(x.get_num() * (l / x.get_den()) / g));
  return out;
}

bool lex_less(const QVec& a, const QVec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool is_zero(const QVec& v) {
  return std::all_of(v.begin(), v.end(), [](const Rat& x) { return x == 0; });
}

}  // namespace toric
