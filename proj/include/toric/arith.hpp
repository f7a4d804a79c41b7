#pragma once

// Exact integer/rational linear algebra shared by every module.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toric {

using Int = mpz_class;
using Rat = mpq_class;

using IVec = std::vector<std::int64_t>;
using IMat = std::vector<IVec>;
using ZVec = std::vector<Int>;
using ZMat = std::vector<ZVec>;
using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;

// Input or precondition failure; the CLI maps it to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A compute guard (candidate tuples, table size, exponent size) tripped; exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An identity that must hold for valid inputs did not.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

std::string to_string(const Rat& r);
std::string to_string(const Int& z);
Rat parse_rational(std::string_view text);

QVec to_q(const IVec& v);
QMat to_q(const IMat& m);
IVec to_ivec(const ZVec& v);

Rat dot(const QVec& a, const QVec& b);
std::int64_t dot(const IVec& a, const IVec& b);

// Determinant of a square rational matrix (fraction-free elimination).
Rat determinant(QMat m);
Int determinant(const ZMat& m);
std::int64_t determinant(const IMat& m);

std::size_t rank(QMat m);

// Inverse of a square matrix; nullopt when singular.
std::optional<QMat> inverse(const QMat& m);

// Solves m x = b for square nonsingular m.
std::optional<QVec> solve(const QMat& m, const QVec& b);

QMat transpose(const QMat& m);
IMat transpose(const IMat& m);
QVec mul(const QMat& m, const QVec& v);
QMat mul(const QMat& a, const QMat& b);

// Basis of the null space {x : m x = 0}; m given as rows.
QMat null_space(QMat m, std::size_t cols);

// Scales a nonzero rational vector to the primitive integer vector on its ray.
QVec primitive(const QVec& v);

// Lexicographic order on rational vectors.
bool lex_less(const QVec& a, const QVec& b);

bool is_zero(const QVec& v);

}  // namespace toric
