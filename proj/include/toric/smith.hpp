#pragma once

#include "toric/arith.hpp"

namespace toric {

// U * A * V = D with U, V unimodular and D diagonal, d_i | d_{i+1}, d_i >= 0.
struct SmithForm {
  ZMat diagonal;  // same shape as A
  ZMat left;      // U, rows x rows
  ZMat right;     // V, cols x cols
  std::vector<Int> elementary_divisors() const;
};

SmithForm smith_normal_form(const ZMat& a);

// Row-style Hermite normal form of a full-row-rank matrix: returns G unimodular with
// G * A in echelon form, positive pivots, entries above each pivot reduced into [0, pivot).
ZMat hermite_transform(const ZMat& a);

ZMat identity_z(std::size_t n);
ZMat mul(const ZMat& a, const ZMat& b);
// Inverse of a unimodular integer matrix.
ZMat unimodular_inverse(const ZMat& u);

}  // namespace toric
