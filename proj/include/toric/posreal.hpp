#pragma once

#include <string>
#include <utility>
#include <vector>

#include "toric/arith.hpp"

namespace toric {

// A positive real of the form prod base_k ^ exponent_k with rational bases and exponents.
// Comparisons are exact.
class PosReal {
 public:
  PosReal() = default;  // 1
  explicit PosReal(const Rat& base);
  static PosReal power(const Rat& base, const Rat& exponent);

  PosReal& operator*=(const PosReal& other);
  PosReal operator*(const PosReal& other) const;
  PosReal inverse() const;
  PosReal pow(const Rat& exponent) const;

  double log() const;
  double value() const;

  // Sign of log(*this): -1, 0 or 1, decided exactly.
  int compare_one() const;

  bool is_rational() const;
  Rat as_rational() const;  // requires is_rational()

  const std::vector<std::pair<Rat, Rat>>& factors() const { return factors_; }
  std::string to_string() const;

 private:
  void add_factor(const Rat& base, const Rat& exponent);
  std::vector<std::pair<Rat, Rat>> factors_;
};

int compare(const PosReal& a, const PosReal& b);
inline bool operator<=(const PosReal& a, const PosReal& b) { return compare(a, b) <= 0; }
inline bool operator<(const PosReal& a, const PosReal& b) { return compare(a, b) < 0; }

// floor of the real number, exactly.
Int floor_of(const PosReal& x);

Rat rat_pow(const Rat& base, long exponent);
Int lcm_of_denominators(const QVec& v);

// Constraint <normal, a> <= log(bound) on a vector a.
struct LogConstraint {
  QVec normal;
  PosReal bound;
};

struct LogVertex {
  std::vector<PosReal> coords;  // exp of each coordinate
  std::vector<std::size_t> tight;  // indices of constraints tight at the vertex
  std::vector<double> logs() const;
};

// Vertices of {a : <normal_k, a> <= log bound_k}, exactly.
std::vector<LogVertex> log_vertices(const std::vector<LogConstraint>& constraints, std::size_t dim);

// True when {a : <normal_k, a> <= 0 for all k} is {0}.
bool is_bounded(const std::vector<LogConstraint>& constraints, std::size_t dim);

// exp(sup <c, a>) over the vertices.
PosReal exp_sup(const std::vector<LogVertex>& vertices, const QVec& c);
// exp(<c, a>) at one vertex.
PosReal exp_pairing(const LogVertex& v, const QVec& c);

}  // namespace toric
