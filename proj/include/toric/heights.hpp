#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toric/cone.hpp"
#include "toric/lattice.hpp"
#include "toric/posreal.hpp"

namespace toric {

// Fan, Picard lattice and the per-cone integer data used to evaluate heights on Cox coordinates.
struct TorsorModel {
  Fan fan;
  ClassLattice lattice;
  std::size_t n = 0;  // rays
  std::size_t d = 0;
  int rho = 0;
  // select[s] is d x n: the coordinates of -u_inf in the basis of cone s are -select[s] * log|y|.
  std::vector<IMat> select;
  // exponents[s] is rho x n: row i is the representative of basis class e_i vanishing on cone s.
  std::vector<IMat> exponents;
  std::vector<Cone> collections;  // primitive collections
  // Sign action: rows of the class projection mod 2, reduced; pivots get positive signs.
  std::vector<std::vector<std::uint8_t>> sign_rows;
  std::vector<std::size_t> sign_pivots;
  std::vector<std::uint32_t> canonical_patterns;  // bit l set = coordinate l negative
  QVec omega;  // anticanonical class
  RationalCone eff;       // in Pic
  RationalCone dual_eff;  // in Pic dual, with facets

  std::uint64_t sign_multiplicity() const { return canonical_patterns.size(); }
};

TorsorModel make_model(const Fan& fan);

struct TorsorPoint {
  IVec coords;
};

struct Place {
  std::int64_t prime = 0;  // 0 is the archimedean place
  static Place infinity() { return {}; }
  static Place at(std::int64_t p);
  bool archimedean() const { return prime == 0; }
};

bool is_prime(std::int64_t p);

// Cox-coordinate coprimality: for each prime, the coordinates it divides lie in one cone.
bool is_coprime(const TorsorModel& model, const IVec& y);
TorsorPoint canonicalize(const TorsorModel& model, const IVec& raw);
bool is_canonical_signs(const TorsorModel& model, const IVec& y);

struct Tropical {
  bool archimedean = false;
  IVec lattice;              // u_p
  std::vector<double> real;  // u_inf
};

Tropical tropicalize(const TorsorModel& model, const TorsorPoint& point, const Place& place);

// prod |y_l|^{e_l}, exactly.
Rat torsor_monomial(const IVec& y, const IVec& e);

// Smallest-index maximal cone containing an integer or floating vector.
int select_cone(const Fan& fan, const IVec& u);
int select_cone(const Fan& fan, const std::vector<double>& u);
// Smallest-index maximal cone containing -u_inf, decided exactly on the coordinates.
int archimedean_cone(const TorsorModel& model, const IVec& y);

// log H_{e_i} at the archimedean place for real coordinates, given log|y_l|.
std::vector<double> archimedean_log_heights(const TorsorModel& model, const std::vector<double>& log_abs);

// |chi^{m}(t)|_v with m the character of representative a on the cone selected by -u_v.
Rat local_height(const TorsorModel& model, const TorsorPoint& point, const Place& place, const IVec& a);

struct MultiHeight {
  std::vector<Rat> values;  // H_{e_i}
  std::vector<double> logs() const;
};

// Product of local heights over infinity and every prime dividing a coordinate.
MultiHeight multi_height_by_places(const TorsorModel& model, const TorsorPoint& point);
// Same values from the torsor formula prod |y_l|^{exponent}.
MultiHeight multi_height(const TorsorModel& model, const TorsorPoint& point);
// Height of a class given by an arbitrary divisor representative, multiplied over places.
Rat height_by_places(const TorsorModel& model, const TorsorPoint& point, const IVec& a);

Rat height_of_class(const MultiHeight& mh, const IVec& cls);

struct RegionConstraint {
  QVec cls;    // q
  Rat gamma;   // > 0
  Rat s = 0;   // exponent of B
};

// {a : <q_m, a> <= log(gamma_m) + s_m log(B)}, optionally intersected with a cone.
struct Region {
  std::vector<RegionConstraint> constraints;
  std::optional<RationalCone> cone;
};

Region parse_region(const nlohmann::json& j, int rho);
nlohmann::json region_to_json(const Region& region);

bool region_membership(const MultiHeight& mh, const Region& region, const Rat& B);
// Single constraint prod H_i^{q_i} <= gamma * B^s, exactly.
bool constraint_holds(const MultiHeight& mh, const RegionConstraint& c, const Rat& B);

// Log-space polytope of region at parameter B, intersected with the dual effective cone.
std::vector<LogConstraint> region_polytope(const TorsorModel& model, const Region& region, const Rat& B,
                                           bool with_dual_eff = true);

void write_point_csv_header(std::ostream& os, const TorsorModel& model, const Region* region);
void write_point_csv(std::ostream& os, const TorsorModel& model, const TorsorPoint& p, const MultiHeight& mh,
                     const Region* region, const Rat& B);

}  // namespace toric
