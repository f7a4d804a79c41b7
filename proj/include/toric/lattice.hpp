#pragma once

#include "toric/fan.hpp"

namespace toric {

// Picard lattice of a smooth complete fan, in a fixed integral basis.
struct ClassLattice {
  int rho = 0;
  std::size_t num_rays = 0;
  ZMat projection;  // rho x n, divisor vector -> class
  ZMat lift;        // n x rho, projection * lift = identity
  std::vector<IVec> classes;       // [D_lambda]
  IVec anticanonical;              // sum of classes
  std::vector<IVec> eff_generators;  // distinct classes, in ray order

  IVec class_of(const IVec& divisor) const;
  IVec divisor_of(const IVec& cls) const;  // some representative of cls
};

ClassLattice class_lattice(const Fan& fan);

// a + div(chi^m) with m chosen so the result vanishes on the rays of maximal cone sigma.
IVec cone_representative(const Fan& fan, const IVec& a, int sigma);

// The character m solving <m, v> = -a_v on the rays of sigma.
QVec cone_character(const Fan& fan, const IVec& a, int sigma);

bool is_nef(const ClassLattice& lattice, const Fan& fan, const IVec& cls);

// Rows of the ray matrix as an n x d integer matrix.
ZMat ray_matrix(const Fan& fan);

}  // namespace toric
