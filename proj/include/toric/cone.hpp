#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "toric/arith.hpp"

namespace toric {

struct RationalCone {
  std::size_t ambient_dim = 0;
  QMat generators;
  std::optional<QMat> facets;  // functionals f with <f, g> >= 0 on the cone
};

RationalCone make_cone(QMat generators, std::size_t ambient_dim);

// Generators of {phi : <phi, g> >= 0 for all generators g}, by double description.
// Lineality directions l appear as the pair l, -l.
RationalCone dual_cone(const RationalCone& cone);

// Facet functionals of the cone (the generators of its dual).
QMat facets_of(const RationalCone& cone);
RationalCone with_facets(RationalCone cone);

bool contains(const RationalCone& cone, const QVec& point);
QMat extremal_rays(const RationalCone& cone);
RationalCone intersect(const RationalCone& a, const RationalCone& b);

// nu(-Lambda) = |det W| / prod <omega, w_i> for Lambda = cone(w_1..w_rho).
Rat nu_simplicial(const QMat& generators, const QVec& omega);

// Vertices r / <omega, r> over the extremal rays r of the cone, sorted lexicographically.
QMat cross_section_polytope(const RationalCone& dual_eff, const QVec& omega);

struct Decomposition {
  QMat vertices;                      // cross-section vertices
  std::vector<std::vector<int>> simplices;  // indices into vertices
  std::vector<QMat> cones;            // generators of each Lambda_j
};

// Placing triangulation, points inserted in lexicographic order.
Decomposition triangulate(const QMat& vertices);
// Same construction with an explicit insertion order.
Decomposition triangulate_in_order(const QMat& vertices, const std::vector<int>& order);

// Decomposition of the dual effective cone from its cross-section.
Decomposition effective_decomposition(const RationalCone& dual_eff, const QVec& omega);
Decomposition decomposition_from_cones(const std::vector<QMat>& cones);

Rat alpha_from(const Decomposition& decomposition, const QVec& omega);
// alpha(X) from the effective cone (generators in Pic) and the anticanonical class.
Rat alpha(const RationalCone& eff, const QVec& omega);

Int factorial(unsigned n);

struct HyperbolaPolytope {
  QMat alphas;   // alphas[k][i]
  QVec weights;  // omega_i > 0
  QMat rows;     // alphas[k][i] / omega_i, constraints rows[k] . t <= 1
  QMat vertices;
  QMat face;     // vertices maximizing sum t_i
  Rat top_value;
  int face_dim = 0;
};

HyperbolaPolytope hyperbola_polytope(const QMat& alphas, const QVec& weights);

struct CPValue {
  Rat exact;
  std::vector<std::pair<Rat, Rat>> sections;  // (delta, volume of the section at sum t = a - delta)
  Rat extrapolated;
};

CPValue c_P(const HyperbolaPolytope& polytope);

// (rho-1)-volume of a polytope on the hyperplane sum t = const, normalized by the hyperplane normal.
Rat hyperplane_volume(const QMat& vertices);

QMat k_delta_cone(const QMat& face_generators, const QVec& h, const Rat& delta);

nlohmann::json constants_fragment(const Decomposition& decomposition, const QVec& omega,
                                  const std::optional<CPValue>& cp);

}  // namespace toric
