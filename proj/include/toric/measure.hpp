#pragma once

#include <vector>

#include "toric/posreal.hpp"

namespace toric {

// Divided difference exp[z_0, ..., z_k], stable for repeated nodes.
double exp_divided_difference(const std::vector<double>& z);

// Integral of exp(<omega, x>) over a simplex given by its vertices.
double integrate_exp_simplex(const std::vector<std::vector<double>>& vertices, const std::vector<double>& omega);

// Integral of exp(<omega, a>) over the polytope {<normal_k, a> <= log bound_k}; 0 when not full-dimensional.
double integrate_exp_polytope(const std::vector<LogConstraint>& constraints, std::size_t dim, const QVec& omega);

}  // namespace toric
