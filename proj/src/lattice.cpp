#include "toric/lattice.hpp"

#include <algorithm>

#include "toric/smith.hpp"

namespace toric {

ZMat ray_matrix(const Fan& fan) {
  ZMat v;
  for (const auto& r : fan.rays) {
    ZVec row;
    for (auto x : r) row.emplace_back(static_cast<long>(x));
    v.push_back(row);
  }
  return v;
}

IVec ClassLattice::class_of(const IVec& divisor) const {
  IVec out(static_cast<std::size_t>(rho), 0);
  for (int i = 0; i < rho; ++i) {
    Int s = 0;
    for (std::size_t l = 0; l < num_rays; ++l) s += projection[static_cast<std::size_t>(i)][l] * divisor[l];
    out[static_cast<std::size_t>(i)] = s.get_si();
  }
  return out;
}

IVec ClassLattice::divisor_of(const IVec& cls) const {
  IVec out(num_rays, 0);
  for (std::size_t l = 0; l < num_rays; ++l) {
    Int s = 0;
    for (int i = 0; i < rho; ++i) s += lift[l][static_cast<std::size_t>(i)] * cls[static_cast<std::size_t>(i)];
    out[l] = s.get_si();
  }
  return out;
}

ClassLattice class_lattice(const Fan& fan) {
  const ZMat v = ray_matrix(fan);
  const std::size_t n = v.size();
  const auto d = static_cast<std::size_t>(fan.dim);
  if (n <= d) throw ValidationError("a complete fan needs more rays than its dimension");

  // U V W = S: the last n - d rows of U span the relations' annihilator.
  SmithForm sf = smith_normal_form(v);
  for (std::size_t i = 0; i < d; ++i)
    if (sf.diagonal[i][i] != 1)
      throw InternalError("divisor class group has torsion (elementary divisor " + sf.diagonal[i][i].get_str() + ")");

  ZMat proj(sf.left.begin() + static_cast<std::ptrdiff_t>(d), sf.left.end());
  ZMat u_inv = unimodular_inverse(sf.left);
  ZMat lift(n, ZVec(n - d));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t j = 0; j < n - d; ++j) lift[l][j] = u_inv[l][d + j];

  // Hermite-normalize the basis so it is canonical for a given ray order.
  ZMat g = hermite_transform(proj);
  proj = mul(g, proj);
  lift = mul(lift, unimodular_inverse(g));

  ClassLattice lat;
  lat.rho = static_cast<int>(n - d);
  lat.num_rays = n;
  lat.projection = proj;
  lat.lift = lift;

  ZMat check = mul(proj, v);
  for (const auto& row : check)
    for (const auto& x : row)
      if (x != 0) throw InternalError("projection does not annihilate the ray relations");
  ZMat id = mul(proj, lift);
  if (id != identity_z(n - d)) throw InternalError("class lift is not a section of the projection");

  lat.anticanonical.assign(n - d, 0);
  for (std::size_t l = 0; l < n; ++l) {
    IVec e(n, 0);
    e[l] = 1;
    IVec c = lat.class_of(e);
    lat.classes.push_back(c);
    for (std::size_t i = 0; i < n - d; ++i) lat.anticanonical[i] += c[i];
    if (std::find(lat.eff_generators.begin(), lat.eff_generators.end(), c) == lat.eff_generators.end())
      lat.eff_generators.push_back(c);
  }
  return lat;
}

QVec cone_character(const Fan& fan, const IVec& a, int sigma) {
  const Cone& c = fan.max_cones.at(static_cast<std::size_t>(sigma));
  QMat m;
  QVec rhs;
  for (int i : c) {
    m.push_back(to_q(fan.rays[static_cast<std::size_t>(i)]));
    rhs.emplace_back(static_cast<long>(-a[static_cast<std::size_t>(i)]));
  }
  auto sol = solve(m, rhs);
  if (!sol) throw InternalError("maximal cone rays are not a basis");
  return *sol;
}

IVec cone_representative(const Fan& fan, const IVec& a, int sigma) {
  QVec m = cone_character(fan, a, sigma);
  IVec out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) {
    Rat v = Rat(static_cast<long>(a[l])) + dot(m, to_q(fan.rays[l]));
    if (v.get_den() != 1) throw InternalError("non-integral cone representative");
    out[l] = v.get_num().get_si();
  }
  return out;
}

bool is_nef(const ClassLattice& lattice, const Fan& fan, const IVec& cls) {
  IVec a = lattice.divisor_of(cls);
  for (std::size_t s = 0; s < fan.max_cones.size(); ++s) {
    IVec r = cone_representative(fan, a, static_cast<int>(s));
    if (std::any_of(r.begin(), r.end(), [](std::int64_t x) { return x < 0; })) return false;
  }
  return true;
}

}  // namespace toric
