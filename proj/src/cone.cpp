#include "toric/cone.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace toric {

namespace {

constexpr std::size_t kMaxDim = 8;

QMat dedupe_primitive(const QMat& gens) {
  QMat out;
  for (const auto& g : gens) {
    if (is_zero(g)) continue;
    QVec p = primitive(g);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

std::size_t rank_of_rows(const QMat& rows, const std::vector<std::size_t>& idx) {
  QMat m;
  for (auto i : idx) m.push_back(rows[i]);
  return rank(m);
}

// Combinations of k elements out of n, lexicographic.
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Vertices of {x : A x <= b, E x = e}, exact.
QMat rational_vertices(const QMat& a, const QVec& b, const QMat& e, const QVec& ev, std::size_t dim) {
  QMat out;
  const std::size_t need = dim - e.size();
  for_each_subset(a.size(), need, [&](const std::vector<std::size_t>& idx) {
    QMat m = e;
    QVec rhs = ev;
    for (auto i : idx) {
      m.push_back(a[i]);
      rhs.push_back(b[i]);
    }
    auto x = solve(m, rhs);
    if (!x) return;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (dot(a[k], *x) > b[k]) return;
    if (std::find(out.begin(), out.end(), *x) == out.end()) out.push_back(*x);
  });
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

std::size_t affine_dim(const QMat& pts) {
  if (pts.size() <= 1) return 0;
  QMat diffs;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    QVec d(pts[i].size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = pts[i][j] - pts[0][j];
    diffs.push_back(d);
  }
  return rank(diffs);
}

}  // namespace

RationalCone make_cone(QMat generators, std::size_t ambient_dim) {
  for (const auto& g : generators)
    if (g.size() != ambient_dim) throw ValidationError("cone generator has wrong dimension");
  RationalCone c;
  c.ambient_dim = ambient_dim;
  c.generators = std::move(generators);
  return c;
}

RationalCone dual_cone(const RationalCone& cone) {
  const std::size_t r = cone.ambient_dim;
  if (r > kMaxDim) throw BudgetError("cone dimension " + std::to_string(r) + " exceeds the supported maximum of 8");
  QMat lin;
  for (std::size_t i = 0; i < r; ++i) {
    QVec e(r, 0);
    e[i] = 1;
    lin.push_back(e);
  }
  QMat rays;
  QMat done;  // processed inequalities

  for (const auto& g0 : cone.generators) {
    if (is_zero(g0)) continue;
    const QVec g = primitive(g0);
    std::size_t pivot = lin.size();
    for (std::size_t i = 0; i < lin.size(); ++i)
      if (dot(lin[i], g) != 0) {
        pivot = i;
        break;
      }
    done.push_back(g);
    if (pivot < lin.size()) {
      QVec l0 = lin[pivot];
      Rat s0 = dot(l0, g);
      if (s0 < 0) {
        for (auto& x : l0) x = -x;
        s0 = -s0;
      }
      lin.erase(lin.begin() + static_cast<std::ptrdiff_t>(pivot));
      auto reduce = [&](QVec& v) {
        Rat f = dot(v, g) / s0;
        if (f == 0) return;
        for (std::size_t k = 0; k < r; ++k) v[k] -= f * l0[k];
      };
      for (auto& l : lin) reduce(l);
      for (auto& ray : rays) {
        reduce(ray);
        ray = primitive(ray);
      }
      rays.push_back(primitive(l0));
      continue;
    }

    const std::size_t lin_dim = lin.size();
    std::vector<std::size_t> pos, neg, zero;
    std::vector<Rat> val(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
      val[i] = dot(rays[i], g);
      (val[i] > 0 ? pos : val[i] < 0 ? neg : zero).push_back(i);
    }
    auto tight = [&](const QVec& v) {
      std::vector<std::size_t> z;
      for (std::size_t j = 0; j + 1 < done.size(); ++j)
        if (dot(v, done[j]) == 0) z.push_back(j);
      return z;
    };
    std::vector<std::vector<std::size_t>> zsets(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) zsets[i] = tight(rays[i]);

    QMat next;
    for (auto i : pos) next.push_back(rays[i]);
    for (auto i : zero) next.push_back(rays[i]);
    for (auto p : pos)
      for (auto n : neg) {
        std::vector<std::size_t> common;
        std::set_intersection(zsets[p].begin(), zsets[p].end(), zsets[n].begin(), zsets[n].end(),
                              std::back_inserter(common));
        if (rank_of_rows(done, common) + 2 + lin_dim != r) continue;
        QVec v(r);
        for (std::size_t k = 0; k < r; ++k) v[k] = val[p] * rays[n][k] - val[n] * rays[p][k];
        v = primitive(v);
        if (std::find(next.begin(), next.end(), v) == next.end()) next.push_back(v);
      }
    rays = std::move(next);
  }

  QMat gens = rays;
  for (const auto& l : lin) {
    QVec p = primitive(l);
    QVec m = p;
    for (auto& x : m) x = -x;
    gens.push_back(p);
    gens.push_back(m);
  }
  std::sort(gens.begin(), gens.end(), lex_less);
  RationalCone out;
  out.ambient_dim = r;
  out.generators = gens;
  return out;
}

QMat facets_of(const RationalCone& cone) {
  if (cone.facets) return *cone.facets;
  return dual_cone(cone).generators;
}

RationalCone with_facets(RationalCone cone) {
  if (!cone.facets) cone.facets = dual_cone(cone).generators;
  return cone;
}

bool contains(const RationalCone& cone, const QVec& point) {
  const QMat f = facets_of(cone);
  return std::all_of(f.begin(), f.end(), [&](const QVec& fv) { return dot(fv, point) >= 0; });
}

QMat extremal_rays(const RationalCone& cone) {
  QMat gens = dedupe_primitive(cone.generators);
  for (std::size_t i = 0; i < gens.size();) {
    QMat others;
    for (std::size_t j = 0; j < gens.size(); ++j)
      if (j != i) others.push_back(gens[j]);
    if (!others.empty() && contains(make_cone(others, cone.ambient_dim), gens[i])) {
      gens.erase(gens.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return gens;
}

RationalCone intersect(const RationalCone& a, const RationalCone& b) {
  if (a.ambient_dim != b.ambient_dim) throw ValidationError("cones live in different spaces");
  QMat f = facets_of(a);
  QMat fb = facets_of(b);
  f.insert(f.end(), fb.begin(), fb.end());
  RationalCone out = dual_cone(make_cone(dedupe_primitive(f), a.ambient_dim));
  out.facets = dedupe_primitive(f);
  return out;
}

Rat nu_simplicial(const QMat& generators, const QVec& omega) {
  if (generators.size() != omega.size()) throw ValidationError("simplicial cone needs rho generators");
  Rat det = determinant(generators);
  if (det == 0) throw ValidationError("simplicial cone generators are dependent");
  Rat denom = 1;
  for (const auto& w : generators) {
    Rat p = dot(omega, w);
    if (p <= 0) throw ValidationError("omega is not interior to the dual of the cone (pairing " + p.get_str() + ")");
    denom *= p;
  }
  return abs(det) / denom;
}

QMat cross_section_polytope(const RationalCone& dual_eff, const QVec& omega) {
  QMat out;
  for (const auto& r : extremal_rays(dual_eff)) {
    Rat p = dot(omega, r);
    if (p <= 0) throw ValidationError("omega is not interior to the effective cone");
    QVec v = r;
    for (auto& x : v) x /= p;
    out.push_back(v);
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

Decomposition triangulate(const QMat& vertices) {
  std::vector<int> order(vertices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return lex_less(vertices[static_cast<std::size_t>(a)], vertices[static_cast<std::size_t>(b)]);
  });
  return triangulate_in_order(vertices, order);
}

Decomposition triangulate_in_order(const QMat& vertices, const std::vector<int>& order) {
  if (vertices.empty()) throw ValidationError("cannot triangulate an empty polytope");
  const std::size_t r = vertices[0].size();
  Decomposition dec;
  dec.vertices = vertices;
  auto vec = [&](int i) -> const QVec& { return vertices[static_cast<std::size_t>(i)]; };

  std::vector<std::vector<int>> simplices;
  QMat span;
  for (int idx : order) {
    const QVec& x = vec(idx);
    if (simplices.empty()) {
      simplices.push_back({idx});
      span.push_back(x);
      continue;
    }
    QMat extended = span;
    extended.push_back(x);
    if (rank(extended) > span.size()) {
      for (auto& s : simplices) s.push_back(idx);
      span.push_back(x);
      continue;
    }
    // Completion of the current span to a basis of the whole space.
    QMat completion;
    {
      QMat basis = span;
      for (std::size_t e = 0; e < r && basis.size() < r; ++e) {
        QVec u(r, 0);
        u[e] = 1;
        basis.push_back(u);
        if (rank(basis) == basis.size()) {
          completion.push_back(u);
        } else {
          basis.pop_back();
        }
      }
    }
    auto orient = [&](const std::vector<int>& facet, const QVec& p) {
      QMat m;
      for (int f : facet) m.push_back(vec(f));
      m.push_back(p);
      for (const auto& c : completion) m.push_back(c);
      return sgn(determinant(m));
    };
    std::map<std::vector<int>, std::vector<std::pair<std::size_t, int>>> facets;
    for (std::size_t si = 0; si < simplices.size(); ++si) {
      const auto& s = simplices[si];
      for (std::size_t k = 0; k < s.size(); ++k) {
        std::vector<int> f;
        for (std::size_t j = 0; j < s.size(); ++j)
          if (j != k) f.push_back(s[j]);
        std::sort(f.begin(), f.end());
        facets[f].emplace_back(si, s[k]);
      }
    }
    std::vector<std::vector<int>> added;
    for (const auto& [f, owners] : facets) {
      if (owners.size() != 1) continue;
      int so = orient(f, vec(owners[0].second));
      int sx = orient(f, x);
      if (so * sx < 0) {
        auto s = f;
        s.push_back(idx);
        added.push_back(s);
      }
    }
    simplices.insert(simplices.end(), added.begin(), added.end());
  }
  if (span.size() != r) throw ValidationError("degenerate polytope: vertices do not span the ambient space");
  for (auto& s : simplices) {
    std::sort(s.begin(), s.end());
    QMat gens;
    for (int i : s) gens.push_back(vec(i));
    dec.cones.push_back(gens);
  }
  dec.simplices = simplices;
  return dec;
}

Decomposition effective_decomposition(const RationalCone& dual_eff, const QVec& omega) {
  return triangulate(cross_section_polytope(dual_eff, omega));
}

Decomposition decomposition_from_cones(const std::vector<QMat>& cones) {
  Decomposition dec;
  for (const auto& c : cones) {
    std::vector<int> s;
    for (const auto& v : c) {
      auto it = std::find(dec.vertices.begin(), dec.vertices.end(), v);
      if (it == dec.vertices.end()) {
        dec.vertices.push_back(v);
        s.push_back(static_cast<int>(dec.vertices.size() - 1));
      } else {
        s.push_back(static_cast<int>(it - dec.vertices.begin()));
      }
    }
    dec.simplices.push_back(s);
    dec.cones.push_back(c);
  }
  return dec;
}

Int factorial(unsigned n) {
  Int f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

Rat alpha_from(const Decomposition& decomposition, const QVec& omega) {
  Rat sum = 0;
  for (const auto& c : decomposition.cones) sum += nu_simplicial(c, omega);
  return sum / Rat(factorial(static_cast<unsigned>(omega.size() - 1)));
}

Rat alpha(const RationalCone& eff, const QVec& omega) {
  return alpha_from(effective_decomposition(dual_cone(eff), omega), omega);
}

HyperbolaPolytope hyperbola_polytope(const QMat& alphas, const QVec& weights) {
  const std::size_t rho = weights.size();
  if (rho == 0) throw ValidationError("hyperbola polytope needs at least one weight");
  if (alphas.empty()) throw ValidationError("hyperbola polytope needs at least one constraint");
  for (const auto& w : weights)
    if (w <= 0) throw ValidationError("weights must be positive");
  HyperbolaPolytope hp;
  hp.alphas = alphas;
  hp.weights = weights;
  QMat a;
  QVec b;
  for (const auto& row : alphas) {
    if (row.size() != rho) throw ValidationError("constraint row has wrong length");
    QVec c(rho);
    for (std::size_t i = 0; i < rho; ++i) {
      if (row[i] < 0) throw ValidationError("alpha values must be nonnegative");
      c[i] = row[i] / weights[i];
    }
    hp.rows.push_back(c);
    a.push_back(c);
    b.emplace_back(1);
  }
  for (std::size_t i = 0; i < rho; ++i) {
    bool bounded = std::any_of(alphas.begin(), alphas.end(), [i](const QVec& row) { return row[i] > 0; });
    if (!bounded) throw ValidationError("polytope is unbounded in coordinate " + std::to_string(i));
    QVec c(rho, 0);
    c[i] = -1;
    a.push_back(c);
    b.emplace_back(0);
  }
  hp.vertices = rational_vertices(a, b, {}, {}, rho);
  // All constraints have right-hand side 1 > 0, so a neighbourhood of 0 in the orthant is inside P.
  if (affine_dim(hp.vertices) != rho) throw ValidationError("polytope is contained in a hyperplane");
  hp.top_value = 0;
  for (const auto& v : hp.vertices) {
    Rat s = std::accumulate(v.begin(), v.end(), Rat(0));
    if (s > hp.top_value) hp.top_value = s;
  }
  for (const auto& v : hp.vertices)
    if (std::accumulate(v.begin(), v.end(), Rat(0)) == hp.top_value) hp.face.push_back(v);
  hp.face_dim = static_cast<int>(affine_dim(hp.face));
  for (std::size_t i = 0; i < rho; ++i) {
    bool off = std::any_of(hp.face.begin(), hp.face.end(), [i](const QVec& v) { return v[i] > 0; });
    if (!off) throw ValidationError("top face lies in the coordinate hyperplane t_" + std::to_string(i) + " = 0");
  }
  return hp;
}

Rat hyperplane_volume(const QMat& vertices) {
  if (vertices.empty()) return 0;
  const std::size_t rho = vertices[0].size();
  if (rho == 1) return 1;
  if (affine_dim(vertices) < rho - 1) return 0;
  Decomposition dec = triangulate(vertices);
  const QVec normal(rho, Rat(1));
  const Rat norm2 = Rat(static_cast<long>(rho));
  Rat total = 0;
  for (const auto& s : dec.cones) {
    QMat m;
    for (std::size_t i = 1; i < s.size(); ++i) {
      QVec e(rho);
      for (std::size_t j = 0; j < rho; ++j) e[j] = s[i][j] - s[0][j];
      m.push_back(e);
    }
    m.push_back(normal);
    total += abs(determinant(m));
  }
  return total / (norm2 * Rat(factorial(static_cast<unsigned>(rho - 1))));
}

CPValue c_P(const HyperbolaPolytope& hp) {
  const std::size_t rho = hp.weights.size();
  if (hp.face_dim != static_cast<int>(rho) - 1)
    throw ValidationError("general c_P out of scope: top face has dimension " + std::to_string(hp.face_dim) +
                          " < " + std::to_string(rho - 1));
  CPValue out;
  out.exact = hyperplane_volume(hp.face);
  QMat a = hp.rows;
  QVec b(hp.rows.size(), Rat(1));
  for (std::size_t i = 0; i < rho; ++i) {
    QVec c(rho, 0);
    c[i] = -1;
    a.push_back(c);
    b.emplace_back(0);
  }
  const QMat eq{QVec(rho, Rat(1))};
  for (long den : {10L, 100L, 1000L}) {
    Rat delta(1, den);
    Rat level = hp.top_value - delta;
    if (level <= 0) throw ValidationError("section level is not positive");
    QMat verts = rational_vertices(a, b, eq, {level}, rho);
    out.sections.emplace_back(delta, hyperplane_volume(verts));
  }
  const Rat& v1 = out.sections[0].second;
  const Rat& v2 = out.sections[1].second;
  const Rat& v3 = out.sections[2].second;
  Rat r1 = (10 * v2 - v1) / 9;
  Rat r2 = (10 * v3 - v2) / 9;
  out.extrapolated = (100 * r2 - r1) / 99;
  return out;
}

QMat k_delta_cone(const QMat& face_generators, const QVec& h, const Rat& delta) {
  if (face_generators.empty()) throw ValidationError("face needs generators");
  const std::size_t r = h.size();
  if (face_generators.size() + 1 != r) throw ValidationError("face needs rho - 1 generators");
  if (rank(face_generators) != face_generators.size()) throw ValidationError("face generators are dependent");
  QMat with_h = face_generators;
  with_h.push_back(h);
  if (rank(with_h) != r) throw ValidationError("h lies in the span of the face");
  if (delta <= 0) throw ValidationError("delta must be positive");
  QVec apex(r, 0);
  for (const auto& v : face_generators)
    for (std::size_t i = 0; i < r; ++i) apex[i] += v[i];
  for (std::size_t i = 0; i < r; ++i) apex[i] += delta * h[i];
  QMat out = face_generators;
  out.push_back(apex);
  return out;
}

nlohmann::json constants_fragment(const Decomposition& decomposition, const QVec& omega,
                                  const std::optional<CPValue>& cp) {
  nlohmann::json j;
  j["alpha"] = to_string(alpha_from(decomposition, omega));
  j["nu_per_cone"] = nlohmann::json::array();
  for (const auto& c : decomposition.cones) j["nu_per_cone"].push_back(to_string(nu_simplicial(c, omega)));
  if (cp) {
    j["c_P_exact"] = to_string(cp->exact);
    j["c_P_sections"] = nlohmann::json::array();
    for (const auto& [d, v] : cp->sections) j["c_P_sections"].push_back({{"delta", to_string(d)}, {"volume", to_string(v)}});
    j["c_P_extrapolated"] = to_string(cp->extrapolated);
    j["volume_normalization"] = "determinant volume over the squared norm of the normal (1,...,1)";
  }
  return j;
}

}  // namespace toric
