#include <doctest.h>

#include "toric/lattice.hpp"
#include "toric/smith.hpp"

using namespace toric;

namespace {

ZMat zmat(const IMat& m) {
  ZMat out;
  for (const auto& r : m) {
    ZVec row;
    for (auto x : r) row.emplace_back(static_cast<long>(x));
    out.push_back(row);
  }
  return out;
}

FanErrorKind error_kind(const std::string& doc) {
  try {
    parse_fan(doc);
  } catch (const FanError& e) {
    return e.kind;
  }
  FAIL("document was accepted");
  return FanErrorKind::Malformed;
}

}  // namespace

TEST_CASE("smith form diagonalizes with unimodular transforms") {
  ZMat a = zmat({{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}});
  SmithForm sf = smith_normal_form(a);
  CHECK(mul(mul(sf.left, a), sf.right) == sf.diagonal);
  auto div = sf.elementary_divisors();
  CHECK(div[0] == 2);
  CHECK(div[1] == 6);
  CHECK(div[2] == 12);
  CHECK(abs(determinant(sf.left)) == 1);
  CHECK(abs(determinant(sf.right)) == 1);
}

TEST_CASE("hermite transform gives echelon rows") {
  ZMat a = zmat({{-1, -1, 0, 0}, {1, 1, 1, 1}});
  ZMat g = hermite_transform(a);
  ZMat h = mul(g, a);
  CHECK(h == zmat({{1, 1, 0, 0}, {0, 0, 1, 1}}));
}

TEST_CASE("parse_fan accepts the standard fans") {
  Fan p1 = parse_fan(R"({"dim":1,"rays":[[1],[-1]],"max_cones":[[0],[1]]})");
  CHECK(p1.dim == 1);
  Fan p2 = parse_fan(R"({"dim":2,"rays":[[1,0],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2],[2,0]],"name":"P2"})");
  CHECK(p2.max_cones.size() == 3);
  CHECK(p2.name == "P2");
}

TEST_CASE("parse_fan reports distinct failures") {
  CHECK(error_kind(R"({"dim":2,"rays":[[1,0],[0,1]],"max_cones":[[0,1]]})") == FanErrorKind::Incomplete);
  CHECK(error_kind(R"({"dim":2,"rays":[[1,0]})") == FanErrorKind::Malformed);
  CHECK(error_kind(R"({"dim":2,"rays":[[2,0],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2],[2,0]]})") ==
        FanErrorKind::NonPrimitive);
  CHECK(error_kind(R"({"dim":2,"rays":[[1,0],[1,2],[-1,0],[0,-1]],"max_cones":[[0,1],[1,2],[2,3],[3,0]]})") ==
        FanErrorKind::Singular);
  CHECK(error_kind(R"({"dim":1,"rays":[[1],[1]],"max_cones":[[0],[1]]})") == FanErrorKind::Duplicate);
}

TEST_CASE("validate_fan diagnostics") {
  CHECK(validate_fan(builtin_fan("P2")).ok());
  Fan bad = make_fan(2, {{2, 0}, {0, 1}, {-1, -1}}, {{0, 1}, {1, 2}, {0, 2}});
  auto diag = validate_fan(bad);
  bool found = false;
  for (const auto& c : diag.checks)
    if (c.check == "primitive" && c.index == 0 && !c.ok) found = true;
  CHECK(found);
  Fan sing = make_fan(2, {{1, 0}, {1, 2}, {-1, 0}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  auto d2 = validate_fan(sing);
  bool det2 = false;
  for (const auto& c : d2.checks)
    if (c.check == "smooth" && c.index == 0 && !c.ok && c.detail == "determinant 2") det2 = true;
  CHECK(det2);
  // Two turns around the origin: every facet is shared, but directions are covered twice.
  Fan twice = make_fan(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}},
                       {{0, 4}, {1, 4}, {1, 5}, {2, 5}, {2, 3}, {0, 3}});
  CHECK(validate_fan(twice).ok());
  for (const auto& name : builtin_fan_names()) CHECK(validate_fan(builtin_fan(name)).ok());
}

TEST_CASE("class lattice of the standard fans") {
  auto p2 = class_lattice(builtin_fan("P2"));
  CHECK(p2.rho == 1);
  CHECK(p2.classes == std::vector<IVec>{{1}, {1}, {1}});
  CHECK(p2.anticanonical == IVec{3});
  auto p1 = class_lattice(builtin_fan("P1"));
  CHECK(p1.classes == std::vector<IVec>{{1}, {1}});
  CHECK(p1.anticanonical == IVec{2});
  auto q = class_lattice(builtin_fan("P1xP1"));
  CHECK(q.rho == 2);
  CHECK(q.classes == std::vector<IVec>{{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  CHECK(q.anticanonical == IVec{2, 2});
  CHECK(q.eff_generators.size() == 2);
}

TEST_CASE("class lattice invariants on every builtin fan") {
  for (const auto& name : builtin_fan_names()) {
    Fan f = builtin_fan(name);
    auto lat = class_lattice(f);
    CHECK(lat.rho == static_cast<int>(f.rays.size()) - f.dim);
    CHECK(mul(lat.projection, ray_matrix(f)) == ZMat(static_cast<std::size_t>(lat.rho), ZVec(static_cast<std::size_t>(f.dim), 0)));
    IVec sum(static_cast<std::size_t>(lat.rho), 0);
    for (const auto& c : lat.classes)
      for (std::size_t i = 0; i < c.size(); ++i) sum[i] += c[i];
    CHECK(sum == lat.anticanonical);
  }
}

TEST_CASE("cone representatives") {
  Fan p1 = builtin_fan("P1");
  CHECK(cone_representative(p1, {1, 0}, 0) == IVec{0, 1});
  CHECK(cone_representative(p1, {1, 0}, 1) == IVec{1, 0});
  Fan f1 = builtin_fan("F1");
  auto lat = class_lattice(f1);
  for (std::size_t s = 0; s < f1.max_cones.size(); ++s) {
    CHECK(cone_representative(f1, IVec(4, 0), static_cast<int>(s)) == IVec(4, 0));
    IVec a{2, -1, 3, 1};
    IVec r = cone_representative(f1, a, static_cast<int>(s));
    CHECK(lat.class_of(r) == lat.class_of(a));
    for (int i : f1.max_cones[s]) CHECK(r[static_cast<std::size_t>(i)] == 0);
  }
}

TEST_CASE("nef classes") {
  Fan p2 = builtin_fan("P2");
  CHECK(is_nef(class_lattice(p2), p2, {1}));
  CHECK(is_nef(class_lattice(p2), p2, {0}));
  CHECK_FALSE(is_nef(class_lattice(p2), p2, {-1}));
  Fan q = builtin_fan("P1xP1");
  CHECK_FALSE(is_nef(class_lattice(q), q, {1, -1}));
  CHECK(is_nef(class_lattice(q), q, {1, 1}));
}

TEST_CASE("primitive collections") {
  CHECK(primitive_collections(builtin_fan("P2")) == std::vector<Cone>{{0, 1, 2}});
  CHECK(primitive_collections(builtin_fan("P1xP1")) == std::vector<Cone>{{0, 1}, {2, 3}});
  CHECK(primitive_collections(builtin_fan("F1")) == std::vector<Cone>{{0, 2}, {1, 3}});
  CHECK(all_cones(builtin_fan("P2")).size() == 7);
}
