#include <doctest.h>

#include "oracle.hpp"
#include "toric/counting.hpp"

using namespace toric;

namespace {

const TorsorModel& model_of(const std::string& name) {
  static std::map<std::string, TorsorModel> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, make_model(builtin_fan(name))).first;
  return it->second;
}

EnumOptions one_thread() {
  EnumOptions o;
  o.threads = 1;
  return o;
}

Region class_bound(const QVec& cls, const Rat& gamma, const Rat& s = 0) {
  Region r;
  r.constraints.push_back({cls, gamma, s});
  return r;
}

QMat quadrant() { return {{1, 0}, {0, 1}}; }

}  // namespace

TEST_CASE("coordinate bounds") {
  const auto& p2 = model_of("P2");
  auto m = coordinate_bounds(p2, anticanonical_region(p2), Rat(1000));
  CHECK(m == std::vector<Int>{10, 10, 10});
  m = coordinate_bounds(p2, anticanonical_region(p2), Rat(999));
  CHECK(m == std::vector<Int>{9, 9, 9});
  const auto& q = model_of("P1xP1");
  m = coordinate_bounds(q, anticanonical_region(q), Rat(10000));
  CHECK(m == std::vector<Int>{100, 100, 100, 100});
  CHECK(coordinate_bounds(q, anticanonical_region(q), Rat(1)) == std::vector<Int>{1, 1, 1, 1});
  Region open;
  open.constraints.push_back({{1, -1}, Rat(2), Rat(0)});
  CHECK_THROWS_AS(coordinate_bounds(q, open, Rat(1)), ValidationError);
}

TEST_CASE("P1 anticanonical counts") {
  const auto& p1 = model_of("P1");
  CHECK(count_points(p1, anticanonical_region(p1), Rat(100), one_thread()) == 126);
  CHECK(count_points(p1, anticanonical_region(p1), Rat(1), one_thread()) == 2);
  CHECK(count_points(p1, anticanonical_region(p1), Rat(1, 2), one_thread()) == 0);
}

TEST_CASE("enumeration streams canonical points in order") {
  const auto& p1 = model_of("P1");
  std::vector<IVec> seen;
  auto total = enumerate(p1, anticanonical_region(p1), Rat(4), [&](const PointView& p) {
    for (const auto& s : p.signed_points()) seen.push_back(s.coords);
  });
  CHECK(total == seen.size());
  CHECK(seen == std::vector<IVec>{{1, 1}, {1, -1}, {1, 2}, {1, -2}, {2, 1}, {2, -1}});
  for (const auto& y : seen) CHECK(is_canonical_signs(p1, y));
}

TEST_CASE("threads do not change counts") {
  const auto& q = model_of("P1xP1");
  EnumOptions three;
  three.threads = 3;
  CHECK(count_points(q, anticanonical_region(q), Rat(2000), three) ==
        count_points(q, anticanonical_region(q), Rat(2000), one_thread()));
}

TEST_CASE("oracle equivalence on small anticanonical balls") {
  for (const std::string name : {"P1", "P2", "P1xP1", "F1"}) {
    const auto& m = model_of(name);
    for (long B : {1L, 2L, 7L, 30L, 100L, 200L}) {
      CAPTURE(name);
      CAPTURE(B);
      CHECK(count_points(m, anticanonical_region(m), Rat(B), one_thread()) == oracle::count_anticanonical(m, B));
    }
  }
}

TEST_CASE("oracle equivalence on a general region") {
  const auto& f1 = model_of("F1");
  Region r;
  r.constraints.push_back({{1, 0}, Rat(10), Rat(0)});
  r.constraints.push_back({{0, 1}, Rat(9, 2), Rat(0)});
  r.constraints.push_back({{-1, 1}, Rat(1, 2), Rat(0)});
  // Classes of the rays are (1,0), (0,1), (1,0), (1,1), and |y_l| <= H_{[D_l]}.
  const std::vector<std::int64_t> box{10, 4, 10, 45};
  auto c = count_points(f1, r, Rat(1), one_thread());
  CHECK(c > 0);
  CHECK(c == oracle::count(f1, r, Rat(1), box, Int(10 * 4 * 10 * 45)));
}

TEST_CASE("candidate guard") {
  const auto& q = model_of("P1xP1");
  EnumOptions tiny;
  tiny.max_candidates = 1000;
  CHECK_THROWS_AS(count_points(q, anticanonical_region(q), Rat(100000), tiny), BudgetError);
}

TEST_CASE("counts grow with B") {
  const auto& f1 = model_of("F1");
  std::uint64_t prev = 0;
  for (long B : {1L, 5L, 20L, 80L, 320L}) {
    auto c = count_points(f1, anticanonical_region(f1), Rat(B));
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("translated polyhedron on P1") {
  const auto& p1 = model_of("P1");
  Region d1;
  d1.constraints.push_back({{1}, Rat(2), Rat(0)});
  d1.constraints.push_back({{-1}, Rat(1), Rat(0)});
  auto r = count_translated_polyhedron(p1, {d1}, {Rat(1, 2)}, Rat(400));
  // 20 <= max(y0, y1) <= 40 on coprime positive pairs, doubled by the sign orbit.
  std::uint64_t direct = 0;
  for (int a = 1; a <= 40; ++a)
    for (int b = 1; b <= 40; ++b)
      if (std::gcd(a, b) == 1 && std::max(a, b) >= 20) direct += 2;
  CHECK(r.count == direct);
  CHECK(r.nu == doctest::Approx(1.5));
  CHECK(r.scale == doctest::Approx(400));
  CHECK_THROWS_AS(count_translated_polyhedron(p1, {d1}, {Rat(0)}, Rat(10)), ValidationError);
}

TEST_CASE("translated polyhedron unions count each point once") {
  const auto& p1 = model_of("P1");
  Region a, b;
  a.constraints = {{{1}, Rat(2), Rat(0)}, {{-1}, Rat(1), Rat(0)}};
  b.constraints = {{{1}, Rat(3), Rat(0)}, {{-1}, Rat(2, 3), Rat(0)}};
  Region whole;
  whole.constraints = {{{1}, Rat(3), Rat(0)}, {{-1}, Rat(1), Rat(0)}};
  auto u = count_translated_polyhedron(p1, {a, b}, {Rat(1, 2)}, Rat(100));
  auto w = count_translated_polyhedron(p1, {whole}, {Rat(1, 2)}, Rat(100));
  CHECK(u.count == w.count);
  CHECK(u.nu == doctest::Approx(w.nu));
  CHECK(w.nu == doctest::Approx(4.0));
}

TEST_CASE("degenerate polyhedron has zero measure") {
  const auto& p1 = model_of("P1");
  Region d;
  d.constraints = {{{1}, Rat(2), Rat(0)}, {{-1}, Rat(1, 2), Rat(0)}};
  auto r = count_translated_polyhedron(p1, {d}, {Rat(1, 2)}, Rat(100));
  CHECK(r.nu == 0);
}

TEST_CASE("simplex cone data") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  CHECK(c.duals == IMat{{1, 0}, {0, 1}});
  CHECK(c.weights == QVec{2, 2});
  CHECK(c.nu_minus == Rat(1, 4));
  auto l1 = make_simplex_cone(q, {{1, 0}, {1, 1}});
  CHECK(l1.duals == IMat{{1, -1}, {0, 1}});
  CHECK(l1.weights == QVec{2, 4});
  CHECK(l1.nu_minus == Rat(1, 8));
  CHECK_THROWS_AS(make_simplex_cone(q, {{1, 0}, {-1, 1}}), ValidationError);
  auto p2 = model_of("P2");
  CHECK(make_simplex_cone(p2, {{1}}).nu_minus == Rat(1, 3));
}

TEST_CASE("count_box on P1xP1") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  auto r = count_box(q, c, {1, 1}, {2, 2}, {10, 10});
  // 10 <= max(y0, y1) <= 20 in each factor.
  std::uint64_t pairs = 0;
  for (int a = 1; a <= 20; ++a)
    for (int b = 1; b <= 20; ++b)
      if (std::gcd(a, b) == 1 && std::max(a, b) >= 10) ++pairs;
  CHECK(r.count == 4 * pairs * pairs);
  CHECK(r.nu == doctest::Approx(9.0 / 4));
  CHECK(r.scale == doctest::Approx(10000));
  auto unit = count_box(q, c, {1, 1}, {1, 1}, {1, 1});
  CHECK(unit.nu == 0);
  CHECK(unit.count == 4);
  CHECK_THROWS_AS(count_box(q, c, {2, 1}, {1, 1}, {1, 1}), ValidationError);
}

TEST_CASE("box decomposition is seeded") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  auto a = build_box_decomposition(c, 0), b = build_box_decomposition(c, 0);
  CHECK(a.b == b.b);
  CHECK(a.b != build_box_decomposition(c, 1).b);
  for (const auto& x : a.b) {
    CHECK(x > Rat(13, 10));
    CHECK(x < 2);
    CHECK(x.get_den() > 1000000);
  }
}

TEST_CASE("cone box counts and histogram") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  auto r = count_cone_box(q, c, {30, 30}, 0);
  std::uint64_t pairs = 0;
  for (int a = 1; a <= 30; ++a)
    for (int b = 1; b <= 30; ++b)
      if (std::gcd(a, b) == 1) ++pairs;
  CHECK(r.count == 4 * pairs * pairs);
  std::uint64_t hist = 0;
  for (const auto& [n, k] : r.histogram) hist += k;
  CHECK(hist == r.count);
  CHECK(r.empty_beyond_bound);
  CHECK(r.tail_nu <= r.tail_bound);
  // Each box count equals a direct count of its region.
  for (const auto& [n, k] : r.histogram) {
    Region box = box_region(c, r.decomposition, n, {30, 30}, std::nullopt);
    box.cone = as_cone(c);
    CHECK(count_points(q, box, Rat(1)) == k);
  }
  CHECK(count_cone_box(q, c, {1, 1}, 0).count == 4);
  CHECK(count_cone_box(q, c, {Rat(1, 2), 5}, 0).count == 0);
}

TEST_CASE("wall collisions trigger a redraw") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  // The point (1, 3, 1, 1) has H_{L_1} = 3; with B_1 = 12 the step 4 puts it on the first wall.
  auto dec = box_decomposition_from({4, Rat(3, 2)});
  CHECK_THROWS_AS(box_index(dec, {12, 12}, {std::log(3.0), 0.0}, [](std::size_t i) { return Rat(i == 0 ? 3 : 1); }),
                  WallCollision);
  dec.seed = 5;
  auto r = count_cone_box(q, c, {12, 12}, dec);
  CHECK(r.attempts >= 2);
  CHECK(r.decomposition.b != dec.b);
  CHECK(r.count == count_cone_box(q, c, {12, 12}, 5).count);
}

TEST_CASE("box index") {
  auto dec = box_decomposition_from({2, 2});
  auto n = box_index(dec, {16, 16}, {std::log(16.0), std::log(3.0)},
                     [](std::size_t i) { return Rat(i == 0 ? 16 : 3); });
  CHECK(n == std::vector<long>{1, 3});
}

TEST_CASE("bad slabs") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  QVec B{40, 40};
  auto dec = build_box_decomposition(c, 0);
  // Box n = (1, 1) sits at heights near B, far from h(L_k) <= 0.
  CHECK(count_bad_slab(q, c, dec, 0, {1, 1}, B).count == 0);
  auto cb = count_cone_box(q, c, B, dec);
  const auto& d = cb.decomposition;
  std::uint64_t slabs = 0, boxes = 0;
  for (long n0 = 1; n0 <= cb.max_index[0]; ++n0)
    for (long n1 = 1; n1 <= cb.max_index[1]; ++n1) {
      std::vector<long> n{n0, n1};
      boxes += count_points(q, box_region(c, d, n, B, std::nullopt), Rat(1));
      for (std::size_t k = 0; k < 2; ++k) {
        auto s = count_bad_slab(q, c, d, k, n, B);
        CHECK(s.shape > 0);
        slabs += s.count;
      }
    }
  CHECK(slabs + cb.count >= boxes);
}

TEST_CASE("f tables on P1") {
  const auto& p1 = model_of("P1");
  auto c = make_simplex_cone(p1, {{1}});
  auto t = tabulate_f(p1, c, {10});
  // H_{L} = max(y0, y1) is an integer, so both tables agree.
  CHECK(t.floor.counts == t.ceil.counts);
  CHECK(t.floor.box_sum({10}) == count_points(p1, class_bound({1}, 10), Rat(1)));
  CHECK(t.floor.at({1}) == 2);
  CHECK(t.floor.at({2}) == 4);
}

TEST_CASE("f tables with rational heights") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, {{1, 0}, {1, 1}});
  auto t = tabulate_f(q, c, {12, 12});
  Region cone_only;
  cone_only.cone = as_cone(c);
  for (std::int64_t b : {1, 3, 6, 11}) {
    Region r = cone_only;
    for (std::size_t i = 0; i < 2; ++i) r.constraints.push_back({to_q(c.duals[i]), Rat(b), Rat(0)});
    const auto exact = count_points(q, r, Rat(1));
    Region r1 = cone_only;
    for (std::size_t i = 0; i < 2; ++i) r1.constraints.push_back({to_q(c.duals[i]), Rat(b + 1), Rat(0)});
    const auto above = count_points(q, r1, Rat(1));
    CHECK(t.ceil.box_sum({b, b}) == exact);
    CHECK(t.floor.box_sum({b, b}) >= exact);
    CHECK(t.floor.box_sum({b, b}) <= above);
  }
  CHECK(t.floor.total() >= t.ceil.total());
}

TEST_CASE("hyperbola sums sandwich the cone count") {
  const auto& q = model_of("P1xP1");
  const std::vector<std::pair<QMat, std::vector<std::int64_t>>> cases{{quadrant(), {40, 40}},
                                                                      {QMat{{1, 0}, {1, 1}}, {32, 6}}};
  for (const auto& [gens, caps] : cases) {
    auto c = make_simplex_cone(q, gens);
    auto t = tabulate_f(q, c, caps);
    QMat alpha{c.weights};
    Region r = anticanonical_region(q);
    r.cone = as_cone(c);
    for (long B : {1L, 10L, 100L, 1000L}) {
      const auto exact = count_points(q, r, Rat(B));
      CHECK(hyperbola_sum(t.ceil, alpha, Rat(B)) <= exact);
      CHECK(exact <= hyperbola_sum(t.floor, alpha, Rat(B)));
    }
    CHECK(hyperbola_sum(t.floor, alpha, Rat(1, 2)) == 0);
    CHECK_THROWS_AS(hyperbola_sum(t.floor, alpha, Rat(100000)), ValidationError);
  }
}

TEST_CASE("hyperbola sum over two constraints") {
  const auto& q = model_of("P1xP1");
  auto c = make_simplex_cone(q, quadrant());
  auto t = tabulate_f(q, c, {30, 30});
  QMat alphas{{2, 2}, {Rat(3), Rat(1, 2)}};
  std::uint64_t brute = 0;
  for (std::int64_t a = 1; a <= 30; ++a)
    for (std::int64_t b = 1; b <= 30; ++b)
      if (a * a * b * b <= 400 && a * a * a * a * a * a * b <= 160000) brute += t.floor.at({a, b});
  CHECK(hyperbola_sum(t.floor, alphas, Rat(400)) == brute);
}

TEST_CASE("inclusion-exclusion agrees with the direct count") {
  const auto& q = model_of("P1xP1");
  std::vector<QMat> split{{{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}};
  for (long B : {1L, 50L, 1000L}) {
    auto d = count_anticanonical(q, split, Rat(B), AnticanonicalMode::Direct);
    CHECK(count_anticanonical(q, split, Rat(B), AnticanonicalMode::InclusionExclusion) == d);
    CHECK(count_anticanonical(q, {quadrant()}, Rat(B), AnticanonicalMode::InclusionExclusion) == d);
  }
  const auto& p2 = model_of("P2");
  CHECK(count_anticanonical(p2, {{{1}}}, Rat(1000), AnticanonicalMode::InclusionExclusion) ==
        count_anticanonical(p2, {{{1}}}, Rat(1000), AnticanonicalMode::Direct));
  const auto& f1 = model_of("F1");
  auto dec = effective_decomposition(f1.dual_eff, f1.omega);
  CHECK(count_anticanonical(f1, dec.cones, Rat(500), AnticanonicalMode::InclusionExclusion) ==
        count_anticanonical(f1, dec.cones, Rat(500), AnticanonicalMode::Direct));
}
