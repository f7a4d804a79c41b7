#include <doctest.h>

#include <cmath>
#include <random>

#include "toric/heights.hpp"
#include "toric/measure.hpp"

using namespace toric;

namespace {

// Same cone up to positive scaling of generators.
bool same_rays(QMat a, QMat b) {
  auto normalize = [](QMat& m) {
    for (auto& v : m) {
      Rat s = 0;
      for (const auto& x : v) s += x < 0 ? Rat(-x) : x;
      for (auto& x : v) x /= s;
    }
    std::sort(m.begin(), m.end());
  };
  normalize(a);
  normalize(b);
  return a == b;
}

}  // namespace

TEST_CASE("dual cones") {
  CHECK(same_rays(dual_cone(make_cone({{1, 0}, {0, 1}}, 2)).generators, {{1, 0}, {0, 1}}));
  CHECK(same_rays(dual_cone(make_cone({{1}}, 1)).generators, {{1}}));
  CHECK(same_rays(dual_cone(make_cone({{1, 0}, {1, 2}}, 2)).generators, {{0, 1}, {2, -1}}));
  QMat cube{{1, 0, 0}, {0, 1, 0}, {1, 1, 1}, {1, 0, 1}};
  auto c = make_cone(cube, 3);
  CHECK(same_rays(dual_cone(dual_cone(c)).generators, extremal_rays(c)));
  QMat lower = {{1, 2, 0}, {-1, 1, 0}, {0, 0, 1}};
  auto l = make_cone(lower, 3);
  CHECK(same_rays(dual_cone(dual_cone(l)).generators, lower));
  CHECK_THROWS_AS(dual_cone(make_cone({{1, 0, 0, 0, 0, 0, 0, 0, 0}}, 9)), BudgetError);
}

TEST_CASE("cone membership") {
  auto q = make_cone({{1, 0}, {0, 1}}, 2);
  CHECK(contains(q, {1, 1}));
  CHECK_FALSE(contains(q, {-1, 0}));
  CHECK(contains(make_cone({{1, 0}, {1, 2}}, 2), {1, 1}));
  CHECK_FALSE(contains(make_cone({{1, 0}, {1, 2}}, 2), {0, 1}));
}

TEST_CASE("extremal rays") {
  CHECK(same_rays(extremal_rays(make_cone({{1, 0}, {0, 1}, {1, 1}}, 2)), {{1, 0}, {0, 1}}));
  CHECK(same_rays(extremal_rays(make_cone({{1, 0}, {1, 2}}, 2)), {{1, 0}, {1, 2}}));
  CHECK(same_rays(extremal_rays(make_cone({{1, 0}, {1, 0}, {0, 1}, {0, 1}}, 2)), {{1, 0}, {0, 1}}));
}

TEST_CASE("nu of simplicial cones") {
  CHECK(nu_simplicial({{1, 0}, {0, 1}}, {2, 2}) == Rat(1, 4));
  CHECK(nu_simplicial({{1, 0}, {1, 2}}, {2, 2}) == Rat(1, 6));
  CHECK(nu_simplicial({{1}}, {3}) == Rat(1, 3));
  CHECK_THROWS_AS(nu_simplicial({{1, 0}, {-1, 1}}, {2, 1}), ValidationError);
  // Scaling a generator.
  CHECK(nu_simplicial({{3, 0}, {1, 2}}, {2, 2}) == Rat(1, 6));
  CHECK(nu_simplicial({{1, 0}, {Rat(1, 5), Rat(2, 5)}}, {2, 2}) == Rat(1, 6));
  // Additivity under a split through the apex.
  QMat w{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  QVec omega{2, 3, 5};
  QVec mid{1, 1, 0};
  Rat whole = nu_simplicial(w, omega);
  Rat parts = nu_simplicial({w[0], mid, w[2]}, omega) + nu_simplicial({mid, w[1], w[2]}, omega);
  CHECK(whole == parts);
}

TEST_CASE("nu agrees with a numerical integral") {
  QMat w{{1, 0}, {1, 2}};
  QVec omega{2, 2};
  // Riemann sum in the original coordinates.
  double h = 0.01, sum = 0;
  for (double y0 = -h / 2; y0 > -12; y0 -= h)
    for (double y1 = -h / 2; y1 > -12; y1 -= h) {
      // y = -(s (1,0) + t (1,2)): t = -y1/2, s = -y0 + y1/2.
      double t = -y1 / 2, s = -y0 + y1 / 2;
      if (s >= 0 && t >= 0) sum += std::exp(2 * y0 + 2 * y1) * h * h;
    }
  CHECK(sum == doctest::Approx(1.0 / 6).epsilon(0.01));
}

TEST_CASE("cross-section polytopes") {
  auto quadrant = with_facets(make_cone({{1, 0}, {0, 1}}, 2));
  CHECK(cross_section_polytope(quadrant, {2, 2}) == QMat{{0, Rat(1, 2)}, {Rat(1, 2), 0}});
  CHECK(cross_section_polytope(with_facets(make_cone({{1}}, 1)), {3}) == QMat{{Rat(1, 3)}});
  CHECK(cross_section_polytope(with_facets(make_cone({{1}}, 1)), {2}) == QMat{{Rat(1, 2)}});
  CHECK_THROWS_AS(cross_section_polytope(with_facets(make_cone({{1, 0}, {-1, 1}}, 2)), {1, 1}),
                  ValidationError);
}

TEST_CASE("placing triangulations") {
  auto seg = triangulate({{0, Rat(1, 2)}, {Rat(1, 2), 0}});
  CHECK(seg.simplices.size() == 1);
  CHECK(triangulate({{Rat(1, 3)}}).cones.size() == 1);
  QMat square{{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}};
  auto d = triangulate(square);
  REQUIRE(d.simplices.size() == 2);
  int shared = 0;
  for (int a : d.simplices[0])
    for (int b : d.simplices[1]) shared += a == b;
  CHECK(shared == 2);
  QVec omega{1, 1, 3};
  CHECK(alpha_from(d, omega) == alpha_from(triangulate_in_order(square, {3, 1, 2, 0}), omega));
  CHECK(alpha_from(d, omega) == alpha_from(triangulate_in_order(square, {1, 0, 3, 2}), omega));
}

TEST_CASE("alpha of the standard fans") {
  auto alpha_of = [](const char* name) {
    auto m = make_model(builtin_fan(name));
    return alpha(m.eff, m.omega);
  };
  CHECK(alpha_of("P1") == Rat(1, 2));
  CHECK(alpha_of("P2") == Rat(1, 3));
  CHECK(alpha_of("P1xP1") == Rat(1, 4));
  CHECK(alpha_of("F1") == Rat(1, 6));
  CHECK(alpha_of("P3") == Rat(1, 4));
}

TEST_CASE("alpha is basis independent") {
  auto m = make_model(builtin_fan("F1"));
  // Unimodular change of Pic basis (c0, c1) -> (c0 + c1, c1).
  QMat gens;
  for (const auto& c : m.eff.generators) gens.push_back({c[0] + c[1], c[1]});
  QVec omega{m.omega[0] + m.omega[1], m.omega[1]};
  CHECK(alpha(make_cone(gens, 2), omega) == alpha(m.eff, m.omega));
}

TEST_CASE("alpha agrees with Monte Carlo") {
  for (const char* name : {"P1xP1", "F1", "P2"}) {
    auto m = make_model(builtin_fan(name));
    std::size_t rho = static_cast<std::size_t>(m.rho);
    double L = 16;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, L);
    QMat facets = *m.dual_eff.facets;
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      std::vector<double> y(rho);
      for (auto& v : y) v = u(rng);
      bool in = true;
      for (const auto& f : facets) {
        double t = 0;
        for (std::size_t j = 0; j < rho; ++j) t += f[j].get_d() * y[j];
        if (t < 0) in = false;
      }
      double val = 0;
      if (in) {
        double e = 0;
        for (std::size_t j = 0; j < rho; ++j) e += m.omega[j].get_d() * y[j];
        val = std::exp(-e) * std::pow(L, static_cast<double>(rho));
      }
      s += val;
      s2 += val * val;
    }
    double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    double a = mean / factorial(static_cast<unsigned>(rho - 1)).get_d();
    double ref = alpha(m.eff, m.omega).get_d();
    CHECK_MESSAGE(std::fabs(a - ref) <= 3 * se / factorial(static_cast<unsigned>(rho - 1)).get_d() + 1e-12,
                  name);
  }
}

TEST_CASE("hyperbola polytopes") {
  auto single = hyperbola_polytope({{2, 2, 2}}, {2, 2, 2});
  CHECK(single.top_value == 1);
  CHECK(single.face_dim == 2);
  auto box = hyperbola_polytope({{1, 0}, {0, 1}}, {1, 1});
  CHECK(box.top_value == 2);
  CHECK(box.face_dim == 0);
  auto line = hyperbola_polytope({{1}}, {1});
  CHECK(line.top_value == 1);
  CHECK(line.face_dim == 0);
  CHECK_THROWS_AS(hyperbola_polytope({{1, 0}}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(hyperbola_polytope({{1, 1}}, {1, 0}), ValidationError);
}

TEST_CASE("c_P") {
  auto p3 = c_P(hyperbola_polytope({{2, 2, 2}}, {2, 2, 2}));
  CHECK(p3.exact == Rat(1, 2));
  CHECK(std::fabs(p3.extrapolated.get_d() - 0.5) < 1e-6);
  auto p1 = c_P(hyperbola_polytope({{2}}, {2}));
  CHECK(p1.exact == 1);
  auto p2 = c_P(hyperbola_polytope({{2, 2}}, {2, 2}));
  CHECK(p2.exact == 1);
  for (const auto& [delta, vol] : p2.sections) CHECK(vol == (1 - delta) * p2.exact);
  for (const auto& [delta, vol] : p3.sections) CHECK(vol == (1 - delta) * (1 - delta) * p3.exact);
  CHECK_THROWS_AS(c_P(hyperbola_polytope({{1, 0}, {0, 1}}, {1, 1})), ValidationError);
}

TEST_CASE("K_delta cones") {
  auto k = k_delta_cone({{1, 1}}, {1, 0}, Rat(1, 10));
  CHECK(k == QMat{{1, 1}, {Rat(11, 10), 1}});
  QVec omega{2, 2};
  Rat a = nu_simplicial(k, omega);
  Rat b = nu_simplicial(k_delta_cone({{1, 1}}, {1, 0}, Rat(1, 100)), omega);
  CHECK(b < a);
  CHECK_THROWS_AS(k_delta_cone({{1, 1}}, {2, 2}, Rat(1, 10)), ValidationError);
}

TEST_CASE("constants fragment") {
  auto m = make_model(builtin_fan("P1xP1"));
  auto d = effective_decomposition(m.dual_eff, m.omega);
  auto j = constants_fragment(d, m.omega, c_P(hyperbola_polytope({{2, 2}}, {2, 2})));
  CHECK(j["alpha"] == "1/4");
  CHECK(j["nu_per_cone"].size() == d.cones.size());
  CHECK(j["c_P_exact"] == "1");
}

TEST_CASE("exponential integrals") {
  CHECK(exp_divided_difference({0.0}) == doctest::Approx(1.0));
  CHECK(exp_divided_difference({0.0, 1.0}) == doctest::Approx(std::exp(1.0) - 1));
  CHECK(exp_divided_difference({1.0, 1.0}) == doctest::Approx(std::exp(1.0)));
  CHECK(exp_divided_difference({0.0, 1e-9}) == doctest::Approx(1.0));
  // nu([0, log 2]) with omega = 2 is (4 - 1) / 2.
  std::vector<LogConstraint> interval{{{1}, PosReal(2)}, {{-1}, PosReal(1)}};
  CHECK(integrate_exp_polytope(interval, 1, {2}) == doctest::Approx(1.5));
  // [0, log 3]^2 with omega = (1, 1).
  std::vector<LogConstraint> sq{{{1, 0}, PosReal::power(3, 1)},
                                {{0, 1}, PosReal::power(3, 1)},
                                {{-1, 0}, PosReal(1)},
                                {{0, -1}, PosReal(1)}};
  double l3 = std::log(3.0);
  CHECK(integrate_exp_polytope(sq, 2, {1, 1}) == doctest::Approx((3 - 1.0) * (3 - 1.0)));
  CHECK(integrate_exp_simplex({{0, 0}, {l3, 0}, {0, l3}}, {0, 0}) == doctest::Approx(l3 * l3 / 2));
}

TEST_CASE("positive reals") {
  PosReal r = PosReal::power(2, Rat(1, 2));
  CHECK(compare(r * r, PosReal(2)) == 0);
  CHECK(compare(PosReal::power(2, Rat(1, 3)), PosReal::power(3, Rat(1, 4))) < 0);
  CHECK(floor_of(PosReal::power(10, Rat(1, 2))) == 3);
  CHECK(floor_of(PosReal::power(16, Rat(1, 2))) == 4);
  CHECK(rat_pow(Rat(2, 3), -2) == Rat(9, 4));
  CHECK(lcm_of_denominators({Rat(1, 4), Rat(5, 6)}) == 12);
  CHECK(PosReal::power(4, Rat(1, 2)).is_rational() == false);
  CHECK_THROWS_AS(PosReal(Rat(0)), ValidationError);
}
