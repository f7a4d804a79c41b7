#include <doctest.h>

#include <cmath>

#include "toric/constants.hpp"

using namespace toric;

namespace {

constexpr double kZeta2 = 1.6449340668482264;
constexpr double kZeta3 = 1.2020569031595943;

}  // namespace

TEST_CASE("local densities") {
  CHECK(local_density(builtin_fan("P1"), 2) == Rat(3, 2));
  CHECK(local_density(builtin_fan("P2"), 3) == Rat(13, 9));
  CHECK(local_density(builtin_fan("P1xP1"), 2) == Rat(9, 4));
  CHECK_THROWS_AS(local_density(builtin_fan("P1"), 6), ValidationError);
  for (std::int64_t p : {2, 3, 5, 7, 11, 101}) {
    Rat a = local_density(builtin_fan("P1"), p);
    CHECK(local_density(builtin_fan("P1xP1"), p) == a * a);
    // F1 is a P1 bundle over P1.
    CHECK(local_density(builtin_fan("F1"), p) == a * a);
    CHECK(local_density(builtin_fan("P3"), p) == Rat(p * p * p + p * p + p + 1, p * p * p));
  }
}

TEST_CASE("primes") {
  auto ps = primes_up_to(30);
  CHECK(ps == std::vector<std::int64_t>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29});
  CHECK(primes_up_to(100000).size() == 9592);
}

TEST_CASE("euler products") {
  auto p1 = euler_product(make_model(builtin_fan("P1")), 100000);
  CHECK(std::fabs(p1.value - 1 / kZeta2) < 1e-4);
  CHECK(std::fabs(p1.extrapolated - 1 / kZeta2) < 1e-7);
  CHECK(p1.tail_c == doctest::Approx(-1).epsilon(0.01));
  auto p2 = euler_product(make_model(builtin_fan("P2")), 100000);
  CHECK(std::fabs(p2.value - 1 / kZeta3) < 1e-4);
  auto q = euler_product(make_model(builtin_fan("P1xP1")), 10000);
  CHECK(std::fabs(q.value - 1 / (kZeta2 * kZeta2)) < 1e-3);
  CHECK(q.tail_bound > 0);
  CHECK_THROWS_AS(euler_product(make_model(builtin_fan("P1")), 50), ValidationError);
}

TEST_CASE("euler factors follow the tail model") {
  for (const auto& name : builtin_fan_names()) {
    auto m = make_model(builtin_fan(name));
    auto e = euler_product(m, 2000);
    double cmax = 0;
    for (const auto& [p, w] : e.omega_p) {
      CHECK(w > 0);
      Rat f = w * rat_pow(Rat(p - 1, p), m.rho);
      double dev = std::fabs(Rat(f - 1).get_d()) * static_cast<double>(p) * static_cast<double>(p);
      cmax = std::max(cmax, dev);
    }
    CHECK_MESSAGE(cmax < 10, name);
    // The fit is on log f_p, the bound on f_p - 1.
    CHECK(std::fabs(e.tail_c) <= cmax * 1.001);
  }
}

TEST_CASE("archimedean densities match closed forms") {
  struct Case {
    const char* name;
    double expected;
  };
  for (auto c : {Case{"P1", 8}, Case{"P2", 24}, Case{"P1xP1", 64}, Case{"P3", 64}}) {
    auto m = make_model(builtin_fan(c.name));
    for (const auto& D : default_density_regions(m)) {
      auto a = archimedean_density(m, D, 400000, 5);
      CHECK_MESSAGE(std::fabs(a.value - c.expected) <= 4 * a.std_error + 1e-9, c.name);
      CHECK(a.std_error < 0.01 * c.expected);
    }
  }
}

TEST_CASE("P1 density on the log-2 annulus") {
  auto m = make_model(builtin_fan("P1"));
  Region D;
  D.constraints.push_back({{1}, 2, 0});
  D.constraints.push_back({{-1}, 1, 0});
  auto a = archimedean_density(m, D, 1000000, 1);
  CHECK(a.nu == doctest::Approx(1.5));
  CHECK(std::fabs(a.volume - 12) <= 4 * a.std_error * a.nu);
  CHECK(std::fabs(a.value - 8) <= 4 * a.std_error);
}

TEST_CASE("archimedean density does not depend on the region") {
  auto m = make_model(builtin_fan("F1"));
  std::vector<ArchimedeanDensity> est;
  for (const auto& D : default_density_regions(m)) est.push_back(archimedean_density(m, D, 400000, 3));
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      double se = std::hypot(est[i].std_error, est[j].std_error);
      CHECK(std::fabs(est[i].value - est[j].value) <= 3 * se);
    }
}

TEST_CASE("density regions are validated") {
  auto m = make_model(builtin_fan("P1xP1"));
  Region open;
  open.constraints.push_back({{1, 0}, 2, 0});
  CHECK_THROWS_AS(archimedean_density(m, open, 100, 1), ValidationError);
  Region flat;
  flat.constraints.push_back({{1, 0}, 1, 0});
  flat.constraints.push_back({{-1, 0}, 1, 0});
  flat.constraints.push_back({{0, 1}, 2, 0});
  flat.constraints.push_back({{0, -1}, 1, 0});
  CHECK_THROWS_AS(archimedean_density(m, flat, 100, 1), ValidationError);
}

TEST_CASE("densities are deterministic across thread counts") {
  auto m = make_model(builtin_fan("P2"));
  auto D = default_density_regions(m)[0];
  auto a = archimedean_density(m, D, 100000, 9, 1);
  auto b = archimedean_density(m, D, 100000, 9, 4);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("tamagawa numbers") {
  auto r = tamagawa(make_model(builtin_fan("P1")), 10000, 400000, 1);
  CHECK(r.normalization == 0.5);
  CHECK(std::fabs(r.tau - 4 / kZeta2) <= 4 * r.error + 1e-9);
  auto j = tamagawa_to_json(r, 3);
  CHECK(j["kind"] == "operational Tamagawa number");
  CHECK(j["omega_p"].size() == 3);
  CHECK(j["omega_p"][0]["value"] == "3/2");
  CHECK(j["omega_inf"].contains("stderr"));
  CHECK(j["euler"]["p_max"] == 10000);
  CHECK(j["tau"]["value"].get<double>() == r.tau);
}
