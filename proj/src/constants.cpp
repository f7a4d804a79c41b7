#include "toric/constants.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "toric/measure.hpp"

namespace toric {

std::vector<std::int64_t> primes_up_to(std::int64_t n) {
  std::vector<std::int64_t> out;
  if (n < 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
  for (std::int64_t p = 2; p <= n; ++p) {
    if (composite[static_cast<std::size_t>(p)]) continue;
    out.push_back(p);
    for (std::int64_t q = p * p; q <= n; q += p) composite[static_cast<std::size_t>(q)] = true;
  }
  return out;
}

namespace {

// cones_by_dim[k] = number of k-dimensional cones, zero cone included.
std::vector<long> cones_by_dim(const Fan& fan) {
  std::vector<long> c(static_cast<std::size_t>(fan.dim) + 1, 0);
  for (const auto& cone : all_cones(fan)) ++c[cone.size()];
  return c;
}

Rat density_from_counts(const std::vector<long>& counts, int d, std::int64_t p) {
  Int pts = 0, q = p - 1;
  for (int k = 0; k <= d; ++k) {
    Int t;
    mpz_pow_ui(t.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(d - k));
    pts += t * counts[static_cast<std::size_t>(k)];
  }
  Int pd;
  mpz_ui_pow_ui(pd.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(d));
  Rat r(pts, pd);
  r.canonicalize();
  return r;
}

double log_of(const Rat& q) { return std::log(q.get_d()); }

}  // namespace

Rat local_density(const Fan& fan, std::int64_t p) {
  if (!is_prime(p)) throw ValidationError(std::to_string(p) + " is not prime");
  return density_from_counts(cones_by_dim(fan), fan.dim, p);
}

EulerProduct euler_product(const TorsorModel& model, std::int64_t p_max) {
  if (p_max < 100) throw ValidationError("p_max must be at least 100");
  EulerProduct e;
  e.p_max = p_max;
  const auto counts = cones_by_dim(model.fan);
  const int d = model.fan.dim;
  long double sum = 0;
  double num = 0, den = 0;
  for (auto p : primes_up_to(p_max)) {
    Rat w = density_from_counts(counts, d, p);
    e.omega_p.emplace_back(p, w);
    Rat f = w * rat_pow(Rat(p - 1, p), model.rho);
    double lf = std::log1p(Rat(f - 1).get_d());
    sum += lf;
    if (10 * p > p_max) {
      double p2 = static_cast<double>(p) * static_cast<double>(p);
      num += lf / p2;
      den += 1.0 / (p2 * p2);
    }
  }
  e.value = static_cast<double>(std::exp(sum));
  e.tail_c = den > 0 ? num / den : 0;
  const double pm = static_cast<double>(p_max);
  e.tail_log = e.tail_c / (pm * std::log(pm));
  e.extrapolated = e.value * std::exp(e.tail_log);
  e.tail_bound = std::fabs(e.value) * std::expm1(std::fabs(e.tail_log));
  return e;
}

ArchimedeanDensity archimedean_density(const TorsorModel& model, const Region& D, std::uint64_t samples,
                                       std::uint64_t seed, unsigned threads) {
  if (samples == 0) throw ValidationError("need at least one sample");
  const std::size_t rho = static_cast<std::size_t>(model.rho);
  auto poly = region_polytope(model, D, 1, false);
  if (!is_bounded(poly, rho)) throw ValidationError("density region must be compact");
  ArchimedeanDensity out;
  out.nu = integrate_exp_polytope(poly, rho, model.omega);
  if (!(out.nu > 0)) throw ValidationError("density region has zero measure");
  auto verts = log_vertices(poly, rho);

  std::vector<double> bound(model.n);
  double box = std::ldexp(1.0, static_cast<int>(model.n));
  for (std::size_t l = 0; l < model.n; ++l) {
    bound[l] = exp_sup(verts, to_q(model.lattice.classes[l])).value() * (1 + 1e-9);
    box *= bound[l];
  }

  struct Check {
    std::vector<double> q;
    double log_gamma;
  };
  std::vector<Check> checks;
  for (const auto& c : D.constraints) {
    Check k;
    for (const auto& x : c.cls) k.q.push_back(x.get_d());
    k.log_gamma = log_of(c.gamma);
    checks.push_back(k);
  }
  if (D.cone) {
    for (const auto& f : facets_of(*D.cone)) {
      Check k;
      for (const auto& x : f) k.q.push_back(-x.get_d());
      k.log_gamma = 0;
      checks.push_back(k);
    }
  }

  const std::uint64_t strata = std::min<std::uint64_t>(256, samples);
  const std::uint64_t per = (samples + strata - 1) / strata;
  out.samples = per * strata;
  std::vector<std::uint64_t> hits(strata, 0);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    std::vector<double> lg(model.n);
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= strata) return;
      std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(ss);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::uint64_t h = 0;
      for (std::uint64_t i = 0; i < per; ++i) {
        bool zero = false;
        for (std::size_t l = 0; l < model.n; ++l) {
          double t = l == 0 ? (static_cast<double>(k) + u(rng)) / static_cast<double>(strata) : u(rng);
          double y = t * bound[l];
          if (y <= 0) zero = true;
          lg[l] = std::log(y);
        }
        if (zero) continue;
        auto logs = archimedean_log_heights(model, lg);
        bool in = true;
        for (const auto& c : checks) {
          double s = 0;
          for (std::size_t j = 0; j < rho; ++j) s += c.q[j] * logs[j];
          if (s > c.log_gamma) {
            in = false;
            break;
          }
        }
        h += in;
      }
      hits[k] = h;
    }
  };
  unsigned w = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  w = static_cast<unsigned>(std::min<std::uint64_t>(w, strata));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < w; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  double frac = 0, var = 0;
  const double K = static_cast<double>(strata), n = static_cast<double>(per);
  for (auto h : hits) {
    double f = static_cast<double>(h) / n;
    frac += f / K;
    var += f * (1 - f) / (n * K * K);
  }
  out.volume = box * frac;
  out.value = out.volume / out.nu;
  out.std_error = box * std::sqrt(var) / out.nu;
  return out;
}

std::vector<Region> default_density_regions(const TorsorModel& model) {
  const std::size_t rho = static_cast<std::size_t>(model.rho);
  auto boxes = [&](auto lo, auto hi) {
    Region r;
    for (std::size_t i = 0; i < rho; ++i) {
      QVec e(rho, 0);
      e[i] = 1;
      r.constraints.push_back({e, hi(i), 0});
      e[i] = -1;
      r.constraints.push_back({e, 1 / Rat(lo(i)), 0});
    }
    return r;
  };
  return {boxes([](std::size_t) { return Rat(1); }, [](std::size_t) { return Rat(2); }),
          boxes([](std::size_t) { return Rat(1, 2); }, [](std::size_t) { return Rat(3, 2); }),
          boxes([](std::size_t) { return Rat(1); }, [](std::size_t i) { return Rat(static_cast<long>(3 + i)); })};
}

TamagawaReport tamagawa(const TorsorModel& model, std::int64_t p_max, std::uint64_t samples, std::uint64_t seed,
                        unsigned threads) {
  TamagawaReport r;
  r.rho = model.rho;
  r.normalization = std::ldexp(1.0, -model.rho);
  r.euler = euler_product(model, p_max);
  auto regions = default_density_regions(model);
  for (std::size_t i = 0; i < regions.size(); ++i)
    r.region_checks.push_back(archimedean_density(model, regions[i], samples, seed + i, threads));
  r.omega_inf = r.region_checks.front();
  r.tau = r.normalization * r.omega_inf.value * r.euler.extrapolated;
  double rel_inf = r.omega_inf.std_error / r.omega_inf.value;
  double rel_euler = r.euler.tail_bound / r.euler.value;
  r.error = std::fabs(r.tau) * std::sqrt(rel_inf * rel_inf + rel_euler * rel_euler);
  return r;
}

nlohmann::json tamagawa_to_json(const TamagawaReport& report, std::size_t omega_p_limit) {
  nlohmann::json j;
  j["kind"] = "operational Tamagawa number";
  j["rho"] = report.rho;
  j["normalization"] = {{"formula", "2^-rho"}, {"value", report.normalization}};
  auto& table = j["omega_p"] = nlohmann::json::array();
  for (const auto& [p, w] : report.euler.omega_p) {
    if (omega_p_limit && table.size() >= omega_p_limit) break;
    table.push_back({{"p", p}, {"value", to_string(w)}});
  }
  j["euler"] = {{"value", report.euler.value},
                {"tail_bound", report.euler.tail_bound},
                {"p_max", report.euler.p_max},
                {"tail_c", report.euler.tail_c},
                {"extrapolated", report.euler.extrapolated}};
  auto density = [](const ArchimedeanDensity& a) {
    return nlohmann::json{{"value", a.value}, {"stderr", a.std_error}, {"samples", a.samples},
                          {"volume", a.volume}, {"nu", a.nu}};
  };
  j["omega_inf"] = density(report.omega_inf);
  auto& checks = j["omega_inf"]["regions"] = nlohmann::json::array();
  for (const auto& a : report.region_checks) checks.push_back(density(a));
  j["tau"] = {{"value", report.tau}, {"error", report.error}};
  return j;
}

}  // namespace toric
