#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "toric/heights.hpp"

namespace toric {

std::vector<std::int64_t> primes_up_to(std::int64_t n);

// #X(F_p) / p^d from the cone counts of the fan.
Rat local_density(const Fan& fan, std::int64_t p);

struct EulerProduct {
  std::int64_t p_max = 0;
  std::vector<std::pair<std::int64_t, Rat>> omega_p;
  double value = 0;        // prod_{p <= p_max} (1 - 1/p)^rho omega_p
  double tail_c = 0;       // fitted log f_p ~ c / p^2
  double tail_log = 0;     // model estimate of sum_{p > p_max} log f_p
  double tail_bound = 0;   // |value| * (exp|tail_log| - 1)
  double extrapolated = 0; // value * exp(tail_log)
};

EulerProduct euler_product(const TorsorModel& model, std::int64_t p_max);

struct ArchimedeanDensity {
  double value = 0;      // vol / nu
  double std_error = 0;
  double volume = 0;     // preimage volume in R^n
  double nu = 0;         // nu(D)
  std::uint64_t samples = 0;
};

// vol{y in R^n : h_inf(y) in D} / nu(D) by stratified Monte Carlo over the bounding box of the preimage.
ArchimedeanDensity archimedean_density(const TorsorModel& model, const Region& D, std::uint64_t samples,
                                       std::uint64_t seed, unsigned threads = 0);

// Three compact boxes in the Pic basis: H_{e_i} in [1,2], in [1/2,3/2], and in [1,3+i].
std::vector<Region> default_density_regions(const TorsorModel& model);

struct TamagawaReport {
  int rho = 0;
  double normalization = 1;  // 2^-rho
  EulerProduct euler;
  ArchimedeanDensity omega_inf;
  std::vector<ArchimedeanDensity> region_checks;
  double tau = 0;
  double error = 0;
};

TamagawaReport tamagawa(const TorsorModel& model, std::int64_t p_max, std::uint64_t samples, std::uint64_t seed,
                        unsigned threads = 0);

// omega_p_limit caps the listed local densities; 0 lists all of them.
nlohmann::json tamagawa_to_json(const TamagawaReport& report, std::size_t omega_p_limit = 0);

}  // namespace toric
