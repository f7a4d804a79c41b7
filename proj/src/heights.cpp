#include "toric/heights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace toric {

namespace {

std::int64_t iabs(std::int64_t x) { return x < 0 ? -x : x; }

int ord_p(std::int64_t x, std::int64_t p) {
  int k = 0;
  x = iabs(x);
  while (x != 0 && x % p == 0) {
    x /= p;
    ++k;
  }
  return k;
}

std::vector<std::int64_t> prime_factors(std::int64_t x) {
  std::vector<std::int64_t> out;
  x = iabs(x);
  for (std::int64_t p = 2; p * p <= x; ++p) {
    if (x % p) continue;
    out.push_back(p);
    while (x % p == 0) x /= p;
  }
  if (x > 1) out.push_back(x);
  return out;
}

Rat parse_rat_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rat(static_cast<long>(j.get<std::int64_t>()));
  throw ValidationError("expected a rational as \"p/q\" string or integer, got " + j.dump());
}

Int lcm_with(Int l, const Rat& x) {
  mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  return l;
}

// prod H_i^{q_i * scale} for integer q_i * scale.
Rat scaled_monomial(const MultiHeight& mh, const QVec& q, const Int& scale) {
  Rat r = 1;
  for (std::size_t i = 0; i < q.size(); ++i) {
    Rat k = q[i] * scale;
    if (k == 0) continue;
    r *= rat_pow(mh.values[i], k.get_num().get_si());
  }
  return r;
}

}  // namespace

// prod |y_l|^{e_l} as an exact rational.
Rat torsor_monomial(const IVec& y, const IVec& e) {
  Int num = 1, den = 1;
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (e[l] == 0) continue;
    Int b(static_cast<long>(iabs(y[l])));
    Int p;
    mpz_pow_ui(p.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(iabs(e[l])));
    (e[l] > 0 ? num : den) *= p;
  }
  Rat r(num, den);
  r.canonicalize();
  return r;
}

Place Place::at(std::int64_t p) {
  if (!is_prime(p)) throw ValidationError(std::to_string(p) + " is not prime");
  return Place{p};
}

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t q = 2; q * q <= p; ++q)
    if (p % q == 0) return false;
  return true;
}

TorsorModel make_model(const Fan& fan) {
  TorsorModel m;
  m.fan = fan;
  m.lattice = class_lattice(fan);
  m.n = fan.rays.size();
  m.d = static_cast<std::size_t>(fan.dim);
  m.rho = m.lattice.rho;
  const QMat vt = transpose(to_q(fan.rays));  // d x n
  for (std::size_t s = 0; s < fan.max_cones.size(); ++s) {
    QMat r;
    for (int i : fan.max_cones[s]) r.push_back(to_q(fan.rays[static_cast<std::size_t>(i)]));
    auto inv = inverse(transpose(r));
    if (!inv) throw InternalError("singular maximal cone");
    QMat w = mul(*inv, vt);
    IMat wi;
    for (const auto& row : w) {
      IVec ir;
      for (const auto& x : row) {
        if (x.get_den() != 1) throw InternalError("non-unimodular cone");
        ir.push_back(x.get_num().get_si());
      }
      wi.push_back(ir);
    }
    m.select.push_back(wi);
    IMat e;
    for (int i = 0; i < m.rho; ++i) {
      IVec cls(static_cast<std::size_t>(m.rho), 0);
      cls[static_cast<std::size_t>(i)] = 1;
      e.push_back(cone_representative(fan, m.lattice.divisor_of(cls), static_cast<int>(s)));
    }
    m.exponents.push_back(e);
  }
  m.collections = primitive_collections(fan);

  // Row reduction of the class projection over the two-element field.
  std::vector<std::vector<std::uint8_t>> rows;
  for (const auto& prow : m.lattice.projection) {
    std::vector<std::uint8_t> r;
    for (const auto& x : prow) r.push_back(static_cast<std::uint8_t>(mpz_odd_p(x.get_mpz_t()) ? 1 : 0));
    rows.push_back(r);
  }
  std::size_t rr = 0;
  for (std::size_t c = 0; c < m.n && rr < rows.size(); ++c) {
    std::size_t p = rr;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rr]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != rr && rows[i][c])
        for (std::size_t k = 0; k < m.n; ++k) rows[i][k] ^= rows[rr][k];
    m.sign_pivots.push_back(c);
    ++rr;
  }
  rows.resize(rr);
  m.sign_rows = rows;
  std::uint32_t pivot_mask = 0;
  for (auto p : m.sign_pivots) pivot_mask |= 1u << p;
  for (std::uint32_t mask = 0; mask < (1u << m.n); ++mask)
    if ((mask & pivot_mask) == 0) m.canonical_patterns.push_back(mask);

  m.omega = to_q(m.lattice.anticanonical);
  QMat eff;
  for (const auto& c : m.lattice.eff_generators) eff.push_back(to_q(c));
  m.eff = make_cone(eff, static_cast<std::size_t>(m.rho));
  m.dual_eff = dual_cone(m.eff);
  m.dual_eff.facets = extremal_rays(m.eff);
  return m;
}

bool is_coprime(const TorsorModel& model, const IVec& y) {
  for (const auto& c : model.collections) {
    std::int64_t g = 0;
    for (int l : c) g = std::gcd(g, iabs(y[static_cast<std::size_t>(l)]));
    if (g != 1) return false;
  }
  return true;
}

bool is_canonical_signs(const TorsorModel& model, const IVec& y) {
  return std::all_of(model.sign_pivots.begin(), model.sign_pivots.end(), [&](std::size_t p) { return y[p] > 0; });
}

TorsorPoint canonicalize(const TorsorModel& model, const IVec& raw) {
  if (raw.size() != model.n) throw ValidationError("point has " + std::to_string(raw.size()) + " coordinates, expected " + std::to_string(model.n));
  for (auto x : raw)
    if (x == 0) throw ValidationError("zero coordinate: not a point of the torus");
  if (!is_coprime(model, raw)) throw ValidationError("coprimality violated");
  IVec y = raw;
  for (std::size_t r = 0; r < model.sign_rows.size(); ++r) {
    if (y[model.sign_pivots[r]] > 0) continue;
    for (std::size_t l = 0; l < model.n; ++l)
      if (model.sign_rows[r][l]) y[l] = -y[l];
  }
  return TorsorPoint{y};
}

Tropical tropicalize(const TorsorModel& model, const TorsorPoint& point, const Place& place) {
  Tropical t;
  t.archimedean = place.archimedean();
  if (t.archimedean) {
    t.real.assign(model.d, 0.0);
    for (std::size_t l = 0; l < model.n; ++l) {
      double lg = std::log(static_cast<double>(iabs(point.coords[l])));
      for (std::size_t j = 0; j < model.d; ++j) t.real[j] += lg * static_cast<double>(model.fan.rays[l][j]);
    }
  } else {
    t.lattice.assign(model.d, 0);
    for (std::size_t l = 0; l < model.n; ++l) {
      int k = ord_p(point.coords[l], place.prime);
      for (std::size_t j = 0; j < model.d; ++j) t.lattice[j] -= k * model.fan.rays[l][j];
    }
  }
  return t;
}

int select_cone(const Fan& fan, const IVec& u) {
  const QVec uq = to_q(u);
  for (std::size_t s = 0; s < fan.max_cones.size(); ++s) {
    QMat r;
    for (int i : fan.max_cones[s]) r.push_back(to_q(fan.rays[static_cast<std::size_t>(i)]));
    auto c = solve(transpose(r), uq);
    if (c && std::all_of(c->begin(), c->end(), [](const Rat& x) { return x >= 0; })) return static_cast<int>(s);
  }
  throw InternalError("no maximal cone contains the vector: fan not complete");
}

int select_cone(const Fan& fan, const std::vector<double>& u) {
  double norm = 0;
  for (auto x : u) norm = std::max(norm, std::fabs(x));
  const double tol = 1e-12 * (1.0 + norm);
  for (std::size_t s = 0; s < fan.max_cones.size(); ++s) {
    QMat r;
    for (int i : fan.max_cones[s]) r.push_back(to_q(fan.rays[static_cast<std::size_t>(i)]));
    auto inv = inverse(transpose(r));
    bool inside = true;
    for (std::size_t j = 0; j < u.size() && inside; ++j) {
      double c = 0;
      for (std::size_t k = 0; k < u.size(); ++k) c += (*inv)[j][k].get_d() * u[k];
      if (c < -tol) inside = false;
    }
    if (inside) return static_cast<int>(s);
  }
  throw InternalError("no maximal cone contains the vector: fan not complete");
}

int archimedean_cone(const TorsorModel& model, const IVec& y) {
  std::vector<double> lg(model.n);
  double scale = 0;
  for (std::size_t l = 0; l < model.n; ++l) {
    lg[l] = std::log(static_cast<double>(iabs(y[l])));
    scale += lg[l];
  }
  const double tol = 1e-9 * (1.0 + scale);
  for (std::size_t s = 0; s < model.select.size(); ++s) {
    bool inside = true;
    for (const auto& row : model.select[s]) {
      double v = 0;
      for (std::size_t l = 0; l < model.n; ++l) v += static_cast<double>(row[l]) * lg[l];
      if (v < -tol) continue;
      if (v > tol || torsor_monomial(y, row) > 1) {
        inside = false;
        break;
      }
    }
    if (inside) return static_cast<int>(s);
  }
  throw InternalError("no maximal cone contains -u_inf");
}

std::vector<double> archimedean_log_heights(const TorsorModel& model, const std::vector<double>& log_abs) {
  double scale = 0;
  for (double x : log_abs) scale += std::fabs(x);
  const double tol = 1e-12 * (1.0 + scale);
  std::size_t best = 0;
  double best_excess = INFINITY;
  for (std::size_t s = 0; s < model.select.size(); ++s) {
    double excess = 0;
    for (const auto& row : model.select[s]) {
      double v = 0;
      for (std::size_t l = 0; l < model.n; ++l) v += static_cast<double>(row[l]) * log_abs[l];
      excess = std::max(excess, v);
    }
    if (excess <= tol) {
      best = s;
      break;
    }
    if (excess < best_excess) {
      best_excess = excess;
      best = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(model.rho), 0.0);
  const auto& ex = model.exponents[best];
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t l = 0; l < model.n; ++l) out[i] += static_cast<double>(ex[i][l]) * log_abs[l];
  return out;
}

namespace {

// Smallest-index cone containing sum_l k_l v_l, using the per-cone coordinate matrices.
int cone_of_valuations(const TorsorModel& model, const std::vector<long>& k) {
  for (std::size_t s = 0; s < model.select.size(); ++s) {
    bool inside = true;
    for (const auto& row : model.select[s]) {
      long c = 0;
      for (std::size_t l = 0; l < model.n; ++l) c += row[l] * k[l];
      if (c < 0) {
        inside = false;
        break;
      }
    }
    if (inside) return static_cast<int>(s);
  }
  throw InternalError("no maximal cone contains -u_p");
}

// <m_sigma, v_l> for the character with <m, v_j> = -a_j on the rays of sigma.
IVec character_exponents(const TorsorModel& model, int sigma, const IVec& a) {
  const auto& cone = model.fan.max_cones[static_cast<std::size_t>(sigma)];
  const auto& w = model.select[static_cast<std::size_t>(sigma)];
  IVec e(model.n, 0);
  for (std::size_t j = 0; j < cone.size(); ++j) {
    const std::int64_t aj = a[static_cast<std::size_t>(cone[j])];
    if (aj == 0) continue;
    for (std::size_t l = 0; l < model.n; ++l) e[l] -= w[j][l] * aj;
  }
  return e;
}

std::vector<long> valuations(const TorsorModel& model, const IVec& y, std::int64_t p) {
  std::vector<long> k(model.n);
  for (std::size_t l = 0; l < model.n; ++l) k[l] = ord_p(y[l], p);
  return k;
}

Rat place_value(const TorsorModel& model, const IVec& y, const Place& place, int sigma, const IVec& a,
                const std::vector<long>& k) {
  const IVec e = character_exponents(model, sigma, a);
  if (place.archimedean()) return torsor_monomial(y, e);
  long v = 0;
  for (std::size_t l = 0; l < model.n; ++l) v += e[l] * k[l];
  return rat_pow(Rat(static_cast<long>(place.prime)), -v);
}

std::vector<std::int64_t> primes_of(const IVec& coords) {
  std::vector<std::int64_t> primes;
  for (auto y : coords)
    for (auto p : prime_factors(y))
      if (std::find(primes.begin(), primes.end(), p) == primes.end()) primes.push_back(p);
  std::sort(primes.begin(), primes.end());
  return primes;
}

}  // namespace

Rat local_height(const TorsorModel& model, const TorsorPoint& point, const Place& place, const IVec& a) {
  if (a.size() != model.n) throw ValidationError("divisor has wrong length");
  if (place.archimedean()) return place_value(model, point.coords, place, archimedean_cone(model, point.coords), a, {});
  auto k = valuations(model, point.coords, place.prime);
  return place_value(model, point.coords, place, cone_of_valuations(model, k), a, k);
}

Rat height_by_places(const TorsorModel& model, const TorsorPoint& point, const IVec& a) {
  Rat h = local_height(model, point, Place::infinity(), a);
  for (auto p : primes_of(point.coords)) h *= local_height(model, point, Place{p}, a);
  return h;
}

MultiHeight multi_height_by_places(const TorsorModel& model, const TorsorPoint& point) {
  std::vector<IVec> reps;
  for (int i = 0; i < model.rho; ++i) {
    IVec cls(static_cast<std::size_t>(model.rho), 0);
    cls[static_cast<std::size_t>(i)] = 1;
    reps.push_back(model.lattice.divisor_of(cls));
  }
  MultiHeight mh;
  const int s0 = archimedean_cone(model, point.coords);
  for (const auto& a : reps) mh.values.push_back(place_value(model, point.coords, Place::infinity(), s0, a, {}));
  for (auto p : primes_of(point.coords)) {
    auto k = valuations(model, point.coords, p);
    const int s = cone_of_valuations(model, k);
    for (std::size_t i = 0; i < reps.size(); ++i) mh.values[i] *= place_value(model, point.coords, Place{p}, s, reps[i], k);
  }
  return mh;
}

MultiHeight multi_height(const TorsorModel& model, const TorsorPoint& point) {
  const int s = archimedean_cone(model, point.coords);
  MultiHeight mh;
  for (const auto& row : model.exponents[static_cast<std::size_t>(s)]) mh.values.push_back(torsor_monomial(point.coords, row));
  return mh;
}

std::vector<double> MultiHeight::logs() const {
  std::vector<double> out;
  for (const auto& v : values) out.push_back(std::log(v.get_d()));
  return out;
}

Rat height_of_class(const MultiHeight& mh, const IVec& cls) {
  Rat r = 1;
  for (std::size_t i = 0; i < cls.size(); ++i) r *= rat_pow(mh.values[i], cls[i]);
  return r;
}

bool constraint_holds(const MultiHeight& mh, const RegionConstraint& c, const Rat& B) {
  Int scale = lcm_with(lcm_of_denominators(c.cls), c.s);
  Rat lhs = scaled_monomial(mh, c.cls, scale);
  Rat sd = c.s * scale;
  Rat rhs = rat_pow(c.gamma, scale.get_si()) * rat_pow(B, sd.get_num().get_si());
  return lhs <= rhs;
}

bool region_membership(const MultiHeight& mh, const Region& region, const Rat& B) {
  for (const auto& c : region.constraints)
    if (!constraint_holds(mh, c, B)) return false;
  if (region.cone) {
    for (const auto& f : facets_of(*region.cone)) {
      Rat v = scaled_monomial(mh, f, lcm_of_denominators(f));
      if (v < 1) return false;
    }
  }
  return true;
}

std::vector<LogConstraint> region_polytope(const TorsorModel& model, const Region& region, const Rat& B,
                                           bool with_dual_eff) {
  std::vector<LogConstraint> out;
  for (const auto& c : region.constraints) {
    if (c.cls.size() != static_cast<std::size_t>(model.rho)) throw ValidationError("region class has wrong length");
    if (c.gamma <= 0) throw ValidationError("region gamma must be positive");
    out.push_back({c.cls, PosReal(c.gamma) * PosReal::power(B, c.s)});
  }
  auto add_cone = [&](const QMat& facets) {
    for (const auto& f : facets) {
      QVec g = f;
      for (auto& x : g) x = -x;
      out.push_back({g, PosReal()});
    }
  };
  if (region.cone) add_cone(facets_of(*region.cone));
  if (with_dual_eff) add_cone(facets_of(model.dual_eff));
  return out;
}

Region parse_region(const nlohmann::json& j, int rho) {
  Region r;
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("constraints")) throw ValidationError("region object needs \"constraints\"");
    list = &j.at("constraints");
  }
  if (!list->is_array()) throw ValidationError("region constraints must be a list");
  for (const auto& c : *list) {
    RegionConstraint rc;
    if (!c.contains("class") || !c.contains("gamma")) throw ValidationError("region constraint needs class and gamma");
    for (const auto& x : c.at("class")) rc.cls.push_back(parse_rat_json(x));
    if (rc.cls.size() != static_cast<std::size_t>(rho)) throw ValidationError("region class must have rho entries");
    rc.gamma = parse_rat_json(c.at("gamma"));
    if (rc.gamma <= 0) throw ValidationError("gamma must be positive");
    rc.s = c.contains("s") ? parse_rat_json(c.at("s")) : Rat(0);
    r.constraints.push_back(rc);
  }
  if (j.is_object() && j.contains("cone")) {
    QMat gens;
    for (const auto& g : j.at("cone").at("generators")) {
      QVec v;
      for (const auto& x : g) v.push_back(parse_rat_json(x));
      if (v.size() != static_cast<std::size_t>(rho)) throw ValidationError("cone generator must have rho entries");
      gens.push_back(v);
    }
    r.cone = with_facets(make_cone(gens, static_cast<std::size_t>(rho)));
  }
  return r;
}

nlohmann::json region_to_json(const Region& region) {
  nlohmann::json j;
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : region.constraints) {
    nlohmann::json cj;
    cj["class"] = nlohmann::json::array();
    for (const auto& x : c.cls) cj["class"].push_back(to_string(x));
    cj["gamma"] = to_string(c.gamma);
    cj["s"] = to_string(c.s);
    j["constraints"].push_back(cj);
  }
  if (region.cone) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& v : region.cone->generators) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& x : v) row.push_back(to_string(x));
      g.push_back(row);
    }
    j["cone"] = {{"generators", g}};
  }
  return j;
}

void write_point_csv_header(std::ostream& os, const TorsorModel& model, const Region* region) {
  for (std::size_t l = 0; l < model.n; ++l) os << (l ? "," : "") << "y" << l;
  for (int i = 0; i < model.rho; ++i) os << ",H" << i;
  if (region)
    for (std::size_t k = 0; k < region->constraints.size(); ++k) os << ",c" << k;
  os << '\n';
}

void write_point_csv(std::ostream& os, const TorsorModel& model, const TorsorPoint& p, const MultiHeight& mh,
                     const Region* region, const Rat& B) {
  for (std::size_t l = 0; l < model.n; ++l) os << (l ? "," : "") << p.coords[l];
  for (const auto& h : mh.values) os << ',' << h.get_str();
  if (region)
    for (const auto& c : region->constraints) os << ',' << (constraint_holds(mh, c, B) ? 1 : 0);
  os << '\n';
}

}  // namespace toric
