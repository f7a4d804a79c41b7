#include "toric/counting.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "toric/measure.hpp"

namespace toric {

namespace {

constexpr double kSlack = 1e-9;
constexpr unsigned kMaxAttempts = 20;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// prod y^{g+} * den(t) <= num(t) * prod y^{g-}
bool exact_monomial_le(const std::int64_t* y, const std::vector<std::int64_t>& g, const Rat& t) {
  Int lhs = t.get_den(), rhs = t.get_num();
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (g[l] == 0) continue;
    Int p;
    Int base(static_cast<long>(y[l]));
    mpz_pow_ui(p.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(g[l] > 0 ? g[l] : -g[l]));
    (g[l] > 0 ? lhs : rhs) *= p;
  }
  return lhs <= rhs;
}

IVec class_exponents(const TorsorModel& model, std::size_t sigma, const QVec& cls, const Int& scale) {
  IVec g(model.n, 0);
  for (int i = 0; i < model.rho; ++i) {
    Rat c = cls[static_cast<std::size_t>(i)] * scale;
    if (c == 0) continue;
    if (c.get_den() != 1) throw InternalError("class exponent scaling failed");
    const long ci = c.get_num().get_si();
    for (std::size_t l = 0; l < model.n; ++l) g[l] += ci * model.exponents[sigma][static_cast<std::size_t>(i)][l];
  }
  return g;
}

std::vector<double> to_doubles(const IVec& v) {
  std::vector<double> out;
  for (auto x : v) out.push_back(static_cast<double>(x));
  return out;
}

long exact_box_coordinate(const Rat& b, const Rat& Bi, double log_b, double log_Bi, double log_h,
                          const std::function<Rat()>& exact_h, std::size_t i) {
  const double x = (log_Bi - log_h) / log_b;
  if (x <= 0.5) return 1;
  const double k = std::round(x);
  if (std::fabs(x - k) < 1e-6) {
    const long kk = static_cast<long>(k);
    Rat r = Bi / exact_h();
    Rat w = rat_pow(b, kk);
    if (r == w) throw WallCollision(i, kk);
    return r < w ? kk : kk + 1;
  }
  return static_cast<long>(std::ceil(x));
}

}  // namespace

CompiledClass compile_class(const TorsorModel& model, const IVec& cls) {
  if (cls.size() != static_cast<std::size_t>(model.rho)) throw ValidationError("class has wrong length");
  CompiledClass c;
  c.cls = cls;
  for (std::size_t s = 0; s < model.exponents.size(); ++s) c.per_cone.push_back(class_exponents(model, s, to_q(cls), 1));
  return c;
}

IVec PointView::coords() const { return IVec(y_, y_ + model_->n); }

MultiHeight PointView::heights() const {
  MultiHeight mh;
  const IVec y = coords();
  for (const auto& row : model_->exponents[static_cast<std::size_t>(sigma_)]) mh.values.push_back(torsor_monomial(y, row));
  return mh;
}

double PointView::log_height(const CompiledClass& c) const {
  const auto& g = c.per_cone[static_cast<std::size_t>(sigma_)];
  double s = 0;
  for (std::size_t l = 0; l < g.size(); ++l) s += static_cast<double>(g[l]) * logs_[l];
  return s;
}

Rat PointView::height(const CompiledClass& c) const {
  return torsor_monomial(coords(), c.per_cone[static_cast<std::size_t>(sigma_)]);
}

std::vector<TorsorPoint> PointView::signed_points() const {
  std::vector<TorsorPoint> out;
  for (auto mask : model_->canonical_patterns) {
    IVec y = coords();
    for (std::size_t l = 0; l < y.size(); ++l)
      if (mask & (1u << l)) y[l] = -y[l];
    out.push_back({y});
  }
  return out;
}

std::vector<Int> coordinate_bounds(const TorsorModel& model, const Region& region, const Rat& B) {
  auto cons = region_polytope(model, region, B);
  const auto dim = static_cast<std::size_t>(model.rho);
  if (!is_bounded(cons, dim)) throw ValidationError("region is unbounded on the dual effective cone");
  auto verts = log_vertices(cons, dim);
  std::vector<Int> out;
  for (const auto& c : model.lattice.classes)
    out.push_back(verts.empty() ? Int(0) : floor_of(exp_sup(verts, to_q(c))));
  return out;
}

// Enumeration engine

struct Enumerator::Impl {
  struct Cap {
    std::vector<double> g;
    double bound;
  };
  struct LeafConstraint {
    std::vector<std::int64_t> g;
    double log_t;
    Rat t;
  };

  const TorsorModel* model;
  EnumOptions options;
  std::size_t n = 0;
  std::vector<Int> bounds;
  std::vector<std::int64_t> M;
  bool empty = false;
  std::vector<Cap> caps;
  std::vector<std::vector<std::pair<std::size_t, double>>> level_caps;
  std::vector<std::vector<Cone>> level_collections;
  std::vector<std::vector<LeafConstraint>> leaf;            // per cone
  std::vector<std::vector<std::vector<double>>> select;     // per cone, d rows
  std::vector<double> logtab;

  double log_of(std::int64_t v) const {
    return static_cast<std::size_t>(v) < logtab.size() ? logtab[static_cast<std::size_t>(v)]
                                                       : std::log(static_cast<double>(v));
  }

  // Largest admissible value at a level given the cap sums so far; 0 when pruned.
  std::int64_t upper(std::size_t level, const double* sums) const {
    std::int64_t ub = M[level];
    for (const auto& [c, g] : level_caps[level]) {
      const double rem = caps[c].bound - sums[c] + kSlack * (1.0 + std::fabs(caps[c].bound));
      if (rem < 0) return 0;
      const double e = rem / g;
      if (e > 80) continue;
      const double v = std::floor(std::exp(e) * (1.0 + kSlack));
      if (v < static_cast<double>(ub)) ub = static_cast<std::int64_t>(v);
    }
    return ub;
  }

  bool gcd_ok(std::size_t level, const std::int64_t* y) const {
    for (const auto& c : level_collections[level]) {
      std::int64_t g = 0;
      for (int l : c) {
        g = std::gcd(g, y[l]);
        if (g == 1) break;
      }
      if (g != 1) return false;
    }
    return true;
  }

  int cone_of(const std::int64_t* y, const double* lg) const {
    double scale = 0;
    for (std::size_t l = 0; l < n; ++l) scale += lg[l];
    const double tol = kSlack * (1.0 + scale);
    for (std::size_t s = 0; s < select.size(); ++s) {
      bool inside = true;
      for (std::size_t j = 0; j < select[s].size() && inside; ++j) {
        const auto& row = select[s][j];
        double v = 0;
        for (std::size_t l = 0; l < n; ++l) v += row[l] * lg[l];
        if (v < -tol) continue;
        if (v > tol) {
          inside = false;
        } else {
          IVec yy(y, y + n);
          if (torsor_monomial(yy, model->select[s][j]) > 1) inside = false;
        }
      }
      if (inside) return static_cast<int>(s);
    }
    throw InternalError("no maximal cone contains -u_inf");
  }

  bool leaf_ok(int sigma, const std::int64_t* y, const double* lg) const {
    for (const auto& c : leaf[static_cast<std::size_t>(sigma)]) {
      double v = 0, mag = std::fabs(c.log_t);
      for (std::size_t l = 0; l < n; ++l) {
        const double t = static_cast<double>(c.g[l]) * lg[l];
        v += t;
        mag += std::fabs(t);
      }
      const double tol = kSlack * (1.0 + mag);
      if (v > c.log_t + tol) return false;
      if (v >= c.log_t - tol && !exact_monomial_le(y, c.g, c.t)) return false;
    }
    return true;
  }

  struct Worker {
    const Impl& e;
    unsigned shard, shards;
    const Visitor* visitor;
    std::vector<std::int64_t> y;
    std::vector<double> lg;
    std::vector<double> sums;  // (n + 1) x caps
    std::uint64_t found = 0;

    Worker(const Impl& impl, unsigned s, unsigned total, const Visitor* v)
        : e(impl), shard(s), shards(total), visitor(v), y(impl.n, 1), lg(impl.n, 0.0),
          sums((impl.n + 1) * impl.caps.size(), 0.0) {}

    void descend(std::size_t level) {
      const std::size_t nc = e.caps.size();
      const double* cur = sums.data() + level * nc;
      const std::int64_t ub = e.upper(level, cur);
      const bool last = level + 1 == e.n;
      for (std::int64_t v = 1; v <= ub; ++v) {
        if (level == 0 && static_cast<unsigned>((v - 1) % shards) != shard) continue;
        y[level] = v;
        lg[level] = e.log_of(v);
        if (!e.gcd_ok(level, y.data())) continue;
        if (last) {
          const int sigma = e.cone_of(y.data(), lg.data());
          if (!e.leaf_ok(sigma, y.data(), lg.data())) continue;
          ++found;
          if (visitor && *visitor) (*visitor)(PointView(*e.model, y.data(), lg.data(), sigma));
        } else {
          double* next = sums.data() + (level + 1) * nc;
          std::copy(cur, cur + nc, next);
          for (const auto& [c, g] : e.level_caps[level]) next[c] += g * lg[level];
          descend(level + 1);
        }
      }
    }
  };

  std::uint64_t count_candidates(std::size_t level, std::vector<double>& sums, std::uint64_t limit,
                                 std::uint64_t acc) const {
    const std::size_t nc = caps.size();
    const double* cur = sums.data() + level * nc;
    const std::int64_t ub = upper(level, cur);
    if (level + 1 == n) return acc + static_cast<std::uint64_t>(std::max<std::int64_t>(ub, 0));
    for (std::int64_t v = 1; v <= ub && acc <= limit; ++v) {
      double* next = sums.data() + (level + 1) * nc;
      std::copy(cur, cur + nc, next);
      const double l = log_of(v);
      for (const auto& [c, g] : level_caps[level]) next[c] += g * l;
      acc = count_candidates(level + 1, sums, limit, acc);
    }
    return acc;
  }
};

Enumerator::Enumerator(const TorsorModel& model, const Region& region, const Rat& B, EnumOptions options)
    : impl_(std::make_unique<Impl>()) {
  Impl& e = *impl_;
  e.model = &model;
  e.options = options;
  e.n = model.n;
  if (B <= 0) throw ValidationError("B must be positive");
  if (model.n > 31) throw BudgetError("more than 31 rays is not supported by the sign bookkeeping");
  const auto dim = static_cast<std::size_t>(model.rho);
  auto cons = region_polytope(model, region, B);
  if (!is_bounded(cons, dim)) throw ValidationError("region is unbounded on the dual effective cone");
  auto verts = log_vertices(cons, dim);
  if (verts.empty()) {
    e.empty = true;
    e.bounds.assign(e.n, Int(0));
    return;
  }
  for (std::size_t l = 0; l < e.n; ++l) {
    Int m = floor_of(exp_sup(verts, to_q(model.lattice.classes[l])));
    e.bounds.push_back(m);
    if (m < 1) e.empty = true;
    if (m > Int("4611686018427387904")) throw BudgetError("coordinate bound exceeds 2^62");
    e.M.push_back(m.get_si());
  }
  if (e.empty) return;

  // Pruning caps from classes c with H_c >= prod |y|^{a^sigma(c)} on every cone.
  e.caps.push_back({std::vector<double>(e.n, 1.0), exp_sup(verts, model.omega).log()});
  QMat cols;
  for (std::size_t s = 0; s < model.exponents.size(); ++s)
    for (std::size_t l = 0; l < e.n; ++l) {
      QVec c;
      for (int i = 0; i < model.rho; ++i) c.push_back(Rat(static_cast<long>(model.exponents[s][static_cast<std::size_t>(i)][l])));
      cols.push_back(c);
    }
  QMat nef = dual_cone(make_cone(cols, dim)).generators;
  if (is_nef(model.lattice, model.fan, model.lattice.anticanonical)) nef.push_back(model.omega);
  for (const auto& c : nef) {
    const double bound = exp_sup(verts, c).log();
    const Int scale = lcm_of_denominators(c);
    for (std::size_t s = 0; s < model.exponents.size(); ++s) {
      IVec g = class_exponents(model, s, c, scale);
      std::vector<double> gd = to_doubles(g);
      for (auto& x : gd) x /= scale.get_d();
      e.caps.push_back({gd, bound});
    }
  }
  e.level_caps.resize(e.n);
  for (std::size_t c = 0; c < e.caps.size(); ++c)
    for (std::size_t l = 0; l < e.n; ++l)
      if (e.caps[c].g[l] > 0) e.level_caps[l].push_back({c, e.caps[c].g[l]});

  e.level_collections.resize(e.n);
  for (const auto& c : model.collections) e.level_collections[static_cast<std::size_t>(*std::max_element(c.begin(), c.end()))].push_back(c);

  std::vector<RegionConstraint> tests = region.constraints;
  if (region.cone)
    for (const auto& f : facets_of(*region.cone)) {
      QVec q = f;
      for (auto& x : q) x = -x;
      tests.push_back({q, Rat(1), Rat(0)});
    }
  for (std::size_t s = 0; s < model.exponents.size(); ++s) {
    std::vector<Impl::LeafConstraint> lc;
    for (const auto& t : tests) {
      Int scale = lcm_of_denominators(t.cls);
      mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), t.s.get_den_mpz_t());
      IVec g = class_exponents(model, s, t.cls, scale);
      Rat sd = t.s * scale;
      Rat thr = rat_pow(t.gamma, scale.get_si()) * rat_pow(B, sd.get_num().get_si());
      lc.push_back({std::vector<std::int64_t>(g.begin(), g.end()), PosReal(thr).log(), thr});
    }
    e.leaf.push_back(lc);
    std::vector<std::vector<double>> sel;
    for (const auto& row : model.select[s]) sel.push_back(to_doubles(row));
    e.select.push_back(sel);
  }
  const std::int64_t maxm = *std::max_element(e.M.begin(), e.M.end());
  if (maxm < (1 << 24)) {
    e.logtab.resize(static_cast<std::size_t>(maxm) + 1, 0.0);
    for (std::int64_t v = 1; v <= maxm; ++v) e.logtab[static_cast<std::size_t>(v)] = std::log(static_cast<double>(v));
  }
}

Enumerator::~Enumerator() = default;

const std::vector<Int>& Enumerator::bounds() const { return impl_->bounds; }
bool Enumerator::empty() const { return impl_->empty; }

unsigned Enumerator::workers() const {
  if (impl_->options.threads) return impl_->options.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t Enumerator::candidates(std::uint64_t limit) const {
  if (impl_->empty) return 0;
  std::vector<double> sums((impl_->n + 1) * impl_->caps.size(), 0.0);
  return impl_->count_candidates(0, sums, limit, 0);
}

std::uint64_t Enumerator::run_sharded(unsigned workers, const std::function<Visitor(unsigned)>& make_visitor) const {
  const Impl& e = *impl_;
  if (e.empty) return 0;
  const std::uint64_t cand = candidates(e.options.max_candidates);
  if (cand > e.options.max_candidates)
    throw BudgetError("enumeration needs more than " + std::to_string(e.options.max_candidates) +
                      " candidate tuples; lower B or tighten the region");
  workers = std::max(1u, workers);
  std::vector<Visitor> visitors;
  for (unsigned w = 0; w < workers; ++w) visitors.push_back(make_visitor ? make_visitor(w) : Visitor{});
  std::vector<std::uint64_t> found(workers, 0);
  if (workers == 1) {
    Impl::Worker wk(e, 0, 1, &visitors[0]);
    wk.descend(0);
    found[0] = wk.found;
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        try {
          Impl::Worker wk(e, w, workers, &visitors[w]);
          wk.descend(0);
          found[w] = wk.found;
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  std::uint64_t total = 0;
  for (auto f : found) total += f;
  return total * e.model->sign_multiplicity();
}

std::uint64_t Enumerator::run(const Visitor& visitor) const {
  return run_sharded(1, [&](unsigned) { return visitor; });
}

std::uint64_t Enumerator::count() const { return run_sharded(workers(), nullptr); }

std::uint64_t enumerate(const TorsorModel& model, const Region& region, const Rat& B, const Visitor& visitor,
                        EnumOptions options) {
  return Enumerator(model, region, B, options).run(visitor);
}

std::uint64_t count_points(const TorsorModel& model, const Region& region, const Rat& B, EnumOptions options) {
  return Enumerator(model, region, B, options).count();
}

Region anticanonical_region(const TorsorModel& model) {
  Region r;
  r.constraints.push_back({model.omega, Rat(1), Rat(1)});
  return r;
}

// Translated polyhedra

double nu_union(const TorsorModel& model, const std::vector<Region>& pieces) {
  if (pieces.size() > 16) throw BudgetError("at most 16 pieces in a union");
  const auto dim = static_cast<std::size_t>(model.rho);
  double total = 0;
  for (std::uint32_t mask = 1; mask < (1u << pieces.size()); ++mask) {
    std::vector<LogConstraint> cons;
    for (std::size_t j = 0; j < pieces.size(); ++j)
      if (mask & (1u << j)) {
        auto c = region_polytope(model, pieces[j], Rat(1), false);
        cons.insert(cons.end(), c.begin(), c.end());
      }
    const double v = integrate_exp_polytope(cons, dim, model.omega);
    total += (std::popcount(mask) % 2 ? 1.0 : -1.0) * v;
  }
  return total;
}

CountResult count_translated_polyhedron(const TorsorModel& model, const std::vector<Region>& pieces, const QVec& u,
                                        const Rat& B, EnumOptions options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (u.size() != static_cast<std::size_t>(model.rho)) throw ValidationError("u must have rho entries");
  for (const auto& c : model.lattice.classes)
    if (dot(to_q(c), u) <= 0) throw ValidationError("u is not interior to the dual effective cone");
  if (pieces.empty()) throw ValidationError("D_1 needs at least one piece");
  std::vector<Region> shifted;
  for (const auto& p : pieces) {
    if (p.cone) throw ValidationError("D_1 pieces are polytopes; cone restrictions do not translate");
    for (const auto& c : p.constraints)
      if (c.s != 0) throw ValidationError("D_1 constraints must have s = 0");
    if (!is_bounded(region_polytope(model, p, Rat(1), false), static_cast<std::size_t>(model.rho)))
      throw ValidationError("D_1 piece is not compact");
    Region q = p;
    for (auto& c : q.constraints) c.s = dot(c.cls, u);
    shifted.push_back(q);
  }
  CountResult res;
  const std::uint64_t mult = model.sign_multiplicity();
  for (std::size_t j = 0; j < shifted.size(); ++j) {
    Enumerator en(model, shifted[j], B, options);
    if (en.empty()) continue;
    std::vector<std::uint64_t> repeated(en.workers(), 0);
    const std::uint64_t total = en.run_sharded(en.workers(), [&](unsigned w) -> Visitor {
      if (j == 0) return {};
      return [&, w](const PointView& p) {
        MultiHeight mh = p.heights();
        for (std::size_t i = 0; i < j; ++i)
          if (region_membership(mh, shifted[i], B)) {
            ++repeated[w];
            break;
          }
      };
    });
    res.count += total - mult * std::accumulate(repeated.begin(), repeated.end(), std::uint64_t{0});
  }
  res.nu = nu_union(model, pieces);
  res.scale = std::exp(dot(model.omega, u).get_d() * std::log(B.get_d()));
  res.seconds = seconds_since(t0);
  return res;
}

// Simplicial cones and boxes

SimplexCone make_simplex_cone(const TorsorModel& model, const QMat& generators) {
  const auto rho = static_cast<std::size_t>(model.rho);
  if (generators.size() != rho) throw ValidationError("simplicial cone needs rho generators");
  for (const auto& w : generators) {
    if (w.size() != rho) throw ValidationError("cone generator has wrong length");
    if (!contains(model.dual_eff, w)) throw ValidationError("cone is not inside the dual effective cone");
  }
  auto inv = inverse(transpose(generators));
  if (!inv) throw ValidationError("cone generators are linearly dependent");
  SimplexCone c;
  c.generators = generators;
  Rat pairing_product = 1, weight_product = 1;
  for (std::size_t i = 0; i < rho; ++i) {
    QVec L = primitive((*inv)[i]);
    c.duals.push_back(to_ivec([&] {
      ZVec z;
      for (const auto& x : L) z.push_back(x.get_num());
      return z;
    }()));
    const Rat p = dot(L, generators[i]);
    if (p <= 0) throw InternalError("dual basis orientation");
    const Rat w = dot(model.omega, generators[i]) / p;
    if (w <= 0) throw ValidationError("anticanonical class not positive on the cone");
    c.weights.push_back(w);
    pairing_product *= p;
    weight_product *= w;
  }
  c.det_dual = abs(determinant(generators)) / pairing_product;
  c.nu_minus = c.det_dual / weight_product;
  return c;
}

RationalCone as_cone(const SimplexCone& cone) {
  RationalCone c = make_cone(cone.generators, cone.generators.size());
  c.facets = to_q(cone.duals);
  return c;
}

double nu_box(const SimplexCone& cone, const QVec& lower, const QVec& upper) {
  double v = cone.det_dual.get_d();
  for (std::size_t i = 0; i < cone.weights.size(); ++i) {
    const double w = cone.weights[i].get_d();
    v *= (std::pow(upper[i].get_d(), w) - std::pow(lower[i].get_d(), w)) / w;
  }
  return v;
}

namespace {

double box_scale(const SimplexCone& cone, const QVec& B) {
  double s = 0;
  for (std::size_t i = 0; i < B.size(); ++i) s += cone.weights[i].get_d() * std::log(B[i].get_d());
  return std::exp(s);
}

void check_box_vector(const SimplexCone& cone, const QVec& v, const char* what) {
  if (v.size() != cone.weights.size()) throw ValidationError(std::string(what) + " must have rho entries");
  for (const auto& x : v)
    if (x <= 0) throw ValidationError(std::string(what) + " entries must be positive");
}

}  // namespace

CountResult count_box(const TorsorModel& model, const SimplexCone& cone, const QVec& lower, const QVec& upper,
                      const QVec& B, EnumOptions options) {
  const auto t0 = std::chrono::steady_clock::now();
  check_box_vector(cone, lower, "lower bounds");
  check_box_vector(cone, upper, "upper bounds");
  check_box_vector(cone, B, "B");
  Region r;
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (lower[i] > upper[i]) throw ValidationError("box needs a_i <= b_i");
    if (B[i] < 1) throw ValidationError("box needs B_i >= 1");
    const QVec L = to_q(cone.duals[i]);
    QVec negL = L;
    for (auto& x : negL) x = -x;
    r.constraints.push_back({L, upper[i] * B[i], Rat(0)});
    r.constraints.push_back({negL, 1 / (lower[i] * B[i]), Rat(0)});
  }
  CountResult res;
  res.count = count_points(model, r, Rat(1), options);
  res.nu = nu_box(cone, lower, upper);
  res.scale = box_scale(cone, B);
  res.seconds = seconds_since(t0);
  return res;
}

WallCollision::WallCollision(std::size_t i, long k)
    : std::runtime_error("height on the wall " + std::to_string(k) + " of coordinate " + std::to_string(i)),
      index(i), wall(k) {}

BoxDecomposition box_decomposition_from(const QVec& b) {
  BoxDecomposition d;
  for (const auto& x : b) {
    if (x <= 1) throw ValidationError("box step e^beta must exceed 1");
    d.b.push_back(x);
    d.beta.push_back(std::log(x.get_d()));
  }
  return d;
}

BoxDecomposition build_box_decomposition(const SimplexCone& cone, std::uint64_t seed, unsigned attempt) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + attempt);
  QVec b;
  for (std::size_t i = 0; i < cone.weights.size(); ++i) {
    const std::uint64_t den = 1'000'000'000ULL + rng() % 1'000'000'000ULL;
    const std::uint64_t num = den * 35 / 100 + rng() % (den * 55 / 100);
    Rat x(Int(static_cast<unsigned long>(den + num)), Int(static_cast<unsigned long>(den)));
    x.canonicalize();
    b.push_back(x);
  }
  BoxDecomposition d = box_decomposition_from(b);
  d.seed = seed;
  d.attempt = attempt;
  return d;
}

std::vector<long> box_index(const BoxDecomposition& dec, const QVec& B, const std::vector<double>& log_heights,
                            const std::function<Rat(std::size_t)>& exact_height) {
  std::vector<long> n;
  for (std::size_t i = 0; i < B.size(); ++i)
    n.push_back(exact_box_coordinate(dec.b[i], B[i], dec.beta[i], std::log(B[i].get_d()), log_heights[i],
                                     [&] { return exact_height(i); }, i));
  return n;
}

Region box_region(const SimplexCone& cone, const BoxDecomposition& dec, const std::vector<long>& n, const QVec& B,
                  std::optional<std::size_t> slab) {
  if (n.size() != B.size() || n.size() != cone.duals.size()) throw ValidationError("box index has wrong length");
  Region r;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 1) throw ValidationError("box indices start at 1");
    const QVec L = to_q(cone.duals[i]);
    QVec negL = L;
    for (auto& x : negL) x = -x;
    r.constraints.push_back({L, B[i] * rat_pow(dec.b[i], -(n[i] - 1)), Rat(0)});
    r.constraints.push_back({negL, rat_pow(dec.b[i], n[i]) / B[i], Rat(0)});
  }
  if (slab) {
    if (*slab >= n.size()) throw ValidationError("slab index out of range");
    r.constraints.push_back({to_q(cone.duals[*slab]), Rat(1), Rat(0)});
  }
  return r;
}

ConeBoxResult count_cone_box(const TorsorModel& model, const SimplexCone& cone, const QVec& B, std::uint64_t seed,
                             EnumOptions options) {
  return count_cone_box(model, cone, B, build_box_decomposition(cone, seed), options);
}

ConeBoxResult count_cone_box(const TorsorModel& model, const SimplexCone& cone, const QVec& B,
                             const BoxDecomposition& initial, EnumOptions options) {
  const auto t0 = std::chrono::steady_clock::now();
  check_box_vector(cone, B, "B");
  const std::size_t rho = B.size();
  Region r;
  for (std::size_t i = 0; i < rho; ++i) r.constraints.push_back({to_q(cone.duals[i]), B[i], Rat(0)});
  r.cone = as_cone(cone);
  Enumerator en(model, r, Rat(1), options);
  std::vector<CompiledClass> classes;
  for (const auto& L : cone.duals) classes.push_back(compile_class(model, L));
  std::vector<double> logB;
  for (const auto& x : B) logB.push_back(std::log(x.get_d()));

  ConeBoxResult res;
  BoxDecomposition dec = initial;
  for (unsigned attempt = 0;; ++attempt) {
    if (attempt >= kMaxAttempts) throw InternalError("box walls kept colliding with heights");
    if (attempt > 0) dec = build_box_decomposition(cone, initial.seed, initial.attempt + attempt);
    // Dense histogram up to the emptiness bound; anything beyond goes to the overflow map.
    std::vector<long> cap(rho);
    std::size_t cells = 1;
    for (std::size_t i = 0; i < rho; ++i) {
      cap[i] = std::max<long>(1, static_cast<long>(std::floor(logB[i] / dec.beta[i] + 1.0)) + 1);
      cells *= static_cast<std::size_t>(cap[i]);
    }
    if (cells > kMaxTableEntries) throw BudgetError("too many boxes in the decomposition");
    const unsigned workers = en.workers();
    std::vector<std::vector<std::uint64_t>> dense(workers, std::vector<std::uint64_t>(cells, 0));
    std::vector<std::map<std::vector<long>, std::uint64_t>> overflow(workers);
    const std::uint64_t mult = model.sign_multiplicity();
    try {
      res.count = en.run_sharded(workers, [&](unsigned w) -> Visitor {
        return [&, w](const PointView& p) {
          std::size_t idx = 0, stride = 1;
          bool inside = true;
          long n[32];
          for (std::size_t i = 0; i < rho; ++i) {
            n[i] = exact_box_coordinate(dec.b[i], B[i], dec.beta[i], logB[i], p.log_height(classes[i]),
                                        [&] { return p.height(classes[i]); }, i);
            if (n[i] > cap[i]) inside = false;
            idx += static_cast<std::size_t>(n[i] - 1) * stride;
            stride *= static_cast<std::size_t>(cap[i]);
          }
          if (inside)
            dense[w][idx] += mult;
          else
            overflow[w][std::vector<long>(n, n + rho)] += mult;
        };
      });
    } catch (const WallCollision&) {
      continue;
    }
    res.attempts = attempt + 1;
    res.decomposition = dec;
    res.histogram.clear();
    for (unsigned w = 0; w < workers; ++w) {
      for (std::size_t idx = 0; idx < cells; ++idx) {
        if (!dense[w][idx]) continue;
        std::vector<long> n(rho);
        std::size_t rem = idx;
        for (std::size_t i = 0; i < rho; ++i) {
          n[i] = static_cast<long>(rem % static_cast<std::size_t>(cap[i])) + 1;
          rem /= static_cast<std::size_t>(cap[i]);
        }
        res.histogram[n] += dense[w][idx];
      }
      for (const auto& [n, c] : overflow[w]) res.histogram[n] += c;
    }
    break;
  }

  // Boxes with some b_i^{n_i - 1} > B_i must be empty.
  res.empty_beyond_bound = true;
  for (const auto& [n, c] : res.histogram)
    for (std::size_t i = 0; i < rho; ++i)
      if (c && rat_pow(dec.b[i], n[i] - 1) > B[i]) res.empty_beyond_bound = false;
  res.max_index.clear();
  double keep = 1;
  res.tail_d = cone.weights[0].get_d();
  double minB = B[0].get_d();
  for (std::size_t i = 0; i < rho; ++i) {
    const double x = logB[i] / dec.beta[i] + 1.0;
    res.max_index.push_back(static_cast<long>(std::floor(x)));
    const double k = std::ceil(x);
    const double term = std::exp(-(k - 1) * dec.beta[i] * cone.weights[i].get_d());
    keep *= 1 - term;
    res.tail_d = std::min(res.tail_d, cone.weights[i].get_d());
    minB = std::min(minB, B[i].get_d());
  }
  res.nu = cone.nu_minus.get_d();
  res.tail_nu = res.nu * (1 - keep);
  res.tail_c = static_cast<double>(rho) * res.nu;
  res.tail_bound = res.tail_c * std::pow(minB, -res.tail_d);
  res.scale = box_scale(cone, B);
  res.seconds = seconds_since(t0);
  return res;
}

SlabResult count_bad_slab(const TorsorModel& model, const SimplexCone& cone, const BoxDecomposition& dec,
                          std::size_t k, const std::vector<long>& n, const QVec& B, EnumOptions options) {
  check_box_vector(cone, B, "B");
  SlabResult res;
  res.count = count_points(model, box_region(cone, dec, n, B, k), Rat(1), options);
  double s = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i == k) continue;
    const double w = cone.weights[i].get_d();
    s += w * std::log(B[i].get_d()) - static_cast<double>(n[i]) * dec.beta[i] * w;
  }
  res.shape = std::exp(s);
  return res;
}

// f tables

std::uint64_t FTable::at(const std::vector<std::int64_t>& y) const {
  std::size_t idx = 0, stride = 1;
  for (std::size_t i = 0; i < bmax.size(); ++i) {
    if (y[i] < 1 || y[i] > bmax[i]) return 0;
    idx += static_cast<std::size_t>(y[i] - 1) * stride;
    stride *= static_cast<std::size_t>(bmax[i]);
  }
  return counts[idx];
}

std::uint64_t FTable::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

std::uint64_t FTable::box_sum(const std::vector<std::int64_t>& B) const {
  std::uint64_t s = 0;
  for (std::size_t idx = 0; idx < counts.size(); ++idx) {
    if (!counts[idx]) continue;
    std::size_t rem = idx;
    bool in = true;
    for (std::size_t i = 0; i < bmax.size() && in; ++i) {
      const auto y = static_cast<std::int64_t>(rem % static_cast<std::size_t>(bmax[i])) + 1;
      rem /= static_cast<std::size_t>(bmax[i]);
      if (y > B[i]) in = false;
    }
    if (in) s += counts[idx];
  }
  return s;
}

FTablePair tabulate_f(const TorsorModel& model, const SimplexCone& cone, const std::vector<std::int64_t>& bmax,
                      EnumOptions options) {
  return tabulate_f(model, cone, bmax, {}, options);
}

FTablePair tabulate_f(const TorsorModel& model, const SimplexCone& cone, const std::vector<std::int64_t>& bmax,
                      const std::vector<RegionConstraint>& restriction, EnumOptions options) {
  const std::size_t rho = cone.duals.size();
  if (bmax.size() != rho) throw ValidationError("table caps must have rho entries");
  std::size_t cells = 1;
  for (auto b : bmax) {
    if (b < 1) throw ValidationError("table caps must be at least 1");
    if (static_cast<double>(cells) * static_cast<double>(b) > static_cast<double>(kMaxTableEntries))
      throw BudgetError("f table would exceed " + std::to_string(kMaxTableEntries) + " entries");
    cells *= static_cast<std::size_t>(b);
  }
  Region r;
  for (std::size_t i = 0; i < rho; ++i) r.constraints.push_back({to_q(cone.duals[i]), Rat(bmax[i] + 1), Rat(0)});
  for (const auto& c : restriction) r.constraints.push_back(c);
  r.cone = as_cone(cone);
  std::vector<CompiledClass> classes;
  for (const auto& L : cone.duals) classes.push_back(compile_class(model, L));
  Enumerator en(model, r, Rat(1), options);
  const unsigned workers = en.workers();
  std::vector<std::vector<std::uint64_t>> fl(workers, std::vector<std::uint64_t>(cells, 0)), ce = fl;
  const std::uint64_t mult = model.sign_multiplicity();
  en.run_sharded(workers, [&](unsigned w) -> Visitor {
    return [&, w](const PointView& p) {
      std::size_t fi = 0, ci = 0, stride = 1;
      bool fin = true, cin = true;
      for (std::size_t i = 0; i < rho; ++i) {
        const double v = std::exp(p.log_height(classes[i]));
        std::int64_t f, c;
        if (std::fabs(v - std::round(v)) < 1e-7 * (1 + v)) {
          Rat h = p.height(classes[i]);
          Int q;
          mpz_fdiv_q(q.get_mpz_t(), h.get_num_mpz_t(), h.get_den_mpz_t());
          f = q.get_si();
          mpz_cdiv_q(q.get_mpz_t(), h.get_num_mpz_t(), h.get_den_mpz_t());
          c = q.get_si();
        } else {
          f = static_cast<std::int64_t>(std::floor(v));
          c = f + 1;
        }
        if (f < 1 || f > bmax[i]) fin = false;
        if (c < 1 || c > bmax[i]) cin = false;
        fi += static_cast<std::size_t>(std::max<std::int64_t>(f - 1, 0)) * stride;
        ci += static_cast<std::size_t>(std::max<std::int64_t>(c - 1, 0)) * stride;
        stride *= static_cast<std::size_t>(bmax[i]);
      }
      if (fin) fl[w][fi] += mult;
      if (cin) ce[w][ci] += mult;
    };
  });
  FTablePair out;
  out.floor = {FVariant::Floor, cone.duals, bmax, std::vector<std::uint64_t>(cells, 0)};
  out.ceil = {FVariant::Ceil, cone.duals, bmax, std::vector<std::uint64_t>(cells, 0)};
  for (unsigned w = 0; w < workers; ++w)
    for (std::size_t i = 0; i < cells; ++i) {
      out.floor.counts[i] += fl[w][i];
      out.ceil.counts[i] += ce[w][i];
    }
  return out;
}

namespace {

// prod y_i^{alpha_i} <= B, exactly.
bool monomial_le(const std::vector<std::int64_t>& y, const QVec& alpha, const Rat& B, const std::vector<double>& logy,
                 double logB) {
  double v = 0, mag = std::fabs(logB);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = alpha[i].get_d() * logy[i];
    v += t;
    mag += std::fabs(t);
  }
  const double tol = kSlack * (1 + mag);
  if (v > logB + tol) return false;
  if (v < logB - tol) return true;
  const Int D = lcm_of_denominators(alpha);
  Rat lhs = 1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    Rat e = alpha[i] * D;
    lhs *= rat_pow(Rat(static_cast<long>(y[i])), e.get_num().get_si());
  }
  return lhs <= rat_pow(B, D.get_si());
}

}  // namespace

std::uint64_t hyperbola_sum(const FTable& table, const QMat& alphas, const Rat& B) {
  const std::size_t rho = table.bmax.size();
  if (alphas.empty()) throw ValidationError("hyperbola sum needs at least one constraint");
  for (const auto& a : alphas) {
    if (a.size() != rho) throw ValidationError("alpha rows must have rho entries");
    for (const auto& x : a)
      if (x < 0) throw ValidationError("alpha entries must be nonnegative");
  }
  if (B < 1) return 0;
  const double logB = std::log(B.get_d());
  // Largest y_i allowed when the other coordinates are 1.
  std::vector<std::int64_t> reach(rho, -1);
  for (std::size_t i = 0; i < rho; ++i) {
    for (const auto& a : alphas) {
      if (a[i] == 0) continue;
      QVec unit(rho, Rat(0));
      unit[i] = a[i];
      const double guess = std::exp(logB / a[i].get_d());
      if (guess > 9e15) throw ValidationError("table insufficient: domain too large");
      auto y = static_cast<std::int64_t>(std::floor(guess));
      auto ok = [&](std::int64_t v) {
        std::vector<std::int64_t> yy(rho, 1);
        yy[i] = v;
        std::vector<double> ly(rho, 0.0);
        ly[i] = std::log(static_cast<double>(v));
        return monomial_le(yy, unit, B, ly, logB);
      };
      while (y > 1 && !ok(y)) --y;
      while (ok(y + 1)) ++y;
      if (reach[i] < 0 || y < reach[i]) reach[i] = y;
    }
    if (reach[i] < 0) throw ValidationError("table insufficient: domain unbounded in coordinate " + std::to_string(i));
    if (reach[i] > table.bmax[i])
      throw ValidationError("table insufficient: coordinate " + std::to_string(i) + " needs " + std::to_string(reach[i]) +
                            " > " + std::to_string(table.bmax[i]));
  }
  std::uint64_t s = 0;
  std::vector<std::int64_t> y(rho);
  std::vector<double> ly(rho);
  for (std::size_t idx = 0; idx < table.counts.size(); ++idx) {
    if (!table.counts[idx]) continue;
    std::size_t rem = idx;
    for (std::size_t i = 0; i < rho; ++i) {
      y[i] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(table.bmax[i])) + 1;
      rem /= static_cast<std::size_t>(table.bmax[i]);
      ly[i] = std::log(static_cast<double>(y[i]));
    }
    if (std::all_of(alphas.begin(), alphas.end(), [&](const QVec& a) { return monomial_le(y, a, B, ly, logB); }))
      s += table.counts[idx];
  }
  return s;
}

// Anticanonical counts

std::uint64_t count_in_cones(const TorsorModel& model, const std::vector<QMat>& cones, const Rat& B,
                             EnumOptions options) {
  if (cones.empty()) throw ValidationError("need at least one cone");
  const auto dim = static_cast<std::size_t>(model.rho);
  RationalCone c = with_facets(make_cone(cones[0], dim));
  for (std::size_t j = 1; j < cones.size(); ++j) c = intersect(c, with_facets(make_cone(cones[j], dim)));
  Region r = anticanonical_region(model);
  r.cone = c;
  return count_points(model, r, B, options);
}

std::uint64_t count_anticanonical(const TorsorModel& model, const std::vector<QMat>& cones, const Rat& B,
                                  AnticanonicalMode mode, EnumOptions options) {
  if (mode == AnticanonicalMode::Direct) return count_points(model, anticanonical_region(model), B, options);
  if (cones.empty() || cones.size() > 20) throw ValidationError("inclusion-exclusion needs 1 to 20 cones");
  std::int64_t total = 0;
  for (std::uint32_t mask = 1; mask < (1u << cones.size()); ++mask) {
    std::vector<QMat> sub;
    for (std::size_t j = 0; j < cones.size(); ++j)
      if (mask & (1u << j)) sub.push_back(cones[j]);
    const auto c = static_cast<std::int64_t>(count_in_cones(model, sub, B, options));
    total += std::popcount(mask) % 2 ? c : -c;
  }
  if (total < 0) throw InternalError("inclusion-exclusion produced a negative count");
  return static_cast<std::uint64_t>(total);
}

}  // namespace toric
