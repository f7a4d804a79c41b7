#include "toric/posreal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "toric/cone.hpp"

namespace toric {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double log_int(const Int& z) {
  long exp = 0;
  double m = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(std::fabs(m)) + static_cast<double>(exp) * kLn2;
}

double log_rat(const Rat& q) { return log_int(q.get_num()) - log_int(q.get_den()); }

Int int_pow(const Int& b, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

}  // namespace

Rat rat_pow(const Rat& base, long exponent) {
  if (exponent == 0) return 1;
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Rat r(int_pow(base.get_num(), e), int_pow(base.get_den(), e));
  r.canonicalize();
  return exponent < 0 ? Rat(1 / r) : r;
}

Int lcm_of_denominators(const QVec& v) {
  Int l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  return l;
}

PosReal::PosReal(const Rat& base) { add_factor(base, 1); }

PosReal PosReal::power(const Rat& base, const Rat& exponent) {
  PosReal p;
  p.add_factor(base, exponent);
  return p;
}

void PosReal::add_factor(const Rat& base, const Rat& exponent) {
  if (base <= 0) throw ValidationError("PosReal base must be positive, got " + base.get_str());
  if (exponent == 0 || base == 1) return;
  for (auto it = factors_.begin(); it != factors_.end(); ++it) {
    if (it->first == base) {
      it->second += exponent;
      if (it->second == 0) factors_.erase(it);
      return;
    }
  }
  factors_.emplace_back(base, exponent);
}

PosReal& PosReal::operator*=(const PosReal& other) {
  for (const auto& [b, e] : other.factors_) add_factor(b, e);
  return *this;
}

PosReal PosReal::operator*(const PosReal& other) const {
  PosReal r = *this;
  r *= other;
  return r;
}

PosReal PosReal::inverse() const { return pow(Rat(-1)); }

PosReal PosReal::pow(const Rat& exponent) const {
  PosReal r;
  if (exponent == 0) return r;
  for (const auto& [b, e] : factors_) r.factors_.emplace_back(b, e * exponent);
  return r;
}

double PosReal::log() const {
  double s = 0;
  for (const auto& [b, e] : factors_) s += e.get_d() * log_rat(b);
  return s;
}

double PosReal::value() const { return std::exp(log()); }

int PosReal::compare_one() const {
  if (factors_.empty()) return 0;
  double s = 0, scale = 0;
  for (const auto& [b, e] : factors_) {
    double t = e.get_d() * log_rat(b);
    s += t;
    scale += std::fabs(t);
  }
  if (std::fabs(s) > 1e-9 * (1.0 + scale)) return s > 0 ? 1 : -1;

  Int l = 1;
  for (const auto& f : factors_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), f.second.get_den_mpz_t());
  double bits = 0;
  for (const auto& [b, e] : factors_) {
    Rat k = e * l;
    bits += std::fabs(k.get_d()) * (static_cast<double>(mpz_sizeinbase(b.get_num_mpz_t(), 2)) +
                                    static_cast<double>(mpz_sizeinbase(b.get_den_mpz_t(), 2)));
  }
  if (bits > 6.4e7) throw BudgetError("exact comparison needs more than 64M bits");
  Int lhs = 1, rhs = 1;
  for (const auto& [b, e] : factors_) {
    Rat kr = e * l;
    Int k = kr.get_num();
    Int absk = abs(k);
    unsigned long ku = absk.get_ui();
    if (k > 0) {
      lhs *= int_pow(b.get_num(), ku);
      rhs *= int_pow(b.get_den(), ku);
    } else {
      lhs *= int_pow(b.get_den(), ku);
      rhs *= int_pow(b.get_num(), ku);
    }
  }
  return lhs > rhs ? 1 : lhs < rhs ? -1 : 0;
}

bool PosReal::is_rational() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.second.get_den() == 1; });
}

Rat PosReal::as_rational() const {
  Rat r = 1;
  for (const auto& [b, e] : factors_) {
    if (e.get_den() != 1) throw InternalError("PosReal has a fractional exponent");
    r *= rat_pow(b, e.get_num().get_si());
  }
  return r;
}

std::string PosReal::to_string() const {
  if (factors_.empty()) return "1";
  std::ostringstream os;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) os << '*';
    os << '(' << factors_[i].first.get_str() << ")^(" << factors_[i].second.get_str() << ')';
  }
  return os.str();
}

int compare(const PosReal& a, const PosReal& b) { return (a * b.inverse()).compare_one(); }

Int floor_of(const PosReal& x) {
  double lg = x.log();
  Int m;
  if (lg < 0) {
    m = 0;
  } else if (lg < 700) {
    m = Int(std::floor(std::exp(lg)));
  } else {
    throw BudgetError("value too large to floor: exp(" + std::to_string(lg) + ")");
  }
  auto le = [&](const Int& k) { return k <= 0 || compare(PosReal(Rat(k)), x) <= 0; };
  while (le(m + 1)) ++m;
  while (m > 0 && !le(m)) --m;
  return m;
}

std::vector<double> LogVertex::logs() const {
  std::vector<double> out;
  for (const auto& c : coords) out.push_back(c.log());
  return out;
}

std::vector<LogVertex> log_vertices(const std::vector<LogConstraint>& constraints, std::size_t dim) {
  std::vector<LogVertex> out;
  const std::size_t m = constraints.size();
  if (m < dim) return out;
  std::vector<std::size_t> idx(dim);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    QMat a;
    for (auto i : idx) a.push_back(constraints[i].normal);
    auto inv = inverse(a);
    if (inv) {
      LogVertex v;
      for (std::size_t i = 0; i < dim; ++i) {
        PosReal c;
        for (std::size_t j = 0; j < dim; ++j) c *= constraints[idx[j]].bound.pow((*inv)[i][j]);
        v.coords.push_back(c);
      }
      bool feasible = true;
      for (std::size_t k = 0; k < m && feasible; ++k) {
        if (std::find(idx.begin(), idx.end(), k) != idx.end()) {
          v.tight.push_back(k);
          continue;
        }
        int s = compare(exp_pairing(v, constraints[k].normal), constraints[k].bound);
        if (s > 0) feasible = false;
        if (s == 0) v.tight.push_back(k);
      }
      if (feasible) {
        bool dup = std::any_of(out.begin(), out.end(), [&](const LogVertex& w) {
          for (std::size_t i = 0; i < dim; ++i)
            if (compare(w.coords[i], v.coords[i]) != 0) return false;
          return true;
        });
        if (!dup) out.push_back(std::move(v));
      }
    }
    std::size_t i = dim;
    while (i > 0 && idx[i - 1] == m - dim + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < dim; ++j) idx[j] = idx[j - 1] + 1;
  }
  for (auto& v : out) std::sort(v.tight.begin(), v.tight.end());
  return out;
}

bool is_bounded(const std::vector<LogConstraint>& constraints, std::size_t dim) {
  QMat gens;
  for (const auto& c : constraints) {
    QVec g = c.normal;
    for (auto& x : g) x = -x;
    gens.push_back(g);
  }
  return dual_cone(make_cone(gens, dim)).generators.empty();
}

PosReal exp_pairing(const LogVertex& v, const QVec& c) {
  PosReal r;
  for (std::size_t i = 0; i < c.size(); ++i) r *= v.coords[i].pow(c[i]);
  return r;
}

PosReal exp_sup(const std::vector<LogVertex>& vertices, const QVec& c) {
  if (vertices.empty()) throw ValidationError("supremum over an empty polytope");
  PosReal best = exp_pairing(vertices[0], c);
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    PosReal p = exp_pairing(vertices[i], c);
    if (compare(p, best) > 0) best = p;
  }
  return best;
}

}  // namespace toric
