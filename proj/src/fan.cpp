#include "toric/fan.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace toric {

namespace {

using nlohmann::json;

[[noreturn]] void fail(FanErrorKind kind, const std::string& msg) { throw FanError(kind, msg); }

std::int64_t gcd_of(const IVec& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

std::string vec_str(const IVec& v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}

QMat cone_matrix(const Fan& fan, const Cone& c) {
  QMat m;
  for (int i : c) m.push_back(to_q(fan.rays[static_cast<std::size_t>(i)]));
  return m;
}

// Coordinates of x in the basis given by the rays of c (rows), or nullopt if singular.
std::optional<QVec> cone_coords(const Fan& fan, const Cone& c, const QVec& x) {
  return solve(transpose(cone_matrix(fan, c)), x);
}

void check_completeness(const Fan& fan, FanDiagnostics& diag) {
  const int d = fan.dim;
  // Every codimension-one face lies in exactly two maximal cones, on opposite sides.
  std::map<Cone, std::vector<std::pair<int, int>>> faces;  // face -> (cone, omitted ray)
  for (std::size_t ci = 0; ci < fan.max_cones.size(); ++ci) {
    const Cone& c = fan.max_cones[ci];
    for (std::size_t k = 0; k < c.size(); ++k) {
      Cone f;
      for (std::size_t j = 0; j < c.size(); ++j)
        if (j != k) f.push_back(c[j]);
      faces[f].emplace_back(static_cast<int>(ci), c[k]);
    }
  }
  bool faces_ok = true;
  std::string detail;
  for (const auto& [face, owners] : faces) {
    if (owners.size() != 2) {
      faces_ok = false;
      detail = "face {" + [&] {
        std::string s;
        for (std::size_t i = 0; i < face.size(); ++i) s += (i ? "," : "") + std::to_string(face[i]);
        return s;
      }() + "} lies in " + std::to_string(owners.size()) + " maximal cone(s)";
      break;
    }
    QVec normal(static_cast<std::size_t>(d), 0);
    if (d == 1) {
      normal[0] = 1;
    } else {
      auto ns = null_space(cone_matrix(fan, face), static_cast<std::size_t>(d));
      if (ns.size() != 1) {
        faces_ok = false;
        detail = "degenerate face";
        break;
      }
      normal = ns[0];
    }
    Rat s0 = dot(normal, to_q(fan.rays[static_cast<std::size_t>(owners[0].second)]));
    Rat s1 = dot(normal, to_q(fan.rays[static_cast<std::size_t>(owners[1].second)]));
    if (sgn(s0) * sgn(s1) >= 0) {
      faces_ok = false;
      detail = "cones " + std::to_string(owners[0].first) + " and " + std::to_string(owners[1].first) +
               " lie on the same side of a shared face";
      break;
    }
  }
  diag.checks.push_back({"complete", -1, faces_ok, faces_ok ? "every facet shared by two cones" : detail});
  if (!faces_ok) return;

  // Generic sample directions must lie in exactly one maximal cone.
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_int_distribution<int> coord(-997, 997);
  int tested = 0;
  for (int attempt = 0; attempt < 2000 && tested < 200; ++attempt) {
    QVec x(static_cast<std::size_t>(d));
    for (auto& xi : x) xi = coord(rng);
    if (is_zero(x)) continue;
    int inside = 0;
    bool generic = true;
    for (const auto& c : fan.max_cones) {
      auto coeffs = cone_coords(fan, c, x);
      if (!coeffs) continue;
      bool nonneg = true;
      for (const auto& v : *coeffs) {
        if (v == 0) generic = false;
        if (v < 0) nonneg = false;
      }
      if (nonneg) ++inside;
    }
    if (!generic) continue;
    ++tested;
    if (inside != 1) {
      QVec p = primitive(x);
      IVec xi;
      for (const auto& v : p) xi.push_back(v.get_num().get_si());
      diag.checks.push_back({"complete", -1, false,
                             "direction " + vec_str(xi) + " lies in " + std::to_string(inside) + " maximal cones"});
      return;
    }
  }
  diag.checks.push_back({"complete", -1, true, std::to_string(tested) + " sampled directions covered once"});
}

}  // namespace

bool FanDiagnostics::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const FanCheck& c) { return c.ok; });
}

std::string FanDiagnostics::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.ok ? "ok   " : "FAIL ") << c.check;
    if (c.index >= 0) os << '[' << c.index << ']';
    if (!c.detail.empty()) os << ": " << c.detail;
    os << '\n';
  }
  return os.str();
}

Fan make_fan(int dim, IMat rays, std::vector<Cone> cones, std::string name) {
  Fan f;
  f.dim = dim;
  f.rays = std::move(rays);
  for (auto& c : cones) std::sort(c.begin(), c.end());
  f.max_cones = std::move(cones);
  f.name = std::move(name);
  return f;
}

FanDiagnostics validate_fan(const Fan& fan) {
  FanDiagnostics diag;
  const auto n = fan.rays.size();
  bool shape_ok = fan.dim > 0 && !fan.max_cones.empty();
  for (const auto& r : fan.rays) shape_ok = shape_ok && r.size() == static_cast<std::size_t>(fan.dim);
  for (const auto& c : fan.max_cones) {
    shape_ok = shape_ok && c.size() == static_cast<std::size_t>(fan.dim);
    for (int i : c) shape_ok = shape_ok && i >= 0 && static_cast<std::size_t>(i) < n;
    shape_ok = shape_ok && std::adjacent_find(c.begin(), c.end()) == c.end();
  }
  diag.checks.push_back({"shape", -1, shape_ok, shape_ok ? "" : "ray or cone sizes inconsistent with dim"});
  if (!shape_ok) return diag;

  for (std::size_t i = 0; i < n; ++i) {
    auto g = gcd_of(fan.rays[i]);
    bool ok = g == 1;
    diag.checks.push_back({"primitive", static_cast<int>(i), ok,
                           ok ? "" : (g == 0 ? "zero ray" : "ray " + vec_str(fan.rays[i]) + " has gcd " + std::to_string(g))});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (fan.rays[i] == fan.rays[j])
        diag.checks.push_back({"distinct", static_cast<int>(j), false, "ray " + std::to_string(j) + " repeats ray " + std::to_string(i)});

  bool all_smooth = true;
  for (std::size_t ci = 0; ci < fan.max_cones.size(); ++ci) {
    IMat m;
    for (int i : fan.max_cones[ci]) m.push_back(fan.rays[static_cast<std::size_t>(i)]);
    auto det = determinant(m);
    bool ok = det == 1 || det == -1;
    all_smooth = all_smooth && ok;
    diag.checks.push_back({"smooth", static_cast<int>(ci), ok, "determinant " + std::to_string(det)});
  }
  std::set<Cone> distinct(fan.max_cones.begin(), fan.max_cones.end());
  if (distinct.size() != fan.max_cones.size())
    diag.checks.push_back({"distinct", -1, false, "a maximal cone is listed twice"});
  if (all_smooth && diag.ok()) check_completeness(fan, diag);
  return diag;
}

void require_valid(const Fan& fan) {
  auto diag = validate_fan(fan);
  for (const auto& c : diag.checks) {
    if (c.ok) continue;
    std::string where = c.index >= 0 ? " " + std::to_string(c.index) : "";
    if (c.check == "shape") fail(FanErrorKind::Malformed, "malformed fan: " + c.detail);
    if (c.check == "primitive") fail(FanErrorKind::NonPrimitive, "non-primitive ray" + where + ": " + c.detail);
    if (c.check == "distinct") fail(FanErrorKind::Duplicate, "duplicate entry: " + c.detail);
    if (c.check == "smooth") fail(FanErrorKind::Singular, "singular cone" + where + ": " + c.detail);
    if (c.check == "complete") fail(FanErrorKind::Incomplete, "fan not complete: " + c.detail);
  }
}

Fan parse_fan(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(FanErrorKind::Malformed, std::string("malformed fan document: ") + e.what());
  }
  Fan fan;
  try {
    if (!doc.is_object()) fail(FanErrorKind::Malformed, "malformed fan document: expected an object");
    for (const char* key : {"dim", "rays", "max_cones"})
      if (!doc.contains(key)) fail(FanErrorKind::Malformed, std::string("malformed fan document: missing \"") + key + "\"");
    fan.dim = doc.at("dim").get<int>();
    for (const auto& r : doc.at("rays")) fan.rays.push_back(r.get<IVec>());
    for (const auto& c : doc.at("max_cones")) {
      Cone cone = c.get<Cone>();
      std::sort(cone.begin(), cone.end());
      fan.max_cones.push_back(cone);
    }
    if (doc.contains("name")) fan.name = doc.at("name").get<std::string>();
    if (doc.contains("names")) fan.names = doc.at("names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(FanErrorKind::Malformed, std::string("malformed fan document: ") + e.what());
  }
  if (!fan.names.empty() && fan.names.size() != fan.rays.size())
    fail(FanErrorKind::Malformed, "malformed fan document: names and rays differ in length");
  require_valid(fan);
  return fan;
}

std::vector<std::string> builtin_fan_names() { return {"P1", "P2", "P1xP1", "F1", "P3"}; }

Fan builtin_fan(std::string_view name) {
  Fan f;
  if (name == "P1") {
    f = make_fan(1, {{1}, {-1}}, {{0}, {1}}, "P1");
  } else if (name == "P2") {
    f = make_fan(2, {{1, 0}, {0, 1}, {-1, -1}}, {{0, 1}, {1, 2}, {0, 2}}, "P2");
  } else if (name == "P1xP1") {
    f = make_fan(2, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, "P1xP1");
  } else if (name == "F1") {
    f = make_fan(2, {{1, 0}, {0, 1}, {-1, 1}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, "F1");
  } else if (name == "P3") {
    f = make_fan(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}},
                 {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}, "P3");
  } else {
    throw ValidationError("unknown builtin fan '" + std::string(name) + "'");
  }
  require_valid(f);
  return f;
}

Fan load_fan(const std::string& name_or_path) {
  for (const auto& n : builtin_fan_names())
    if (n == name_or_path) return builtin_fan(n);
  std::ifstream in(name_or_path);
  if (!in) throw ValidationError("'" + name_or_path + "' is neither a builtin fan nor a readable file");
  std::stringstream ss;
  ss << in.rdbuf();
  Fan f = parse_fan(ss.str());
  if (f.name.empty()) f.name = name_or_path;
  return f;
}

std::vector<Cone> all_cones(const Fan& fan) {
  std::set<Cone> out;
  for (const auto& c : fan.max_cones) {
    const std::size_t k = c.size();
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      Cone face;
      for (std::size_t j = 0; j < k; ++j)
        if (mask & (1u << j)) face.push_back(c[j]);
      out.insert(face);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<Cone> primitive_collections(const Fan& fan) {
  const std::size_t n = fan.rays.size();
  if (n > 24) throw BudgetError("too many rays for primitive collection search");
  std::vector<std::uint32_t> cone_masks;
  for (const auto& c : fan.max_cones) {
    std::uint32_t m = 0;
    for (int i : c) m |= 1u << i;
    cone_masks.push_back(m);
  }
  auto in_cone = [&](std::uint32_t s) {
    return std::any_of(cone_masks.begin(), cone_masks.end(), [s](std::uint32_t m) { return (s & m) == s; });
  };
  std::vector<Cone> out;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    if (in_cone(s)) continue;
    bool minimal = true;
    for (std::size_t j = 0; j < n && minimal; ++j)
      if ((s & (1u << j)) && !in_cone(s & ~(1u << j))) minimal = false;
    if (!minimal) continue;
    Cone c;
    for (std::size_t j = 0; j < n; ++j)
      if (s & (1u << j)) c.push_back(static_cast<int>(j));
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fan_to_json(const Fan& fan) {
  json j;
  j["dim"] = fan.dim;
  j["rays"] = fan.rays;
  j["max_cones"] = fan.max_cones;
  if (!fan.name.empty()) j["name"] = fan.name;
  if (!fan.names.empty()) j["names"] = fan.names;
  return j.dump();
}

}  // namespace toric
