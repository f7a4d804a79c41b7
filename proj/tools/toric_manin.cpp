#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "toric/harness.hpp"

using namespace toric;

namespace {

struct Output {
  std::string dir;
  std::string format = "json";
};

nlohmann::json qmat_json(const QMat& m) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : m) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : row) r.push_back(to_string(x));
    j.push_back(r);
  }
  return j;
}

nlohmann::json ivecs_json(const std::vector<IVec>& v) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& x : v) j.push_back(x);
  return j;
}

std::string stem_of(const std::string& fan) {
  std::string s = std::filesystem::path(fan).stem().string();
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  return s.empty() ? "fan" : s;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

QVec parse_qvec(const std::string& text) {
  QVec out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_rational(tok));
  return out;
}

// JSON documents go to --out/<name>.json when --out is given, else to stdout.
void emit_json(const Output& out, const std::string& name, const nlohmann::json& j) {
  if (out.dir.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::filesystem::create_directories(out.dir);
  std::filesystem::path p = std::filesystem::path(out.dir) / (name + ".json");
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string());
  f << j.dump(2) << '\n';
  std::cout << p.string() << '\n';
}

void emit_result(const Output& out, const std::string& name, const VerificationResult& r) {
  const ReportFormat fmt = parse_format(out.format);
  if (out.dir.empty()) {
    if (fmt == ReportFormat::Gnuplot) throw ValidationError("gnuplot output needs --out <dir>");
    std::cout << (fmt == ReportFormat::Csv ? report_csv(r) : result_to_json(r).dump(2) + "\n");
    return;
  }
  for (const auto& p : emit_report(r, fmt, out.dir, name)) std::cout << p.string() << '\n';
}

nlohmann::json analyze(const std::string& fan_name) {
  TorsorModel m = make_model(load_fan(fan_name));
  nlohmann::json j;
  j["fan"] = nlohmann::json::parse(fan_to_json(m.fan));
  j["rho"] = m.rho;
  nlohmann::json proj = nlohmann::json::array();
  for (const auto& row : m.lattice.projection) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : row) r.push_back(x.get_si());
    proj.push_back(r);
  }
  j["picard"] = {{"projection", proj},
                 {"classes", ivecs_json(m.lattice.classes)},
                 {"anticanonical", m.lattice.anticanonical}};
  j["effective_cone"] = qmat_json(extremal_rays(m.eff));
  j["dual_effective_cone"] = qmat_json(m.dual_eff.generators);
  nlohmann::json nef = nlohmann::json::array();
  for (const auto& c : m.lattice.eff_generators)
    nef.push_back({{"class", c}, {"nef", is_nef(m.lattice, m.fan, c)}});
  j["effective_generators"] = nef;
  nlohmann::json prim = nlohmann::json::array();
  for (const auto& c : m.collections) prim.push_back(c);
  j["primitive_collections"] = prim;
  j["sign_multiplicity"] = m.sign_multiplicity();
  auto d = effective_decomposition(m.dual_eff, m.omega);
  nlohmann::json tri;
  tri["vertices"] = qmat_json(d.vertices);
  tri["simplices"] = d.simplices;
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& c : d.cones) cones.push_back(qmat_json(c));
  tri["cones"] = cones;
  j["triangulation"] = tri;
  auto cp = c_P(hyperbola_polytope({m.omega}, m.omega));
  j["constants"] = constants_fragment(d, m.omega, cp);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constants, point counts and asymptotic checks for smooth complete toric varieties"};
  app.require_subcommand(1);
  Output out;
  app.add_option("--out", out.dir, "Output directory for reports");
  app.add_option("--format", out.format, "Report format: csv, json or gnuplot")
      ->check(CLI::IsMember({"csv", "json", "gnuplot"}));
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: all cores)");

  std::string fan;
  auto* a = app.add_subcommand("analyze", "Picard lattice, cones, alpha and the triangulation");
  a->add_option("fan", fan, "Builtin fan name or fan JSON path")->required();

  std::int64_t p_max = 100000;
  std::uint64_t samples = 10'000'000, seed = 1;
  std::size_t omega_p_limit = 0;
  auto* c = app.add_subcommand("constants", "Operational Tamagawa number");
  c->add_option("fan", fan)->required();
  c->add_option("--pmax", p_max, "Largest prime in the Euler product");
  c->add_option("--samples", samples, "Monte Carlo samples per region");
  c->add_option("--seed", seed);
  c->add_option("--omega-p-limit", omega_p_limit, "List at most this many local densities (0: all)");

  std::string region_path, B_text;
  std::string points_path;
  auto* n = app.add_subcommand("count", "Count torus points in a region");
  n->add_option("fan", fan)->required();
  n->add_option("--region", region_path, "Region JSON (default: the anticanonical ball)");
  n->add_option("--B", B_text, "Height bound, rational")->required();
  n->add_option("--points", points_path, "Also write the points as CSV");

  std::string theorem, grid_text, u_text;
  double tau = 0;
  std::size_t cone = 0;
  std::uint64_t vsamples = 1'000'000;
  auto* v = app.add_subcommand("verify", "Empirical check of a counting theorem over a B grid");
  v->add_option("fan", fan)->required();
  v->add_option("--theorem", theorem, "One of: " + [] {
     std::string s;
     for (const auto& t : theorem_names()) s += (s.empty() ? "" : ", ") + t;
     return s;
   }())->required();
  v->add_option("--grid", grid_text, "Comma-separated B values, e.g. 1e3,1e4,1e5")->required();
  v->add_option("--seed", seed);
  v->add_option("--cone", cone, "Index of the simplicial cone in the decomposition");
  v->add_option("--pmax", p_max);
  v->add_option("--samples", vsamples, "Monte Carlo samples for tau");
  v->add_option("--tau", tau, "Use this tau instead of computing it");
  v->add_option("--region", region_path, "D_1 for the multiheight theorem");
  v->add_option("--u", u_text, "Translation <e_i, u> for the multiheight theorem, comma-separated");

  auto* h = app.add_subcommand("hyperbola", "Hyperbola-method sums over one cone");
  h->add_option("fan", fan)->required();
  h->add_option("--cone", cone)->required();
  h->add_option("--grid", grid_text)->required();
  h->add_option("--seed", seed);
  h->add_option("--pmax", p_max);
  h->add_option("--samples", vsamples);
  h->add_option("--tau", tau);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*a) {
      emit_json(out, "analyze_" + stem_of(fan), analyze(fan));
    } else if (*c) {
      auto m = make_model(load_fan(fan));
      auto r = tamagawa(m, p_max, samples, seed, threads);
      emit_json(out, "constants_" + stem_of(fan), tamagawa_to_json(r, omega_p_limit));
    } else if (*n) {
      auto m = make_model(load_fan(fan));
      Region region = region_path.empty() ? anticanonical_region(m) : parse_region(read_json_file(region_path), m.rho);
      Rat B = parse_rational(B_text);
      EnumOptions opt;
      opt.threads = threads;
      std::uint64_t count = 0;
      if (points_path.empty()) {
        count = count_points(m, region, B, opt);
      } else {
        std::ofstream pts(points_path);
        if (!pts) throw ValidationError("cannot write " + points_path);
        write_point_csv_header(pts, m, &region);
        count = enumerate(
            m, region, B,
            [&](const PointView& p) {
              auto mh = p.heights();
              for (const auto& t : p.signed_points()) write_point_csv(pts, m, t, mh, &region, B);
            },
            [] {
              EnumOptions o;
              o.threads = 1;
              return o;
            }());
      }
      nlohmann::json j{{"fan", m.fan.name}, {"B", to_string(B)}, {"count", count}, {"region", region_to_json(region)}};
      if (out.format == "csv") {
        std::cout << "B,count\n" << to_string(B) << ',' << count << '\n';
      } else {
        emit_json(out, "count_" + stem_of(fan), j);
      }
    } else if (*v || *h) {
      Experiment exp;
      exp.fan = fan;
      exp.theorem = *h ? Theorem::Hyperbola : parse_theorem(theorem);
      exp.grid = parse_grid(grid_text);
      exp.seed = seed;
      exp.cone = cone;
      exp.p_max = p_max;
      exp.samples = vsamples;
      if (tau > 0) exp.tau = tau;
      exp.options.threads = threads;
      if (!region_path.empty()) {
        auto m = make_model(load_fan(fan));
        exp.region = parse_region(read_json_file(region_path), m.rho);
      }
      if (!u_text.empty()) exp.u = parse_qvec(u_text);
      auto r = run_experiment(exp);
      emit_result(out, stem_of(fan) + "_" + r.theorem, r);
    }
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
