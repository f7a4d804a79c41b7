#include "toric/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace toric {

namespace {

const std::vector<std::pair<Theorem, std::string>>& theorem_table() {
  static const std::vector<std::pair<Theorem, std::string>> t = {
      {Theorem::Multiheight, "multiheight"}, {Theorem::Box, "box"},
      {Theorem::ConeBox, "cone_box"},        {Theorem::PerCone, "per_cone"},
      {Theorem::Anticanonical, "anticanonical"}, {Theorem::Final, "final"},
      {Theorem::Hyperbola, "hyperbola"},     {Theorem::Intersections, "intersections"}};
  return t;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Rat parse_grid_value(const std::string& tok) {
  auto caret = tok.find('^');
  if (caret != std::string::npos) {
    Rat base = parse_rational(tok.substr(0, caret));
    long e = std::stol(tok.substr(caret + 1));
    if (e < 0 || e > 60) throw ValidationError("grid exponent out of range: " + tok);
    return rat_pow(base, e);
  }
  auto epos = tok.find_first_of("eE");
  if (epos != std::string::npos) {
    Rat mant = parse_rational(tok.substr(0, epos));
    long e = std::stol(tok.substr(epos + 1));
    if (e < 0 || e > 60) throw ValidationError("grid exponent out of range: " + tok);
    return mant * rat_pow(Rat(10), e);
  }
  return parse_rational(tok);
}

double power_of_log(const Rat& B, int k) {
  const double lb = std::log(B.get_d());
  return std::pow(lb, static_cast<double>(k));
}

// B log(B)^(rho - 1).
double main_shape(const Rat& B, int rho) { return B.get_d() * power_of_log(B, rho - 1); }

void set_ratio(VerificationRow& row) {
  if (row.prediction > 0 && std::isfinite(row.prediction))
    row.ratio = static_cast<double>(row.count) / row.prediction;
  else
    row.ratio.reset();
}

struct Setup {
  TorsorModel model;
  double tau = 0;
  double tau_error = 0;
  Decomposition decomposition;
};

Setup prepare(const Experiment& exp) {
  validate(exp);
  Setup s{make_model(load_fan(exp.fan)), 0, 0, {}};
  s.decomposition = effective_decomposition(s.model.dual_eff, s.model.omega);
  std::tie(s.tau, s.tau_error) = experiment_tau(s.model, exp);
  return s;
}

VerificationResult start(const Experiment& exp, const Setup& s) {
  VerificationResult r;
  r.theorem = theorem_name(exp.theorem);
  r.fan = s.model.fan.name;
  r.rho = s.model.rho;
  r.tau = s.tau;
  r.tau_error = s.tau_error;
  return r;
}

QMat chosen_cone(const Experiment& exp, const Setup& s) {
  if (exp.cone_generators) return *exp.cone_generators;
  if (exp.cone >= s.decomposition.cones.size())
    throw ValidationError("cone index " + std::to_string(exp.cone) + " out of range; the decomposition has " +
                          std::to_string(s.decomposition.cones.size()) + " cones");
  return s.decomposition.cones[exp.cone];
}

nlohmann::json qmat_json(const QMat& m) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : m) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& x : row) r.push_back(to_string(x));
    j.push_back(r);
  }
  return j;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Theorem parse_theorem(const std::string& tag) {
  for (const auto& [t, n] : theorem_table())
    if (n == tag) return t;
  std::string all;
  for (const auto& n : theorem_names()) all += (all.empty() ? "" : ", ") + n;
  throw ValidationError("unknown theorem tag '" + tag + "' (expected one of " + all + ")");
}

std::string theorem_name(Theorem t) {
  for (const auto& [k, n] : theorem_table())
    if (k == t) return n;
  throw InternalError("unnamed theorem tag");
}

std::vector<std::string> theorem_names() {
  std::vector<std::string> out;
  for (const auto& p : theorem_table()) out.push_back(p.second);
  return out;
}

std::vector<Rat> parse_grid(const std::string& text) {
  std::vector<Rat> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ValidationError("empty entry in grid '" + text + "'");
    out.push_back(parse_grid_value(tok));
  }
  if (out.empty()) throw ValidationError("grid is empty");
  return out;
}

void validate(const Experiment& exp) {
  if (exp.grid.empty()) throw ValidationError("B grid is empty");
  for (std::size_t i = 0; i < exp.grid.size(); ++i) {
    if (exp.grid[i] < 1) throw ValidationError("grid values must be at least 1");
    if (i && exp.grid[i] <= exp.grid[i - 1]) throw ValidationError("B grid must be strictly increasing");
  }
  if (exp.p_max < 100) throw ValidationError("p_max must be at least 100");
  if (exp.samples == 0) throw ValidationError("samples must be positive");
  if (exp.tau && !(*exp.tau > 0)) throw ValidationError("tau must be positive");
}

std::pair<double, double> experiment_tau(const TorsorModel& model, const Experiment& exp) {
  if (exp.tau) return {*exp.tau, 0.0};
  auto r = tamagawa(model, exp.p_max, exp.samples, exp.seed, exp.options.threads);
  return {r.tau, r.error};
}

Fit fit_log_power(const std::vector<VerificationRow>& rows, int rho, double target) {
  Fit f;
  f.target = target;
  std::vector<std::pair<double, double>> pts;  // (log(B)^(rho-1), N/B)
  for (const auto& r : rows) {
    if (r.B <= 1) continue;
    const double b = r.B.get_d();
    pts.emplace_back(power_of_log(r.B, rho - 1), static_cast<double>(r.count) / b);
  }
  if (rho == 1) {
    if (pts.empty()) throw ValidationError("grid needs a value above 1 for the fit");
    double num = 0, den = 0;
    for (const auto& r : rows) {
      if (r.B <= 1) continue;
      const double b = r.B.get_d();
      num += static_cast<double>(r.count) * b;
      den += b * b;
    }
    f.c = num / den;
  } else {
    if (pts.size() < 2) throw ValidationError("grid too short for a two-parameter fit");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    if (!(std::fabs(det) > 0)) throw ValidationError("grid too short for a two-parameter fit");
    f.c = (n * sxy - sx * sy) / det;
    f.c_prime = (sy - f.c * sx) / n;
  }
  f.relative_error = target > 0 ? std::fabs(f.c - target) / target : INFINITY;
  return f;
}

std::vector<QMat> split_decomposition(const TorsorModel& model) {
  auto d = effective_decomposition(model.dual_eff, model.omega);
  if (d.cones.size() >= 2) return d.cones;
  if (model.rho < 2) throw ValidationError("a one-dimensional cone cannot be split");
  const QMat& g = d.cones.front();
  QVec mid(g[0].size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = g[0][i] + g[1][i];
  QMat a = g, b = g;
  a[1] = mid;
  b[0] = mid;
  return {a, b};
}

VerificationResult run_verify_multiheight(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  const std::size_t rho = static_cast<std::size_t>(s.model.rho);
  Region D = exp.region ? *exp.region : default_density_regions(s.model).front();
  QVec u;
  if (exp.u) {
    u = *exp.u;
    if (u.size() != rho) throw ValidationError("u needs rho entries");
  } else {
    for (std::size_t i = 0; i < rho; ++i) u.push_back(1 / (Rat(static_cast<long>(rho)) * s.model.omega[i]));
  }
  double nu = 0;
  for (const auto& B : exp.grid) {
    auto c = count_translated_polyhedron(s.model, {D}, u, B, exp.options);
    VerificationRow row{B, c.count, c.prediction(s.tau), std::nullopt, {}};
    set_ratio(row);
    nu = c.nu;
    r.rows.push_back(row);
  }
  r.details["nu"] = nu;
  r.details["ratio_undefined"] = !(nu > 0);
  r.details["region"] = region_to_json(D);
  nlohmann::json uj = nlohmann::json::array();
  for (const auto& x : u) uj.push_back(to_string(x));
  r.details["u"] = uj;
  r.details["growth_exponent"] = to_string(dot(s.model.omega, u));
  return r;
}

VerificationResult run_verify_per_cone(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  QMat gens = chosen_cone(exp, s);
  make_simplex_cone(s.model, gens);
  const double nu = nu_simplicial(gens, s.model.omega).get_d();
  const double target = nu * s.tau / factorial(static_cast<unsigned>(s.model.rho - 1)).get_d();
  for (const auto& B : exp.grid) {
    VerificationRow row{B, count_in_cones(s.model, {gens}, B, exp.options), target * main_shape(B, s.model.rho),
                        std::nullopt, {}};
    set_ratio(row);
    r.rows.push_back(row);
  }
  r.fit = fit_log_power(r.rows, s.model.rho, target);
  r.details["cone"] = qmat_json(gens);
  r.details["nu"] = nu;
  return r;
}

VerificationResult run_verify_final(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  const double a = alpha_from(s.decomposition, s.model.omega).get_d();
  const double target = a * s.tau;
  bool agree = true;
  for (const auto& B : exp.grid) {
    auto direct = count_anticanonical(s.model, s.decomposition.cones, B, AnticanonicalMode::Direct, exp.options);
    auto ie =
        count_anticanonical(s.model, s.decomposition.cones, B, AnticanonicalMode::InclusionExclusion, exp.options);
    VerificationRow row{B, direct, target * main_shape(B, s.model.rho), std::nullopt, {}};
    row.extra["inclusion_exclusion"] = static_cast<double>(ie);
    agree = agree && ie == direct;
    set_ratio(row);
    r.rows.push_back(row);
  }
  r.fit = fit_log_power(r.rows, s.model.rho, target);
  r.details["alpha"] = to_string(alpha_from(s.decomposition, s.model.omega));
  r.details["modes_agree"] = agree;
  r.details["cones"] = s.decomposition.cones.size();
  return r;
}

VerificationResult run_verify_anticanonical(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  const double target = alpha_from(s.decomposition, s.model.omega).get_d() * s.tau;
  for (const auto& B : exp.grid) {
    VerificationRow row{B, count_points(s.model, anticanonical_region(s.model), B, exp.options),
                        target * main_shape(B, s.model.rho), std::nullopt, {}};
    set_ratio(row);
    r.rows.push_back(row);
  }
  if (s.model.rho == 1 || exp.grid.size() >= 2) r.fit = fit_log_power(r.rows, s.model.rho, target);
  return r;
}

VerificationResult run_verify_hyperbola(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  QMat gens = chosen_cone(exp, s);
  SimplexCone sc = make_simplex_cone(s.model, gens);
  const std::size_t rho = sc.duals.size();
  const Rat Bmax = exp.grid.back();
  std::vector<std::int64_t> bmax;
  Rat wsum = 0;
  for (std::size_t i = 0; i < rho; ++i) {
    bmax.push_back(std::max<std::int64_t>(1, floor_of(PosReal::power(Bmax, 1 / sc.weights[i])).get_si()));
    wsum += sc.weights[i];
  }
  // Points with floor(H_{L_i}) = y_i on the hyperbola region have H_omega < 2^{sum w} B.
  Int wceil;
  mpz_cdiv_q(wceil.get_mpz_t(), wsum.get_num_mpz_t(), wsum.get_den_mpz_t());
  RegionConstraint cap{s.model.omega, rat_pow(Rat(2), wceil.get_si()) * Bmax, 0};
  auto tables = tabulate_f(s.model, sc, bmax, {cap}, exp.options);
  QMat alphas{sc.weights};
  auto poly = hyperbola_polytope(alphas, sc.weights);
  auto cp = c_P(poly);
  const int k = poly.face_dim;
  const double C = sc.nu_minus.get_d() * s.tau;
  const double lead = factorial(static_cast<unsigned>(static_cast<int>(rho) - 1 - k)).get_d() * C *
                      cp.exact.get_d();
  bool sandwich = true;
  for (const auto& B : exp.grid) {
    const auto direct = count_in_cones(s.model, {gens}, B, exp.options);
    const auto up = hyperbola_sum(tables.floor, alphas, B);
    const auto down = hyperbola_sum(tables.ceil, alphas, B);
    VerificationRow row{B, direct,
                        lead * power_of_log(B, k) * std::pow(B.get_d(), poly.top_value.get_d()), std::nullopt, {}};
    row.extra["S_floor"] = static_cast<double>(up);
    row.extra["S_ceil"] = static_cast<double>(down);
    sandwich = sandwich && down <= direct && direct <= up;
    set_ratio(row);
    r.rows.push_back(row);
  }
  r.details["cone"] = qmat_json(gens);
  r.details["c_P"] = to_string(cp.exact);
  r.details["face_dim"] = k;
  r.details["top_value"] = to_string(poly.top_value);
  r.details["sandwich_holds"] = sandwich;
  nlohmann::json caps = nlohmann::json::array();
  for (auto b : bmax) caps.push_back(b);
  r.details["table_caps"] = caps;
  return r;
}

VerificationResult run_verify_box(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  QMat gens = chosen_cone(exp, s);
  SimplexCone sc = make_simplex_cone(s.model, gens);
  const std::size_t rho = sc.duals.size();
  const QVec lower(rho, Rat(1, 2)), upper(rho, Rat(1));
  for (const auto& B : exp.grid) {
    auto c = count_box(s.model, sc, lower, upper, QVec(rho, B), exp.options);
    VerificationRow row{B, c.count, c.prediction(s.tau), std::nullopt, {}};
    set_ratio(row);
    r.rows.push_back(row);
  }
  r.details["cone"] = qmat_json(gens);
  r.details["box"] = {{"lower", "1/2"}, {"upper", "1"}};
  r.details["nu"] = nu_box(sc, lower, upper);
  return r;
}

VerificationResult run_verify_cone_box(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  QMat gens = chosen_cone(exp, s);
  SimplexCone sc = make_simplex_cone(s.model, gens);
  const std::size_t rho = sc.duals.size();
  for (const auto& B : exp.grid) {
    auto c = count_cone_box(s.model, sc, QVec(rho, B), exp.seed, exp.options);
    VerificationRow row{B, c.count, c.prediction(s.tau), std::nullopt, {}};
    row.extra["empty_beyond_bound"] = c.empty_beyond_bound ? 1 : 0;
    row.extra["tail_nu"] = c.tail_nu;
    row.extra["tail_bound"] = c.tail_bound;
    row.extra["attempts"] = c.attempts;
    row.extra["boxes"] = static_cast<double>(c.histogram.size());
    set_ratio(row);
    r.rows.push_back(row);
  }
  r.details["cone"] = qmat_json(gens);
  return r;
}

VerificationResult run_verify_intersections(const Experiment& exp) {
  Setup s = prepare(exp);
  auto r = start(exp, s);
  auto cones = split_decomposition(s.model);
  const double target = alpha_from(s.decomposition, s.model.omega).get_d() * s.tau;
  for (const auto& B : exp.grid) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < cones.size(); ++i)
      for (std::size_t j = i + 1; j < cones.size(); ++j)
        total += count_in_cones(s.model, {cones[i], cones[j]}, B, exp.options);
    VerificationRow row{B, total, target * main_shape(B, s.model.rho), std::nullopt, {}};
    const double shape = main_shape(B, s.model.rho);
    row.extra["normalized"] = shape > 0 ? static_cast<double>(total) / shape : 0;
    set_ratio(row);
    r.rows.push_back(row);
  }
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& c : cones) cj.push_back(qmat_json(c));
  r.details["cones"] = cj;
  return r;
}

VerificationResult run_experiment(const Experiment& exp) {
  switch (exp.theorem) {
    case Theorem::Multiheight: return run_verify_multiheight(exp);
    case Theorem::Box: return run_verify_box(exp);
    case Theorem::ConeBox: return run_verify_cone_box(exp);
    case Theorem::PerCone: return run_verify_per_cone(exp);
    case Theorem::Anticanonical: return run_verify_anticanonical(exp);
    case Theorem::Final: return run_verify_final(exp);
    case Theorem::Hyperbola: return run_verify_hyperbola(exp);
    case Theorem::Intersections: return run_verify_intersections(exp);
  }
  throw InternalError("unhandled theorem tag");
}

nlohmann::json result_to_json(const VerificationResult& result) {
  nlohmann::json j;
  j["theorem"] = result.theorem;
  j["fan"] = result.fan;
  j["rho"] = result.rho;
  j["tau"] = {{"value", result.tau}, {"error", result.tau_error}, {"kind", "operational Tamagawa number"}};
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row;
    row["B"] = to_string(r.B);
    row["count"] = r.count;
    row["prediction"] = r.prediction;
    row["ratio"] = r.ratio ? nlohmann::json(*r.ratio) : nlohmann::json(nullptr);
    if (!r.extra.empty()) row["extra"] = r.extra;
    rows.push_back(row);
  }
  if (result.fit) {
    j["fit"] = {{"c", result.fit->c},
                {"c_prime", result.fit->c_prime},
                {"target", result.fit->target},
                {"relative_error", result.fit->relative_error}};
  } else {
    j["fit"] = nullptr;
  }
  j["details"] = result.details;
  return j;
}

VerificationResult result_from_json(const nlohmann::json& j) {
  VerificationResult r;
  try {
    r.theorem = j.at("theorem").get<std::string>();
    r.fan = j.at("fan").get<std::string>();
    r.rho = j.at("rho").get<int>();
    r.tau = j.at("tau").at("value").get<double>();
    r.tau_error = j.at("tau").at("error").get<double>();
    for (const auto& row : j.at("rows")) {
      VerificationRow v;
      v.B = parse_rational(row.at("B").get<std::string>());
      v.count = row.at("count").get<std::uint64_t>();
      v.prediction = row.at("prediction").get<double>();
      if (!row.at("ratio").is_null()) v.ratio = row.at("ratio").get<double>();
      if (row.contains("extra")) v.extra = row.at("extra").get<std::map<std::string, double>>();
      r.rows.push_back(v);
    }
    if (!j.at("fit").is_null()) {
      const auto& f = j.at("fit");
      r.fit = Fit{f.at("c").get<double>(), f.at("c_prime").get<double>(), f.at("target").get<double>(),
                  f.at("relative_error").get<double>()};
    }
    r.details = j.value("details", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "gnuplot") return ReportFormat::Gnuplot;
  throw ValidationError("unknown format '" + name + "' (expected csv, json or gnuplot)");
}

std::string report_csv(const VerificationResult& result) {
  std::ostringstream os;
  os << "B,count,prediction,ratio\n";
  for (const auto& r : result.rows)
    os << to_string(r.B) << ',' << r.count << ',' << format_double(r.prediction) << ','
       << (r.ratio ? format_double(*r.ratio) : std::string("undefined")) << '\n';
  return os.str();
}

std::string report_gnuplot_data(const VerificationResult& result) {
  std::ostringstream os;
  os << "# " << result.theorem << " " << result.fan << "\n# B count prediction ratio\n";
  for (const auto& r : result.rows)
    os << format_double(r.B.get_d()) << ' ' << r.count << ' ' << format_double(r.prediction) << ' '
       << (r.ratio ? format_double(*r.ratio) : std::string("NaN")) << '\n';
  return os.str();
}

std::string report_gnuplot_script(const VerificationResult& result, const std::string& data_file) {
  std::ostringstream os;
  os << "set title '" << result.theorem << " on " << result.fan << "'\n"
     << "set logscale x\n"
     << "set xlabel 'B'\n"
     << "set ylabel 'count / prediction'\n"
     << "set key left top\n"
     << "plot '" << data_file << "' using 1:4 with linespoints title 'ratio', 1 with lines title 'limit'\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const VerificationResult& result, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << text;
    if (!out) throw ValidationError("write failed for " + p.string());
  };
  std::vector<std::filesystem::path> out;
  switch (format) {
    case ReportFormat::Csv:
      out.push_back(dir / (stem + ".csv"));
      write(out.back(), report_csv(result));
      break;
    case ReportFormat::Json:
      out.push_back(dir / (stem + ".json"));
      write(out.back(), result_to_json(result).dump(2) + "\n");
      break;
    case ReportFormat::Gnuplot: {
      const std::string data = stem + ".dat";
      out.push_back(dir / data);
      write(out.back(), report_gnuplot_data(result));
      out.push_back(dir / (stem + ".gp"));
      write(out.back(), report_gnuplot_script(result, data));
      break;
    }
  }
  return out;
}

}  // namespace toric
