#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "toric/constants.hpp"
#include "toric/counting.hpp"

namespace toric {

enum class Theorem { Multiheight, Box, ConeBox, PerCone, Anticanonical, Final, Hyperbola, Intersections };

Theorem parse_theorem(const std::string& tag);
std::string theorem_name(Theorem t);
std::vector<std::string> theorem_names();

// Comma-separated rationals, also accepting 1e5 and 10^5; strictly increasing and >= 1.
std::vector<Rat> parse_grid(const std::string& text);

struct Experiment {
  std::string fan = "P1";  // builtin name or path
  Theorem theorem = Theorem::Final;
  std::vector<Rat> grid;
  std::optional<Region> region;  // D_1 for multiheight
  std::optional<QVec> u;         // <e_i, u>; default has <omega, u> = 1
  std::size_t cone = 0;          // index into the Lambda decomposition
  std::optional<QMat> cone_generators;
  std::uint64_t seed = 1;
  std::int64_t p_max = 100000;
  std::uint64_t samples = 1'000'000;
  std::optional<double> tau;     // skips the constants computation when given
  EnumOptions options;
};

void validate(const Experiment& exp);

struct VerificationRow {
  Rat B;
  std::uint64_t count = 0;
  double prediction = 0;
  std::optional<double> ratio;  // empty when the prediction vanishes
  std::map<std::string, double> extra;
};

// N(B)/B = c log(B)^(rho-1) + c'; for rho = 1 only c.
struct Fit {
  double c = 0;
  double c_prime = 0;
  double target = 0;
  double relative_error = 0;
};

struct VerificationResult {
  std::string theorem;
  std::string fan;
  int rho = 0;
  double tau = 0;
  double tau_error = 0;
  std::vector<VerificationRow> rows;
  std::optional<Fit> fit;
  nlohmann::json details = nlohmann::json::object();
};

Fit fit_log_power(const std::vector<VerificationRow>& rows, int rho, double target);

// Operational tau for the experiment's fan, or the supplied value.
std::pair<double, double> experiment_tau(const TorsorModel& model, const Experiment& exp);

VerificationResult run_verify_multiheight(const Experiment& exp);
VerificationResult run_verify_per_cone(const Experiment& exp);
VerificationResult run_verify_final(const Experiment& exp);
VerificationResult run_verify_hyperbola(const Experiment& exp);
VerificationResult run_verify_box(const Experiment& exp);
VerificationResult run_verify_cone_box(const Experiment& exp);
VerificationResult run_verify_anticanonical(const Experiment& exp);
VerificationResult run_verify_intersections(const Experiment& exp);
VerificationResult run_experiment(const Experiment& exp);

// The cones used for a fan: the triangulation of the dual effective cone, split in two when it has one cone.
std::vector<QMat> split_decomposition(const TorsorModel& model);

nlohmann::json result_to_json(const VerificationResult& result);
VerificationResult result_from_json(const nlohmann::json& j);

enum class ReportFormat { Csv, Json, Gnuplot };
ReportFormat parse_format(const std::string& name);

std::string report_csv(const VerificationResult& result);
std::string report_gnuplot_data(const VerificationResult& result);
std::string report_gnuplot_script(const VerificationResult& result, const std::string& data_file);

// Writes <stem>.csv, <stem>.json or <stem>.dat plus <stem>.gp into dir; returns the paths.
std::vector<std::filesystem::path> emit_report(const VerificationResult& result, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& stem);

}  // namespace toric
