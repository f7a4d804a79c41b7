#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toric/arith.hpp"

namespace toric {

using Cone = std::vector<int>;  // sorted ray indices

struct Fan {
  int dim = 0;
  IMat rays;
  std::vector<Cone> max_cones;
  std::vector<std::string> names;  // optional ray labels
  std::string name;

  std::size_t num_rays() const { return rays.size(); }
};

enum class FanErrorKind { Malformed, NonPrimitive, Duplicate, Singular, Incomplete };

struct FanError : ValidationError {
  FanErrorKind kind;
  FanError(FanErrorKind k, const std::string& msg) : ValidationError(msg), kind(k) {}
};

struct FanCheck {
  std::string check;  // "primitive", "distinct", "smooth", "complete"
  int index;          // ray or cone index, -1 for global checks
  bool ok;
  std::string detail;
};

struct FanDiagnostics {
  std::vector<FanCheck> checks;
  bool ok() const;
  std::string summary() const;
};

// Builds an unvalidated fan; parse_fan and builtin_fan always validate.
Fan make_fan(int dim, IMat rays, std::vector<Cone> cones, std::string name = {});

FanDiagnostics validate_fan(const Fan& fan);
// Throws FanError carrying the first failing check.
void require_valid(const Fan& fan);

Fan parse_fan(std::string_view json_text);
Fan builtin_fan(std::string_view name);
std::vector<std::string> builtin_fan_names();
// A builtin name or a path to a fan document.
Fan load_fan(const std::string& name_or_path);

// All cones of the fan (faces of maximal cones, including the zero cone), sorted.
std::vector<Cone> all_cones(const Fan& fan);

// Minimal ray sets not contained in any maximal cone.
std::vector<Cone> primitive_collections(const Fan& fan);

std::string fan_to_json(const Fan& fan);

}  // namespace toric
