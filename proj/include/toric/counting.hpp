#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "toric/heights.hpp"

namespace toric {

struct EnumOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  std::uint64_t max_candidates = 10'000'000'000ULL;
};

// Per-cone torsor exponents of an integral class: H_c = prod |y_l|^{per_cone[sigma][l]} on cone sigma.
struct CompiledClass {
  IVec cls;
  std::vector<IVec> per_cone;
};

CompiledClass compile_class(const TorsorModel& model, const IVec& cls);

// One accepted point with positive coordinates; its sign orbit gives multiplicity() canonical points.
class PointView {
 public:
  PointView(const TorsorModel& model, const std::int64_t* y, const double* logs, int sigma)
      : model_(&model), y_(y), logs_(logs), sigma_(sigma) {}

  IVec coords() const;
  int cone() const { return sigma_; }
  std::uint64_t multiplicity() const { return model_->sign_multiplicity(); }
  MultiHeight heights() const;
  double log_height(const CompiledClass& c) const;
  Rat height(const CompiledClass& c) const;
  // Canonical torsor points with these absolute values.
  std::vector<TorsorPoint> signed_points() const;

 private:
  const TorsorModel* model_;
  const std::int64_t* y_;
  const double* logs_;
  int sigma_;
};

using Visitor = std::function<void(const PointView&)>;

// M_l = floor exp(sup <[D_l], a>) over the region and the dual effective cone.
std::vector<Int> coordinate_bounds(const TorsorModel& model, const Region& region, const Rat& B);

class Enumerator {
 public:
  Enumerator(const TorsorModel& model, const Region& region, const Rat& B, EnumOptions options = {});
  ~Enumerator();
  Enumerator(const Enumerator&) = delete;
  Enumerator& operator=(const Enumerator&) = delete;

  const std::vector<Int>& bounds() const;
  bool empty() const;
  // Tuples in the pruned coordinate box, before gcd and height tests; stops once above limit.
  std::uint64_t candidates(std::uint64_t limit) const;

  // Sequential, lexicographic in the positive coordinates. Returns the count of canonical points.
  std::uint64_t run(const Visitor& visitor) const;
  // Worker w takes first coordinates y_0 with (y_0 - 1) mod workers == w.
  std::uint64_t run_sharded(unsigned workers, const std::function<Visitor(unsigned)>& make_visitor) const;
  std::uint64_t count() const;

  unsigned workers() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::uint64_t enumerate(const TorsorModel& model, const Region& region, const Rat& B, const Visitor& visitor,
                        EnumOptions options = {});
std::uint64_t count_points(const TorsorModel& model, const Region& region, const Rat& B, EnumOptions options = {});

Region anticanonical_region(const TorsorModel& model);

struct CountResult {
  std::uint64_t count = 0;
  double nu = 0;     // measure of the unscaled region
  double scale = 1;  // growth factor multiplying nu * tau
  double seconds = 0;
  double prediction(double tau) const { return nu * tau * scale; }
};

// D_1 is a union of compact polytopes with s = 0; D_B = D_1 + log(B) u, u given by <e_i, u>.
CountResult count_translated_polyhedron(const TorsorModel& model, const std::vector<Region>& pieces, const QVec& u,
                                        const Rat& B, EnumOptions options = {});
// Measure of a union of compact polytopes, by inclusion-exclusion over intersections.
double nu_union(const TorsorModel& model, const std::vector<Region>& pieces);

// Simplicial cone Lambda in Pic dual with the dual basis L_i of Lambda^dual.
struct SimplexCone {
  QMat generators;   // w_i
  IMat duals;        // L_i, primitive, <L_i, w_j> = 0 for i != j
  QVec weights;      // <omega, L_i^*>
  Rat det_dual;      // |det (L_1^*, ..., L_rho^*)|
  Rat nu_minus;      // nu(-Lambda)
};

SimplexCone make_simplex_cone(const TorsorModel& model, const QMat& generators);
RationalCone as_cone(const SimplexCone& cone);

// {a_i <= <L_i, h> - log B_i <= b_i}, given lower[i] = e^{a_i} and upper[i] = e^{b_i}.
CountResult count_box(const TorsorModel& model, const SimplexCone& cone, const QVec& lower, const QVec& upper,
                      const QVec& B, EnumOptions options = {});
double nu_box(const SimplexCone& cone, const QVec& lower, const QVec& upper);

struct BoxDecomposition {
  QVec b;                     // e^{beta_i}, rational > 1
  std::vector<double> beta;   // log b_i
  std::uint64_t seed = 0;
  unsigned attempt = 0;
};

BoxDecomposition build_box_decomposition(const SimplexCone& cone, std::uint64_t seed, unsigned attempt = 0);
BoxDecomposition box_decomposition_from(const QVec& b);

struct WallCollision : std::runtime_error {
  std::size_t index;
  long wall;
  WallCollision(std::size_t i, long k);
};

// Box index n of a point with heights H_i = H_{L_i} <= B_i; throws WallCollision on a wall.
std::vector<long> box_index(const BoxDecomposition& dec, const QVec& B, const std::vector<double>& log_heights,
                            const std::function<Rat(std::size_t)>& exact_height);

struct ConeBoxResult {
  std::uint64_t count = 0;
  std::map<std::vector<long>, std::uint64_t> histogram;
  BoxDecomposition decomposition;
  unsigned attempts = 0;
  bool empty_beyond_bound = true;
  std::vector<long> max_index;  // floor(log B_i / beta_i + 1)
  double tail_nu = 0;           // sum of nu(D_n) over the tail, relative to the unscaled boxes
  double tail_bound = 0;        // c / min(B)^d
  double tail_c = 0;
  double tail_d = 0;
  double nu = 0;                // nu(-Lambda)
  double scale = 1;             // prod B_i^{omega_i}
  double seconds = 0;
  double prediction(double tau) const { return nu * tau * scale; }
};

ConeBoxResult count_cone_box(const TorsorModel& model, const SimplexCone& cone, const QVec& B, std::uint64_t seed,
                             EnumOptions options = {});
ConeBoxResult count_cone_box(const TorsorModel& model, const SimplexCone& cone, const QVec& B,
                             const BoxDecomposition& initial, EnumOptions options = {});

// Region of D_{n,B}, optionally intersected with h(L_k) <= 0.
Region box_region(const SimplexCone& cone, const BoxDecomposition& dec, const std::vector<long>& n, const QVec& B,
                  std::optional<std::size_t> slab);

struct SlabResult {
  std::uint64_t count = 0;
  double shape = 0;  // prod_{i != k} B_i^{omega_i} e^{-n_i beta_i omega_i}
};

SlabResult count_bad_slab(const TorsorModel& model, const SimplexCone& cone, const BoxDecomposition& dec,
                          std::size_t k, const std::vector<long>& n, const QVec& B, EnumOptions options = {});

enum class FVariant { Floor, Ceil };

// Dense table over 1 <= y_i <= bmax_i.
struct FTable {
  FVariant variant = FVariant::Floor;
  IMat duals;
  std::vector<std::int64_t> bmax;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(const std::vector<std::int64_t>& y) const;
  std::uint64_t total() const;
  // Sum over y_i <= B_i.
  std::uint64_t box_sum(const std::vector<std::int64_t>& B) const;
};

struct FTablePair {
  FTable floor;
  FTable ceil;
};

constexpr std::size_t kMaxTableEntries = 10'000'000;

FTablePair tabulate_f(const TorsorModel& model, const SimplexCone& cone, const std::vector<std::int64_t>& bmax,
                      EnumOptions options = {});
// Only points satisfying the restriction are tabulated; a cell is exact when all of its points satisfy it.
FTablePair tabulate_f(const TorsorModel& model, const SimplexCone& cone, const std::vector<std::int64_t>& bmax,
                      const std::vector<RegionConstraint>& restriction, EnumOptions options = {});

// Sum of f(y) over {y : prod y_i^{alphas[k][i]} <= B for all k}.
std::uint64_t hyperbola_sum(const FTable& table, const QMat& alphas, const Rat& B);

enum class AnticanonicalMode { Direct, InclusionExclusion };

// Count of H_{omega^-1} <= B; the inclusion-exclusion mode runs over intersections of the cones.
std::uint64_t count_anticanonical(const TorsorModel& model, const std::vector<QMat>& cones, const Rat& B,
                                  AnticanonicalMode mode, EnumOptions options = {});
// Count of H_{omega^-1} <= B restricted to the intersection of the listed cones.
std::uint64_t count_in_cones(const TorsorModel& model, const std::vector<QMat>& cones, const Rat& B,
                             EnumOptions options = {});

}  // namespace toric
