#pragma once

// Functional-inequality experiments on strictly positive fields: the weighted
// interpolation quantities I_l, the exact Hoelder factorisation step, the
// empirical lower-order-term chain constants, the second-order chain with its
// cross-term bookkeeping, a Hardy-type inequality with the bounded torus
// distance weight, and the weighted sup-norm bound. Empirical constants are
// persisted in a small versioned text table.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kslab/grid.hpp"

namespace kslab {

/// Strictly positive random trigonometric polynomial: coefficients of modes
/// 1..degree are drawn uniformly with a 1/(1+k) taper, then the field is
/// shifted so its minimum equals `floor_value`. Deterministic in `seed`.
Field random_positive_trig(const Grid& g, int degree, double floor_value, std::uint64_t seed);

/// All partitions of m into unordered positive parts (descending parts,
/// lexicographically descending order), e.g. 3 -> {3}, {2,1}, {1,1,1}.
std::vector<std::vector<int>> integer_partitions(int m);

/// Weighted interpolation quantity
///   I_l = integral |grad^l g|^{2m/l} / (g+eps)^{2m/l - 2 + gamma},
/// the l-th rung of the ladder interpolating between I_1 and I_m.
double gns_I(const Field& g, int l, int m, double gamma, double eps, int comp = 0);

/// One Hoelder factorisation step: for a partition (l_1..l_k) of m,
///   lhs  = integral prod_i |grad^{l_i} g|^2 / (g+eps)^{2k-2+gamma}
///   bound = prod_i I_{l_i}^{l_i/m}.
/// The inequality lhs <= bound holds with constant exactly one, discretely
/// as well, because finite-sum Hoelder is exact.
struct HolderCheck {
  double lhs = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  ///< lhs / bound (0 when bound underflows to 0)
};
HolderCheck holder_step_check(const Field& g, const std::vector<int>& partition, int m,
                              double gamma, double eps);

/// Intermediate-rung control I_l <= C (I_1 + I_m) for 1 < l < m. The constant
/// is empirical; surveys record the largest sampled ratio.
struct ChainCheck {
  std::vector<int> rungs;      ///< the inspected l values
  std::vector<double> ratios;  ///< I_l / (I_1 + I_m)
  double worst_ratio = 0.0;
};
ChainCheck gns_chain_check(const Field& g, int m, double gamma, double eps);

/// Second-order chain quantities for a positive chemical field c:
///   A = integral |grad c|^4 / c^3
///   B = integral |grad c|^2 Lap(c) / c^2
///   H = integral (grad c)^T Hess(c) (grad c) / c^2
/// Exact integration by parts gives B = 2A - 2H (in 1D, H = B and so
/// B = (2/3) A). The first displayed step of the chain would need 2A <= B,
/// which fails for every nonconstant field; the second step
/// B <= A + (1/4) integral Lap(c)^2 / c is a pointwise Young inequality and
/// holds. In 1D the repaired route gives A <= (9/4) integral c''^2 / c.
struct M2ChainCheck {
  double A = 0.0;
  double B = 0.0;
  double H = 0.0;
  double young_rhs = 0.0;          ///< A + (1/4) integral Lap(c)^2 / c
  double cauchy_rhs = 0.0;         ///< (9/4) integral c''^2 / c (1D; NaN in 2D)
  double identity_residual = 0.0;  ///< B - (2A - 2H), zero up to quadrature
  bool first_step_holds = false;   ///< 2A <= B (the displayed, defective step)
  bool second_step_holds = false;  ///< B <= young_rhs
  bool repaired_holds = false;     ///< A <= cauchy_rhs (1D only)
};
M2ChainCheck m2_chain_check(const Field& c, double eps);

/// Hardy-type control ||g|| <= K ( ||w g|| + ||w grad g|| ) with the bounded
/// weight w(x) = dist(x, center) / (1 + dist(x, center)), dist the torus
/// distance. ratio = lhs / rhs is the sampled value of K required.
struct HardyCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};
HardyCheck hardy_variant_check(const Field& g, const std::array<double, 2>& center);

/// Weighted sup bound: lhs = sup |grad g|^k / (g+eps)^{k-1+gamma/2} against
/// the sum of the first floor(d/2)+1+k weighted ladder integrals
///   rhs = sum_m integral |grad^m g|^2/(g+eps)^gamma
///               + integral |grad g|^{2m}/(g+eps)^{2m-2+gamma}.
struct LinftyCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};
LinftyCheck linfty_weighted_check(const Field& g, int k, double gamma, double eps);

/// Versioned key -> constant store, plain text, one "key value" pair per
/// line after the header "kslab-constants v1".
class ConstantTable {
 public:
  static ConstantTable load(const std::string& path);
  void save(const std::string& path) const;

  std::optional<double> get(const std::string& key) const;
  void set(const std::string& key, double value);
  /// Keeps the larger of the stored and offered value.
  void record_max(const std::string& key, double value);
  const std::map<std::string, double>& entries() const { return entries_; }

 private:
  std::map<std::string, double> entries_;
};

/// Canonical table keys, e.g. gns_chain keys are "chain m=4 gamma=1 d=1 l=2".
std::string chain_key(int m, double gamma, int dim, int l);
std::string hardy_key(int dim);
std::string linfty_key(int k, double gamma, int dim);

/// Sweeps `samples` random positive fields and records the worst ratios for
/// the chain rungs, the Hardy variant, and the weighted sup bound into the
/// table. Returns the number of fields surveyed.
int survey_constants(ConstantTable& table, int dim, int n, int samples, std::uint64_t seed);

}  // namespace kslab
