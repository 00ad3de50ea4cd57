#pragma once

#include <string>
#include <vector>

#include "vlmc/io.hpp"

namespace vlmc {

struct FamilyEntry {
  std::string name;
  std::string description;
  bool stable;
};

/// Built-in families, in a fixed order.
const std::vector<FamilyEntry>& families();

/// Builds a family. params: {"q": rule (default constant 1/2), ...};
/// complete also takes "depth". Enumerator and classifier are cross-checked,
/// throws InvalidTree on disagreement and BadParams on bad parameters.
ProbabilisedTree make_family(const std::string& name, const json& params = json::object());

/// Comb of left-combs whose Q has the leading n x n block equal to a
/// strictly positive row-stochastic a. Throws BadParams naming the offending
/// entry when a is not admissible.
ProbabilisedTree realise_q_from_matrix(const std::vector<std::vector<double>>& a);

/// Comb of left-combs with c_{q,p} = S^{-1}(R_p)^{1/(q+1)}, where
/// v_p = 1/(p+1) - 1/(p+2), R_p = 1/(p+1) and S(x) = sum_q v_q x^{1/(q+1)}.
/// v is left-fixed for Q but sum v kappa diverges.
class InfiniteMeasureComb {
 public:
  /// Solves S(x_p) = R_p for p <= p_max.
  explicit InfiniteMeasureComb(std::size_t p_max = 64);

  static double v(std::size_t q) { return 1.0 / double(q + 1) - 1.0 / double(q + 2); }
  static double R(std::size_t p) { return 1.0 / double(p + 1); }
  /// S(e^L) for L <= 0: explicit terms plus an Euler-Maclaurin tail.
  static double S_log(double L);
  /// ln x_p
  double log_x(std::size_t p) const;
  double c(std::size_t q, std::size_t p) const;
  std::size_t p_max() const { return log_x_.size() - 1; }
  /// q_{0^p 1 0^q 1}(0) = c_{q,p+1} / c_{q,p} on p < p_max
  ProbabilisedTree tree() const;

 private:
  std::vector<double> log_x_;
};

}  // namespace vlmc
