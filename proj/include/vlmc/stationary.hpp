#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vlmc/alis_system.hpp"

namespace vlmc {

/// Bounded LRU map from words to cylinder values, safe for concurrent use.
class CylinderCache {
 public:
  explicit CylinderCache(std::size_t capacity = std::size_t{1} << 20) : capacity_(capacity) {}
  std::optional<double> get(const Word& w);
  /// Inserts unless present; returns the stored value.
  double insert(const Word& w, double value);
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  using Entry = std::pair<Word, double>;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<Word, std::list<Entry>::iterator> map_;
};

/// Stationary probability measure built from a kappa-normalized fixed vector.
/// Cylinder values are exact finite sums over contexts of length <= max_len;
/// mass carried by longer contexts is bounded by truncation_mass().
class StationaryMeasure {
 public:
  StationaryMeasure(ProbabilisedTree pt, CascadeTable table, QMatrix q, FixedVector v,
                    std::size_t cache_capacity = std::size_t{1} << 20);

  const ProbabilisedTree& ptree() const { return pt_; }
  const QMatrix& q() const { return q_; }
  const FixedVector& v() const { return v_; }
  const CascadeTable& table() const { return table_; }

  /// pi(L w-bar): probability that the history starts (most recent first) with w.
  double pi_cylinder(std::string_view w) const;
  /// mu(alpha s) for alpha s noninternal with s internal; v when alpha s is in S.
  double mu_alis(std::string_view alpha_s) const;
  /// 1 - sum of pi over contexts of length <= max_len
  double truncation_mass() const { return truncation_mass_; }
  /// sum_{alpha s} v kappa (1 after normalization)
  double kappa_weighted_sum() const;
  std::size_t cache_size() const { return cache_.size(); }

 private:
  double range_sum(const std::vector<double>& prefix, std::string_view u) const;
  double compute(std::string_view w) const;

  ProbabilisedTree pt_;
  CascadeTable table_;
  QMatrix q_;
  FixedVector v_;
  // prefix sums over table_.lex_order of pi(c), q_c(0) pi(c), q_c(1) pi(c)
  std::vector<double> cum_pi_, cum_pi0_, cum_pi1_;
  std::vector<Word> lex_words_;
  double truncation_mass_ = 0.0;
  mutable CylinderCache cache_;
};

struct Decision {
  enum class Kind { UniqueMeasure, NoMeasure, Undecided } kind = Kind::Undecided;
  std::string reason;
  std::shared_ptr<const StationaryMeasure> measure;
  QMatrix q;
  FixedVectorResult fixed;
  StabilityVerdict stability;
  std::size_t max_len = 0;
};

const char* to_string(Decision::Kind k);

struct DecideOptions {
  KappaOptions kappa;
  FixedVectorOptions fixed;
  std::size_t cache_capacity = std::size_t{1} << 20;
  /// contexts up to this length are checked for non-nullness
  std::size_t non_null_depth = 64;
};

/// Existence/uniqueness decision. Throws NotNonNull on a null tree unless the
/// family's closed form already proves divergence.
Decision decide_and_build(const ProbabilisedTree& pt, std::size_t max_len, const DecideOptions& opt = {});

struct ConsistencyReport {
  std::size_t depth = 0;
  double k1 = 0.0;  // max |mu(w0) + mu(w1) - mu(w)|
  double k2 = 0.0;  // max |mu(0w) + mu(1w) - mu(w)|
  double k3 = 0.0;  // max |pi(alpha w) - q_{lpref w}(alpha) pi(w)|, w noninternal
  std::size_t words = 0;
};

/// Checks the identities on every word of length <= depth (depth <= 16).
ConsistencyReport consistency_report(const StationaryMeasure& m, std::size_t depth);

struct PositivityReport {
  std::size_t depth = 0;
  double min_cylinder = 1.0;  // over words of length <= depth
  bool all_positive = false;
  /// (L, sum of pi over contexts of length <= L)
  std::vector<std::pair<std::size_t, double>> context_mass;
};

PositivityReport positivity_and_ray_mass_check(const StationaryMeasure& m, std::size_t depth);

}  // namespace vlmc
