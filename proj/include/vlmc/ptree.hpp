#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "vlmc/context_tree.hpp"

namespace vlmc {

/// Assignment c -> q_c(0) on finite contexts.
class QRule {
 public:
  virtual ~QRule() = default;
  virtual double q0(std::string_view context) const = 0;
};

class ConstantRule final : public QRule {
 public:
  explicit ConstantRule(double q0) : q0_(q0) {}
  double q0(std::string_view) const override { return q0_; }
  double value() const { return q0_; }

 private:
  double q0_;
};

class TableRule final : public QRule {
 public:
  TableRule(std::map<Word, double> table, std::optional<double> fallback)
      : table_(std::move(table)), fallback_(fallback) {}
  double q0(std::string_view context) const override;
  const std::map<Word, double>& table() const { return table_; }
  std::optional<double> fallback() const { return fallback_; }

 private:
  std::map<Word, double> table_;
  std::optional<double> fallback_;
};

/// Deterministic pseudo-random q_c(0) in [lo, hi], hashed from (seed, c).
class RandomRule final : public QRule {
 public:
  RandomRule(std::uint64_t seed, double lo, double hi) : seed_(seed), lo_(lo), hi_(hi) {}
  double q0(std::string_view context) const override;
  std::uint64_t seed() const { return seed_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  std::uint64_t seed_;
  double lo_, hi_;
};

/// First matching regex wins. A pattern either fixes q_c(0), or makes it
/// geometric in the length n of a capture group: q_c(0) = scale * ratio^n
/// (target q0) or q_c(1) = scale * ratio^n (target q1).
class PatternRule final : public QRule {
 public:
  struct Pattern {
    std::string match;
    enum class Kind { Fixed, GeometricQ0, GeometricQ1 } kind = Kind::Fixed;
    double value = 0.5;  // Fixed
    double scale = 1.0, ratio = 1.0;
    int group = 1;
  };
  PatternRule(std::vector<Pattern> patterns, std::optional<double> fallback);
  double q0(std::string_view context) const override;
  const std::vector<Pattern>& patterns() const { return patterns_; }
  std::optional<double> fallback() const { return fallback_; }

 private:
  std::vector<Pattern> patterns_;
  std::vector<std::regex> compiled_;
  std::optional<double> fallback_;
};

/// Arbitrary callable; not serializable.
class FunctionRule final : public QRule {
 public:
  explicit FunctionRule(std::function<double(std::string_view)> f) : f_(std::move(f)) {}
  double q0(std::string_view context) const override { return f_(context); }

 private:
  std::function<double(std::string_view)> f_;
};

class ProbabilisedTree;

/// Closed-form metadata attached to trees built from a named family.
struct FamilyInfo {
  std::string name;
  std::string description;
  std::string params_json = "{}";
  std::optional<bool> stable;
  std::optional<bool> alis_finite;
  /// The whole set S when it is finite and known in closed form.
  std::optional<std::vector<Word>> finite_alis;
  /// Context list generated from the family's formulas, independent of the classifier.
  std::function<std::vector<Word>(std::size_t)> enumerate;
  /// alpha-lis of a context read off the family's table.
  std::function<std::optional<Word>(std::string_view)> alis_table;
  /// Closed-form divergence verdict for the cascade series, when known.
  std::function<std::optional<bool>(const ProbabilisedTree&, std::size_t)> kappa_diverges;
};

/// Context tree endowed with Bernoulli laws q_c on its finite contexts.
class ProbabilisedTree {
 public:
  ProbabilisedTree() = default;
  ProbabilisedTree(ContextTree tree, std::shared_ptr<const QRule> rule,
                   std::shared_ptr<const FamilyInfo> family = nullptr);

  const ContextTree& tree() const { return tree_; }
  const QRule& rule() const { return *rule_; }
  std::shared_ptr<const QRule> rule_ptr() const { return rule_; }
  const FamilyInfo* family() const { return family_.get(); }
  std::shared_ptr<const FamilyInfo> family_ptr() const { return family_; }

  /// q_c(0); throws BadParams when outside [0, 1].
  double q0(std::string_view context) const;
  double q(std::string_view context, char letter) const {
    double p = q0(context);
    return letter == '0' ? p : 1.0 - p;
  }
  /// True when every context of length <= max_len gives positive mass to both letters.
  bool non_null(std::size_t max_len) const;
  /// Smallest q_c(a) over contexts of length <= max_len.
  double min_probability(std::size_t max_len) const;

 private:
  ContextTree tree_;
  std::shared_ptr<const QRule> rule_;
  std::shared_ptr<const FamilyInfo> family_;
};

/// Stability from the family's closed form when declared, else is_stable.
StabilityVerdict stability(const ProbabilisedTree& pt, std::size_t probe_depth = 40);
bool is_stable_tree(const ProbabilisedTree& pt, std::size_t probe_depth = 40);

/// Stabilized tree carrying q_c = q_{lpref(c)} of the original tree, which
/// leaves the law of the process unchanged.
ProbabilisedTree stabilize(const ProbabilisedTree& pt, std::size_t depth_budget,
                           std::size_t max_states = 1u << 14);

/// 64-bit mixing used for hashed rules and seeding.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_word(std::uint64_t seed, std::string_view w);

}  // namespace vlmc
