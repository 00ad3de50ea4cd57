#include "vlmc/ptree.hpp"

#include <algorithm>
#include <cmath>

namespace vlmc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_word(std::uint64_t seed, std::string_view w) {
  std::uint64_t h = splitmix64(seed ^ 0x5bd1e995ULL);
  for (char c : w) h = splitmix64(h ^ static_cast<std::uint64_t>(c == '1' ? 0xa5 : 0x3c));
  return splitmix64(h ^ w.size());
}

double TableRule::q0(std::string_view context) const {
  auto it = table_.find(Word(context));
  if (it != table_.end()) return it->second;
  if (fallback_) return *fallback_;
  throw BadParams("no q value for context '" + std::string(context) + "'");
}

double RandomRule::q0(std::string_view context) const {
  double u = static_cast<double>(hash_word(seed_, context) >> 11) * 0x1.0p-53;
  return lo_ + (hi_ - lo_) * u;
}

PatternRule::PatternRule(std::vector<Pattern> patterns, std::optional<double> fallback)
    : patterns_(std::move(patterns)), fallback_(fallback) {
  compiled_.reserve(patterns_.size());
  for (const auto& p : patterns_) {
    try {
      compiled_.emplace_back(p.match, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      throw BadParams("bad pattern '" + p.match + "': " + e.what());
    }
  }
}

double PatternRule::q0(std::string_view context) const {
  std::string s(context);
  std::smatch m;
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (!std::regex_match(s, m, compiled_[i])) continue;
    const Pattern& p = patterns_[i];
    if (p.kind == Pattern::Kind::Fixed) return p.value;
    if (p.group < 0 || static_cast<std::size_t>(p.group) >= m.size())
      throw BadParams("pattern '" + p.match + "' has no group " + std::to_string(p.group));
    double g = p.scale * std::pow(p.ratio, static_cast<double>(m[p.group].length()));
    return p.kind == Pattern::Kind::GeometricQ0 ? g : 1.0 - g;
  }
  if (fallback_) return *fallback_;
  throw BadParams("no pattern matches context '" + s + "'");
}

ProbabilisedTree::ProbabilisedTree(ContextTree tree, std::shared_ptr<const QRule> rule,
                                   std::shared_ptr<const FamilyInfo> family)
    : tree_(std::move(tree)), rule_(std::move(rule)), family_(std::move(family)) {
  if (!tree_.valid()) throw InvalidTree("probabilised tree needs a tree");
  if (!rule_) throw BadParams("probabilised tree needs a q rule");
}

double ProbabilisedTree::q0(std::string_view context) const {
  double p = rule_->q0(context);
  if (!(p >= 0.0 && p <= 1.0))
    throw BadParams("q_c(0) = " + std::to_string(p) + " outside [0,1] for context '" +
                    std::string(context) + "'");
  return p;
}

bool ProbabilisedTree::non_null(std::size_t max_len) const {
  return min_probability(max_len) > 0.0;
}

double ProbabilisedTree::min_probability(std::size_t max_len) const {
  double m = 1.0;
  for (const Word& c : tree_.contexts(max_len)) {
    double p = q0(c);
    m = std::min({m, p, 1.0 - p});
  }
  return m;
}

StabilityVerdict stability(const ProbabilisedTree& pt, std::size_t probe_depth) {
  StabilityVerdict v = is_stable(pt.tree(), probe_depth);
  if (v.kind == StabilityVerdict::Kind::Inconclusive && pt.family() && pt.family()->stable) {
    v.kind = *pt.family()->stable ? StabilityVerdict::Kind::Stable : StabilityVerdict::Kind::Unstable;
    v.exact = true;
  }
  return v;
}

bool is_stable_tree(const ProbabilisedTree& pt, std::size_t probe_depth) {
  return stability(pt, probe_depth).kind == StabilityVerdict::Kind::Stable;
}

ProbabilisedTree stabilize(const ProbabilisedTree& pt, std::size_t depth_budget, std::size_t max_states) {
  ContextTree st = stabilize(pt.tree(), depth_budget, max_states);
  auto rule = std::make_shared<FunctionRule>(
      [orig = pt.tree(), r = pt.rule_ptr()](std::string_view c) { return r->q0(orig.lpref(c)); });
  return ProbabilisedTree(st, rule);
}

}  // namespace vlmc
