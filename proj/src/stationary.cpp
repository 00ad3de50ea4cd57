#include "vlmc/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "vlmc/numeric.hpp"

namespace vlmc {

std::optional<double> CylinderCache::get(const Word& w) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(w);
  if (it == map_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

double CylinderCache::insert(const Word& w, double value) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(w);
  if (it != map_.end()) return it->second->second;
  if (capacity_ == 0) return value;
  order_.emplace_front(w, value);
  map_.emplace(w, order_.begin());
  while (map_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
  return value;
}

std::size_t CylinderCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

StationaryMeasure::StationaryMeasure(ProbabilisedTree pt, CascadeTable table, QMatrix q, FixedVector v,
                                     std::size_t cache_capacity)
    : pt_(std::move(pt)), table_(std::move(table)), q_(std::move(q)), v_(std::move(v)), cache_(cache_capacity) {
  const std::size_t n = table_.contexts.size();
  cum_pi_.assign(n + 1, 0.0);
  cum_pi0_.assign(n + 1, 0.0);
  cum_pi1_.assign(n + 1, 0.0);
  lex_words_.reserve(n);
  CompensatedSum a, b, c;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = table_.lex_order[r];
    lex_words_.push_back(table_.contexts[i]);
    std::size_t k = q_.index.find(table_.alis[i]);
    double p = k == npos ? 0.0 : table_.casc[i] * v_.values[k];
    a += p;
    b += p * table_.q0[i];
    c += p * (1.0 - table_.q0[i]);
    cum_pi_[r + 1] = a.value();
    cum_pi0_[r + 1] = b.value();
    cum_pi1_[r + 1] = c.value();
  }
  truncation_mass_ = std::max(0.0, 1.0 - a.value());
}

double StationaryMeasure::range_sum(const std::vector<double>& prefix, std::string_view u) const {
  auto lo = std::lower_bound(lex_words_.begin(), lex_words_.end(), u,
                             [](const Word& w, std::string_view key) { return std::string_view(w) < key; });
  auto hi = lo;
  // contexts with prefix u are contiguous in lex order
  Word upper(u);
  while (!upper.empty() && upper.back() == '1') upper.pop_back();
  if (upper.empty()) {
    hi = lex_words_.end();
  } else {
    upper.back() = '1';
    hi = std::lower_bound(lo, lex_words_.end(), upper,
                          [](const Word& w, const Word& key) { return w < key; });
  }
  std::size_t l = static_cast<std::size_t>(lo - lex_words_.begin());
  std::size_t h = static_cast<std::size_t>(hi - lex_words_.begin());
  return prefix[h] - prefix[l];
}

double StationaryMeasure::mu_alis(std::string_view alpha_s) const {
  check_binary(alpha_s);
  if (alpha_s.empty()) throw EmptyWord("mu of the empty word");
  std::size_t k = q_.index.find(alpha_s);
  if (k != npos) return v_.values[k];
  std::string_view s = alpha_s.substr(1);
  if (!pt_.tree().is_internal(s) || pt_.tree().is_internal(alpha_s))
    throw NotAnAlis("'" + std::string(alpha_s) + "' is not a letter followed by an internal word");
  return range_sum(alpha_s[0] == '0' ? cum_pi0_ : cum_pi1_, s);
}

double StationaryMeasure::compute(std::string_view w) const {
  const ContextTree& tree = pt_.tree();
  if (tree.is_internal(w)) return range_sum(cum_pi_, w);
  CascadeDetail d = cascade_detail(pt_, w);
  return d.value * mu_alis(d.decomposition.alis());
}

double StationaryMeasure::pi_cylinder(std::string_view w) const {
  check_binary(w);
  if (w.empty()) return 1.0;
  Word key(w);
  if (auto hit = cache_.get(key)) return *hit;
  return cache_.insert(key, compute(w));
}

double StationaryMeasure::kappa_weighted_sum() const {
  CompensatedSum s;
  for (std::size_t i = 0; i < v_.values.size() && i < q_.kappa.size(); ++i) s += v_.values[i] * q_.kappa[i].partial;
  return s.value();
}

const char* to_string(Decision::Kind k) {
  switch (k) {
    case Decision::Kind::UniqueMeasure: return "unique_measure";
    case Decision::Kind::NoMeasure: return "no_measure";
    case Decision::Kind::Undecided: return "undecided";
  }
  return "?";
}

Decision decide_and_build(const ProbabilisedTree& pt, std::size_t max_len, const DecideOptions& opt) {
  Decision d;
  d.max_len = max_len;
  d.stability = stability(pt);
  CascadeTable table = build_cascade_table(pt, max_len);
  QOptions qo;
  qo.kappa = opt.kappa;
  qo.throw_on_divergence = false;
  d.q = build_Q(pt, table, qo);

  std::vector<Word> diverged;
  bool all_converged = true;
  for (const KappaSum& k : d.q.kappa) {
    if (k.status == KappaStatus::Diverged) diverged.push_back(k.alis);
    if (k.status != KappaStatus::Converged) all_converged = false;
  }
  if (!diverged.empty()) {
    std::optional<bool> analytic;
    if (pt.family() && pt.family()->kappa_diverges) analytic = pt.family()->kappa_diverges(pt, max_len);
    if (analytic && *analytic) {
      d.kind = Decision::Kind::NoMeasure;
      d.reason = "cascade series of '" + diverged.front() + "' diverges (closed form)";
    } else {
      d.kind = Decision::Kind::Undecided;
      d.reason = "numerical divergence evidence for the cascade series of '" + diverged.front() + "'";
    }
    return d;
  }
  if (!pt.non_null(std::min(max_len, opt.non_null_depth)))
    throw NotNonNull("some context gives probability 0 to a letter");

  if (!d.q.index.complete) {
    d.kind = Decision::Kind::Undecided;
    d.reason = "alpha-lis set is infinite or not known to be complete at max_len " + std::to_string(max_len);
    try {
      d.fixed = left_fixed_vector(d.q, opt.fixed);
    } catch (const DidNotConverge&) {
    }
    return d;
  }
  if (!all_converged) {
    d.kind = Decision::Kind::Undecided;
    d.reason = "some cascade series did not reach the tolerance";
    return d;
  }
  d.fixed = left_fixed_vector(d.q, opt.fixed);
  const bool finite_stable = d.stability.kind == StabilityVerdict::Kind::Stable;
  switch (d.fixed.kind) {
    case FixedVectorResult::Kind::Unique:
      d.kind = Decision::Kind::UniqueMeasure;
      d.reason = finite_stable ? "finite alpha-lis set on a stable tree with converging cascade series"
                               : "one-dimensional space of left-fixed vectors with converging cascade series";
      d.measure = std::make_shared<StationaryMeasure>(pt, std::move(table), d.q, d.fixed.vector, opt.cache_capacity);
      break;
    case FixedVectorResult::Kind::NoneFound:
      d.kind = Decision::Kind::NoMeasure;
      d.reason = "Q has no nonnegative left-fixed vector";
      break;
    case FixedVectorResult::Kind::NotUniqueEvidence:
      d.kind = Decision::Kind::Undecided;
      d.reason = "left-fixed space of dimension " + std::to_string(d.fixed.nullity);
      break;
  }
  return d;
}

ConsistencyReport consistency_report(const StationaryMeasure& m, std::size_t depth) {
  if (depth > 16) throw BadParams("consistency depth must be <= 16");
  ConsistencyReport r;
  r.depth = depth;
  const ContextTree& tree = m.ptree().tree();
  std::vector<Word> words;
  for (std::size_t len = 0; len <= depth; ++len)
    for (Word& w : all_words(len)) words.push_back(std::move(w));
  r.words = words.size();
  std::vector<double> e1(words.size(), 0.0), e2(words.size(), 0.0), e3(words.size(), 0.0);
  parallel_for(words.size(), [&](std::size_t i) {
    const Word& w = words[i];
    double mw = m.pi_cylinder(w);
    e1[i] = std::fabs(m.pi_cylinder(w + "0") + m.pi_cylinder(w + "1") - mw);
    e2[i] = std::fabs(m.pi_cylinder("0" + w) + m.pi_cylinder("1" + w) - mw);
    if (!tree.is_internal(w)) {
      Word c = tree.lpref(w);
      for (char a : {'0', '1'})
        e3[i] = std::max(e3[i], std::fabs(m.pi_cylinder(a + w) - m.ptree().q(c, a) * mw));
    }
  });
  r.k1 = *std::max_element(e1.begin(), e1.end());
  r.k2 = *std::max_element(e2.begin(), e2.end());
  r.k3 = *std::max_element(e3.begin(), e3.end());
  return r;
}

PositivityReport positivity_and_ray_mass_check(const StationaryMeasure& m, std::size_t depth) {
  PositivityReport r;
  r.depth = depth;
  for (std::size_t len = 1; len <= depth; ++len)
    for (const Word& w : all_words(len)) r.min_cylinder = std::min(r.min_cylinder, m.pi_cylinder(w));
  r.all_positive = r.min_cylinder > 0.0;
  const CascadeTable& t = m.table();
  std::vector<CompensatedSum> by_len(t.max_len + 1);
  for (std::size_t i = 0; i < t.contexts.size(); ++i) {
    std::size_t k = m.q().index.find(t.alis[i]);
    if (k != npos) by_len[t.contexts[i].size()] += t.casc[i] * m.v().values[k];
  }
  CompensatedSum total;
  for (std::size_t l = 0; l <= t.max_len; ++l) {
    total += by_len[l].value();
    r.context_mass.emplace_back(l, total.value());
  }
  return r;
}

}  // namespace vlmc
