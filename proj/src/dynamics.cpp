#include "vlmc/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "vlmc/numeric.hpp"

namespace vlmc {

Sampler::Sampler(ProbabilisedTree pt, std::uint64_t seed, SamplerOptions opt)
    : pt_(std::move(pt)), rng_(seed), opt_(std::move(opt)) {
  Word start;
  if (opt_.initial_history) {
    check_binary(*opt_.initial_history);
    start = mirror(*opt_.initial_history);
  } else {
    // a bare finite context can have internal extensions in a non-stable
    // tree, so burn-in starts from a long fair-coin past instead
    CounterRng pad(splitmix64(seed ^ 0x5eedULL));
    start.resize(opt_.min_window);
    for (char& c : start) c = pad.uniform() < 0.5 ? '0' : '1';
  }
  const std::size_t cap = std::max<std::size_t>(2 * opt_.min_window, 2 * start.size() + 64);
  buf_.assign(cap, '0');
  pos_ = cap - start.size();
  std::copy(start.begin(), start.end(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
  classify();
  if (!opt_.initial_history)
    for (std::size_t i = 0; i < opt_.burnin; ++i) step();
}

void Sampler::classify() {
  std::size_t l = pt_.tree().lpref_len(view());
  if (l == npos)
    throw HistoryTooShort(dropped_ ? "retained history is internal; raise min_window"
                                   : "history does not reach a context");
  ctx_len_ = l;
  longest_ = std::max(longest_, l);
}

double Sampler::q0_of(std::string_view c) {
  Word key(c);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  if (memo_.size() >= (std::size_t{1} << 20)) memo_.clear();
  double p = pt_.q0(c);
  memo_.emplace(std::move(key), p);
  return p;
}

char Sampler::step() {
  const double p = q0_of(context());
  const char a = rng_.uniform() < p ? '0' : '1';
  if (pos_ == 0) {
    const std::size_t keep = std::min(buf_.size(), std::max(opt_.min_window, 2 * longest_ + 16));
    if (keep < buf_.size()) dropped_ = true;
    const std::size_t cap = std::max(buf_.size(), 2 * keep);
    std::string nb(cap, '0');
    std::copy(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(keep),
              nb.end() - static_cast<std::ptrdiff_t>(keep));
    buf_.swap(nb);
    pos_ = cap - keep;
  }
  buf_[--pos_] = a;
  ++steps_;
  classify();
  return a;
}

Word simulate(Sampler& s, std::size_t n) {
  Word out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(s.step());
  return out;
}

ContextTrace context_process(Sampler& s, std::size_t n) {
  ContextTrace t;
  t.markov = is_stable_tree(s.ptree());
  t.contexts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.step();
    t.contexts.emplace_back(s.context());
  }
  return t;
}

const Word& JumpRecord::Z(std::size_t k) const {
  if (k >= length) throw BadParams("time outside the record");
  auto it = std::upper_bound(S.begin(), S.end(), k);
  return J[static_cast<std::size_t>(it - S.begin()) - 1];
}

JumpRecord jump_decomposition(const ContextTree& tree, const std::vector<Word>& contexts) {
  JumpRecord r;
  r.length = contexts.size();
  if (contexts.empty()) return r;
  r.J.push_back(alpha_lis(tree, contexts[0]).alis());
  r.S.push_back(0);
  for (std::size_t k = 1; k < contexts.size(); ++k) {
    const Word& c = contexts[k];
    Word a = alpha_lis(tree, c).alis();
    bool own = a == c;
    bool shrink = c.size() <= contexts[k - 1].size();
    if (own != shrink)
      throw TreeNotStable("jump characterizations disagree at time " + std::to_string(k) + " (context '" + c +
                          "'); input is not from a stable tree");
    if (!own && a != r.J.back())
      throw TreeNotStable("alpha-lis changed without a jump at time " + std::to_string(k));
    if (own) {
      r.J.push_back(std::move(a));
      r.S.push_back(k);
    }
  }
  return r;
}

double semi_markov_kernel(const ProbabilisedTree& pt, const CascadeTable& table, const Word& alpha_s,
                          const Word& beta_t, std::size_t k) {
  if (beta_t.empty() || k == 0) return 0.0;
  const std::size_t len = alpha_s.size() + k - 1;
  const char beta = beta_t[0];
  const std::string_view t = std::string_view(beta_t).substr(1);
  if (len > table.max_len)
    throw BadParams("sojourn " + std::to_string(k) + " needs contexts longer than max_len");
  CompensatedSum s;
  for (std::size_t i : table.with_prefix(t)) {
    const Word& c = table.contexts[i];
    if (c.size() != len || table.alis[i] != alpha_s) continue;
    s += table.casc[i] * pt.q(c, beta);
  }
  return s.value();
}

double semi_markov_kernel(const ProbabilisedTree& pt, const Word& alpha_s, const Word& beta_t, std::size_t k,
                          std::size_t max_len) {
  if (!is_stable_tree(pt)) throw TreeNotStable("the semi-Markov kernel needs a stable tree");
  return semi_markov_kernel(pt, build_cascade_table(pt, max_len), alpha_s, beta_t, k);
}

std::map<Word, std::map<std::pair<Word, std::size_t>, std::size_t>> sojourn_counts(const JumpRecord& r) {
  std::map<Word, std::map<std::pair<Word, std::size_t>, std::size_t>> out;
  // S[0] = 0 is the start of the observation, not a jump, so the first full sojourn starts at S[1]
  for (std::size_t n = 1; n + 1 < r.S.size(); ++n) ++out[r.J[n]][{r.J[n + 1], r.S[n + 1] - r.S[n]}];
  return out;
}

namespace {

CylinderEstimate estimate(const std::vector<std::uint8_t>& hits, std::size_t batches) {
  CylinderEstimate e;
  e.windows = hits.size();
  if (hits.empty()) return e;
  std::size_t total = 0;
  for (auto h : hits) total += h;
  const double n = static_cast<double>(hits.size());
  e.frequency = static_cast<double>(total) / n;
  e.se_binomial = std::sqrt(e.frequency * (1.0 - e.frequency) / n);
  batches = std::max<std::size_t>(2, std::min(batches, hits.size() / 2));
  const std::size_t bsize = hits.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    std::size_t c = 0;
    for (std::size_t i = b * bsize; i < (b + 1) * bsize; ++i) c += hits[i];
    means[b] = static_cast<double>(c) / static_cast<double>(bsize);
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(batches - 1);
  e.se_batch = std::sqrt(var / static_cast<double>(batches));
  return e;
}

}  // namespace

CylinderEstimate empirical_cylinder(const Word& trajectory, const Word& w, std::size_t batches) {
  check_binary(trajectory);
  check_binary(w);
  if (w.empty() || trajectory.size() < w.size())
    throw TrajectoryTooShort("trajectory of length " + std::to_string(trajectory.size()) +
                             " has no window of length " + std::to_string(w.size()));
  const Word pattern = mirror(w);
  std::vector<std::uint8_t> hits(trajectory.size() - w.size() + 1);
  for (std::size_t i = 0; i < hits.size(); ++i)
    hits[i] = trajectory.compare(i, pattern.size(), pattern) == 0 ? 1 : 0;
  return estimate(hits, batches);
}

std::map<Word, CylinderEstimate> empirical_cylinders(const Word& trajectory, std::size_t max_len,
                                                     std::size_t batches) {
  std::map<Word, CylinderEstimate> out;
  for (std::size_t len = 1; len <= max_len; ++len) {
    if (trajectory.size() < len) throw TrajectoryTooShort("trajectory shorter than the word length");
    const std::size_t nw = trajectory.size() - len + 1;
    // rolling code of each chronological window
    std::vector<std::uint32_t> code(nw);
    std::uint32_t c = 0;
    const std::uint32_t mask = (1u << len) - 1;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      c = ((c << 1) | static_cast<std::uint32_t>(trajectory[i] == '1')) & mask;
      if (i + 1 >= len) code[i + 1 - len] = c;
    }
    std::vector<std::uint8_t> hits(nw);
    for (const Word& w : all_words(len)) {
      const Word pattern = mirror(w);
      std::uint32_t target = 0;
      for (char ch : pattern) target = (target << 1) | static_cast<std::uint32_t>(ch == '1');
      for (std::size_t i = 0; i < nw; ++i) hits[i] = code[i] == target;
      out.emplace(w, estimate(hits, batches));
    }
  }
  return out;
}

}  // namespace vlmc
