#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vlmc/cascade.hpp"

namespace vlmc {

/// Counter-based stream: draw i is splitmix64(seed, i).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t next() { return splitmix64(seed_ ^ splitmix64(counter_++)); }
  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct SamplerOptions {
  /// Chronological initial history (most recent letter last). Empty means
  /// burn-in mode: start from a fair-coin past of min_window letters and
  /// discard burnin steps.
  std::optional<Word> initial_history;
  std::size_t burnin = 10000;
  /// minimum number of retained letters
  std::size_t min_window = 4096;
};

/// Simulates the VLMC. History is stored reversed, so the tree-side word
/// (most recent letter first) is a contiguous view.
class Sampler {
 public:
  Sampler(ProbabilisedTree pt, std::uint64_t seed, SamplerOptions opt = {});

  /// Draws the next letter with law q_{lpref(history)} and appends it.
  char step();
  /// Context of the current history.
  std::string_view context() const { return view().substr(0, ctx_len_); }
  /// Current history in tree orientation (most recent first), retained part only.
  std::string_view view() const { return std::string_view(buf_).substr(pos_); }
  std::uint64_t seed() const { return rng_.seed(); }
  std::uint64_t steps() const { return steps_; }
  const ProbabilisedTree& ptree() const { return pt_; }

 private:
  void classify();
  double q0_of(std::string_view c);

  ProbabilisedTree pt_;
  CounterRng rng_;
  SamplerOptions opt_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::size_t ctx_len_ = 0;
  std::size_t longest_ = 0;
  bool dropped_ = false;
  std::uint64_t steps_ = 0;
  std::unordered_map<Word, double> memo_;
};

/// Chronological letters of n steps.
Word simulate(Sampler& s, std::size_t n);

struct ContextTrace {
  std::vector<Word> contexts;  // C_k after step k
  /// false for non-stable trees: the sequence is then not a Markov chain
  bool markov = true;
};

ContextTrace context_process(Sampler& s, std::size_t n);

struct JumpRecord {
  std::vector<Word> J;               // alpha-lis at each jump
  std::vector<std::size_t> S;        // jump times, S[0] = 0
  std::size_t length = 0;            // number of observed times
  /// Z_k for 0 <= k < length
  const Word& Z(std::size_t k) const;
};

/// Jump chain of the alpha-lis process. Both characterizations (C_k equal to
/// its own alpha-lis, |C_k| <= |C_{k-1}|) are computed and must agree;
/// throws TreeNotStable otherwise.
JumpRecord jump_decomposition(const ContextTree& tree, const std::vector<Word>& contexts);

/// q_{alpha s, beta t}(k): sum of casc(beta c) over contexts c with alpha-lis
/// alpha s, prefix t and sojourn |c| - |alpha s| + 1 = k.
double semi_markov_kernel(const ProbabilisedTree& pt, const CascadeTable& table, const Word& alpha_s,
                          const Word& beta_t, std::size_t k);
/// Requires a stable tree (TreeNotStable).
double semi_markov_kernel(const ProbabilisedTree& pt, const Word& alpha_s, const Word& beta_t, std::size_t k,
                          std::size_t max_len = 64);

/// Counts of (next alpha-lis, sojourn) per alpha-lis; the sojourn started
/// before the first observed jump and the unfinished last one are skipped.
std::map<Word, std::map<std::pair<Word, std::size_t>, std::size_t>> sojourn_counts(const JumpRecord& r);

struct CylinderEstimate {
  double frequency = 0.0;
  double se_binomial = 0.0;
  double se_batch = 0.0;  // batch-means standard error
  std::size_t windows = 0;
};

/// Frequency of windows of the chronological trajectory equal to mirror(w),
/// i.e. of the cylinder L w-bar.
CylinderEstimate empirical_cylinder(const Word& trajectory, const Word& w, std::size_t batches = 100);
/// Same for every word of length 1..max_len, keyed in tree orientation.
std::map<Word, CylinderEstimate> empirical_cylinders(const Word& trajectory, std::size_t max_len,
                                                     std::size_t batches = 100);

}  // namespace vlmc
