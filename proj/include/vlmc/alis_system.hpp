#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlmc/cascade.hpp"

namespace vlmc {

/// Ordered set S of context alpha-lis, (length, lex) order.
struct AlisIndex {
  std::vector<Word> entries;
  std::size_t truncation = 0;
  /// true when S is known to be exactly `entries`
  bool complete = false;

  std::size_t size() const { return entries.size(); }
  /// npos when w is not listed
  std::size_t find(std::string_view w) const;

 private:
  friend AlisIndex make_alis_index(std::vector<Word>, std::size_t, bool);
  std::map<Word, std::size_t, std::less<>> pos_;
};

AlisIndex make_alis_index(std::vector<Word> entries, std::size_t truncation, bool complete);
AlisIndex alis_set(const ProbabilisedTree& pt, const CascadeTable& table);
AlisIndex alis_set(const ProbabilisedTree& pt, std::size_t max_len);

/// Q restricted to contexts of length <= truncation. Entries that receive no
/// contribution are exactly 0.
struct QMatrix {
  AlisIndex index;
  std::vector<double> entries;  // row-major, n x n
  /// upper bound on the mass a row misses because of the truncation
  std::vector<double> row_tail;
  std::vector<KappaSum> kappa;
  bool stable = false;

  std::size_t n() const { return index.size(); }
  double operator()(std::size_t i, std::size_t j) const { return entries[i * n() + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * n() + j]; }
  double row_sum(std::size_t i) const;
  /// true when every kappa of the index has Converged
  bool converged() const;
};

struct QOptions {
  KappaOptions kappa;
  /// throw CascadeDiverged when some kappa is Diverged
  bool throw_on_divergence = true;
};

QMatrix build_Q(const ProbabilisedTree& pt, const CascadeTable& table, const QOptions& opt = {});
QMatrix build_Q(const ProbabilisedTree& pt, std::size_t max_len, const QOptions& opt = {});
/// Dense matrix wrapper, used for hand-written matrices.
QMatrix q_from_dense(std::vector<Word> labels, const std::vector<std::vector<double>>& rows);

/// Strong connectivity of the graph of positive entries.
bool is_irreducible(const QMatrix& q);

enum class Normalization { UnitSum, KappaWeighted };

struct FixedVector {
  std::vector<double> values;
  double residual = 0.0;  // max |vQ - v|
  Normalization normalization = Normalization::UnitSum;
};

struct FixedVectorResult {
  enum class Kind { Unique, NoneFound, NotUniqueEvidence } kind = Kind::NoneFound;
  FixedVector vector;
  /// dimension of the numerical nullspace of Q^T - I (direct solver only)
  std::size_t nullity = 0;
  std::vector<double> singular_values;  // ascending
  std::size_t iterations = 0;
};

const char* to_string(FixedVectorResult::Kind k);

struct FixedVectorOptions {
  double rank_tol = 1e-9;
  double tol = 1e-13;
  std::size_t max_iter = 200000;
  /// matrices up to this size use the SVD; larger ones use power iteration
  std::size_t direct_limit = 64;
};

/// Left-fixed vector of Q. Unique results are normalized to unit sum, then
/// KappaWeighted (sum v kappa = 1) when kappa partial sums are available.
/// Throws DidNotConverge when power iteration exhausts max_iter.
FixedVectorResult left_fixed_vector(const QMatrix& q, const FixedVectorOptions& opt = {});

double fixed_residual(const QMatrix& q, const std::vector<double>& v);

/// Countable stochastic matrix seen through its entries (0-based states).
struct CountableMatrix {
  std::function<double(std::size_t, std::size_t)> entry;
  /// optional: upper bound on sum_{i >= n} (1 - entry(i, i+1))
  std::function<double(std::size_t)> defect_tail;
};

struct RecurrenceLevel {
  std::size_t level = 0;
  /// probability of returning to state 0 without leaving states < level
  double return_lower = 0.0;
  /// probability of the path 0 -> 1 -> 2 -> ... never coming back, or -1
  double escape_lower = -1.0;
};

struct RecurrenceReport {
  enum class Kind { RecurrentEvidence, TransientEvidence, Inconclusive } kind = Kind::Inconclusive;
  double prob_lower = 0.0;  // return (Recurrent) or escape (Transient) lower bound
  std::vector<RecurrenceLevel> levels;
};

const char* to_string(RecurrenceReport::Kind k);

struct RecurrenceOptions {
  /// return lower bound needed for RecurrentEvidence
  double recurrent_threshold = 1.0 - 1e-9;
};

RecurrenceReport recurrence_bounds(const CountableMatrix& a, const std::vector<std::size_t>& levels,
                                   const RecurrenceOptions& opt = {});
/// Q of a stable tree; throws TreeNotStable. Levels are truncation lengths;
/// the matrix used at each level is the Q built on contexts of that length.
RecurrenceReport recurrence_bounds(const ProbabilisedTree& pt, const std::vector<std::size_t>& levels,
                                   const RecurrenceOptions& opt = {});

/// max |Q - A| over the leading block of Q rebuilt at max_len; labels of A
/// are the first rows of Q in index order.
double verify_realization(const ProbabilisedTree& pt, const std::vector<std::vector<double>>& a,
                          std::size_t max_len);

}  // namespace vlmc
