#pragma once

#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vlmc/ptree.hpp"

namespace vlmc {

/// w = head . alpha . lis with lis the longest internal strict suffix of w.
struct AlisDecomposition {
  Word head;
  char alpha = '0';
  Word lis;
  std::size_t p = 0;
  Word alis() const { return alpha + lis; }
};

/// Strips letters from the left until the remaining suffix is internal.
/// Throws EmptyWord on the empty word.
AlisDecomposition alpha_lis(const ContextTree& tree, std::string_view w);

struct CascadeFactor {
  Word context;  // lpref of the k-th shift
  char letter;   // k-th letter of w
};

struct CascadeDetail {
  AlisDecomposition decomposition;
  std::vector<CascadeFactor> factors;
  double value = 1.0;
};

CascadeDetail cascade_detail(const ProbabilisedTree& pt, std::string_view w);
/// Product of q_{lpref(shift^k w)}(beta_k) over the head letters; 1 on the empty word.
double cascade(const ProbabilisedTree& pt, std::string_view w);

/// Every finite context of length <= max_len with its alpha-lis and cascade.
struct CascadeTable {
  std::size_t max_len = 0;
  std::vector<Word> contexts;  // (length, lex)
  std::vector<Word> alis;
  std::vector<double> casc;
  std::vector<double> q0;
  /// alpha-lis -> context indices, in context order
  std::map<Word, std::vector<std::size_t>> by_alis;
  /// true when max_len reaches the height of a finite tree
  bool exhaustive = false;

  /// indices of contexts having u as a prefix, sorted lexicographically
  std::vector<std::size_t> with_prefix(std::string_view u) const;

  std::vector<std::size_t> lex_order;  // context indices in plain lex order
};

CascadeTable build_cascade_table(const ProbabilisedTree& pt, std::size_t max_len);

enum class KappaStatus { Converged, Diverged, Truncated };
const char* to_string(KappaStatus s);

struct KappaOptions {
  double tol = 1e-12;
  /// partial sum a series must exceed before Diverged is reported
  double explosion = 8.0;
  /// width (in context lengths) of the blocks compared by the tail estimate
  std::size_t block = 4;
};

/// Truncated cascade series of one alpha-lis.
/// partial is exact over contexts of length <= max_len. tail_bound is 0 when the
/// enumeration is exhaustive, otherwise a geometric extrapolation of the last
/// blocks of per-length mass (infinity when they do not decay).
/// frontier is the cascade mass of contexts of maximal length.
struct KappaSum {
  Word alis;
  double partial = 0.0;
  double tail_bound = std::numeric_limits<double>::infinity();
  double frontier = 0.0;
  KappaStatus status = KappaStatus::Truncated;
  std::size_t n_terms = 0;
  std::vector<double> level_mass;  // index = context length
};

KappaSum kappa_from_table(const CascadeTable& table, const Word& alis, const KappaOptions& opt = {});
/// Throws NotAnAlis when alis is not the alpha-lis of a context of length <= max_len.
KappaSum kappa(const ProbabilisedTree& pt, const Word& alis, std::size_t max_len,
               const KappaOptions& opt = {});

/// Contexts sharing one alpha-lis, linked by prepending a letter.
struct DescentTree {
  Word root;
  std::size_t depth = 0;
  std::vector<Word> nodes;  // (length, lex); root first
  std::vector<double> node_casc;
  /// daughters b.c of nodes of depth < depth that are not contexts
  std::vector<Word> daughters;
  std::vector<double> daughter_casc;

  /// Leaves of the depth-truncated saturated tree: external daughters plus
  /// nodes of maximal depth.
  std::vector<Word> truncated_leaves() const;
};

/// Requires a stable tree (TreeNotStable otherwise).
DescentTree descent_tree(const ProbabilisedTree& pt, const Word& alis, std::size_t depth);

}  // namespace vlmc
