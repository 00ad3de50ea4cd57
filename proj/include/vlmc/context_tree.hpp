#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlmc/word.hpp"

namespace vlmc {

/// Deterministic description of a regular context tree. State 0 is the root;
/// every state stands for a class of internal nodes and next[s][a] is the
/// state reached by appending letter a, or kLeaf when that child is a context.
struct Automaton {
  static constexpr int kLeaf = -1;
  std::vector<std::array<int, 2>> next;
};

/// Exact classifier of a context tree.
class TreeShape {
 public:
  virtual ~TreeShape() = default;
  /// Length of the context that prefixes w, npos when w is internal.
  virtual std::size_t lpref_len(std::string_view w) const = 0;
  virtual const Automaton* automaton() const { return nullptr; }
  /// Length of the longest context when the tree is finite.
  virtual std::optional<std::size_t> height() const { return std::nullopt; }
};

/// Immutable, validated context tree over {0,1}. Cheap to copy.
class ContextTree {
 public:
  ContextTree() = default;
  explicit ContextTree(std::shared_ptr<const TreeShape> shape);

  /// Explicit finite tree; validates prefix-freeness, saturation and completeness.
  static ContextTree from_contexts(const std::vector<Word>& contexts);
  static ContextTree from_automaton(Automaton a);

  NodeClass classify(std::string_view w) const;
  std::size_t lpref_len(std::string_view w) const { return shape_->lpref_len(w); }
  /// Context prefix of w; throws HistoryTooShort when w is internal.
  Word lpref(std::string_view w) const;
  bool is_context(std::string_view w) const { return lpref_len(w) == w.size(); }
  bool is_internal(std::string_view w) const { return lpref_len(w) == npos; }

  /// Finite contexts of length <= max_len, in (length, lex) order.
  std::vector<Word> contexts(std::size_t max_len) const;
  /// Internal nodes of length <= max_len, root included, in (length, lex) order.
  std::vector<Word> internal_nodes(std::size_t max_len) const;

  std::optional<std::size_t> height() const { return shape_->height(); }
  const Automaton* automaton() const { return shape_->automaton(); }
  bool valid() const { return static_cast<bool>(shape_); }

  /// True when the contexts are exactly all words of some fixed length d.
  bool is_complete_finite() const;

  /// Checks saturation on all internal nodes of length < depth; throws InvalidTree.
  void spot_validate(std::size_t depth) const;

 private:
  std::shared_ptr<const TreeShape> shape_;
};

struct StabilityVerdict {
  enum class Kind { Stable, Unstable, Inconclusive };
  Kind kind = Kind::Inconclusive;
  /// Unstable only: the finite context c and letter a with a.c internal.
  Word witness_context;
  char witness_letter = '0';
  /// False when Stable comes from a depth-limited probe.
  bool exact = false;
};

const char* to_string(StabilityVerdict::Kind k);

/// Stability test "a.c is noninternal for every finite context c and letter a".
/// Exact for automaton trees; otherwise probes contexts up to probe_depth and
/// answers Unstable(witness) or Inconclusive.
StabilityVerdict is_stable(const ContextTree& tree, std::size_t probe_depth);

/// For a stable automaton tree, every suffix of a context is a node, so the
/// alpha-lis of the contexts are exactly the contexts whose shift is internal.
/// Returns their number when it is finite, nullopt when it is infinite or the
/// tree is not a stable automaton tree.
std::optional<std::size_t> stable_alis_count(const ContextTree& tree);

/// Direct shift-closure test on nodes of length <= depth: every nonempty node w
/// has shift(w) as a node. Used to cross-check is_stable.
bool shift_closed_up_to(const ContextTree& tree, std::size_t depth);

/// Tree whose node set is the union of all shifts of the nodes of tree.
/// Requires an automaton tree; throws BudgetExceeded when the subset
/// construction needs more than max_states states or depth_budget levels.
ContextTree stabilize(const ContextTree& tree, std::size_t depth_budget,
                      std::size_t max_states = 1u << 14);

/// Nodes (internal and contexts) of length <= depth, in (length, lex) order.
std::vector<Word> nodes_up_to(const ContextTree& tree, std::size_t depth);

}  // namespace vlmc
