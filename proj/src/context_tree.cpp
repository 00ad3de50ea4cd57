#include "vlmc/context_tree.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <unordered_map>

namespace vlmc {

namespace {

class AutomatonShape final : public TreeShape {
 public:
  explicit AutomatonShape(Automaton a) : a_(std::move(a)) { height_ = compute_height(); }

  std::size_t lpref_len(std::string_view w) const override {
    int s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s = a_.next[s][letter_index(w[i])];
      if (s == Automaton::kLeaf) return i + 1;
    }
    return npos;
  }
  const Automaton* automaton() const override { return &a_; }
  std::optional<std::size_t> height() const override { return height_; }

 private:
  // longest root-to-leaf path, nullopt when a cycle is reachable
  std::optional<std::size_t> compute_height() const {
    const std::size_t n = a_.next.size();
    std::vector<int> mark(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> depth(n, 0);
    bool cyclic = false;
    std::function<void(int)> dfs = [&](int s) {
      mark[s] = 1;
      std::size_t best = 1;
      for (int a = 0; a < 2; ++a) {
        int t = a_.next[s][a];
        if (t == Automaton::kLeaf) continue;
        if (mark[t] == 1) { cyclic = true; continue; }
        if (mark[t] == 0) dfs(t);
        best = std::max(best, depth[t] + 1);
      }
      depth[s] = best;
      mark[s] = 2;
    };
    dfs(0);
    if (cyclic) return std::nullopt;
    return depth[0];
  }

  Automaton a_;
  std::optional<std::size_t> height_;
};

void check_automaton(const Automaton& a) {
  if (a.next.empty()) throw InvalidTree("automaton has no root state");
  const int n = static_cast<int>(a.next.size());
  for (const auto& row : a.next)
    for (int t : row)
      if (t != Automaton::kLeaf && (t < 0 || t >= n))
        throw InvalidTree("automaton transition out of range");
}

}  // namespace

ContextTree::ContextTree(std::shared_ptr<const TreeShape> shape) : shape_(std::move(shape)) {
  if (!shape_) throw InvalidTree("null tree shape");
  if (shape_->lpref_len("") == 0)
    throw InvalidTree("the trivial tree whose only context is the empty word is not a VLMC tree");
}

ContextTree ContextTree::from_automaton(Automaton a) {
  check_automaton(a);
  return ContextTree(std::make_shared<AutomatonShape>(std::move(a)));
}

ContextTree ContextTree::from_contexts(const std::vector<Word>& contexts) {
  if (contexts.empty()) throw InvalidTree("explicit tree needs at least one context");
  // trie over internal nodes; leaf children marked with kLeaf, missing with -2
  constexpr int kMissing = -2;
  std::vector<std::array<int, 2>> next{{kMissing, kMissing}};
  for (const Word& c : contexts) {
    check_binary(c);
    if (c.empty()) throw InvalidTree("the empty word cannot be a context of a proper tree");
    int s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      int a = letter_index(c[i]);
      int& slot = next[s][a];
      bool last = i + 1 == c.size();
      if (slot == Automaton::kLeaf)
        throw InvalidTree("not prefix-free: '" + c.substr(0, i + 1) + "' is a context and a prefix of '" + c + "'");
      if (last) {
        if (slot != kMissing)
          throw InvalidTree(slot >= 0 ? "not prefix-free: '" + c + "' is a strict prefix of another context"
                                      : "duplicate context '" + c + "'");
        slot = Automaton::kLeaf;
      } else {
        if (slot == kMissing) {
          slot = static_cast<int>(next.size());
          next.push_back({kMissing, kMissing});
        }
        s = next[s][a];
      }
    }
  }
  // completeness: every internal node must have both children
  std::vector<std::pair<int, Word>> stack{{0, ""}};
  while (!stack.empty()) {
    auto [s, w] = stack.back();
    stack.pop_back();
    for (int a = 0; a < 2; ++a) {
      int t = next[s][a];
      if (t == kMissing)
        throw InvalidTree("not saturated: no context is a prefix of '" + w + letter_char(a) + "'");
      if (t >= 0) stack.push_back({t, w + letter_char(a)});
    }
  }
  return from_automaton(Automaton{std::move(next)});
}

NodeClass ContextTree::classify(std::string_view w) const {
  std::size_t l = lpref_len(w);
  if (l == npos) return NodeClass::Internal;
  return l == w.size() ? NodeClass::FiniteContext : NodeClass::ExternalStrict;
}

Word ContextTree::lpref(std::string_view w) const {
  std::size_t l = lpref_len(w);
  if (l == npos)
    throw HistoryTooShort("no prefix of '" + std::string(w) + "' is a context");
  return Word(w.substr(0, l));
}

namespace {

// Level-order walk over internal nodes; visit(word, is_context) sees every node.
template <class Visit>
void walk_nodes(const ContextTree& t, std::size_t max_len, Visit visit) {
  const Automaton* a = t.automaton();
  if (a) {
    std::vector<std::pair<Word, int>> level{{"", 0}};
    visit(Word(), false);
    for (std::size_t len = 1; len <= max_len && !level.empty(); ++len) {
      std::vector<std::pair<Word, int>> nxt;
      for (const auto& [w, s] : level)
        for (int x = 0; x < 2; ++x) {
          Word c = w + letter_char(x);
          int u = a->next[s][x];
          visit(c, u == Automaton::kLeaf);
          if (u != Automaton::kLeaf) nxt.push_back({std::move(c), u});
        }
      level.swap(nxt);
    }
    return;
  }
  std::vector<Word> level{""};
  visit(Word(), false);
  for (std::size_t len = 1; len <= max_len && !level.empty(); ++len) {
    std::vector<Word> nxt;
    for (const Word& w : level)
      for (int x = 0; x < 2; ++x) {
        Word c = w + letter_char(x);
        std::size_t l = t.lpref_len(c);
        if (l != npos && l != c.size())
          throw InvalidTree("not saturated: child '" + c + "' of internal node is external");
        visit(c, l == c.size());
        if (l == npos) nxt.push_back(std::move(c));
      }
    level.swap(nxt);
  }
}

}  // namespace

std::vector<Word> ContextTree::contexts(std::size_t max_len) const {
  std::vector<Word> out;
  walk_nodes(*this, max_len, [&](const Word& w, bool ctx) {
    if (ctx) out.push_back(w);
  });
  return out;
}

std::vector<Word> ContextTree::internal_nodes(std::size_t max_len) const {
  std::vector<Word> out;
  walk_nodes(*this, max_len, [&](const Word& w, bool ctx) {
    if (!ctx) out.push_back(w);
  });
  return out;
}

std::vector<Word> nodes_up_to(const ContextTree& tree, std::size_t depth) {
  std::vector<Word> out;
  walk_nodes(tree, depth, [&](const Word& w, bool) { out.push_back(w); });
  return out;
}

bool ContextTree::is_complete_finite() const {
  auto h = height();
  if (!h || *h > 24) return false;
  auto cs = contexts(*h);
  if (cs.size() != (std::size_t{1} << *h)) return false;
  return std::all_of(cs.begin(), cs.end(), [&](const Word& c) { return c.size() == *h; });
}

void ContextTree::spot_validate(std::size_t depth) const {
  if (!is_internal("")) throw InvalidTree("root must be internal");
  // walk_nodes throws on a saturation defect
  (void)internal_nodes(depth);
}

const char* to_string(StabilityVerdict::Kind k) {
  switch (k) {
    case StabilityVerdict::Kind::Stable: return "stable";
    case StabilityVerdict::Kind::Unstable: return "unstable";
    case StabilityVerdict::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

StabilityVerdict is_stable(const ContextTree& tree, std::size_t probe_depth) {
  StabilityVerdict v;
  if (const Automaton* a = tree.automaton()) {
    // product walk: s1 tracks c from the root, s2 tracks alpha.c
    for (int alpha = 0; alpha < 2; ++alpha) {
      int start2 = a->next[0][alpha];
      if (start2 == Automaton::kLeaf) continue;
      std::map<std::pair<int, int>, std::pair<std::pair<int, int>, int>> parent;
      std::deque<std::pair<int, int>> queue;
      auto root = std::make_pair(0, start2);
      parent[root] = {{-1, -1}, -1};
      queue.push_back(root);
      while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (int x = 0; x < 2; ++x) {
          int n1 = a->next[cur.first][x];
          int n2 = a->next[cur.second][x];
          if (n2 == Automaton::kLeaf) continue;
          if (n1 == Automaton::kLeaf) {
            Word c(1, letter_char(x));
            for (auto p = cur; parent[p].second >= 0; p = parent[p].first)
              c.insert(c.begin(), letter_char(parent[p].second));
            v.kind = StabilityVerdict::Kind::Unstable;
            v.witness_context = c;
            v.witness_letter = letter_char(alpha);
            v.exact = true;
            return v;
          }
          auto nxt = std::make_pair(n1, n2);
          if (parent.count(nxt)) continue;
          parent[nxt] = {cur, x};
          queue.push_back(nxt);
        }
      }
    }
    v.kind = StabilityVerdict::Kind::Stable;
    v.exact = true;
    return v;
  }
  for (const Word& c : tree.contexts(probe_depth)) {
    for (char alpha : {'0', '1'}) {
      Word ac = alpha + c;
      if (tree.is_internal(ac)) {
        v.kind = StabilityVerdict::Kind::Unstable;
        v.witness_context = c;
        v.witness_letter = alpha;
        v.exact = true;
        return v;
      }
    }
  }
  v.kind = StabilityVerdict::Kind::Inconclusive;
  return v;
}

std::optional<std::size_t> stable_alis_count(const ContextTree& tree) {
  const Automaton* a = tree.automaton();
  if (!a || is_stable(tree, 0).kind != StabilityVerdict::Kind::Stable) return std::nullopt;
  // pairs (state of alpha.s, state of s) while both are internal
  std::map<std::pair<int, int>, std::size_t> id;
  std::vector<std::array<std::size_t, 2>> next;
  std::vector<std::size_t> emit;
  constexpr std::size_t kNone = npos;
  std::size_t total_direct = 0;
  std::deque<std::pair<int, int>> queue;
  auto intern = [&](std::pair<int, int> p) {
    auto [it, fresh] = id.emplace(p, next.size());
    if (fresh) {
      next.push_back({kNone, kNone});
      emit.push_back(0);
      queue.push_back(p);
    }
    return it->second;
  };
  std::vector<std::size_t> starts;
  for (int alpha = 0; alpha < 2; ++alpha) {
    int s = a->next[0][alpha];
    if (s == Automaton::kLeaf)
      ++total_direct;  // the one-letter context alpha, shift empty
    else
      starts.push_back(intern({s, 0}));
  }
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    const std::size_t k = id.at(cur);
    for (int x = 0; x < 2; ++x) {
      int n1 = a->next[cur.first][x];
      int n2 = a->next[cur.second][x];
      if (n2 == Automaton::kLeaf) continue;
      if (n1 == Automaton::kLeaf) {
        ++emit[k];
        continue;
      }
      const std::size_t t = intern({n1, n2});
      next[k][x] = t;
    }
  }
  const std::size_t n = next.size();
  // productive: reaches an emission
  std::vector<char> productive(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (productive[k]) continue;
      bool p = emit[k] > 0;
      for (std::size_t t : next[k]) p = p || (t != kNone && productive[t]);
      if (p) productive[k] = changed = true;
    }
  }
  // path count on the productive subgraph; a cycle there means infinitely many
  std::vector<int> color(n, 0);
  std::vector<std::size_t> count(n, 0);
  bool cyclic = false;
  std::function<void(std::size_t)> visit = [&](std::size_t k) {
    color[k] = 1;
    std::size_t c = emit[k];
    for (std::size_t t : next[k]) {
      if (t == kNone || !productive[t]) continue;
      if (color[t] == 1) {
        cyclic = true;
        continue;
      }
      if (color[t] == 0) visit(t);
      c += count[t];
    }
    count[k] = c;
    color[k] = 2;
  };
  std::size_t total = total_direct;
  for (std::size_t s : starts) {
    if (!productive[s]) continue;
    if (color[s] == 0) visit(s);
    total += count[s];
  }
  if (cyclic) return std::nullopt;
  return total;
}

bool shift_closed_up_to(const ContextTree& tree, std::size_t depth) {
  for (const Word& w : nodes_up_to(tree, depth)) {
    if (w.empty()) continue;
    if (tree.classify(shift(w)) == NodeClass::ExternalStrict) return false;
  }
  return true;
}

ContextTree stabilize(const ContextTree& tree, std::size_t depth_budget, std::size_t max_states) {
  const Automaton* a = tree.automaton();
  if (!a)
    throw BudgetExceeded("stabilization needs a finite-state description of the tree");
  // states reachable from the root
  std::vector<char> seen(a->next.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : a->next[s])
      if (t >= 0 && !seen[t]) { seen[t] = 1; stack.push_back(t); }
  }
  std::vector<int> start;
  for (int s = 0; s < static_cast<int>(seen.size()); ++s)
    if (seen[s]) start.push_back(s);

  // subset construction: a node w of the closure carries the set of tree
  // states reachable by reading w from some internal node
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> subsets;
  std::vector<std::size_t> level;
  Automaton out;
  index[start] = 0;
  subsets.push_back(start);
  level.push_back(0);
  out.next.push_back({Automaton::kLeaf, Automaton::kLeaf});
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    for (int x = 0; x < 2; ++x) {
      std::vector<int> nxt;
      bool leaf = false;
      for (int s : subsets[i]) {
        int t = a->next[s][x];
        if (t == Automaton::kLeaf) leaf = true;
        else nxt.push_back(t);
      }
      std::sort(nxt.begin(), nxt.end());
      nxt.erase(std::unique(nxt.begin(), nxt.end()), nxt.end());
      if (nxt.empty()) {
        if (!leaf) throw InvalidTree("stabilization reached a non-node; input tree is not saturated");
        out.next[i][x] = Automaton::kLeaf;
        continue;
      }
      auto it = index.find(nxt);
      if (it == index.end()) {
        if (level[i] + 1 > depth_budget || subsets.size() >= max_states)
          throw BudgetExceeded("stabilization did not close within the depth budget");
        int id = static_cast<int>(subsets.size());
        index.emplace(nxt, id);
        subsets.push_back(nxt);
        level.push_back(level[i] + 1);
        out.next.push_back({Automaton::kLeaf, Automaton::kLeaf});
        out.next[i][x] = id;
      } else {
        out.next[i][x] = it->second;
      }
    }
  }
  return ContextTree::from_automaton(std::move(out));
}

}  // namespace vlmc
