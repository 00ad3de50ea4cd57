#include "vlmc/cascade.hpp"

#include <algorithm>
#include <cmath>

#include "vlmc/numeric.hpp"

namespace vlmc {

AlisDecomposition alpha_lis(const ContextTree& tree, std::string_view w) {
  check_binary(w);
  if (w.empty()) throw EmptyWord("alpha_lis of the empty word");
  for (std::size_t k = 1; k <= w.size(); ++k) {
    if (tree.is_internal(w.substr(k))) {
      AlisDecomposition d;
      d.head = Word(w.substr(0, k - 1));
      d.alpha = w[k - 1];
      d.lis = Word(w.substr(k));
      d.p = k - 1;
      return d;
    }
  }
  throw InvalidTree("the root of the tree is not internal");
}

CascadeDetail cascade_detail(const ProbabilisedTree& pt, std::string_view w) {
  check_binary(w);
  CascadeDetail out;
  if (w.empty()) return out;
  const ContextTree& tree = pt.tree();
  for (std::size_t k = 1; k <= w.size(); ++k) {
    std::string_view suffix = w.substr(k);
    std::size_t l = tree.lpref_len(suffix);
    if (l == npos) {
      out.decomposition.head = Word(w.substr(0, k - 1));
      out.decomposition.alpha = w[k - 1];
      out.decomposition.lis = Word(suffix);
      out.decomposition.p = k - 1;
      return out;
    }
    Word ctx(suffix.substr(0, l));
    out.value *= pt.q(ctx, w[k - 1]);
    out.factors.push_back({std::move(ctx), w[k - 1]});
  }
  throw InvalidTree("the root of the tree is not internal");
}

double cascade(const ProbabilisedTree& pt, std::string_view w) {
  check_binary(w);
  if (w.empty()) return 1.0;
  const ContextTree& tree = pt.tree();
  double value = 1.0;
  for (std::size_t k = 1; k <= w.size(); ++k) {
    std::string_view suffix = w.substr(k);
    std::size_t l = tree.lpref_len(suffix);
    if (l == npos) return value;
    value *= pt.q(suffix.substr(0, l), w[k - 1]);
  }
  return value;
}

std::vector<std::size_t> CascadeTable::with_prefix(std::string_view u) const {
  auto lo = std::lower_bound(lex_order.begin(), lex_order.end(), u,
                             [&](std::size_t i, std::string_view key) { return std::string_view(contexts[i]) < key; });
  std::vector<std::size_t> out;
  for (auto it = lo; it != lex_order.end() && is_prefix(u, contexts[*it]); ++it) out.push_back(*it);
  return out;
}

CascadeTable build_cascade_table(const ProbabilisedTree& pt, std::size_t max_len) {
  CascadeTable t;
  t.max_len = max_len;
  t.contexts = pt.tree().contexts(max_len);
  const std::size_t n = t.contexts.size();
  t.alis.resize(n);
  t.casc.resize(n);
  t.q0.resize(n);
  parallel_for(n, [&](std::size_t i) {
    CascadeDetail d = cascade_detail(pt, t.contexts[i]);
    t.alis[i] = d.decomposition.alis();
    t.casc[i] = d.value;
    t.q0[i] = pt.q0(t.contexts[i]);
  });
  for (std::size_t i = 0; i < n; ++i) t.by_alis[t.alis[i]].push_back(i);
  t.lex_order.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.lex_order[i] = i;
  std::sort(t.lex_order.begin(), t.lex_order.end(),
            [&](std::size_t a, std::size_t b) { return t.contexts[a] < t.contexts[b]; });
  auto h = pt.tree().height();
  t.exhaustive = h && *h <= max_len;
  return t;
}

const char* to_string(KappaStatus s) {
  switch (s) {
    case KappaStatus::Converged: return "converged";
    case KappaStatus::Diverged: return "diverged";
    case KappaStatus::Truncated: return "truncated";
  }
  return "?";
}

KappaSum kappa_from_table(const CascadeTable& table, const Word& alis, const KappaOptions& opt) {
  auto it = table.by_alis.find(alis);
  if (it == table.by_alis.end())
    throw NotAnAlis("'" + alis + "' is not the alpha-lis of a context of length <= " +
                    std::to_string(table.max_len));
  KappaSum k;
  k.alis = alis;
  k.level_mass.assign(table.max_len + 1, 0.0);
  std::vector<CompensatedSum> levels(table.max_len + 1);
  CompensatedSum total;
  for (std::size_t i : it->second) {
    total += table.casc[i];
    levels[table.contexts[i].size()] += table.casc[i];
  }
  for (std::size_t l = 0; l <= table.max_len; ++l) k.level_mass[l] = levels[l].value();
  k.partial = total.value();
  k.n_terms = it->second.size();
  k.frontier = k.level_mass[table.max_len];
  if (table.exhaustive) {
    k.tail_bound = 0.0;
    k.status = KappaStatus::Converged;
    return k;
  }
  const std::size_t b = std::max<std::size_t>(opt.block, 1);
  const std::size_t n_blocks = (table.max_len + 1) / b;
  // block j covers lengths (max_len - (j+1) b, max_len - j b]
  auto block = [&](std::size_t j) {
    CompensatedSum s;
    for (std::size_t r = 0; r < b; ++r) s += k.level_mass[table.max_len - j * b - r];
    return s.value();
  };
  if (n_blocks < 3) return k;
  double b0 = block(0), b1 = block(1), b2 = block(2);
  if (b0 == 0.0 && b1 == 0.0) {
    k.tail_bound = 0.0;
  } else if (b1 > 0.0 && b0 < b1) {
    double rho = b0 / b1;
    k.tail_bound = b0 * rho / (1.0 - rho);
  }
  bool nondecreasing = b0 > 0.0 && b0 >= b1 * (1.0 - 1e-9) && b1 >= b2 * (1.0 - 1e-9);
  if (nondecreasing && k.partial >= opt.explosion) {
    k.status = KappaStatus::Diverged;
    k.tail_bound = std::numeric_limits<double>::infinity();
  } else if (k.tail_bound <= opt.tol)
    k.status = KappaStatus::Converged;
  return k;
}

KappaSum kappa(const ProbabilisedTree& pt, const Word& alis, std::size_t max_len, const KappaOptions& opt) {
  return kappa_from_table(build_cascade_table(pt, max_len), alis, opt);
}

std::vector<Word> DescentTree::truncated_leaves() const {
  std::vector<Word> out = daughters;
  for (const Word& w : nodes)
    if (w.size() == root.size() + depth) out.push_back(w);
  return out;
}

DescentTree descent_tree(const ProbabilisedTree& pt, const Word& alis, std::size_t depth) {
  if (!is_stable_tree(pt)) throw TreeNotStable("descent trees need a stable tree");
  const ContextTree& tree = pt.tree();
  if (alis.empty() || !tree.is_context(alis) || alpha_lis(tree, alis).alis() != alis)
    throw NotAnAlis("'" + alis + "' is not a context equal to its own alpha-lis");
  DescentTree d;
  d.root = alis;
  d.depth = depth;
  d.nodes.push_back(alis);
  d.node_casc.push_back(1.0);
  std::vector<std::size_t> level{0};
  for (std::size_t n = 0; n < depth; ++n) {
    std::vector<std::size_t> nxt;
    for (std::size_t i : level) {
      for (char b : {'0', '1'}) {
        const Word c = d.nodes[i];
        Word w = b + c;
        double cw = pt.q(c, b) * d.node_casc[i];
        switch (tree.classify(w)) {
          case NodeClass::FiniteContext:
            nxt.push_back(d.nodes.size());
            d.nodes.push_back(std::move(w));
            d.node_casc.push_back(cw);
            break;
          case NodeClass::ExternalStrict:
            d.daughters.push_back(std::move(w));
            d.daughter_casc.push_back(cw);
            break;
          case NodeClass::Internal:
            throw TreeNotStable("'" + w + "' is internal although '" + c + "' is a context");
        }
      }
    }
    level.swap(nxt);
  }
  return d;
}

}  // namespace vlmc
