#include "vlmc/alis_system.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>

#include "vlmc/numeric.hpp"

namespace vlmc {

std::size_t AlisIndex::find(std::string_view w) const {
  auto it = pos_.find(w);
  return it == pos_.end() ? npos : it->second;
}

AlisIndex make_alis_index(std::vector<Word> entries, std::size_t truncation, bool complete) {
  std::sort(entries.begin(), entries.end(), [](const Word& a, const Word& b) { return length_lex_less(a, b); });
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  AlisIndex idx;
  idx.entries = std::move(entries);
  idx.truncation = truncation;
  idx.complete = complete;
  for (std::size_t i = 0; i < idx.entries.size(); ++i) idx.pos_.emplace(idx.entries[i], i);
  return idx;
}

AlisIndex alis_set(const ProbabilisedTree& pt, const CascadeTable& table) {
  std::vector<Word> entries;
  entries.reserve(table.by_alis.size());
  for (const auto& [a, _] : table.by_alis) entries.push_back(a);
  bool complete = table.exhaustive;
  AlisIndex idx = make_alis_index(std::move(entries), table.max_len, false);
  if (!complete && pt.family() && pt.family()->finite_alis) {
    auto closed = make_alis_index(*pt.family()->finite_alis, table.max_len, true);
    complete = closed.entries == idx.entries;
  }
  if (!complete) {
    // alpha-lis of a stable tree are contexts, so all of them show up once
    // max_len reaches their length
    auto n = stable_alis_count(pt.tree());
    complete = n && *n == idx.size();
  }
  idx.complete = complete;
  return idx;
}

AlisIndex alis_set(const ProbabilisedTree& pt, std::size_t max_len) {
  return alis_set(pt, build_cascade_table(pt, max_len));
}

double QMatrix::row_sum(std::size_t i) const {
  CompensatedSum s;
  for (std::size_t j = 0; j < n(); ++j) s += (*this)(i, j);
  return s.value();
}

bool QMatrix::converged() const {
  if (kappa.size() != n()) return false;
  return std::all_of(kappa.begin(), kappa.end(), [](const KappaSum& k) { return k.status == KappaStatus::Converged; });
}

QMatrix build_Q(const ProbabilisedTree& pt, const CascadeTable& table, const QOptions& opt) {
  QMatrix q;
  q.index = alis_set(pt, table);
  q.stable = is_stable_tree(pt);
  const std::size_t n = q.n();
  q.kappa.resize(n);
  parallel_for(n, [&](std::size_t r) { q.kappa[r] = kappa_from_table(table, q.index.entries[r], opt.kappa); });
  if (opt.throw_on_divergence)
    for (const KappaSum& k : q.kappa)
      if (k.status == KappaStatus::Diverged)
        throw CascadeDiverged("cascade series of '" + k.alis + "' diverges (partial sum " +
                              std::to_string(k.partial) + ")");

  q.entries.assign(n * n, 0.0);
  q.row_tail.assign(n, 0.0);
  parallel_for(n, [&](std::size_t r) {
    std::vector<CompensatedSum> row(n);
    std::vector<bool> touched(n, false);
    for (std::size_t i : table.by_alis.at(q.index.entries[r])) {
      const Word& c = table.contexts[i];
      for (char beta : {'0', '1'}) {
        double w = table.casc[i] * (beta == '0' ? table.q0[i] : 1.0 - table.q0[i]);
        Word key(1, beta);
        for (std::size_t len = 0; len < c.size(); ++len) {
          if (len > 0) key.push_back(c[len - 1]);
          std::size_t j = q.index.find(key);
          if (j == npos) continue;
          row[j] += w;
          touched[j] = true;
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j)
      if (touched[j]) q.entries[r * n + j] = row[j].value();
    const KappaSum& k = q.kappa[r];
    if (table.exhaustive)
      q.row_tail[r] = 0.0;
    else if (q.stable)
      q.row_tail[r] = k.frontier;
    else
      q.row_tail[r] = k.tail_bound * static_cast<double>(n);
  });
  return q;
}

QMatrix build_Q(const ProbabilisedTree& pt, std::size_t max_len, const QOptions& opt) {
  return build_Q(pt, build_cascade_table(pt, max_len), opt);
}

QMatrix q_from_dense(std::vector<Word> labels, const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  if (labels.size() != n) throw BadParams("label count does not match the matrix size");
  QMatrix q;
  // keep the caller's order: the index map is built directly
  std::vector<Word> sorted = labels;
  q.index = make_alis_index(sorted, 0, true);
  if (q.index.entries != labels) throw BadParams("labels must be distinct and in (length, lex) order");
  q.entries.assign(n * n, 0.0);
  q.row_tail.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw BadParams("matrix is not square");
    for (std::size_t j = 0; j < n; ++j) q.at(i, j) = rows[i][j];
  }
  return q;
}

bool is_irreducible(const QMatrix& q) {
  const std::size_t n = q.n();
  if (n == 0) return false;
  auto reach = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> todo{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!todo.empty()) {
      std::size_t i = todo.front();
      todo.pop_front();
      for (std::size_t j = 0; j < n; ++j) {
        double e = forward ? q(i, j) : q(j, i);
        if (e > 0.0 && !seen[j]) {
          seen[j] = true;
          ++count;
          todo.push_back(j);
        }
      }
    }
    return count == n;
  };
  return reach(true) && reach(false);
}

const char* to_string(FixedVectorResult::Kind k) {
  switch (k) {
    case FixedVectorResult::Kind::Unique: return "unique";
    case FixedVectorResult::Kind::NoneFound: return "none_found";
    case FixedVectorResult::Kind::NotUniqueEvidence: return "not_unique";
  }
  return "?";
}

double fixed_residual(const QMatrix& q, const std::vector<double>& v) {
  const std::size_t n = q.n();
  double r = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i < n; ++i) s += v[i] * q(i, j);
    r = std::max(r, std::fabs(s.value() - v[j]));
  }
  return r;
}

namespace {

void normalize(const QMatrix& q, FixedVector& fv) {
  CompensatedSum s;
  for (double x : fv.values) s += x;
  for (double& x : fv.values) x /= s.value();
  fv.normalization = Normalization::UnitSum;
  if (q.converged() && !q.kappa.empty()) {
    CompensatedSum w;
    for (std::size_t i = 0; i < fv.values.size(); ++i) w += fv.values[i] * q.kappa[i].partial;
    for (double& x : fv.values) x /= w.value();
    fv.normalization = Normalization::KappaWeighted;
  }
  fv.residual = fixed_residual(q, fv.values);
}

}  // namespace

FixedVectorResult left_fixed_vector(const QMatrix& q, const FixedVectorOptions& opt) {
  const std::size_t n = q.n();
  FixedVectorResult res;
  if (n == 0) return res;
  if (n <= opt.direct_limit) {
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(j, i) = q(i, j) - (i == j ? 1.0 : 0.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(1.0, sv(0));
    for (Eigen::Index k = sv.size(); k-- > 0;) res.singular_values.push_back(sv(k));
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) <= opt.rank_tol * scale) ++res.nullity;
    if (res.nullity == 0) return res;
    if (res.nullity > 1) {
      res.kind = FixedVectorResult::Kind::NotUniqueEvidence;
      return res;
    }
    Eigen::VectorXd x = svd.matrixV().col(static_cast<Eigen::Index>(n) - 1);
    if (x.sum() < 0) x = -x;
    const double amax = x.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (x(k) < -opt.rank_tol * amax) return res;  // no nonnegative fixed vector
      if (x(k) < 0) x(k) = 0.0;
    }
    res.vector.values.assign(x.data(), x.data() + n);
    normalize(q, res.vector);
    res.kind = FixedVectorResult::Kind::Unique;
    return res;
  }
  // lazy power iteration v <- (v + vQ / |vQ|) / 2
  std::vector<double> v(n, 1.0 / static_cast<double>(n)), w(n);
  double lambda = 0.0;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (v[i] != 0.0)
        for (std::size_t j = 0; j < n; ++j) w[j] += v[i] * q(i, j);
    lambda = 0.0;
    for (double x : w) lambda += x;
    if (!(lambda > 0.0)) return res;
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double nv = 0.5 * (v[j] + w[j] / lambda);
      diff = std::max(diff, std::fabs(nv - v[j]));
      v[j] = nv;
    }
    if (diff <= opt.tol) {
      res.iterations = it;
      if (std::fabs(lambda - 1.0) > opt.rank_tol) return res;
      res.nullity = 1;
      res.vector.values = v;
      normalize(q, res.vector);
      res.kind = FixedVectorResult::Kind::Unique;
      return res;
    }
  }
  throw DidNotConverge("power iteration did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

const char* to_string(RecurrenceReport::Kind k) {
  switch (k) {
    case RecurrenceReport::Kind::RecurrentEvidence: return "recurrent_evidence";
    case RecurrenceReport::Kind::TransientEvidence: return "transient_evidence";
    case RecurrenceReport::Kind::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

/// Probability of returning to 0 while staying inside the states < n.
double truncated_return(const std::function<double(std::size_t, std::size_t)>& a, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return a(0, 0);
  const Eigen::Index m = static_cast<Eigen::Index>(n - 1);
  Eigen::MatrixXd lhs(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    rhs(i) = a(static_cast<std::size_t>(i) + 1, 0);
    for (Eigen::Index j = 0; j < m; ++j)
      lhs(i, j) = (i == j ? 1.0 : 0.0) - a(static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1);
  }
  Eigen::VectorXd h = lhs.partialPivLu().solve(rhs);
  CompensatedSum s;
  s += a(0, 0);
  for (Eigen::Index j = 0; j < m; ++j) s += a(0, static_cast<std::size_t>(j) + 1) * std::clamp(h(j), 0.0, 1.0);
  return std::clamp(s.value(), 0.0, 1.0);
}

RecurrenceReport conclude(RecurrenceReport r, const RecurrenceOptions& opt) {
  double esc = -1.0, ret = 0.0;
  for (const auto& l : r.levels) {
    esc = std::max(esc, l.escape_lower);
    ret = std::max(ret, l.return_lower);
  }
  if (esc > 0.0) {
    r.kind = RecurrenceReport::Kind::TransientEvidence;
    r.prob_lower = esc;
  } else if (ret >= opt.recurrent_threshold) {
    r.kind = RecurrenceReport::Kind::RecurrentEvidence;
    r.prob_lower = ret;
  } else {
    r.kind = RecurrenceReport::Kind::Inconclusive;
    r.prob_lower = ret;
  }
  return r;
}

}  // namespace

RecurrenceReport recurrence_bounds(const CountableMatrix& a, const std::vector<std::size_t>& levels,
                                   const RecurrenceOptions& opt) {
  RecurrenceReport r;
  for (std::size_t n : levels) {
    RecurrenceLevel l;
    l.level = n;
    l.return_lower = truncated_return(a.entry, n);
    if (a.defect_tail) {
      double prod = 1.0;
      for (std::size_t i = 0; i < n; ++i) prod *= a.entry(i, i + 1);
      l.escape_lower = prod * std::max(0.0, 1.0 - a.defect_tail(n));
    }
    r.levels.push_back(l);
  }
  return conclude(std::move(r), opt);
}

RecurrenceReport recurrence_bounds(const ProbabilisedTree& pt, const std::vector<std::size_t>& levels,
                                   const RecurrenceOptions& opt) {
  if (!is_stable_tree(pt)) throw TreeNotStable("recurrence bounds need a stable tree");
  RecurrenceReport r;
  for (std::size_t n : levels) {
    QMatrix q = build_Q(pt, n);
    RecurrenceLevel l;
    l.level = n;
    if (q.index.complete && is_irreducible(q)) {
      l.return_lower = 1.0;  // finite irreducible stochastic matrix
    } else {
      l.return_lower = truncated_return([&](std::size_t i, std::size_t j) { return q(i, j); }, q.n());
    }
    r.levels.push_back(l);
  }
  return conclude(std::move(r), opt);
}

double verify_realization(const ProbabilisedTree& pt, const std::vector<std::vector<double>>& a,
                          std::size_t max_len) {
  QMatrix q = build_Q(pt, max_len);
  const std::size_t n = a.size();
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t qi = q.index.find("1" + power("0", i) + "1");
    if (qi == npos) throw BadParams("alpha-lis 10^" + std::to_string(i) + "1 missing at this max_len");
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t qj = q.index.find("1" + power("0", j) + "1");
      if (qj == npos) throw BadParams("alpha-lis 10^" + std::to_string(j) + "1 missing at this max_len");
      dev = std::max(dev, std::fabs(q(qi, qj) - a[i][j]));
    }
  }
  return dev;
}

}  // namespace vlmc
