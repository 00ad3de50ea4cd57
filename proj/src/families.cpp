#include "vlmc/families.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "vlmc/numeric.hpp"

namespace vlmc {

namespace {

constexpr int L = Automaton::kLeaf;

Word rep(const char* u, std::size_t n) { return power(u, n); }

/// Number of leading copies of letter a in w.
std::size_t run(std::string_view w, char a, std::size_t from = 0) {
  std::size_t i = from;
  while (i < w.size() && w[i] == a) ++i;
  return i - from;
}

void sort_ll(std::vector<Word>& v) {
  std::sort(v.begin(), v.end(), [](const Word& a, const Word& b) { return length_lex_less(a, b); });
}

/// Contexts 0^m 1 0^k 1 (m >= 1, k < m), 0^m 1 0^m (m >= 1) and 1 0^m 1.
class SmallKappasShape final : public TreeShape {
 public:
  std::size_t lpref_len(std::string_view w) const override {
    const std::size_t m = run(w, '0');
    if (m == w.size()) return npos;
    if (m == 0) {
      const std::size_t j = run(w, '0', 1);
      return 1 + j < w.size() ? j + 2 : npos;
    }
    const std::size_t j = run(w, '0', m + 1);
    if (j >= m) return 2 * m + 1;
    return m + 1 + j < w.size() ? m + j + 2 : npos;
  }
};

/// Single infinite branch f = 01 0011 000111 ...; every word leaving f is a context.
class FilamentShape final : public TreeShape {
 public:
  static char letter(std::size_t i) {
    std::size_t k = 1;
    while (i >= 2 * k) {
      i -= 2 * k;
      ++k;
    }
    return i < k ? '0' : '1';
  }
  std::size_t lpref_len(std::string_view w) const override {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] != letter(i)) return i + 1;
    return npos;
  }
};

struct Builder {
  std::string description;
  bool stable;
  std::function<ContextTree(const json&)> tree;
  std::function<std::vector<Word>(std::size_t, const json&)> enumerate;
  std::function<std::optional<Word>(std::string_view, const json&)> alis;
  std::function<std::optional<std::vector<Word>>(const json&)> finite_alis;
};

ContextTree automaton(std::vector<std::array<int, 2>> next) { return ContextTree::from_automaton(Automaton{std::move(next)}); }

std::size_t depth_param(const json& p) {
  int d = p.value("depth", 2);
  if (d < 1 || d > 16) throw BadParams("complete tree depth must be in [1, 16]");
  return static_cast<std::size_t>(d);
}

// alpha-lis read off the closed-form tables; words are assumed to be contexts
const std::map<std::string, Builder>& builders() {
  static const std::map<std::string, Builder> b = [] {
    std::map<std::string, Builder> m;
    m["left_comb"] = {
        "contexts 0^p 1",
        true,
        [](const json&) { return automaton({{0, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t p = 0; p + 1 <= n; ++p) v.push_back(rep("0", p) + "1");
          return v;
        },
        [](std::string_view, const json&) -> std::optional<Word> { return Word("1"); },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"1"}; }};
    m["comb_of_left_combs"] = {
        "contexts 0^p 1 0^q 1",
        true,
        [](const json&) { return automaton({{0, 1}, {1, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t p = 0; p + 2 <= n; ++p)
            for (std::size_t q = 0; p + q + 2 <= n; ++q) v.push_back(rep("0", p) + "1" + rep("0", q) + "1");
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          std::size_t p = run(c, '0');
          return Word(c.substr(p));
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::nullopt; }};
    m["comb_of_right_combs"] = {
        "contexts 0^p 1^q 0, q >= 1",
        true,
        [](const json&) { return automaton({{0, 1}, {L, 1}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t p = 0; p + 2 <= n; ++p)
            for (std::size_t q = 1; p + q + 1 <= n; ++q) v.push_back(rep("0", p) + rep("1", q) + "0");
          return v;
        },
        [](std::string_view, const json&) -> std::optional<Word> { return Word("10"); },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"10"}; }};
    m["comb_of_right_combs_cherry"] = {
        "comb of right-combs with the context 10 split into 100 and 101",
        true,
        // R, A=0^p (p>=1), B=0^p1^q (p>=1), B0=1, X=10, B'=1^q (q>=2)
        [](const json&) { return automaton({{1, 3}, {1, 2}, {L, 2}, {4, 5}, {L, L}, {L, 5}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          if (n >= 3) v.insert(v.end(), {"100", "101"});
          for (std::size_t p = 1; p + 2 <= n; ++p)
            for (std::size_t q = 1; p + q + 1 <= n; ++q) v.push_back(rep("0", p) + rep("1", q) + "0");
          for (std::size_t q = 2; q + 1 <= n; ++q) v.push_back(rep("1", q) + "0");
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          if (c == "100" || c == "101") return Word(c);
          std::size_t p = run(c, '0');
          std::size_t q = run(c, '1', p);
          return Word(q == 1 ? "010" : "110");
        },
        [](const json&) -> std::optional<std::vector<Word>> {
          return std::vector<Word>{"100", "101", "010", "110"};
        }};
    m["bamboo_blossom"] = {
        "contexts (01)^n 00 and (01)^n 1",
        false,
        [](const json&) { return automaton({{1, L}, {L, 0}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t k = 0; 2 * k + 1 <= n; ++k) {
            v.push_back(rep("01", k) + "1");
            if (2 * k + 2 <= n) v.push_back(rep("01", k) + "00");
          }
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> { return Word(c.back() == '1' ? "1" : "00"); },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"1", "00"}; }};
    m["double_bamboo"] = {
        "contexts (01)^k 00, (01)^k 1 (k >= 1), (10)^k 0 (k >= 1), (10)^k 11",
        true,
        // R, A=0(10)^k, C=(01)^k, B=1(01)^k, D=(10)^k
        [](const json&) { return automaton({{1, 3}, {L, 2}, {1, L}, {4, L}, {L, 3}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t k = 0; 2 * k + 2 <= n; ++k) {
            v.push_back(rep("01", k) + "00");
            v.push_back(rep("10", k) + "11");
          }
          for (std::size_t k = 1; 2 * k + 1 <= n; ++k) {
            v.push_back(rep("01", k) + "1");
            v.push_back(rep("10", k) + "0");
          }
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> { return Word(c.back() == '0' ? "00" : "11"); },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"00", "11"}; }};
    m["brush"] = {
        "contexts 1 and 0 1^p 0^q 1, q >= 1",
        false,
        // R, X=01^p, Y=01^p0^q
        [](const json&) { return automaton({{1, L}, {2, 1}, {2, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v{"1"};
          for (std::size_t p = 0; p + 3 <= n; ++p)
            for (std::size_t q = 1; p + q + 2 <= n; ++q) v.push_back("0" + rep("1", p) + rep("0", q) + "1");
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          if (c == "1") return Word("1");
          std::size_t p = run(c, '1', 1);
          std::size_t q = run(c, '0', 1 + p);
          return Word(p >= 1 && q == 1 ? "101" : "001");
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"1", "001", "101"}; }};
    m["finite_alis_tree"] = {
        "contexts 1, 00 and 0 1^p 0^q 1, p, q >= 1",
        false,
        // R, A=0, X=01^p, Y=01^p0^q
        [](const json&) { return automaton({{1, L}, {L, 2}, {3, 2}, {3, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v{"1"};
          if (n >= 2) v.push_back("00");
          for (std::size_t p = 1; p + 3 <= n; ++p)
            for (std::size_t q = 1; p + q + 2 <= n; ++q) v.push_back("0" + rep("1", p) + rep("0", q) + "1");
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          if (c == "1" || c == "00") return Word(c);
          std::size_t p = run(c, '1', 1);
          std::size_t q = run(c, '0', 1 + p);
          return Word(q == 1 ? "101" : "001");
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::vector<Word>{"1", "00", "001", "101"}; }};
    m["finite_branch_tree"] = {
        "contexts 0^q 10, 0^q 11 (q >= 1) and 1 0^p 1",
        true,
        // R, A=0^q, C=0^q1, B=10^p
        [](const json&) { return automaton({{1, 3}, {1, 2}, {L, L}, {3, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t q = 1; q + 2 <= n; ++q) {
            v.push_back(rep("0", q) + "10");
            v.push_back(rep("0", q) + "11");
          }
          for (std::size_t p = 0; p + 2 <= n; ++p) v.push_back("1" + rep("0", p) + "1");
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          if (c[0] == '1') return Word(c);
          return Word(c.back() == '1' ? "11" : "010");
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::nullopt; }};
    m["small_kappas"] = {
        "contexts 0^m 1 0^k 1 (k < m), 0^m 1 0^m and 1 0^m 1",
        false,
        [](const json&) { return ContextTree(std::make_shared<SmallKappasShape>()); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t m = 0; m + 2 <= n; ++m) v.push_back("1" + rep("0", m) + "1");
          for (std::size_t m = 1; m + 2 <= n; ++m) {
            if (2 * m + 1 <= n) v.push_back(rep("0", m) + "1" + rep("0", m));
            for (std::size_t k = 0; k < m && m + k + 2 <= n; ++k) v.push_back(rep("0", m) + "1" + rep("0", k) + "1");
          }
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          std::size_t m = run(c, '0');
          std::size_t k = run(c, '0', m + 1);
          if (m + 1 + k == c.size()) return "0" + Word(c.substr(m));  // 0^m 1 0^m
          return Word(c.substr(m));
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::nullopt; }};
    m["bamboo_and_combs"] = {
        "contexts (01)^p 00, (01)^r 1 (r >= 2), 0 1^r 0 (r >= 2), 1^q 00, 1^q 01",
        false,
        // R, P=1^q, P0=1^q0, A0=0, U1=01, V=011^r, A1=(01)^k0, U2=(01)^k
        [](const json&) { return automaton({{3, 1}, {2, 1}, {L, L}, {L, 4}, {6, 5}, {L, 5}, {L, 7}, {6, L}}); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          for (std::size_t p = 0; 2 * p + 2 <= n; ++p) v.push_back(rep("01", p) + "00");
          for (std::size_t r = 2; 2 * r + 1 <= n; ++r) v.push_back(rep("01", r) + "1");
          for (std::size_t r = 2; r + 2 <= n; ++r) v.push_back("0" + rep("1", r) + "0");
          for (std::size_t q = 1; q + 2 <= n; ++q) {
            v.push_back(rep("1", q) + "00");
            v.push_back(rep("1", q) + "01");
          }
          return v;
        },
        [](std::string_view c, const json&) -> std::optional<Word> {
          if (c.size() >= 2 && c.substr(c.size() - 2) == "00") return Word("00");
          if (c[0] == '1') return Word("101");
          if (c.size() >= 3 && c[1] == '1' && c[2] == '1') return Word(c);
          return Word("1011");
        },
        [](const json&) -> std::optional<std::vector<Word>> { return std::nullopt; }};
    m["complete"] = {
        "all words of length d (parameter depth)",
        true,
        [](const json& p) { return ContextTree::from_contexts(all_words(depth_param(p))); },
        [](std::size_t n, const json& p) {
          std::size_t d = depth_param(p);
          return d <= n ? all_words(d) : std::vector<Word>{};
        },
        [](std::string_view c, const json&) -> std::optional<Word> { return Word(c); },
        [](const json& p) -> std::optional<std::vector<Word>> { return all_words(depth_param(p)); }};
    m["filament"] = {
        "one infinite branch 01 0011 000111 ...; every other node is a context",
        false,
        [](const json&) { return ContextTree(std::make_shared<FilamentShape>()); },
        [](std::size_t n, const json&) {
          std::vector<Word> v;
          Word f;
          for (std::size_t i = 0; i < n; ++i) {
            v.push_back(f + (FilamentShape::letter(i) == '0' ? '1' : '0'));
            f.push_back(FilamentShape::letter(i));
          }
          return v;
        },
        nullptr,
        [](const json&) -> std::optional<std::vector<Word>> { return std::nullopt; }};
    return m;
  }();
  return b;
}

constexpr std::size_t kCrossCheckLen = 14;

/// closed-form divergence of the double bamboo series, from the q values of
/// its four context classes up to max_len
std::optional<bool> double_bamboo_diverges(const ProbabilisedTree& pt, std::size_t max_len) {
  const std::size_t kmax = std::max<std::size_t>(2, max_len / 2);
  double sup_blossom = 0.0;  // q on (10)^k 0 and (10)^k 11: letter 0
  bool ones00 = true, ones01 = true;
  for (std::size_t k = 0; k < kmax; ++k) {
    sup_blossom = std::max(sup_blossom, pt.q0(rep("10", k) + "11"));
    if (k >= 1) {
      sup_blossom = std::max(sup_blossom, pt.q0(rep("10", k) + "0"));
      ones01 = ones01 && pt.q(rep("01", k) + "1", '1') == 1.0;
    }
    ones00 = ones00 && pt.q(rep("01", k) + "00", '1') == 1.0;
  }
  if (sup_blossom < 1.0) return false;
  bool all_one = true;
  for (std::size_t k = 0; k < kmax; ++k) {
    all_one = all_one && pt.q0(rep("10", k) + "11") == 1.0;
    if (k >= 1) all_one = all_one && pt.q0(rep("10", k) + "0") == 1.0;
  }
  if (all_one && (ones00 || ones01)) return true;
  return std::nullopt;
}

}  // namespace

const std::vector<FamilyEntry>& families() {
  static const std::vector<FamilyEntry> v = [] {
    std::vector<FamilyEntry> out;
    for (const char* n : {"left_comb", "comb_of_left_combs", "comb_of_right_combs", "comb_of_right_combs_cherry",
                          "bamboo_blossom", "double_bamboo", "brush", "finite_alis_tree", "finite_branch_tree",
                          "small_kappas", "bamboo_and_combs", "complete", "filament"}) {
      const Builder& b = builders().at(n);
      out.push_back({n, b.description, b.stable});
    }
    return out;
  }();
  return v;
}

ProbabilisedTree make_family(const std::string& name, const json& params) {
  auto it = builders().find(name);
  if (it == builders().end()) throw BadParams("unknown family '" + name + "'");
  if (!params.is_object()) throw BadParams("family parameters must be a JSON object");
  const Builder& b = it->second;
  ContextTree tree = b.tree(params);

  std::vector<Word> enumerated = b.enumerate(kCrossCheckLen, params);
  sort_ll(enumerated);
  if (enumerated != tree.contexts(kCrossCheckLen))
    throw InvalidTree("family '" + name + "': enumerator and classifier disagree");
  tree.spot_validate(20);

  auto info = std::make_shared<FamilyInfo>();
  info->name = name;
  info->description = b.description;
  info->params_json = params.dump();
  info->stable = b.stable;
  info->finite_alis = b.finite_alis(params);
  info->alis_finite = info->finite_alis.has_value();
  info->enumerate = [e = b.enumerate, params](std::size_t n) {
    auto v = e(n, params);
    sort_ll(v);
    return v;
  };
  if (b.alis)
    info->alis_table = [a = b.alis, params](std::string_view c) { return a(c, params); };
  if (name == "double_bamboo") info->kappa_diverges = double_bamboo_diverges;

  auto rule = params.contains("q") ? rule_from_json(params.at("q")) : std::make_shared<ConstantRule>(0.5);
  ProbabilisedTree pt(tree, rule, info);
  pt.min_probability(kCrossCheckLen);  // validates the q values
  return pt;
}

ProbabilisedTree realise_q_from_matrix(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0) throw BadParams("empty matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw BadParams("matrix is not square");
    CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(a[i][j] > 0.0))
        throw BadParams("non-positive entry a(" + std::to_string(i) + "," + std::to_string(j) + ")");
      s += a[i][j];
    }
    if (std::fabs(s.value() - 1.0) > 1e-12) throw BadParams("row " + std::to_string(i) + " is not stochastic");
  }
  // q_{0^i 1 0^j 1}(1) = a_ji / (1 - sum_{k<i} a_jk); the last column takes the rest
  std::vector<std::vector<double>> q1(n, std::vector<double>(n, 1.0));
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum used;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double denom = 1.0 - used.value();
      double x = a[j][i] / denom;
      if (!(x > 0.0 && x < 1.0))
        throw BadParams("derived probability out of range at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      q1[j][i] = x;
      used += a[j][i];
    }
  }
  auto rule = std::make_shared<FunctionRule>([q1, n](std::string_view c) {
    std::size_t i = run(c, '0');
    std::size_t j = run(c, '0', i + 1);
    if (i >= n || j >= n) return 0.0;
    return 1.0 - q1[j][i];
  });
  auto info = std::make_shared<FamilyInfo>();
  info->name = "comb_of_left_combs";
  info->description = "comb of left-combs realising a given matrix";
  info->stable = true;
  info->alis_finite = false;
  return ProbabilisedTree(make_family("comb_of_left_combs").tree(), rule, info);
}

namespace {

// 16-point Gauss-Legendre nodes and weights on [-1, 1]
constexpr double kGLx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
                            0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr double kGLw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
                            0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

struct SValue {
  double s, ds;  // S(e^L) and dS/dL
};

SValue s_eval(double L) {
  const std::size_t q0 = static_cast<std::size_t>(std::max(1000.0, 20.0 * std::sqrt(std::fabs(L))));
  CompensatedSum s, ds;
  for (std::size_t q = 0; q < q0; ++q) {
    double e = std::exp(L / double(q + 1)) * InfiniteMeasureComb::v(q);
    s += e;
    ds += e / double(q + 1);
  }
  // tail: integral over y = 1/(q+1) in [0, y0] of e^{Ly}/(1+y), plus f/2 - f'/12 at q0
  const double y0 = 1.0 / double(q0 + 1);
  double integral = 0.0, dintegral = 0.0;
  for (int k = 0; k < 8; ++k)
    for (int sgn : {-1, 1}) {
      double y = 0.5 * y0 * (1.0 + sgn * kGLx[k]);
      double f = std::exp(L * y) / (1.0 + y);
      integral += kGLw[k] * f;
      dintegral += kGLw[k] * f * y;
    }
  integral *= 0.5 * y0;
  dintegral *= 0.5 * y0;
  const double qq = double(q0);
  const double v = InfiniteMeasureComb::v(q0);
  const double e = std::exp(L / (qq + 1.0));
  const double dv = -1.0 / ((qq + 1) * (qq + 1)) + 1.0 / ((qq + 2) * (qq + 2));
  const double f = v * e;
  const double fp = e * (dv - v * L / ((qq + 1) * (qq + 1)));
  s += integral;
  s += 0.5 * f;
  s += -fp / 12.0;
  ds += dintegral + 0.5 * f / (qq + 1.0);
  return {s.value(), ds.value()};
}

double solve_log_x(double target, double hint) {
  // S is increasing in L; bracket [lo, hi] with S(lo) < target <= S(hi) = S(0) = 1
  double hi = 0.0;
  double lo = std::min(hint, -1.0);
  while (s_eval(lo).s >= target) lo *= 2.0;
  double x = std::clamp(hint, lo, hi);
  for (int it = 0; it < 200; ++it) {
    SValue sv = s_eval(x);
    double g = sv.s - target;
    if (g > 0) hi = x; else lo = x;
    double nx = x - g / sv.ds;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::fabs(nx - x) <= 1e-15 * std::max(1.0, std::fabs(x)) || hi - lo <= 1e-15 * std::max(1.0, std::fabs(lo)))
      return nx;
    x = nx;
  }
  return x;
}

}  // namespace

double InfiniteMeasureComb::S_log(double L) {
  if (L > 0) throw BadParams("S is evaluated on (0, 1] only");
  return s_eval(L).s;
}

InfiniteMeasureComb::InfiniteMeasureComb(std::size_t p_max) : log_x_(p_max + 1, 0.0) {
  // S(1) = 1 = R_0 exactly
  parallel_for(p_max, [&](std::size_t i) {
    const std::size_t p = i + 1;
    // S(e^L) ~ 1/|L| for large |L|: start near -(p+1)
    log_x_[p] = solve_log_x(R(p), -double(p + 1));
  });
}

double InfiniteMeasureComb::log_x(std::size_t p) const {
  if (p >= log_x_.size()) throw BadParams("p beyond the solved range");
  return log_x_[p];
}

double InfiniteMeasureComb::c(std::size_t q, std::size_t p) const { return std::exp(log_x(p) / double(q + 1)); }

ProbabilisedTree InfiniteMeasureComb::tree() const {
  auto lx = log_x_;
  auto rule = std::make_shared<FunctionRule>([lx](std::string_view w) {
    std::size_t p = run(w, '0');
    std::size_t q = run(w, '0', p + 1);
    if (p + 1 >= lx.size()) return 0.5;
    // c_{q,p+1} / c_{q,p}
    return std::exp((lx[p + 1] - lx[p]) / double(q + 1));
  });
  auto info = std::make_shared<FamilyInfo>();
  info->name = "comb_of_left_combs";
  info->description = "comb of left-combs with a summable left-fixed vector and no stationary probability";
  info->stable = true;
  info->alis_finite = false;
  return ProbabilisedTree(make_family("comb_of_left_combs").tree(), rule, info);
}

}  // namespace vlmc
