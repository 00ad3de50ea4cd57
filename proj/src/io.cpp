#include "vlmc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "vlmc/families.hpp"

namespace vlmc {

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw BadParams(std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number(j, key);
}

}  // namespace

std::shared_ptr<const QRule> rule_from_json(const json& j) {
  if (j.is_number()) return std::make_shared<ConstantRule>(j.get<double>());
  if (!j.is_object() || !j.contains("kind")) throw BadParams("q rule needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return std::make_shared<ConstantRule>(number(j, "q0"));
  if (kind == "table") {
    std::map<Word, double> t;
    for (const auto& [k, v] : j.at("values").items()) {
      check_binary(k);
      t.emplace(k, v.get<double>());
    }
    return std::make_shared<TableRule>(std::move(t), optional_number(j, "fallback"));
  }
  if (kind == "random")
    return std::make_shared<RandomRule>(j.at("seed").get<std::uint64_t>(), number(j, "lo"), number(j, "hi"));
  if (kind == "patterns") {
    std::vector<PatternRule::Pattern> ps;
    for (const json& r : j.at("rules")) {
      PatternRule::Pattern p;
      p.match = r.at("match").get<std::string>();
      if (r.contains("geometric")) {
        const std::string g = r.at("geometric").get<std::string>();
        if (g == "q0")
          p.kind = PatternRule::Pattern::Kind::GeometricQ0;
        else if (g == "q1")
          p.kind = PatternRule::Pattern::Kind::GeometricQ1;
        else
          throw BadParams("geometric target must be q0 or q1");
        p.scale = number(r, "scale");
        p.ratio = number(r, "ratio");
        p.group = r.value("group", 1);
      } else {
        p.value = number(r, "q0");
      }
      ps.push_back(std::move(p));
    }
    return std::make_shared<PatternRule>(std::move(ps), optional_number(j, "fallback"));
  }
  throw BadParams("unknown q rule kind '" + kind + "'");
}

json rule_to_json(const QRule& rule) {
  if (auto* r = dynamic_cast<const ConstantRule*>(&rule)) return {{"kind", "constant"}, {"q0", r->value()}};
  if (auto* r = dynamic_cast<const TableRule*>(&rule)) {
    json v = json::object();
    for (const auto& [k, x] : r->table()) v[k] = x;
    json out = {{"kind", "table"}, {"values", v}};
    if (r->fallback()) out["fallback"] = *r->fallback();
    return out;
  }
  if (auto* r = dynamic_cast<const RandomRule*>(&rule))
    return {{"kind", "random"}, {"seed", r->seed()}, {"lo", r->lo()}, {"hi", r->hi()}};
  if (auto* r = dynamic_cast<const PatternRule*>(&rule)) {
    json rules = json::array();
    for (const auto& p : r->patterns()) {
      json e = {{"match", p.match}};
      if (p.kind == PatternRule::Pattern::Kind::Fixed) {
        e["q0"] = p.value;
      } else {
        e["geometric"] = p.kind == PatternRule::Pattern::Kind::GeometricQ0 ? "q0" : "q1";
        e["scale"] = p.scale;
        e["ratio"] = p.ratio;
        e["group"] = p.group;
      }
      rules.push_back(e);
    }
    json out = {{"kind", "patterns"}, {"rules", rules}};
    if (r->fallback()) out["fallback"] = *r->fallback();
    return out;
  }
  throw BadParams("this q rule has no JSON form");
}

ProbabilisedTree tree_from_json(const json& j) {
  if (!j.is_object()) throw BadParams("tree file must hold a JSON object");
  if (j.value("version", 1) != 1) throw BadParams("unsupported tree file version");
  if (!j.contains("source")) throw BadParams("tree file needs a 'source'");
  const json& src = j.at("source");
  const std::string kind = src.at("kind").get<std::string>();
  if (kind == "family") {
    json params = src.value("params", json::object());
    if (j.contains("q")) params["q"] = j.at("q");
    return make_family(src.at("name").get<std::string>(), params);
  }
  if (kind == "explicit") {
    std::vector<Word> cs = src.at("contexts").get<std::vector<Word>>();
    auto tree = ContextTree::from_contexts(cs);
    auto rule = j.contains("q") ? rule_from_json(j.at("q")) : std::make_shared<ConstantRule>(0.5);
    ProbabilisedTree pt(tree, rule);
    pt.min_probability(*tree.height());  // validates every q value
    return pt;
  }
  if (kind == "stabilized") {
    if (j.contains("q")) throw BadParams("a stabilized tree takes q from the tree it stabilizes");
    const std::size_t depth = src.value("depth_budget", std::size_t{64});
    return stabilize(tree_from_json(src.at("tree")), depth);
  }
  throw BadParams("unknown source kind '" + kind + "'");
}

json tree_to_json(const ProbabilisedTree& pt, std::size_t table_len) {
  json out = {{"version", 1}};
  if (pt.family()) {
    out["source"] = {{"kind", "family"}, {"name", pt.family()->name}, {"params", json::parse(pt.family()->params_json)}};
    out["source"]["params"].erase("q");
  } else {
    auto h = pt.tree().height();
    if (!h) throw BadParams("infinite tree without a family cannot be exported");
    out["source"] = {{"kind", "explicit"}, {"contexts", pt.tree().contexts(*h)}};
    table_len = std::max(table_len, *h);
  }
  try {
    out["q"] = rule_to_json(pt.rule());
  } catch (const BadParams&) {
    json v = json::object();
    for (const Word& c : pt.tree().contexts(table_len)) v[c] = pt.q0(c);
    out["q"] = {{"kind", "table"}, {"values", v}};
  }
  return out;
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw BadParams("JSON error at line " + std::to_string(line) + ": " + e.what());
  }
}

ProbabilisedTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadParams("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return tree_from_json(parse_json_text(ss.str()));
  } catch (const json::exception& e) {
    throw BadParams(path + ": " + e.what());
  }
}

json kappa_to_json(const KappaSum& k) {
  json tb = std::isfinite(k.tail_bound) ? json(k.tail_bound) : json("inf");
  return {{"partial", k.partial}, {"tail_bound", tb}, {"status", to_string(k.status)}, {"terms", k.n_terms}};
}

json q_to_json(const QMatrix& q) {
  json rows = json::array();
  for (std::size_t i = 0; i < q.n(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < q.n(); ++j) r.push_back(q(i, j));
    rows.push_back(r);
  }
  json tails = json::array();
  for (double t : q.row_tail) tails.push_back(std::isfinite(t) ? json(t) : json("inf"));
  return {{"alis", q.index.entries}, {"rows", rows}, {"row_tail", tails}, {"complete", q.index.complete},
          {"truncation", q.index.truncation}};
}

json analyze_report(const ProbabilisedTree& pt, const QMatrix& q, const StabilityVerdict& st) {
  json kappa = json::object();
  for (const KappaSum& k : q.kappa) kappa[k.alis] = kappa_to_json(k);
  json stab = {{"verdict", to_string(st.kind)}, {"exact", st.exact}};
  if (st.kind == StabilityVerdict::Kind::Unstable && !st.witness_context.empty())
    stab["witness"] = {{"context", st.witness_context}, {"letter", std::string(1, st.witness_letter)}};
  json out = {{"report_version", 1}, {"stability", stab}, {"kappa", kappa}, {"Q", q_to_json(q)},
              {"irreducible", is_irreducible(q)}};
  if (pt.family()) out["family"] = pt.family()->name;
  return out;
}

json stationary_report(const Decision& d, std::size_t check_depth) {
  json kappa = json::object();
  for (const KappaSum& k : d.q.kappa) kappa[k.alis] = kappa_to_json(k);
  json out = {{"report_version", 1}, {"decision", to_string(d.kind)}, {"reason", d.reason},
              {"max_len", d.max_len}, {"kappa", kappa}, {"stability", to_string(d.stability.kind)}};
  if (d.fixed.kind == FixedVectorResult::Kind::Unique) {
    json v = json::object();
    for (std::size_t i = 0; i < d.q.n(); ++i) v[d.q.index.entries[i]] = d.fixed.vector.values[i];
    out["v"] = v;
    out["residual"] = d.fixed.vector.residual;
    out["normalization"] = d.fixed.vector.normalization == Normalization::KappaWeighted ? "kappa_weighted" : "unit_sum";
  }
  if (d.measure) {
    ConsistencyReport c = consistency_report(*d.measure, check_depth);
    out["checks"] = {{"K1", c.k1}, {"K2", c.k2}, {"K3", c.k3}, {"depth", c.depth},
                     {"truncation_mass", d.measure->truncation_mass()}};
  }
  return out;
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

void write_q_csv(std::ostream& os, const QMatrix& q) {
  os << "alis";
  for (const Word& w : q.index.entries) os << ',' << w;
  os << ",row_tail\n";
  for (std::size_t i = 0; i < q.n(); ++i) {
    os << q.index.entries[i];
    for (std::size_t j = 0; j < q.n(); ++j) os << ',' << num(q(i, j));
    os << ',' << num(q.row_tail[i]) << '\n';
  }
}

void write_kappa_csv(std::ostream& os, const QMatrix& q) {
  os << "alis,partial,tail_bound,status\n";
  for (const KappaSum& k : q.kappa)
    os << k.alis << ',' << num(k.partial) << ',' << num(k.tail_bound) << ',' << to_string(k.status) << '\n';
}

void write_vector_csv(std::ostream& os, const QMatrix& q, const FixedVector& v) {
  os << "alis,v\n";
  for (std::size_t i = 0; i < q.n() && i < v.values.size(); ++i) os << q.index.entries[i] << ',' << num(v.values[i]) << '\n';
}

std::vector<std::vector<double>> read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    for (char& c : line)
      if (c == ',' || c == ';') c = ' ';
    std::istringstream ls(line);
    std::vector<double> r;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        r.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw BadParams("line " + std::to_string(lineno) + ": not a number '" + tok + "'");
      }
    }
    if (!r.empty()) rows.push_back(std::move(r));
  }
  return rows;
}

std::string dump_report(const json& j) { return j.dump(2); }

}  // namespace vlmc
