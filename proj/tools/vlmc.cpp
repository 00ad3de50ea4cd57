// vlmc command-line front end.
// Exit codes: 0 success, 1 error, 2 cascade divergence or no unique measure.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vlmc/dynamics.hpp"
#include "vlmc/families.hpp"

using namespace vlmc;

namespace {

constexpr int kOk = 0, kError = 1, kUndecided = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw BadParams("cannot write '" + path + "'");
  out << text;
}

template <class F>
void write_csv(const std::string& path, F&& f) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw BadParams("cannot write '" + path + "'");
  f(out);
}

struct Common {
  std::string tree;
  std::size_t max_len = 64;
  double tol = 1e-12;
  std::string out;
};

void add_common(CLI::App* c, Common& o) {
  c->add_option("--tree", o.tree, "tree file (JSON)")->required()->check(CLI::ExistingFile);
  c->add_option("--max-len", o.max_len, "context length truncation")->check(CLI::Range(1, 4096));
  c->add_option("--tol", o.tol, "cascade series tolerance")->check(CLI::PositiveNumber);
  c->add_option("--out", o.out, "report path (default stdout)");
}

KappaOptions kappa_options(const Common& o) {
  KappaOptions k;
  k.tol = o.tol;
  return k;
}

int cmd_families() {
  for (const auto& f : families())
    std::cout << f.name << '\t' << (f.stable ? "stable" : "non-stable") << '\t' << f.description << '\n';
  return kOk;
}

int cmd_validate(const Common& o, std::size_t depth) {
  auto pt = load_tree(o.tree);
  pt.tree().spot_validate(depth);
  const double m = pt.min_probability(std::min(depth, o.max_len));
  json r = {{"valid", true},
            {"contexts_up_to_depth", pt.tree().contexts(depth).size()},
            {"min_probability", m},
            {"non_null", m > 0.0},
            {"stability", to_string(stability(pt).kind)}};
  if (pt.tree().height()) r["height"] = *pt.tree().height();
  write_text(o.out, dump_report(r) + "\n");
  return kOk;
}

int cmd_analyze(const Common& o, const std::string& q_csv, const std::string& kappa_csv) {
  auto pt = load_tree(o.tree);
  QOptions qo;
  qo.kappa = kappa_options(o);
  qo.throw_on_divergence = false;
  auto q = build_Q(pt, o.max_len, qo);
  write_text(o.out, dump_report(analyze_report(pt, q, stability(pt))) + "\n");
  write_csv(q_csv, [&](std::ostream& os) { write_q_csv(os, q); });
  write_csv(kappa_csv, [&](std::ostream& os) { write_kappa_csv(os, q); });
  for (const auto& k : q.kappa)
    if (k.status == KappaStatus::Diverged) return kUndecided;
  return kOk;
}

int cmd_stationary(const Common& o, std::size_t check_depth, const std::string& v_csv) {
  auto pt = load_tree(o.tree);
  DecideOptions opt;
  opt.kappa = kappa_options(o);
  auto d = decide_and_build(pt, o.max_len, opt);
  write_text(o.out, dump_report(stationary_report(d, check_depth)) + "\n");
  if (d.fixed.kind == FixedVectorResult::Kind::Unique)
    write_csv(v_csv, [&](std::ostream& os) { write_vector_csv(os, d.q, d.fixed.vector); });
  return d.kind == Decision::Kind::UniqueMeasure ? kOk : kUndecided;
}

struct SimulateArgs {
  std::size_t steps = 1000;
  std::uint64_t seed = 1;
  std::size_t burnin = 10000;
  std::string history;
  std::string emit = "letters";
  std::size_t count_words = 0;
};

int cmd_simulate(const Common& o, const SimulateArgs& a) {
  auto pt = load_tree(o.tree);
  SamplerOptions so;
  so.burnin = a.burnin;
  if (!a.history.empty()) so.initial_history = a.history;
  Sampler s(pt, a.seed, so);
  std::ostringstream os;
  if (a.emit == "letters" || a.count_words > 0) {
    Word traj = simulate(s, a.steps);
    if (a.count_words > 0) {
      os << "# seed " << a.seed << "\nword,frequency,se_binomial,se_batch\n";
      os << std::setprecision(17);
      for (const auto& [w, e] : empirical_cylinders(traj, a.count_words))
        os << w << ',' << e.frequency << ',' << e.se_binomial << ',' << e.se_batch << '\n';
    } else {
      os << traj << '\n';
    }
  } else {
    auto trace = context_process(s, a.steps);
    if (a.emit == "contexts") {
      os << "# seed " << a.seed << (trace.markov ? "" : " (non-stable tree: not a Markov chain)") << '\n';
      for (const Word& c : trace.contexts) os << c << '\n';
    } else {
      auto r = jump_decomposition(pt.tree(), trace.contexts);
      os << "# seed " << a.seed << "\nn,S_n,J_n\n";
      for (std::size_t n = 0; n < r.J.size(); ++n) os << n << ',' << r.S[n] << ',' << r.J[n] << '\n';
    }
  }
  write_text(o.out, os.str());
  return kOk;
}

int cmd_stabilize(const std::string& tree, std::size_t depth, std::size_t max_states, const std::string& out) {
  std::ifstream in(tree);
  std::stringstream ss;
  ss << in.rdbuf();
  json orig = parse_json_text(ss.str());
  auto pt = stabilize(tree_from_json(orig), depth, max_states);
  json r = {{"version", 1}, {"source", {{"kind", "stabilized"}, {"tree", orig}, {"depth_budget", depth}}}};
  write_text(out, dump_report(r) + "\n");
  std::cerr << "stabilized tree: " << (pt.tree().automaton() ? pt.tree().automaton()->next.size() : 0)
            << " states, stable: " << to_string(is_stable(pt.tree(), 40).kind) << '\n';
  return kOk;
}

int cmd_realize(const std::string& matrix, std::size_t max_len, const std::string& out) {
  std::ifstream in(matrix);
  if (!in) throw BadParams("cannot read '" + matrix + "'");
  auto a = read_matrix_csv(in);
  auto pt = realise_q_from_matrix(a);
  const double dev = verify_realization(pt, a, max_len);
  json values = json::object();
  for (const Word& c : pt.tree().contexts(2 * a.size() + 2)) values[c] = pt.q0(c);
  json r = {{"version", 1},
            {"source", {{"kind", "family"}, {"name", "comb_of_left_combs"}, {"params", json::object()}}},
            {"q", {{"kind", "table"}, {"values", values}, {"fallback", 0.0}}}};
  write_text(out, dump_report(r) + "\n");
  std::cerr << "max |Q - A| on the leading block: " << dev << '\n';
  return dev < 1e-8 ? kOk : kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary measures of variable length Markov chains"};
  app.require_subcommand(1);

  auto* families_cmd = app.add_subcommand("families", "list built-in tree families");

  Common validate_o;
  std::size_t validate_depth = 20;
  auto* validate_cmd = app.add_subcommand("validate", "check a tree file");
  add_common(validate_cmd, validate_o);
  validate_cmd->add_option("--depth", validate_depth, "saturation check depth");

  Common analyze_o;
  std::string q_csv, kappa_csv;
  auto* analyze_cmd = app.add_subcommand("analyze", "alpha-lis set, cascade series and Q");
  add_common(analyze_cmd, analyze_o);
  analyze_cmd->add_option("--q-csv", q_csv, "write Q as CSV");
  analyze_cmd->add_option("--kappa-csv", kappa_csv, "write cascade series as CSV");

  Common stationary_o;
  std::size_t check_depth = 12;
  std::string v_csv;
  auto* stationary_cmd = app.add_subcommand("stationary", "decide existence and uniqueness, build the measure");
  add_common(stationary_cmd, stationary_o);
  stationary_cmd->add_option("--check-depth", check_depth, "depth of the consistency checks")
      ->check(CLI::Range(0, 16));
  stationary_cmd->add_option("--v-csv", v_csv, "write the left-fixed vector as CSV");

  Common simulate_o;
  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "sample a trajectory");
  add_common(simulate_cmd, simulate_o);
  simulate_cmd->add_option("--steps", sim.steps, "number of steps");
  simulate_cmd->add_option("--seed", sim.seed, "64-bit seed");
  simulate_cmd->add_option("--burnin", sim.burnin, "discarded steps in burn-in mode");
  simulate_cmd->add_option("--history", sim.history, "initial history, oldest letter first");
  simulate_cmd->add_option("--emit", sim.emit, "letters, contexts or jumps")
      ->check(CLI::IsMember({"letters", "contexts", "jumps"}));
  simulate_cmd->add_option("--count-words", sim.count_words, "cylinder frequencies up to this length")
      ->check(CLI::Range(0, 20));

  std::string stab_tree, stab_out;
  std::size_t stab_depth = 64, stab_states = 1u << 14;
  auto* stabilize_cmd = app.add_subcommand("stabilize", "smallest stable tree containing a tree");
  stabilize_cmd->add_option("--tree", stab_tree, "tree file (JSON)")->required()->check(CLI::ExistingFile);
  stabilize_cmd->add_option("--depth", stab_depth, "depth budget");
  stabilize_cmd->add_option("--max-states", stab_states, "state budget");
  stabilize_cmd->add_option("--out", stab_out, "tree file to write (default stdout)");

  std::string matrix, realize_out;
  std::size_t realize_len = 60;
  auto* realize_cmd = app.add_subcommand("realize", "comb of left-combs with a prescribed Q block");
  realize_cmd->add_option("--matrix", matrix, "CSV of a positive stochastic matrix")->required();
  realize_cmd->add_option("--max-len", realize_len, "truncation used to verify the block");
  realize_cmd->add_option("--out", realize_out, "tree file to write (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (families_cmd->parsed()) return cmd_families();
    if (validate_cmd->parsed()) return cmd_validate(validate_o, validate_depth);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze_o, q_csv, kappa_csv);
    if (stationary_cmd->parsed()) return cmd_stationary(stationary_o, check_depth, v_csv);
    if (simulate_cmd->parsed()) return cmd_simulate(simulate_o, sim);
    if (stabilize_cmd->parsed()) return cmd_stabilize(stab_tree, stab_depth, stab_states, stab_out);
    if (realize_cmd->parsed()) return cmd_realize(matrix, realize_len, realize_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
