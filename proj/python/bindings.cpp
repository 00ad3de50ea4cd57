#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vlmc/dynamics.hpp"
#include "vlmc/families.hpp"

namespace py = pybind11;
using namespace vlmc;

namespace {

json parse_params(const std::string& text) { return text.empty() ? json::object() : parse_json_text(text); }

py::dict kappa_dict(const KappaSum& k) {
  py::dict d;
  d["alis"] = k.alis;
  d["partial"] = k.partial;
  d["tail_bound"] = k.tail_bound;
  d["status"] = to_string(k.status);
  d["n_terms"] = k.n_terms;
  return d;
}

std::vector<std::vector<double>> dense(const QMatrix& q) {
  std::vector<std::vector<double>> m(q.n(), std::vector<double>(q.n()));
  for (std::size_t i = 0; i < q.n(); ++i)
    for (std::size_t j = 0; j < q.n(); ++j) m[i][j] = q(i, j);
  return m;
}

}  // namespace

PYBIND11_MODULE(_vlmc, m) {
  m.doc() = "Stationary measures of variable length Markov chains";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<BadWord>(m, "BadWord", base.ptr());
  py::register_exception<InvalidTree>(m, "InvalidTree", base.ptr());
  py::register_exception<HistoryTooShort>(m, "HistoryTooShort", base.ptr());
  py::register_exception<EmptyWord>(m, "EmptyWord", base.ptr());
  py::register_exception<NotAnAlis>(m, "NotAnAlis", base.ptr());
  py::register_exception<TreeNotStable>(m, "TreeNotStable", base.ptr());
  py::register_exception<BadParams>(m, "BadParams", base.ptr());
  py::register_exception<NotNonNull>(m, "NotNonNull", base.ptr());
  py::register_exception<CascadeDiverged>(m, "CascadeDiverged", base.ptr());
  py::register_exception<DidNotConverge>(m, "DidNotConverge", base.ptr());
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", base.ptr());
  py::register_exception<TrajectoryTooShort>(m, "TrajectoryTooShort", base.ptr());

  m.def("families", [] {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& f : families()) out.emplace_back(f.name, f.stable, f.description);
    return out;
  }, "(name, stable, description) of the built-in families");

  py::class_<ProbabilisedTree>(m, "Tree")
      .def("q0", &ProbabilisedTree::q0, py::arg("context"))
      .def("is_context", [](const ProbabilisedTree& pt, const Word& w) { return pt.tree().is_context(w); })
      .def("is_internal", [](const ProbabilisedTree& pt, const Word& w) { return pt.tree().is_internal(w); })
      .def("lpref", [](const ProbabilisedTree& pt, const Word& w) { return Word(pt.tree().lpref(w)); })
      .def("contexts", [](const ProbabilisedTree& pt, std::size_t n) { return pt.tree().contexts(n); },
           py::arg("max_len"))
      .def("stability", [](const ProbabilisedTree& pt) { return std::string(to_string(stability(pt).kind)); })
      .def("to_json", [](const ProbabilisedTree& pt) { return dump_report(tree_to_json(pt)); });

  m.def("make_family", [](const std::string& name, const std::string& params) {
    return make_family(name, parse_params(params));
  }, py::arg("name"), py::arg("params_json") = "");
  m.def("tree_from_json", [](const std::string& text) { return tree_from_json(parse_json_text(text)); });
  m.def("load_tree", &load_tree, py::arg("path"));
  m.def("stabilize", py::overload_cast<const ProbabilisedTree&, std::size_t, std::size_t>(&stabilize), py::arg("tree"), py::arg("depth_budget") = 64,
        py::arg("max_states") = std::size_t{1} << 14);
  m.def("realise_q_from_matrix", &realise_q_from_matrix, py::arg("a"));

  m.def("alpha_lis", [](const ProbabilisedTree& pt, const Word& w) {
    auto d = alpha_lis(pt.tree(), w);
    return py::make_tuple(d.head, std::string(1, d.alpha), d.lis);
  }, py::arg("tree"), py::arg("word"), "(head, alpha, lis) with word = head + alpha + lis");
  m.def("cascade", [](const ProbabilisedTree& pt, const Word& w) { return cascade(pt, w); });
  m.def("kappa", [](const ProbabilisedTree& pt, const Word& a, std::size_t max_len) {
    return kappa_dict(kappa(pt, a, max_len));
  }, py::arg("tree"), py::arg("alis"), py::arg("max_len") = 64);

  m.def("build_q", [](const ProbabilisedTree& pt, std::size_t max_len) {
    QOptions qo;
    qo.throw_on_divergence = false;
    auto q = build_Q(pt, max_len, qo);
    py::dict d;
    d["alis"] = q.index.entries;
    d["complete"] = q.index.complete;
    d["matrix"] = dense(q);
    d["row_tail"] = q.row_tail;
    py::list ks;
    for (const auto& k : q.kappa) ks.append(kappa_dict(k));
    d["kappa"] = ks;
    d["irreducible"] = is_irreducible(q);
    return d;
  }, py::arg("tree"), py::arg("max_len") = 64);

  py::class_<StationaryMeasure, std::shared_ptr<StationaryMeasure>>(m, "StationaryMeasure")
      .def("pi_cylinder", &StationaryMeasure::pi_cylinder, py::arg("word"))
      .def("mu_alis", &StationaryMeasure::mu_alis, py::arg("alis"))
      .def_property_readonly("truncation_mass", &StationaryMeasure::truncation_mass)
      .def_property_readonly("alis", [](const StationaryMeasure& s) { return s.q().index.entries; })
      .def_property_readonly("v", [](const StationaryMeasure& s) { return s.v().values; });

  m.def("decide", [](const ProbabilisedTree& pt, std::size_t max_len) {
    auto d = decide_and_build(pt, max_len);
    py::object measure = py::none();
    if (d.measure) measure = py::cast(std::const_pointer_cast<StationaryMeasure>(d.measure));
    return py::make_tuple(std::string(to_string(d.kind)), d.reason, measure);
  }, py::arg("tree"), py::arg("max_len") = 64, "(decision, reason, measure or None)");

  m.def("simulate", [](const ProbabilisedTree& pt, std::size_t steps, std::uint64_t seed, std::size_t burnin,
                       std::optional<Word> history) {
    SamplerOptions so;
    so.burnin = burnin;
    so.initial_history = std::move(history);
    Sampler s(pt, seed, so);
    py::gil_scoped_release release;
    return simulate(s, steps);
  }, py::arg("tree"), py::arg("steps"), py::arg("seed") = 1, py::arg("burnin") = 10000,
     py::arg("history") = py::none(), "chronological letters; history is oldest letter first");
  m.def("empirical_cylinder", [](const Word& traj, const Word& w) {
    auto e = empirical_cylinder(traj, w);
    return py::make_tuple(e.frequency, std::max(e.se_batch, e.se_binomial));
  }, py::arg("trajectory"), py::arg("word"), "(frequency, standard error)");
}
