#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "vlmc/families.hpp"

using namespace vlmc;

namespace {

ProbabilisedTree with_random_q(const std::string& name, std::uint64_t seed) {
  auto base = make_family(name);
  return ProbabilisedTree(base.tree(), std::make_shared<RandomRule>(seed, 0.05, 0.95), base.family_ptr());
}

oracle::Q0 q0_of(const ProbabilisedTree& pt) {
  return [&pt](const oracle::Word& c) { return pt.q0(c); };
}

}  // namespace

TEST_CASE("Q matches the definition on truncated trees") {
  const std::vector<std::pair<std::string, oracle::Tree>> trees = {
      {"brush", oracle::brush()},
      {"double_bamboo", oracle::double_bamboo()},
      {"comb_of_left_combs", oracle::comb_of_left_combs()},
      {"finite_branch_tree", oracle::finite_branch_tree()},
      {"bamboo_and_combs", oracle::bamboo_and_combs()},
      {"finite_alis_tree", oracle::finite_alis_tree()}};
  constexpr std::size_t kLen = 11;
  for (const auto& [name, re] : trees) {
    CAPTURE(name);
    auto pt = with_random_q(name, 23);
    QOptions qo;
    qo.throw_on_divergence = false;
    auto q = build_Q(pt, kLen, qo);
    auto want = oracle::q_matrix(re, q0_of(pt), kLen);
    for (std::size_t i = 0; i < q.n(); ++i)
      for (std::size_t j = 0; j < q.n(); ++j) {
        auto it = want.find({q.index.entries[i], q.index.entries[j]});
        const double w = it == want.end() ? 0.0 : it->second;
        CAPTURE(q.index.entries[i]);
        CAPTURE(q.index.entries[j]);
        if (w == 0.0) {
          CHECK(q(i, j) == 0.0);
        } else {
          CHECK(q(i, j) == doctest::Approx(w).epsilon(1e-13));
        }
      }
  }
}

TEST_CASE("finite alpha-lis tree: entries in terms of q") {
  // A = sum_{k>=1} q_{01^k01}(0) q_1(0) q_1(1)^{k-1},
  // B = sum_{k,l>=1} q_{01^k0^{l+1}1}(1) q_1(0) q_00(1) q_1(1)^{k-1} q_00(0)^{l-1}
  auto pt = with_random_q("finite_alis_tree", 41);
  auto q0 = [&](const Word& c) { return pt.q0(c); };
  const double a1 = q0("1"), a00 = q0("00");
  double A = 0.0, B = 0.0;
  for (std::size_t k = 1; k < 600; ++k) {
    A += q0("0" + power("1", k) + "01") * a1 * std::pow(1 - a1, double(k - 1));
    for (std::size_t l = 1; k + l < 600; ++l)
      B += (1 - q0("0" + power("1", k) + power("0", l + 1) + "1")) * a1 * (1 - a00) * std::pow(1 - a1, double(k - 1)) *
           std::pow(a00, double(l - 1));
  }
  auto q = build_Q(pt, 620);
  REQUIRE(q.index.entries == std::vector<Word>{"1", "00", "001", "101"});
  const std::vector<std::vector<double>> want = {
      {1 - a1, 0, 0, 0}, {1 - a00, a00, 0, 0}, {B, 1 - B, 1 - B, B}, {1 - A, A, A, 1 - A}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(q(i, j) == doctest::Approx(want[i][j]).epsilon(1e-10));
}

TEST_CASE("row tails bound the missing mass of stable rows") {
  for (const char* name : {"double_bamboo", "comb_of_left_combs", "finite_branch_tree"}) {
    CAPTURE(name);
    auto pt = with_random_q(name, 4);
    auto q = build_Q(pt, 48);
    for (std::size_t i = 0; i < q.n(); ++i) {
      CAPTURE(q.index.entries[i]);
      CHECK(std::fabs(q.row_sum(i) - 1.0) <= q.row_tail[i] + 1e-13);
    }
    CHECK(is_irreducible(q));
  }
}

TEST_CASE("dense fixed vectors") {
  auto q = q_from_dense({"a", "b"}, {{0.9, 0.1}, {0.3, 0.7}});
  auto r = left_fixed_vector(q);
  REQUIRE(r.kind == FixedVectorResult::Kind::Unique);
  CHECK(r.vector.values[0] == doctest::Approx(0.75));
  CHECK(r.vector.values[1] == doctest::Approx(0.25));
  CHECK(r.vector.residual <= 1e-15);
  CHECK(r.nullity == 1);

  auto id = q_from_dense({"a", "b"}, {{1.0, 0.0}, {0.0, 1.0}});
  auto ri = left_fixed_vector(id);
  CHECK(ri.kind == FixedVectorResult::Kind::NotUniqueEvidence);
  CHECK(ri.nullity == 2);
  CHECK_FALSE(is_irreducible(id));

  // substochastic with spectral radius < 1: only the zero vector is fixed
  auto sub = q_from_dense({"a", "b"}, {{0.5, 0.2}, {0.1, 0.3}});
  CHECK(left_fixed_vector(sub).kind == FixedVectorResult::Kind::NoneFound);
}

TEST_CASE("power iteration agrees with the direct solver") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows(30, std::vector<double>(30));
  std::vector<Word> labels;
  for (std::size_t i = 0; i < 30; ++i) {
    labels.push_back("1" + power("0", i) + "1");
    double s = 0.0;
    for (double& x : rows[i]) s += (x = u(gen) * u(gen));
    for (double& x : rows[i]) x /= s;
  }
  auto q = q_from_dense(labels, rows);
  auto direct = left_fixed_vector(q);
  FixedVectorOptions opt;
  opt.direct_limit = 0;
  auto power_it = left_fixed_vector(q, opt);
  REQUIRE(direct.kind == FixedVectorResult::Kind::Unique);
  REQUIRE(power_it.kind == FixedVectorResult::Kind::Unique);
  for (std::size_t i = 0; i < 30; ++i) CHECK(power_it.vector.values[i] == doctest::Approx(direct.vector.values[i]).epsilon(1e-9));
}

TEST_CASE("recurrence bounds") {
  // reflecting walk pushed back to 0: recurrent
  CountableMatrix rec;
  rec.entry = [](std::size_t i, std::size_t j) {
    if (j == 0) return 0.5;
    return j == i + 1 ? 0.5 : 0.0;
  };
  auto r = recurrence_bounds(rec, {8, 32, 128});
  CHECK(r.kind == RecurrenceReport::Kind::RecurrentEvidence);
  CHECK(r.prob_lower >= 1.0 - 1e-9);
  for (std::size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].return_lower >= r.levels[i - 1].return_lower);

  // drift to infinity with summable defect: transient
  CountableMatrix tr;
  tr.entry = [](std::size_t i, std::size_t j) {
    const double d = 1.0 / double((i + 2) * (i + 2));
    if (j == i + 1) return 1.0 - d;
    return j == 0 ? d : 0.0;
  };
  tr.defect_tail = [](std::size_t n) { return 1.0 / double(n + 1); };
  auto t = recurrence_bounds(tr, {64, 1024});
  CHECK(t.kind == RecurrenceReport::Kind::TransientEvidence);
  CHECK(t.prob_lower == doctest::Approx(0.5).epsilon(1e-3));

  // a finite irreducible alpha-lis set is recurrent
  auto db = recurrence_bounds(make_family("double_bamboo"), {16, 32});
  CHECK(db.kind == RecurrenceReport::Kind::RecurrentEvidence);
  CHECK_THROWS_AS(recurrence_bounds(make_family("brush"), {16}), TreeNotStable);
}

TEST_CASE("realization of a prescribed block") {
  const std::vector<std::vector<double>> a = {{0.2, 0.3, 0.5}, {0.6, 0.1, 0.3}, {0.25, 0.25, 0.5}};
  auto pt = realise_q_from_matrix(a);
  CHECK(verify_realization(pt, a, 40) < 1e-12);
  auto q = build_Q(pt, 40);
  CHECK(q.index.entries[0] == "11");
  CHECK(q.index.entries[1] == "101");
  // q_{0^i 1 0^j 1}(1) = a_ji / (1 - sum_{k<i} a_jk)
  CHECK(pt.q("101", '1') == doctest::Approx(0.6));
  CHECK(pt.q("0101", '1') == doctest::Approx(0.1 / 0.4));
  CHECK(pt.q("01001", '1') == doctest::Approx(0.25 / 0.75));
  CHECK(pt.q("00101", '1') == 1.0);

  CHECK_THROWS_WITH_AS(realise_q_from_matrix({{0.5, 0.5}, {0.0, 1.0}}), doctest::Contains("a(1,0)"), BadParams);
  CHECK_THROWS_WITH_AS(realise_q_from_matrix({{0.5, 0.6}, {0.5, 0.5}}), doctest::Contains("row 0"), BadParams);
  CHECK_THROWS_AS(realise_q_from_matrix({{1.0, 0.0}}), BadParams);
}
