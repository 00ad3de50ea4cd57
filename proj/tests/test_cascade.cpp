#include <cmath>

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

TEST_CASE("alpha-lis of the worked example") {
  auto t = make_family("bamboo_and_combs").tree();
  auto d = alpha_lis(t, "010100");
  CHECK(d.lis == "0");
  CHECK(d.alpha == '0');
  CHECK(d.alis() == "00");
  CHECK(d.head == "0101");
  CHECK(d.p == 4);
  CHECK_THROWS_AS(alpha_lis(t, ""), EmptyWord);
}

TEST_CASE("alpha-lis and cascades match the definition") {
  const std::vector<std::pair<std::string, oracle::Tree>> trees = {
      {"brush", oracle::brush()},
      {"double_bamboo", oracle::double_bamboo()},
      {"bamboo_and_combs", oracle::bamboo_and_combs()},
      {"comb_of_right_combs_cherry", oracle::cherry()},
      {"finite_alis_tree", oracle::finite_alis_tree()}};
  for (const auto& [name, re] : trees) {
    CAPTURE(name);
    auto pt = with_random_q(name, 17);
    for (const Word& w : oracle::words_up_to(10)) {
      CAPTURE(w);
      CHECK(alpha_lis(pt.tree(), w).alis() == re.alis(w));
      CHECK(cascade(pt, w) == doctest::Approx(oracle::casc(re, q0_of(pt), w)).epsilon(1e-14));
    }
  }
}

TEST_CASE("family alpha-lis tables") {
  for (const auto& f : families()) {
    CAPTURE(f.name);
    auto pt = make_family(f.name);
    if (!pt.family()->alis_table) continue;
    for (const Word& c : pt.family()->enumerate(40)) {
      CAPTURE(c);
      CHECK(alpha_lis(pt.tree(), c).alis() == *pt.family()->alis_table(c));
    }
  }
}

TEST_CASE("small kappas alpha-lis table") {
  auto t = make_family("small_kappas").tree();
  CHECK(alpha_lis(t, "00011").alis() == "11");
  CHECK(alpha_lis(t, "00010001").alis() == "10001");
  CHECK(alpha_lis(t, "1001").alis() == "1001");
  CHECK(alpha_lis(t, "0001000").alis() == "01000");
}

TEST_CASE("cascade splits exactly on noninternal words") {
  auto pt = with_random_q("brush", 5);
  for (const Word& w : oracle::words_up_to(9)) {
    CAPTURE(w);
    const double split = cascade(pt, "0" + w) + cascade(pt, "1" + w);
    if (pt.tree().is_internal(w)) {
      CHECK(split == doctest::Approx(2.0));
    } else {
      CHECK(split == doctest::Approx(cascade(pt, w)).epsilon(1e-14));
    }
  }
  CHECK(cascade(pt, "") == 1.0);
}

TEST_CASE("cascade series values") {
  // brush, constant q0 = a: kappa_001 = 1 + sum_{q >= 2} a^{q-2} = 1 + 1/(1-a)
  auto base = make_family("brush");
  ProbabilisedTree pt(base.tree(), std::make_shared<ConstantRule>(0.3), base.family_ptr());
  auto k = kappa(pt, "001", 96);
  CHECK(k.status == KappaStatus::Converged);
  CHECK(k.partial == doctest::Approx(1.0 + 1.0 / 0.7).epsilon(1e-12));
  CHECK(k.tail_bound <= 1e-12);
  CHECK(kappa(pt, "1", 96).partial == 1.0);
  CHECK(kappa(pt, "101", 96).partial == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kappa(pt, "11", 20), NotAnAlis);

  // finite trees: exhaustive, tail 0
  auto c3 = make_family("complete", {{"depth", 3}});
  auto k3 = kappa(c3, "010", 8);
  CHECK(k3.tail_bound == 0.0);
  CHECK(k3.partial == 1.0);
}

TEST_CASE("cascade series divergence is flagged") {
  // q_{1^k 0}(1) -> 1 fast: casc(0^p 1^q 0) stays of order 2^-p
  json rule = {{"kind", "patterns"},
               {"rules", {{{"match", "^(1+)0$"}, {"geometric", "q0"}, {"scale", 0.5}, {"ratio", 0.5}}}},
               {"fallback", 0.5}};
  auto pt = make_family("comb_of_right_combs", {{"q", rule}});
  auto k = kappa(pt, "10", 64);
  CHECK(k.status == KappaStatus::Diverged);
  CHECK(std::isinf(k.tail_bound));
  CHECK_THROWS_AS(build_Q(pt, 64), CascadeDiverged);
}

TEST_CASE("small kappas are not bounded below") {
  // kappa_{010^m} is the single cascade prod_{j<m} q_{0^j 1 0^j}(0); with
  // q = 1/2 everywhere it halves at each m
  auto pt = make_family("small_kappas");
  auto table = build_cascade_table(pt, 40);
  double prev = 2.0;
  for (std::size_t m = 1; m <= 18; ++m) {
    auto k = kappa_from_table(table, "01" + power("0", m), {});
    CHECK(k.partial < prev);
    CHECK(k.partial == doctest::Approx(std::pow(0.5, double(m - 1))));
    prev = k.partial;
  }
}

TEST_CASE("truncated descent trees carry unit mass") {
  for (const char* name : {"double_bamboo", "comb_of_left_combs", "finite_branch_tree", "comb_of_right_combs",
                           "comb_of_right_combs_cherry"}) {
    CAPTURE(name);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto pt = with_random_q(name, seed);
      for (const Word& a : alis_set(pt, std::size_t(10)).entries) {
        for (std::size_t n : {0u, 3u, 7u}) {
          auto dt = descent_tree(pt, a, n);
          double s = 0.0;
          for (const Word& leaf : dt.truncated_leaves()) s += cascade(pt, leaf);
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
  CHECK_THROWS_AS(descent_tree(make_family("brush"), "001", 3), TreeNotStable);
  CHECK_THROWS_AS(descent_tree(make_family("double_bamboo"), "01", 3), NotAnAlis);
}
