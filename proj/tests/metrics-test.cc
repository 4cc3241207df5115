// tests/metrics-test.cc

// Copyright 2026  The dlid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dlid/errors.h"
#include "dlid/keyed-rng.h"
#include "dlid/metrics.h"
#include "oracles.h"

namespace dlid {
namespace {

using testing::BruteCavg;
using testing::BruteEer;
using testing::DecisionTable;
using testing::MakeTable;

TEST_CASE("accuracy") {
  CHECK(Accuracy(DecisionTable({0, 1, 2}, {0, 1, 2}, 3)) == 1.0);
  CHECK(Accuracy(DecisionTable({0, 1, 1, 0}, {0, 1, 0, 0}, 2)) == 0.75);
  ScoreTable uniform = MakeTable({{0, 0, 0}, {1, 1, 1}}, {0, 0});
  CHECK(Accuracy(uniform) == 1.0);
  CHECK(Argmax({0.5, 0.5, 0.1}) == 0);
  CHECK_THROWS_AS(Accuracy(ScoreTable{{"a", "b"}, {}}), std::invalid_argument);
}

TEST_CASE("eer") {
  CHECK(Eer({0.9, 0.8, 0.7}, {0.75, 0.2, 0.1}) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(Eer({0.9, 0.8}, {0.1, 0.2, 0.3}) == 0.0);
  CHECK(Eer({0.4, 0.4}, {0.4, 0.4, 0.4}) == 0.5);
  CHECK_THROWS_AS(Eer({}, {0.1}), std::invalid_argument);

  KeyedStream rng(3, {1});
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> tar(1 + rng() % 12), non(1 + rng() % 20);
    // Rounded so ties occur.
    for (double &v : tar) v = std::round(4 * (n(rng) + 0.8)) / 4;
    for (double &v : non) v = std::round(4 * n(rng)) / 4;
    const double e = Eer(tar, non);
    REQUIRE(e == BruteEer(tar, non));
    REQUIRE(e >= 0.0);
    REQUIRE(e <= 1.0);
    // Strictly monotone transforms leave it unchanged.
    std::vector<double> t2 = tar, n2 = non;
    for (double &v : t2) v = std::exp(3 * v) - 7;
    for (double &v : n2) v = std::exp(3 * v) - 7;
    REQUIRE(Eer(t2, n2) == e);
  }
}

TEST_CASE("c_avg hand case and perfect table") {
  // Truths A,A,B,B; decisions A,A,A,B.
  CHECK(CAvg(DecisionTable({0, 0, 1, 1}, {0, 0, 0, 1}, 2)) == 0.25);
  ScoreTable perfect = DecisionTable({0, 1, 2, 3, 0}, {0, 1, 2, 3, 0}, 4);
  CHECK(CAvg(perfect) == 0.0);
  CHECK(Accuracy(perfect) == 1.0);
  CHECK(Eer(perfect) == 0.0);
  CHECK_THROWS_AS(CAvg(DecisionTable({0, 0}, {0, 1}, 2)), std::invalid_argument);
}

TEST_CASE("c_avg matches the brute-force evaluator on random tables") {
  KeyedStream rng(5, {2});
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t q = 2 + rng() % 5, n = q + rng() % 30;
    std::vector<int> truth(n), decision(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(i < q ? i : rng() % q);
      decision[i] = static_cast<int>(rng() % q);
    }
    ScoreTable t = DecisionTable(truth, decision, q);
    for (bool norm : {false, true}) {
      const double c = CAvg(t, {}, CavgOptions{norm, false});
      REQUIRE(std::abs(c - BruteCavg(truth, decision, q, norm)) <= 1e-12);
      REQUIRE(c >= 0.0);
    }
    const bool error_free = truth == decision;
    REQUIRE((CAvg(t) == 0.0) == error_free);
  }
}

TEST_CASE("metrics are invariant to relabeling languages") {
  KeyedStream rng(8, {3});
  std::normal_distribution<double> nd(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t q = 3, n = 12;
    std::vector<std::vector<double>> s(n, std::vector<double>(q));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(i % q);
      for (double &v : s[i]) v = nd(rng);
      s[i][y[i]] += 1.0;
    }
    const std::vector<int> perm{2, 0, 1};
    std::vector<std::vector<double>> ps(n, std::vector<double>(q));
    std::vector<int> py(n);
    for (std::size_t i = 0; i < n; ++i) {
      py[i] = perm[y[i]];
      for (std::size_t l = 0; l < q; ++l) ps[i][perm[l]] = s[i][l];
    }
    ScoreTable a = MakeTable(s, y), b = MakeTable(ps, py);
    CHECK(Accuracy(a) == Accuracy(b));
    CHECK(Eer(a) == Eer(b));
    CHECK(std::abs(CAvg(a) - CAvg(b)) <= 1e-15);
  }
}

TEST_CASE("c_avg detection variant") {
  // Two languages: LLR >= 0 iff posterior >= 0.5, so it agrees with argmax
  // except at exact ties (accepted for both).
  ScoreTable t = DecisionTable({0, 0, 1, 1}, {0, 0, 0, 1}, 2);
  CHECK(CAvg(t, {}, CavgOptions{false, true}) == 0.25);
  ScoreTable tie = MakeTable({{0, 0}, {1, 0}}, {0, 1});
  // Row 0 accepted as both languages, row 1 as language 0 only.
  // P_miss(0)=0, P_FA(0,1)=1, P_miss(1)=1, P_FA(1,0)=1.
  CHECK(CAvg(tie, {}, CavgOptions{false, true}) == doctest::Approx(0.5 * (0.5 + 0.5 + 0.5)));
}

TEST_CASE("scores csv round trip") {
  ScoreTable t = MakeTable({{0.1, -2.0, 0.3}, {5.0, 1.0, -1.0}}, {2, 0});
  t.languages = {"lang0", "lang1", "lang2"};
  const std::string text = FormatScoresCsv(t);
  CHECK(text.rfind("utt_id,label,lang0,lang1,lang2\n", 0) == 0);
  ScoreTable back = ParseScoresCsv(text);
  CHECK(back.languages == t.languages);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].label == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t l = 0; l < 3; ++l)
      CHECK(back.rows[i].log_posteriors[l] ==
            doctest::Approx(t.rows[i].log_posteriors[l]).epsilon(1e-8));
  CHECK(FormatScoresCsv(back) == text);
  CHECK_THROWS_AS(ParseScoresCsv("utt_id,label,a,b\nx,a,0,0\n"), DataError);
  CHECK_THROWS_AS(ParseScoresCsv("utt_id,label,a,b\nx,c,0,-100\n"), DataError);
  CHECK_THROWS_AS(ParseScoresCsv("id,label,a,b\n"), DataError);
}

}  // namespace
}  // namespace dlid
