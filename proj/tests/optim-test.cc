// tests/optim-test.cc

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

#include <cmath>
#include <random>
#include <vector>

#include "dlid/errors.h"
#include "dlid/keyed-rng.h"
#include "dlid/model.h"
#include "dlid/optim.h"

namespace dlid {
namespace {

ModelParams<double> Scalars(std::vector<double> values) {
  ModelParams<double> p;
  p.Add("x", Tensor<double>::Vector(std::move(values)));
  return p;
}

TEST_CASE("schedule anchors under the default constants") {
  ScheduleConfig s;
  s.total_steps = 240000;
  CHECK(LrAt(0, s) == 0.0);
  CHECK(LrAt(24000, s) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(std::abs(LrAt(240000, s)) < 1e-20);
  CHECK(LrAt(12000, s) == doctest::Approx(5e-5).epsilon(1e-15));
  CHECK(LrAt(24000 + 108000, s) == doctest::Approx(5e-5).epsilon(1e-12));
  CHECK_THROWS_AS(LrAt(240001, s), std::invalid_argument);
}

TEST_CASE("schedule shape") {
  ScheduleConfig s{2e-3, 10, 110};
  double prev = -1;
  for (std::size_t t = 0; t <= 10; ++t) {
    const double lr = LrAt(t, s);
    CHECK(lr == doctest::Approx(2e-3 * t / 10.0).epsilon(1e-15));
    CHECK(lr > prev);
    prev = lr;
  }
  for (std::size_t t = 11; t <= 110; ++t) {
    const double lr = LrAt(t, s);
    CHECK(lr < prev);
    CHECK(lr >= 0.0);
    prev = lr;
  }
  // No room after warmup.
  ScheduleConfig bad{1e-4, 100, 100};
  CHECK(LrAt(50, bad) == doctest::Approx(5e-5));
  CHECK_THROWS_AS(LrAt(100, bad), std::invalid_argument);
}

TEST_CASE("adam first step moves by lr") {
  ModelParams<double> p = Scalars({1.0, 1.0, -2.0});
  Adam<double> adam(p);
  adam.Step(p, {Tensor<double>::Vector({1.0, 0.25, -3.0})}, 1e-4);
  // The bias-corrected ratio m/sqrt(v) is sign(g) on the first step.
  CHECK(p.at("x")[0] == doctest::Approx(1.0 - 1e-4).epsilon(1e-10));
  CHECK(p.at("x")[1] == doctest::Approx(1.0 - 1e-4).epsilon(1e-10));
  CHECK(p.at("x")[2] == doctest::Approx(-2.0 + 1e-4).epsilon(1e-10));
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam with a zero gradient leaves parameters unchanged") {
  ModelParams<double> p = Scalars({0.5, -0.5});
  const ModelParams<double> before = p;
  Adam<double> adam(p);
  for (int i = 0; i < 3; ++i) adam.Step(p, {Tensor<double>::Vector({0.0, 0.0})}, 1e-3);
  CHECK(p == before);
}

TEST_CASE("adam matches a scalar reference implementation") {
  KeyedStream rng(11, {1});
  std::normal_distribution<double> n(0, 1);
  const std::size_t dim = 7;
  std::vector<double> x(dim), m(dim, 0), v(dim, 0);
  for (double &e : x) e = n(rng);
  ModelParams<double> p = Scalars(x);
  Adam<double> adam(p);
  for (int t = 1; t <= 25; ++t) {
    std::vector<double> g(dim);
    for (double &e : g) e = n(rng);
    const double lr = 1e-2 / t;
    adam.Step(p, {Tensor<double>::Vector(g)}, lr);
    for (std::size_t i = 0; i < dim; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      x[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
    for (std::size_t i = 0; i < dim; ++i) REQUIRE(p.at("x")[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < dim; ++i) {
    CHECK(adam.first_moments()[0][i] == doctest::Approx(m[i]).epsilon(1e-12));
    CHECK(adam.second_moments()[0][i] == doctest::Approx(v[i]).epsilon(1e-12));
  }
}

TEST_CASE("adam decreases a convex quadratic monotonically after warmup") {
  // f(x) = 0.5 * sum a_i x_i^2 with gradient a_i x_i.
  const std::vector<double> a{1.0, 3.0, 0.5};
  ModelParams<double> p = Scalars({1.0, -0.8, 0.6});
  Adam<double> adam(p);
  ScheduleConfig s{0.01, 5, 50};
  auto loss = [&] {
    double f = 0;
    for (std::size_t i = 0; i < a.size(); ++i) f += 0.5 * a[i] * p.at("x")[i] * p.at("x")[i];
    return f;
  };
  const double start = loss();
  double prev = start;
  for (std::size_t t = 1; t <= 50; ++t) {
    std::vector<double> g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = a[i] * p.at("x")[i];
    adam.Step(p, {Tensor<double>::Vector(g)}, LrAt(t, s));
    const double f = loss();
    // The final step has lr 0.
    if (t > s.warmup_steps && t < s.total_steps) CHECK(f < prev);
    if (t == s.total_steps) CHECK(f == prev);
    prev = f;
  }
  CHECK(prev < 0.8 * start);
}

TEST_CASE("adam rejects a non-finite gradient before modifying anything") {
  ModelParams<float> p;
  p.Add("a", Tensor<float>::Vector({1.0f, 2.0f}));
  p.Add("b", Tensor<float>::Vector({3.0f}));
  Adam<float> adam(p);
  adam.Step(p, {Tensor<float>::Vector({0.1f, 0.2f}), Tensor<float>::Vector({0.3f})}, 1e-3);
  const ModelParams<float> before = p;
  const auto m_before = adam.first_moments();
  CHECK_THROWS_AS(adam.Step(p,
                            {Tensor<float>::Vector({0.1f, 0.2f}),
                             Tensor<float>::Vector({std::nanf("")})},
                            1e-3),
                  NumericError);
  CHECK(p == before);
  CHECK(adam.first_moments() == m_before);
  CHECK(adam.step_count() == 1);
  CHECK_THROWS_AS(adam.Step(p, {Tensor<float>::Vector({0.1f})}, 1e-3), std::invalid_argument);
}

}  // namespace
}  // namespace dlid
