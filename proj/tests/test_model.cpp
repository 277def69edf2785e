#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "dataset.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "input_source.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace iuq;

TEST_CASE("lindley recursion hand values") {
  CHECK(lindley_waiting_time({}, {}) == 0.0);  // empty system, W_1 = 0

  std::vector<double> a{1.0, 1.0};
  std::vector<double> s{3.0, 0.5};
  // W_2 = max(0 + 3 - 1, 0) = 2, W_3 = max(2 + 0.5 - 1, 0) = 1.5
  CHECK(lindley_waiting_time(std::span(a.data(), 1), std::span(s.data(), 1)) == 2.0);
  CHECK(lindley_waiting_time(a, s) == 1.5);

  std::vector<double> idle_a{5.0};
  std::vector<double> idle_s{1.0};
  CHECK(lindley_waiting_time(idle_a, idle_s) == 0.0);
}

TEST_CASE("lindley rejects bad input") {
  std::vector<double> a{1.0, 2.0};
  std::vector<double> s{1.0};
  CHECK_THROWS_AS(lindley_waiting_time(a, s), Error);

  std::vector<double> neg{-1.0};
  std::vector<double> ok{1.0};
  CHECK_THROWS_AS(lindley_waiting_time(neg, ok), Error);
  CHECK_THROWS_AS(lindley_waiting_time(ok, neg), Error);
}

TEST_CASE("lindley waiting time is monotone in its inputs") {
  RngStream gen = RngStream::from_seed({8}).derive("mono");
  for (int rep = 0; rep < 200; ++rep) {
    const int steps = 1 + static_cast<int>(gen.draw_index(10));
    std::vector<double> a(steps), s(steps);
    for (auto& x : a) x = gen.next_exponential(0.5);
    for (auto& x : s) x = gen.next_exponential(1.0);
    double base = lindley_waiting_time(a, s);

    const auto k = gen.draw_index(static_cast<std::size_t>(steps));
    auto s_up = s;
    s_up[k] += 0.7;
    CHECK(lindley_waiting_time(a, s_up) >= base);

    auto a_up = a;
    a_up[k] += 0.7;
    CHECK(lindley_waiting_time(a_up, s) <= base);
  }
}

TEST_CASE("queue indicator model outputs 0 or 1 and consumes 2(T-1) draws") {
  Mm1WaitModel model(20, 2.0);
  Dataset inter = Dataset::from_values({1.0, 2.0, 3.0});
  Dataset service = Dataset::from_values({0.5, 1.5});
  auto iv = inter.view();
  auto sv = service.view();
  std::vector<const InputSource*> inputs{&iv, &sv};

  RngStream s = RngStream::from_seed({21}).derive("rep");
  for (int i = 0; i < 50; ++i) {
    auto before = s.draws_consumed();
    double y = replicate(model, inputs, s);
    CHECK((y == 0.0 || y == 1.0));
    CHECK(s.draws_consumed() - before == 38);
  }
}

TEST_CASE("negative threshold makes the indicator certain") {
  Mm1WaitModel model(20, -1.0);
  ExponentialSource arr(0.5), svc(1.0);
  std::vector<const InputSource*> inputs{&arr, &svc};
  RngStream s = RngStream::from_seed({2});
  for (int i = 0; i < 100; ++i) {
    CHECK(replicate(model, inputs, s) == 1.0);
  }
}

TEST_CASE("a queue that always idles never crosses the threshold") {
  // A = 10, S = 1 keeps W_t = 0 for every t.
  Mm1WaitModel model(20, 2.0);
  ConstantSource arr(10.0), svc(1.0);
  std::vector<const InputSource*> inputs{&arr, &svc};
  RngStream s = RngStream::from_seed({3});
  for (int i = 0; i < 100; ++i) {
    CHECK(replicate(model, inputs, s) == 0.0);
  }
}

TEST_CASE("queue model against its long-run exceedance probability") {
  // Reference value for rates (0.5, 1), T=20, threshold 2, estimated from a
  // long independent run: approximately 0.182.
  Mm1WaitModel model(20, 2.0);
  ExponentialSource arr(0.5), svc(1.0);
  std::vector<const InputSource*> inputs{&arr, &svc};
  RngStream s = RngStream::from_seed({500}).derive("truth");
  const int n = 200000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += replicate(model, inputs, s);
  CHECK(std::abs(sum / n - 0.182) < 0.004);
}

TEST_CASE("plug-in queue probability on a large empirical dataset") {
  RngStream gen = RngStream::from_seed({600});
  const std::size_t n = 1000000;
  std::vector<double> inter(n), service(n);
  {
    RngStream g1 = gen.derive("d", 1);
    for (auto& v : inter) v = g1.next_exponential(0.5);
    RngStream g2 = gen.derive("d", 2);
    for (auto& v : service) v = g2.next_exponential(1.0);
  }
  Dataset d1 = Dataset::from_values(std::move(inter));
  Dataset d2 = Dataset::from_values(std::move(service));
  auto v1 = d1.view();
  auto v2 = d2.view();
  std::vector<const InputSource*> inputs{&v1, &v2};

  Mm1WaitModel model(20, 2.0);
  RngStream s = gen.derive("sim");
  const int reps = 1000000;
  double sum = 0;
  for (int i = 0; i < reps; ++i) sum += replicate(model, inputs, s);
  CHECK(std::abs(sum / reps - 0.182) < 0.003);
}

TEST_CASE("mean functional in exact and noisy modes") {
  Dataset d = Dataset::from_values({1.0, 2.0, 3.0});
  auto view = d.view();
  std::vector<const InputSource*> inputs{&view};

  MeanFunctional exact(true);
  CHECK(exact.deterministic_given_inputs());
  RngStream s1 = RngStream::from_seed({1});
  RngStream s2 = RngStream::from_seed({999});
  CHECK(replicate(exact, inputs, s1) == 2.0);
  CHECK(replicate(exact, inputs, s2) == 2.0);
  CHECK(s1.draws_consumed() == 0);

  Dataset coin = Dataset::from_values({0.0, 1.0});
  auto cview = coin.view();
  std::vector<const InputSource*> cinputs{&cview};
  MeanFunctional noisy(false);
  RngStream s = RngStream::from_seed({13}).derive("noisy");
  const int n = 100000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += replicate(noisy, cinputs, s);
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("arity mismatch is rejected") {
  MeanFunctional model(true);
  Dataset d = Dataset::from_values({1.0});
  auto v = d.view();
  std::vector<const InputSource*> two{&v, &v};
  RngStream s = RngStream::from_seed({1});
  try {
    replicate(model, two, s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_input);
  }
}

TEST_CASE("model registry builds models by name") {
  auto mm1 = create_model("mm1", {{"customers", "10"}, {"threshold", "1.5"}});
  CHECK(mm1->name() == "mm1");
  CHECK(mm1->arity() == 2);
  auto* q = dynamic_cast<Mm1WaitModel*>(mm1.get());
  REQUIRE(q != nullptr);
  CHECK(q->num_customers() == 10);
  CHECK(q->threshold() == 1.5);

  auto mean = create_model("mean", {{"exact", "1"}});
  CHECK(mean->deterministic_given_inputs());

  auto constant = create_model("constant", {{"value", "3.5"}});
  Dataset d = Dataset::from_values({1.0});
  auto v = d.view();
  std::vector<const InputSource*> inputs{&v};
  RngStream s = RngStream::from_seed({1});
  CHECK(replicate(*constant, inputs, s) == 3.5);

  CHECK_THROWS_AS(create_model("no-such-model", {}), Error);
  CHECK_THROWS_AS(create_model("mm1", {{"customers", "zero"}}), Error);

  auto names = registered_models();
  CHECK(std::find(names.begin(), names.end(), "mm1") != names.end());
  CHECK(std::find(names.begin(), names.end(), "mean") != names.end());
}

TEST_CASE("sum-of-means functional is additive across inputs") {
  Dataset d1 = Dataset::from_values({1.0, 2.0, 3.0});
  Dataset d2 = Dataset::from_values({0.0, 4.0});
  auto v1 = d1.view();
  auto v2 = d2.view();
  std::vector<const InputSource*> inputs{&v1, &v2};
  SumOfMeansFunctional model(true, 2);
  RngStream s = RngStream::from_seed({1});
  CHECK(replicate(model, inputs, s) == 4.0);  // 2 + 2
}
