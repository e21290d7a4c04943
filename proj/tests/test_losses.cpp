#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fvk/losses/losses.hpp"
#include "fvk/network/network.hpp"
#include "fvk/sampling/sampling.hpp"
#include "oracles.hpp"
#include "problems.hpp"

using namespace fvk;
using loss::LossConfig;
using loss::LossEvaluator;
using loss::LossKind;

namespace {

nn::InputScaling unit_box(const loss::Problem& p) {
  const auto& r = p.geometry.outer;
  return {0.5 * (r.x_min + r.x_max), 0.5 * (r.y_min + r.y_max), 0.5 * r.width(), 0.5 * r.height()};
}

nn::NetworkParams random_network(const loss::Problem& p, std::uint64_t seed) {
  nn::NetworkParams net = nn::initialize({2, 5, 5, 5, p.outputs}, nn::Activation::tanh, seed, unit_box(p));
  util::Rng rng(seed + 17);
  for (double& v : net.values()) v += rng.uniform(-0.2, 0.2);
  return net;
}

nn::NetworkParams zero_network(const loss::Problem& p) {
  nn::NetworkParams net = nn::initialize({2, 5, 5, p.outputs}, nn::Activation::tanh, 1, unit_box(p));
  for (double& v : net.values()) v = 0.0;
  return net;
}

// u_x = (N/Eh) x, u_y = -nu (N/Eh) y: exact for a uniform traction N on the
// quarter model with the x/y output transform.
nn::NetworkParams uniform_tension(const loss::Problem& p, double n) {
  nn::NetworkParams net = zero_network(p);
  const int last = net.layer_count();
  net.bias(last, 0) = n / (p.material.E * p.material.h);
  net.bias(last, 1) = -p.material.nu * n / (p.material.E * p.material.h);
  return net;
}

sampling::SampleSet samples_for(const loss::Problem& p, int domain, int boundary, std::uint64_t seed,
                                bool refine = false) {
  sampling::SamplingPlan plan;
  plan.geometry = p.geometry;
  plan.domain_count = domain;
  plan.boundary_count = boundary;
  plan.seed = seed;
  plan.refinement.enabled = refine;
  return sampling::resample_epoch(plan, 0);
}

LossConfig config(LossKind k) {
  LossConfig c;
  c.kind = k;
  return c;
}

void check_gradient(LossEvaluator& e, const nn::NetworkParams& net, std::uint64_t seed) {
  const loss::LossResult r = e.evaluate(net.values(), true);
  REQUIRE(r.gradient.size() == net.size());
  auto f = [&](const std::vector<double>& p) { return e.evaluate(p, false).value; };
  util::Rng rng(seed);
  const double floor = 1e-6 * std::max(1.0, std::fabs(r.value));
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = rng.below(net.size());
    const double fd = testing::fd_gradient(f, net.values(), i, 1e-4);
    INFO("parameter " << i << ": reverse " << r.gradient[i] << ", difference " << fd);
    CHECK(testing::close(r.gradient[i], fd, 1e-4, floor));
  }
}

}  // namespace

TEST_CASE("zero network on the tension quarter: static residual is the traction") {
  const loss::Problem p = testing::quarter_tension();
  const auto s = samples_for(p, 500, 4000, 3);
  LossConfig c = config(LossKind::pde_based);
  c.lambda_s = 1.0;
  c.nondimensional = false;
  const loss::LossResult raw = loss::pde_loss(zero_network(p), s, p, c);
  // mean of (sin(pi y/20) h)^2 over y in [0, 10] is h^2/2
  const double h = p.material.h;
  const double se = 0.36 * h * h / std::sqrt(4000.0);
  CHECK(std::fabs(raw.part("bc_static") - 0.5 * h * h) < 4.0 * se);
  CHECK(raw.part("pde") == 0.0);
  CHECK(raw.part("bc_kinematic") == 0.0);

  c.nondimensional = true;
  const loss::LossResult nd = loss::pde_loss(zero_network(p), s, p, c);
  const double C = p.material.C();
  CHECK(nd.part("bc_static") == doctest::Approx(raw.part("bc_static") / (C * C)).epsilon(1e-12));
}

TEST_CASE("uniform tension is an exact zero of the PDE loss") {
  const loss::Problem p = testing::quarter_tension("2*h");
  const auto s = samples_for(p, 400, 100, 5);
  for (bool nd : {true, false}) {
    LossConfig c = config(LossKind::pde_based);
    c.nondimensional = nd;
    const loss::LossResult r = loss::pde_loss(uniform_tension(p, 2.0), s, p, c, true);
    CHECK(r.value < 1e-24);
    for (double g : r.gradient) CHECK(std::fabs(g) < 1e-10);
  }
}

TEST_CASE("energy of zero and uniform-stretch fields") {
  const loss::Problem p = testing::quarter_tension("1.5*h");
  const auto s = samples_for(p, 2000, 300, 7);
  const LossConfig c = config(LossKind::energy_based);

  const loss::LossResult zero = loss::energy_loss(zero_network(p), s, p, c);
  CHECK(zero.value == 0.0);
  CHECK(zero.part("penalty") == 0.0);

  // constant strain: U and the edge work are integrated exactly by any samples
  const double n = 1.5 * p.material.h;
  const double ex = n / (p.material.E * p.material.h);
  const double area = 100.0;
  const double expected = -0.5 * n * ex * area;  // -1/2 of the traction work
  const loss::LossResult r = loss::energy_loss(uniform_tension(p, n), s, p, c);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.part("internal") == doctest::Approx(-expected).epsilon(1e-12));
  CHECK(r.part("external") == doctest::Approx(2.0 * expected).epsilon(1e-12));
  CHECK(r.value < zero.value);
}

TEST_CASE("zero network, no loads: every loss part vanishes") {
  loss::Problem p = testing::mixed_bending();
  p.pressure = util::Expression();
  for (auto& c : p.conditions) {
    for (auto& pc : c.pairs) pc.value = util::Expression();
  }
  const auto s = samples_for(p, 200, 40, 9);
  const loss::LossResult e = loss::energy_loss(zero_network(p), s, p, config(LossKind::energy_based));
  CHECK(e.value == 0.0);
  const loss::LossResult d = loss::pde_loss(zero_network(p), s, p, config(LossKind::pde_based));
  CHECK(d.value == 0.0);
}

TEST_CASE("penalty vanishes when the transform enforces the kinematic conditions") {
  const loss::Problem p = testing::quarter_tension();
  const auto s = samples_for(p, 300, 200, 11);
  for (std::uint64_t seed : {1, 2, 3}) {
    const loss::LossResult r = loss::energy_loss(random_network(p, seed), s, p, config(LossKind::energy_based));
    CHECK(r.part("penalty") == 0.0);
  }
}

TEST_CASE("data-driven loss: exact data, constant offset, force normalisation") {
  const loss::Problem p = testing::quarter_tension();
  const nn::NetworkParams net = random_network(p, 4);
  loss::Dataset data;
  util::Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const double x = rng.uniform(0, 10), y = rng.uniform(0, 10);
    const auto d = nn::derivatives_at(net, x, y, 1, p.transform);
    const auto n = plate::isotropic(p.material.C(), p.material.nu, plate::membrane_strains(d));
    data.push_back({x, y, d.ux.value(), d.uy.value(), 0.0, n.xx, n.yy, n.xy});
  }
  LossConfig c = config(LossKind::data_driven);
  c.use_force = true;
  const loss::LossResult exact = loss::data_driven_loss(net, data, p, c, true);
  CHECK(std::fabs(exact.value) < 1e-28);
  for (double g : exact.gradient) CHECK(std::fabs(g) < 1e-14);

  const double delta = 0.03;
  loss::Dataset shifted = data;
  for (auto& q : shifted) q.ux += delta;
  c.use_force = false;
  CHECK(loss::data_driven_loss(net, shifted, p, c).value == doctest::Approx(delta * delta).epsilon(1e-10));

  // force offsets count relative to the field RMS
  loss::Dataset scaled = data;
  double rms = 0.0;
  for (const auto& q : data) rms += q.nxy * q.nxy / data.size();
  rms = std::sqrt(rms);
  for (auto& q : scaled) q.nxy += 0.5 * rms;
  // the RMS of the shifted data is what normalises
  double rms_shifted = 0.0;
  for (const auto& q : scaled) rms_shifted += q.nxy * q.nxy / scaled.size();
  rms_shifted = std::sqrt(rms_shifted);
  c.use_force = true;
  c.use_displacement = false;
  const double expected = std::pow(0.5 * rms / rms_shifted, 2);
  CHECK(loss::data_driven_loss(net, scaled, p, c).value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("reverse gradients of all losses match finite differences") {
  SUBCASE("energy, tension quarter") {
    const loss::Problem p = testing::quarter_tension();
    LossEvaluator e(p, config(LossKind::energy_based), random_network(p, 21));
    e.set_samples(samples_for(p, 80, 20, 1));
    check_gradient(e, random_network(p, 21), 100);
  }
  SUBCASE("energy, quarter with hole and penalty") {
    loss::Problem p = testing::quarter_tension("h", 2.5);
    p.transform = {};
    LossEvaluator e(p, config(LossKind::energy_based), random_network(p, 22));
    e.set_samples(samples_for(p, 80, 20, 2, true));
    check_gradient(e, random_network(p, 22), 101);
  }
  SUBCASE("energy, bending") {
    const loss::Problem p = testing::mixed_bending();
    LossEvaluator e(p, config(LossKind::energy_based), random_network(p, 23));
    e.set_samples(samples_for(p, 80, 20, 3));
    check_gradient(e, random_network(p, 23), 102);
  }
  SUBCASE("pde, tension quarter with hole") {
    const loss::Problem p = testing::quarter_tension("h", 2.5);
    LossConfig c = config(LossKind::pde_based);
    c.lambda_s = 0.1;
    LossEvaluator e(p, c, random_network(p, 24));
    e.set_samples(samples_for(p, 60, 15, 4));
    check_gradient(e, random_network(p, 24), 103);
  }
  SUBCASE("pde, bending, raw scale") {
    const loss::Problem p = testing::mixed_bending();
    LossConfig c = config(LossKind::pde_based);
    c.nondimensional = false;
    LossEvaluator e(p, c, random_network(p, 25));
    e.set_samples(samples_for(p, 40, 10, 5));
    check_gradient(e, random_network(p, 25), 104);
  }
  SUBCASE("data, displacement and force") {
    const loss::Problem p = testing::quarter_tension();
    loss::Dataset data;
    util::Rng rng(3);
    for (int i = 0; i < 40; ++i) {
      const double x = rng.uniform(0, 10), y = rng.uniform(0, 10);
      data.push_back({x, y, 0.01 * x, -0.003 * y, 0.0, 1.0 + 0.1 * y, 0.2 * x, 0.05 * x * y});
    }
    LossConfig c = config(LossKind::data_driven);
    c.use_force = true;
    LossEvaluator e(p, c, random_network(p, 26));
    e.set_dataset(data);
    check_gradient(e, random_network(p, 26), 105);
  }
}

TEST_CASE("subset estimates average to the full loss") {
  const loss::Problem p = testing::quarter_tension("h", 2.0);
  LossConfig c = config(LossKind::pde_based);
  const nn::NetworkParams net = random_network(p, 31);
  LossEvaluator e(p, c, net);
  e.set_samples(samples_for(p, 90, 15, 6));
  const std::size_t n = e.term_count();
  REQUIRE(n % 5 == 0);
  const loss::LossResult full = e.evaluate(net.values(), true);
  double mean = 0.0;
  std::vector<double> mean_grad(net.size(), 0.0);
  for (std::size_t k = 0; k < 5; ++k) {
    std::vector<std::size_t> idx;
    for (std::size_t i = k; i < n; i += 5) idx.push_back(i);
    const loss::LossResult part = e.evaluate(net.values(), true, idx);
    mean += part.value / 5.0;
    for (std::size_t j = 0; j < net.size(); ++j) mean_grad[j] += part.gradient[j] / 5.0;
  }
  CHECK(mean == doctest::Approx(full.value).epsilon(1e-12));
  for (std::size_t j = 0; j < net.size(); ++j) CHECK(mean_grad[j] == doctest::Approx(full.gradient[j]).epsilon(1e-9));
}

TEST_CASE("energy estimate is unbiased under re-seeding") {
  const loss::Problem p = testing::quarter_tension();
  const nn::NetworkParams net = random_network(p, 41);
  const LossConfig c = config(LossKind::energy_based);
  // independent standard error of U and the edge work from per-point values
  auto estimate = [&](std::uint64_t seed, double& se) {
    const auto s = samples_for(p, 10000, 1000, seed);
    double sum = 0.0, sum_sq = 0.0;
    const auto& pts = s.regions[0].points;
    for (const auto& q : pts) {
      const auto d = nn::derivatives_at(net, q.x, q.y, 1, p.transform);
      const double u = 100.0 * plate::energy_density(p.material, d, false);
      sum += u;
      sum_sq += u * u;
    }
    const double n = pts.size();
    double var = (sum_sq / n - std::pow(sum / n, 2)) / n;
    const auto* right = s.segment("right");
    double bs = 0.0, bs2 = 0.0;
    for (const auto& b : right->points) {
      const auto d = nn::derivatives_at(net, b.x, b.y, 1, p.transform);
      const double v = -10.0 * std::sin(std::numbers::pi * b.y / 20.0) * d.ux.value();
      bs += v;
      bs2 += v * v;
    }
    const double m = right->points.size();
    var += (bs2 / m - std::pow(bs / m, 2)) / m;
    se = std::sqrt(var);
    return loss::energy_loss(net, s, p, c).value;
  };
  double se1 = 0.0, se2 = 0.0;
  const double a = estimate(101, se1);
  const double b = estimate(202, se2);
  CHECK(std::fabs(a - b) < 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("energy at the exact uniform-tension field is a local minimum") {
  const loss::Problem p = testing::quarter_tension("h");
  const auto s = samples_for(p, 10000, 1000, 13);
  const LossConfig c = config(LossKind::energy_based);
  const nn::NetworkParams exact = uniform_tension(p, 1.0);
  const double pi0 = loss::energy_loss(exact, s, p, c).value;
  util::Rng rng(77);
  for (int k = 0; k < 20; ++k) {
    nn::NetworkParams q = exact;
    std::vector<double> dir(q.size());
    double norm = 0.0;
    for (double& v : dir) {
      v = rng.uniform(-1.0, 1.0);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < q.size(); ++i) q.values()[i] += 1e-3 * dir[i] / norm;
    CHECK(loss::energy_loss(q, s, p, c).value > pi0);
  }
}

TEST_CASE("loss configuration errors") {
  const loss::Problem p = testing::quarter_tension();
  const auto net = random_network(p, 1);
  LossConfig c = config(LossKind::data_driven);
  c.use_displacement = false;
  CHECK_THROWS_AS(LossEvaluator(p, c, net), std::invalid_argument);

  LossConfig e = config(LossKind::energy_based);
  e.lambda_s = -1.0;
  CHECK_THROWS_AS(LossEvaluator(p, e, net), std::invalid_argument);

  const auto relu = nn::initialize({2, 4, 2}, nn::Activation::relu, 1);
  CHECK_THROWS_AS(LossEvaluator(p, config(LossKind::pde_based), relu), std::invalid_argument);

  const auto three = nn::initialize({2, 4, 3}, nn::Activation::tanh, 1);
  CHECK_THROWS_AS(LossEvaluator(p, config(LossKind::energy_based), three), std::invalid_argument);

  loss::Problem missing = p;
  missing.conditions.pop_back();
  CHECK_THROWS_AS(LossEvaluator(missing, config(LossKind::energy_based), net), std::invalid_argument);

  LossEvaluator d(p, config(LossKind::data_driven), net);
  CHECK_THROWS_AS(d.set_dataset({}), std::invalid_argument);

  loss::Problem bad_name = p;
  bad_name.conditions[2][loss::Pair::normal].value = util::Expression::parse("q0*y");
  CHECK_THROWS_AS(bad_name.validate(), std::invalid_argument);

  CHECK(loss::parse_loss_kind("pde") == LossKind::pde_based);
  CHECK_THROWS_AS(loss::parse_loss_kind("ritz"), std::invalid_argument);
}

TEST_CASE("non-finite parameters are reported") {
  const loss::Problem p = testing::quarter_tension();
  nn::NetworkParams net = random_network(p, 2);
  LossEvaluator e(p, config(LossKind::energy_based), net);
  e.set_samples(samples_for(p, 20, 5, 1));
  net.values()[0] = std::nan("");
  CHECK_THROWS_AS(e.evaluate(net.values(), true), loss::NonFiniteLoss);
}
