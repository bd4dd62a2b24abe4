#include <cmath>
#include <vector>

#include "deeprm/comparison_models.hpp"
#include "deeprm/error.hpp"
#include "doctest.h"

using namespace deeprm;

namespace {

std::vector<ComparisonModel> all_models() {
  return {ComparisonModel::bradley_terry(), ComparisonModel::thurstonian(),
          ComparisonModel::rao_kupper(1.5), ComparisonModel::davidson(1.0),
          ComparisonModel::rao_kupper(3.0), ComparisonModel::davidson(0.25)};
}

std::vector<double> u_grid() {
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(0.1 * i);
  return grid;
}

}  // namespace

TEST_CASE("log_density reference values") {
  auto bt = ComparisonModel::bradley_terry();
  auto th = ComparisonModel::thurstonian();
  CHECK(log_density(bt, 1, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_density(bt, 1, 1.0) == doctest::Approx(-0.31326168751822283).epsilon(1e-14));
  CHECK(log_density(th, -1, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_density(th, 1, 1.0) == doctest::Approx(-0.17275377902344989).epsilon(1e-13));
  CHECK(std::exp(log_density(th, 1, 1.0)) == doctest::Approx(0.841345).epsilon(1e-6));
}

TEST_CASE("ternary reference masses") {
  auto rk = ComparisonModel::rao_kupper(1.5);
  CHECK(density(rk, 1, 0.7) == doctest::Approx(0.57310598528721207).epsilon(1e-14));
  CHECK(density(rk, -1, 0.7) == doctest::Approx(0.24871729890449479).epsilon(1e-14));
  CHECK(density(rk, 0, 0.7) == doctest::Approx(0.17817671580829314).epsilon(1e-13));
  auto dv = ComparisonModel::davidson(1.0);
  CHECK(density(dv, 1, 0.7) == doctest::Approx(0.45428250890972362).epsilon(1e-14));
  CHECK(density(dv, -1, 0.7) == doctest::Approx(0.22559001769405881).epsilon(1e-14));
  CHECK(density(dv, 0, 0.7) == doctest::Approx(0.32012747339621756).epsilon(1e-14));
}

TEST_CASE("invalid outcomes and parameters are rejected") {
  CHECK_THROWS_AS(log_density(ComparisonModel::bradley_terry(), 0, 0.0), DomainError);
  CHECK_THROWS_AS(log_density(ComparisonModel::thurstonian(), 2, 0.0), DomainError);
  CHECK_THROWS_AS(dlog_density_du(ComparisonModel::davidson(1.0), -2, 0.0), DomainError);
  CHECK_THROWS_AS(ComparisonModel::rao_kupper(1.0), DomainError);
  CHECK_THROWS_AS(ComparisonModel::davidson(0.0), DomainError);
  CHECK_NOTHROW(log_density(ComparisonModel::davidson(1.0), 0, 0.0));
  CHECK_THROWS_AS(parse_model_kind("logit"), ConfigError);
  CHECK(parse_model_kind("Rao-Kupper") == ModelKind::RaoKupper);
}

TEST_CASE("win_probability") {
  auto bt = ComparisonModel::bradley_terry();
  CHECK(win_probability(bt, 0.0) == 0.5);
  CHECK(win_probability(ComparisonModel::thurstonian(), 1.0) ==
        doctest::Approx(0.84134474606854293).epsilon(1e-14));
  CHECK(win_probability(bt, -1.0) == doctest::Approx(0.26894142136999512).epsilon(1e-14));
  for (const auto& model : all_models()) {
    double prev = -1.0;
    for (double u : u_grid()) {
      double p = win_probability(model, u);
      CHECK(p > prev);
      prev = p;
    }
  }
}

TEST_CASE("first and second derivatives") {
  auto bt = ComparisonModel::bradley_terry();
  CHECK(dlog_density_du(bt, 1, 0.0) == 0.5);
  CHECK(d2log_density_du2(bt, 1, 0.0) == -0.25);
  auto th = ComparisonModel::thurstonian();
  CHECK(dlog_density_du(th, 1, 1.0) == doctest::Approx(0.28759997093917836).epsilon(1e-13));
  CHECK(d2log_density_du2(th, 1, 1.0) == doctest::Approx(-0.3703137142233946).epsilon(1e-13));
}

TEST_CASE("normal tail stays finite and accurate") {
  // mpmath references at 50 digits.
  CHECK(log_normal_cdf(-8.5) == doctest::Approx(-39.197396428217669).epsilon(1e-13));
  CHECK(log_normal_cdf(-12.0) == doctest::Approx(-75.410673001568796).epsilon(1e-13));
  CHECK(log_normal_cdf(-40.0) == doctest::Approx(-804.60844201375379).epsilon(1e-13));
  auto th = ComparisonModel::thurstonian();
  CHECK(dlog_density_du(th, 1, -20.0) == doctest::Approx(20.049753068527851).epsilon(1e-12));
  CHECK(dlog_density_du(th, -1, 12.0) == doctest::Approx(-12.082214175254284).epsilon(1e-12));
  CHECK(d2log_density_du2(th, 1, -40.0) < 0.0);
  CHECK(std::isfinite(log_density(th, -1, 60.0)));
  // Continuity across the tail switch.
  CHECK(log_normal_cdf(-8.0 - 1e-12) == doctest::Approx(log_normal_cdf(-8.0 + 1e-12)).epsilon(1e-12));
}

TEST_CASE("axiom properties on the u grid") {
  for (const auto& model : all_models()) {
    CAPTURE(to_string(model.kind));
    CAPTURE(model.tie_param);
    double prev_loss = 2.0;
    for (double u : u_grid()) {
      CAPTURE(u);
      double total = 0.0;
      for (Outcome y : model.outcomes()) {
        CHECK(std::abs(density(model, y, u) - density(model, -y, -u)) <= 1e-12);
        CHECK(d2log_density_du2(model, y, u) < 0.0);
        total += density(model, y, u);
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
      double loss = density(model, -1, u);
      CHECK(loss < prev_loss);
      prev_loss = loss;
      CHECK(std::abs(win_probability(model, u) + win_probability(model, -u) +
                     tie_probability(model, u) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  const double h = 1e-5;
  for (const auto& model : all_models()) {
    CAPTURE(to_string(model.kind));
    for (double u : u_grid()) {
      for (Outcome y : model.outcomes()) {
        CAPTURE(u);
        CAPTURE(y);
        double fd1 = (log_density(model, y, u + h) - log_density(model, y, u - h)) / (2 * h);
        double d1 = dlog_density_du(model, y, u);
        CHECK(std::abs(fd1 - d1) <= 1e-6 * std::max(1e-3, std::abs(d1)));
        double fd2 = (dlog_density_du(model, y, u + h) - dlog_density_du(model, y, u - h)) / (2 * h);
        double d2 = d2log_density_du2(model, y, u);
        CHECK(std::abs(fd2 - d2) <= 1e-4 * std::max(1e-3, std::abs(d2)));
      }
    }
  }
}

TEST_CASE("sample_outcome") {
  auto bt = ComparisonModel::bradley_terry();
  SUBCASE("saturation clamp") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) CHECK(sample_outcome(bt, 36.0, rng) == 1);
    for (int i = 0; i < 1000; ++i) CHECK(sample_outcome(bt, -40.0, rng) == -1);
  }
  SUBCASE("determinism") {
    Rng a(11), b(11);
    for (int i = 0; i < 200; ++i) CHECK(sample_outcome(bt, 0.3, a) == sample_outcome(bt, 0.3, b));
  }
  SUBCASE("BT frequency at u=1") {
    Rng rng(17);
    const int n = 100000;
    int wins = 0;
    for (int i = 0; i < n; ++i) wins += sample_outcome(bt, 1.0, rng) == 1;
    const double p = 0.7310585786300049;
    CHECK(std::abs(wins / double(n) - p) <= 3 * std::sqrt(p * (1 - p) / n));
  }
  SUBCASE("Davidson tie frequency at u=0") {
    auto dv = ComparisonModel::davidson(1.0);
    // The three masses at u = 0 are e^0, e^0, nu = 1 each.
    double masses[3] = {1.0, 1.0, 1.0};
    const double p_tie = masses[2] / (masses[0] + masses[1] + masses[2]);
    Rng rng(5);
    const int n = 100000;
    int ties = 0;
    for (int i = 0; i < n; ++i) ties += sample_outcome(dv, 0.0, rng) == 0;
    CHECK(std::abs(ties / double(n) - p_tie) <= 3 * std::sqrt(p_tie * (1 - p_tie) / n));
  }
}

TEST_CASE("kappa constants") {
  auto k = kappa_constants(ComparisonModel::bradley_terry(), 2.0);
  CHECK(k.kappa0 == doctest::Approx(2.1269280110429725).epsilon(1e-14));
  CHECK(k.kappa1 == doctest::Approx(0.88079707797788244).epsilon(1e-14));
  CHECK(k.kappa2 == doctest::Approx(0.10499358540350652).epsilon(1e-14));

  auto kt = kappa_constants(ComparisonModel::thurstonian(), 2.0);
  CHECK(kt.kappa0 == doctest::Approx(3.7831843336820319).epsilon(1e-12));
  CHECK(kt.kappa1 == doctest::Approx(2.3732155328228409).epsilon(1e-12));
  CHECK(kt.kappa2 == doctest::Approx(0.11354805168857645).epsilon(1e-12));

  for (auto model : {ComparisonModel::rao_kupper(1.5), ComparisonModel::davidson(1.0)}) {
    auto kk = kappa_constants(model, 2.0);
    CHECK(kk.kappa0 > 0.0);
    CHECK(kk.kappa1 > 0.0);
    CHECK(kk.kappa2 > 0.0);
    // Brute-force check against a coarser independent scan.
    for (double u = -2.0; u <= 2.0; u += 0.01)
      for (Outcome y : model.outcomes()) {
        CHECK(std::abs(log_density(model, y, u)) <= kk.kappa0 + 1e-12);
        CHECK(std::abs(d2log_density_du2(model, y, u)) >= kk.kappa2 - 1e-12);
      }
  }
  // Closed forms agree with a dense scan for the binary models too.
  for (auto model : {ComparisonModel::bradley_terry(), ComparisonModel::thurstonian()}) {
    auto kk = kappa_constants(model, 2.0);
    double k0 = 0, k1 = 0, k2 = 1e9;
    for (int i = 0; i <= 4000; ++i) {
      double u = -2.0 + i * 1e-3;
      for (Outcome y : model.outcomes()) {
        k0 = std::max(k0, std::abs(log_density(model, y, u)));
        k1 = std::max(k1, std::abs(dlog_density_du(model, y, u)));
        k2 = std::min(k2, std::abs(d2log_density_du2(model, y, u)));
      }
    }
    CHECK(kk.kappa0 == doctest::Approx(k0).epsilon(1e-12));
    CHECK(kk.kappa1 == doctest::Approx(k1).epsilon(1e-12));
    CHECK(kk.kappa2 == doctest::Approx(k2).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kappa_constants(ComparisonModel::bradley_terry(), 0.0), DomainError);
}
