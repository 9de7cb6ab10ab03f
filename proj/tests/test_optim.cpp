// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "error.hpp"
#include "optim.hpp"
#include "optim_oracles.hpp"
#include "rng.hpp"

using namespace rsb;

namespace {

Param scalar_param(double w) {
  Param p;
  p.name = "w";
  p.shape = {1};
  p.value = {w};
  p.grad = {0.0};
  return p;
}

Param vec_param(const std::vector<double>& w, Shape shape) {
  Param p;
  p.name = "w";
  p.shape = std::move(shape);
  p.value = w;
  p.grad.assign(w.size(), 0.0);
  return p;
}

}  // namespace

TEST_SUITE("optim") {

// ------------------------------------------------------------ LAMB

TEST_CASE("lamb: zero grad, zero wd, fresh state leaves w unchanged") {
  Param p = scalar_param(2.5);
  LambConfig cfg;
  auto opt = make_lamb({&p}, cfg);
  for (int i = 0; i < 5; ++i) opt->step(0.1);
  CHECK(p.value[0] == 2.5);
}

TEST_CASE("lamb: hand-computed degenerate-beta step") {
  // beta1 = beta2 = 0, eps = 0: r = g/|g| + 0, trust = |w|/|r| = 2.
  Param p = scalar_param(2.0);
  p.grad[0] = 1.0;
  LambConfig cfg;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.eps = 0.0;
  cfg.weight_decay = 0.0;
  auto opt = make_lamb({&p}, cfg);
  opt->step(0.1);
  CHECK(p.value[0] == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("lamb trust ratio: zero guards and clipping") {
  CHECK(lamb_trust_ratio(0.0, 5.0) == 1.0);
  CHECK(lamb_trust_ratio(5.0, 0.0) == 1.0);
  CHECK(lamb_trust_ratio(6.0, 2.0) == 3.0);
  CHECK(lamb_trust_ratio(6.0, 2.0, 2.0) == 2.0);
}

TEST_CASE("lamb trust ratio is homogeneous of degree zero") {
  RngStream rng(1, 0, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const double w = rng.uniform(1e-6, 10.0);
    const double u = rng.uniform(1e-6, 10.0);
    const double base = lamb_trust_ratio(w, u);
    for (double c : {0.5, 3.0, 1e6, 1e-6}) {
      CHECK(lamb_trust_ratio(c * w, c * u) ==
            doctest::Approx(base).epsilon(1e-14));
    }
  }
}

// ------------------------------------------------------------ SGD

TEST_CASE("sgd: mu = 0 reduces to plain sgd with coupled decay") {
  Param p = scalar_param(1.0);
  p.grad[0] = 0.5;
  SgdConfig cfg;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.1;
  auto opt = make_sgd_nesterov({&p}, cfg);
  opt->step(0.2);
  // w - lr (g + wd w) = 1 - 0.2 (0.5 + 0.1) = 0.88
  CHECK(p.value[0] == doctest::Approx(0.88).epsilon(1e-15));
}

TEST_CASE("sgd nesterov: hand-computed first step") {
  Param p = scalar_param(1.0);
  p.grad[0] = 1.0;
  SgdConfig cfg;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0;
  auto opt = make_sgd_nesterov({&p}, cfg);
  opt->step(0.1);
  // buf = 1; w = 1 - 0.1 (1 + 0.9) = 0.81
  CHECK(p.value[0] == doctest::Approx(0.81).epsilon(1e-15));
}

// ------------------------------------------------------------ RMSProp

TEST_CASE("rmsprop tf: zero grad leaves w unchanged") {
  Param p = scalar_param(0.7);
  RmspropTfConfig cfg;
  cfg.weight_decay = 0.0;
  auto opt = make_rmsprop_tf({&p}, cfg);
  for (int i = 0; i < 3; ++i) opt->step(0.1);
  CHECK(p.value[0] == 0.7);
}

TEST_CASE("rmsprop tf: one-initialization is observable on the first step") {
  Param p = scalar_param(0.0);
  p.grad[0] = 1.0;
  RmspropTfConfig cfg;
  cfg.rho = 0.9;
  cfg.eps = 0.0;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  auto opt = make_rmsprop_tf({&p}, cfg);
  opt->step(0.1);
  // v = 0.9*1 + 0.1*1 = 1 -> step 0.1; zero-init would give 0.1/sqrt(0.1).
  CHECK(p.value[0] == doctest::Approx(-0.1).epsilon(1e-15));
  const double zero_init_step = 0.1 / std::sqrt(0.1);
  CHECK(std::abs(-p.value[0] - zero_init_step) > 0.2);
}

// ------------------------------------------------------------ AdamP

TEST_CASE("adamp: zero weight vector takes a pure adam step") {
  Param p = scalar_param(0.0);
  p.grad[0] = 1.0;
  AdamPConfig cfg;
  cfg.weight_decay = 0.1;  // decoupled decay of w = 0 contributes nothing
  auto opt = make_adamp({&p}, cfg);
  opt->step(0.01);
  // First Adam step with bias correction moves by lr * g/(|g| + eps) ~ lr.
  CHECK(p.value[0] == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("adamp projects the update orthogonally to w when w ⟂ g") {
  // Rank-1 parameter: one unit group of dimension 2. cosine(w, g) = 0 <
  // delta/sqrt(2), so the radial component of the update is removed.
  Param p = vec_param({3.0, 0.0}, {2});
  p.grad = {0.0, 2.0};
  AdamPConfig cfg;
  cfg.weight_decay = 0.0;
  auto opt = make_adamp({&p}, cfg);
  const std::vector<double> before = p.value;
  opt->step(0.01);
  // The projected update must have been orthogonal to the old w: the
  // component along w is unchanged (up to 1e-12).
  CHECK(std::abs(p.value[0] - before[0]) < 1e-12);
  CHECK(p.value[1] != before[1]);
}

// ------------------------------------------------------------ AGC

TEST_CASE("agc: zero gradient is untouched") {
  Param p = scalar_param(1.0);
  agc_clip({&p}, {0.05, 1e-3});
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("agc: scalar clip per the stated formula") {
  Param p = scalar_param(1.0);
  p.grad[0] = 1.0;
  agc_clip({&p}, {0.05, 1e-3});
  CHECK(p.grad[0] == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("agc: postcondition and idempotence over random tensors") {
  RngStream rng(3, 0, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Param p = vec_param(std::vector<double>(12), {3, 4});
    for (double& v : p.value) v = rng.uniform(-1.0, 1.0);
    for (double& g : p.grad) g = rng.uniform(-5.0, 5.0);
    const AgcConfig cfg{0.05, 1e-3};
    agc_clip({&p}, cfg);
    // Per-row postcondition.
    for (std::size_t u = 0; u < 3; ++u) {
      double wn = 0, gn = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        wn += p.value[u * 4 + i] * p.value[u * 4 + i];
        gn += p.grad[u * 4 + i] * p.grad[u * 4 + i];
      }
      CHECK(std::sqrt(gn) / std::max(std::sqrt(wn), cfg.eps) <=
            cfg.clip_factor + 1e-12);
    }
    const std::vector<double> once = p.grad;
    agc_clip({&p}, cfg);
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(p.grad[i] == doctest::Approx(once[i]).epsilon(1e-12));
    }
  }
}

// ----------------------------------------------- oracle trajectories

TEST_CASE("every rule tracks its scalar hand-oracle over random trajectories") {
  for (std::uint64_t traj = 0; traj < 100; ++traj) {
    RngStream rng(traj, 0, 0, 7);
    const double w0 = rng.uniform(-2.0, 2.0);
    const double lr = rng.uniform(0.001, 0.1);
    const double wd = rng.uniform(0.0, 0.05);

    Param pl = scalar_param(w0), ps = scalar_param(w0), pr = scalar_param(w0),
          pa = scalar_param(w0), pg = scalar_param(w0);
    LambConfig lamb_cfg;
    lamb_cfg.weight_decay = wd;
    SgdConfig sgd_cfg;
    sgd_cfg.weight_decay = wd;
    RmspropTfConfig rms_cfg;
    rms_cfg.weight_decay = wd;
    AdamPConfig adamp_cfg;
    adamp_cfg.weight_decay = wd;
    auto lamb = make_lamb({&pl}, lamb_cfg);
    auto sgd = make_sgd_nesterov({&ps}, sgd_cfg);
    auto rms = make_rmsprop_tf({&pr}, rms_cfg);
    auto adamp = make_adamp({&pa}, adamp_cfg);

    oracle::Lamb olamb;
    olamb.wd = wd;
    oracle::SgdNesterov osgd;
    osgd.wd = wd;
    oracle::RmspropTf orms;
    orms.wd = wd;
    oracle::AdamP oadamp;
    oadamp.wd = wd;
    double wl = w0, ws = w0, wr = w0, wa = w0, wg = w0;

    for (int step = 0; step < 50; ++step) {
      const double g = rng.uniform(-1.0, 1.0);
      pl.grad[0] = ps.grad[0] = pr.grad[0] = pa.grad[0] = g;
      lamb->step(lr);
      sgd->step(lr);
      rms->step(lr);
      adamp->step(lr);
      wl = olamb.step(wl, g, lr);
      ws = osgd.step(ws, g, lr);
      wr = orms.step(wr, g, lr);
      wa = oadamp.step(wa, g, lr);
      REQUIRE(std::abs(pl.value[0] - wl) <= 1e-12 * std::max(1.0, std::abs(wl)));
      REQUIRE(std::abs(ps.value[0] - ws) <= 1e-12 * std::max(1.0, std::abs(ws)));
      REQUIRE(std::abs(pr.value[0] - wr) <= 1e-12 * std::max(1.0, std::abs(wr)));
      REQUIRE(std::abs(pa.value[0] - wa) <= 1e-12 * std::max(1.0, std::abs(wa)));

      // AGC as a pre-step transform on an independent slot.
      pg.grad[0] = g;
      agc_clip({&pg}, {0.05, 1e-3});
      wg = oracle::agc_scalar(wg, g, 0.05, 1e-3);
      REQUIRE(std::abs(pg.grad[0] - wg) <= 1e-12 * std::max(1.0, std::abs(wg)));
      pg.value[0] = pl.value[0];  // keep the AGC weight moving too
      wg = pg.value[0];
    }
  }
}

TEST_CASE("non-finite gradients abort the step") {
  Param p = scalar_param(1.0);
  p.grad[0] = std::numeric_limits<double>::quiet_NaN();
  auto opt = make_lamb({&p}, LambConfig{});
  CHECK_THROWS_AS(opt->step(0.1), NumericError);
  CHECK(p.value[0] == 1.0);
}

TEST_CASE("fresh-state zero-gradient steps are no-ops for every optimizer") {
  for (int kind = 0; kind < 4; ++kind) {
    Param p = vec_param({0.3, -0.7, 1.1}, {3});
    std::unique_ptr<Optimizer> opt;
    switch (kind) {
      case 0: opt = make_lamb({&p}, LambConfig{}); break;
      case 1: opt = make_sgd_nesterov({&p}, SgdConfig{}); break;
      case 2: opt = make_rmsprop_tf({&p}, RmspropTfConfig{}); break;
      case 3: opt = make_adamp({&p}, AdamPConfig{}); break;
    }
    const std::vector<double> before = p.value;
    opt->step(0.5);
    CHECK(p.value == before);
  }
}

TEST_CASE("recipe-default optimizers solve a convex quadratic under cosine decay") {
  // f(w) = 0.5 sum_i lambda_i w_i^2, minimum at the origin, 10 dims.
  std::vector<double> lambda(10);
  RngStream lrng(5, 0, 0, 0);
  for (double& l : lambda) l = lrng.uniform(0.5, 1.5);

  struct Case {
    const char* name;
    double lr;
    int kind;
    double wd;
    bool agc;
  };
  const Case cases[] = {
      {"lamb-a3", 8e-3, 0, 0.02, false},
      {"sgd-c", 0.88, 1, 1e-5, true},
      {"rmsprop-b", 0.18, 2, 7e-6, false},
      {"adamp-d", 0.0033, 3, 0.01, false},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    Param p = vec_param(std::vector<double>(10), {10});
    RngStream wrng(6, 0, 0, 0);
    for (double& w : p.value) w = wrng.uniform(-0.5, 0.5);
    std::unique_ptr<Optimizer> opt;
    switch (c.kind) {
      case 0: {
        LambConfig cfg;
        cfg.weight_decay = c.wd;
        opt = make_lamb({&p}, cfg);
        break;
      }
      case 1: {
        SgdConfig cfg;
        cfg.weight_decay = c.wd;
        opt = make_sgd_nesterov({&p}, cfg);
        break;
      }
      case 2: {
        RmspropTfConfig cfg;
        cfg.weight_decay = c.wd;
        opt = make_rmsprop_tf({&p}, cfg);
        break;
      }
      case 3: {
        AdamPConfig cfg;
        cfg.weight_decay = c.wd;
        opt = make_adamp({&p}, cfg);
        break;
      }
    }
    const int steps = 2000;
    double gnorm = 0.0;
    for (int s = 0; s < steps; ++s) {
      gnorm = 0.0;
      for (std::size_t i = 0; i < 10; ++i) {
        p.grad[i] = lambda[i] * p.value[i];
        gnorm += p.grad[i] * p.grad[i];
      }
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-3) break;
      if (c.agc) agc_clip({&p}, {0.05, 1e-3});
      const double tau = static_cast<double>(s) / steps;
      const double lr = c.lr * (1.0 + std::cos(3.14159265358979 * tau)) / 2.0;
      opt->step(lr);
    }
    CHECK(gnorm < 1e-3);
  }
}

}  // TEST_SUITE
