#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "specfilt/errors.hpp"
#include "specfilt/experiments.hpp"
#include "specfilt/oracle.hpp"
#include "specfilt/train.hpp"

using namespace specfilt;

namespace {

struct Fixture {
  Graph g;
  SparseMatrix p;
  SignalMatrix x, y;

  explicit Fixture(int n, int d, std::uint64_t seed) {
    Rng rng(seed);
    g = testutil::random_connected_graph(n, rng);
    p = normalized_adjacency(g);
    x = SignalMatrix(n, d);
    for (double& v : x.data) v = rng.normal();
    const Spectrum s = symmetric_eig(testutil::to_dense(p));
    y = SignalMatrix(n, d);
    for (int l = 0; l < d; ++l) {
      const auto yl = exact_filter(s, filter_function(FilterTag::LowPass), x.col(l));
      std::copy(yl.begin(), yl.end(), y.col(l).begin());
    }
  }
};

}  // namespace

TEST_CASE("adam matches a hand-computed first step") {
  std::vector<std::vector<double>> params{{1.0}};
  const std::vector<std::vector<double>> grads{{0.5}};
  AdamState st;
  st.init(params);
  adam_step(params, grads, st, 0.1, 0.0);
  // first step: mhat = g, vhat = g^2, delta = lr * g / (|g| + eps)
  CHECK(params[0][0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("weight decay enters through the gradient") {
  std::vector<std::vector<double>> pa{{2.0}}, pb{{2.0}};
  AdamState sa, sb;
  sa.init(pa);
  sb.init(pb);
  adam_step(pa, {{0.0}}, sa, 0.1, 0.5);   // g_eff = 1.0
  adam_step(pb, {{1.0}}, sb, 0.1, 0.0);   // g_eff = 1.0
  CHECK(pa[0][0] == doctest::Approx(pb[0][0]).epsilon(1e-14));
}

TEST_CASE("one-step optimality of the optimal basis from zero coefficients") {
  const Fixture f(24, 2, 41);
  const int order = 6;
  const auto loss_fn = make_filter_loss(f.p, f.x, f.y, BasisKind::opt_basis(), order);
  std::vector<std::vector<double>> params{std::vector<double>(2 * (order + 1), 0.0)};
  std::vector<std::vector<double>> grads;
  loss_fn(params, &grads);
  // identity-Hessian quadratic: alpha* = -grad at alpha = 0 with lr = 1
  for (std::size_t i = 0; i < params[0].size(); ++i) params[0][i] -= grads[0][i];
  loss_fn(params, &grads);
  double gnorm = 0;
  for (double v : grads[0]) gnorm += v * v;
  CHECK(std::sqrt(gnorm) <= 1e-8);
}

TEST_CASE("trained optimal basis reaches the normal-equation optimum") {
  const Fixture f(20, 2, 42);
  const int order = 5;
  TrainConfig cfg;
  cfg.max_epochs = 3000;  // run to convergence, not to the loss-delta stop
  const auto r = train_filter_learning(f.p, f.x, f.y, BasisKind::opt_basis(), order, cfg, true);
  // with V^T V = I the optimum is alpha* = V^T y, residual = ||y||^2 - ||V^T y||^2
  const BasisVectors v = precompute_basis(f.p, f.x, order);
  double opt_loss = 0;
  for (int l = 0; l < 2; ++l) {
    const auto yl = f.y.col(l);
    double yy = std::inner_product(yl.begin(), yl.end(), yl.begin(), 0.0);
    for (int k = 0; k <= order; ++k) {
      const auto vk = v.vec(l, k);
      const double c = std::inner_product(vk.begin(), vk.end(), yl.begin(), 0.0);
      yy -= c * c;
    }
    opt_loss += 0.5 * yy;
  }
  CHECK(r.final_loss - opt_loss <= 1e-4);
  CHECK(r.final_loss >= opt_loss - 1e-9);
}

TEST_CASE("loss-delta stop fires and can be disabled") {
  const Fixture f(12, 1, 43);
  TrainConfig cfg;
  cfg.max_epochs = 400;
  const auto stopped = train_filter_learning(f.p, f.x, f.y, BasisKind::opt_basis(), 4, cfg);
  CHECK(stopped.stopped_early);
  CHECK(stopped.epochs_run < 400);
  const auto full = train_filter_learning(f.p, f.x, f.y, BasisKind::opt_basis(), 4, cfg, true);
  CHECK(full.epochs_run == 400);
}

TEST_CASE("favard filter learning decreases the loss and is deterministic") {
  const Fixture f(16, 2, 44);
  TrainConfig cfg;
  cfg.max_epochs = 60;
  const auto a = train_filter_learning(f.p, f.x, f.y, BasisKind::favard_basis({}), 4, cfg);
  const auto b = train_filter_learning(f.p, f.x, f.y, BasisKind::favard_basis({}), 4, cfg);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.final_loss < a.loss_curve.front());
  CHECK(a.params.size() == 3);  // alpha, sqrt_beta, gamma all train
}

TEST_CASE("filter-loss gradients check out for every trainable basis") {
  const Fixture f(14, 2, 45);
  const int order = 3;
  Rng rng(46);
  for (const auto& kind :
       {BasisKind::monomial(), BasisKind::chebyshev(), BasisKind::bernstein(),
        BasisKind::opt_basis(), BasisKind::favard_basis({})}) {
    CAPTURE(kind.name());
    const auto loss_fn = make_filter_loss(f.p, f.x, f.y, kind, order);
    std::vector<std::vector<double>> params{std::vector<double>(2 * (order + 1))};
    for (double& v : params[0]) v = rng.normal() * 0.3;
    if (kind.tag == BasisTag::Favard) {
      params.push_back(std::vector<double>(2 * (order + 2)));
      params.push_back(std::vector<double>(2 * (order + 1)));
      for (double& v : params[1]) v = 0.8 + 0.4 * rng.uniform();
      for (double& v : params[2]) v = 0.2 * rng.normal();
    }
    CHECK(grad_check(loss_fn, params) <= 1e-4);
  }
}

TEST_CASE("classifier gradients check out, including through gram-schmidt") {
  Rng rng(47);
  auto ds = make_two_clique_fixture(5, 7);
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.seed = 9;
  const auto data = ds.with_split(0);
  for (const auto& kind : {BasisKind::opt_basis(), BasisKind::favard_basis({}),
                           BasisKind::monomial(), BasisKind::chebyshev(),
                           BasisKind::bernstein()}) {
    CAPTURE(kind.name());
    const auto model = make_classifier_model(data, kind, 3, cfg);
    TapedLoss f = [&](const std::vector<std::vector<double>>& params,
                      std::vector<std::vector<double>>* grads) {
      return model.eval(params, grads, data.train_idx, 0, 0.0, nullptr);
    };
    // check at a generic point: the init point parks relu inputs exactly on
    // their kinks (one-hot features, alpha = e_0), where finite differences
    // are meaningless
    auto params = model.init_params;
    for (auto& p : params)
      for (double& v : p) v += 0.05 * rng.normal();
    CHECK(grad_check(f, params) <= 1e-4);
  }
}

TEST_CASE("scaled-mode classifier gradients") {
  auto ds = make_two_clique_fixture(5, 7);
  TrainConfig cfg;
  cfg.seed = 3;
  const auto data = ds.with_split(0);
  const auto model = make_classifier_model(data, BasisKind::opt_basis(), 3, cfg, true);
  TapedLoss f = [&](const std::vector<std::vector<double>>& params,
                    std::vector<std::vector<double>>* grads) {
    return model.eval(params, grads, data.train_idx, 0, 0.0, nullptr);
  };
  Rng rng(12);
  auto params = model.init_params;
  for (auto& p : params)
    for (double& v : p) v += 0.05 * rng.normal();
  CHECK(grad_check(f, params) <= 1e-4);
}

TEST_CASE("classifier training is deterministic and early stopping respects patience") {
  auto ds = make_two_clique_fixture();
  const auto data = ds.with_split(0);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.max_epochs = 150;
  cfg.patience = 20;
  cfg.hidden = 8;
  cfg.dropout = 0.1;
  cfg.seed = 5;
  const auto a = train_node_classifier(data, BasisKind::opt_basis(), 4, cfg);
  const auto b = train_node_classifier(data, BasisKind::opt_basis(), 4, cfg);
  CHECK(a.train_loss_curve == b.train_loss_curve);
  CHECK(a.val_loss_curve == b.val_loss_curve);
  CHECK(a.test_accuracy == b.test_accuracy);
  CHECK(a.epochs_run <= cfg.max_epochs);
  CHECK(a.best_epoch >= a.epochs_run - cfg.patience - 1);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
