#include "specfilt/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "specfilt/errors.hpp"

namespace specfilt {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0,1)");
  if (hidden < 1) throw ConfigError("hidden must be >= 1");
}

void AdamState::init(const std::vector<std::vector<double>>& params) {
  m.clear();
  v.clear();
  for (const auto& p : params) {
    m.emplace_back(p.size(), 0.0);
    v.emplace_back(p.size(), 0.0);
  }
  t = 0;
}

void adam_step(std::vector<std::vector<double>>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state, double lr,
               double weight_decay) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++state.t;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double g = grads[p][i] + weight_decay * params[p][i];
      state.m[p][i] = b1 * state.m[p][i] + (1.0 - b1) * g;
      state.v[p][i] = b2 * state.v[p][i] + (1.0 - b2) * g * g;
      const double mhat = state.m[p][i] / bc1;
      const double vhat = state.v[p][i] / bc2;
      params[p][i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::vector<std::vector<std::vector<double>>> basis_applied_vectors(const SparseMatrix& p,
                                                                    const SignalMatrix& x,
                                                                    const BasisKind& kind,
                                                                    int order) {
  const int n = x.n;
  const int d = x.d;
  std::vector<std::vector<std::vector<double>>> out(d);
  if (kind.tag == BasisTag::OptBasis) {
    auto vecs = precompute_basis(p, x, order);
    for (int l = 0; l < d; ++l) {
      out[l].resize(order + 1);
      for (int k = 0; k <= order; ++k)
        out[l][k].assign(vecs.vec(l, k).begin(), vecs.vec(l, k).end());
    }
    return out;
  }
  if (kind.tag == BasisTag::Bernstein) {
    const SparseMatrix lap = identity_plus_scaled(p, -1.0);
    const SparseMatrix two_minus_lap = identity_plus_scaled(p, +1.0);
    const double scale = std::pow(2.0, -order);
    for (int l = 0; l < d; ++l) {
      out[l].resize(order + 1);
      std::vector<std::vector<double>> powers(order + 1);
      powers[0].assign(x.col(l).begin(), x.col(l).end());
      for (int k = 1; k <= order; ++k) powers[k] = spmv(lap, powers[k - 1]);
      for (int k = 0; k <= order; ++k) {
        auto v = powers[k];
        for (int j = 0; j < order - k; ++j) v = spmv(two_minus_lap, v);
        const double c = binomial(order, k) * scale;
        for (double& e : v) e *= c;
        out[l][k] = std::move(v);
      }
    }
    return out;
  }
  if (kind.tag == BasisTag::Favard) {
    kind.favard.validate();
    if (kind.favard.order() < order)
      throw std::invalid_argument("basis_applied_vectors: favard recurrence shorter than order");
    for (int l = 0; l < d; ++l) {
      out[l].resize(order + 1);
      std::vector<double> gk(x.col(l).begin(), x.col(l).end());
      for (double& e : gk) e /= kind.favard.sqrt_beta[0];
      std::vector<double> gkm1(n, 0.0);
      out[l][0] = gk;
      for (int k = 0; k < order; ++k) {
        auto t = spmv(p, gk);
        for (int i = 0; i < n; ++i)
          t[i] = (t[i] - kind.favard.gamma[k] * gk[i] - kind.favard.sqrt_beta[k] * gkm1[i]) /
                 kind.favard.sqrt_beta[k + 1];
        gkm1.swap(gk);
        gk.swap(t);
        out[l][k + 1] = gk;
      }
    }
    return out;
  }
  const auto rec = named_recurrence(kind, order);
  if (!rec) throw std::invalid_argument("basis_applied_vectors: unsupported basis");
  for (int l = 0; l < d; ++l) {
    out[l].resize(order + 1);
    std::vector<double> gk(x.col(l).begin(), x.col(l).end());
    std::vector<double> gkm1(n, 0.0);
    out[l][0] = gk;
    for (int k = 0; k < order; ++k) {
      auto t = spmv(p, gk);
      for (int i = 0; i < n; ++i) t[i] = rec->a[k] * t[i] + rec->b[k] * gk[i] + rec->c[k] * gkm1[i];
      gkm1.swap(gk);
      gk.swap(t);
      out[l][k + 1] = gk;
    }
  }
  return out;
}

namespace {

/// Taped per-channel Favard recurrence; returns the node id of z.
int taped_favard_channel(Tape& tape, const SparseMatrix* p, int xcol, int alpha_id, int sb_id,
                         int gamma_id, int l, int order) {
  auto sb = [&](int k) {
    return tape.clamp_floor(tape.elem(sb_id, l * (order + 2) + k), kFavardSqrtBetaFloor);
  };
  int x0 = tape.scale(xcol, tape.recip(sb(0)));
  int z = tape.scale(x0, tape.elem(alpha_id, l * (order + 1)));
  int xk = x0, xkm1 = -1;
  for (int k = 0; k < order; ++k) {
    int t = tape.spmv_const(p, xk);
    t = tape.sub(t, tape.scale(xk, tape.elem(gamma_id, l * (order + 1) + k)));
    if (k > 0) t = tape.sub(t, tape.scale(xkm1, sb(k)));
    const int xk1 = tape.scale(t, tape.recip(sb(k + 1)));
    z = tape.add(z, tape.scale(xk1, tape.elem(alpha_id, l * (order + 1) + k + 1)));
    xkm1 = xk;
    xk = xk1;
  }
  return z;
}

/// Taped per-channel two-term Gram-Schmidt filtering (gradients flow into x).
int taped_optbasis_channel(Tape& tape, const SparseMatrix* p, int xcol, int alpha_id, int l,
                           int order) {
  int v0 = tape.scale(xcol, tape.recip(tape.clamp_floor(tape.norm(xcol), kOptBasisNormFloor)));
  int z = tape.scale(v0, tape.elem(alpha_id, l * (order + 1)));
  int vk = v0, vkm1 = -1;
  for (int k = 0; k < order; ++k) {
    int vs = tape.spmv_const(p, vk);
    int g = tape.dot(vs, vk);
    int vperp = tape.sub(vs, tape.scale(vk, g));
    if (k > 0) vperp = tape.sub(vperp, tape.scale(vkm1, tape.dot(vs, vkm1)));
    const int nn = tape.clamp_floor(tape.norm(vperp), kOptBasisNormFloor);
    const int vnext = tape.scale(vperp, tape.recip(nn));
    z = tape.add(z, tape.scale(vnext, tape.elem(alpha_id, l * (order + 1) + k + 1)));
    vkm1 = vk;
    vk = vnext;
  }
  return z;
}

/// Taped fixed-basis filtering for one channel (general recurrence or
/// Bernstein Horner); kind must not be Favard/OptBasis.
int taped_fixed_channel(Tape& tape, const SparseMatrix* p, const SparseMatrix* lap,
                        const SparseMatrix* two_minus_lap, int xcol, int alpha_id,
                        const BasisKind& kind, int l, int order) {
  if (kind.tag == BasisTag::Bernstein) {
    const double scale = std::pow(2.0, -order);
    std::vector<int> powers(order + 1);
    powers[0] = xcol;
    for (int k = 1; k <= order; ++k) powers[k] = tape.spmv_const(lap, powers[k - 1]);
    int acc = -1;
    for (int k = 0; k <= order; ++k) {
      if (k > 0) acc = tape.spmv_const(two_minus_lap, acc);
      const int coef = tape.scale_const(tape.elem(alpha_id, l * (order + 1) + k),
                                        binomial(order, k) * scale);
      const int term = tape.scale(powers[k], coef);
      acc = (acc < 0) ? term : tape.add(acc, term);
    }
    return acc;
  }
  const auto rec = named_recurrence(kind, order);
  int z = tape.scale(xcol, tape.elem(alpha_id, l * (order + 1)));
  int gk = xcol, gkm1 = -1;
  for (int k = 0; k < order; ++k) {
    int t = tape.scale_const(tape.spmv_const(p, gk), rec->a[k]);
    if (rec->b[k] != 0.0) t = tape.add(t, tape.scale_const(gk, rec->b[k]));
    if (k > 0 && rec->c[k] != 0.0) t = tape.add(t, tape.scale_const(gkm1, rec->c[k]));
    z = tape.add(z, tape.scale(t, tape.elem(alpha_id, l * (order + 1) + k + 1)));
    gkm1 = gk;
    gk = t;
  }
  return z;
}

struct SharedMatrices {
  SparseMatrix lap, two_minus_lap;
};

}  // namespace

TapedLoss make_filter_loss(const SparseMatrix& p, const SignalMatrix& x,
                           const SignalMatrix& y_target, const BasisKind& kind, int order) {
  if (x.n != y_target.n || x.d != y_target.d)
    throw std::invalid_argument("make_filter_loss: target shape mismatch");
  const int d = x.d;

  if (kind.tag == BasisTag::Favard) {
    // params: alpha d*(K+1), sqrt_beta d*(K+2), gamma d*(K+1)
    return [&p, x, y_target, d, order](const std::vector<std::vector<double>>& params,
                                       std::vector<std::vector<double>>* grads) -> double {
      Tape tape;
      const int alpha_id = tape.input(Tensor::column(params[0]));
      const int sb_id = tape.input(Tensor::column(params[1]));
      const int gamma_id = tape.input(Tensor::column(params[2]));
      int loss = -1;
      for (int l = 0; l < d; ++l) {
        const int xcol = tape.input(Tensor::column(x.col(l)));
        const int ycol = tape.input(Tensor::column(y_target.col(l)));
        const int z = taped_favard_channel(tape, &p, xcol, alpha_id, sb_id, gamma_id, l, order);
        const int ml = tape.mse(z, ycol);
        loss = (loss < 0) ? ml : tape.add(loss, ml);
      }
      if (grads) {
        tape.backward(loss);
        grads->assign(3, {});
        (*grads)[0] = tape.gradient(alpha_id).v;
        (*grads)[1] = tape.gradient(sb_id).v;
        (*grads)[2] = tape.gradient(gamma_id).v;
      }
      return tape.value(loss).v[0];
    };
  }

  // alpha-only bases: the basis-applied vectors are constants of the closure
  auto vectors = std::make_shared<std::vector<std::vector<std::vector<double>>>>(
      basis_applied_vectors(p, x, kind, order));
  return [vectors, y_target, d, order](const std::vector<std::vector<double>>& params,
                                       std::vector<std::vector<double>>* grads) -> double {
    Tape tape;
    const int alpha_id = tape.input(Tensor::column(params[0]));
    int loss = -1;
    for (int l = 0; l < d; ++l) {
      const int ycol = tape.input(Tensor::column(y_target.col(l)));
      int z = -1;
      for (int k = 0; k <= order; ++k) {
        const int term = tape.scale(tape.input(Tensor::column((*vectors)[l][k])),
                                    tape.elem(alpha_id, l * (order + 1) + k));
        z = (z < 0) ? term : tape.add(z, term);
      }
      const int ml = tape.mse(z, ycol);
      loss = (loss < 0) ? ml : tape.add(loss, ml);
    }
    if (grads) {
      tape.backward(loss);
      grads->assign(1, {});
      (*grads)[0] = tape.gradient(alpha_id).v;
    }
    return tape.value(loss).v[0];
  };
}

FilterLearnResult train_filter_learning(const SparseMatrix& p, const SignalMatrix& x,
                                        const SignalMatrix& y_target, const BasisKind& kind,
                                        int order, const TrainConfig& cfg, bool disable_stop) {
  cfg.validate();
  const int d = x.d;
  const bool favard = (kind.tag == BasisTag::Favard);

  FilterLearnResult res;
  res.params.assign(favard ? 3 : 1, {});
  res.params[0].assign(static_cast<std::size_t>(d) * (order + 1), 0.0);
  for (int l = 0; l < d; ++l) res.params[0][static_cast<std::size_t>(l) * (order + 1)] = 1.0;
  if (favard) {
    res.params[1].assign(static_cast<std::size_t>(d) * (order + 2), 1.0);
    res.params[2].assign(static_cast<std::size_t>(d) * (order + 1), 0.0);
  }

  const TapedLoss f = make_filter_loss(p, x, y_target, kind, order);

  AdamState adam;
  adam.init(res.params);
  std::vector<std::vector<double>> grads;
  double prev_loss = 0.0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double loss = f(res.params, &grads);
    if (!std::isfinite(loss)) {
      res.final_loss = loss;
      res.epochs_run = epoch;
      throw NumericalError("train_filter_learning: non-finite loss at epoch " +
                           std::to_string(epoch));
    }
    res.loss_curve.push_back(loss);
    if (!disable_stop && epoch > 0 && std::abs(loss - prev_loss) < cfg.loss_delta_stop) {
      res.stopped_early = true;
      break;
    }
    prev_loss = loss;
    adam_step(res.params, grads, adam, cfg.learning_rate, cfg.weight_decay);
  }
  res.epochs_run = static_cast<int>(res.loss_curve.size());
  res.final_loss = res.loss_curve.back();
  return res;
}

ClassifierModel make_classifier_model(const ClassifierData& data, const BasisKind& kind, int order,
                                      const TrainConfig& cfg, bool scaled,
                                      const BasisVectors* precomputed) {
  const int n = data.graph.n_nodes;
  const int f_dim = data.features.cols;
  const int n_classes = data.n_classes;
  const int d = scaled ? f_dim : cfg.hidden;
  const bool favard = (kind.tag == BasisTag::Favard);
  const bool optbasis = (kind.tag == BasisTag::OptBasis);
  if (scaled && !optbasis)
    throw ConfigError("scaled mode is only defined for the optimal basis");

  auto p = std::make_shared<SparseMatrix>(normalized_adjacency(data.graph));
  auto shared = std::make_shared<SharedMatrices>();
  if (kind.tag == BasisTag::Bernstein) {
    shared->lap = identity_plus_scaled(*p, -1.0);
    shared->two_minus_lap = identity_plus_scaled(*p, +1.0);
  }

  // Frozen basis vectors for the scaled path
  std::shared_ptr<BasisVectors> frozen;
  if (scaled) {
    if (precomputed) {
      frozen = std::make_shared<BasisVectors>(*precomputed);
    } else {
      SignalMatrix raw(n, f_dim);
      for (int l = 0; l < f_dim; ++l)
        for (int i = 0; i < n; ++i) raw.at(i, l) = data.features(i, l);
      frozen = std::make_shared<BasisVectors>(precompute_basis(*p, raw, order));
    }
    if (frozen->d != f_dim || frozen->order != order || frozen->n != n)
      throw DataError("precomputed basis vectors do not match the dataset shape");
  }

  ClassifierModel model;
  Rng init_rng(cfg.seed);
  auto glorot = [&init_rng](int fan_in, int fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& x : w) x = init_rng.uniform(-s, s);
    return w;
  };

  int idx_w0 = -1, idx_b0 = -1;
  if (!scaled) {
    idx_w0 = static_cast<int>(model.init_params.size());
    model.param_names.push_back("w0");
    model.init_params.push_back(glorot(f_dim, d));
    idx_b0 = static_cast<int>(model.init_params.size());
    model.param_names.push_back("b0");
    model.init_params.push_back(std::vector<double>(d, 0.0));
  }
  const int idx_alpha = static_cast<int>(model.init_params.size());
  model.param_names.push_back("alpha");
  {
    std::vector<double> a(static_cast<std::size_t>(d) * (order + 1), 0.0);
    for (int l = 0; l < d; ++l) a[static_cast<std::size_t>(l) * (order + 1)] = 1.0;
    model.init_params.push_back(std::move(a));
  }
  int idx_sb = -1, idx_gamma = -1;
  if (favard) {
    idx_sb = static_cast<int>(model.init_params.size());
    model.param_names.push_back("sqrt_beta");
    model.init_params.push_back(std::vector<double>(static_cast<std::size_t>(d) * (order + 2), 1.0));
    idx_gamma = static_cast<int>(model.init_params.size());
    model.param_names.push_back("gamma");
    model.init_params.push_back(std::vector<double>(static_cast<std::size_t>(d) * (order + 1), 0.0));
  }
  const int idx_w1 = static_cast<int>(model.init_params.size());
  model.param_names.push_back("w1");
  model.init_params.push_back(glorot(d, n_classes));
  const int idx_b1 = static_cast<int>(model.init_params.size());
  model.param_names.push_back("b1");
  model.init_params.push_back(std::vector<double>(n_classes, 0.0));

  const auto labels = data.labels;
  const auto features = data.features;
  const BasisKind kind_copy = kind;

  model.eval = [=](const std::vector<std::vector<double>>& params,
                   std::vector<std::vector<double>>* grads, const std::vector<int>& loss_idx,
                   std::uint64_t dropout_seed, double dropout_rate,
                   std::vector<int>* predictions) -> double {
    Tape tape;
    Rng drop_rng(dropout_seed);
    std::vector<int> param_ids(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor t = Tensor::column(params[i]);
      // matrix parameters keep their 2-D shape for dense_affine
      const int ii = static_cast<int>(i);
      int rr = 0, cc = 0;
      if (!scaled && ii == idx_w0) rr = f_dim, cc = d;
      if (!scaled && ii == idx_b0) rr = 1, cc = d;
      if (ii == idx_w1) rr = d, cc = n_classes;
      if (ii == idx_b1) rr = 1, cc = n_classes;
      if (rr > 0) {
        t.rows = rr;
        t.cols = cc;
      }
      param_ids[i] = tape.input(std::move(t));
    }

    std::vector<int> channels(d);
    if (!scaled) {
      Tensor feat(n, f_dim);
      feat.v = features.data;
      int xin = tape.input(std::move(feat));
      xin = tape.dropout(xin, dropout_rate, drop_rng);
      int h = tape.dense_affine(xin, param_ids[idx_w0], param_ids[idx_b0]);
      h = tape.relu(h);
      h = tape.dropout(h, dropout_rate, drop_rng);
      for (int l = 0; l < d; ++l) {
        const int xcol = tape.col(h, l);
        if (favard)
          channels[l] = taped_favard_channel(tape, p.get(), xcol, param_ids[idx_alpha],
                                             param_ids[idx_sb], param_ids[idx_gamma], l, order);
        else if (optbasis)
          channels[l] = taped_optbasis_channel(tape, p.get(), xcol, param_ids[idx_alpha], l, order);
        else
          channels[l] = taped_fixed_channel(tape, p.get(), &shared->lap, &shared->two_minus_lap,
                                            xcol, param_ids[idx_alpha], kind_copy, l, order);
      }
    } else {
      for (int l = 0; l < d; ++l) {
        int z = -1;
        for (int k = 0; k <= order; ++k) {
          const int term = tape.scale(tape.input(Tensor::column(frozen->vec(l, k))),
                                      tape.elem(param_ids[idx_alpha], l * (order + 1) + k));
          z = (z < 0) ? term : tape.add(z, term);
        }
        channels[l] = z;
      }
    }
    int z = tape.stack_cols(channels);
    z = tape.relu(z);
    z = tape.dropout(z, dropout_rate, drop_rng);
    const int logits = tape.dense_affine(z, param_ids[idx_w1], param_ids[idx_b1]);
    const int loss = tape.softmax_cross_entropy(logits, labels, loss_idx);

    if (predictions) {
      predictions->assign(n, 0);
      const Tensor& lv = tape.value(logits);
      for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < n_classes; ++j)
          if (lv.at(i, j) > lv.at(i, best)) best = j;  // ties: lowest index wins
        (*predictions)[i] = best;
      }
    }
    if (grads) {
      tape.backward(loss);
      grads->resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) (*grads)[i] = tape.gradient(param_ids[i]).v;
    }
    return tape.value(loss).v[0];
  };
  return model;
}

ClassifyResult train_node_classifier(const ClassifierData& data, const BasisKind& kind, int order,
                                     const TrainConfig& cfg, bool scaled,
                                     const BasisVectors* precomputed) {
  cfg.validate();
  if (data.train_idx.empty() || data.val_idx.empty() || data.test_idx.empty())
    throw DataError("train_node_classifier: missing split");
  auto model = make_classifier_model(data, kind, order, cfg, scaled, precomputed);

  auto params = model.init_params;
  AdamState adam;
  adam.init(params);

  ClassifyResult res;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_params = params;
  int since_best = 0;
  std::vector<std::vector<double>> grads;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const std::uint64_t ds = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch);
    const double train_loss = model.eval(params, &grads, data.train_idx, ds, cfg.dropout, nullptr);
    if (!std::isfinite(train_loss))
      throw NumericalError("train_node_classifier: non-finite loss at epoch " +
                           std::to_string(epoch));
    adam_step(params, grads, adam, cfg.learning_rate, cfg.weight_decay);

    const double val_loss = model.eval(params, nullptr, data.val_idx, 0, 0.0, nullptr);
    res.train_loss_curve.push_back(train_loss);
    res.val_loss_curve.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best_params = params;
      res.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  res.epochs_run = static_cast<int>(res.train_loss_curve.size());
  res.best_val_loss = best_val;

  std::vector<int> predictions;
  model.eval(best_params, nullptr, data.test_idx, 0, 0.0, &predictions);
  int correct = 0;
  for (int i : data.test_idx)
    if (predictions[i] == data.labels[i]) ++correct;
  res.test_accuracy = data.test_idx.empty()
                          ? 0.0
                          : static_cast<double>(correct) / static_cast<double>(data.test_idx.size());
  return res;
}

}  // namespace specfilt
