#pragma once

#include <map>
#include <string>
#include <vector>

#include "specfilt/basis.hpp"
#include "specfilt/filtering.hpp"
#include "specfilt/graph.hpp"
#include "specfilt/tape.hpp"

namespace specfilt {

struct TrainConfig {
  double learning_rate = 0.1;
  double weight_decay = 5e-4;
  int max_epochs = 500;
  double loss_delta_stop = 1e-4;  // |loss_t - loss_{t-1}| on training loss
  int patience = 300;             // early stopping, classification only
  std::uint64_t seed = 0;
  double dropout = 0.0;
  int hidden = 64;

  void validate() const;
};

/// Classic Adam with additive L2 on the gradient.
struct AdamState {
  std::vector<std::vector<double>> m, v;
  long t = 0;

  void init(const std::vector<std::vector<double>>& params);
};

void adam_step(std::vector<std::vector<double>>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state, double lr,
               double weight_decay);

struct FilterLearnResult {
  std::vector<double> loss_curve;  // per epoch
  double final_loss = 0.0;
  int epochs_run = 0;
  bool stopped_early = false;
  std::vector<std::vector<double>> params;  // alpha [, sqrt_beta, gamma]
};

/// Coefficient learning for 0.5 * ||Z - Y||_F^2. Fixed bases and the optimal
/// basis train alpha only; Favard also trains (sqrt_beta, gamma) through the
/// recurrence on the tape. `disable_stop` runs the full epoch budget
/// (the long-horizon convergence study).
FilterLearnResult train_filter_learning(const SparseMatrix& p, const SignalMatrix& x,
                                        const SignalMatrix& y_target, const BasisKind& kind,
                                        int order, const TrainConfig& cfg,
                                        bool disable_stop = false);

/// Per-channel basis-applied vectors w_k = g_k(P) x_l for a fixed basis, or
/// the optimal-basis vectors when kind is OptBasis. [l][k] is an N-vector.
std::vector<std::vector<std::vector<double>>> basis_applied_vectors(const SparseMatrix& p,
                                                                    const SignalMatrix& x,
                                                                    const BasisKind& kind,
                                                                    int order);

/// Taped loss for the filter-learning objective; parameter layout matches
/// FilterLearnResult::params. Used by grad_check and the Favard trainer.
TapedLoss make_filter_loss(const SparseMatrix& p, const SignalMatrix& x,
                           const SignalMatrix& y_target, const BasisKind& kind, int order);

struct ClassifierData {
  Graph graph;
  DenseMatrix features;       // N x F
  std::vector<int> labels;    // contiguous from 0
  std::vector<int> train_idx, val_idx, test_idx;
  int n_classes = 0;
};

struct ClassifyResult {
  int best_epoch = -1;
  double best_val_loss = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> train_loss_curve;
  std::vector<double> val_loss_curve;
  int epochs_run = 0;
};

/// Full pipeline of the classification model: dropout -> affine -> relu ->
/// dropout -> filtering -> relu -> dropout -> affine -> softmax cross
/// entropy on the train split. Early stopping on validation loss.
/// `precomputed` switches the optimal-basis scaled mode: filtering raw
/// features with frozen basis vectors (computed in-process when null data
/// pointer but scaled=true).
ClassifyResult train_node_classifier(const ClassifierData& data, const BasisKind& kind, int order,
                                     const TrainConfig& cfg, bool scaled = false,
                                     const BasisVectors* precomputed = nullptr);

/// Taped classifier loss over an index set; parameters in registry order.
/// Exposed for gradient checking of every model configuration.
struct ClassifierModel {
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> init_params;
  /// dropout_seed chooses the mask stream; the losses for train/val/test
  /// splits are built from the same forward pass
  std::function<double(const std::vector<std::vector<double>>& params,
                       std::vector<std::vector<double>>* grads, const std::vector<int>& loss_idx,
                       std::uint64_t dropout_seed, double dropout_rate,
                       std::vector<int>* predictions)>
      eval;
};

ClassifierModel make_classifier_model(const ClassifierData& data, const BasisKind& kind, int order,
                                      const TrainConfig& cfg, bool scaled = false,
                                      const BasisVectors* precomputed = nullptr);

}  // namespace specfilt
