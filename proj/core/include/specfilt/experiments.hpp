#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "specfilt/basis.hpp"
#include "specfilt/eig.hpp"
#include "specfilt/filtering.hpp"
#include "specfilt/graph.hpp"
#include "specfilt/train.hpp"

namespace specfilt {

enum class FilterTag { Identity, LowPass, HighPass, BandPass, BandReject, Custom };

/// Spectral response h(lambda) on [0, 2]. Custom interpolates linearly
/// between equispaced samples on [0, 2].
struct FilterSpec {
  FilterTag tag = FilterTag::Identity;
  std::vector<double> lambda_samples;  // Custom only

  double operator()(double lambda) const;
  static FilterSpec of(FilterTag t) { return {t, {}}; }
};

std::function<double(double)> filter_function(FilterTag tag);
std::string filter_tag_name(FilterTag tag);

struct FilterLearningSample {
  SignalMatrix x;  // N x 3 inputs
  SignalMatrix y;  // N x 3 exact-filter targets
  std::array<FilterTag, 3> tags{};
};

struct FilterDataset {
  Graph graph;
  Spectrum spectrum;
  std::vector<FilterLearningSample> samples;
};

/// Three-channel filter combinations applied per base signal.
std::vector<std::array<FilterTag, 3>> default_filter_combinations();

/// Base signals are smooth seeded random fields: N(0,1) coefficients on the
/// lowest tenth of the Laplacian spectrum, min-max scaled to [0,1]; each
/// combination's responses are applied channelwise by exact spectral
/// filtering. Sample count = n_base_signals * |combinations|.
FilterDataset make_filter_dataset(int grid_h, int grid_w, int n_base_signals,
                                  const std::vector<std::array<FilterTag, 3>>& combinations,
                                  std::uint64_t seed);

struct SuiteBasisResult {
  std::string basis;
  double mean = 0.0;
  double stdv = 0.0;
  int n = 0;
  std::vector<double> sample_losses;
  std::vector<std::vector<double>> curves;  // per sample, per epoch
};

struct SuiteResult {
  std::vector<SuiteBasisResult> rows;  // in the order bases were given
};

/// Trains every (sample, basis) pair and aggregates mean/stdv of the final
/// losses. When out_dir is non-empty, writes curves_<basis>_<sample>.csv
/// (epoch,loss) and summary.csv (basis,mean,stdv,n).
SuiteResult run_filter_learning_suite(const FilterDataset& dataset,
                                      const std::vector<BasisKind>& bases, int order,
                                      const TrainConfig& cfg, const std::string& out_dir = "");

struct ConvergenceCurve {
  std::string basis;
  std::vector<double> losses;
  std::vector<int> bump_epochs;  // epochs where the loss increased
  double worst_increase = 0.0;
};

/// Stop criteria disabled, fixed epoch budget; marks every epoch-to-epoch
/// loss increase. Alpha-only bases descend by plain full-batch gradient
/// descent with a 1/lambda_max step (the quadratic's stable regime); the
/// learnable recurrence trains with the adaptive optimizer from cfg, whose
/// excursions are what the study exposes. Weight decay is disabled so the
/// recorded curve is the data loss being descended. Writes
/// curves_<basis>_<sample>.csv when out_dir is non-empty.
std::vector<ConvergenceCurve> run_convergence_study(const FilterDataset& dataset, int sample_index,
                                                    const std::vector<BasisKind>& bases, int order,
                                                    int epochs, const TrainConfig& cfg,
                                                    const std::string& out_dir = "");

struct OptimalityCase {
  int n = 0;
  std::map<std::string, double> kappa;  // basis name -> condition number
  double opt_kappa_deviation = 0.0;     // |kappa(OptBasis) - 1|
  double recurrence_dev_sqrt_beta = 0.0;
  double recurrence_dev_gamma = 0.0;
  double worst_lemma_gap = 0.0;
  bool pass = false;
};

struct OptimalityReport {
  std::vector<OptimalityCase> cases;
  double worst_opt_kappa_deviation = 0.0;
  double worst_recurrence_deviation = 0.0;
  bool all_pass = false;
};

/// Random connected graphs + random signals; per case the dense-spectrum
/// oracle computes the coefficient-learning Hessian condition number per
/// basis and checks the two-term recurrence against the Stieltjes
/// construction over the spectral weight measure.
OptimalityReport run_optimality_verification(int n_graphs, int n, int order, std::uint64_t seed);

struct SplitSet {
  std::vector<int> train, val, test;
};

struct ClassificationDataset {
  Graph graph;
  DenseMatrix features;
  std::vector<int> labels;
  std::vector<SplitSet> splits;
  int n_classes = 0;

  ClassifierData with_split(int i) const;
};

/// Directory layout: edges.txt, features.csv, labels.csv, splits.json
/// (either one {"train":[],"val":[],"test":[]} object or a list of them).
/// Errors name the offending file and row. With require_splits=false a
/// missing splits.json leaves `splits` empty instead of erroring.
ClassificationDataset load_classification_dataset(const std::string& dir,
                                                  bool require_splits = true);

/// Seeded shuffle split by fractions (remainder goes to test).
SplitSet make_random_split(int n, double train_frac, double val_frac, std::uint64_t seed);

/// Two cliques of different sizes joined by a single bridge edge, labeled by
/// clique; features are one-hot encodings of node degree, which separate the
/// classes exactly. Fixed train/val/test split with the bridge nodes in train.
ClassificationDataset make_two_clique_fixture(int size_a = 10, int size_b = 13);

}  // namespace specfilt
