#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "specfilt/errors.hpp"
#include "specfilt/experiments.hpp"
#include "specfilt/io.hpp"
#include "specfilt/oracle.hpp"
#include "specfilt/train.hpp"

using nlohmann::json;
using namespace specfilt;

namespace {

constexpr int kSchemaVersion = 1;

// exit taxonomy: 0 ok, 1 verification failure, 2 config/usage, 3 data, 4 numerical
struct ExitCode {
  static constexpr int ok = 0, verify_fail = 1, config = 2, data = 3, numerical = 4;
};

/// Config file values, overridden afterwards by any flag the user passed.
json load_config(const std::string& path, const std::set<std::string>& allowed) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kSchemaVersion)
    throw ConfigError("config needs \"schema_version\": " + std::to_string(kSchemaVersion));
  for (const auto& [key, _] : j.items())
    if (key != "schema_version" && !allowed.count(key))
      throw ConfigError("unknown config key: " + key);
  return j;
}

template <typename T>
void cfg_override(const json& j, const std::string& key, const CLI::Option* opt, T& value) {
  if (j.contains(key) && opt->count() == 0) value = j[key].get<T>();
}

std::vector<BasisKind> parse_bases(const std::string& csv) {
  std::vector<BasisKind> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    // jacobi(a,b) contains a comma; split only outside parentheses
    int depth = 0;
    std::size_t end = pos;
    while (end < csv.size() && (csv[end] != ',' || depth > 0)) {
      if (csv[end] == '(') ++depth;
      if (csv[end] == ')') --depth;
      ++end;
    }
    const std::string tok = csv.substr(pos, end - pos);
    if (!tok.empty()) out.push_back(parse_basis(tok));
    if (end >= csv.size()) break;
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("no bases given");
  return out;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SPECFILT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

json report_case(const OptimalityCase& c) {
  json k = json::object();
  for (const auto& [name, kappa] : c.kappa) k[name] = kappa;
  return {{"n", c.n},
          {"kappa", k},
          {"opt_kappa_deviation", c.opt_kappa_deviation},
          {"recurrence_dev_sqrt_beta", c.recurrence_dev_sqrt_beta},
          {"recurrence_dev_gamma", c.recurrence_dev_gamma},
          {"worst_lemma_gap", c.worst_lemma_gap},
          {"pass", c.pass}};
}

int cmd_filter_learn(const std::string& config_path, std::string bases_csv, int order, int grid_h,
                     int grid_w, int n_base, std::uint64_t seed, TrainConfig tc,
                     std::string out_dir, const std::map<std::string, const CLI::Option*>& opts) {
  if (!config_path.empty()) {
    const json j = load_config(
        config_path, {"command", "bases", "K", "grid_h", "grid_w", "n_base", "seed",
                      "learning_rate", "weight_decay", "max_epochs", "out"});
    if (j.contains("command") && j["command"].get<std::string>() != "filter-learn")
      throw ConfigError("config is for a different command");
    cfg_override(j, "bases", opts.at("bases"), bases_csv);
    cfg_override(j, "K", opts.at("K"), order);
    cfg_override(j, "grid_h", opts.at("grid_h"), grid_h);
    cfg_override(j, "grid_w", opts.at("grid_w"), grid_w);
    cfg_override(j, "n_base", opts.at("n_base"), n_base);
    cfg_override(j, "seed", opts.at("seed"), seed);
    cfg_override(j, "learning_rate", opts.at("lr"), tc.learning_rate);
    cfg_override(j, "weight_decay", opts.at("wd"), tc.weight_decay);
    cfg_override(j, "max_epochs", opts.at("epochs"), tc.max_epochs);
    cfg_override(j, "out", opts.at("out"), out_dir);
  }
  if (order < 0) throw ConfigError("--K is required (non-negative truncation order)");
  const auto bases = parse_bases(bases_csv);
  tc.seed = seed;
  const auto ds = make_filter_dataset(grid_h, grid_w, n_base, default_filter_combinations(), seed);
  const auto res = run_filter_learning_suite(ds, bases, order, tc, out_dir);
  for (const auto& row : res.rows)
    std::cout << row.basis << ": mean " << fmt17(row.mean) << " stdv " << fmt17(row.stdv)
              << " (n=" << row.n << ")\n";
  return ExitCode::ok;
}

int cmd_verify(int n_graphs, int n, int order, std::uint64_t seed, const std::string& out_path) {
  const auto rep = run_optimality_verification(n_graphs, n, order, seed);
  json j = {{"schema_version", kSchemaVersion},
            {"all_pass", rep.all_pass},
            {"worst_kappa_deviation", rep.worst_opt_kappa_deviation},
            {"worst_recurrence_deviation", rep.worst_recurrence_deviation},
            {"cases", json::array()}};
  for (const auto& c : rep.cases) j["cases"].push_back(report_case(c));
  write_text_file(out_path, j.dump(2) + "\n");
  std::cout << (rep.all_pass ? "verify: all checks passed\n" : "verify: FAILURES (see report)\n");
  return rep.all_pass ? ExitCode::ok : ExitCode::verify_fail;
}

int cmd_classify(const std::string& data_dir, bool toy, const std::string& model, int order,
                 TrainConfig tc, bool scaled, const std::string& precomputed_path,
                 bool random_split, const std::string& out_path) {
  ClassificationDataset ds;
  if (toy) {
    ds = make_two_clique_fixture();
  } else {
    if (data_dir.empty()) throw ConfigError("pass --data-dir or --toy");
    if (random_split) {
      ds = load_classification_dataset(data_dir, /*require_splits=*/false);
      ds.splits = {make_random_split(ds.graph.n_nodes, 0.6, 0.2, tc.seed)};
    } else {
      ds = load_classification_dataset(data_dir);
    }
  }
  const BasisKind kind = parse_basis(model);

  std::optional<BasisVectors> pre;
  bool use_scaled = scaled;
  if (!precomputed_path.empty()) {
    pre = load_basis_vectors(precomputed_path, graph_hash(ds.graph));
    use_scaled = true;
  }
  if (use_scaled && kind.tag != BasisTag::OptBasis)
    throw ConfigError("precomputed/scaled mode requires --model optbasis");

  json splits_out = json::array();
  for (std::size_t s = 0; s < ds.splits.size(); ++s) {
    const auto data = ds.with_split(static_cast<int>(s));
    const auto r =
        train_node_classifier(data, kind, order, tc, use_scaled, pre ? &*pre : nullptr);
    splits_out.push_back({{"split", s},
                          {"best_val_epoch", r.best_epoch},
                          {"best_val_loss", r.best_val_loss},
                          {"test_accuracy", r.test_accuracy},
                          {"epochs_run", r.epochs_run}});
    std::cout << "split " << s << ": test accuracy " << fmt17(r.test_accuracy)
              << " (best val epoch " << r.best_epoch << ")\n";
  }
  const json j = {{"schema_version", kSchemaVersion}, {"model", model}, {"K", order},
                  {"splits", splits_out}};
  write_text_file(out_path, j.dump(2) + "\n");
  return ExitCode::ok;
}

int cmd_precompute(const std::string& data_dir, bool toy, int order, const std::string& out_path) {
  ClassificationDataset ds = toy ? make_two_clique_fixture() : load_classification_dataset(data_dir);
  const SparseMatrix p = normalized_adjacency(ds.graph);
  SignalMatrix x(ds.graph.n_nodes, ds.features.cols);
  for (int l = 0; l < ds.features.cols; ++l)
    for (int i = 0; i < ds.graph.n_nodes; ++i) x.at(i, l) = ds.features(i, l);
  BasisVectors v = precompute_basis(p, x, order);
  v.graph_hash_value = graph_hash(ds.graph);
  save_basis_vectors(v, out_path);
  std::cout << "wrote " << out_path << " (" << v.d << " channels, order " << v.order << ")\n";
  return ExitCode::ok;
}

int cmd_spectrum(const std::string& graph_path, const std::string& out_path) {
  const Graph g = load_edge_list(graph_path);
  EigOptions opts;
  if (g.n_nodes > opts.max_n)
    throw ConfigError("graph has " + std::to_string(g.n_nodes) +
                      " nodes; the dense spectrum path is capped at " +
                      std::to_string(opts.max_n));
  const SparseMatrix p = normalized_adjacency(g);
  DenseMatrix pd(g.n_nodes, g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i)
    for (int j = 0; j < g.n_nodes; ++j) pd(i, j) = p.at(i, j);
  const Spectrum s = symmetric_eig(pd);
  std::string csv = "index,mu,lambda\n";
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    csv += std::to_string(i) + "," + fmt17(s.eigenvalues[i]) + "," +
           fmt17(1.0 - s.eigenvalues[i]) + "\n";
  write_text_file(out_path, csv);
  std::cout << "wrote " << out_path << "\n";
  return ExitCode::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral polynomial graph filtering toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "cap on internal parallelism (env SPECFILT_THREADS)");

  // filter-learn
  auto* fl = app.add_subcommand("filter-learn", "channelwise filter learning suite");
  std::string fl_config, fl_bases = "optbasis,monomial,chebyshev,bernstein,favard";
  std::string fl_out = "out";
  int fl_k = -1, fl_gh = 24, fl_gw = 24, fl_nbase = 15;
  std::uint64_t fl_seed = 0;
  TrainConfig fl_tc;
  std::map<std::string, const CLI::Option*> fl_opts;
  fl->add_option("--config", fl_config, "JSON config; explicit flags win");
  fl_opts["bases"] = fl->add_option("--bases", fl_bases, "comma-separated basis list");
  fl_opts["K"] = fl->add_option("--K", fl_k, "truncation order");
  fl_opts["grid_h"] = fl->add_option("--grid-h", fl_gh, "grid height");
  fl_opts["grid_w"] = fl->add_option("--grid-w", fl_gw, "grid width");
  fl_opts["n_base"] = fl->add_option("--n-base", fl_nbase, "base signals");
  fl_opts["seed"] = fl->add_option("--seed", fl_seed, "dataset + training seed");
  fl_opts["lr"] = fl->add_option("--lr", fl_tc.learning_rate, "learning rate");
  fl_opts["wd"] = fl->add_option("--wd", fl_tc.weight_decay, "weight decay");
  fl_opts["epochs"] = fl->add_option("--epochs", fl_tc.max_epochs, "max epochs");
  fl_opts["out"] = fl->add_option("--out", fl_out, "output directory");

  // verify
  auto* vf = app.add_subcommand("verify", "optimality + recurrence verification report");
  int vf_graphs = 5, vf_n = 16, vf_k = 5;
  std::uint64_t vf_seed = 0;
  std::string vf_out = "report.json";
  vf->add_option("--n-graphs", vf_graphs, "random graphs to check");
  vf->add_option("--n", vf_n, "nodes per graph");
  vf->add_option("--K", vf_k, "truncation order");
  vf->add_option("--seed", vf_seed, "seed");
  vf->add_option("--out", vf_out, "report path");

  // classify
  auto* cl = app.add_subcommand("classify", "node classification");
  std::string cl_dir, cl_model = "optbasis", cl_pre, cl_out = "metrics.json";
  bool cl_toy = false, cl_scaled = false, cl_random_split = false;
  int cl_k = 8;
  TrainConfig cl_tc;
  cl_tc.learning_rate = 0.01;
  cl->add_option("--data-dir", cl_dir, "dataset directory");
  cl->add_flag("--toy", cl_toy, "built-in two-clique fixture");
  cl->add_option("--model", cl_model, "basis kind");
  cl->add_option("--K", cl_k, "truncation order");
  cl->add_option("--lr", cl_tc.learning_rate, "learning rate");
  cl->add_option("--wd", cl_tc.weight_decay, "weight decay");
  cl->add_option("--epochs", cl_tc.max_epochs, "max epochs");
  cl->add_option("--hidden", cl_tc.hidden, "hidden width");
  cl->add_option("--dropout", cl_tc.dropout, "dropout rate");
  cl->add_option("--patience", cl_tc.patience, "early-stopping patience");
  cl->add_option("--seed", cl_tc.seed, "seed");
  cl->add_flag("--scaled", cl_scaled, "filter raw features with frozen optimal-basis vectors");
  cl->add_option("--use-precomputed", cl_pre, "basis-vector file from `precompute`");
  cl->add_flag("--random-split", cl_random_split, "seeded 60/20/20 split instead of splits.json");
  cl->add_option("--out", cl_out, "metrics path");

  // precompute
  auto* pc = app.add_subcommand("precompute", "materialize optimal-basis vectors");
  std::string pc_dir, pc_out = "basis.bin";
  bool pc_toy = false;
  int pc_k = 8;
  pc->add_option("--data-dir", pc_dir, "dataset directory");
  pc->add_flag("--toy", pc_toy, "built-in two-clique fixture");
  pc->add_option("--K", pc_k, "truncation order");
  pc->add_option("--out", pc_out, "output file");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "dense eigenvalues of the normalized adjacency");
  std::string sp_graph, sp_out = "spectrum.csv";
  sp->add_option("--graph", sp_graph, "edge-list file")->required();
  sp->add_option("--out", sp_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ExitCode::config;
  }

  (void)resolve_threads(threads);  // accepted; the toolkit is single-threaded today

  try {
    if (fl->parsed())
      return cmd_filter_learn(fl_config, fl_bases, fl_k, fl_gh, fl_gw, fl_nbase, fl_seed, fl_tc,
                              fl_out, fl_opts);
    if (vf->parsed()) return cmd_verify(vf_graphs, vf_n, vf_k, vf_seed, vf_out);
    if (cl->parsed())
      return cmd_classify(cl_dir, cl_toy, cl_model, cl_k, cl_tc, cl_scaled, cl_pre,
                          cl_random_split, cl_out);
    if (pc->parsed()) {
      if (!pc_toy && pc_dir.empty()) throw ConfigError("pass --data-dir or --toy");
      return cmd_precompute(pc_dir, pc_toy, pc_k, pc_out);
    }
    if (sp->parsed()) return cmd_spectrum(sp_graph, sp_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ExitCode::config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return ExitCode::config;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return ExitCode::data;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return ExitCode::numerical;
  }
  return ExitCode::config;
}
