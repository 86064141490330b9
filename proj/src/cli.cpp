#include "duat/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "duat/binary_io.hpp"
#include "duat/corpus.hpp"
#include "duat/dataset.hpp"
#include "duat/graph.hpp"
#include "duat/metrics.hpp"
#include "duat/train.hpp"

namespace duat::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

struct DataFlags {
  std::string graph;
  std::string docs;
  std::string features = "one-hot";
  std::string features_file;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--graph", f.graph, "Graph file written by build-graph")->required();
  cmd->add_option("--docs", f.docs, "Document table (id, split, label); defaults to <graph>.docs.tsv");
  cmd->add_option("--features", f.features, "Node features")->check(CLI::IsMember({"one-hot", "file"}));
  cmd->add_option("--features-file", f.features_file, "Feature matrix used with --features file (default: none)");
}

struct TrainFlags {
  TrainConfig config;
  std::string activation = "elu";
  bool fixed_batches = false;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_hops) {
  TrainConfig& c = f.config;
  cmd->add_option("--heads", c.heads, "Attention heads");
  cmd->add_option("--dim", c.head_dim, "Per-head output width");
  if (with_hops) cmd->add_option("--hops", c.hops, "Hop count (1..3)");
  cmd->add_option("--fanout", c.fanout, "Neighbors drawn per node and hop");
  cmd->add_option("--lr", c.lr, "Learning rate");
  cmd->add_option("--dropout", c.dropout, "Dropout rate on inputs and attention");
  cmd->add_option("--momentum", c.momentum, "Momentum coefficient");
  cmd->add_option("--epochs", c.epochs, "Training epochs");
  cmd->add_option("--l2", c.l2, "L2 penalty coefficient");
  cmd->add_option("--batch-size", c.batch_size, "Train documents per batch");
  cmd->add_option("--subgraph-size", c.subgraph_size, "Distinct-node cap per batch (0 = none)");
  cmd->add_option("--leaky-slope", c.leaky_slope, "LeakyReLU negative slope");
  cmd->add_option("--activation", f.activation, "Hop activation")->check(CLI::IsMember({"elu", "identity"}));
  cmd->add_option("--val-frac", c.val_frac, "Train fraction held out for validation");
  cmd->add_option("--eval-batch-size", c.eval_batch_size, "Centers per evaluation batch");
  cmd->add_flag("--fixed-batches", f.fixed_batches, "Reuse the first epoch's batch order and samples (default: off)");
  cmd->add_flag("--record-time", c.record_time, "Record wall seconds per epoch, else write 0 (default: off)");
}

void add_seed_flag(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "Random seed")->envname("DUAT_SEED");
}

TrainConfig finish(TrainFlags& f) {
  f.config.activation = f.activation == "identity" ? Activation::identity : Activation::elu;
  f.config.resample_each_epoch = !f.fixed_batches;
  try {
    f.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--") + e.what());
  }
  return f.config;
}

Dataset load_dataset(const DataFlags& f) {
  if (f.features == "file" && f.features_file.empty()) {
    throw UsageError("--features-file: required with --features file");
  }
  Dataset d;
  d.graph = load_graph(f.graph);
  d.documents = load_document_table(f.docs.empty() ? f.graph + ".docs.tsv" : f.docs);
  d.features = f.features == "file" ? FeatureMatrix::load_text(f.features_file)
                                    : FeatureMatrix::identity(d.graph.num_nodes());
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return d;
}

template <class T>
std::vector<T> parse_list(const std::string& flag, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<T>(v));
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

void write_lines(const std::string& path, const std::vector<nlohmann::ordered_json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

// Subcommand bodies.

struct BuildFlags {
  std::string texts, meta, out, stop_words;
  std::size_t window = 20;
  std::size_t min_freq = 5;
};

int build_graph_cmd(const BuildFlags& f, std::ostream& out) {
  if (f.window < 1) throw UsageError("--window: must be >= 1");
  const CleaningRules rules = f.stop_words.empty() ? CleaningRules::english()
                                                   : CleaningRules::with_stop_word_file(f.stop_words);
  const Corpus corpus = load_corpus(f.texts, f.meta, rules, f.min_freq);
  const Dataset d = build_dataset(corpus, f.window);
  save_graph(d.graph, f.out);
  save_document_table(d.documents, f.out + ".docs.tsv");
  {
    std::ofstream vocab(f.out + ".vocab.txt", std::ios::trunc);
    for (std::size_t w = 0; w < corpus.vocabulary.size(); ++w) vocab << corpus.vocabulary.word(w) << '\n';
    if (!vocab) throw DataError("write failed: " + f.out + ".vocab.txt");
  }
  std::size_t word_edges = 0, doc_edges = 0;
  for (NodeId n = 0; n < d.graph.num_nodes(); ++n) {
    for (const auto& nb : d.graph.neighbors(n)) {
      if (nb.id == n) continue;
      (d.graph.is_doc(n) || d.graph.is_doc(nb.id) ? doc_edges : word_edges)++;
    }
  }
  out << "documents " << d.graph.num_docs() << " (train " << d.documents.ids(Split::train).size() << ", test "
      << d.documents.ids(Split::test).size() << ")\n"
      << "words " << d.graph.num_words() << "\n"
      << "nodes " << d.graph.num_nodes() << "\n"
      << "classes " << d.documents.num_classes() << "\n"
      << "word-word edges " << word_edges / 2 << "\n"
      << "doc-word edges " << doc_edges / 2 << "\n"
      << "wrote " << f.out << "\n";
  return kOk;
}

int train_cmd(TrainFlags& tf, const DataFlags& df, const std::string& arm, const std::string& metrics,
              const std::string& model_out, std::ostream& out) {
  tf.config.arm = arm == "plain" ? Arm::plain_convolution : Arm::dual_attention;
  const TrainConfig config = finish(tf);
  const Dataset data = load_dataset(df);
  auto result = train(config, data);
  if (!metrics.empty()) write_metrics(result.history, metrics);
  if (!model_out.empty()) save_model(result.model, model_out);
  const auto& last = result.history.back();
  out << std::fixed << std::setprecision(4) << "epochs " << result.history.size() << "  train_loss " << last.train_loss
      << "  train_acc " << last.train_acc << "  test_acc " << last.test_acc << "\n";
  if (result.val_acc) out << "val_acc " << *result.val_acc << "\n";
  return kOk;
}

int eval_cmd(const DataFlags& df, const std::string& model_path, const std::string& split, std::size_t fanout,
             std::uint64_t seed, std::ostream& out) {
  if (fanout < 1) throw UsageError("--fanout: must be >= 1");
  const Dataset data = load_dataset(df);
  const DualAttentionModel model = load_model(model_path);
  const Split s = split == "train" ? Split::train : Split::test;
  const auto ids = data.documents.ids(s);
  if (ids.empty()) throw DataError("split '" + split + "' has no documents");
  const double acc = evaluate(model, data, ids, EvalOptions{fanout, seed + 1, 256});
  out << std::fixed << std::setprecision(4) << split << "_acc " << acc << " (" << ids.size() << " documents)\n";
  return kOk;
}

int sweep_cmd(TrainFlags& tf, const DataFlags& df, const std::string& hops_text, const std::string& out_path,
              std::ostream& out) {
  const auto hops = parse_list<std::size_t>("--hops", hops_text);
  for (auto k : hops) {
    if (k < 1 || k > 3) throw UsageError("--hops: " + std::to_string(k) + " is not in 1..3");
  }
  tf.config.hops = *std::max_element(hops.begin(), hops.end());
  const TrainConfig config = finish(tf);
  const Dataset data = load_dataset(df);
  const auto rows = hop_sweep(config, data, hops);
  std::vector<nlohmann::ordered_json> json;
  out << "hops  train_acc  test_acc\n" << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << std::setw(4) << r.hops << "  " << std::setw(9) << r.train_acc << "  " << std::setw(8) << r.test_acc << "\n";
    nlohmann::ordered_json j;
    j["hops"] = r.hops;
    j["fanout"] = config.fanout;
    j["train_acc"] = r.train_acc;
    j["test_acc"] = r.test_acc;
    j["train_loss"] = r.train_loss;
    json.push_back(j);
  }
  if (!out_path.empty()) write_lines(out_path, json);
  return kOk;
}

int ablate_cmd(TrainFlags& tf, const DataFlags& df, const std::string& seeds_text, const std::string& out_path,
               std::ostream& out) {
  const auto seeds = parse_list<std::uint64_t>("--seeds", seeds_text);
  const TrainConfig config = finish(tf);
  const Dataset data = load_dataset(df);
  const auto report = ablate(config, data, seeds);
  std::vector<nlohmann::ordered_json> json;
  out << "seed  dual_acc  plain_acc\n" << std::fixed << std::setprecision(4);
  for (const auto& r : report.rows) {
    out << std::setw(4) << r.seed << "  " << std::setw(8) << r.dual_acc << "  " << std::setw(9) << r.plain_acc << "\n";
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["dual_acc"] = r.dual_acc;
    j["plain_acc"] = r.plain_acc;
    json.push_back(j);
  }
  out << "mean  " << std::setw(8) << report.mean_dual << "  " << std::setw(9) << report.mean_plain << "\n";
  nlohmann::ordered_json mean;
  mean["mean_dual"] = report.mean_dual;
  mean["mean_plain"] = report.mean_plain;
  json.push_back(mean);
  if (!out_path.empty()) write_lines(out_path, json);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-attention graph text classifier", "duat"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "duat 1.0.0");

  BuildFlags bf;
  auto* build = app.add_subcommand("build-graph", "Build the document/word graph from a corpus");
  build->add_option("--texts", bf.texts, "Corpus texts, one document per line")->required();
  build->add_option("--meta", bf.meta, "Meta lines: id<TAB>split<TAB>label")->required();
  build->add_option("--out", bf.out, "Output graph file")->required();
  build->add_option("--window", bf.window, "Sliding window size");
  build->add_option("--min-freq", bf.min_freq, "Minimum document frequency for a word");
  build->add_option("--stop-words", bf.stop_words, "Stop-word file, one per line (default: bundled English list)");

  TrainFlags train_flags;
  DataFlags train_data;
  std::string arm = "dual", metrics, model_out;
  auto* train_sub = app.add_subcommand("train", "Train a model on a built graph");
  add_data_flags(train_sub, train_data);
  add_train_flags(train_sub, train_flags, true);
  add_seed_flag(train_sub, train_flags.config.seed);
  train_sub->add_option("--arm", arm, "Model arm")->check(CLI::IsMember({"dual", "plain"}));
  train_sub->add_option("--metrics", metrics, "JSON-lines metrics output (default: none)");
  train_sub->add_option("--model-out", model_out, "Model checkpoint output (default: none)");

  DataFlags eval_data;
  std::string model_path, split = "test";
  std::size_t eval_fanout = 70;
  std::uint64_t eval_seed = 0;
  auto* eval_sub = app.add_subcommand("eval", "Score a saved model on one split");
  add_data_flags(eval_sub, eval_data);
  eval_sub->add_option("--model", model_path, "Model checkpoint")->required();
  eval_sub->add_option("--split", split, "Split to score")->check(CLI::IsMember({"train", "test"}));
  eval_sub->add_option("--fanout", eval_fanout, "Neighbors drawn per node and hop");
  add_seed_flag(eval_sub, eval_seed);

  TrainFlags sweep_flags;
  sweep_flags.config.fanout = 10;
  DataFlags sweep_data;
  std::string sweep_hops = "1,2,3", sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Train one model per hop count");
  add_data_flags(sweep, sweep_data);
  add_train_flags(sweep, sweep_flags, false);
  add_seed_flag(sweep, sweep_flags.config.seed);
  sweep->add_option("--hops", sweep_hops, "Comma-separated hop counts");
  sweep->add_option("--out", sweep_out, "JSON-lines table output (default: none)");

  TrainFlags ablate_flags;
  DataFlags ablate_data;
  std::string seeds = "0,1,2,3,4", ablate_out;
  auto* abl = app.add_subcommand("ablate", "Compare dual attention with plain convolution");
  add_data_flags(abl, ablate_data);
  add_train_flags(abl, ablate_flags, true);
  abl->add_option("--seeds", seeds, "Comma-separated seeds");
  abl->add_option("--out", ablate_out, "JSON-lines output (default: none)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << one_line(e.what()) << "\n";
    return kUsage;
  }

  try {
    if (build->parsed()) return build_graph_cmd(bf, out);
    if (train_sub->parsed()) return train_cmd(train_flags, train_data, arm, metrics, model_out, out);
    if (eval_sub->parsed()) return eval_cmd(eval_data, model_path, split, eval_fanout, eval_seed, out);
    if (sweep->parsed()) return sweep_cmd(sweep_flags, sweep_data, sweep_hops, sweep_out, out);
    if (abl->parsed()) return ablate_cmd(ablate_flags, ablate_data, seeds, ablate_out, out);
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << one_line(e.what()) << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return kData;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace duat::cli
