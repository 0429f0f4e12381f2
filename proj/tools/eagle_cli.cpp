// Copyright 2026 The EAGLE Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: grouping, embedding, assignment, simulations,
// the brute-force oracle, evaluation and the soft mask.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eagle/eagle.hpp"

namespace {

using namespace eagle;

constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInfeasible = 4;

/// An input or output path could not be opened.
struct IoError : Error {
  using Error::Error;
};

struct Options {
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::size_t iters = 20;
  double lr = 0.1;
  bool no_normalize = false;

  std::string input, y1, y2, out, out_prefix, embeddings, embeddings_out, choices, choices_out, truth;

  // grouping
  std::string rule = "random";
  std::size_t group_size = 4, depth = 3;
  double feature_noise = 0.0;

  // simulation
  std::string task = "regression";
  std::optional<double> sigma1, sigma_e;
  std::vector<double> sigma2_list = kDefaultSigma2List;
  std::size_t trials = 20, n = 1000, g = 10, d = 10, l = 5;
  bool matching = false;

  // synth
  double sep = 0.5, noise = 0.1;
  std::size_t synth_n = 2000, synth_d = 32, synth_l = 50;

  std::size_t label = 0;
  double tau = 1.0;
  std::vector<std::size_t> k_list{1, 3, 5};

  GrlrConfig grlr() const {
    GrlrConfig c;
    c.iters = iters;
    c.lambda = lr;
    c.normalize_features = !no_normalize;
    c.validate();
    return c;
  }
};

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return in;
}

/// Writes to `path`, or to stdout when path is empty or "-".
template <class F>
void with_output(const std::string& path, F&& body, bool binary = false) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open output '" + path + "'");
  body(out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

XmcDataset load_xmc(const std::string& path) {
  auto in = open_in(path);
  return parse_xmc(in);
}

SparseMatrix load_sparse(const std::string& path) {
  auto in = open_in(path);
  return parse_sparse(in);
}

LabelEmbeddings load_lemb(const std::string& path) {
  auto in = open_in(path, true);
  return read_lemb(in);
}

AggregatedDataset load_aggregated(const Options& o) {
  const auto x = load_xmc(o.input);
  auto y1 = load_sparse(o.y1);
  auto [y2, mult] = split_multiplicity(load_sparse(o.y2));
  return AggregatedDataset(x.features, std::move(y1), std::move(y2), std::move(mult));
}

std::string shape(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

void check_embedding_shape(const AggregatedDataset& ds, const LabelEmbeddings& emb) {
  if (emb.num_labels() != ds.num_labels() || emb.dim() != ds.dim())
    throw InvalidInput("dimension mismatch: embeddings are " + shape(emb.num_labels(), emb.dim()) +
                       ", dataset needs " + shape(ds.num_labels(), ds.dim()) + " (labels x features)");
}

void write_embeddings(const std::string& path, const LabelEmbeddings& emb) {
  with_output(path, [&](std::ostream& os) { write_lemb(os, emb); }, true);
}

void write_assignment(const Options& o, const AggregatedDataset& ds, const AssignmentResult& r) {
  with_output(o.out, [&](std::ostream& os) { write_xmc(os, XmcDataset{ds.features(), r.filtered_labels}); });
  if (!o.choices_out.empty()) with_output(o.choices_out, [&](std::ostream& os) { write_choices_csv(os, r); });
  if (r.num_fallbacks > 0)
    std::cerr << "warning: " << r.num_fallbacks << " (group, label) pairs had no embedding; lowest-index member used\n";
}

// ---------------------------------------------------------------------------

void cmd_group(const Options& o) {
  GroupingConfig cfg;
  if (o.rule == "random")
    cfg.rule = GroupingRule::kRandom;
  else if (o.rule == "hierarchical")
    cfg.rule = GroupingRule::kHierarchical;
  else
    throw ConfigError("unknown grouping rule '" + o.rule + "' (expected random or hierarchical)");
  cfg.group_size = o.group_size;
  cfg.depth = o.depth;
  cfg.feature_noise_sigma = o.feature_noise;
  cfg.seed = o.seed;
  const auto grouped = make_groups(load_xmc(o.input), cfg);
  const auto& ds = grouped.data;
  with_output(o.out_prefix + ".y1", [&](std::ostream& os) { write_sparse(os, ds.sample_to_group()); });
  with_output(o.out_prefix + ".y2", [&](std::ostream& os) { write_sparse(os, group_label_counts(ds)); });
  with_output(o.out_prefix + ".truth.csv", [&](std::ostream& os) { write_truth_csv(os, grouped.truth); });
  std::cout << "groups=" << ds.num_groups() << " avg_group_size=" << format_real(ds.average_group_size()) << '\n';
}

void cmd_synth(const Options& o) {
  const auto syn = synth_clustered_dataset(o.synth_n, o.synth_d, o.synth_l, o.sep, o.noise, o.seed);
  with_output(o.out, [&](std::ostream& os) { write_xmc(os, syn.data); });
  if (!o.embeddings_out.empty()) write_embeddings(o.embeddings_out, syn.truth);
}

void cmd_embed(const Options& o) {
  const auto ds = load_aggregated(o);
  write_embeddings(o.out, learn_all_embeddings(ds, o.grlr()));
}

void cmd_assign(const Options& o) {
  const auto ds = load_aggregated(o);
  const auto emb = load_lemb(o.embeddings);
  check_embedding_shape(ds, emb);
  write_assignment(o, ds, eagle_assign(ds, emb, !o.no_normalize));
}

void cmd_pipeline(const Options& o) {
  const auto ds = load_aggregated(o);
  const auto r = eagle_pipeline(ds, o.grlr());
  if (!o.embeddings_out.empty()) write_embeddings(o.embeddings_out, r.embeddings);
  write_assignment(o, ds, r.assignment);
}

void cmd_simulate(const Options& o) {
  if (o.task == "regression") {
    RegressionSimConfig cfg;
    cfg.n = o.n, cfg.g = o.g, cfg.d = o.d, cfg.l = o.l, cfg.trials = o.trials, cfg.seed = o.seed;
    if (o.sigma1) cfg.sigma1 = *o.sigma1;
    if (o.sigma_e) cfg.sigma_e = *o.sigma_e;
    AsOptions as;
    as.matching = o.matching;
    const auto rows = run_regression_sweep(cfg, o.sigma2_list, as);
    std::cerr << "# B* drawn Gaussian and scaled to unit spectral norm; sigma1=" << format_real(cfg.sigma1)
              << " sigma_e=" << format_real(cfg.sigma_e) << " trials=" << cfg.trials << " seed=" << cfg.seed
              << " as_rule=" << (o.matching ? "matching" : "argmin") << '\n';
    with_output(o.out, [&](std::ostream& os) { write_regression_csv(os, rows); });
  } else if (o.task == "classification") {
    ClassificationSimConfig cfg;
    cfg.n = o.n, cfg.g = o.g, cfg.d = o.d, cfg.l = o.l, cfg.trials = o.trials, cfg.seed = o.seed;
    if (o.sigma1) cfg.sigma1 = *o.sigma1;
    if (o.sigma_e) cfg.sigma_e = *o.sigma_e;
    const auto rows = run_classification_sim(cfg, o.sigma2_list);
    std::cerr << "# unit class vectors; sigma1=" << format_real(cfg.sigma1) << " sigma_e=" << format_real(cfg.sigma_e)
              << " trials=" << cfg.trials << " seed=" << cfg.seed << '\n';
    with_output(o.out, [&](std::ostream& os) { write_classification_csv(os, rows); });
  } else {
    throw ConfigError("unknown task '" + o.task + "' (expected regression or classification)");
  }
}

void cmd_oracle(const Options& o) {
  const auto ds = load_aggregated(o);
  if (o.label >= ds.num_labels())
    throw ConfigError("label " + std::to_string(o.label) + " out of range (" + std::to_string(ds.num_labels()) +
                      " labels)");
  const auto best = brute_force_embedding(o.label, ds);
  const auto learned = grlr(o.label, ds, o.grlr());
  const double value = eq2_objective(learned.embedding, o.label, ds);
  const double ratio = best.objective == 0.0 ? (value == 0.0 ? 1.0 : 0.0) : value / best.objective;
  std::cout << "label=" << o.label << " combinations=" << best.combinations << '\n'
            << "brute_force=" << format_real(best.objective) << '\n'
            << "grlr=" << format_real(value) << '\n'
            << "ratio=" << format_real(ratio) << '\n';
}

/// Choices CSV shares the truth CSV layout; one sample per (group, label).
AssignmentResult load_choices(const std::string& path) {
  auto in = open_in(path);
  const auto parsed = parse_truth_csv(in);
  AssignmentResult r;
  for (const auto& [key, samples] : parsed.pairs()) {
    if (samples.size() != 1)
      throw InvalidInput("choices file lists " + std::to_string(samples.size()) + " samples for group " +
                         std::to_string(key.first) + ", label " + std::to_string(key.second));
    r.choices.push_back({key.first, key.second, samples[0], false});
  }
  return r;
}

void cmd_eval(const Options& o) {
  std::vector<Metric> metrics;
  if (!o.embeddings.empty()) {
    const auto test = load_xmc(o.input);
    const auto emb = load_lemb(o.embeddings);
    if (test.features.cols() != emb.dim() || test.labels.cols() != emb.num_labels())
      throw InvalidInput("dimension mismatch: embeddings are " + shape(emb.num_labels(), emb.dim()) +
                         ", test set has " + shape(test.labels.cols(), test.features.cols()) + " (labels x features)");
    std::size_t kmax = 0;
    for (auto k : o.k_list) {
      if (k == 0) throw ConfigError("--k-list entries must be >= 1");
      kmax = std::max(kmax, k);
    }
    const auto pred = nearest_embedding_classifier(test.features, emb, kmax);
    for (auto k : o.k_list) metrics.push_back({"precision", k, precision_at_k(pred, test.labels, k)});
    if (!pred.zero_rows.empty()) std::cerr << "warning: " << pred.zero_rows.size() << " zero feature rows\n";
  }
  if (!o.choices.empty()) {
    if (o.truth.empty()) throw ConfigError("--choices needs --truth");
    auto in = open_in(o.truth);
    const auto truth = parse_truth_csv(in);
    const auto r = load_choices(o.choices);
    metrics.push_back({"assignment_accuracy", 0, assignment_accuracy(r, truth, false)});
    metrics.push_back({"assignment_accuracy_tolerant", 0, assignment_accuracy(r, truth, true)});
  }
  if (metrics.empty()) throw ConfigError("eval needs --embeddings or --choices");
  with_output(o.out, [&](std::ostream& os) { write_metrics_csv(os, metrics); });
}

void cmd_mask(const Options& o) {
  const auto x = load_xmc(o.input);
  const auto emb = load_lemb(o.embeddings);
  if (x.features.cols() != emb.dim())
    throw InvalidInput("dimension mismatch: group features are " + shape(x.features.rows(), x.features.cols()) +
                       ", embeddings are " + shape(emb.num_labels(), emb.dim()));
  DenseMatrix feats(x.features.rows(), x.features.cols());
  for (std::size_t i = 0; i < feats.rows(); ++i) {
    const auto r = x.features.row(i);
    for (std::size_t p = 0; p < r.size(); ++p) feats(i, r.indices[p]) = r.values[p];
  }
  const auto mask = miml_mask(feats, emb, o.tau);
  with_output(o.out, [&](std::ostream& os) {
    for (std::size_t i = 0; i < mask.rows(); ++i) {
      for (std::size_t k = 0; k < mask.cols(); ++k) os << (k ? "," : "") << format_real(mask(i, k));
      os << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Label embeddings and sample assignment from group-aggregated annotations"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--iters", o.iters, "GRLR iterations T (0 gives EAGLE-0)");
  app.add_option("--lr", o.lr, "GRLR step lambda");
  app.add_flag("--no-normalize-features", o.no_normalize, "select and aggregate raw feature rows");

  auto aggregated_inputs = [&](CLI::App* sub) {
    sub->add_option("--input", o.input, "XMC file supplying X")->required();
    sub->add_option("--y1", o.y1, "sample-to-group sparse file")->required();
    sub->add_option("--y2", o.y2, "group-to-label sparse file")->required();
  };

  auto* group = app.add_subcommand("group", "partition samples into groups and aggregate labels");
  group->add_option("--input", o.input, "XMC file")->required();
  group->add_option("--out-prefix", o.out_prefix, "writes PREFIX.y1, PREFIX.y2, PREFIX.truth.csv")->required();
  group->add_option("--rule", o.rule, "random | hierarchical");
  group->add_option("--group-size", o.group_size, "samples per group (random rule)");
  group->add_option("--depth", o.depth, "tree depth; 2^depth groups (hierarchical rule)");
  group->add_option("--feature-noise", o.feature_noise, "Gaussian noise added before clustering");

  auto* synth = app.add_subcommand("synth", "clustered single-label synthetic XMC data");
  synth->add_option("--n", o.synth_n);
  synth->add_option("--d", o.synth_d);
  synth->add_option("--l", o.synth_l);
  synth->add_option("--sep", o.sep, "minimum pairwise embedding distance");
  synth->add_option("--noise", o.noise, "feature noise standard deviation");
  synth->add_option("--out", o.out, "XMC output (default stdout)");
  synth->add_option("--embeddings-out", o.embeddings_out, "ground-truth embeddings (LEMB)");

  auto* embed = app.add_subcommand("embed", "learn one embedding per label (LEMB output)");
  aggregated_inputs(embed);
  embed->add_option("--out", o.out, "LEMB output")->required();

  auto* assign = app.add_subcommand("assign", "assign group labels to samples with given embeddings");
  aggregated_inputs(assign);
  assign->add_option("--embeddings", o.embeddings, "LEMB file")->required();
  assign->add_option("--out", o.out, "filtered XMC output (default stdout)");
  assign->add_option("--choices-out", o.choices_out, "per (group, label) choice CSV");

  auto* pipeline = app.add_subcommand("pipeline", "embed then assign");
  aggregated_inputs(pipeline);
  pipeline->add_option("--out", o.out, "filtered XMC output (default stdout)");
  pipeline->add_option("--embeddings-out", o.embeddings_out, "LEMB output");
  pipeline->add_option("--choices-out", o.choices_out, "per (group, label) choice CSV");

  auto* simulate = app.add_subcommand("simulate", "NoAS vs AS Monte Carlo sweep (CSV)");
  simulate->add_option("--task", o.task, "regression | classification");
  simulate->add_option("--sigma1", o.sigma1, "group-mean feature scale (default 1, classification 0.1)");
  simulate->add_option("--sigma2-list", o.sigma2_list, "comma-separated sweep values")->delimiter(',');
  simulate->add_option("--sigma-e", o.sigma_e, "response or label noise (default 1, classification 0)");
  simulate->add_option("--trials", o.trials);
  simulate->add_option("--n", o.n);
  simulate->add_option("--g", o.g);
  simulate->add_option("--d", o.d);
  simulate->add_option("--l", o.l);
  simulate->add_flag("--matching", o.matching, "AS reassigns by min-cost matching instead of argmin");
  simulate->add_option("--out", o.out, "CSV output (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum vs GRLR for one label");
  aggregated_inputs(oracle);
  oracle->add_option("--label", o.label)->required();

  auto* eval = app.add_subcommand("eval", "precision@k and assignment accuracy (CSV)");
  eval->add_option("--input", o.input, "test XMC file");
  eval->add_option("--embeddings", o.embeddings, "LEMB file for the nearest-embedding scorer");
  eval->add_option("--k-list", o.k_list)->delimiter(',');
  eval->add_option("--choices", o.choices, "choice CSV to score");
  eval->add_option("--truth", o.truth, "ground-truth CSV");
  eval->add_option("--out", o.out, "CSV output (default stdout)");

  auto* mask = app.add_subcommand("mask", "soft-assignment mask for one group (CSV, g x l)");
  mask->add_option("--input", o.input, "XMC file whose rows are the group's instances")->required();
  mask->add_option("--embeddings", o.embeddings, "LEMB file")->required();
  mask->add_option("--tau", o.tau, "temperature; 0 gives all ones");
  mask->add_option("--out", o.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    set_num_threads(o.threads);
    if (*group) cmd_group(o);
    else if (*synth) cmd_synth(o);
    else if (*embed) cmd_embed(o);
    else if (*assign) cmd_assign(o);
    else if (*pipeline) cmd_pipeline(o);
    else if (*simulate) cmd_simulate(o);
    else if (*oracle) cmd_oracle(o);
    else if (*eval) cmd_eval(o);
    else if (*mask) cmd_mask(o);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
