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


// Acceptance suite: one PASS/FAIL line per criterion, each with its wall-clock
// budget. With --expect-fail N[,M...] the exit status is 0 exactly when the
// failing set equals the listed set; without it any FAIL exits non-zero.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "eagle/eagle.hpp"
#include "fixtures.hpp"

namespace {

using namespace eagle;
namespace fs = std::filesystem;

struct Verdict {
  bool ok;
  std::string detail;
};

// 1: both labels of the toy cancel under PIFA; EAGLE splits them.
Verdict toy_reproduction() {
  const auto toy = testing::cancelling_toy();
  const DenseMatrix l = pifa_unnormalized(toy.data, false);
  double fro = 0.0;
  for (double v : l.data()) fro += v * v;
  fro = std::sqrt(fro);
  GrlrConfig cfg;
  cfg.iters = 20;
  const double acc = assignment_accuracy(eagle_pipeline(toy.data, cfg).assignment, toy.truth, true);
  return {fro < 1e-12 && acc == 1.0, "|L|_F=" + format_real(fro) + " accuracy=" + format_real(acc)};
}

// 2: singleton groups reduce GRLR to normalized PIFA and EAGLE to identity.
Verdict singleton_equivalence() {
  std::size_t emb_ok = 0, lab_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = testing::random_xmc(seed, 60 + 10 * seed, 3 + seed % 6, 5 + seed % 9);
    std::vector<std::vector<std::size_t>> parts(ds.num_samples());
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i] = {i};
    const auto grouped = aggregate_groups(ds, parts);
    const GrlrConfig cfg;
    const auto learned = learn_all_embeddings(grouped.data, cfg);
    const auto pifa = pifa_embedding(grouped.data, cfg.normalize_features);
    const auto a = learned.matrix().data(), b = pifa.matrix().data();
    bool same = std::equal(a.begin(), a.end(), b.begin(), b.end());
    for (std::size_t k = 0; k < learned.num_labels(); ++k) same = same && learned.is_empty(k) == pifa.is_empty(k);
    emb_ok += same;
    const auto r = eagle_assign(grouped.data, learned, cfg.normalize_features);
    lab_ok += r.filtered_labels.row_offsets() == ds.labels.row_offsets() &&
              r.filtered_labels.col_indices() == ds.labels.col_indices();
  }
  return {emb_ok == 20 && lab_ok == 20,
          "embeddings equal " + std::to_string(emb_ok) + "/20, labels reproduced " + std::to_string(lab_ok) + "/20"};
}

// 3: GRLR against the exhaustive optimum on tiny instances.
Verdict oracle_gap() {
  std::size_t close = 0, above = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ds = testing::tiny_instance(seed);
    const double best = brute_force_embedding(0, ds).objective;
    const double got = eq2_objective(grlr(0, ds).embedding, 0, ds);
    close += got >= 0.95 * best;
    above += got > best + 1e-12;
    worst = std::min(worst, got / best);
  }
  return {close >= 95 && above == 0, std::to_string(close) + "/100 within 0.95, " + std::to_string(above) +
                                         " above optimum, worst ratio " + format_real(worst)};
}

// 4: noiseless clustered data, random groups of 4.
Verdict noiseless_recovery() {
  const auto syn = synth_clustered_dataset(500, 16, 10, 1.0, 0.0, 0);
  const auto grouped = random_grouping(syn.data, 4, 0);
  GrlrConfig cfg;
  cfg.iters = 20;
  const auto emb = learn_all_embeddings(grouped.data, cfg);
  double worst = 1.0;
  for (std::size_t k = 0; k < 10; ++k)
    if (!emb.is_empty(k)) worst = std::min(worst, cosine(emb.row(k), syn.truth.row(k)));
  return {worst >= 0.999, "min cosine " + format_real(worst)};
}

// 5: the one-step inequality at every iteration (f = 0).
Verdict one_step_inequality() {
  std::size_t checks = 0, violations = 0;
  double slack = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto syn = synth_clustered_dataset(200, 12, 8, 1.0, 0.0, 1000 + seed);
    const auto grouped = random_grouping(syn.data, 4, seed);
    GrlrConfig cfg;
    cfg.record_iterates = true;
    for (std::size_t k = 0; k < 8; ++k) {
      if (grouped.data.label_groups(k).empty()) continue;
      const auto r = grlr(k, grouped.data, cfg, &grouped.truth);
      const auto star = syn.truth.row(k);
      for (std::size_t t = 1; t < r.trace.iterates.size(); ++t) {
        const auto& prev = r.trace.iterates[t - 1];
        const auto step = one_step_aggregate(prev, k, grouped.data, &grouped.truth);
        const double a = *step.alpha;
        const double gap = cosine(star, step.direction) - (a + (1 - a) * (cosine(star, prev) - distance(star, prev)));
        slack = std::min(slack, gap);
        ++checks;
        violations += gap < -1e-12;  // rounding only
      }
    }
  }
  return {violations == 0 && checks > 0, std::to_string(checks) + " iterations, " + std::to_string(violations) +
                                             " violations, min slack " + format_real(slack)};
}

// 6: regression sweep at the default sizes.
Verdict regression_trend() {
  const auto rows = run_regression_sweep(RegressionSimConfig{}, kDefaultSigma2List);
  bool ok = rows[0].noas_mean <= 1.1;
  std::ostringstream ss;
  for (const auto& r : rows) {
    if (r.sigma2 == 5.0 || r.sigma2 == 10.0) ok = ok && r.as_mean < r.noas_mean;
    ok = ok && r.noas_mean >= 0.95 && r.as_mean >= 0.95 && r.excluded < 20;
    ss << " s2=" << format_real(r.sigma2) << ":" << format_real(std::round(r.noas_mean * 1e3) / 1e3) << "/"
       << format_real(std::round(r.as_mean * 1e3) / 1e3);
  }
  return {ok, "NoAS/AS" + ss.str()};
}

// 7: classification analogue.
Verdict classification_trend() {
  const auto rows = run_classification_sim(ClassificationSimConfig{}, kDefaultSigma2List);
  const auto& uni = rows.front();
  const auto& skew = rows.back();
  return {uni.as_mean < uni.noas_mean && std::abs(skew.as_mean - skew.noas_mean) <= 0.05,
          "uniform NoAS " + format_real(uni.noas_mean) + " AS " + format_real(uni.as_mean) + "; s2=" +
              format_real(skew.sigma2) + " NoAS " + format_real(skew.noas_mean) + " AS " + format_real(skew.as_mean)};
}

// 8: EAGLE >= EAGLE-0 >= random on clustered synthetic XMC.
Verdict method_ordering() {
  bool ok = true;
  double rand_sum = 0.0;
  std::ostringstream ss;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto syn = synth_clustered_dataset(2000, 32, 50, 1.0, 0.3, seed);
    const auto grouped = random_grouping(syn.data, 4, seed);
    GrlrConfig full, zero;
    zero.iters = 0;
    const double a = assignment_accuracy(eagle_pipeline(grouped.data, full).assignment, grouped.truth, true);
    const double b = assignment_accuracy(eagle_pipeline(grouped.data, zero).assignment, grouped.truth, true);
    const double c = assignment_accuracy(random_assignment(grouped.data, seed), grouped.truth, true);
    ok = ok && a >= b && b >= c && std::abs(c - 0.25) <= 0.05;
    rand_sum += c;
    ss << " [" << format_real(std::round(a * 1e4) / 1e4) << " " << format_real(std::round(b * 1e4) / 1e4) << " "
       << format_real(std::round(c * 1e4) / 1e4) << "]";
  }
  return {ok, "EAGLE/EAGLE-0/random" + ss.str() + " random mean " + format_real(std::round(rand_sum / 5 * 1e4) / 1e4)};
}

// 9: soft mask at tau = 0 and column sums.
Verdict mask_contract() {
  Rng rng(99);
  bool ones = true;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t g = 1 + rng.uniform_index(10), l = 1 + rng.uniform_index(20), d = 1 + rng.uniform_index(8);
    const double tau = c == 0 ? 0.0 : 20.0 * rng.uniform();
    DenseMatrix x(g, d);
    for (double& v : x.data()) v = rng.normal();
    LabelEmbeddings emb(l, d);
    for (std::size_t k = 0; k < l; ++k)
      for (double& v : emb.row(k)) v = rng.normal();
    const auto m = miml_mask(x, emb, tau);
    const auto zero = miml_mask(x, emb, 0.0);
    for (double v : zero.data()) ones = ones && v == 1.0;
    for (std::size_t k = 0; k < l; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g; ++i) s += m(i, k);
      worst = std::max(worst, std::abs(s - static_cast<double>(g)));
    }
  }
  return {ones && worst <= 1e-9, std::string("tau=0 all ones: ") + (ones ? "yes" : "no") +
                                     ", max column-sum error " + format_real(worst)};
}

// 10: CLI byte-determinism across runs and thread counts.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string("'") + EAGLE_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict cli_determinism() {
  const fs::path dir(EAGLE_SCRATCH_DIR);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  int rc = run_cli("--seed 21 synth --n 2000 --d 32 --l 50 --noise 0.3 --out " + p("d.xmc"), dir / "log");
  rc |= run_cli("--seed 21 group --input " + p("d.xmc") + " --out-prefix " + p("d"), dir / "log");
  const std::string in = "--input " + p("d.xmc") + " --y1 " + p("d.y1") + " --y2 " + p("d.y2");
  std::vector<std::string> pipe, sim;
  for (const char* threads : {"1", "1", "8"}) {
    const std::string tag = std::string(threads) + "_" + std::to_string(pipe.size());
    rc |= run_cli(std::string("--seed 21 --threads ") + threads + " pipeline " + in + " --embeddings-out " +
                      p("e" + tag) + " --choices-out " + p("c" + tag),
                  dir / ("f" + tag));
    pipe.push_back(slurp(dir / ("f" + tag)) + slurp(dir / ("e" + tag)) + slurp(dir / ("c" + tag)));
    rc |= run_cli(std::string("--seed 21 --threads ") + threads + " simulate", dir / ("s" + tag));
    sim.push_back(slurp(dir / ("s" + tag)));
  }
  const bool ok = rc == 0 && !pipe[0].empty() && !sim[0].empty() && pipe[0] == pipe[1] && pipe[0] == pipe[2] &&
                  sim[0] == sim[1] && sim[0] == sim[2];
  return {ok, "exit status " + std::to_string(rc) + ", pipeline outputs " + std::to_string(pipe[0].size()) +
                  " bytes, simulate " + std::to_string(sim[0].size()) + " bytes"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int a = 1; a < argc; ++a) {
    if (std::string(argv[a]) == "--expect-fail" && a + 1 < argc) {
      std::stringstream ss(argv[++a]);
      std::string id;
      while (std::getline(ss, id, ',')) expected.insert(std::stoi(id));
    } else {
      std::cerr << "usage: acceptance [--expect-fail N[,M...]]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "toy reproduction", 1, toy_reproduction},
      {2, "singleton-group equivalence", 5, singleton_equivalence},
      {3, "oracle gap", 10, oracle_gap},
      {4, "noiseless recovery", 5, noiseless_recovery},
      {5, "one-step inequality", 10, one_step_inequality},
      {6, "regression trend", 60, regression_trend},
      {7, "classification trend", 60, classification_trend},
      {8, "method ordering", 60, method_ordering},
      {9, "mask contract", 1, mask_contract},
      {10, "CLI determinism", 60, cli_determinism},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.ok && in_time;
    if (!pass) failed.insert(c.id);
    std::printf("%s criterion %d (%s): %s; %.3f s of %.0f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (!expected.empty()) {
    std::printf("expected failures:");
    for (int id : expected) std::printf(" %d", id);
    std::printf(" -> %s\n", failed == expected ? "failing set matches" : "failing set differs");
    return failed == expected ? 0 : 1;
  }
  return failed.empty() ? 0 : 1;
}
