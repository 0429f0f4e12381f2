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

// Monte-Carlo worlds for grouped ("aggregated") supervision.
//
// Regression: m = n/g groups of g consecutive rows. A group draws a center
// from N(0, s1^2 I), each member adds N(0, s2^2 I), responses are
// z = B*^T x + N(0, se^2 I), and the responses inside a group are shuffled
// by a hidden permutation. Three estimators of B* are compared:
//   NoAS    least squares on (sum of x, sum of z) per group
//   AS      every z re-picks the member x minimizing |z - B_NoAS^T x|, then
//           least squares on the n re-paired rows
//   oracle  least squares with the hidden permutation undone
//
// Classification: l unit class vectors, each group draws its labels from a
// skewed categorical, features are class vector plus N(0, s1^2 I). Class
// centroids play the role of B.

#ifndef EAGLE_SIMLAB_HPP_
#define EAGLE_SIMLAB_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eagle/core.hpp"
#include "eagle/errors.hpp"
#include "eagle/linear_assignment.hpp"
#include "eagle/parallel.hpp"
#include "eagle/rng.hpp"

namespace eagle {

using Eigen::MatrixXd;

inline const std::vector<double> kDefaultSigma2List = {0.0, 0.1, 1.0, 5.0, 10.0};

namespace detail {

inline void require_sigma(double s, const char* name) {
  if (!std::isfinite(s) || s < 0.0) throw ConfigError(std::string(name) + " must be finite and >= 0");
}

inline void require_sizes(std::size_t n, std::size_t g, std::size_t d, std::size_t l, std::size_t trials) {
  if (n == 0 || g == 0 || d == 0 || l == 0) throw ConfigError("n, g, d and l must all be positive");
  if (n % g != 0) throw ConfigError("g=" + std::to_string(g) + " does not divide n=" + std::to_string(n));
  if (trials == 0) throw ConfigError("trials must be positive");
}

inline void fill_normal(Rng& rng, MatrixXd& m, double sigma) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = sigma * rng.normal();
}

}  // namespace detail

struct RegressionSimConfig {
  std::size_t n = 1000, g = 10, d = 10, l = 5;
  double sigma1 = 1.0, sigma2 = 0.0, sigma_e = 1.0;
  std::size_t trials = 20;
  std::uint64_t seed = 0;

  std::size_t num_groups() const { return n / g; }

  void validate() const {
    detail::require_sizes(n, g, d, l, trials);
    detail::require_sigma(sigma1, "sigma1");
    detail::require_sigma(sigma2, "sigma2");
    detail::require_sigma(sigma_e, "sigma_e");
  }
};

struct RegressionSimInstance {
  std::size_t g = 1;
  MatrixXd features;   // n x d
  MatrixXd responses;  // n x l, shuffled within groups
  MatrixXd truth;      // d x l, unit spectral norm
  // responses.row(j*g + a) is the clean response of row j*g + permutations[j][a].
  std::vector<std::vector<std::size_t>> permutations;

  std::size_t num_groups() const { return permutations.size(); }
};

/// Largest singular value.
inline double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

inline RegressionSimInstance gen_regression(const RegressionSimConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(cfg.n), d = static_cast<Eigen::Index>(cfg.d),
             l = static_cast<Eigen::Index>(cfg.l), g = static_cast<Eigen::Index>(cfg.g);
  RegressionSimInstance inst;
  inst.g = cfg.g;
  inst.truth.resize(d, l);
  detail::fill_normal(rng, inst.truth, 1.0);
  inst.truth /= spectral_norm(inst.truth);

  inst.features.resize(n, d);
  Eigen::RowVectorXd center(d);
  for (Eigen::Index j = 0; j < n / g; ++j) {
    for (Eigen::Index c = 0; c < d; ++c) center(c) = cfg.sigma1 * rng.normal();
    for (Eigen::Index a = 0; a < g; ++a)
      for (Eigen::Index c = 0; c < d; ++c) inst.features(j * g + a, c) = center(c) + cfg.sigma2 * rng.normal();
  }
  MatrixXd noise(n, l);
  detail::fill_normal(rng, noise, cfg.sigma_e);
  const MatrixXd clean = inst.features * inst.truth + noise;

  inst.responses.resize(n, l);
  inst.permutations.resize(cfg.num_groups());
  for (std::size_t j = 0; j < cfg.num_groups(); ++j) {
    auto& perm = inst.permutations[j];
    perm.resize(cfg.g);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t a = 0; a < cfg.g; ++a)
      inst.responses.row(static_cast<Eigen::Index>(j * cfg.g + a)) = clean.row(static_cast<Eigen::Index>(j * cfg.g + perm[a]));
  }
  return inst;
}

inline RegressionSimInstance gen_regression(const RegressionSimConfig& cfg) {
  Rng rng(cfg.seed);
  return gen_regression(cfg, rng);
}

/// Ordinary least squares B = argmin |X B - Z|_F via column-pivoted QR of X.
/// Throws SingularSystemError when X has numerical rank below its width.
inline MatrixXd lr_closed_form(const MatrixXd& x, const MatrixXd& z) {
  if (x.rows() != z.rows()) throw InvalidInput("lr_closed_form: row count mismatch");
  if (!x.allFinite() || !z.allFinite()) throw InvalidInput("lr_closed_form: non-finite input");
  const auto d = x.cols();
  if (x.rows() < d)
    throw SingularSystemError("lr_closed_form: " + std::to_string(x.rows()) + " rows cannot determine " +
                              std::to_string(d) + " coefficients");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < d)
    throw SingularSystemError("lr_closed_form: design has rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(d) + " (rank deficiency " + std::to_string(d - qr.rank()) + ")");
  return qr.solve(z);
}

/// Per-group row sums; rows j*g .. j*g+g-1 form group j. Rows are added in
/// lexicographic order so a reordering inside a group gives identical bits.
inline MatrixXd group_sums(const MatrixXd& m, std::size_t g) {
  const auto gi = static_cast<Eigen::Index>(g);
  MatrixXd out = MatrixXd::Zero(m.rows() / gi, m.cols());
  std::vector<Eigen::Index> order(g);
  for (Eigen::Index j = 0; j < out.rows(); ++j) {
    std::iota(order.begin(), order.end(), j * gi);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(a, c) != m(b, c)) return m(a, c) < m(b, c);
      return false;
    });
    for (auto r : order) out.row(j) += m.row(r);
  }
  return out;
}

inline MatrixXd estimate_noas(const RegressionSimInstance& inst) {
  return lr_closed_form(group_sums(inst.features, inst.g), group_sums(inst.responses, inst.g));
}

struct AsOptions {
  // Each feature row used at most once per group (min-cost matching).
  bool matching = false;
  // Residuals are measured under this matrix instead of the NoAS estimate.
  std::optional<MatrixXd> reference;
};

inline MatrixXd estimate_as(const RegressionSimInstance& inst, const AsOptions& opt = {}) {
  const MatrixXd ref = opt.reference ? *opt.reference : estimate_noas(inst);
  if (ref.rows() != inst.features.cols() || ref.cols() != inst.responses.cols())
    throw InvalidInput("estimate_as: reference matrix has the wrong shape");
  const MatrixXd pred = inst.features * ref;
  const auto g = static_cast<Eigen::Index>(inst.g);
  MatrixXd paired(inst.features.rows(), inst.features.cols());
  DenseMatrix cost(inst.g, inst.g);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(inst.num_groups()); ++j) {
    const Eigen::Index base = j * g;
    for (Eigen::Index a = 0; a < g; ++a)
      for (Eigen::Index b = 0; b < g; ++b)
        cost(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
            (inst.responses.row(base + a) - pred.row(base + b)).squaredNorm();
    std::vector<std::size_t> pick(inst.g);
    if (opt.matching) {
      pick = min_cost_assignment(cost);
    } else {
      for (std::size_t a = 0; a < inst.g; ++a) {
        std::size_t best = 0;
        for (std::size_t b = 1; b < inst.g; ++b)
          if (cost(a, b) < cost(a, best)) best = b;
        pick[a] = best;
      }
    }
    for (Eigen::Index a = 0; a < g; ++a)
      paired.row(base + a) = inst.features.row(base + static_cast<Eigen::Index>(pick[static_cast<std::size_t>(a)]));
  }
  return lr_closed_form(paired, inst.responses);
}

inline MatrixXd oracle_estimator(const RegressionSimInstance& inst) {
  MatrixXd z(inst.responses.rows(), inst.responses.cols());
  for (std::size_t j = 0; j < inst.num_groups(); ++j)
    for (std::size_t a = 0; a < inst.g; ++a)
      z.row(static_cast<Eigen::Index>(j * inst.g + inst.permutations[j][a])) =
          inst.responses.row(static_cast<Eigen::Index>(j * inst.g + a));
  return lr_closed_form(inst.features, z);
}

/// |est - truth|_F / |oracle - truth|_F, with 0/0 read as 1.
inline double relative_error(const MatrixXd& est, const MatrixXd& oracle, const MatrixXd& truth) {
  const double num = (est - truth).norm(), den = (oracle - truth).norm();
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

struct SweepRow {
  double sigma2 = 0.0;
  double noas_mean = 0.0, noas_sd = 0.0;
  double as_mean = 0.0, as_sd = 0.0;
  std::size_t excluded = 0;
};

namespace detail {

struct TrialOutcome {
  bool ok = false;
  double noas = 0.0, as = 0.0;
};

// Mean and sample standard deviation over the successful trials, in index order.
inline SweepRow summarize(double sigma2, std::span<const TrialOutcome> trials) {
  SweepRow row{sigma2};
  std::vector<double> a, b;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++row.excluded;
      continue;
    }
    a.push_back(t.noas);
    b.push_back(t.as);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = std::numeric_limits<double>::quiet_NaN();
    if (v.empty()) return;
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    sd = 0.0;
    if (v.size() < 2) return;
    for (double x : v) sd += (x - mean) * (x - mean);
    sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
  };
  stats(a, row.noas_mean, row.noas_sd);
  stats(b, row.as_mean, row.as_sd);
  return row;
}

inline void require_sigma_list(std::span<const double> list) {
  if (list.empty()) throw ConfigError("sigma2 list is empty");
  for (double s : list) require_sigma(s, "sigma2 list entry");
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows, const char* stem) {
  os << "sigma2," << stem << "_noas_mean," << stem << "_noas_sd," << stem << "_as_mean," << stem << "_as_sd,excluded_trials\n";
  for (const auto& r : rows)
    os << format_real(r.sigma2) << ',' << format_real(r.noas_mean) << ',' << format_real(r.noas_sd) << ','
       << format_real(r.as_mean) << ',' << format_real(r.as_sd) << ',' << r.excluded << '\n';
}

}  // namespace detail

/// Trial t of sweep entry s runs on Rng(split(split(seed, s), t)); the table
/// does not depend on the thread count. cfg.sigma2 is ignored.
inline std::vector<SweepRow> run_regression_sweep(const RegressionSimConfig& cfg, std::span<const double> sigma2_list,
                                                  const AsOptions& as_opt = {}) {
  cfg.validate();
  detail::require_sigma_list(sigma2_list);
  std::vector<SweepRow> rows;
  for (std::size_t s = 0; s < sigma2_list.size(); ++s) {
    RegressionSimConfig c = cfg;
    c.sigma2 = sigma2_list[s];
    std::vector<detail::TrialOutcome> out(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t t) {
      Rng rng(Rng::split(Rng::split(cfg.seed, s), t));
      const auto inst = gen_regression(c, rng);
      try {
        const MatrixXd oracle = oracle_estimator(inst);
        out[t] = {true, relative_error(estimate_noas(inst), oracle, inst.truth),
                  relative_error(estimate_as(inst, as_opt), oracle, inst.truth)};
      } catch (const SingularSystemError&) {
        out[t] = {};
      }
    });
    rows.push_back(detail::summarize(c.sigma2, out));
  }
  return rows;
}

inline void write_regression_csv(std::ostream& os, std::span<const SweepRow> rows) {
  detail::write_sweep_csv(os, rows, "rel_rms");
}

// ---------------------------------------------------------------------------
// Classification world.

struct ClassificationSimConfig {
  std::size_t n = 1000, g = 10, d = 10, l = 5;
  double sigma1 = 0.1, sigma2 = 0.0, sigma_e = 0.0;
  std::size_t trials = 20;
  std::uint64_t seed = 0;

  std::size_t num_groups() const { return n / g; }

  void validate() const {
    detail::require_sizes(n, g, d, l, trials);
    detail::require_sigma(sigma1, "sigma1");
    detail::require_sigma(sigma2, "sigma2");
    detail::require_sigma(sigma_e, "sigma_e");
  }
};

/// Per-group label distribution: weight exp(s2) on the favoured label and 1
/// on every other label, normalized. s2 = 0 is uniform.
inline std::vector<double> skewed_label_probabilities(std::size_t l, std::size_t favoured, double sigma2) {
  // Divide through by exp(s2) so large s2 does not overflow.
  const double rest = std::exp(-sigma2);
  const double z = 1.0 + rest * static_cast<double>(l - 1);
  std::vector<double> p(l, rest / z);
  p.at(favoured) = 1.0 / z;
  return p;
}

struct ClassificationSimInstance {
  std::size_t g = 1, num_labels = 0;
  MatrixXd class_vectors;  // l x d, unit rows
  MatrixXd features;       // n x d
  std::vector<std::size_t> labels;  // per sample; only the group multiset is visible to NoAS/AS
};

inline ClassificationSimInstance gen_classification(const ClassificationSimConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.d), l = static_cast<Eigen::Index>(cfg.l);
  ClassificationSimInstance inst;
  inst.g = cfg.g;
  inst.num_labels = cfg.l;
  inst.class_vectors.resize(l, d);
  for (Eigen::Index k = 0; k < l; ++k) {
    double nrm = 0.0;
    while (nrm < kNormFloor) {
      for (Eigen::Index c = 0; c < d; ++c) inst.class_vectors(k, c) = rng.normal();
      nrm = inst.class_vectors.row(k).norm();
    }
    inst.class_vectors.row(k) /= nrm;
  }
  inst.features.resize(static_cast<Eigen::Index>(cfg.n), d);
  inst.labels.resize(cfg.n);
  std::vector<double> cosines(cfg.l);
  for (std::size_t j = 0; j < cfg.num_groups(); ++j) {
    const auto p = skewed_label_probabilities(cfg.l, rng.uniform_index(cfg.l), cfg.sigma2);
    for (std::size_t a = 0; a < cfg.g; ++a) {
      const std::size_t i = j * cfg.g + a;
      const double u = rng.uniform();
      std::size_t y = 0;
      for (double acc = p[0]; y + 1 < cfg.l && u >= acc; acc += p[++y]) {
      }
      auto x = inst.features.row(static_cast<Eigen::Index>(i));
      for (Eigen::Index c = 0; c < d; ++c) x(c) = inst.class_vectors(static_cast<Eigen::Index>(y), c) + cfg.sigma1 * rng.normal();
      if (cfg.sigma_e > 0.0) {
        const double xn = x.norm();
        std::size_t best = 0;
        for (std::size_t k = 0; k < cfg.l; ++k) {
          const double cs = xn > 0.0 ? inst.class_vectors.row(static_cast<Eigen::Index>(k)).dot(x) / xn : 0.0;
          cosines[k] = cs + cfg.sigma_e * rng.normal();
          if (cosines[k] > cosines[best]) best = k;
        }
        y = best;
      }
      inst.labels[i] = y;
    }
  }
  return inst;
}

namespace detail {

// Mean feature per label from (row, label) pairs; a label with no row keeps a zero centroid.
inline MatrixXd centroids(const MatrixXd& x, std::span<const std::size_t> labels, std::size_t l) {
  MatrixXd c = MatrixXd::Zero(static_cast<Eigen::Index>(l), x.cols());
  std::vector<double> count(l, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    c.row(static_cast<Eigen::Index>(labels[i])) += x.row(static_cast<Eigen::Index>(i));
    count[labels[i]] += 1.0;
  }
  for (std::size_t k = 0; k < l; ++k)
    if (count[k] > 0.0) c.row(static_cast<Eigen::Index>(k)) /= count[k];
  return c;
}

}  // namespace detail

/// Known-correspondence centroids.
inline MatrixXd classification_oracle(const ClassificationSimInstance& inst) {
  return detail::centroids(inst.features, inst.labels, inst.num_labels);
}

/// Centroid of label k = sum_j c_jk * mean(x in group j) / sum_j c_jk, where
/// c_jk counts label k in group j.
inline MatrixXd classification_noas(const ClassificationSimInstance& inst) {
  const auto l = static_cast<Eigen::Index>(inst.num_labels);
  const MatrixXd means = group_sums(inst.features, inst.g) / static_cast<double>(inst.g);
  MatrixXd c = MatrixXd::Zero(l, inst.features.cols());
  std::vector<double> weight(inst.num_labels, 0.0);
  for (std::size_t i = 0; i < inst.labels.size(); ++i) {
    c.row(static_cast<Eigen::Index>(inst.labels[i])) += means.row(static_cast<Eigen::Index>(i / inst.g));
    weight[inst.labels[i]] += 1.0;
  }
  for (std::size_t k = 0; k < inst.num_labels; ++k)
    if (weight[k] > 0.0) c.row(static_cast<Eigen::Index>(k)) /= weight[k];
  return c;
}

/// Every sample takes the label of its group whose NoAS centroid is nearest
/// (ties to the lower label); centroids are then recomputed per sample.
inline MatrixXd classification_as(const ClassificationSimInstance& inst) {
  const MatrixXd ref = classification_noas(inst);
  std::vector<std::size_t> relabel(inst.labels.size());
  std::vector<std::size_t> present;
  for (std::size_t base = 0; base < inst.labels.size(); base += inst.g) {
    present.assign(inst.labels.begin() + static_cast<std::ptrdiff_t>(base),
                   inst.labels.begin() + static_cast<std::ptrdiff_t>(base + inst.g));
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    for (std::size_t i = base; i < base + inst.g; ++i) {
      const auto x = inst.features.row(static_cast<Eigen::Index>(i));
      std::size_t best = present[0];
      double best_d = (x - ref.row(static_cast<Eigen::Index>(best))).squaredNorm();
      for (std::size_t k : present) {
        const double dist = (x - ref.row(static_cast<Eigen::Index>(k))).squaredNorm();
        if (dist < best_d) best = k, best_d = dist;
      }
      relabel[i] = best;
    }
  }
  return detail::centroids(inst.features, relabel, inst.num_labels);
}

/// Errors are centroid distances to the class vectors, relative to the
/// known-correspondence centroids of the same trial.
inline std::vector<SweepRow> run_classification_sim(const ClassificationSimConfig& cfg,
                                                    std::span<const double> sigma2_list) {
  cfg.validate();
  detail::require_sigma_list(sigma2_list);
  std::vector<SweepRow> rows;
  for (std::size_t s = 0; s < sigma2_list.size(); ++s) {
    ClassificationSimConfig c = cfg;
    c.sigma2 = sigma2_list[s];
    std::vector<detail::TrialOutcome> out(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t t) {
      Rng rng(Rng::split(Rng::split(cfg.seed, s), t));
      const auto inst = gen_classification(c, rng);
      const MatrixXd oracle = classification_oracle(inst);
      out[t] = {true, relative_error(classification_noas(inst), oracle, inst.class_vectors),
                relative_error(classification_as(inst), oracle, inst.class_vectors)};
    });
    rows.push_back(detail::summarize(c.sigma2, out));
  }
  return rows;
}

inline void write_classification_csv(std::ostream& os, std::span<const SweepRow> rows) {
  detail::write_sweep_csv(os, rows, "rel_err");
}

}  // namespace eagle

#endif  // EAGLE_SIMLAB_HPP_
