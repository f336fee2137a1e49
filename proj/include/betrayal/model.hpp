#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "betrayal/rng.hpp"
#include "betrayal/stats.hpp"

// Univariate feature selection, regularized logistic regression,
// game-grouped cross-validation, grid search and evaluation metrics.
// The module is dataset-agnostic: rows are feature vectors, labels are
// binary, and each row carries a group key so that rows from the same
// game never straddle a train/validation split.
namespace betrayal::model {

struct SingleClass : std::runtime_error {
  SingleClass() : std::runtime_error("labels contain a single class") {}
};

struct NonFinite : std::runtime_error {
  NonFinite() : std::runtime_error("feature matrix contains non-finite values") {}
};

struct TooFewGroups : std::runtime_error {
  TooFewGroups(std::size_t groups, std::size_t k)
      : std::runtime_error("grouped k-fold: " + std::to_string(groups) +
                           " distinct groups cannot fill " + std::to_string(k) +
                           " folds") {}
};

struct LengthMismatch : std::runtime_error {
  LengthMismatch(std::size_t a, std::size_t b)
      : std::runtime_error("prediction/label length mismatch: " +
                           std::to_string(a) + " vs " + std::to_string(b)) {}
};

struct ArtifactError : std::runtime_error {
  explicit ArtifactError(const std::string& what)
      : std::runtime_error("model artifact: " + what) {}
};

enum class Scorer { anova_f, chi2 };
enum class ClassWeight { none, balanced };
enum class Regularizer { l1, l2 };
enum class Objective { accuracy, f1 };

inline std::string to_string(Scorer s) {
  return s == Scorer::anova_f ? "anova_f" : "chi2";
}
inline std::string to_string(ClassWeight w) {
  return w == ClassWeight::none ? "none" : "balanced";
}
inline std::string to_string(Regularizer r) {
  return r == Regularizer::l1 ? "l1" : "l2";
}
inline std::string to_string(Objective o) {
  return o == Objective::accuracy ? "accuracy" : "f1";
}

inline Scorer parse_scorer(const std::string& s) {
  if (s == "anova_f") return Scorer::anova_f;
  if (s == "chi2") return Scorer::chi2;
  throw std::invalid_argument("unknown scorer: " + s);
}
inline ClassWeight parse_class_weight(const std::string& s) {
  if (s == "none") return ClassWeight::none;
  if (s == "balanced") return ClassWeight::balanced;
  throw std::invalid_argument("unknown class weight: " + s);
}
inline Regularizer parse_regularizer(const std::string& s) {
  if (s == "l1") return Regularizer::l1;
  if (s == "l2") return Regularizer::l2;
  throw std::invalid_argument("unknown regularizer: " + s);
}
inline Objective parse_objective(const std::string& s) {
  if (s == "accuracy") return Objective::accuracy;
  if (s == "f1") return Objective::f1;
  throw std::invalid_argument("unknown objective: " + s);
}

// Sentinel for "keep every feature".
inline constexpr std::size_t kAllFeatures =
    std::numeric_limits<std::size_t>::max();

inline constexpr double kMinC = 1e-12;
inline constexpr double kMaxC = 1e12;

struct ModelConfig {
  std::size_t k_features = kAllFeatures;
  Scorer scorer = Scorer::anova_f;
  ClassWeight class_weight = ClassWeight::balanced;
  Regularizer regularizer = Regularizer::l2;
  double C = 1.0;
  Objective objective = Objective::accuracy;

  bool operator==(const ModelConfig&) const = default;
};

inline void validate(const ModelConfig& cfg) {
  if (!(cfg.C >= kMinC && cfg.C <= kMaxC))
    throw std::invalid_argument("C outside [1e-12, 1e12]");
  if (cfg.k_features == 0)
    throw std::invalid_argument("k_features must be positive");
}

struct Dataset {
  std::vector<std::vector<double>> X;  // row major
  std::vector<int> y;
  std::vector<std::string> groups;     // one group key per row
  std::vector<std::string> feature_names;

  std::size_t n_rows() const { return X.size(); }
  std::size_t n_features() const { return X.empty() ? 0 : X.front().size(); }
};

namespace detail {

inline void check_rectangular(const std::vector<std::vector<double>>& x) {
  if (x.empty()) throw std::invalid_argument("empty feature matrix");
  const std::size_t d = x.front().size();
  for (const auto& row : x)
    if (row.size() != d)
      throw std::invalid_argument("ragged feature matrix");
}

inline void check_finite(const std::vector<std::vector<double>>& x) {
  for (const auto& row : x)
    for (double v : row)
      if (!std::isfinite(v)) throw NonFinite();
}

// Returns (count of zeros, count of ones); anything else is rejected.
inline std::pair<std::size_t, std::size_t> check_binary(
    const std::vector<int>& y) {
  std::size_t n0 = 0, n1 = 0;
  for (int v : y) {
    if (v == 0)
      ++n0;
    else if (v == 1)
      ++n1;
    else
      throw std::invalid_argument("labels must be 0 or 1");
  }
  if (n0 == 0 || n1 == 0) throw SingleClass();
  return {n0, n1};
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Per-feature univariate scores against a binary target.  anova_f is the
// between/within mean-square ratio of a one-way ANOVA; chi2 first min-max
// scales each feature to [0,1] (the statistic needs nonnegative mass) and
// then compares class-conditional mass against its expectation.
inline std::vector<double> feature_scores(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    Scorer scorer) {
  detail::check_rectangular(x);
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  const auto [n0, n1] = detail::check_binary(y);
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();

  std::vector<double> scores(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double minv = x[0][j], maxv = x[0][j];
    double sum0 = 0.0, sum1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x[i][j];
      minv = std::min(minv, v);
      maxv = std::max(maxv, v);
      (y[i] ? sum1 : sum0) += v;
    }
    if (minv == maxv) continue;  // constant feature scores 0 under either scorer

    if (scorer == Scorer::anova_f) {
      const double m0 = sum0 / static_cast<double>(n0);
      const double m1 = sum1 / static_cast<double>(n1);
      const double g = (sum0 + sum1) / static_cast<double>(n);
      const double ssb = static_cast<double>(n0) * (m0 - g) * (m0 - g) +
                         static_cast<double>(n1) * (m1 - g) * (m1 - g);
      double ssw = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dev = x[i][j] - (y[i] ? m1 : m0);
        ssw += dev * dev;
      }
      if (ssw == 0.0) {
        scores[j] = ssb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      } else {
        scores[j] = ssb / (ssw / static_cast<double>(n - 2));
      }
    } else {
      const double range = maxv - minv;
      double obs0 = 0.0, obs1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = (x[i][j] - minv) / range;
        (y[i] ? obs1 : obs0) += v;
      }
      const double total = obs0 + obs1;
      if (total == 0.0) continue;
      const double exp0 = total * static_cast<double>(n0) / static_cast<double>(n);
      const double exp1 = total * static_cast<double>(n1) / static_cast<double>(n);
      scores[j] = (obs0 - exp0) * (obs0 - exp0) / exp0 +
                  (obs1 - exp1) * (obs1 - exp1) / exp1;
    }
  }
  return scores;
}

// Top-k feature indices, returned in ascending index order.  Ties on the
// score go to the lower index; k larger than the feature count keeps all.
inline std::vector<std::size_t> univariate_select(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y,
    std::size_t k, Scorer scorer) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  detail::check_rectangular(x);
  const std::size_t d = x.front().size();
  std::vector<std::size_t> idx(d);
  for (std::size_t j = 0; j < d; ++j) idx[j] = j;
  if (k >= d) {
    detail::check_binary(y);  // the single-class contract holds regardless of k
    return idx;
  }
  const auto scores = feature_scores(x, y, scorer);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct TrainedModel {
  std::vector<std::size_t> selected_indices;  // into the original feature space
  std::vector<std::string> feature_names;     // of the selected features
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<double> weights;
  double intercept = 0.0;
  ModelConfig config;
};

// Objective values of every accepted optimizer step, first entry being the
// value at the zero start.
struct FitTrace {
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

// log(1 + e^t) without overflow.
inline double log1pexp(double t) {
  if (t > 36.0) return t;
  if (t < -36.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Weighted logistic objective over a standardized design matrix.  The
// parameter vector stacks the feature weights with the intercept last;
// the penalty never touches the intercept.
struct LogisticProblem {
  const std::vector<std::vector<double>>* z = nullptr;
  const std::vector<int>* y = nullptr;
  std::vector<double> sample_weight;
  double inv_c = 1.0;
  Regularizer reg = Regularizer::l2;

  std::size_t dim() const { return z->empty() ? 1 : z->front().size() + 1; }

  double margin(const std::vector<double>& theta, std::size_t i) const {
    const auto& row = (*z)[i];
    double eta = theta.back();
    for (std::size_t j = 0; j < row.size(); ++j) eta += theta[j] * row[j];
    return eta;
  }

  double smooth_value(const std::vector<double>& theta) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < z->size(); ++i) {
      const double eta = margin(theta, i);
      loss += sample_weight[i] *
              (log1pexp(eta) - static_cast<double>((*y)[i]) * eta);
    }
    return loss / static_cast<double>(z->size());
  }

  void smooth_gradient(const std::vector<double>& theta,
                       std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < z->size(); ++i) {
      const double resid =
          sample_weight[i] * (sigmoid(margin(theta, i)) -
                              static_cast<double>((*y)[i]));
      const auto& row = (*z)[i];
      for (std::size_t j = 0; j < row.size(); ++j) grad[j] += resid * row[j];
      grad.back() += resid;
    }
    const double inv_n = 1.0 / static_cast<double>(z->size());
    for (double& g : grad) g *= inv_n;
  }

  double penalty(const std::vector<double>& theta) const {
    double p = 0.0;
    for (std::size_t j = 0; j + 1 < theta.size(); ++j)
      p += reg == Regularizer::l1 ? std::fabs(theta[j])
                                  : 0.5 * theta[j] * theta[j];
    return inv_c * p;
  }

  double value(const std::vector<double>& theta) const {
    return smooth_value(theta) + penalty(theta);
  }

  // Full gradient; only defined for the smooth l2 objective.
  void gradient(const std::vector<double>& theta,
                std::vector<double>& grad) const {
    smooth_gradient(theta, grad);
    if (reg == Regularizer::l2)
      for (std::size_t j = 0; j + 1 < theta.size(); ++j)
        grad[j] += inv_c * theta[j];
  }
};

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline constexpr std::size_t kMaxIterations = 10000;
inline constexpr double kTolerance = 1e-8;
inline constexpr double kMinStep = 1e-18;

// Gradient descent with backtracking line search; every accepted step
// passes an Armijo decrease test, so the recorded objective trace is
// non-increasing by construction.
inline void minimize_l2(const LogisticProblem& problem,
                        std::vector<double>& theta, FitTrace* trace) {
  double f = problem.value(theta);
  if (trace) trace->objective.push_back(f);
  std::vector<double> grad(theta.size()), cand(theta.size());
  double step = 1.0;
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    problem.gradient(theta, grad);
    const double gn = norm2(grad);
    if (gn <= kTolerance) {
      if (trace) {
        trace->converged = true;
        trace->iterations = iter;
      }
      return;
    }
    double alpha = step * 2.0;
    bool accepted = false;
    while (alpha >= kMinStep) {
      for (std::size_t j = 0; j < theta.size(); ++j)
        cand[j] = theta[j] - alpha * grad[j];
      const double fc = problem.value(cand);
      if (fc <= f - 1e-4 * alpha * gn * gn) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // at the floating-point floor; cannot improve
    theta = cand;
    f = problem.value(theta);
    step = alpha;
    if (trace) {
      trace->objective.push_back(f);
      trace->iterations = iter + 1;
    }
  }
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Proximal gradient (ISTA) with backtracking on the composite objective.
// A step is accepted only when the smooth part obeys its quadratic upper
// bound and the composite value does not rise, which keeps the recorded
// trace monotone.  Convergence is declared on the update norm.
inline void minimize_l1(const LogisticProblem& problem,
                        std::vector<double>& theta, FitTrace* trace) {
  double f_comp = problem.value(theta);
  if (trace) trace->objective.push_back(f_comp);
  std::vector<double> grad(theta.size()), cand(theta.size());
  double step = 1.0;
  for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
    const double f_smooth = problem.smooth_value(theta);
    problem.smooth_gradient(theta, grad);
    double alpha = step * 2.0;
    bool accepted = false;
    double update_norm = 0.0;
    while (alpha >= kMinStep) {
      for (std::size_t j = 0; j + 1 < theta.size(); ++j)
        cand[j] = soft_threshold(theta[j] - alpha * grad[j],
                                 alpha * problem.inv_c);
      cand.back() = theta.back() - alpha * grad.back();

      double dot = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double d = cand[j] - theta[j];
        dot += grad[j] * d;
        sq += d * d;
      }
      const double bound = f_smooth + dot + sq / (2.0 * alpha);
      const double fs_new = problem.smooth_value(cand);
      const double fc_new = fs_new + problem.penalty(cand);
      if (fs_new <= bound && fc_new <= f_comp) {
        accepted = true;
        update_norm = std::sqrt(sq);
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    theta = cand;
    f_comp = problem.value(theta);
    step = alpha;
    if (trace) {
      trace->objective.push_back(f_comp);
      trace->iterations = iter + 1;
    }
    if (update_norm <= kTolerance) {
      if (trace) trace->converged = true;
      return;
    }
  }
}

}  // namespace detail

// Select features, z-score them on this data, then minimize the weighted
// mean log-loss plus (1/C) times the chosen penalty.  Zero-variance
// features are dropped after selection; weights start at zero, so the fit
// is deterministic.  `names` labels the full feature space and may be
// empty, in which case positional names are generated.
inline TrainedModel fit_logistic(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y,
                                 const ModelConfig& config,
                                 const std::vector<std::string>& names = {},
                                 FitTrace* trace = nullptr) {
  validate(config);
  detail::check_rectangular(x);
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  detail::check_finite(x);
  const auto [n0, n1] = detail::check_binary(y);
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  if (!names.empty() && names.size() != d)
    throw std::invalid_argument("feature name count does not match matrix");

  const auto picked = univariate_select(x, y, config.k_features, config.scorer);

  TrainedModel out;
  out.config = config;
  std::vector<std::size_t> retained;
  for (std::size_t j : picked) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x[i][j];
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = x[i][j] - m;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd == 0.0) continue;  // constant under this training split
    retained.push_back(j);
    out.means.push_back(m);
    out.sds.push_back(sd);
  }
  out.selected_indices = retained;
  for (std::size_t j : retained)
    out.feature_names.push_back(names.empty() ? "feature_" + std::to_string(j)
                                              : names[j]);

  std::vector<std::vector<double>> z(n, std::vector<double>(retained.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < retained.size(); ++k)
      z[i][k] = (x[i][retained[k]] - out.means[k]) / out.sds[k];

  detail::LogisticProblem problem;
  problem.z = &z;
  problem.y = &y;
  problem.inv_c = 1.0 / config.C;
  problem.reg = config.regularizer;
  problem.sample_weight.resize(n, 1.0);
  if (config.class_weight == ClassWeight::balanced) {
    const double w0 = static_cast<double>(n) / (2.0 * static_cast<double>(n0));
    const double w1 = static_cast<double>(n) / (2.0 * static_cast<double>(n1));
    for (std::size_t i = 0; i < n; ++i) problem.sample_weight[i] = y[i] ? w1 : w0;
  }

  std::vector<double> theta(retained.size() + 1, 0.0);
  if (config.regularizer == Regularizer::l2)
    detail::minimize_l2(problem, theta, trace);
  else
    detail::minimize_l1(problem, theta, trace);

  out.weights.assign(theta.begin(), theta.end() - 1);
  out.intercept = theta.back();
  return out;
}

inline TrainedModel fit(const Dataset& data, const ModelConfig& config,
                        FitTrace* trace = nullptr) {
  return fit_logistic(data.X, data.y, config, data.feature_names, trace);
}

// `row` is a full raw feature vector; the model applies its own
// standardization to the features it kept.
inline double predict_proba(const TrainedModel& m,
                            const std::vector<double>& row) {
  double eta = m.intercept;
  for (std::size_t k = 0; k < m.selected_indices.size(); ++k) {
    const std::size_t j = m.selected_indices[k];
    if (j >= row.size())
      throw std::invalid_argument("feature vector shorter than model expects");
    eta += m.weights[k] * (row[j] - m.means[k]) / m.sds[k];
  }
  return detail::sigmoid(eta);
}

inline int predict_label(const TrainedModel& m, const std::vector<double>& row) {
  return predict_proba(m, row) >= 0.5 ? 1 : 0;
}

inline std::vector<int> predict(const TrainedModel& m,
                                const std::vector<std::vector<double>>& x) {
  std::vector<int> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(predict_label(m, row));
  return out;
}

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Distinct group keys are sorted, shuffled by the seed, and dealt
// round-robin into k folds; every row lands in exactly one validation
// fold and no group ever spans folds.
inline std::vector<Fold> grouped_kfold(const std::vector<std::string>& groups,
                                       std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("grouped k-fold needs k >= 2");
  if (groups.empty()) throw std::invalid_argument("no instances to fold");
  std::vector<std::string> distinct(groups);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < k) throw TooFewGroups(distinct.size(), k);

  rng::Xoshiro256 gen(seed);
  gen.shuffle(distinct);
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    fold_of[distinct[i]] = i % k;

  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::size_t f = fold_of.at(groups[i]);
    for (std::size_t g = 0; g < k; ++g)
      (g == f ? folds[g].validation : folds[g].train).push_back(i);
  }
  return folds;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

inline Confusion confusion_matrix(const std::vector<int>& predictions,
                                  const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw LengthMismatch(predictions.size(), labels.size());
  if (labels.empty()) throw std::invalid_argument("empty evaluation set");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1)
      (predictions[i] == 1 ? c.tp : c.fn) += 1;
    else
      (predictions[i] == 1 ? c.fp : c.tn) += 1;
  }
  return c;
}

inline double accuracy_of(const Confusion& c) {
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

// F1 of the positive class; empty precision or recall denominators give 0.
inline double f1_of(const Confusion& c) {
  const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / denom;
}

// Matthews correlation; any zero factor in the denominator yields 0, the
// value assigned to uninformative prediction patterns.
inline double mcc_of(const Confusion& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  const double f1 = tp + fp, f2 = tp + fn, f3 = tn + fp, f4 = tn + fn;
  if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(f1 * f2 * f3 * f4);
}

inline double metric_of(const Confusion& c, Objective objective) {
  return objective == Objective::accuracy ? accuracy_of(c) : f1_of(c);
}

struct EvalReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  Confusion confusion;
  std::vector<double> fold_accuracy;
  std::vector<double> fold_f1;
  std::vector<double> fold_mcc;
  // chance baselines: always-majority accuracy and an MCC of zero
  double majority_accuracy = 0.0;
  double chance_mcc = 0.0;
  // cluster bootstrap over groups; replicates == 0 when not computed
  stats::BootstrapResult mcc_bootstrap;
};

inline EvalReport evaluate(const std::vector<int>& predictions,
                           const std::vector<int>& labels) {
  EvalReport report;
  report.confusion = confusion_matrix(predictions, labels);
  report.accuracy = accuracy_of(report.confusion);
  report.f1 = f1_of(report.confusion);
  report.mcc = mcc_of(report.confusion);
  const std::size_t pos = report.confusion.tp + report.confusion.fn;
  const std::size_t neg = report.confusion.tn + report.confusion.fp;
  report.majority_accuracy = static_cast<double>(std::max(pos, neg)) /
                             static_cast<double>(labels.size());
  report.mcc_bootstrap.point = report.mcc;
  report.mcc_bootstrap.ci_low = std::numeric_limits<double>::quiet_NaN();
  report.mcc_bootstrap.ci_high = std::numeric_limits<double>::quiet_NaN();
  return report;
}

struct RankedFeature {
  std::string name;
  double weight = 0.0;
};

// Selected features ordered by decreasing coefficient magnitude; ties keep
// selection order.
inline std::vector<RankedFeature> rank_features(const TrainedModel& m) {
  std::vector<std::size_t> order(m.weights.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(m.weights[a]) > std::fabs(m.weights[b]);
  });
  std::vector<RankedFeature> out;
  for (std::size_t i : order)
    out.push_back({m.feature_names[i], m.weights[i]});
  return out;
}

struct GridSpec {
  std::vector<std::size_t> k_features{kAllFeatures};
  std::vector<Scorer> scorers{Scorer::anova_f};
  std::vector<ClassWeight> class_weights{ClassWeight::balanced};
  std::vector<Regularizer> regularizers{Regularizer::l2};
  std::vector<double> c_values{1.0};
  Objective objective = Objective::accuracy;

  std::size_t size() const {
    return k_features.size() * scorers.size() * class_weights.size() *
           regularizers.size() * c_values.size();
  }

  // The complete search space: every scorer, class weighting and penalty,
  // k over coarse steps of the cue space, and C over integer powers of ten
  // spanning [1e-12, 1e12].
  static GridSpec full(Objective objective) {
    GridSpec g;
    g.k_features = {8, 16, 24, 32, 40, kAllFeatures};
    g.scorers = {Scorer::anova_f, Scorer::chi2};
    g.class_weights = {ClassWeight::none, ClassWeight::balanced};
    g.regularizers = {Regularizer::l1, Regularizer::l2};
    g.c_values.clear();
    for (int e = -12; e <= 12; ++e) g.c_values.push_back(std::pow(10.0, e));
    g.objective = objective;
    return g;
  }
};

struct ConfigScore {
  ModelConfig config;
  double mean_objective = 0.0;
};

struct GridSearchResult {
  ModelConfig best;
  EvalReport report;        // out-of-fold report for the best config
  TrainedModel model;       // refit on the full data with the best config
  std::vector<ConfigScore> table;
};

namespace detail {

// Grid tie-breaking: higher objective, then stronger regularization
// (smaller C), then fewer features, then enum order for full determinism.
inline bool better_config(double obj_a, const ModelConfig& a, double obj_b,
                          const ModelConfig& b, std::size_t total_features) {
  if (obj_a != obj_b) return obj_a > obj_b;
  if (a.C != b.C) return a.C < b.C;
  const auto eff = [&](std::size_t k) { return std::min(k, total_features); };
  if (eff(a.k_features) != eff(b.k_features))
    return eff(a.k_features) < eff(b.k_features);
  if (a.scorer != b.scorer) return a.scorer < b.scorer;
  if (a.class_weight != b.class_weight) return a.class_weight < b.class_weight;
  return a.regularizer < b.regularizer;
}

}  // namespace detail

// Full factorial search over the grid.  For every config, each fold's
// model is trained on the training rows only (selection and
// standardization included) and scored on its validation rows; the config
// with the best mean validation objective wins.  The report pools the
// winning config's out-of-fold predictions and attaches a
// group-resampled bootstrap interval for the MCC.
inline GridSearchResult grid_search(const Dataset& data, const GridSpec& grid,
                                    std::size_t k_folds = 5,
                                    std::uint64_t seed = 0,
                                    std::size_t bootstrap_replicates = 1000) {
  if (grid.size() == 0) throw std::invalid_argument("empty grid");
  detail::check_rectangular(data.X);
  if (data.X.size() != data.y.size() || data.X.size() != data.groups.size())
    throw std::invalid_argument("dataset rows, labels and groups must align");

  const auto folds = grouped_kfold(data.groups, k_folds, seed);

  struct FoldData {
    std::vector<std::vector<double>> x_train, x_val;
    std::vector<int> y_train, y_val;
  };
  std::vector<FoldData> fold_data(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t i : folds[f].train) {
      fold_data[f].x_train.push_back(data.X[i]);
      fold_data[f].y_train.push_back(data.y[i]);
    }
    for (std::size_t i : folds[f].validation) {
      fold_data[f].x_val.push_back(data.X[i]);
      fold_data[f].y_val.push_back(data.y[i]);
    }
  }

  GridSearchResult result;
  bool have_best = false;
  double best_objective = 0.0;
  for (std::size_t k : grid.k_features)
    for (Scorer scorer : grid.scorers)
      for (ClassWeight weight : grid.class_weights)
        for (Regularizer reg : grid.regularizers)
          for (double c : grid.c_values) {
            ModelConfig cfg;
            cfg.k_features = k;
            cfg.scorer = scorer;
            cfg.class_weight = weight;
            cfg.regularizer = reg;
            cfg.C = c;
            cfg.objective = grid.objective;

            double sum = 0.0;
            for (const auto& fd : fold_data) {
              const auto m = fit_logistic(fd.x_train, fd.y_train, cfg,
                                          data.feature_names);
              const auto preds = predict(m, fd.x_val);
              sum += metric_of(confusion_matrix(preds, fd.y_val),
                               grid.objective);
            }
            const double mean_obj = sum / static_cast<double>(fold_data.size());
            result.table.push_back({cfg, mean_obj});
            if (!have_best ||
                detail::better_config(mean_obj, cfg, best_objective,
                                      result.best, data.n_features())) {
              have_best = true;
              best_objective = mean_obj;
              result.best = cfg;
            }
          }

  // out-of-fold predictions under the winning config
  std::vector<int> oof_pred(data.n_rows(), 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto m = fit_logistic(fold_data[f].x_train, fold_data[f].y_train,
                                result.best, data.feature_names);
    const auto preds = predict(m, fold_data[f].x_val);
    Confusion c = confusion_matrix(preds, fold_data[f].y_val);
    result.report.fold_accuracy.push_back(accuracy_of(c));
    result.report.fold_f1.push_back(f1_of(c));
    result.report.fold_mcc.push_back(mcc_of(c));
    for (std::size_t i = 0; i < preds.size(); ++i)
      oof_pred[folds[f].validation[i]] = preds[i];
  }
  const EvalReport pooled = evaluate(oof_pred, data.y);
  result.report.accuracy = pooled.accuracy;
  result.report.f1 = pooled.f1;
  result.report.mcc = pooled.mcc;
  result.report.confusion = pooled.confusion;
  result.report.majority_accuracy = pooled.majority_accuracy;
  result.report.mcc_bootstrap = pooled.mcc_bootstrap;

  if (bootstrap_replicates > 0) {
    std::vector<std::string> games(data.groups);
    std::sort(games.begin(), games.end());
    games.erase(std::unique(games.begin(), games.end()), games.end());
    std::map<std::string, std::vector<std::size_t>> rows_of;
    for (std::size_t i = 0; i < data.groups.size(); ++i)
      rows_of[data.groups[i]].push_back(i);

    auto stat = [&](std::span<const std::size_t> game_idx) {
      Confusion c;
      for (std::size_t g : game_idx)
        for (std::size_t i : rows_of.at(games[g])) {
          if (data.y[i] == 1)
            (oof_pred[i] == 1 ? c.tp : c.fn) += 1;
          else
            (oof_pred[i] == 1 ? c.fp : c.tn) += 1;
        }
      return mcc_of(c);
    };
    result.report.mcc_bootstrap = stats::bootstrap_indices(
        games.size(), stat, bootstrap_replicates, seed ^ 0x5bd1e995u);
  }

  result.model = fit(data, result.best);
  return result;
}

// Versioned flat artifact so a saved model can be reloaded for scoring.
inline void save_model(std::ostream& out, const TrainedModel& m) {
  out << "betrayal-model v1\n";
  out << "scorer " << to_string(m.config.scorer) << "\n";
  out << "class_weight " << to_string(m.config.class_weight) << "\n";
  out << "regularizer " << to_string(m.config.regularizer) << "\n";
  out << "objective " << to_string(m.config.objective) << "\n";
  out << "C " << detail::fmt_double(m.config.C) << "\n";
  if (m.config.k_features == kAllFeatures)
    out << "k_features all\n";
  else
    out << "k_features " << m.config.k_features << "\n";
  out << "intercept " << detail::fmt_double(m.intercept) << "\n";
  out << "n_selected " << m.selected_indices.size() << "\n";
  for (std::size_t i = 0; i < m.selected_indices.size(); ++i)
    out << "feature " << m.selected_indices[i] << " "
        << detail::fmt_double(m.means[i]) << " " << detail::fmt_double(m.sds[i])
        << " " << detail::fmt_double(m.weights[i]) << " " << m.feature_names[i]
        << "\n";
}

inline TrainedModel load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "betrayal-model v1")
    throw ArtifactError("unsupported header");

  TrainedModel m;
  std::size_t n_selected = 0;
  bool saw_count = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    try {
      if (key == "scorer") {
        std::string v;
        ls >> v;
        m.config.scorer = parse_scorer(v);
      } else if (key == "class_weight") {
        std::string v;
        ls >> v;
        m.config.class_weight = parse_class_weight(v);
      } else if (key == "regularizer") {
        std::string v;
        ls >> v;
        m.config.regularizer = parse_regularizer(v);
      } else if (key == "objective") {
        std::string v;
        ls >> v;
        m.config.objective = parse_objective(v);
      } else if (key == "C") {
        ls >> m.config.C;
      } else if (key == "k_features") {
        std::string v;
        ls >> v;
        m.config.k_features = v == "all" ? kAllFeatures : std::stoull(v);
      } else if (key == "intercept") {
        ls >> m.intercept;
      } else if (key == "n_selected") {
        ls >> n_selected;
        saw_count = true;
      } else if (key == "feature") {
        std::size_t idx = 0;
        double mean = 0, sd = 0, weight = 0;
        std::string name;
        ls >> idx >> mean >> sd >> weight >> name;
        if (ls.fail() || name.empty())
          throw ArtifactError("malformed feature line: " + line);
        m.selected_indices.push_back(idx);
        m.means.push_back(mean);
        m.sds.push_back(sd);
        m.weights.push_back(weight);
        m.feature_names.push_back(name);
      } else {
        throw ArtifactError("unknown key: " + key);
      }
    } catch (const std::invalid_argument& e) {
      throw ArtifactError(e.what());
    }
    if (ls.fail()) throw ArtifactError("malformed line: " + line);
  }
  if (!saw_count || m.selected_indices.size() != n_selected)
    throw ArtifactError("feature count mismatch");
  for (double sd : m.sds)
    if (!(sd > 0.0)) throw ArtifactError("non-positive feature sd");
  return m;
}

}  // namespace betrayal::model
