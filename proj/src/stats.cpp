#include "wamlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace wamlab {

namespace {

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Midranks with ties averaged, 1-based.
std::vector<double> midranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson_of(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("correlations: zero variance input");
  }
  return sxy / std::sqrt(sxx * syy);
}

bool perfectly_separated(const std::vector<double>& x,
                         const std::vector<bool>& y) {
  double min_pos = std::numeric_limits<double>::infinity();
  double max_pos = -std::numeric_limits<double>::infinity();
  double min_neg = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i]) {
      min_pos = std::min(min_pos, x[i]);
      max_pos = std::max(max_pos, x[i]);
    } else {
      min_neg = std::min(min_neg, x[i]);
      max_neg = std::max(max_neg, x[i]);
    }
  }
  return min_pos > max_neg || max_pos < min_neg;
}

}  // namespace

ZscoreResult zscore_per_task(const std::vector<LabeledScore>& scores) {
  std::map<std::string, std::pair<double, double>> stats;  // task -> (sum, count)
  for (const auto& s : scores) {
    auto& [sum, count] = stats[s.task_id];
    sum += s.score;
    count += 1.0;
  }
  std::map<std::string, double> mean, var;
  for (const auto& [task, sc] : stats) mean[task] = sc.first / sc.second;
  for (const auto& s : scores) {
    const double d = s.score - mean[s.task_id];
    var[s.task_id] += d * d;
  }
  for (const auto& [task, sc] : stats) var[task] /= sc.second;  // population

  ZscoreResult out;
  out.scores = scores;
  for (const auto& [task, v] : var) {
    if (v == 0.0) out.degenerate_tasks.push_back(task);
  }
  for (auto& s : out.scores) {
    const double v = var[s.task_id];
    s.score = v == 0.0 ? 0.0 : (s.score - mean[s.task_id]) / std::sqrt(v);
  }
  return out;
}

double cohens_d(const std::vector<double>& group_a,
                const std::vector<double>& group_b) {
  const std::size_t na = group_a.size();
  const std::size_t nb = group_b.size();
  if (na < 2 || nb < 2) {
    throw std::invalid_argument("cohens_d: each group needs >= 2 elements");
  }
  const double ma = mean_of(group_a);
  const double mb = mean_of(group_b);
  double sa2 = 0.0, sb2 = 0.0;
  for (double x : group_a) sa2 += (x - ma) * (x - ma);
  for (double x : group_b) sb2 += (x - mb) * (x - mb);
  sa2 /= static_cast<double>(na - 1);
  sb2 /= static_cast<double>(nb - 1);
  const double pooled =
      ((static_cast<double>(na - 1)) * sa2 + (static_cast<double>(nb - 1)) * sb2) /
      static_cast<double>(na + nb - 2);
  if (pooled == 0.0) {
    throw std::invalid_argument("cohens_d: zero pooled variance, effect size undefined");
  }
  return (ma - mb) / std::sqrt(pooled);
}

LogisticFit fit_logistic_1d(const std::vector<double>& features,
                            const std::vector<bool>& labels) {
  if (features.size() != labels.size() || features.empty()) {
    throw std::invalid_argument("fit_logistic_1d: misaligned or empty input");
  }
  const std::size_t n = features.size();
  const std::size_t n_pos =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (n_pos == 0 || n_pos == n) {
    throw std::invalid_argument("fit_logistic_1d: both classes required");
  }

  LogisticFit fit;
  constexpr int kMaxIter = 100;
  constexpr double kTol = 1e-8;
  double b0 = 0.0, b1 = 0.0;
  for (int iter = 1; iter <= kMaxIter; ++iter) {
    // Newton step on the log-likelihood with the 2x2 observed information.
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(b0 + b1 * features[i]);
      const double r = (labels[i] ? 1.0 : 0.0) - p;
      const double w = std::max(p * (1.0 - p), 1e-12);
      g0 += r;
      g1 += r * features[i];
      h00 += w;
      h01 += w * features[i];
      h11 += w * features[i] * features[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (std::abs(det) < 1e-300) break;
    const double d0 = (h11 * g0 - h01 * g1) / det;
    const double d1 = (h00 * g1 - h01 * g0) / det;
    b0 += d0;
    b1 += d1;
    fit.iterations = iter;
    if (std::abs(d0) < kTol && std::abs(d1) < kTol) {
      fit.converged = true;
      break;
    }
  }
  fit.intercept = b0;
  fit.slope = b1;
  if (!fit.converged && perfectly_separated(features, labels)) {
    fit.separation = true;
  }
  return fit;
}

RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<bool>& labels) {
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (bool l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_from_scores: both classes required");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    // Sweep one threshold group (tied scores move together).
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++tp; else ++fp;
      ++j;
    }
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  double auc = 0.0;
  for (std::size_t p = 1; p < roc.points.size(); ++p) {
    const auto& [x0, y0] = roc.points[p - 1];
    const auto& [x1, y1] = roc.points[p];
    auc += (x1 - x0) * 0.5 * (y0 + y1);
  }
  roc.auc = auc;
  return roc;
}

CvResult roc_auc_cv(const std::vector<LabeledScore>& scores, int k_folds,
                    RngStream stream) {
  if (k_folds < 2) throw std::invalid_argument("roc_auc_cv: k must be >= 2");
  std::vector<int> pos, neg;
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    (scores[i].label ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("roc_auc_cv: both classes required");
  }
  if (pos.size() < 2 || neg.size() < 2) {
    throw std::invalid_argument("roc_auc_cv: each class needs >= 2 episodes");
  }

  CvResult out;
  out.k_used = std::min<int>(k_folds, static_cast<int>(std::min(pos.size(), neg.size())));
  out.reduced_k = out.k_used != k_folds;

  // Seeded Fisher-Yates within each class, then round-robin dealing keeps
  // every fold stratified.
  auto shuffle = [&stream](std::vector<int>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(stream.uniform() * static_cast<double>(i));
      std::swap(xs[i - 1], xs[std::min(j, i - 1)]);
    }
  };
  shuffle(pos);
  shuffle(neg);
  std::vector<int> fold_of(scores.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i)
    fold_of[pos[i]] = static_cast<int>(i % out.k_used);
  for (std::size_t i = 0; i < neg.size(); ++i)
    fold_of[neg[i]] = static_cast<int>(i % out.k_used);

  std::vector<double> pooled_probs;
  std::vector<bool> pooled_labels;
  pooled_probs.reserve(scores.size());
  pooled_labels.reserve(scores.size());
  for (int f = 0; f < out.k_used; ++f) {
    std::vector<double> train_x, test_x;
    std::vector<bool> train_y, test_y;
    CvFold fold;
    for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
      if (fold_of[i] == f) {
        test_x.push_back(scores[i].score);
        test_y.push_back(scores[i].label);
        fold.test_indices.push_back(i);
      } else {
        train_x.push_back(scores[i].score);
        train_y.push_back(scores[i].label);
      }
    }
    fold.fit = fit_logistic_1d(train_x, train_y);
    std::vector<double> probs;
    probs.reserve(test_x.size());
    for (double x : test_x)
      probs.push_back(sigmoid(fold.fit.intercept + fold.fit.slope * x));
    fold.fold_auc = auc_raw(probs, test_y);
    fold.raw_auc = auc_raw(test_x, test_y);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      pooled_probs.push_back(probs[i]);
      pooled_labels.push_back(test_y[i]);
    }
    out.folds.push_back(std::move(fold));
  }
  out.curve = roc_from_scores(pooled_probs, pooled_labels);
  return out;
}

double auc_raw(const std::vector<double>& scores,
               const std::vector<bool>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("auc_raw: misaligned or empty input");
  }
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("auc_raw: both classes required");
  }
  // Rank-sum form of the Mann-Whitney count; ties contribute one half
  // through the midranks.
  std::vector<double> all;
  all.reserve(scores.size());
  all.insert(all.end(), pos.begin(), pos.end());
  all.insert(all.end(), neg.begin(), neg.end());
  const std::vector<double> ranks = midranks(all);
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) rank_sum_pos += ranks[i];
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

Correlation correlations(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw std::invalid_argument("correlations: aligned lists of length >= 3 required");
  }
  Correlation out;
  out.pearson = pearson_of(x, y);
  out.spearman = pearson_of(midranks(x), midranks(y));
  return out;
}

GapCurve gap_curve(const std::vector<std::vector<double>>& success_series,
                   const std::vector<std::vector<double>>& failure_series) {
  if (success_series.empty() || failure_series.empty()) {
    throw std::invalid_argument("gap_curve: one series per class required");
  }
  auto longest = [](const std::vector<std::vector<double>>& m) {
    std::size_t n = 0;
    for (const auto& s : m) n = std::max(n, s.size());
    return n;
  };
  const std::size_t steps = std::max(longest(success_series), longest(failure_series));
  GapCurve out;
  for (std::size_t t = 0; t < steps; ++t) {
    double ssum = 0.0, fsum = 0.0;
    int salive = 0, falive = 0;
    for (const auto& s : success_series) {
      if (t < s.size()) { ssum += s[t]; ++salive; }
    }
    for (const auto& s : failure_series) {
      if (t < s.size()) { fsum += s[t]; ++falive; }
    }
    if (salive == 0 || falive == 0) {
      out.truncated = true;
      break;
    }
    out.gap.push_back(ssum / salive - fsum / falive);
  }
  return out;
}

}  // namespace wamlab
