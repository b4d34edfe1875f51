#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wamlab/core.hpp"

namespace wamlab {

// One episode-level scalar with its task and outcome.
struct LabeledScore {
  std::string task_id;
  int episode_id = 0;
  double score = 0.0;
  bool label = false;  // success
};

struct ZscoreResult {
  std::vector<LabeledScore> scores;          // same order, score replaced by z
  std::vector<std::string> degenerate_tasks; // zero within-task std -> z = 0
};

// Within each task: z = (score - task mean) / task population std.
ZscoreResult zscore_per_task(const std::vector<LabeledScore>& scores);

// (mean_a - mean_b) / pooled sd, with sample variances. Throws if a group
// has fewer than two elements or the pooled variance is zero.
double cohens_d(const std::vector<double>& group_a,
                const std::vector<double>& group_b);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool converged = false;
  bool separation = false;  // classes perfectly separated in the feature
  int iterations = 0;
};

// Maximum-likelihood 1-D logistic regression via iteratively reweighted
// least squares; converges when the parameter change drops below 1e-8 or
// 100 iterations elapse. Throws on single-class input.
LogisticFit fit_logistic_1d(const std::vector<double>& features,
                            const std::vector<bool>& labels);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0)..(1,1)
  double auc = 0.0;                               // trapezoid over points
};

RocCurve roc_from_scores(const std::vector<double>& scores,
                         const std::vector<bool>& labels);

struct CvFold {
  LogisticFit fit;
  double fold_auc = 0.0;  // on out-of-fold probabilities
  double raw_auc = 0.0;   // on the fold's raw features
  std::vector<int> test_indices;
};

struct CvResult {
  RocCurve curve;  // pooled out-of-fold probabilities
  std::vector<CvFold> folds;
  int k_used = 0;
  bool reduced_k = false;
};

// Seeded stratified k-fold logistic CV; per fold fits on the train split
// and scores the held-out episodes, then pools all out-of-fold
// probabilities into one ROC. k is reduced (and flagged) when a class is
// too small to appear in every fold.
CvResult roc_auc_cv(const std::vector<LabeledScore>& scores, int k_folds = 5,
                    RngStream stream = RngStream(0));

// Mann-Whitney statistic: fraction of (positive, negative) pairs where the
// positive outscores the negative, ties counted one half.
double auc_raw(const std::vector<double>& scores,
               const std::vector<bool>& labels);

struct Correlation {
  double pearson = 0.0;
  double spearman = 0.0;
};

// Product-moment Pearson and Spearman (Pearson of midranks, ties get the
// average rank). Throws on length < 3 or zero variance.
Correlation correlations(const std::vector<double>& x,
                         const std::vector<double>& y);

struct GapCurve {
  std::vector<double> gap;  // per step: mean(success alive) - mean(failure alive)
  bool truncated = false;   // a class ran out of alive episodes
};

// Per-step success-minus-failure mean over episodes still alive at each
// step. Throws if a class is empty.
GapCurve gap_curve(const std::vector<std::vector<double>>& success_series,
                   const std::vector<std::vector<double>>& failure_series);

}  // namespace wamlab
