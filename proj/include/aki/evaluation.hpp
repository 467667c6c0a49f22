#pragma once

#include "aki/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace aki {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // from (0,0) to (1,1)
    double auc = 0.0;
};

struct ClassificationTable {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double ppv = 0.0; // NaN when tp+fp == 0
    double npv = 0.0; // NaN when tn+fn == 0
};

struct NriResult {
    std::int64_t event_up = 0, event_down = 0;
    std::int64_t nonevent_up = 0, nonevent_down = 0;
    std::int64_t n_events = 0, n_nonevents = 0;
    double nri = 0.0;
    double p_value = 1.0;
};

struct BootstrapCI {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int n_resamples = 0;
    std::uint64_t seed = 0;
};

// Mann-Whitney AUC via sort-and-rank (ties get half credit) plus the curve
// from a threshold sweep over the unique scores.
RocCurve auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

// Threshold (among observed scores, rule: high risk iff score >= t) that
// maximizes J = sensitivity + specificity - 1, smallest t on ties.
double youden_cutoff(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels);

ClassificationTable classification_metrics(const std::vector<double>& scores,
                                           const std::vector<std::uint8_t>& labels,
                                           double threshold);

// Two-category net reclassification improvement with Pencina's asymptotic
// normal p-value.
NriResult nri(const std::vector<std::uint8_t>& labels, const std::vector<std::uint8_t>& old_risk,
              const std::vector<std::uint8_t>& new_risk);

// Percentile bootstrap over jointly resampled (score, label) pairs.
// Resamples that end up single-class are redrawn (up to 50 retries each).
using PairStatistic =
    std::function<double(const std::vector<double>&, const std::vector<std::uint8_t>&)>;

BootstrapCI bootstrap_ci(const PairStatistic& statistic, const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels, int n_resamples,
                         std::uint64_t seed);

// ---- report assembly ----------------------------------------------------

struct MetricWithCI {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct ModelEvaluation {
    std::string model;
    double cutoff = 0.0; // Youden-optimal, from training scores
    MetricWithCI auc, accuracy, sensitivity, specificity, ppv, npv;
    RocCurve roc;
};

struct ReclassificationFlow {
    // counts over test rows: old risk class -> new risk class
    std::int64_t low_low = 0, low_high = 0, high_low = 0, high_high = 0;
};

struct OutcomeEvaluation {
    std::string outcome;
    std::vector<ModelEvaluation> models;
    NriResult nri_proposed_vs_preop;
    MetricWithCI nri_ci;
    ReclassificationFlow events_flow;
    ReclassificationFlow nonevents_flow;
};

struct EvaluationReport {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::vector<OutcomeEvaluation> outcomes;
};

// Scores for one model on train and test rows (train scores pick the cutoff).
struct ModelScores {
    std::string model;
    std::vector<double> train_scores;
    std::vector<double> test_scores;
};

// Builds the per-outcome metric blocks, NRI of proposed-vs-preop, and the
// reclassification flows. `model_scores` must contain "preop_only" and
// "proposed" entries for the NRI block.
OutcomeEvaluation evaluate_outcome(const std::string& outcome,
                                   const std::vector<ModelScores>& model_scores,
                                   const std::vector<std::uint8_t>& train_labels,
                                   const std::vector<std::uint8_t>& test_labels, int bootstrap_n,
                                   std::uint64_t seed);

} // namespace aki
