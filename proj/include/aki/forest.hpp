#pragma once

#include "aki/preop_model.hpp"
#include "aki/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aki {

// ---- univariate F-test screening -----------------------------------------

struct FeatureFTest {
    std::string feature;
    double f = 0.0;
    double p_value = 1.0;
    bool selected = false;
};

struct ScreeningResult {
    double alpha = 0.05;
    std::vector<FeatureFTest> per_feature;
    std::vector<std::string> selected; // in matrix column order
};

// one-way two-group ANOVA F statistic (infinite when within-group variance
// vanishes with distinct group means)
double f_statistic(std::span<const double> values, const std::vector<std::uint8_t>& outcome);

// Features with p < alpha from F(1, n-2). If nothing passes, the single
// smallest-p feature is kept so downstream fits always have a column.
ScreeningResult f_test_screen(const FeatureMatrix& matrix,
                              const std::vector<std::uint8_t>& outcome, double alpha);

// ---- random forest --------------------------------------------------------

enum class MaxFeaturesKind : std::uint8_t { sqrt_, log2_, fraction, all };

struct MaxFeatures {
    MaxFeaturesKind kind = MaxFeaturesKind::sqrt_;
    double fraction = 1.0; // used when kind == fraction

    int resolve(int n_features) const;
    std::string repr() const;
    static MaxFeatures parse(const std::string& text);
};

struct ForestConfig {
    int n_trees = 100;
    MaxFeatures max_features;
    int min_samples_leaf = 1;
    int max_depth = 0; // 0 = unlimited
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double p1 = 0.0; // leaf class-1 proportion
    std::int32_t n = 0;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
};

struct ForestModel {
    std::vector<Tree> trees;
    std::vector<std::string> columns;
    ForestConfig config;
    std::vector<double> gini_importance; // impurity-decrease totals per column
    bool fitted = false;
};

// Bagged CART: each tree fits a bootstrap resample; splits minimize Gini
// impurity over a per-node random feature subset with midpoint thresholds;
// Gini ties resolve to the lowest feature index, then the lowest threshold.
ForestModel fit_forest(const FeatureMatrix& matrix, const std::vector<std::uint8_t>& outcome,
                       const ForestConfig& cfg);

// mean over trees of the reached leaf's class-1 proportion
std::vector<double> predict_forest(const ForestModel& model, const FeatureMatrix& matrix);

std::string forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const std::string& text);

// ---- grid search ----------------------------------------------------------

struct GridCell {
    int n_trees = 100;
    MaxFeatures max_features;
    int min_samples_leaf = 1;
    double alpha = 0.05; // F-test screen level, tuned with the rest

    std::string key() const;
};

struct GridRow {
    GridCell cell;
    double mean_auc = 0.0;
    std::vector<double> fold_aucs;
};

struct GridSearchResult {
    GridCell best;
    std::vector<GridRow> table;
    ScreeningResult final_screen; // refit on the full matrix at best.alpha
    ForestModel model;            // refit on the full matrix at the best cell
};

struct GridSpec {
    std::vector<int> trees;
    std::vector<MaxFeatures> max_features;
    std::vector<int> min_samples_leaf;
    std::vector<double> alphas;
    int max_depth = 0;

    std::vector<GridCell> cells() const;
};

// Stratified k-fold CV over the cell lattice; the F-test screen refits inside
// every training fold, and `always_include` columns bypass it. Ties in mean
// AUROC prefer fewer trees, then larger min_samples_leaf, then the
// lexicographically smallest cell key.
GridSearchResult grid_search(const FeatureMatrix& matrix,
                             const std::vector<std::uint8_t>& outcome, const GridSpec& grid,
                             const std::vector<std::string>& always_include, int folds,
                             std::uint64_t seed, int jobs);

// ---- comparison suite -----------------------------------------------------

struct SuiteConfig {
    std::vector<double> lambda_grid = {0.1, 1.0, 10.0};
    int preop_df = 4;
    GridSpec forest_grid;
    int folds = 5;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct ComparisonSuite {
    PreopModel preop_only;
    GridSearchResult intraop_only;
    GridSearchResult proposed; // screened intraop + preop_score
    GridSearchResult full;     // screened intraop + all preop features
    std::vector<double> oof_preop_scores;
};

// Trains the four models of the comparison: (a) intraop-only forest,
// (b) preop-only additive model, (c) the proposed stack (out-of-fold preop
// scores appended as a feature), (d) the full stack with every preop column.
ComparisonSuite train_comparison_suite(const FeatureMatrix& preop_matrix,
                                       const FeatureMatrix& intraop_matrix,
                                       const std::vector<std::uint8_t>& outcome,
                                       const SuiteConfig& cfg);

// Test-time scores for the four models; `preop_test`/`intraop_test` must be
// row-aligned. Returns {intraop_only, preop_only, proposed, full}.
struct SuiteScores {
    std::vector<double> intraop_only;
    std::vector<double> preop_only;
    std::vector<double> proposed;
    std::vector<double> full;
};

SuiteScores score_comparison_suite(const ComparisonSuite& suite, const FeatureMatrix& preop_m,
                                   const FeatureMatrix& intraop_m);

} // namespace aki
