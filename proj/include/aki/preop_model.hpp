#pragma once

#include "aki/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace aki {

// Per-feature basis: natural cubic spline with quantile knots for continuous
// features, the identity for (near-)binary ones. Basis columns are
// standardized with train statistics before the ridge penalty applies, which
// makes the fit invariant to affine rescaling of the raw feature.
struct SplineBasis {
    std::string feature;
    bool linear = false;
    std::vector<double> knots; // strictly increasing; >= 3 when cubic
    std::vector<double> centers;
    std::vector<double> scales;

    int n_cols() const { return linear ? 1 : static_cast<int>(knots.size()) - 1; }
    // raw (unstandardized) basis values for one input
    void eval_raw(double x, double* out) const;
    // standardized basis values
    void eval(double x, double* out) const;
};

SplineBasis make_spline_basis(const std::string& feature, std::vector<double> train_values,
                              int df);

struct PreopModel {
    double intercept = 0.0;
    std::vector<SplineBasis> bases;          // one per training column
    std::vector<std::vector<double>> coefs;  // per basis, per basis column
    double lambda = 0.0;
    std::vector<std::string> train_columns;
    bool fitted = false;
    // CV diagnostics: per lambda, mean out-of-fold AUROC
    std::vector<std::pair<double, double>> cv_table;
};

// Penalized logistic objective
//   J(beta) = -sum_i [ y_i log p_i + (1-y_i) log(1-p_i) ] + (lambda/2) sum_{j: penalized} beta_j^2
// with optional analytic gradient; shared by the IRLS fitter and its tests.
double penalized_logistic_objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                    double lambda, const std::vector<std::uint8_t>& penalized,
                                    const Eigen::VectorXd& beta,
                                    Eigen::VectorXd* gradient = nullptr);

// Newton/IRLS with step halving. Throws NonConvergence when the iteration cap
// is hit with the objective still above its starting value.
Eigen::VectorXd fit_penalized_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       double lambda, const std::vector<std::uint8_t>& penalized,
                                       int max_iter = 100, double rel_tol = 1e-8);

// Additive model over all matrix columns: lambda tuned over `lambda_grid` by
// stratified k-fold CV on out-of-fold AUROC (ties pick the larger lambda),
// then refit on the full training matrix. Continuous features get df spline
// columns; columns with <= 2 distinct train values enter linearly.
PreopModel fit_preop(const FeatureMatrix& train, const std::vector<std::uint8_t>& outcome,
                     const std::vector<double>& lambda_grid, int folds, std::uint64_t seed,
                     int df = 4);

std::vector<double> predict_preop(const PreopModel& model, const FeatureMatrix& matrix);

// Out-of-fold training scores at a fixed lambda (stacking input; never
// in-sample).
std::vector<double> preop_oof_scores(const FeatureMatrix& train,
                                     const std::vector<std::uint8_t>& outcome, double lambda,
                                     int folds, std::uint64_t seed, int df = 4);

std::string preop_to_json(const PreopModel& model);
PreopModel preop_from_json(const std::string& text);

} // namespace aki
