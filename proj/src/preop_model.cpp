#include "aki/preop_model.hpp"

#include "aki/cv.hpp"
#include "aki/errors.hpp"
#include "aki/evaluation.hpp"
#include "aki/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace aki {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// truncated-power natural cubic term
double d_term(double x, double knot, double last_knot) {
    auto cube_plus = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
    return (cube_plus(x - knot) - cube_plus(x - last_knot)) / (last_knot - knot);
}

} // namespace

void SplineBasis::eval_raw(double x, double* out) const {
    if (linear) {
        out[0] = x;
        return;
    }
    const std::size_t k = knots.size();
    out[0] = x;
    const double last = knots[k - 1];
    const double second_last = knots[k - 2];
    const double d_ref = d_term(x, second_last, last);
    for (std::size_t j = 0; j + 2 < k; ++j) out[j + 1] = d_term(x, knots[j], last) - d_ref;
}

void SplineBasis::eval(double x, double* out) const {
    eval_raw(x, out);
    for (int j = 0; j < n_cols(); ++j) {
        if (scales[static_cast<std::size_t>(j)] > 0.0)
            out[j] = (out[j] - centers[static_cast<std::size_t>(j)]) /
                     scales[static_cast<std::size_t>(j)];
        else
            out[j] = 0.0;
    }
}

SplineBasis make_spline_basis(const std::string& feature, std::vector<double> train_values,
                              int df) {
    SplineBasis basis;
    basis.feature = feature;

    std::set<double> distinct(train_values.begin(), train_values.end());
    std::sort(train_values.begin(), train_values.end());

    if (static_cast<int>(distinct.size()) > 2 && df >= 2) {
        // df spline columns need df+1 quantile knots
        const int n_knots = df + 1;
        std::vector<double> knots;
        for (int k = 1; k <= n_knots; ++k)
            knots.push_back(
                quantile_sorted(train_values, static_cast<double>(k) / (n_knots + 1.0)));
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        if (knots.size() >= 3) {
            basis.knots = std::move(knots);
        } else {
            basis.linear = true;
        }
    } else {
        basis.linear = true;
    }

    // standardization statistics over the training values
    const int cols = basis.n_cols();
    std::vector<std::vector<double>> col_vals(static_cast<std::size_t>(cols));
    std::vector<double> buf(static_cast<std::size_t>(cols));
    for (double v : train_values) {
        basis.eval_raw(v, buf.data());
        for (int j = 0; j < cols; ++j) col_vals[static_cast<std::size_t>(j)].push_back(buf[j]);
    }
    for (int j = 0; j < cols; ++j) {
        const auto& cv = col_vals[static_cast<std::size_t>(j)];
        basis.centers.push_back(mean(cv));
        basis.scales.push_back(sd_pop(cv));
    }
    return basis;
}

double penalized_logistic_objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                    double lambda, const std::vector<std::uint8_t>& penalized,
                                    const Eigen::VectorXd& beta, Eigen::VectorXd* gradient) {
    const Eigen::VectorXd eta = design * beta;
    double nll = 0.0;
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(1 + e^eta) evaluated stably
        const double e = eta[i];
        const double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        nll += log1pexp - y[i] * e;
        p[i] = sigmoid(e);
    }
    double pen = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        if (penalized[static_cast<std::size_t>(j)]) pen += beta[j] * beta[j];
    if (gradient) {
        *gradient = design.transpose() * (p - y);
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            if (penalized[static_cast<std::size_t>(j)]) (*gradient)[j] += lambda * beta[j];
    }
    return nll + 0.5 * lambda * pen;
}

Eigen::VectorXd fit_penalized_logistic(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                       double lambda, const std::vector<std::uint8_t>& penalized,
                                       int max_iter, double rel_tol) {
    const Eigen::Index m = design.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd grad(m);
    double obj = penalized_logistic_objective(design, y, lambda, penalized, beta, &grad);
    const double obj0 = obj;

    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double p = sigmoid(eta[i]);
            w[i] = std::max(p * (1.0 - p), 1e-10);
        }
        Eigen::MatrixXd h = design.transpose() * w.asDiagonal() * design;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (penalized[static_cast<std::size_t>(j)]) h(j, j) += lambda;
            h(j, j) += 1e-12; // numerical jitter
        }
        const Eigen::VectorXd step = h.ldlt().solve(grad);

        double scale = 1.0;
        double new_obj = obj;
        Eigen::VectorXd candidate = beta;
        for (int halving = 0; halving < 30; ++halving) {
            candidate = beta - scale * step;
            new_obj = penalized_logistic_objective(design, y, lambda, penalized, candidate);
            if (std::isfinite(new_obj) && new_obj <= obj) break;
            scale *= 0.5;
        }
        if (!std::isfinite(new_obj) || new_obj > obj) break; // no descent possible

        const double rel = std::abs(obj - new_obj) / std::max(1.0, std::abs(obj));
        beta = candidate;
        obj = new_obj;
        penalized_logistic_objective(design, y, lambda, penalized, beta, &grad);
        if (rel < rel_tol) return beta;
    }
    if (!std::isfinite(obj) || obj > obj0)
        throw Error(ErrorCode::NonConvergence, "IRLS objective diverged");
    return beta;
}

namespace {

struct Design {
    Eigen::MatrixXd x;                    // includes leading intercept column
    std::vector<std::uint8_t> penalized;  // per design column
};

Design build_design(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                    const std::vector<SplineBasis>& bases,
                    const std::vector<std::size_t>& col_idx) {
    int total = 1;
    for (const auto& b : bases) total += b.n_cols();
    Design d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), total);
    d.penalized.assign(static_cast<std::size_t>(total), 1);
    d.penalized[0] = 0; // intercept unpenalized
    std::vector<double> buf;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        d.x(static_cast<Eigen::Index>(r), 0) = 1.0;
        int at = 1;
        for (std::size_t f = 0; f < bases.size(); ++f) {
            const int nc = bases[f].n_cols();
            buf.resize(static_cast<std::size_t>(nc));
            bases[f].eval(m.rows[rows[r]][col_idx[f]], buf.data());
            for (int j = 0; j < nc; ++j)
                d.x(static_cast<Eigen::Index>(r), at + j) = buf[static_cast<std::size_t>(j)];
            at += nc;
        }
    }
    return d;
}

std::vector<SplineBasis> fit_bases(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                                   int df) {
    std::vector<SplineBasis> bases;
    bases.reserve(m.n_cols());
    for (std::size_t j = 0; j < m.n_cols(); ++j) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (std::size_t r : rows) vals.push_back(m.rows[r][j]);
        bases.push_back(make_spline_basis(m.column_names[j], std::move(vals), df));
    }
    return bases;
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    return rows;
}

std::vector<double> predict_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows,
                                 const std::vector<SplineBasis>& bases,
                                 const std::vector<std::size_t>& col_idx,
                                 const Eigen::VectorXd& beta) {
    Design d = build_design(m, rows, bases, col_idx);
    Eigen::VectorXd eta = d.x * beta;
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = sigmoid(eta[static_cast<Eigen::Index>(i)]);
    return out;
}

void check_outcome(const std::vector<std::uint8_t>& y) {
    bool pos = false, neg = false;
    for (auto v : y) (v ? pos : neg) = true;
    if (!pos || !neg) throw Error(ErrorCode::DegenerateOutcome, "single outcome class");
}

} // namespace

PreopModel fit_preop(const FeatureMatrix& train, const std::vector<std::uint8_t>& outcome,
                     const std::vector<double>& lambda_grid, int folds, std::uint64_t seed,
                     int df) {
    if (train.n_rows() < static_cast<std::size_t>(folds) * 10)
        throw Error(ErrorCode::TooFewPerClass, "preop fit needs at least folds*10 rows");
    check_outcome(outcome);
    if (lambda_grid.empty()) throw Error(ErrorCode::ConfigError, "empty lambda grid");

    const std::vector<std::size_t> col_idx_all = all_rows(train.n_cols());
    const std::vector<int> fold_of = stratified_folds(outcome, folds, mix64(seed, hash_tag("preop/folds")));

    std::vector<std::pair<double, double>> cv_table;
    double best_lambda = lambda_grid.front();
    double best_auc = -1.0;
    for (double lambda : lambda_grid) {
        double auc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> tr, te;
            for (std::size_t i = 0; i < train.n_rows(); ++i)
                (fold_of[i] == f ? te : tr).push_back(i);
            std::vector<std::uint8_t> ytr, yte;
            for (auto i : tr) ytr.push_back(outcome[i]);
            for (auto i : te) yte.push_back(outcome[i]);

            auto bases = fit_bases(train, tr, df);
            Design d = build_design(train, tr, bases, col_idx_all);
            Eigen::VectorXd yv(static_cast<Eigen::Index>(tr.size()));
            for (std::size_t i = 0; i < tr.size(); ++i) yv[static_cast<Eigen::Index>(i)] = ytr[i];
            Eigen::VectorXd beta = fit_penalized_logistic(d.x, yv, lambda, d.penalized);
            auto scores = predict_rows(train, te, bases, col_idx_all, beta);
            auc_sum += auroc(scores, yte).auc;
        }
        const double mean_auc = auc_sum / folds;
        cv_table.emplace_back(lambda, mean_auc);
        if (mean_auc > best_auc || (mean_auc == best_auc && lambda > best_lambda)) {
            best_auc = mean_auc;
            best_lambda = lambda;
        }
    }

    // refit on the full training set at the selected lambda
    const auto rows = all_rows(train.n_rows());
    auto bases = fit_bases(train, rows, df);
    Design d = build_design(train, rows, bases, col_idx_all);
    Eigen::VectorXd yv(static_cast<Eigen::Index>(train.n_rows()));
    for (std::size_t i = 0; i < train.n_rows(); ++i) yv[static_cast<Eigen::Index>(i)] = outcome[i];
    Eigen::VectorXd beta = fit_penalized_logistic(d.x, yv, best_lambda, d.penalized);

    PreopModel model;
    model.intercept = beta[0];
    model.bases = std::move(bases);
    model.lambda = best_lambda;
    model.train_columns = train.column_names;
    model.cv_table = std::move(cv_table);
    int at = 1;
    for (const auto& b : model.bases) {
        std::vector<double> c(static_cast<std::size_t>(b.n_cols()));
        for (int j = 0; j < b.n_cols(); ++j) c[static_cast<std::size_t>(j)] = beta[at + j];
        at += b.n_cols();
        model.coefs.push_back(std::move(c));
    }
    model.fitted = true;
    return model;
}

std::vector<double> predict_preop(const PreopModel& model, const FeatureMatrix& matrix) {
    if (!model.fitted) throw Error(ErrorCode::NonConvergence, "predict on unfitted preop model");
    std::vector<std::size_t> col_idx;
    col_idx.reserve(model.train_columns.size());
    for (const auto& name : model.train_columns) col_idx.push_back(matrix.column_index(name));

    std::vector<double> out(matrix.n_rows());
    std::vector<double> buf;
    for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
        double eta = model.intercept;
        for (std::size_t f = 0; f < model.bases.size(); ++f) {
            const auto& b = model.bases[f];
            buf.resize(static_cast<std::size_t>(b.n_cols()));
            b.eval(matrix.rows[i][col_idx[f]], buf.data());
            for (int j = 0; j < b.n_cols(); ++j)
                eta += model.coefs[f][static_cast<std::size_t>(j)] * buf[static_cast<std::size_t>(j)];
        }
        out[i] = sigmoid(eta);
    }
    return out;
}

std::vector<double> preop_oof_scores(const FeatureMatrix& train,
                                     const std::vector<std::uint8_t>& outcome, double lambda,
                                     int folds, std::uint64_t seed, int df) {
    check_outcome(outcome);
    const std::vector<std::size_t> col_idx_all = all_rows(train.n_cols());
    const std::vector<int> fold_of =
        stratified_folds(outcome, folds, mix64(seed, hash_tag("preop/oof")));
    std::vector<double> out(train.n_rows(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < train.n_rows(); ++i) (fold_of[i] == f ? te : tr).push_back(i);
        std::vector<std::uint8_t> ytr;
        for (auto i : tr) ytr.push_back(outcome[i]);
        auto bases = fit_bases(train, tr, df);
        Design d = build_design(train, tr, bases, col_idx_all);
        Eigen::VectorXd yv(static_cast<Eigen::Index>(tr.size()));
        for (std::size_t i = 0; i < tr.size(); ++i) yv[static_cast<Eigen::Index>(i)] = ytr[i];
        Eigen::VectorXd beta = fit_penalized_logistic(d.x, yv, lambda, d.penalized);
        auto scores = predict_rows(train, te, bases, col_idx_all, beta);
        for (std::size_t i = 0; i < te.size(); ++i) out[te[i]] = scores[i];
    }
    return out;
}

std::string preop_to_json(const PreopModel& model) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "preop_additive_logistic";
    j["intercept"] = model.intercept;
    j["lambda"] = model.lambda;
    j["columns"] = model.train_columns;
    nlohmann::ordered_json jb = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < model.bases.size(); ++f) {
        const auto& b = model.bases[f];
        nlohmann::ordered_json e;
        e["feature"] = b.feature;
        e["linear"] = b.linear;
        e["knots"] = b.knots;
        e["centers"] = b.centers;
        e["scales"] = b.scales;
        e["coefs"] = model.coefs[f];
        jb.push_back(std::move(e));
    }
    j["bases"] = std::move(jb);
    nlohmann::ordered_json cv = nlohmann::ordered_json::array();
    for (const auto& [lambda, auc] : model.cv_table)
        cv.push_back({{"lambda", lambda}, {"mean_oof_auc", auc}});
    j["cv_table"] = std::move(cv);
    return j.dump(2);
}

PreopModel preop_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("preop model JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != 1 ||
        j.value("kind", "") != "preop_additive_logistic")
        throw Error(ErrorCode::SchemaMismatch, "not a v1 preop model artifact");
    PreopModel m;
    m.intercept = j.at("intercept").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.train_columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& e : j.at("bases")) {
        SplineBasis b;
        b.feature = e.at("feature").get<std::string>();
        b.linear = e.at("linear").get<bool>();
        b.knots = e.at("knots").get<std::vector<double>>();
        b.centers = e.at("centers").get<std::vector<double>>();
        b.scales = e.at("scales").get<std::vector<double>>();
        m.bases.push_back(std::move(b));
        m.coefs.push_back(e.at("coefs").get<std::vector<double>>());
    }
    if (j.contains("cv_table"))
        for (const auto& e : j.at("cv_table"))
            m.cv_table.emplace_back(e.at("lambda").get<double>(),
                                    e.at("mean_oof_auc").get<double>());
    m.fitted = true;
    return m;
}

} // namespace aki
