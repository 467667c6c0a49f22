#include "aki/forest.hpp"

#include "aki/cv.hpp"
#include "aki/errors.hpp"
#include "aki/evaluation.hpp"
#include "aki/parallel.hpp"
#include "aki/rng.hpp"
#include "aki/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace aki {

// ---- F-test ----------------------------------------------------------------

double f_statistic(std::span<const double> values, const std::vector<std::uint8_t>& outcome) {
    double s1 = 0.0, s0 = 0.0;
    std::int64_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (outcome[i]) {
            s1 += values[i];
            ++n1;
        } else {
            s0 += values[i];
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0) throw Error(ErrorCode::DegenerateOutcome, "F-test needs both classes");
    const double m1 = s1 / static_cast<double>(n1);
    const double m0 = s0 / static_cast<double>(n0);
    const double n = static_cast<double>(n1 + n0);
    const double grand = (s1 + s0) / n;

    double ssw = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - (outcome[i] ? m1 : m0);
        ssw += d * d;
    }
    const double ssb = static_cast<double>(n1) * (m1 - grand) * (m1 - grand) +
                       static_cast<double>(n0) * (m0 - grand) * (m0 - grand);
    const double msb = ssb; // k - 1 == 1
    const double msw = ssw / (n - 2.0);
    if (msw == 0.0) return msb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return msb / msw;
}

ScreeningResult f_test_screen(const FeatureMatrix& matrix,
                              const std::vector<std::uint8_t>& outcome, double alpha) {
    ScreeningResult res;
    res.alpha = alpha;
    const double d2 = static_cast<double>(matrix.n_rows()) - 2.0;
    std::size_t best_j = 0;
    double best_p = 2.0;
    for (std::size_t j = 0; j < matrix.n_cols(); ++j) {
        FeatureFTest ft;
        ft.feature = matrix.column_names[j];
        auto col = matrix.column(j);
        ft.f = f_statistic(col, outcome);
        ft.p_value = f_test_pvalue(ft.f, 1.0, d2);
        ft.selected = ft.p_value < alpha;
        if (ft.selected) res.selected.push_back(ft.feature);
        if (ft.p_value < best_p) {
            best_p = ft.p_value;
            best_j = j;
        }
        res.per_feature.push_back(std::move(ft));
    }
    if (res.selected.empty() && !res.per_feature.empty()) {
        // keep the strongest candidate so downstream fits have a column
        res.per_feature[best_j].selected = true;
        res.selected.push_back(res.per_feature[best_j].feature);
    }
    return res;
}

// ---- max_features ----------------------------------------------------------

int MaxFeatures::resolve(int n_features) const {
    int m = n_features;
    switch (kind) {
    case MaxFeaturesKind::sqrt_:
        m = static_cast<int>(std::sqrt(static_cast<double>(n_features)));
        break;
    case MaxFeaturesKind::log2_:
        m = static_cast<int>(std::log2(static_cast<double>(n_features)));
        break;
    case MaxFeaturesKind::fraction:
        m = static_cast<int>(fraction * n_features);
        break;
    case MaxFeaturesKind::all:
        m = n_features;
        break;
    }
    return std::clamp(m, 1, n_features);
}

std::string MaxFeatures::repr() const {
    switch (kind) {
    case MaxFeaturesKind::sqrt_: return "sqrt";
    case MaxFeaturesKind::log2_: return "log2";
    case MaxFeaturesKind::all: return "all";
    case MaxFeaturesKind::fraction: {
        std::ostringstream os;
        os << fraction;
        return os.str();
    }
    }
    return "sqrt";
}

MaxFeatures MaxFeatures::parse(const std::string& text) {
    MaxFeatures mf;
    if (text == "sqrt") {
        mf.kind = MaxFeaturesKind::sqrt_;
    } else if (text == "log2") {
        mf.kind = MaxFeaturesKind::log2_;
    } else if (text == "all") {
        mf.kind = MaxFeaturesKind::all;
    } else {
        try {
            const double f = std::stod(text);
            if (!(f > 0.0 && f <= 1.0))
                throw Error(ErrorCode::ConfigError, "max_features fraction must be in (0,1]");
            mf.kind = MaxFeaturesKind::fraction;
            mf.fraction = f;
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::ConfigError, "bad max_features value '" + text + "'");
        }
    }
    return mf;
}

// ---- CART building ---------------------------------------------------------

namespace {

struct ValueBlock {
    double value;
    std::int64_t count;
    std::int64_t pos;
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gini = std::numeric_limits<double>::infinity();
    double parent_gini = 0.0;
};

double gini_of(std::int64_t n, std::int64_t pos) {
    if (n == 0) return 0.0;
    const double p1 = static_cast<double>(pos) / static_cast<double>(n);
    const double p0 = 1.0 - p1;
    return 1.0 - p1 * p1 - p0 * p0;
}

class TreeBuilder {
  public:
    TreeBuilder(const FeatureMatrix& m, const std::vector<std::size_t>& col_idx,
                const std::vector<std::uint8_t>& y, const ForestConfig& cfg, Rng rng)
        : m_(m), col_idx_(col_idx), y_(y), cfg_(cfg), rng_(rng) {}

    Tree build(std::vector<std::int32_t> rows, std::vector<double>* importance) {
        rows_ = std::move(rows);
        n_root_ = static_cast<double>(rows_.size());
        importance_ = importance;
        tree_.nodes.clear();
        tree_.nodes.push_back({});
        struct Item {
            std::int32_t node;
            std::int64_t lo, hi;
            int depth;
        };
        std::vector<Item> stack{{0, 0, static_cast<std::int64_t>(rows_.size()), 0}};
        while (!stack.empty()) {
            Item it = stack.back();
            stack.pop_back();
            const std::int64_t n = it.hi - it.lo;
            std::int64_t pos = 0;
            for (std::int64_t i = it.lo; i < it.hi; ++i) pos += y_[static_cast<std::size_t>(rows_[static_cast<std::size_t>(i)])];

            auto& node = tree_.nodes[static_cast<std::size_t>(it.node)];
            node.n = static_cast<std::int32_t>(n);
            node.p1 = static_cast<double>(pos) / static_cast<double>(n);

            const bool pure = pos == 0 || pos == n;
            const bool too_small = n < 2 * cfg_.min_samples_leaf;
            const bool at_depth = cfg_.max_depth > 0 && it.depth >= cfg_.max_depth;
            if (pure || too_small || at_depth) continue;

            SplitChoice split = choose_split(it.lo, it.hi, n, pos);
            if (!split.found) continue;

            // partition rows: value < threshold goes left
            const std::size_t fcol = col_idx_[static_cast<std::size_t>(split.feature)];
            auto mid_it = std::stable_partition(
                rows_.begin() + it.lo, rows_.begin() + it.hi,
                [&](std::int32_t r) { return m_.rows[static_cast<std::size_t>(r)][fcol] < split.threshold; });
            const std::int64_t mid = mid_it - rows_.begin();

            const auto left = static_cast<std::int32_t>(tree_.nodes.size());
            tree_.nodes.push_back({});
            const auto right = static_cast<std::int32_t>(tree_.nodes.size());
            tree_.nodes.push_back({});
            auto& nd = tree_.nodes[static_cast<std::size_t>(it.node)]; // re-take: vector grew
            nd.feature = split.feature;
            nd.threshold = split.threshold;
            nd.left = left;
            nd.right = right;
            if (importance_) {
                const double decrease = split.parent_gini - split.gini;
                (*importance_)[static_cast<std::size_t>(split.feature)] +=
                    (static_cast<double>(n) / n_root_) * decrease;
            }
            stack.push_back({right, mid, it.hi, it.depth + 1});
            stack.push_back({left, it.lo, mid, it.depth + 1});
        }
        return std::move(tree_);
    }

  private:
    SplitChoice choose_split(std::int64_t lo, std::int64_t hi, std::int64_t n, std::int64_t pos) {
        const int p = static_cast<int>(col_idx_.size());
        const int mtry = cfg_.max_features.resolve(p);

        // sample mtry distinct features, then visit in ascending column order
        // so Gini ties resolve to the lowest feature index
        std::vector<int> feats(static_cast<std::size_t>(p));
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<std::size_t>(i) +
                           static_cast<std::size_t>(rng_.uniform_int(static_cast<std::uint64_t>(p - i)));
            std::swap(feats[static_cast<std::size_t>(i)], feats[j]);
        }
        feats.resize(static_cast<std::size_t>(mtry));
        std::sort(feats.begin(), feats.end());

        SplitChoice best;
        best.parent_gini = gini_of(n, pos);
        std::vector<std::pair<double, std::uint8_t>> vals;
        std::vector<ValueBlock> blocks;
        for (int f : feats) {
            const std::size_t fcol = col_idx_[static_cast<std::size_t>(f)];
            vals.clear();
            for (std::int64_t i = lo; i < hi; ++i) {
                const auto r = static_cast<std::size_t>(rows_[static_cast<std::size_t>(i)]);
                vals.emplace_back(m_.rows[r][fcol], y_[r]);
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            blocks.clear();
            for (const auto& [v, label] : vals) {
                if (blocks.empty() || blocks.back().value != v) blocks.push_back({v, 0, 0});
                blocks.back().count++;
                blocks.back().pos += label;
            }
            if (blocks.size() < 2) continue;

            std::int64_t nl = 0, pl = 0;
            for (std::size_t b = 0; b + 1 < blocks.size(); ++b) {
                nl += blocks[b].count;
                pl += blocks[b].pos;
                const std::int64_t nr = n - nl;
                const std::int64_t pr = pos - pl;
                if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;
                const double t = 0.5 * (blocks[b].value + blocks[b + 1].value);
                if (!(blocks[b].value < t) || !(t <= blocks[b + 1].value)) continue;
                const double g = (static_cast<double>(nl) * gini_of(nl, pl) +
                                  static_cast<double>(nr) * gini_of(nr, pr)) /
                                 static_cast<double>(n);
                if (g < best.gini) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = t;
                    best.gini = g;
                }
            }
        }
        return best;
    }

    const FeatureMatrix& m_;
    const std::vector<std::size_t>& col_idx_;
    const std::vector<std::uint8_t>& y_;
    ForestConfig cfg_;
    Rng rng_;
    std::vector<std::int32_t> rows_;
    double n_root_ = 0.0;
    Tree tree_;
    std::vector<double>* importance_ = nullptr;
};

} // namespace

ForestModel fit_forest(const FeatureMatrix& matrix, const std::vector<std::uint8_t>& outcome,
                       const ForestConfig& cfg) {
    const std::size_t n = matrix.n_rows();
    if (outcome.size() != n) throw Error(ErrorCode::RowMisalignment, "forest outcome misaligned");
    std::int64_t pos = 0;
    for (auto v : outcome) pos += v;
    if (pos < 2 || static_cast<std::int64_t>(n) - pos < 2)
        throw Error(ErrorCode::DegenerateOutcome, "forest needs >= 2 rows per class");

    ForestModel model;
    model.columns = matrix.column_names;
    model.config = cfg;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
    std::vector<std::size_t> col_idx(matrix.n_cols());
    std::iota(col_idx.begin(), col_idx.end(), 0);

    std::vector<std::vector<double>> per_tree_importance(
        static_cast<std::size_t>(cfg.n_trees), std::vector<double>(matrix.n_cols(), 0.0));

    parallel_for(static_cast<std::size_t>(cfg.n_trees), cfg.jobs, [&](std::size_t t) {
        Rng rng(mix64(cfg.seed, mix64(hash_tag("forest/tree"), t)));
        std::vector<std::int32_t> rows(n);
        for (std::size_t i = 0; i < n; ++i)
            rows[i] = static_cast<std::int32_t>(rng.uniform_int(n));
        TreeBuilder builder(matrix, col_idx, outcome, cfg, rng.derive("build"));
        model.trees[t] = builder.build(std::move(rows), &per_tree_importance[t]);
    });

    model.gini_importance.assign(matrix.n_cols(), 0.0);
    for (const auto& imp : per_tree_importance)
        for (std::size_t j = 0; j < imp.size(); ++j) model.gini_importance[j] += imp[j];
    for (double& v : model.gini_importance) v /= static_cast<double>(cfg.n_trees);
    model.fitted = true;
    return model;
}

std::vector<double> predict_forest(const ForestModel& model, const FeatureMatrix& matrix) {
    if (!model.fitted) throw Error(ErrorCode::NonConvergence, "predict on unfitted forest");
    std::vector<std::size_t> col_idx;
    col_idx.reserve(model.columns.size());
    for (const auto& c : model.columns) col_idx.push_back(matrix.column_index(c));

    std::vector<double> out(matrix.n_rows(), 0.0);
    for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
        double sum = 0.0;
        for (const auto& tree : model.trees) {
            const TreeNode* node = &tree.nodes[0];
            while (node->feature >= 0) {
                const double v = matrix.rows[i][col_idx[static_cast<std::size_t>(node->feature)]];
                node = &tree.nodes[static_cast<std::size_t>(v < node->threshold ? node->left
                                                                                : node->right)];
            }
            sum += node->p1;
        }
        out[i] = sum / static_cast<double>(model.trees.size());
    }
    return out;
}

// ---- serialization ---------------------------------------------------------

std::string forest_to_json(const ForestModel& model) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "cart_forest";
    j["columns"] = model.columns;
    j["config"] = {{"n_trees", model.config.n_trees},
                   {"max_features", model.config.max_features.repr()},
                   {"min_samples_leaf", model.config.min_samples_leaf},
                   {"max_depth", model.config.max_depth},
                   {"seed", model.config.seed}};
    j["gini_importance"] = model.gini_importance;
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const auto& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.p1, n.n});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump();
}

ForestModel forest_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("forest JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"] != 1 ||
        j.value("kind", "") != "cart_forest")
        throw Error(ErrorCode::SchemaMismatch, "not a v1 forest artifact");
    ForestModel m;
    m.columns = j.at("columns").get<std::vector<std::string>>();
    const auto& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<int>();
    m.config.max_features = MaxFeatures::parse(c.at("max_features").get<std::string>());
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.gini_importance = j.at("gini_importance").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
        Tree tree;
        for (const auto& nj : tj) {
            TreeNode n;
            n.feature = nj.at(0).get<int>();
            n.threshold = nj.at(1).get<double>();
            n.left = nj.at(2).get<std::int32_t>();
            n.right = nj.at(3).get<std::int32_t>();
            n.p1 = nj.at(4).get<double>();
            n.n = nj.at(5).get<std::int32_t>();
            tree.nodes.push_back(n);
        }
        m.trees.push_back(std::move(tree));
    }
    m.fitted = true;
    return m;
}

// ---- grid search -----------------------------------------------------------

std::string GridCell::key() const {
    std::ostringstream os;
    os << "trees=" << n_trees << ",max_features=" << max_features.repr()
       << ",min_samples_leaf=" << min_samples_leaf << ",alpha=" << alpha;
    return os.str();
}

std::vector<GridCell> GridSpec::cells() const {
    std::vector<GridCell> out;
    for (int t : trees)
        for (const auto& mf : max_features)
            for (int leaf : min_samples_leaf)
                for (double a : alphas) out.push_back({t, mf, leaf, a});
    return out;
}

namespace {

FeatureMatrix select_columns(const FeatureMatrix& m, const std::vector<std::string>& names) {
    FeatureMatrix out;
    out.patient_ids = m.patient_ids;
    out.outcomes = m.outcomes;
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(m.column_index(n));
    out.column_names = names;
    for (std::size_t k = 0; k < idx.size(); ++k) out.column_groups.push_back(m.column_groups[idx[k]]);
    out.rows.reserve(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        std::vector<double> r(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[k] = m.rows[i][idx[k]];
        out.rows.push_back(std::move(r));
    }
    return out;
}

FeatureMatrix take_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.column_names = m.column_names;
    out.column_groups = m.column_groups;
    for (auto i : rows) {
        out.patient_ids.push_back(m.patient_ids.empty() ? std::string{} : m.patient_ids[i]);
        out.rows.push_back(m.rows[i]);
    }
    return out;
}

// screened ∪ always_include, in matrix column order, without duplicates
std::vector<std::string> merge_columns(const FeatureMatrix& m, const ScreeningResult& screen,
                                       const std::vector<std::string>& always_include) {
    std::vector<std::string> out;
    for (const auto& name : m.column_names) {
        const bool forced = std::find(always_include.begin(), always_include.end(), name) !=
                            always_include.end();
        const bool picked = std::find(screen.selected.begin(), screen.selected.end(), name) !=
                            screen.selected.end();
        if (forced || picked) out.push_back(name);
    }
    return out;
}

} // namespace

GridSearchResult grid_search(const FeatureMatrix& matrix,
                             const std::vector<std::uint8_t>& outcome, const GridSpec& grid,
                             const std::vector<std::string>& always_include, int folds,
                             std::uint64_t seed, int jobs) {
    const auto cells = grid.cells();
    if (cells.empty()) throw Error(ErrorCode::ConfigError, "empty forest grid");

    const std::vector<int> fold_of =
        stratified_folds(outcome, folds, mix64(seed, hash_tag("grid/folds")));

    // columns eligible for screening (everything not force-included)
    std::vector<std::string> screen_candidates;
    for (const auto& name : matrix.column_names)
        if (std::find(always_include.begin(), always_include.end(), name) == always_include.end())
            screen_candidates.push_back(name);

    GridSearchResult res;
    double best_auc = -1.0;
    std::size_t best_cell = 0;

    // fold-local screens are shared across cells with the same alpha
    std::map<double, std::vector<ScreeningResult>> screens_by_alpha;
    for (double a : grid.alphas) screens_by_alpha[a] = {};

    std::vector<std::vector<std::size_t>> fold_train(static_cast<std::size_t>(folds)),
        fold_test(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < matrix.n_rows(); ++i)
        for (int f = 0; f < folds; ++f)
            (fold_of[i] == f ? fold_test : fold_train)[static_cast<std::size_t>(f)].push_back(i);

    FeatureMatrix screen_matrix = select_columns(matrix, screen_candidates);
    for (double a : grid.alphas) {
        auto& v = screens_by_alpha[a];
        for (int f = 0; f < folds; ++f) {
            FeatureMatrix tr = take_rows(screen_matrix, fold_train[static_cast<std::size_t>(f)]);
            std::vector<std::uint8_t> ytr;
            for (auto i : fold_train[static_cast<std::size_t>(f)]) ytr.push_back(outcome[i]);
            v.push_back(f_test_screen(tr, ytr, a));
        }
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const GridCell& cell = cells[c];
        GridRow row;
        row.cell = cell;
        double auc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            const auto& tr_rows = fold_train[static_cast<std::size_t>(f)];
            const auto& te_rows = fold_test[static_cast<std::size_t>(f)];
            const ScreeningResult& screen =
                screens_by_alpha[cell.alpha][static_cast<std::size_t>(f)];
            auto cols = merge_columns(matrix, screen, always_include);

            FeatureMatrix sub = select_columns(matrix, cols);
            FeatureMatrix tr = take_rows(sub, tr_rows);
            FeatureMatrix te = take_rows(sub, te_rows);
            std::vector<std::uint8_t> ytr, yte;
            for (auto i : tr_rows) ytr.push_back(outcome[i]);
            for (auto i : te_rows) yte.push_back(outcome[i]);

            ForestConfig fc;
            fc.n_trees = cell.n_trees;
            fc.max_features = cell.max_features;
            fc.min_samples_leaf = cell.min_samples_leaf;
            fc.max_depth = grid.max_depth;
            fc.jobs = jobs;
            fc.seed = mix64(seed, mix64(hash_tag("grid/cell"), mix64(c, static_cast<std::uint64_t>(f))));
            ForestModel fm = fit_forest(tr, ytr, fc);
            const double auc = auroc(predict_forest(fm, te), yte).auc;
            row.fold_aucs.push_back(auc);
            auc_sum += auc;
        }
        row.mean_auc = auc_sum / folds;
        res.table.push_back(row);

        const GridCell& bc = cells[best_cell];
        const bool better =
            row.mean_auc > best_auc ||
            (row.mean_auc == best_auc &&
             (cell.n_trees < bc.n_trees ||
              (cell.n_trees == bc.n_trees &&
               (cell.min_samples_leaf > bc.min_samples_leaf ||
                (cell.min_samples_leaf == bc.min_samples_leaf && cell.key() < bc.key())))));
        if (c == 0 || better) {
            best_auc = row.mean_auc;
            best_cell = c;
        }
    }

    res.best = cells[best_cell];

    // final screen + refit on the full matrix at the winning cell
    {
        std::vector<std::uint8_t> y = outcome;
        res.final_screen = f_test_screen(screen_matrix, y, res.best.alpha);
        auto cols = merge_columns(matrix, res.final_screen, always_include);
        FeatureMatrix sub = select_columns(matrix, cols);
        ForestConfig fc;
        fc.n_trees = res.best.n_trees;
        fc.max_features = res.best.max_features;
        fc.min_samples_leaf = res.best.min_samples_leaf;
        fc.max_depth = grid.max_depth;
        fc.jobs = jobs;
        fc.seed = mix64(seed, hash_tag("grid/final"));
        res.model = fit_forest(sub, y, fc);
    }
    return res;
}

// ---- comparison suite -------------------------------------------------------

ComparisonSuite train_comparison_suite(const FeatureMatrix& preop_matrix,
                                       const FeatureMatrix& intraop_matrix,
                                       const std::vector<std::uint8_t>& outcome,
                                       const SuiteConfig& cfg) {
    if (preop_matrix.n_rows() != intraop_matrix.n_rows() ||
        preop_matrix.patient_ids != intraop_matrix.patient_ids)
        throw Error(ErrorCode::RowMisalignment, "preop/intraop matrices are not row-aligned");

    ComparisonSuite suite;

    // (b) preop-only additive model; its out-of-fold training scores feed the stack
    suite.preop_only = fit_preop(preop_matrix, outcome, cfg.lambda_grid, cfg.folds,
                                 mix64(cfg.seed, hash_tag("suite/preop")), cfg.preop_df);
    suite.oof_preop_scores =
        preop_oof_scores(preop_matrix, outcome, suite.preop_only.lambda, cfg.folds,
                         mix64(cfg.seed, hash_tag("suite/oof")), cfg.preop_df);

    // (a) intraop-only forest
    suite.intraop_only = grid_search(intraop_matrix, outcome, cfg.forest_grid, {}, cfg.folds,
                                     mix64(cfg.seed, hash_tag("suite/intraop")), cfg.jobs);

    // (c) proposed: screened intraop features + the preop score
    FeatureMatrix stacked = intraop_matrix;
    stacked.append_column("preop_score", ColumnGroup::preop, suite.oof_preop_scores);
    suite.proposed = grid_search(stacked, outcome, cfg.forest_grid, {"preop_score"}, cfg.folds,
                                 mix64(cfg.seed, hash_tag("suite/proposed")), cfg.jobs);

    // (d) full: screened intraop features + every preop feature
    FeatureMatrix full = intraop_matrix;
    std::vector<std::string> preop_cols = preop_matrix.column_names;
    for (std::size_t j = 0; j < preop_matrix.n_cols(); ++j)
        full.append_column(preop_matrix.column_names[j], ColumnGroup::preop,
                           preop_matrix.column(j));
    suite.full = grid_search(full, outcome, cfg.forest_grid, preop_cols, cfg.folds,
                             mix64(cfg.seed, hash_tag("suite/full")), cfg.jobs);
    return suite;
}

SuiteScores score_comparison_suite(const ComparisonSuite& suite, const FeatureMatrix& preop_m,
                                   const FeatureMatrix& intraop_m) {
    if (preop_m.n_rows() != intraop_m.n_rows() || preop_m.patient_ids != intraop_m.patient_ids)
        throw Error(ErrorCode::RowMisalignment, "preop/intraop matrices are not row-aligned");
    SuiteScores s;
    s.preop_only = predict_preop(suite.preop_only, preop_m);
    s.intraop_only = predict_forest(suite.intraop_only.model, intraop_m);

    FeatureMatrix stacked = intraop_m;
    stacked.append_column("preop_score", ColumnGroup::preop, s.preop_only);
    s.proposed = predict_forest(suite.proposed.model, stacked);

    FeatureMatrix full = intraop_m;
    for (std::size_t j = 0; j < preop_m.n_cols(); ++j)
        full.append_column(preop_m.column_names[j], ColumnGroup::preop, preop_m.column(j));
    s.full = predict_forest(suite.full.model, full);
    return s;
}

} // namespace aki
