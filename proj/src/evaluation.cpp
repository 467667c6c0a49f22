#include "aki/evaluation.hpp"

#include "aki/errors.hpp"
#include "aki/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aki {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_both_classes(const std::vector<std::uint8_t>& labels) {
    bool pos = false, neg = false;
    for (auto l : labels) (l ? pos : neg) = true;
    if (!pos || !neg) throw Error(ErrorCode::SingleClass, "need both outcome classes");
}

// unique scores ascending with per-value positive/negative counts
struct ScoreLevels {
    std::vector<double> values;
    std::vector<std::int64_t> pos;
    std::vector<std::int64_t> neg;
    std::int64_t n_pos = 0, n_neg = 0;
};

ScoreLevels score_levels(const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    ScoreLevels sl;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double s = scores[order[k]];
        if (sl.values.empty() || sl.values.back() != s) {
            sl.values.push_back(s);
            sl.pos.push_back(0);
            sl.neg.push_back(0);
        }
        if (labels[order[k]]) {
            sl.pos.back()++;
            sl.n_pos++;
        } else {
            sl.neg.back()++;
            sl.n_neg++;
        }
    }
    return sl;
}

} // namespace

RocCurve auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::RowMisalignment, "auroc: scores/labels length mismatch");
    require_both_classes(labels);
    ScoreLevels sl = score_levels(scores, labels);

    // rank-sum AUC; a tied block of size m spans average rank (first+last)/2
    double rank_sum_pos = 0.0;
    std::int64_t seen = 0;
    for (std::size_t k = 0; k < sl.values.size(); ++k) {
        const std::int64_t block = sl.pos[k] + sl.neg[k];
        const double avg_rank = static_cast<double>(seen) + (static_cast<double>(block) + 1.0) / 2.0;
        rank_sum_pos += avg_rank * static_cast<double>(sl.pos[k]);
        seen += block;
    }
    const double np = static_cast<double>(sl.n_pos);
    const double nn = static_cast<double>(sl.n_neg);

    RocCurve curve;
    curve.auc = (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);

    // threshold sweep, descending unique scores, classify positive iff >= t
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    for (std::size_t k = sl.values.size(); k-- > 0;) {
        tp += sl.pos[k];
        fp += sl.neg[k];
        curve.points.push_back({static_cast<double>(fp) / nn, static_cast<double>(tp) / np,
                                sl.values[k]});
    }
    return curve;
}

double youden_cutoff(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::RowMisalignment, "youden: scores/labels length mismatch");
    require_both_classes(labels);
    ScoreLevels sl = score_levels(scores, labels);

    // suffix counts give sens/spec per candidate threshold; ascending scan
    // with strict improvement keeps the smallest optimal threshold
    std::vector<std::int64_t> pos_ge(sl.values.size() + 1, 0), neg_ge(sl.values.size() + 1, 0);
    for (std::size_t k = sl.values.size(); k-- > 0;) {
        pos_ge[k] = pos_ge[k + 1] + sl.pos[k];
        neg_ge[k] = neg_ge[k + 1] + sl.neg[k];
    }
    double best_j = -std::numeric_limits<double>::infinity();
    double best_t = sl.values.front();
    for (std::size_t k = 0; k < sl.values.size(); ++k) {
        const double sens = static_cast<double>(pos_ge[k]) / static_cast<double>(sl.n_pos);
        const double spec =
            static_cast<double>(sl.n_neg - neg_ge[k]) / static_cast<double>(sl.n_neg);
        const double j = sens + spec - 1.0;
        if (j > best_j) {
            best_j = j;
            best_t = sl.values[k];
        }
    }
    return best_t;
}

ClassificationTable classification_metrics(const std::vector<double>& scores,
                                           const std::vector<std::uint8_t>& labels,
                                           double threshold) {
    ClassificationTable t;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool high = scores[i] >= threshold;
        if (labels[i]) {
            (high ? t.tp : t.fn)++;
        } else {
            (high ? t.fp : t.tn)++;
        }
    }
    const auto n = static_cast<double>(t.tp + t.fp + t.tn + t.fn);
    t.accuracy = n > 0 ? static_cast<double>(t.tp + t.tn) / n : kNaN;
    t.sensitivity = (t.tp + t.fn) > 0 ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn) : kNaN;
    t.specificity = (t.tn + t.fp) > 0 ? static_cast<double>(t.tn) / static_cast<double>(t.tn + t.fp) : kNaN;
    t.ppv = (t.tp + t.fp) > 0 ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp) : kNaN;
    t.npv = (t.tn + t.fn) > 0 ? static_cast<double>(t.tn) / static_cast<double>(t.tn + t.fn) : kNaN;
    return t;
}

NriResult nri(const std::vector<std::uint8_t>& labels, const std::vector<std::uint8_t>& old_risk,
              const std::vector<std::uint8_t>& new_risk) {
    if (labels.size() != old_risk.size() || labels.size() != new_risk.size())
        throw Error(ErrorCode::RowMisalignment, "nri: vector length mismatch");
    require_both_classes(labels);
    NriResult r;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool up = !old_risk[i] && new_risk[i];
        const bool down = old_risk[i] && !new_risk[i];
        if (labels[i]) {
            r.n_events++;
            if (up) r.event_up++;
            if (down) r.event_down++;
        } else {
            r.n_nonevents++;
            if (up) r.nonevent_up++;
            if (down) r.nonevent_down++;
        }
    }
    const double ne = static_cast<double>(r.n_events);
    const double nn = static_cast<double>(r.n_nonevents);
    r.nri = (static_cast<double>(r.event_up) - static_cast<double>(r.event_down)) / ne +
            (static_cast<double>(r.nonevent_down) - static_cast<double>(r.nonevent_up)) / nn;
    const double var = (static_cast<double>(r.event_up) + static_cast<double>(r.event_down)) /
                           (ne * ne) +
                       (static_cast<double>(r.nonevent_up) + static_cast<double>(r.nonevent_down)) /
                           (nn * nn);
    if (var > 0.0) {
        const double z = r.nri / std::sqrt(var);
        r.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
    } else {
        r.p_value = 1.0;
    }
    return r;
}

namespace {

// joint index resample; redraws when the labels come out single-class
std::vector<std::size_t> resample_indices(Rng& rng, const std::vector<std::uint8_t>& labels) {
    const std::size_t n = labels.size();
    for (int attempt = 0; attempt < 50; ++attempt) {
        std::vector<std::size_t> idx(n);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = static_cast<std::size_t>(rng.uniform_int(n));
            (labels[idx[i]] ? pos : neg) = true;
        }
        if (pos && neg) return idx;
    }
    throw Error(ErrorCode::ResampleDegenerate, "bootstrap resample stayed single-class");
}

} // namespace

BootstrapCI bootstrap_ci(const PairStatistic& statistic, const std::vector<double>& scores,
                         const std::vector<std::uint8_t>& labels, int n_resamples,
                         std::uint64_t seed) {
    BootstrapCI ci;
    ci.point = statistic(scores, labels);
    ci.n_resamples = n_resamples;
    ci.seed = seed;
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(n_resamples));
    for (int r = 0; r < n_resamples; ++r) {
        Rng rng(mix64(seed, static_cast<std::uint64_t>(r)));
        auto idx = resample_indices(rng, labels);
        std::vector<double> s(idx.size());
        std::vector<std::uint8_t> l(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            s[i] = scores[idx[i]];
            l[i] = labels[idx[i]];
        }
        const double v = statistic(s, l);
        if (std::isfinite(v)) stats.push_back(v);
    }
    if (stats.empty()) {
        ci.lo = ci.hi = kNaN;
        return ci;
    }
    std::sort(stats.begin(), stats.end());
    ci.lo = quantile_sorted(stats, 0.025);
    ci.hi = quantile_sorted(stats, 0.975);
    return ci;
}

namespace {

MetricWithCI to_metric(const BootstrapCI& ci) { return {ci.point, ci.lo, ci.hi}; }

ReclassificationFlow flow_for(const std::vector<std::uint8_t>& old_risk,
                              const std::vector<std::uint8_t>& new_risk,
                              const std::vector<std::uint8_t>& labels, bool events) {
    ReclassificationFlow f;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (static_cast<bool>(labels[i]) != events) continue;
        if (!old_risk[i] && !new_risk[i]) f.low_low++;
        if (!old_risk[i] && new_risk[i]) f.low_high++;
        if (old_risk[i] && !new_risk[i]) f.high_low++;
        if (old_risk[i] && new_risk[i]) f.high_high++;
    }
    return f;
}

} // namespace

OutcomeEvaluation evaluate_outcome(const std::string& outcome,
                                   const std::vector<ModelScores>& model_scores,
                                   const std::vector<std::uint8_t>& train_labels,
                                   const std::vector<std::uint8_t>& test_labels, int bootstrap_n,
                                   std::uint64_t seed) {
    OutcomeEvaluation oe;
    oe.outcome = outcome;

    std::vector<std::uint8_t> preop_risk, proposed_risk;
    for (const auto& ms : model_scores) {
        ModelEvaluation me;
        me.model = ms.model;
        me.cutoff = youden_cutoff(ms.train_scores, train_labels);
        me.roc = auroc(ms.test_scores, test_labels);

        const std::uint64_t mseed = mix64(seed, hash_tag(outcome + "/" + ms.model));
        me.auc = to_metric(bootstrap_ci(
            [](const std::vector<double>& s, const std::vector<std::uint8_t>& l) {
                return auroc(s, l).auc;
            },
            ms.test_scores, test_labels, bootstrap_n, mseed));
        const double cut = me.cutoff;
        auto table_metric = [&](auto pick) {
            return to_metric(bootstrap_ci(
                [cut, pick](const std::vector<double>& s, const std::vector<std::uint8_t>& l) {
                    return pick(classification_metrics(s, l, cut));
                },
                ms.test_scores, test_labels, bootstrap_n, mseed));
        };
        me.accuracy = table_metric([](const ClassificationTable& t) { return t.accuracy; });
        me.sensitivity = table_metric([](const ClassificationTable& t) { return t.sensitivity; });
        me.specificity = table_metric([](const ClassificationTable& t) { return t.specificity; });
        me.ppv = table_metric([](const ClassificationTable& t) { return t.ppv; });
        me.npv = table_metric([](const ClassificationTable& t) { return t.npv; });

        std::vector<std::uint8_t> risk(ms.test_scores.size());
        for (std::size_t i = 0; i < risk.size(); ++i) risk[i] = ms.test_scores[i] >= cut ? 1 : 0;
        if (ms.model == "preop_only") preop_risk = risk;
        if (ms.model == "proposed") proposed_risk = risk;

        oe.models.push_back(std::move(me));
    }

    if (!preop_risk.empty() && !proposed_risk.empty()) {
        oe.nri_proposed_vs_preop = nri(test_labels, preop_risk, proposed_risk);
        oe.events_flow = flow_for(preop_risk, proposed_risk, test_labels, true);
        oe.nonevents_flow = flow_for(preop_risk, proposed_risk, test_labels, false);

        // NRI bootstrap over jointly resampled (label, old, new) triples
        const std::uint64_t nseed = mix64(seed, hash_tag(outcome + "/nri"));
        std::vector<double> stats;
        stats.reserve(static_cast<std::size_t>(bootstrap_n));
        for (int r = 0; r < bootstrap_n; ++r) {
            Rng rng(mix64(nseed, static_cast<std::uint64_t>(r)));
            auto idx = resample_indices(rng, test_labels);
            std::vector<std::uint8_t> l(idx.size()), o(idx.size()), nw(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                l[i] = test_labels[idx[i]];
                o[i] = preop_risk[idx[i]];
                nw[i] = proposed_risk[idx[i]];
            }
            stats.push_back(nri(l, o, nw).nri);
        }
        std::sort(stats.begin(), stats.end());
        oe.nri_ci = {oe.nri_proposed_vs_preop.nri, quantile_sorted(stats, 0.025),
                     quantile_sorted(stats, 0.975)};
    }
    return oe;
}

} // namespace aki
