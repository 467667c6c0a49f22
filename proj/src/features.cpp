#include "aki/features.hpp"

#include "aki/errors.hpp"
#include "aki/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace aki {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
} // namespace

FeatureConfig default_feature_config() {
    FeatureConfig cfg;
    cfg.occupancy["map"] = {{"below_55", -kInf, 55.0}};
    cfg.lab_normal_ranges = {
        {"lactic_acid", {0.5, 2.0}},  {"hemoglobin", {10.0, 16.0}},
        {"platelet_count", {150.0, 450.0}}, {"ph", {7.35, 7.45}},
        {"po2", {80.0, 300.0}},       {"fio2", {0.21, 0.8}},
        {"spo2", {92.0, 100.0}},
    };
    return cfg;
}

void decompose(const TimeSeries& ts, int window_w, TimeSeries& base, TimeSeries& residual) {
    base.signal_name = ts.signal_name + "_base";
    residual.signal_name = ts.signal_name + "_residual";
    base.samples.resize(ts.samples.size());
    residual.samples.resize(ts.samples.size());
    std::vector<double> values(ts.samples.size());
    for (std::size_t i = 0; i < ts.samples.size(); ++i) values[i] = ts.samples[i].value;
    std::vector<double> smooth = centered_moving_average(values, window_w);
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        base.samples[i] = {ts.samples[i].t, smooth[i]};
        residual.samples[i] = {ts.samples[i].t, ts.samples[i].value - smooth[i]};
    }
}

SignalFeatures signal_features(const TimeSeries& ts, int window_w,
                               const std::vector<OccupancyRange>& ranges) {
    if (ts.samples.empty())
        throw Error(ErrorCode::SeriesUnusable, "signal_features on empty series " + ts.signal_name);

    TimeSeries base, residual;
    decompose(ts, window_w, base, residual);

    SignalFeatures f;
    f.min = kInf;
    f.max = -kInf;
    std::vector<double> base_vals(base.samples.size()), resid_vals(residual.samples.size());
    for (std::size_t i = 0; i < ts.samples.size(); ++i) {
        f.min = std::min(f.min, ts.samples[i].value);
        f.max = std::max(f.max, ts.samples[i].value);
        base_vals[i] = base.samples[i].value;
        resid_vals[i] = residual.samples[i].value;
    }
    f.mean_base = mean(base_vals);
    f.sd_base = sd_pop(base_vals);
    f.sd_residual = sd_pop(resid_vals);

    // step-duration occupancy: each sample owns the gap to the next sample
    const double total = ts.samples.back().t - ts.samples.front().t;
    for (const auto& r : ranges) {
        double in_range = 0.0;
        if (total > 0.0) {
            for (std::size_t i = 0; i + 1 < ts.samples.size(); ++i) {
                const double v = ts.samples[i].value;
                if (v >= r.lo && v < r.hi) in_range += ts.samples[i + 1].t - ts.samples[i].t;
            }
        }
        f.range_occupancy[r.label] = total > 0.0 ? in_range / total : 0.0;
    }
    return f;
}

LabFeatures lab_features(const std::vector<TimedValue>& obs, double normal_lo, double normal_hi) {
    if (obs.empty()) throw Error(ErrorCode::EmptyLab, "lab_features on empty observation list");
    LabFeatures f;
    std::vector<double> vals(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) vals[i] = obs[i].value;
    f.min = *std::min_element(vals.begin(), vals.end());
    f.max = *std::max_element(vals.begin(), vals.end());
    f.mean = mean(vals);
    f.count = static_cast<double>(vals.size());
    f.variance = variance_pop(vals);
    std::size_t abnormal = 0;
    for (double v : vals)
        if (v < normal_lo || v > normal_hi) ++abnormal;
    f.abnormal_pct = 100.0 * static_cast<double>(abnormal) / static_cast<double>(vals.size());
    return f;
}

double pf_ratio(std::optional<double> po2, double fio2, std::optional<double> spo2) {
    if (fio2 <= 0.0) throw Error(ErrorCode::NoOxygenData, "pf_ratio requires fio2 > 0");
    if (po2) return *po2 / fio2;
    if (spo2) return (*spo2 / fio2 - 64.0) / 0.84;
    throw Error(ErrorCode::NoOxygenData, "pf_ratio requires po2 or spo2");
}

namespace {

struct RawCell {
    double value = kNaN;
    bool present = false;
};

struct RawColumns {
    std::vector<std::string> names;
    std::vector<ColumnGroup> groups;
    std::vector<std::string> sources;
    std::vector<std::string> statistics;
};

std::string occ_label(const std::string& signal, const OccupancyRange& r) {
    return "sig_" + signal + "_occ_" + r.label;
}

// The raw (pre-drop) column inventory is derived from the cohort's variable
// universe plus the assembler's categorical treatment, sorted at the end so
// column order never depends on traversal order.
RawColumns raw_inventory(const Cohort& cohort, const FeatureAssembler& fa) {
    struct Col {
        std::string name, source, statistic;
        ColumnGroup group;
    };
    std::vector<Col> cols;
    auto add = [&](std::string name, ColumnGroup g, std::string source, std::string stat) {
        cols.push_back({std::move(name), std::move(source), std::move(stat), g});
    };

    add("age", ColumnGroup::preop, "age", "value");
    add("sex_male", ColumnGroup::preop, "sex", "indicator");
    add("race_black", ColumnGroup::preop, "race", "indicator");
    add("ckd", ColumnGroup::preop, "ckd", "indicator");

    std::set<std::string> numerics, binaries, categoricals, labs, meds, totals;
    for (const auto& p : cohort.patients) {
        for (const auto& [k, _] : p.preop_numerics) numerics.insert(k);
        for (const auto& [k, _] : p.preop_binaries) binaries.insert(k);
        for (const auto& [k, _] : p.preop_categoricals) categoricals.insert(k);
        for (const auto& [k, _] : p.intraop_labs) labs.insert(k);
        for (const auto& [k, _] : p.intraop_meds) meds.insert(k);
        for (const auto& [k, _] : p.totals) totals.insert(k);
    }
    for (const auto& k : numerics) add("num_" + k, ColumnGroup::preop, k, "value");
    for (const auto& k : binaries) add("bin_" + k, ColumnGroup::preop, k, "indicator");
    for (const auto& k : categoricals) {
        if (fa.encoders.count(k)) {
            add("cat_" + k, ColumnGroup::preop, k, "cond_prob_log_ratio");
        } else if (auto it = fa.onehot_levels.find(k); it != fa.onehot_levels.end()) {
            for (const auto& lvl : it->second)
                add("cat_" + k + "__" + lvl, ColumnGroup::preop, k, "onehot");
        }
    }
    for (const auto& [sig, _] : cohort.signal_ranges) {
        add("sig_" + sig + "_min", ColumnGroup::intraop, sig, "min");
        add("sig_" + sig + "_max", ColumnGroup::intraop, sig, "max");
        add("sig_" + sig + "_mean_base", ColumnGroup::intraop, sig, "mean_base");
        add("sig_" + sig + "_sd_base", ColumnGroup::intraop, sig, "sd_base");
        add("sig_" + sig + "_sd_resid", ColumnGroup::intraop, sig, "sd_residual");
        if (auto it = fa.config.occupancy.find(sig); it != fa.config.occupancy.end())
            for (const auto& r : it->second)
                add(occ_label(sig, r), ColumnGroup::intraop, sig, "occupancy");
    }
    for (const auto& k : labs) {
        add("lab_" + k + "_min", ColumnGroup::intraop, k, "min");
        add("lab_" + k + "_mean", ColumnGroup::intraop, k, "mean");
        add("lab_" + k + "_max", ColumnGroup::intraop, k, "max");
        add("lab_" + k + "_count", ColumnGroup::intraop, k, "count");
        add("lab_" + k + "_variance", ColumnGroup::intraop, k, "variance");
        add("lab_" + k + "_abnormal_pct", ColumnGroup::intraop, k, "abnormal_pct");
    }
    add("pf_ratio", ColumnGroup::intraop, "po2/fio2/spo2", "ratio");
    for (const auto& k : meds) add("med_" + k, ColumnGroup::intraop, k, "indicator");
    for (const auto& k : totals) add("tot_" + k, ColumnGroup::intraop, k, "value");

    std::sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) { return a.name < b.name; });
    RawColumns out;
    for (auto& c : cols) {
        out.names.push_back(std::move(c.name));
        out.groups.push_back(c.group);
        out.sources.push_back(std::move(c.source));
        out.statistics.push_back(std::move(c.statistic));
    }
    return out;
}

std::optional<double> lab_mean(const PatientRecord& p, const std::string& name) {
    auto it = p.intraop_labs.find(name);
    if (it == p.intraop_labs.end() || it->second.empty()) return std::nullopt;
    std::vector<double> vals(it->second.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = it->second[i].value;
    return mean(vals);
}

// Per-patient raw cells keyed by column name. Cleaning is applied here, so
// the same patient always yields the same cells regardless of cohort context.
std::map<std::string, RawCell> patient_cells(const PatientRecord& p, const FeatureAssembler& fa,
                                             const Cohort& cohort, CleaningReport* report) {
    std::map<std::string, RawCell> cells;
    auto put = [&](const std::string& name, double v) { cells[name] = {v, true}; };

    put("age", p.age);
    put("sex_male", p.female ? 0.0 : 1.0);
    put("race_black", p.race_black ? 1.0 : 0.0);
    put("ckd", p.ckd_documented ? 1.0 : 0.0);
    for (const auto& [k, v] : p.preop_numerics) put("num_" + k, v);
    for (const auto& [k, v] : p.preop_binaries) put("bin_" + k, v ? 1.0 : 0.0);
    for (const auto& [k, lvl] : p.preop_categoricals) {
        if (auto it = fa.encoders.find(k); it != fa.encoders.end()) {
            put("cat_" + k, it->second.encode(lvl));
        } else if (auto oh = fa.onehot_levels.find(k); oh != fa.onehot_levels.end()) {
            for (const auto& train_lvl : oh->second)
                put("cat_" + k + "__" + train_lvl, lvl == train_lvl ? 1.0 : 0.0);
        }
    }

    for (const auto& [sig, range] : cohort.signal_ranges) {
        auto it = p.series.find(sig);
        if (it == p.series.end()) continue;
        TimeSeries ts = it->second;
        ts.valid_lo = range.first;
        ts.valid_hi = range.second;
        CleanedSeries cleaned =
            clean_time_series(ts, p.surgery_start_min, p.surgery_end_min, fa.cleaning);
        if (report) {
            CleaningReport part;
            part.per_signal[sig] = cleaned.counts;
            report->merge(part);
        }
        if (!cleaned.usable) continue;
        std::vector<OccupancyRange> ranges;
        if (auto oit = fa.config.occupancy.find(sig); oit != fa.config.occupancy.end())
            ranges = oit->second;
        SignalFeatures f = signal_features(cleaned.series, fa.config.window_w, ranges);
        put("sig_" + sig + "_min", f.min);
        put("sig_" + sig + "_max", f.max);
        put("sig_" + sig + "_mean_base", f.mean_base);
        put("sig_" + sig + "_sd_base", f.sd_base);
        put("sig_" + sig + "_sd_resid", f.sd_residual);
        for (const auto& r : ranges) put(occ_label(sig, r), f.range_occupancy.at(r.label));
    }

    for (const auto& [lab, obs] : p.intraop_labs) {
        if (obs.empty()) continue;
        double lo = -kInf, hi = kInf;
        if (auto it = fa.config.lab_normal_ranges.find(lab);
            it != fa.config.lab_normal_ranges.end()) {
            lo = it->second.first;
            hi = it->second.second;
        }
        LabFeatures f = lab_features(obs, lo, hi);
        put("lab_" + lab + "_min", f.min);
        put("lab_" + lab + "_mean", f.mean);
        put("lab_" + lab + "_max", f.max);
        put("lab_" + lab + "_count", f.count);
        put("lab_" + lab + "_variance", f.variance);
        put("lab_" + lab + "_abnormal_pct", f.abnormal_pct);
    }

    {
        auto fio2 = lab_mean(p, "fio2");
        if (fio2 && *fio2 > 0.0) {
            auto po2 = lab_mean(p, "po2");
            auto spo2 = lab_mean(p, "spo2");
            if (po2 || spo2) put("pf_ratio", pf_ratio(po2, *fio2, spo2));
        }
    }

    for (const auto& [k, v] : p.intraop_meds) put("med_" + k, v ? 1.0 : 0.0);
    for (const auto& [k, v] : p.totals) put("tot_" + k, v);
    return cells;
}

} // namespace

FeatureAssembler fit_assembler(const Cohort& train, const std::vector<std::uint8_t>& outcome,
                               const FeatureConfig& config, const CleaningParams& cleaning,
                               double encoder_alpha, CleaningReport* report) {
    if (train.patients.empty()) throw Error(ErrorCode::EmptyCohort, "fit_assembler on empty cohort");
    if (outcome.size() != train.patients.size())
        throw Error(ErrorCode::RowMisalignment, "outcome length != patient count");

    FeatureAssembler fa;
    fa.config = config;
    fa.cleaning = cleaning;
    fa.encoder_alpha = encoder_alpha;

    // categorical treatment from train levels: conditional-probability encoding
    // beyond five levels, indicator columns otherwise
    std::map<std::string, std::set<std::string>> level_sets;
    for (const auto& p : train.patients)
        for (const auto& [k, lvl] : p.preop_categoricals) level_sets[k].insert(lvl);
    for (const auto& [var, levels] : level_sets) {
        if (levels.size() > 5) {
            std::vector<std::string> lv;
            std::vector<std::uint8_t> oc;
            for (std::size_t i = 0; i < train.patients.size(); ++i) {
                auto it = train.patients[i].preop_categoricals.find(var);
                if (it == train.patients[i].preop_categoricals.end()) continue;
                lv.push_back(it->second);
                oc.push_back(outcome[i]);
            }
            fa.encoders.emplace(var, CategoricalEncoder::fit(var, lv, oc, encoder_alpha));
        } else {
            fa.onehot_levels[var] = {levels.begin(), levels.end()};
        }
    }

    RawColumns raw = raw_inventory(train, fa);
    const std::size_t n = train.patients.size();
    std::vector<std::vector<RawCell>> grid(n, std::vector<RawCell>(raw.names.size()));
    for (std::size_t i = 0; i < n; ++i) {
        auto cells = patient_cells(train.patients[i], fa, train, report);
        for (std::size_t j = 0; j < raw.names.size(); ++j) {
            if (auto it = cells.find(raw.names[j]); it != cells.end()) grid[i][j] = it->second;
        }
    }

    for (std::size_t j = 0; j < raw.names.size(); ++j) {
        std::size_t missing = 0;
        std::vector<double> present;
        for (std::size_t i = 0; i < n; ++i) {
            if (grid[i][j].present)
                present.push_back(grid[i][j].value);
            else
                ++missing;
        }
        const double miss_frac = static_cast<double>(missing) / static_cast<double>(n);
        if (present.empty() || miss_frac > config.max_missing_fraction) {
            fa.dropped_columns.push_back(raw.names[j]);
            continue;
        }
        fa.column_names.push_back(raw.names[j]);
        fa.column_groups.push_back(raw.groups[j]);
        fa.column_sources.push_back(raw.sources[j]);
        fa.column_statistics.push_back(raw.statistics[j]);
        fa.train_medians.push_back(median(std::move(present)));
    }
    return fa;
}

FeatureMatrix assemble_matrix(const Cohort& cohort, const FeatureAssembler& assembler,
                              CleaningReport* report) {
    if (cohort.patients.empty())
        throw Error(ErrorCode::EmptyCohort, "assemble_matrix on empty cohort");
    FeatureMatrix m;
    m.column_names = assembler.column_names;
    m.column_groups = assembler.column_groups;
    m.rows.reserve(cohort.patients.size());
    m.imputed_mask.reserve(cohort.patients.size());
    for (const auto& p : cohort.patients) {
        auto cells = patient_cells(p, assembler, cohort, report);
        std::vector<double> row(m.column_names.size());
        std::vector<std::uint8_t> mask(m.column_names.size(), 0);
        for (std::size_t j = 0; j < m.column_names.size(); ++j) {
            auto it = cells.find(m.column_names[j]);
            if (it != cells.end() && it->second.present) {
                row[j] = it->second.value;
            } else {
                row[j] = assembler.train_medians[j];
                mask[j] = 1;
            }
        }
        m.patient_ids.push_back(p.patient_id);
        m.rows.push_back(std::move(row));
        m.imputed_mask.push_back(std::move(mask));
    }
    return m;
}

std::vector<ColumnInfo> column_manifest(const FeatureAssembler& assembler) {
    std::vector<ColumnInfo> out;
    out.reserve(assembler.column_names.size());
    for (std::size_t j = 0; j < assembler.column_names.size(); ++j) {
        out.push_back({assembler.column_names[j], assembler.column_sources[j],
                       assembler.column_statistics[j],
                       assembler.column_groups[j] == ColumnGroup::preop ? "preop" : "intraop"});
    }
    return out;
}

} // namespace aki
