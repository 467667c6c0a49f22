#include "aki/preprocessing.hpp"

#include "aki/errors.hpp"
#include "aki/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aki {

void CleaningReport::merge(const CleaningReport& other) {
    for (const auto& [name, c] : other.per_signal) {
        auto& dst = per_signal[name];
        dst.truncated_samples += c.truncated_samples;
        dst.range_rejected += c.range_rejected;
        dst.tail_rejected += c.tail_rejected;
        dst.knn_repaired += c.knn_repaired;
        dst.peaks_smoothed += c.peaks_smoothed;
    }
    for (const auto& [name, c] : other.per_variable) {
        auto& dst = per_variable[name];
        dst.tail_imputed_low += c.tail_imputed_low;
        dst.tail_imputed_high += c.tail_imputed_high;
    }
}

std::vector<double> impute_tails(const std::vector<double>& values, Rng rng,
                                 VariableTailCounts* counts) {
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.size() < 20) return values;

    std::sort(finite.begin(), finite.end());
    const double p005 = quantile_sorted(finite, 0.005);
    const double p01 = quantile_sorted(finite, 0.01);
    const double p05 = quantile_sorted(finite, 0.05);
    const double p95 = quantile_sorted(finite, 0.95);
    const double p99 = quantile_sorted(finite, 0.99);
    const double p995 = quantile_sorted(finite, 0.995);

    std::vector<double> out = values;
    for (double& v : out) {
        if (!std::isfinite(v)) continue;
        if (v > p99) {
            v = rng.uniform(p95, p995);
            if (counts) counts->tail_imputed_high++;
        } else if (v < p01) {
            v = rng.uniform(p005, p05);
            if (counts) counts->tail_imputed_low++;
        }
    }
    return out;
}

CategoricalEncoder CategoricalEncoder::fit(const std::string& variable,
                                           const std::vector<std::string>& levels,
                                           const std::vector<std::uint8_t>& outcomes,
                                           double alpha) {
    if (levels.size() != outcomes.size())
        throw Error(ErrorCode::MalformedRow, "encoder levels/outcomes length mismatch");
    CategoricalEncoder enc;
    enc.variable_ = variable;
    enc.alpha_ = alpha;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        auto& c = enc.counts_[levels[i]];
        if (outcomes[i]) {
            c.first++;
            enc.n_event_++;
        } else {
            c.second++;
            enc.n_nonevent_++;
        }
    }
    if (enc.n_event_ == 0 || enc.n_nonevent_ == 0)
        throw Error(ErrorCode::DegenerateOutcome,
                    "encoder for '" + variable + "' saw a single outcome class");
    enc.fitted_ = true;
    return enc;
}

double CategoricalEncoder::encode(const std::string& level) const {
    auto it = counts_.find(level);
    if (it == counts_.end()) return 0.0;
    const double n_levels = static_cast<double>(counts_.size());
    const double p_event =
        (static_cast<double>(it->second.first) + alpha_) /
        (static_cast<double>(n_event_) + alpha_ * n_levels);
    const double p_nonevent =
        (static_cast<double>(it->second.second) + alpha_) /
        (static_cast<double>(n_nonevent_) + alpha_ * n_levels);
    return std::log(p_event / p_nonevent);
}

std::uint64_t CategoricalEncoder::state_hash() const {
    std::uint64_t h = hash_tag(variable_);
    h = mix64(h, static_cast<std::uint64_t>(n_event_));
    h = mix64(h, static_cast<std::uint64_t>(n_nonevent_));
    for (const auto& [level, c] : counts_) {
        h = mix64(h, hash_tag(level));
        h = mix64(h, static_cast<std::uint64_t>(c.first));
        h = mix64(h, static_cast<std::uint64_t>(c.second));
    }
    return h;
}

namespace {

// mean of the five nearest-in-time intact samples; ties in distance prefer
// the later timestamp
double five_neighbor_mean(const std::vector<TimeSample>& samples,
                          const std::vector<std::uint8_t>& flagged, std::size_t center) {
    struct Cand {
        double dist;
        double t;
        double value;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i == center || flagged[i]) continue;
        cands.push_back({std::abs(samples[i].t - samples[center].t), samples[i].t,
                         samples[i].value});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.t > b.t;
    });
    std::size_t take = std::min<std::size_t>(5, cands.size());
    if (take == 0) return samples[center].value;
    double s = 0.0;
    for (std::size_t i = 0; i < take; ++i) s += cands[i].value;
    return s / static_cast<double>(take);
}

} // namespace

CleanedSeries clean_time_series(const TimeSeries& ts, double surgery_start, double surgery_end,
                                const CleaningParams& params) {
    CleanedSeries out;
    out.series.signal_name = ts.signal_name;
    out.series.valid_lo = ts.valid_lo;
    out.series.valid_hi = ts.valid_hi;
    auto& counts = out.counts;

    // (1) truncate to the surgery interval
    std::vector<TimeSample> work;
    work.reserve(ts.samples.size());
    for (const auto& s : ts.samples) {
        if (s.t < surgery_start || s.t > surgery_end) {
            counts.truncated_samples++;
        } else {
            work.push_back(s);
        }
    }

    // (2) average duplicate timestamps
    {
        std::vector<TimeSample> dedup;
        dedup.reserve(work.size());
        std::size_t i = 0;
        while (i < work.size()) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < work.size() && work[j].t == work[i].t) {
                sum += work[j].value;
                ++j;
            }
            dedup.push_back({work[i].t, sum / static_cast<double>(j - i)});
            i = j;
        }
        work = std::move(dedup);
    }

    // (3) physiologic range filter
    {
        std::vector<TimeSample> kept;
        kept.reserve(work.size());
        for (const auto& s : work) {
            if (s.value < ts.valid_lo || s.value > ts.valid_hi) {
                counts.range_rejected++;
            } else {
                kept.push_back(s);
            }
        }
        work = std::move(kept);
    }

    // (4) drop the 0.5% value tails of this series' distribution; same size
    // floor as impute_tails so short series keep percentile estimates sane
    if (work.size() >= 20) {
        std::vector<double> vals;
        vals.reserve(work.size());
        for (const auto& s : work) vals.push_back(s.value);
        std::sort(vals.begin(), vals.end());
        const double lo = quantile_sorted(vals, 0.005);
        const double hi = quantile_sorted(vals, 0.995);
        std::vector<TimeSample> kept;
        kept.reserve(work.size());
        for (const auto& s : work) {
            if (s.value < lo || s.value > hi) {
                counts.tail_rejected++;
            } else {
                kept.push_back(s);
            }
        }
        work = std::move(kept);
    }

    if (!work.empty()) {
        std::vector<double> vals;
        vals.reserve(work.size());
        for (const auto& s : work) vals.push_back(s.value);
        const double med = median(vals);
        const double rsd = robust_sd(vals);

        // (5) extremes far from the per-series median get the 5-NN repair
        std::vector<std::uint8_t> flagged(work.size(), 0);
        for (std::size_t i = 0; i < work.size(); ++i)
            if (std::abs(work[i].value - med) > params.extreme_rsd * rsd) flagged[i] = 1;
        std::vector<double> repaired(work.size());
        for (std::size_t i = 0; i < work.size(); ++i)
            repaired[i] = flagged[i] ? five_neighbor_mean(work, flagged, i) : work[i].value;
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (flagged[i]) {
                work[i].value = repaired[i];
                counts.knn_repaired++;
            }
        }

        // (6) isolated single-sample peaks/valleys deviating from both
        // neighbors get the moving-average value
        if (work.size() >= 3) {
            std::vector<double> cur(work.size());
            for (std::size_t i = 0; i < work.size(); ++i) cur[i] = work[i].value;
            std::vector<double> base = centered_moving_average(cur, params.window_w);
            std::vector<std::uint8_t> is_peak(work.size(), 0);
            for (std::size_t i = 1; i + 1 < work.size(); ++i) {
                const double d_prev = work[i].value - work[i - 1].value;
                const double d_next = work[i].value - work[i + 1].value;
                const bool spike = std::abs(d_prev) > params.peak_rsd * rsd &&
                                   std::abs(d_next) > params.peak_rsd * rsd &&
                                   (d_prev > 0) == (d_next > 0);
                if (spike) is_peak[i] = 1;
            }
            for (std::size_t i = 0; i < work.size(); ++i) {
                if (is_peak[i]) {
                    work[i].value = base[i];
                    counts.peaks_smoothed++;
                }
            }
        }
    }

    out.series.samples = std::move(work);
    out.usable = static_cast<int>(out.series.samples.size()) >= params.min_usable_samples;
    return out;
}

} // namespace aki
