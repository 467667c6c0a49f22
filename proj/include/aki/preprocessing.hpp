#pragma once

#include "aki/rng.hpp"
#include "aki/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aki {

struct SignalCleaningCounts {
    std::int64_t truncated_samples = 0;
    std::int64_t range_rejected = 0;
    std::int64_t tail_rejected = 0;
    std::int64_t knn_repaired = 0;
    std::int64_t peaks_smoothed = 0;
};

struct VariableTailCounts {
    std::int64_t tail_imputed_low = 0;
    std::int64_t tail_imputed_high = 0;
};

struct CleaningReport {
    std::map<std::string, SignalCleaningCounts> per_signal;
    std::map<std::string, VariableTailCounts> per_variable;

    void merge(const CleaningReport& other);
};

struct CleaningParams {
    double extreme_rsd = 4.0;  // robust-SD multiplier for 5-NN repair
    double peak_rsd = 3.0;     // robust-SD multiplier for isolated peak smoothing
    int window_w = 15;         // moving-average width for peak replacement
    int min_usable_samples = 31;
};

// Percentile-tail outlier imputation: values above the 99th percentile are
// replaced by uniform draws from [p95, p99.5], values below the 1st by draws
// from [p0.5, p5]. Percentiles come from the original vector; vectors shorter
// than 20 are returned untouched.
std::vector<double> impute_tails(const std::vector<double>& values, Rng rng,
                                 VariableTailCounts* counts = nullptr);

// Log conditional-probability encoding for many-level categoricals:
//   encode(l) = ln[ P(X=l | Y=1) / P(X=l | Y=0) ]
// with Laplace smoothing alpha on the level counts. Unseen levels encode to 0.
class CategoricalEncoder {
  public:
    CategoricalEncoder() = default;

    static CategoricalEncoder fit(const std::string& variable,
                                  const std::vector<std::string>& levels,
                                  const std::vector<std::uint8_t>& outcomes, double alpha);

    double encode(const std::string& level) const;
    const std::string& variable() const { return variable_; }
    bool fitted() const { return fitted_; }
    const std::map<std::string, std::pair<std::int64_t, std::int64_t>>& level_counts() const {
        return counts_;
    }
    double alpha() const { return alpha_; }
    // stable digest of the fitted state (anti-leakage checks)
    std::uint64_t state_hash() const;

  private:
    std::string variable_;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts_; // level -> (event, nonevent)
    std::int64_t n_event_ = 0;
    std::int64_t n_nonevent_ = 0;
    double alpha_ = 0.5;
    bool fitted_ = false;
};

struct CleanedSeries {
    TimeSeries series;
    bool usable = false;
    SignalCleaningCounts counts;
};

// Cleaning pipeline, in order: truncate to the surgery interval, average
// duplicate timestamps, drop out-of-range values, drop the 0.5% value tails,
// repair extremes (> extreme_rsd robust-SDs from the median) with the mean of
// their five nearest-in-time intact neighbors, smooth isolated single-sample
// peaks with the centered moving average, and finally require more than 30
// remaining samples for the series to count as usable.
CleanedSeries clean_time_series(const TimeSeries& ts, double surgery_start, double surgery_end,
                                const CleaningParams& params);

} // namespace aki
