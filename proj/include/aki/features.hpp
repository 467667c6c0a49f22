#pragma once

#include "aki/preprocessing.hpp"
#include "aki/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aki {

struct SignalFeatures {
    double min = 0.0;
    double max = 0.0;
    double mean_base = 0.0;
    double sd_base = 0.0;     // long-term variability
    double sd_residual = 0.0; // short-term variability
    std::map<std::string, double> range_occupancy; // label -> fraction of surgery time
};

struct LabFeatures {
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double count = 0.0;
    double variance = 0.0;     // population variance
    double abnormal_pct = 0.0; // percent of observations outside the normal range
};

struct OccupancyRange {
    std::string label;
    double lo; // -inf allowed
    double hi; // in-range iff lo <= v < hi
};

struct FeatureConfig {
    int window_w = 15;
    // signal -> occupancy ranges; default ships MAP < 55 mmHg
    std::map<std::string, std::vector<OccupancyRange>> occupancy;
    // lab -> normal range [lo, hi]; observations outside count as abnormal
    std::map<std::string, std::pair<double, double>> lab_normal_ranges;
    double max_missing_fraction = 0.40; // train columns beyond this are dropped
};

FeatureConfig default_feature_config();

// base = centered moving average of width window_w (shrinking at the edges),
// residual = sample - base. base + residual reconstructs the input exactly.
void decompose(const TimeSeries& ts, int window_w, TimeSeries& base, TimeSeries& residual);

SignalFeatures signal_features(const TimeSeries& ts, int window_w,
                               const std::vector<OccupancyRange>& ranges);

LabFeatures lab_features(const std::vector<TimedValue>& obs, double normal_lo, double normal_hi);

// PO2/FIO2 when PO2 is available, otherwise (SPO2/FIO2 - 64)/0.84.
double pf_ratio(std::optional<double> po2, double fio2, std::optional<double> spo2);

// Train-fitted assembly state: categorical treatment, column inventory,
// train medians for imputation, and the surviving column list.
struct FeatureAssembler {
    FeatureConfig config;
    CleaningParams cleaning;
    double encoder_alpha = 0.5;
    // categoricals with more than five train levels get the conditional
    // probability encoding; the rest become level indicator columns
    std::map<std::string, CategoricalEncoder> encoders;
    std::map<std::string, std::vector<std::string>> onehot_levels;
    std::vector<std::string> column_names;   // final, post-drop, lexicographic
    std::vector<ColumnGroup> column_groups;
    std::vector<std::string> column_sources;    // originating variable per column
    std::vector<std::string> column_statistics; // statistic kind per column
    std::vector<double> train_medians;          // per final column
    std::vector<std::string> dropped_columns;
};

// Fits the assembler on the training cohort (encoders, level inventories,
// missingness-based column drops, imputation medians). `outcome` must be the
// training outcome used for the categorical encoders.
FeatureAssembler fit_assembler(const Cohort& train, const std::vector<std::uint8_t>& outcome,
                               const FeatureConfig& config, const CleaningParams& cleaning,
                               double encoder_alpha, CleaningReport* report = nullptr);

// One row per patient, columns fixed by the assembler; missing cells imputed
// with the train median and recorded in the mask.
FeatureMatrix assemble_matrix(const Cohort& cohort, const FeatureAssembler& assembler,
                              CleaningReport* report = nullptr);

// column manifest entry for the JSON audit
struct ColumnInfo {
    std::string name;
    std::string source;    // originating variable
    std::string statistic; // "min", "mean_base", "onehot", ...
    std::string group;     // "preop" | "intraop"
};

std::vector<ColumnInfo> column_manifest(const FeatureAssembler& assembler);

} // namespace aki
