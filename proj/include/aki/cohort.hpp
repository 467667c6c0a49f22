#pragma once

#include "aki/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aki {

std::map<std::string, std::pair<double, double>> default_signal_ranges();

struct LoadDiagnostic {
    std::string file;
    std::size_t line = 0;
    std::string message;
};

struct LoadedCohort {
    Cohort cohort;
    std::vector<LoadDiagnostic> diagnostics; // rejected rows, one entry each
};

struct LoadConfig {
    std::map<std::string, std::pair<double, double>> signal_ranges = default_signal_ranges();
};

// CSV ingestion. Rows with unparseable required fields are rejected with a
// row-level diagnostic; duplicate patient ids and unknown signals abort.
LoadedCohort load_cohort(const std::string& patients_csv, const std::string& timeseries_csv,
                         const std::string& labs_csv, const LoadConfig& config);

struct CohortFiles {
    std::string patients_csv;
    std::string timeseries_csv;
    std::string labs_csv;
};

// Inverse of load_cohort for well-formed cohorts (load -> save -> load is
// identity on content).
void save_cohort(const Cohort& cohort, const CohortFiles& files);

// ---- synthetic cohorts -----------------------------------------------------

struct SynthConfig {
    int n_patients = 2911;
    std::uint64_t seed = 7;
    double target_prevalence_7day = 0.40;
    std::map<std::string, double> preop_effect_weights;
    std::map<std::string, double> intraop_effect_weights;
    double sampling_interval_min = 1.0;
};

SynthConfig default_synth_config();

// Deterministic cohort with planted preoperative and intraoperative signal:
// demographics echo the target population (median age ~60, ~60% male),
// vitals are mean-reverting processes whose per-patient means shift with
// latent intraoperative factors, and the outcome follows a logistic latent
// model whose intercept is solved so the expected AKI-7day prevalence hits
// the target. A share of events is driven only by the intraoperative
// latents.
Cohort generate_synthetic_cohort(const SynthConfig& cfg);

// ---- stratified split --------------------------------------------------------

struct SplitResult {
    std::vector<std::size_t> train_idx; // original cohort order
    std::vector<std::size_t> test_idx;
};

// Stratified by the outcome label; per class the train count is
// round(train_fraction * class_n) with half rounding toward train.
SplitResult split_cohort(const Cohort& cohort, const std::vector<std::uint8_t>& outcome,
                         double train_fraction, std::uint64_t seed);

Cohort take_patients(const Cohort& cohort, const std::vector<std::size_t>& idx);

} // namespace aki
