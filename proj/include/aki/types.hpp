#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace aki {

struct TimeSample {
    double t = 0.0;
    double value = 0.0;
};

struct TimeSeries {
    std::string signal_name;
    std::vector<TimeSample> samples; // time-ordered
    double valid_lo = 0.0;
    double valid_hi = 0.0;
};

// (days_before_admission, mg/dl) for history, (hours_after_surgery_end, mg/dl) postop
struct TimedValue {
    double t = 0.0;
    double value = 0.0;
};

// One surgical encounter. Time axes: intraop series/labs in minutes from an
// arbitrary origin shared with surgery_start/end; creatinine history in days
// before admission; postop creatinine in hours after surgery end.
struct PatientRecord {
    std::string patient_id;
    double age = 0.0;
    bool female = false;
    bool race_black = false;
    std::map<std::string, std::string> preop_categoricals;
    std::map<std::string, bool> preop_binaries;
    std::map<std::string, double> preop_numerics;
    std::vector<TimedValue> creatinine_history;
    std::vector<TimedValue> postop_creatinine;
    bool rrt_postop = false;
    bool ckd_documented = false;
    double surgery_start_min = 0.0;
    double surgery_end_min = 0.0;
    std::map<std::string, TimeSeries> series;
    std::map<std::string, std::vector<TimedValue>> intraop_labs;
    std::map<std::string, bool> intraop_meds;
    std::map<std::string, double> totals; // blood_products_ml, ebl_ml, fluids_ml, urine_ml, surgery_duration_min

    double surgery_duration() const { return surgery_end_min - surgery_start_min; }
};

struct Cohort {
    std::vector<PatientRecord> patients;
    std::map<std::string, std::pair<double, double>> signal_ranges;
};

enum class AkiTrigger : std::uint8_t { none = 0, rrt, ratio_1_5x, delta_0_3_48h };

const char* to_string(AkiTrigger t);

struct OutcomeLabels {
    bool aki_3day = false;
    bool aki_7day = false;
    bool aki_overall = false;
    AkiTrigger trigger_3day = AkiTrigger::none;
    AkiTrigger trigger_7day = AkiTrigger::none;
    AkiTrigger trigger_overall = AkiTrigger::none;
};

enum class ColumnGroup : std::uint8_t { preop = 0, intraop = 1 };

// Row-per-patient numeric matrix; the interchange object between layers.
struct FeatureMatrix {
    std::vector<std::string> column_names;
    std::vector<ColumnGroup> column_groups;       // parallel to column_names
    std::vector<std::string> patient_ids;         // row order
    std::vector<std::vector<double>> rows;        // rows[i].size() == column_names.size()
    std::vector<std::vector<std::uint8_t>> imputed_mask; // 1 where the cell was imputed
    std::map<std::string, std::vector<std::uint8_t>> outcomes; // name -> 0/1 per row

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return column_names.size(); }
    // index of a named column; throws MissingColumn
    std::size_t column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;
    std::vector<double> column(std::size_t j) const;
    // matrix restricted to one column group (mask and outcomes carried along)
    FeatureMatrix submatrix(ColumnGroup group) const;
    void append_column(const std::string& name, ColumnGroup group,
                       const std::vector<double>& values);
};

} // namespace aki
