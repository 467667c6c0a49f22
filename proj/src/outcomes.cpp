#include "aki/outcomes.hpp"

#include "aki/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace aki {

namespace {
constexpr double kHorizon3dHours = 72.0;
constexpr double kHorizon7dHours = 168.0;
constexpr double kRatioFactor = 1.5;
constexpr double kDeltaMgDl = 0.3;
constexpr double kDeltaWindowHours = 48.0;
constexpr double kBaselineLookbackDays = 365.0;
} // namespace

double mdrd_baseline(double age_years, bool female, bool black) {
    double v = (186.0 / 75.0) * std::pow(age_years, -0.203);
    if (female) v *= 0.742;
    if (black) v *= 1.21;
    return std::pow(v, 1.0 / 1.154);
}

BaselineCreatinine compute_baseline(const PatientRecord& patient) {
    double best = std::numeric_limits<double>::infinity();
    bool any_recent = false;
    for (const auto& m : patient.creatinine_history) {
        if (m.t <= kBaselineLookbackDays) {
            any_recent = true;
            best = std::min(best, m.value);
        }
    }
    if (any_recent) return {best, BaselineSource::measured_prior_year};

    if (!patient.ckd_documented)
        return {mdrd_baseline(patient.age, patient.female, patient.race_black),
                BaselineSource::mdrd_estimate};

    // CKD documented, nothing in the past year: fall back to the most recent
    // older measurement if one exists at all.
    if (!patient.creatinine_history.empty()) {
        const TimedValue* most_recent = &patient.creatinine_history.front();
        for (const auto& m : patient.creatinine_history)
            if (m.t < most_recent->t) most_recent = &m;
        return {most_recent->value, BaselineSource::measured_prior_year};
    }
    throw Error(ErrorCode::NoBaselineAvailable,
                "patient " + patient.patient_id + ": CKD documented and no creatinine history");
}

OutcomeLabels label_outcomes(const PatientRecord& patient, const BaselineCreatinine& baseline) {
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Earliest time each creatinine criterion fires; the horizon checks reduce
    // to comparisons against these.
    double ratio_at = inf;
    double delta_at = inf;

    const auto& cr = patient.postop_creatinine; // time-sorted precondition
    for (const auto& m : cr) {
        if (m.value > kRatioFactor * baseline.value) {
            ratio_at = m.t;
            break;
        }
    }

    // Sliding 48h window minimum via monotonic deque: for each measurement,
    // compare against the smallest strictly-earlier value still inside the
    // window. Samples sharing a timestamp are admitted only once t advances,
    // so equal-time pairs never qualify.
    std::deque<std::size_t> window; // indices, values increasing
    std::size_t next_to_add = 0;
    for (std::size_t j = 0; j < cr.size(); ++j) {
        while (next_to_add < j && cr[next_to_add].t < cr[j].t) {
            while (!window.empty() && cr[window.back()].value >= cr[next_to_add].value)
                window.pop_back();
            window.push_back(next_to_add);
            ++next_to_add;
        }
        while (!window.empty() && cr[window.front()].t < cr[j].t - kDeltaWindowHours)
            window.pop_front();
        if (!window.empty() && cr[j].value - cr[window.front()].value >= kDeltaMgDl) {
            delta_at = cr[j].t;
            break;
        }
    }

    auto at_horizon = [&](double h) -> AkiTrigger {
        if (patient.rrt_postop) return AkiTrigger::rrt;
        if (ratio_at <= h) return AkiTrigger::ratio_1_5x;
        if (delta_at <= h) return AkiTrigger::delta_0_3_48h;
        return AkiTrigger::none;
    };

    OutcomeLabels out;
    out.trigger_3day = at_horizon(kHorizon3dHours);
    out.trigger_7day = at_horizon(kHorizon7dHours);
    out.trigger_overall = at_horizon(inf);
    out.aki_3day = out.trigger_3day != AkiTrigger::none;
    out.aki_7day = out.trigger_7day != AkiTrigger::none;
    out.aki_overall = out.trigger_overall != AkiTrigger::none;
    return out;
}

} // namespace aki
