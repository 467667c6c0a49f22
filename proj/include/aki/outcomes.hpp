#pragma once

#include "aki/types.hpp"

namespace aki {

enum class BaselineSource : std::uint8_t { measured_prior_year, mdrd_estimate };

struct BaselineCreatinine {
    double value = 0.0; // mg/dl
    BaselineSource source = BaselineSource::measured_prior_year;
};

// Baseline creatinine back-solved from MDRD assuming GFR = 75:
//   [ (186/75) * 0.742^female * 1.21^black * age^-0.203 ]^(1/1.154)
double mdrd_baseline(double age_years, bool female, bool black);

// Baseline rule: minimum of prior-365-day measurements when any exist;
// otherwise the MDRD estimate for non-CKD patients; otherwise the most
// recent older measurement. Throws NoBaselineAvailable when nothing applies.
BaselineCreatinine compute_baseline(const PatientRecord& patient);

// KDIGO triggers per horizon (72h / 168h / unbounded):
//   (1) renal replacement therapy,
//   (2) any value strictly exceeding 1.5x baseline,
//   (3) a rise of >= 0.3 mg/dl between any two measurements <= 48h apart.
// The recorded trigger is the first satisfied criterion in that order.
OutcomeLabels label_outcomes(const PatientRecord& patient, const BaselineCreatinine& baseline);

} // namespace aki
