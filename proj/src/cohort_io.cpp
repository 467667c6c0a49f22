#include "aki/cohort.hpp"

#include "aki/csv.hpp"
#include "aki/errors.hpp"
#include "aki/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace aki {

std::map<std::string, std::pair<double, double>> default_signal_ranges() {
    return {
        {"map", {40.0, 240.0}}, {"sbp", {40.0, 240.0}}, {"dbp", {20.0, 140.0}},
        {"hr", {20.0, 220.0}},  {"mac", {0.0, 5.0}},    {"spo2", {50.0, 100.0}},
    };
}

namespace {

const std::vector<std::string> kPatientRequired = {
    "patient_id", "age", "sex", "race_black", "ckd",
    "rrt_postop", "surgery_start_min", "surgery_end_min"};

std::size_t col_of(const CsvFile& f, const std::string& name) {
    auto it = std::find(f.header.begin(), f.header.end(), name);
    return static_cast<std::size_t>(it - f.header.begin());
}

std::string field(const std::vector<std::string>& row, std::size_t idx) {
    return idx < row.size() ? row[idx] : std::string{};
}

} // namespace

LoadedCohort load_cohort(const std::string& patients_csv, const std::string& timeseries_csv,
                         const std::string& labs_csv, const LoadConfig& config) {
    LoadedCohort out;
    out.cohort.signal_ranges = config.signal_ranges;
    auto reject = [&](const std::string& file, std::size_t line, const std::string& msg) {
        out.diagnostics.push_back({file, line, msg});
    };

    CsvFile pf = read_csv(patients_csv, kPatientRequired);
    const std::size_t c_id = col_of(pf, "patient_id");
    const std::size_t c_age = col_of(pf, "age");
    const std::size_t c_sex = col_of(pf, "sex");
    const std::size_t c_black = col_of(pf, "race_black");
    const std::size_t c_ckd = col_of(pf, "ckd");
    const std::size_t c_rrt = col_of(pf, "rrt_postop");
    const std::size_t c_start = col_of(pf, "surgery_start_min");
    const std::size_t c_end = col_of(pf, "surgery_end_min");

    std::set<std::string> seen_ids;
    std::unordered_map<std::string, std::size_t> patient_index;
    for (std::size_t r = 0; r < pf.rows.size(); ++r) {
        const auto& row = pf.rows[r];
        const std::size_t line = pf.line_numbers[r];
        const std::string id = field(row, c_id);
        if (id.empty()) {
            reject(patients_csv, line, "empty patient_id");
            continue;
        }
        if (seen_ids.count(id))
            throw Error(ErrorCode::DuplicatePatientId, "patient_id '" + id + "' repeats at " +
                                                           patients_csv + ":" +
                                                           std::to_string(line));
        seen_ids.insert(id);

        PatientRecord p;
        p.patient_id = id;
        auto age = parse_double(field(row, c_age));
        auto black = parse_bool01(field(row, c_black));
        auto ckd = parse_bool01(field(row, c_ckd));
        auto rrt = parse_bool01(field(row, c_rrt));
        auto start = parse_double(field(row, c_start));
        auto end = parse_double(field(row, c_end));
        const std::string sex = field(row, c_sex);
        if (!age || !black || !ckd || !rrt || !start || !end ||
            (sex != "male" && sex != "female")) {
            reject(patients_csv, line, "unparseable required field");
            continue;
        }
        if (*age < 18.0) {
            reject(patients_csv, line, "age below 18, excluded at ingestion");
            continue;
        }
        if (!(*end > *start)) {
            reject(patients_csv, line, "surgery_end_min must exceed surgery_start_min");
            continue;
        }
        p.age = *age;
        p.female = sex == "female";
        p.race_black = *black;
        p.ckd_documented = *ckd;
        p.rrt_postop = *rrt;
        p.surgery_start_min = *start;
        p.surgery_end_min = *end;

        bool bad = false;
        for (std::size_t c = 0; c < pf.header.size() && !bad; ++c) {
            const std::string& h = pf.header[c];
            const std::string v = field(row, c);
            if (v.empty()) continue; // absent optional value
            if (h.rfind("num_", 0) == 0) {
                auto d = parse_double(v);
                if (!d) {
                    reject(patients_csv, line, "bad numeric in " + h);
                    bad = true;
                } else {
                    p.preop_numerics[h.substr(4)] = *d;
                }
            } else if (h.rfind("bin_", 0) == 0) {
                auto b = parse_bool01(v);
                if (!b) {
                    reject(patients_csv, line, "bad boolean in " + h);
                    bad = true;
                } else {
                    p.preop_binaries[h.substr(4)] = *b;
                }
            } else if (h.rfind("cat_", 0) == 0) {
                p.preop_categoricals[h.substr(4)] = v;
            } else if (h.rfind("med_", 0) == 0) {
                auto b = parse_bool01(v);
                if (!b) {
                    reject(patients_csv, line, "bad boolean in " + h);
                    bad = true;
                } else {
                    p.intraop_meds[h.substr(4)] = *b;
                }
            } else if (h.rfind("tot_", 0) == 0) {
                auto d = parse_double(v);
                if (!d) {
                    reject(patients_csv, line, "bad numeric in " + h);
                    bad = true;
                } else {
                    p.totals[h.substr(4)] = *d;
                }
            }
        }
        if (bad) continue;

        const double duration = p.surgery_end_min - p.surgery_start_min;
        auto it = p.totals.find("surgery_duration_min");
        if (it == p.totals.end()) {
            p.totals["surgery_duration_min"] = duration;
        } else if (std::abs(it->second - duration) > 1e-9 * std::max(1.0, duration)) {
            reject(patients_csv, line, "surgery_duration_min inconsistent with start/end");
            continue;
        }
        patient_index[p.patient_id] = out.cohort.patients.size();
        out.cohort.patients.push_back(std::move(p));
    }

    CsvFile tf = read_csv(timeseries_csv, {"patient_id", "signal", "t_min", "value"});
    const std::size_t t_id = col_of(tf, "patient_id");
    const std::size_t t_sig = col_of(tf, "signal");
    const std::size_t t_t = col_of(tf, "t_min");
    const std::size_t t_v = col_of(tf, "value");
    for (std::size_t r = 0; r < tf.rows.size(); ++r) {
        const auto& row = tf.rows[r];
        const std::size_t line = tf.line_numbers[r];
        const std::string id = field(row, t_id);
        const std::string sig = field(row, t_sig);
        if (!config.signal_ranges.count(sig))
            throw Error(ErrorCode::UnknownSignal, "signal '" + sig + "' at " + timeseries_csv +
                                                      ":" + std::to_string(line) +
                                                      " is not in signal_ranges");
        auto pit = patient_index.find(id);
        if (pit == patient_index.end()) {
            reject(timeseries_csv, line, "row references unknown patient '" + id + "'");
            continue;
        }
        auto t = parse_double(field(row, t_t));
        auto v = parse_double(field(row, t_v));
        if (!t || !v || !std::isfinite(*t) || !std::isfinite(*v)) {
            reject(timeseries_csv, line, "unparseable t_min/value");
            continue;
        }
        auto& series = out.cohort.patients[pit->second].series[sig];
        if (series.samples.empty()) {
            series.signal_name = sig;
            const auto& range = config.signal_ranges.at(sig);
            series.valid_lo = range.first;
            series.valid_hi = range.second;
        }
        series.samples.push_back({*t, *v});
    }
    for (auto& p : out.cohort.patients)
        for (auto& [_, s] : p.series)
            std::stable_sort(s.samples.begin(), s.samples.end(),
                             [](const TimeSample& a, const TimeSample& b) { return a.t < b.t; });

    CsvFile lf = read_csv(labs_csv, {"patient_id", "name", "t", "value"});
    const std::size_t l_id = col_of(lf, "patient_id");
    const std::size_t l_name = col_of(lf, "name");
    const std::size_t l_t = col_of(lf, "t");
    const std::size_t l_v = col_of(lf, "value");
    for (std::size_t r = 0; r < lf.rows.size(); ++r) {
        const auto& row = lf.rows[r];
        const std::size_t line = lf.line_numbers[r];
        const std::string id = field(row, l_id);
        auto pit = patient_index.find(id);
        if (pit == patient_index.end()) {
            reject(labs_csv, line, "row references unknown patient '" + id + "'");
            continue;
        }
        auto t = parse_double(field(row, l_t));
        auto v = parse_double(field(row, l_v));
        const std::string name = field(row, l_name);
        if (!t || !v || name.empty() || !std::isfinite(*t) || !std::isfinite(*v)) {
            reject(labs_csv, line, "unparseable lab row");
            continue;
        }
        auto& p = out.cohort.patients[pit->second];
        if (name == "creatinine_history") {
            if (*t < 0.0 || *v <= 0.0) {
                reject(labs_csv, line, "creatinine history needs t >= 0 and value > 0");
                continue;
            }
            p.creatinine_history.push_back({*t, *v});
        } else if (name == "creatinine_postop") {
            if (*t < 0.0 || *v <= 0.0) {
                reject(labs_csv, line, "postop creatinine needs t >= 0 and value > 0");
                continue;
            }
            p.postop_creatinine.push_back({*t, *v});
        } else {
            p.intraop_labs[name].push_back({*t, *v});
        }
    }
    for (auto& p : out.cohort.patients) {
        auto by_t = [](const TimedValue& a, const TimedValue& b) { return a.t < b.t; };
        std::stable_sort(p.creatinine_history.begin(), p.creatinine_history.end(), by_t);
        std::stable_sort(p.postop_creatinine.begin(), p.postop_creatinine.end(), by_t);
        for (auto& [_, obs] : p.intraop_labs) std::stable_sort(obs.begin(), obs.end(), by_t);
    }
    return out;
}

void save_cohort(const Cohort& cohort, const CohortFiles& files) {
    // column inventory over the whole cohort, sorted for stable headers
    std::set<std::string> nums, bins, cats, meds, tots;
    for (const auto& p : cohort.patients) {
        for (const auto& [k, _] : p.preop_numerics) nums.insert(k);
        for (const auto& [k, _] : p.preop_binaries) bins.insert(k);
        for (const auto& [k, _] : p.preop_categoricals) cats.insert(k);
        for (const auto& [k, _] : p.intraop_meds) meds.insert(k);
        for (const auto& [k, _] : p.totals) tots.insert(k);
    }
    std::vector<std::string> header = kPatientRequired;
    for (const auto& k : nums) header.push_back("num_" + k);
    for (const auto& k : bins) header.push_back("bin_" + k);
    for (const auto& k : cats) header.push_back("cat_" + k);
    for (const auto& k : meds) header.push_back("med_" + k);
    for (const auto& k : tots) header.push_back("tot_" + k);

    std::string patients = join_csv(header) + "\n";
    for (const auto& p : cohort.patients) {
        std::vector<std::string> row;
        row.push_back(p.patient_id);
        row.push_back(format_double(p.age));
        row.push_back(p.female ? "female" : "male");
        row.push_back(p.race_black ? "1" : "0");
        row.push_back(p.ckd_documented ? "1" : "0");
        row.push_back(p.rrt_postop ? "1" : "0");
        row.push_back(format_double(p.surgery_start_min));
        row.push_back(format_double(p.surgery_end_min));
        for (const auto& k : nums) {
            auto it = p.preop_numerics.find(k);
            row.push_back(it == p.preop_numerics.end() ? "" : format_double(it->second));
        }
        for (const auto& k : bins) {
            auto it = p.preop_binaries.find(k);
            row.push_back(it == p.preop_binaries.end() ? "" : (it->second ? "1" : "0"));
        }
        for (const auto& k : cats) {
            auto it = p.preop_categoricals.find(k);
            row.push_back(it == p.preop_categoricals.end() ? "" : it->second);
        }
        for (const auto& k : meds) {
            auto it = p.intraop_meds.find(k);
            row.push_back(it == p.intraop_meds.end() ? "" : (it->second ? "1" : "0"));
        }
        for (const auto& k : tots) {
            auto it = p.totals.find(k);
            row.push_back(it == p.totals.end() ? "" : format_double(it->second));
        }
        patients += join_csv(row) + "\n";
    }
    write_file(files.patients_csv, patients);

    std::string ts = "patient_id,signal,t_min,value\n";
    for (const auto& p : cohort.patients)
        for (const auto& [sig, series] : p.series)
            for (const auto& s : series.samples)
                ts += join_csv({p.patient_id, sig, format_double(s.t), format_double(s.value)}) +
                      "\n";
    write_file(files.timeseries_csv, ts);

    std::string labs = "patient_id,name,t,value\n";
    for (const auto& p : cohort.patients) {
        for (const auto& m : p.creatinine_history)
            labs += join_csv({p.patient_id, "creatinine_history", format_double(m.t),
                              format_double(m.value)}) +
                    "\n";
        for (const auto& m : p.postop_creatinine)
            labs += join_csv({p.patient_id, "creatinine_postop", format_double(m.t),
                              format_double(m.value)}) +
                    "\n";
        for (const auto& [name, obs] : p.intraop_labs)
            for (const auto& m : obs)
                labs += join_csv({p.patient_id, name, format_double(m.t),
                                  format_double(m.value)}) +
                        "\n";
    }
    write_file(files.labs_csv, labs);
}

SplitResult split_cohort(const Cohort& cohort, const std::vector<std::uint8_t>& outcome,
                         double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorCode::ConfigError, "train_fraction must lie in (0,1)");
    if (outcome.size() != cohort.patients.size())
        throw Error(ErrorCode::RowMisalignment, "outcome length != patient count");

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < outcome.size(); ++i) (outcome[i] ? pos : neg).push_back(i);

    SplitResult res;
    Rng rng(mix64(seed, hash_tag("split")));
    auto split_class = [&](std::vector<std::size_t>& idx, const char* tag) {
        Rng crng = rng.derive(tag);
        crng.shuffle(idx);
        // ties toward train
        const auto train_n = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(idx.size()) + 0.5));
        if (train_n < 2 || idx.size() - train_n < 2)
            throw Error(ErrorCode::TooFewPerClass, "split leaves fewer than 2 rows per class");
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < train_n ? res.train_idx : res.test_idx).push_back(idx[i]);
    };
    split_class(pos, "split/pos");
    split_class(neg, "split/neg");
    std::sort(res.train_idx.begin(), res.train_idx.end());
    std::sort(res.test_idx.begin(), res.test_idx.end());
    return res;
}

Cohort take_patients(const Cohort& cohort, const std::vector<std::size_t>& idx) {
    Cohort out;
    out.signal_ranges = cohort.signal_ranges;
    out.patients.reserve(idx.size());
    for (auto i : idx) out.patients.push_back(cohort.patients[i]);
    return out;
}

} // namespace aki
