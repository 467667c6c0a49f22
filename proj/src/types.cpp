#include "aki/types.hpp"

#include "aki/errors.hpp"

#include <algorithm>

namespace aki {

const char* to_string(AkiTrigger t) {
    switch (t) {
    case AkiTrigger::none: return "none";
    case AkiTrigger::rrt: return "rrt";
    case AkiTrigger::ratio_1_5x: return "ratio_1_5x";
    case AkiTrigger::delta_0_3_48h: return "delta_0_3_48h";
    }
    return "none";
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end())
        throw Error(ErrorCode::MissingColumn, "feature matrix has no column '" + name + "'");
    return static_cast<std::size_t>(it - column_names.begin());
}

bool FeatureMatrix::has_column(const std::string& name) const {
    return std::find(column_names.begin(), column_names.end(), name) != column_names.end();
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][j];
    return out;
}

FeatureMatrix FeatureMatrix::submatrix(ColumnGroup group) const {
    FeatureMatrix out;
    out.patient_ids = patient_ids;
    out.outcomes = outcomes;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < column_names.size(); ++j) {
        if (column_groups[j] == group) {
            keep.push_back(j);
            out.column_names.push_back(column_names[j]);
            out.column_groups.push_back(group);
        }
    }
    out.rows.reserve(rows.size());
    out.imputed_mask.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<double> r(keep.size());
        std::vector<std::uint8_t> m(keep.size());
        for (std::size_t k = 0; k < keep.size(); ++k) {
            r[k] = rows[i][keep[k]];
            m[k] = imputed_mask.empty() ? std::uint8_t{0} : imputed_mask[i][keep[k]];
        }
        out.rows.push_back(std::move(r));
        out.imputed_mask.push_back(std::move(m));
    }
    return out;
}

void FeatureMatrix::append_column(const std::string& name, ColumnGroup group,
                                  const std::vector<double>& values) {
    if (values.size() != rows.size())
        throw Error(ErrorCode::RowMisalignment, "appended column length != row count");
    column_names.push_back(name);
    column_groups.push_back(group);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].push_back(values[i]);
        if (!imputed_mask.empty()) imputed_mask[i].push_back(0);
    }
}

} // namespace aki
