#pragma once

#include <string>

#include "skilldisc/dataset.hpp"

namespace sd {

// The learned state projection e = chi * s, applied to standardized states.
// The baseline (projection disabled) is an identity matrix with the identity
// standardizer so both modes share one code path.
struct LinearProjection {
    Mat chi;  // embedding_dim x state_dim
    Standardizer standardizer;
    bool standardize_enabled = true;

    int embedding_dim() const { return static_cast<int>(chi.rows()); }
    int state_dim() const { return static_cast<int>(chi.cols()); }

    // Pure linear map on an already-standardized state.
    Vec encode(const Vec& standardized_state) const;
    // Standardize (when enabled) then project.
    Vec encode_raw(const Vec& raw_state) const;
    Mat encode_raw(const Mat& raw_states) const;  // rows = states

    static LinearProjection identity(int state_dim);

    // Text format: first line "E S", then E rows of S decimals, then one row
    // for the standardizer mean and one for the std. Round-trips bit-exactly.
    void save(const std::string& path) const;
    static LinearProjection load(const std::string& path);
};

}  // namespace sd
