#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Per-feature affine standardization. Zero-variance features get std clamped
// to 1 so they standardize to exactly 0 instead of dividing by zero.
struct Standardizer {
    Vec mean;
    Vec std;

    static Standardizer fit(const Mat& states);  // rows = samples

    Vec apply(const Vec& s) const;
    Mat apply(const Mat& states) const;
    Vec invert(const Vec& standardized) const;

    static Standardizer identity(int dim);
    bool is_identity() const;
};

struct LabeledState {
    Vec state;
    int label = 0;  // 1 = reference-policy state, 0 = random-policy state
};

// Dataset of expert/random labeled states plus the standardizer fitted on it.
struct LabeledStateDataset {
    std::vector<LabeledState> samples;
    Standardizer standardizer;

    int state_dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].state.size()); }
    Mat states() const;                 // rows = samples
    std::vector<int> labels() const;

    void fit_standardizer();  // pooled over both labels; requires nonempty

    // Binary format: magic "SDDS", version byte, state_dim (int32 LE),
    // sample count (int64 LE), then per sample state_dim float64 LE + 1 label byte.
    void save_binary(const std::string& path) const;
    static LabeledStateDataset load_binary(const std::string& path);

    // CSV variant for inspection: header "label,s0,s1,...".
    void save_csv(const std::string& path) const;
    static LabeledStateDataset load_csv(const std::string& path);
};

}  // namespace sd
