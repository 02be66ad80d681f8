#include "skilldisc/projection.hpp"

#include <fstream>
#include <sstream>

#include "skilldisc/errors.hpp"

namespace sd {

Vec LinearProjection::encode(const Vec& standardized_state) const {
    if (standardized_state.size() != chi.cols())
        throw ValidationError("projection encode: state dimension mismatch");
    return chi * standardized_state;
}

Vec LinearProjection::encode_raw(const Vec& raw_state) const {
    return encode(standardize_enabled ? standardizer.apply(raw_state) : raw_state);
}

Mat LinearProjection::encode_raw(const Mat& raw_states) const {
    if (raw_states.cols() != chi.cols())
        throw ValidationError("projection encode: state dimension mismatch");
    Mat s = standardize_enabled ? standardizer.apply(raw_states) : raw_states;
    return s * chi.transpose();
}

LinearProjection LinearProjection::identity(int state_dim) {
    LinearProjection p;
    p.chi = Mat::Identity(state_dim, state_dim);
    p.standardizer = Standardizer::identity(state_dim);
    p.standardize_enabled = false;
    return p;
}

void LinearProjection::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << chi.rows() << " " << chi.cols() << "\n";
    for (Eigen::Index i = 0; i < chi.rows(); ++i) {
        for (Eigen::Index j = 0; j < chi.cols(); ++j) out << (j ? " " : "") << chi(i, j);
        out << "\n";
    }
    for (Eigen::Index j = 0; j < chi.cols(); ++j) out << (j ? " " : "") << standardizer.mean[j];
    out << "\n";
    for (Eigen::Index j = 0; j < chi.cols(); ++j) out << (j ? " " : "") << standardizer.std[j];
    out << "\n";
    if (!out) throw ArtifactError("write failure on '" + path + "'");
}

LinearProjection LinearProjection::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open projection file '" + path + "'");
    Eigen::Index e = 0, s = 0;
    if (!(in >> e >> s) || e < 1 || s < 1)
        throw ArtifactError("projection file '" + path + "': bad dimension header");
    LinearProjection p;
    p.chi.resize(e, s);
    for (Eigen::Index i = 0; i < e; ++i)
        for (Eigen::Index j = 0; j < s; ++j)
            if (!(in >> p.chi(i, j)))
                throw ArtifactError("projection file '" + path + "': expected " + std::to_string(e) +
                                    " matrix rows of " + std::to_string(s) + " values");
    p.standardizer.mean.resize(s);
    p.standardizer.std.resize(s);
    for (Eigen::Index j = 0; j < s; ++j)
        if (!(in >> p.standardizer.mean[j]))
            throw ArtifactError("projection file '" + path + "': missing standardizer mean row");
    for (Eigen::Index j = 0; j < s; ++j)
        if (!(in >> p.standardizer.std[j]))
            throw ArtifactError("projection file '" + path + "': missing standardizer std row");
    p.standardize_enabled = !p.standardizer.is_identity();
    return p;
}

}  // namespace sd
