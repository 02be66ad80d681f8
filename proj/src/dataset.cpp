#include "skilldisc/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "skilldisc/errors.hpp"

namespace sd {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'D', 'S'};
constexpr std::uint8_t kVersion = 1;

void write_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream& in, void* p, std::size_t n, const std::string& what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ArtifactError("dataset file truncated while reading " + what);
}

}  // namespace

Standardizer Standardizer::fit(const Mat& states) {
    if (states.rows() == 0) throw ValidationError("cannot fit standardizer on empty data");
    Standardizer st;
    st.mean = states.colwise().mean();
    Mat centered = states.rowwise() - st.mean.transpose();
    st.std = (centered.array().square().colwise().sum() / double(states.rows())).sqrt();
    for (int i = 0; i < st.std.size(); ++i)
        if (st.std[i] <= 0.0 || !std::isfinite(st.std[i])) st.std[i] = 1.0;
    return st;
}

Vec Standardizer::apply(const Vec& s) const {
    if (s.size() != mean.size()) throw ValidationError("standardizer dimension mismatch");
    return (s - mean).cwiseQuotient(std);
}

Mat Standardizer::apply(const Mat& states) const {
    if (states.cols() != mean.size()) throw ValidationError("standardizer dimension mismatch");
    return (states.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Vec Standardizer::invert(const Vec& standardized) const {
    if (standardized.size() != mean.size()) throw ValidationError("standardizer dimension mismatch");
    return standardized.cwiseProduct(std) + mean;
}

Standardizer Standardizer::identity(int dim) {
    Standardizer st;
    st.mean = Vec::Zero(dim);
    st.std = Vec::Ones(dim);
    return st;
}

bool Standardizer::is_identity() const {
    return mean.isZero(0.0) && std.isOnes(0.0);
}

Mat LabeledStateDataset::states() const {
    Mat out(static_cast<int>(samples.size()), state_dim());
    for (std::size_t i = 0; i < samples.size(); ++i) out.row(static_cast<int>(i)) = samples[i].state;
    return out;
}

std::vector<int> LabeledStateDataset::labels() const {
    std::vector<int> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = samples[i].label;
    return out;
}

void LabeledStateDataset::fit_standardizer() {
    standardizer = Standardizer::fit(states());
}

void LabeledStateDataset::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
    write_bytes(out, kMagic, 4);
    write_bytes(out, &kVersion, 1);
    std::int32_t dim = state_dim();
    std::int64_t count = static_cast<std::int64_t>(samples.size());
    write_bytes(out, &dim, 4);
    write_bytes(out, &count, 8);
    for (const auto& s : samples) {
        write_bytes(out, s.state.data(), sizeof(double) * static_cast<std::size_t>(dim));
        std::uint8_t label = static_cast<std::uint8_t>(s.label);
        write_bytes(out, &label, 1);
    }
    if (!out) throw ArtifactError("write failure on '" + path + "'");
}

LabeledStateDataset LabeledStateDataset::load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open dataset file '" + path + "'");
    char magic[4];
    read_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ArtifactError("'" + path + "' is not a dataset file (bad magic)");
    std::uint8_t version;
    read_bytes(in, &version, 1, "version");
    if (version != kVersion)
        throw ArtifactError("unsupported dataset version " + std::to_string(version));
    std::int32_t dim;
    std::int64_t count;
    read_bytes(in, &dim, 4, "state_dim");
    read_bytes(in, &count, 8, "sample count");
    if (dim < 1 || count < 0) throw ArtifactError("dataset header has invalid dimensions");
    LabeledStateDataset ds;
    ds.samples.resize(static_cast<std::size_t>(count));
    for (auto& s : ds.samples) {
        s.state.resize(dim);
        read_bytes(in, s.state.data(), sizeof(double) * static_cast<std::size_t>(dim), "state");
        std::uint8_t label;
        read_bytes(in, &label, 1, "label");
        if (label > 1) throw ArtifactError("dataset label byte must be 0 or 1");
        s.label = label;
    }
    if (count > 0) ds.fit_standardizer();
    return ds;
}

void LabeledStateDataset::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ArtifactError("cannot open '" + path + "' for writing");
    out << "label";
    for (int i = 0; i < state_dim(); ++i) out << ",s" << i;
    out << "\n";
    out.precision(17);
    for (const auto& s : samples) {
        out << s.label;
        for (int i = 0; i < s.state.size(); ++i) out << "," << s.state[i];
        out << "\n";
    }
}

LabeledStateDataset LabeledStateDataset::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open dataset file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ArtifactError("dataset CSV is empty");
    LabeledStateDataset ds;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw ArtifactError("dataset CSV row too short");
        LabeledState s;
        s.label = static_cast<int>(row[0]);
        if (s.label != 0 && s.label != 1) throw ArtifactError("dataset CSV label must be 0 or 1");
        s.state.resize(static_cast<int>(row.size()) - 1);
        for (std::size_t i = 1; i < row.size(); ++i) s.state[static_cast<int>(i) - 1] = row[i];
        ds.samples.push_back(std::move(s));
    }
    if (!ds.samples.empty()) ds.fit_standardizer();
    return ds;
}

}  // namespace sd
