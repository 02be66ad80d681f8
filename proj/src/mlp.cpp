#include "skilldisc/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "skilldisc/errors.hpp"

namespace sd {

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim)
    : input_dim_(input_dim), output_dim_(output_dim) {
    if (input_dim < 1 || output_dim < 1) throw ValidationError("mlp dimensions must be positive");
    std::vector<int> widths;
    widths.push_back(input_dim);
    for (int h : hidden) widths.push_back(h);
    widths.push_back(output_dim);
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        weights_.emplace_back(Mat::Zero(widths[i], widths[i + 1]));
        biases_.emplace_back(Mat::Zero(1, widths[i + 1]));
    }
}

void Mlp::init(Rng& rng) {
    for (auto& W : weights_) {
        double scale = std::sqrt(2.0 / static_cast<double>(W.rows()));
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = normal(rng) * scale;
    }
    for (auto& b : biases_) b.setZero();
}

Mat Mlp::forward(const Mat& X) const {
    if (X.cols() != input_dim_) throw ValidationError("mlp forward: input dimension mismatch");
    Mat h = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = (h * weights_[l]).rowwise() + biases_[l].row(0);
        if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

ad::Tape::Var Mlp::forward(ad::Tape& tape, ad::Tape::Var X,
                           const std::vector<ad::Tape::Var>& params) const {
    if (params.size() != weights_.size() * 2)
        throw ValidationError("mlp forward: wrong number of parameter vars");
    if (tape.val(X).cols() != input_dim_)
        throw ValidationError("mlp forward: input dimension mismatch");
    ad::Tape::Var h = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        h = tape.add_rowvec(tape.matmul(h, params[2 * l]), params[2 * l + 1]);
        if (l + 1 < weights_.size()) h = tape.relu(h);
    }
    return h;
}

std::vector<Mat*> Mlp::params() {
    std::vector<Mat*> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out.push_back(&weights_[l]);
        out.push_back(&biases_[l]);
    }
    return out;
}

std::vector<const Mat*> Mlp::params() const {
    std::vector<const Mat*> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out.push_back(&weights_[l]);
        out.push_back(&biases_[l]);
    }
    return out;
}

std::vector<ad::Tape::Var> Mlp::params_on(ad::Tape& tape, bool trainable) const {
    std::vector<ad::Tape::Var> out;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out.push_back(trainable ? tape.leaf(weights_[l]) : tape.constant(weights_[l]));
        out.push_back(trainable ? tape.leaf(biases_[l]) : tape.constant(biases_[l]));
    }
    return out;
}

void Mlp::set_from(const ad::Tape& tape, const std::vector<ad::Tape::Var>& vars) {
    if (vars.size() != weights_.size() * 2) throw ValidationError("set_from: wrong var count");
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        weights_[l] = tape.val(vars[2 * l]);
        biases_[l] = tape.val(vars[2 * l + 1]);
    }
}

void Mlp::save(std::ostream& out) const {
    out.precision(17);
    out << "mlp " << weights_.size() << "\n";
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        out << weights_[l].rows() << " " << weights_[l].cols() << "\n";
        for (Eigen::Index i = 0; i < weights_[l].rows(); ++i) {
            for (Eigen::Index j = 0; j < weights_[l].cols(); ++j)
                out << (j ? " " : "") << weights_[l](i, j);
            out << "\n";
        }
        for (Eigen::Index j = 0; j < biases_[l].cols(); ++j) out << (j ? " " : "") << biases_[l](0, j);
        out << "\n";
    }
}

Mlp Mlp::load(std::istream& in) {
    std::string tag;
    std::size_t layers = 0;
    if (!(in >> tag >> layers) || tag != "mlp")
        throw ArtifactError("malformed network blob (missing 'mlp' header)");
    Mlp net;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> rows >> cols) || rows < 1 || cols < 1)
            throw ArtifactError("malformed network blob (bad layer shape)");
        Mat W(rows, cols), b(1, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                if (!(in >> W(i, j))) throw ArtifactError("malformed network blob (weights)");
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(in >> b(0, j))) throw ArtifactError("malformed network blob (bias)");
        net.weights_.push_back(std::move(W));
        net.biases_.push_back(std::move(b));
    }
    if (layers == 0) throw ArtifactError("malformed network blob (no layers)");
    net.input_dim_ = static_cast<int>(net.weights_.front().rows());
    net.output_dim_ = static_cast<int>(net.weights_.back().cols());
    return net;
}

bool Mlp::operator==(const Mlp& other) const {
    if (weights_.size() != other.weights_.size()) return false;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
    return true;
}

void Adam::step(const std::vector<Mat*>& params, const std::vector<const Mat*>& grads) {
    if (params.size() != grads.size()) throw ValidationError("adam: param/grad count mismatch");
    if (m_.empty()) {
        for (auto* p : params) {
            m_.emplace_back(Mat::Zero(p->rows(), p->cols()));
            v_.emplace_back(Mat::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Mat& g = *grads[i];
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
        Mat mhat = m_[i] / bc1;
        Mat vhat = v_[i] / bc2;
        params[i]->array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
}

void polyak_update(const std::vector<const Mat*>& main_params,
                   const std::vector<Mat*>& target_params, double tau) {
    if (main_params.size() != target_params.size())
        throw ValidationError("polyak: parameter count mismatch");
    for (std::size_t i = 0; i < main_params.size(); ++i) {
        if (main_params[i]->rows() != target_params[i]->rows() ||
            main_params[i]->cols() != target_params[i]->cols())
            throw ValidationError("polyak: parameter shape mismatch");
        *target_params[i] = tau * (*main_params[i]) + (1.0 - tau) * (*target_params[i]);
    }
}

}  // namespace sd
