#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace sd::ad {

using Mat = Eigen::MatrixXd;

// Reverse-mode autodiff over dense matrices. A Tape is built fresh for every
// training step: leaves hold trainable parameters (their gradients are read
// back after backward()), constants block gradient flow.
class Tape {
public:
    using Var = int;

    Var constant(Mat value);
    Var leaf(Mat value);

    const Mat& val(Var v) const { return nodes_[static_cast<std::size_t>(v)].value; }
    const Mat& grad(Var v) const { return nodes_[static_cast<std::size_t>(v)].grad; }

    // Elementwise / broadcast arithmetic.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var neg(Var a);
    Var scale(Var a, double c);
    Var add_scalar(Var a, double c);
    Var add_rowvec(Var a, Var row);    // row is 1 x m, broadcast over rows
    Var sub_col(Var a, Var col);       // col is n x 1, broadcast over columns
    Var mul_col(Var a, Var col);

    Var matmul(Var a, Var b);
    Var transpose(Var a);

    // Elementwise nonlinearities.
    Var relu(Var a);
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var softplus(Var a);
    Var square(Var a);
    Var clamp(Var a, double lo, double hi);  // pass-through gradient inside the bounds
    Var minimum(Var a, Var b);               // gradient routed to the elementwise argmin

    // Reductions and shape ops.
    Var sum(Var a);          // 1 x 1
    Var mean(Var a);         // 1 x 1
    Var rowsum(Var a);       // n x 1
    Var logsumexp_rows(Var a);  // n x 1, logsumexp across columns
    Var concat_cols(const std::vector<Var>& parts);
    Var slice_cols(Var a, int start, int count);
    Var gather_cols(Var a, const std::vector<int>& col_per_row);  // n x 1

    // Composites.
    Var softmax_rows(Var a);
    Var log_softmax_rows(Var a);

    // Seeds d(out)/d(out) = 1 (out must be 1 x 1) and runs the backward sweep.
    void backward(Var out);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        std::function<void(Tape&)> back;  // null for leaves/constants
    };
    std::vector<Node> nodes_;

    Var push(Mat value, std::function<void(Tape&)> back);
    Mat& grad_rw(Var v) { return nodes_[static_cast<std::size_t>(v)].grad; }
};

}  // namespace sd::ad
