#include "skilldisc/autodiff.hpp"

#include <cmath>

#include "skilldisc/errors.hpp"

namespace sd::ad {

Tape::Var Tape::push(Mat value, std::function<void(Tape&)> back) {
    Node n;
    n.grad = Mat::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size()) - 1;
}

Tape::Var Tape::constant(Mat value) { return push(std::move(value), nullptr); }
Tape::Var Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

Tape::Var Tape::add(Var a, Var b) {
    return push(val(a) + val(b), [a, b, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out));
        t.grad_rw(b) += t.grad(static_cast<Var>(out));
    });
}

Tape::Var Tape::sub(Var a, Var b) {
    return push(val(a) - val(b), [a, b, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out));
        t.grad_rw(b) -= t.grad(static_cast<Var>(out));
    });
}

Tape::Var Tape::mul(Var a, Var b) {
    return push(val(a).cwiseProduct(val(b)), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a) += g.cwiseProduct(t.val(b));
        t.grad_rw(b) += g.cwiseProduct(t.val(a));
    });
}

Tape::Var Tape::neg(Var a) {
    return push(-val(a), [a, out = size()](Tape& t) {
        t.grad_rw(a) -= t.grad(static_cast<Var>(out));
    });
}

Tape::Var Tape::scale(Var a, double c) {
    return push(val(a) * c, [a, c, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out)) * c;
    });
}

Tape::Var Tape::add_scalar(Var a, double c) {
    return push(val(a).array() + c, [a, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out));
    });
}

Tape::Var Tape::add_rowvec(Var a, Var row) {
    if (val(row).rows() != 1 || val(row).cols() != val(a).cols())
        throw ValidationError("add_rowvec: row must be 1 x cols(a)");
    return push(val(a).rowwise() + val(row).row(0), [a, row, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a) += g;
        t.grad_rw(row) += g.colwise().sum();
    });
}

Tape::Var Tape::sub_col(Var a, Var col) {
    if (val(col).cols() != 1 || val(col).rows() != val(a).rows())
        throw ValidationError("sub_col: col must be rows(a) x 1");
    return push(val(a).colwise() - val(col).col(0), [a, col, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a) += g;
        t.grad_rw(col) -= g.rowwise().sum();
    });
}

Tape::Var Tape::mul_col(Var a, Var col) {
    if (val(col).cols() != 1 || val(col).rows() != val(a).rows())
        throw ValidationError("mul_col: col must be rows(a) x 1");
    Mat v = val(a).array().colwise() * val(col).col(0).array();
    return push(std::move(v), [a, col, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a) += (g.array().colwise() * t.val(col).col(0).array()).matrix();
        t.grad_rw(col) += g.cwiseProduct(t.val(a)).rowwise().sum();
    });
}

Tape::Var Tape::matmul(Var a, Var b) {
    if (val(a).cols() != val(b).rows()) throw ValidationError("matmul: inner dimension mismatch");
    return push(val(a) * val(b), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a) += g * t.val(b).transpose();
        t.grad_rw(b) += t.val(a).transpose() * g;
    });
}

Tape::Var Tape::transpose(Var a) {
    return push(val(a).transpose(), [a, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out)).transpose();
    });
}

Tape::Var Tape::relu(Var a) {
    return push(val(a).cwiseMax(0.0), [a, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out))
                            .cwiseProduct((t.val(a).array() > 0.0).cast<double>().matrix());
    });
}

Tape::Var Tape::tanh(Var a) {
    Mat v = val(a).array().tanh();
    return push(std::move(v), [a, out = size()](Tape& t) {
        const Mat& y = t.val(static_cast<Var>(out));
        t.grad_rw(a) += t.grad(static_cast<Var>(out))
                            .cwiseProduct((1.0 - y.array().square()).matrix());
    });
}

Tape::Var Tape::sigmoid(Var a) {
    Mat v = (1.0 / (1.0 + (-val(a).array()).exp()));
    return push(std::move(v), [a, out = size()](Tape& t) {
        const Mat& y = t.val(static_cast<Var>(out));
        t.grad_rw(a) += t.grad(static_cast<Var>(out))
                            .cwiseProduct((y.array() * (1.0 - y.array())).matrix());
    });
}

Tape::Var Tape::exp(Var a) {
    Mat v = val(a).array().exp();
    return push(std::move(v), [a, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out)).cwiseProduct(t.val(static_cast<Var>(out)));
    });
}

Tape::Var Tape::log(Var a) {
    Mat v = val(a).array().log();
    return push(std::move(v), [a, out = size()](Tape& t) {
        t.grad_rw(a) += t.grad(static_cast<Var>(out)).cwiseQuotient(t.val(a));
    });
}

Tape::Var Tape::softplus(Var a) {
    // log(1 + exp(x)) computed as max(x, 0) + log1p(exp(-|x|)).
    Mat v = val(a).unaryExpr([](double x) {
        return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    });
    return push(std::move(v), [a, out = size()](Tape& t) {
        Mat s = t.val(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
        t.grad_rw(a) += t.grad(static_cast<Var>(out)).cwiseProduct(s);
    });
}

Tape::Var Tape::square(Var a) {
    return push(val(a).array().square(), [a, out = size()](Tape& t) {
        t.grad_rw(a) += 2.0 * t.grad(static_cast<Var>(out)).cwiseProduct(t.val(a));
    });
}

Tape::Var Tape::clamp(Var a, double lo, double hi) {
    Mat v = val(a).cwiseMax(lo).cwiseMin(hi);
    return push(std::move(v), [a, lo, hi, out = size()](Tape& t) {
        Mat mask = ((t.val(a).array() > lo) && (t.val(a).array() < hi)).cast<double>();
        t.grad_rw(a) += t.grad(static_cast<Var>(out)).cwiseProduct(mask.matrix());
    });
}

Tape::Var Tape::minimum(Var a, Var b) {
    return push(val(a).cwiseMin(val(b)), [a, b, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        Mat pick_a = (t.val(a).array() <= t.val(b).array()).cast<double>();
        t.grad_rw(a) += g.cwiseProduct(pick_a.matrix());
        t.grad_rw(b) += g.cwiseProduct((1.0 - pick_a.array()).matrix());
    });
}

Tape::Var Tape::sum(Var a) {
    Mat v(1, 1);
    v(0, 0) = val(a).sum();
    return push(std::move(v), [a, out = size()](Tape& t) {
        t.grad_rw(a).array() += t.grad(static_cast<Var>(out))(0, 0);
    });
}

Tape::Var Tape::mean(Var a) {
    double n = static_cast<double>(val(a).size());
    Mat v(1, 1);
    v(0, 0) = val(a).sum() / n;
    return push(std::move(v), [a, n, out = size()](Tape& t) {
        t.grad_rw(a).array() += t.grad(static_cast<Var>(out))(0, 0) / n;
    });
}

Tape::Var Tape::rowsum(Var a) {
    return push(val(a).rowwise().sum(), [a, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        t.grad_rw(a).colwise() += g.col(0);
    });
}

Tape::Var Tape::logsumexp_rows(Var a) {
    Eigen::VectorXd m = val(a).rowwise().maxCoeff();
    Mat shifted = val(a).colwise() - m;
    Eigen::VectorXd lse = m.array() + shifted.array().exp().rowwise().sum().log();
    return push(Mat(lse), [a, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));  // n x 1
        Mat soft = (t.val(a).colwise() - t.val(static_cast<Var>(out)).col(0)).array().exp();
        t.grad_rw(a) += (soft.array().colwise() * g.col(0).array()).matrix();
    });
}

Tape::Var Tape::concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_cols: no parts");
    Eigen::Index rows = val(parts[0]).rows();
    Eigen::Index cols = 0;
    for (Var p : parts) {
        if (val(p).rows() != rows) throw ValidationError("concat_cols: row count mismatch");
        cols += val(p).cols();
    }
    Mat v(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
        v.middleCols(at, val(p).cols()) = val(p);
        at += val(p).cols();
    }
    return push(std::move(v), [parts, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        Eigen::Index at = 0;
        for (Var p : parts) {
            Eigen::Index w = t.val(p).cols();
            t.grad_rw(p) += g.middleCols(at, w);
            at += w;
        }
    });
}

Tape::Var Tape::slice_cols(Var a, int start, int count) {
    if (start < 0 || count < 0 || start + count > val(a).cols())
        throw ValidationError("slice_cols: range out of bounds");
    return push(val(a).middleCols(start, count), [a, start, count, out = size()](Tape& t) {
        t.grad_rw(a).middleCols(start, count) += t.grad(static_cast<Var>(out));
    });
}

Tape::Var Tape::gather_cols(Var a, const std::vector<int>& col_per_row) {
    if (static_cast<Eigen::Index>(col_per_row.size()) != val(a).rows())
        throw ValidationError("gather_cols: need one column index per row");
    Mat v(val(a).rows(), 1);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        int c = col_per_row[static_cast<std::size_t>(i)];
        if (c < 0 || c >= val(a).cols()) throw ValidationError("gather_cols: column index out of range");
        v(i, 0) = val(a)(i, c);
    }
    return push(std::move(v), [a, col_per_row, out = size()](Tape& t) {
        const Mat& g = t.grad(static_cast<Var>(out));
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            t.grad_rw(a)(i, col_per_row[static_cast<std::size_t>(i)]) += g(i, 0);
    });
}

Tape::Var Tape::softmax_rows(Var a) {
    return exp(log_softmax_rows(a));
}

Tape::Var Tape::log_softmax_rows(Var a) {
    return sub_col(a, logsumexp_rows(a));
}

void Tape::backward(Var out) {
    if (val(out).rows() != 1 || val(out).cols() != 1)
        throw ValidationError("backward: output must be a 1 x 1 scalar");
    grad_rw(out)(0, 0) = 1.0;
    for (Var v = out; v >= 0; --v) {
        auto& node = nodes_[static_cast<std::size_t>(v)];
        if (node.back) node.back(*this);
    }
}

}  // namespace sd::ad
