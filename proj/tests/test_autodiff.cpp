#include <doctest.h>

#include <cmath>
#include <functional>

#include "skilldisc/autodiff.hpp"
#include "skilldisc/errors.hpp"
#include "skilldisc/rng.hpp"

using namespace sd;
using ad::Tape;
using Mat = Eigen::MatrixXd;

namespace {

Mat random_mat(Rng& rng, int rows, int cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = normal(rng) * scale;
    return m;
}

// Central finite differences of a scalar function of one matrix argument.
Mat fd_gradient(const std::function<double(const Mat&)>& f, const Mat& at, double h = 1e-6) {
    Mat g(at.rows(), at.cols());
    for (int i = 0; i < at.rows(); ++i)
        for (int j = 0; j < at.cols(); ++j) {
            Mat plus = at, minus = at;
            plus(i, j) += h;
            minus(i, j) -= h;
            g(i, j) = (f(plus) - f(minus)) / (2.0 * h);
        }
    return g;
}

void check_close(const Mat& a, const Mat& b, double tol) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double denom = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
    CHECK((a - b).cwiseAbs().maxCoeff() / denom < tol);
}

// Checks the analytic gradient of `build` (maps a leaf var to a scalar var)
// against finite differences at the point X.
void grad_check(const std::function<Tape::Var(Tape&, Tape::Var)>& build, const Mat& X,
                double tol = 1e-6) {
    Tape tape;
    Tape::Var x = tape.leaf(X);
    Tape::Var out = build(tape, x);
    tape.backward(out);
    Mat analytic = tape.grad(x);

    Mat numeric = fd_gradient(
        [&](const Mat& at) {
            Tape t2;
            Tape::Var x2 = t2.leaf(at);
            return t2.val(build(t2, x2))(0, 0);
        },
        X);
    check_close(analytic, numeric, tol);
}

}  // namespace

TEST_CASE("forward values of basic ops") {
    Tape t;
    Mat a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 5, 6, 7, 8;
    Tape::Var va = t.leaf(a), vb = t.leaf(b);
    CHECK(t.val(t.add(va, vb))(0, 0) == 6.0);
    CHECK(t.val(t.sub(va, vb))(1, 1) == -4.0);
    CHECK(t.val(t.mul(va, vb))(1, 0) == 21.0);
    CHECK(t.val(t.matmul(va, vb))(0, 0) == doctest::Approx(19.0));
    CHECK(t.val(t.sum(va))(0, 0) == 10.0);
    CHECK(t.val(t.mean(va))(0, 0) == 2.5);
    CHECK(t.val(t.transpose(va))(0, 1) == 3.0);
}

TEST_CASE("matmul chain gradient matches finite differences") {
    Rng rng = make_rng(1, "test/autodiff");
    Mat W = random_mat(rng, 3, 4);
    Mat X = random_mat(rng, 5, 3);
    grad_check(
        [&](Tape& t, Tape::Var x) { return t.sum(t.tanh(t.matmul(x, t.constant(W)))); }, X);
    // And with respect to the weights.
    grad_check(
        [&](Tape& t, Tape::Var w) { return t.sum(t.tanh(t.matmul(t.constant(X), w))); }, W);
}

TEST_CASE("elementwise nonlinearity gradients") {
    Rng rng = make_rng(2, "test/autodiff");
    Mat X = random_mat(rng, 4, 3);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.sigmoid(x)); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.softplus(x)); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.exp(x)); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.square(x)); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.mean(t.tanh(x)); }, X);

    Mat positive = X.array().abs() + 0.5;
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.log(x)); }, positive);
}

TEST_CASE("relu gradient is the indicator of positivity") {
    Mat X(2, 2);
    X << -1.0, 2.0, 0.5, -3.0;
    Tape t;
    Tape::Var x = t.leaf(X);
    Tape::Var out = t.sum(t.relu(x));
    t.backward(out);
    Mat expect(2, 2);
    expect << 0, 1, 1, 0;
    CHECK((t.grad(x) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clamp passes gradient only strictly inside the bounds") {
    Mat X(1, 4);
    X << -5.0, -0.5, 0.5, 5.0;
    Tape t;
    Tape::Var x = t.leaf(X);
    Tape::Var out = t.sum(t.clamp(x, -1.0, 1.0));
    CHECK(t.val(out)(0, 0) == doctest::Approx(-1.0 - 0.5 + 0.5 + 1.0));
    t.backward(out);
    Mat expect(1, 4);
    expect << 0, 1, 1, 0;
    CHECK((t.grad(x) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("minimum routes gradient to the smaller branch") {
    Mat a(1, 3), b(1, 3);
    a << 1.0, 5.0, 2.0;
    b << 3.0, 4.0, 2.0;
    Tape t;
    Tape::Var va = t.leaf(a), vb = t.leaf(b);
    Tape::Var out = t.sum(t.minimum(va, vb));
    CHECK(t.val(out)(0, 0) == doctest::Approx(1.0 + 4.0 + 2.0));
    t.backward(out);
    CHECK(t.grad(va)(0, 0) == 1.0);
    CHECK(t.grad(vb)(0, 0) == 0.0);
    CHECK(t.grad(va)(0, 1) == 0.0);
    CHECK(t.grad(vb)(0, 1) == 1.0);
    // Ties go to the first argument; the total gradient is conserved.
    CHECK(t.grad(va)(0, 2) + t.grad(vb)(0, 2) == 1.0);
}

TEST_CASE("broadcast op gradients") {
    Rng rng = make_rng(3, "test/autodiff");
    Mat X = random_mat(rng, 4, 3);
    Mat row = random_mat(rng, 1, 3);
    Mat col = random_mat(rng, 4, 1);

    grad_check([&](Tape& t, Tape::Var x) { return t.sum(t.square(t.add_rowvec(x, t.constant(row)))); }, X);
    grad_check([&](Tape& t, Tape::Var r) { return t.sum(t.square(t.add_rowvec(t.constant(X), r))); }, row);
    grad_check([&](Tape& t, Tape::Var x) { return t.sum(t.square(t.sub_col(x, t.constant(col)))); }, X);
    grad_check([&](Tape& t, Tape::Var c) { return t.sum(t.square(t.sub_col(t.constant(X), c))); }, col);
    grad_check([&](Tape& t, Tape::Var x) { return t.sum(t.square(t.mul_col(x, t.constant(col)))); }, X);
    grad_check([&](Tape& t, Tape::Var c) { return t.sum(t.square(t.mul_col(t.constant(X), c))); }, col);
}

TEST_CASE("reduction and shape op gradients") {
    Rng rng = make_rng(4, "test/autodiff");
    Mat X = random_mat(rng, 4, 5);

    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.square(t.rowsum(x))); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.square(t.logsumexp_rows(x))); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.mean(t.square(t.log_softmax_rows(x))); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.square(t.softmax_rows(x))); }, X);
    grad_check([](Tape& t, Tape::Var x) { return t.sum(t.square(t.slice_cols(x, 1, 3))); }, X);
    grad_check(
        [](Tape& t, Tape::Var x) {
            return t.sum(t.square(t.concat_cols({t.slice_cols(x, 0, 2), t.slice_cols(x, 2, 3)})));
        },
        X);
    std::vector<int> picks{0, 3, 2, 4};
    grad_check([&](Tape& t, Tape::Var x) { return t.sum(t.square(t.gather_cols(x, picks))); }, X);
}

TEST_CASE("logsumexp matches a naive computation and is shift stable") {
    Mat X(2, 3);
    X << 1.0, 2.0, 3.0, 1000.0, 1000.0, 1000.0;
    Tape t;
    Tape::Var lse = t.logsumexp_rows(t.leaf(X));
    CHECK(t.val(lse)(0, 0) ==
          doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))));
    CHECK(t.val(lse)(1, 0) == doctest::Approx(1000.0 + std::log(3.0)));
}

TEST_CASE("softmax rows sum to one and log_softmax normalizes") {
    Rng rng = make_rng(5, "test/autodiff");
    Mat X = random_mat(rng, 6, 4, 3.0);
    Tape t;
    Tape::Var sm = t.softmax_rows(t.leaf(X));
    Tape::Var lsm = t.log_softmax_rows(t.leaf(X));
    for (int i = 0; i < 6; ++i) {
        CHECK(t.val(sm).row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(t.val(lsm).row(i).array().exp().sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("gradients accumulate when a var is used twice") {
    Mat X(1, 1);
    X << 3.0;
    Tape t;
    Tape::Var x = t.leaf(X);
    Tape::Var out = t.sum(t.mul(x, x));  // d/dx x^2 = 2x
    t.backward(out);
    CHECK(t.grad(x)(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("constants block gradient flow") {
    Mat X(1, 1);
    X << 2.0;
    Tape t;
    Tape::Var c = t.constant(X);
    Tape::Var x = t.leaf(X);
    Tape::Var out = t.sum(t.mul(x, c));
    t.backward(out);
    CHECK(t.grad(x)(0, 0) == 2.0);
    CHECK(t.grad(c)(0, 0) == 2.0);  // grad exists but is never applied to constants
}

TEST_CASE("shape validation errors") {
    Tape t;
    Tape::Var a = t.leaf(Mat::Zero(2, 3));
    Tape::Var b = t.leaf(Mat::Zero(2, 2));
    CHECK_THROWS_AS(t.matmul(a, a), ValidationError);
    CHECK_THROWS_AS(t.add_rowvec(a, b), ValidationError);
    CHECK_THROWS_AS(t.slice_cols(a, 2, 5), ValidationError);
    CHECK_THROWS_AS(t.gather_cols(a, {0}), ValidationError);
    CHECK_THROWS_AS(t.backward(a), ValidationError);
}

TEST_CASE("composite network-like expression gradient") {
    Rng rng = make_rng(6, "test/autodiff");
    Mat X = random_mat(rng, 3, 4);
    Mat W1 = random_mat(rng, 4, 6), b1 = random_mat(rng, 1, 6);
    Mat W2 = random_mat(rng, 6, 2), b2 = random_mat(rng, 1, 2);
    auto net = [&](Tape& t, Tape::Var w1) {
        Tape::Var h = t.relu(t.add_rowvec(t.matmul(t.constant(X), w1), t.constant(b1)));
        Tape::Var o = t.add_rowvec(t.matmul(h, t.constant(W2)), t.constant(b2));
        return t.mean(t.square(o));
    };
    grad_check(net, W1, 1e-5);
}
