#pragma once

#include "oalg/rational.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <complex>
#include <random>
#include <vector>

namespace oalg {

using CMat = Eigen::MatrixXcd;
using Cx = std::complex<double>;

/// Dense square-capable matrix over an exact scalar (used with RatCx).
template <class T>
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

    T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    friend Mat operator+(const Mat& x, const Mat& y) {
        Mat r(x.rows, x.cols);
        for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
        return r;
    }
    friend Mat operator*(const Mat& x, const Mat& y) {
        Mat r(x.rows, y.cols);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t k = 0; k < x.cols; ++k) {
                const T& xik = x(i, k);
                if (xik == T()) continue;
                for (std::size_t j = 0; j < y.cols; ++j) r(i, j) = r(i, j) + xik * y(k, j);
            }
        return r;
    }
    friend Mat operator*(const T& s, const Mat& x) {
        Mat r(x.rows, x.cols);
        for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = s * x.a[i];
        return r;
    }
    friend bool operator==(const Mat& x, const Mat& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

using RatMat = Mat<RatCx>;

inline RatMat adjoint(const RatMat& m) {
    RatMat r(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) r(j, i) = m(i, j).conj();
    return r;
}

inline CMat to_cmat(const RatMat& m) {
    CMat r(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) r(i, j) = to_complex(m(i, j));
    return r;
}

/// Operator norm (largest singular value).
inline double opnorm(const CMat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

/// exp(i*h) for self-adjoint h, via spectral decomposition.
inline CMat exp_i_selfadjoint(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases(k) = std::exp(Cx(0.0, es.eigenvalues()(k)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMat kron(const CMat& x, const CMat& y) {
    CMat r(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            r.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return r;
}

/// Random matrix with small-rational entries (test tuples stay exactly
/// representable in doubles).
inline RatMat random_rat_matrix(std::size_t d, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-4, 4);
    std::uniform_int_distribution<int> den_pow(0, 2);
    RatMat m(d, d);
    for (auto& z : m.a) {
        z.re = Rat(num(rng), 1 << den_pow(rng));
        z.im = Rat(num(rng), 1 << den_pow(rng));
    }
    return m;
}

}  // namespace oalg
