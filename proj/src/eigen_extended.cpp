#include "detail.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Eigenvalues>

#include <complex>

namespace kitaev::detail {

namespace {

using Quad = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<113, boost::multiprecision::digit_base_2, void, std::int16_t, -16382, 16383>,
    boost::multiprecision::et_off>;
using QComplex = std::complex<Quad>;
using QMatrix = Eigen::Matrix<QComplex, Eigen::Dynamic, Eigen::Dynamic>;
using QVector = Eigen::Matrix<QComplex, Eigen::Dynamic, 1>;

QComplex widen(cplx z) { return {Quad(z.real()), Quad(z.imag())}; }
cplx narrow(const QComplex& z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

Quad norm2(const QVector& v) {
    Quad s = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i).real() * v(i).real() + v(i).imag() * v(i).imag();
    return sqrt(s);
}

}  // namespace

RawEigen solve_extended(const CMatrix& H) {
    const Eigen::Index n = H.rows();
    QMatrix Q(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) Q(i, j) = widen(H(i, j));

    Eigen::ComplexEigenSolver<QMatrix> es(Q, true);
    RawEigen out;
    out.converged = es.info() == Eigen::Success;
    if (!out.converged) return out;

    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        QVector v = es.eigenvectors().col(j);
        const Quad len = norm2(v);
        if (len > 0) v /= QComplex(len, 0);
        out.values(j) = narrow(es.eigenvalues()(j));
        for (Eigen::Index i = 0; i < n; ++i) out.vectors(i, j) = narrow(v(i));
    }
    return out;
}

}  // namespace kitaev::detail
