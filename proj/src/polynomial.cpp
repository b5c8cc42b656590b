#include "blend/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "blend/errors.hpp"

namespace blend {

Polynomial1D::Polynomial1D(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    for (const auto& a : c_) checked(a, "polynomial coefficient");
    while (c_.size() > 1 && c_.back() == cplx(0.0, 0.0)) c_.pop_back();
    if (c_.empty()) c_.push_back(0.0);
}

Polynomial1D Polynomial1D::monomial(int n, cplx a) {
    std::vector<cplx> c(n + 1, 0.0);
    c[n] = a;
    return Polynomial1D(std::move(c));
}

cplx Polynomial1D::operator()(cplx z) const {
    cplx v = c_.back();
    for (std::size_t i = c_.size() - 1; i-- > 0;) v = v * z + c_[i];
    return v;
}

void Polynomial1D::eval2(cplx z, cplx& value, cplx& deriv) const {
    cplx v = c_.back(), dv = 0.0;
    for (std::size_t i = c_.size() - 1; i-- > 0;) {
        dv = dv * z + v;
        v = v * z + c_[i];
    }
    value = v;
    deriv = dv;
}

Polynomial1D Polynomial1D::derivative() const {
    if (c_.size() == 1) return Polynomial1D();
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial1D(std::move(d));
}

Polynomial1D Polynomial1D::compose(const Polynomial1D& inner) const {
    Polynomial1D acc({c_.back()});
    for (std::size_t i = c_.size() - 1; i-- > 0;) acc = acc * inner + Polynomial1D({c_[i]});
    return acc;
}

std::vector<cplx> Polynomial1D::roots() const {
    const int n = degree();
    if (n < 1) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -c_[i] / c_.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    if (es.info() != Eigen::Success) throw RootFindingFailure("companion eigenvalue solver failed");
    std::vector<cplx> r(n);
    for (int i = 0; i < n; ++i) {
        cplx z = es.eigenvalues()[i];
        for (int it = 0; it < 3; ++it) {
            cplx v, dv;
            eval2(z, v, dv);
            if (dv == cplx(0.0, 0.0)) break;
            cplx step = v / dv;
            if (!is_finite(step) || std::abs(step) > 1e-3 * (1.0 + std::abs(z))) break;
            z -= step;
        }
        r[i] = z;
    }
    return r;
}

Polynomial1D operator+(const Polynomial1D& a, const Polynomial1D& b) {
    std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial1D(std::move(c));
}

Polynomial1D operator-(const Polynomial1D& a, const Polynomial1D& b) { return a + cplx(-1.0, 0.0) * b; }

Polynomial1D operator*(const Polynomial1D& a, const Polynomial1D& b) {
    std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial1D(std::move(c));
}

Polynomial1D operator*(cplx s, const Polynomial1D& a) {
    std::vector<cplx> c(a.c_);
    for (auto& x : c) x *= s;
    return Polynomial1D(std::move(c));
}

}  // namespace blend
