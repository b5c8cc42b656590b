#pragma once

#include <vector>

#include "blend/complexgeo.hpp"

namespace blend {

// Coefficients in increasing degree; exact trailing zeros are trimmed so the
// leading coefficient is nonzero (the zero polynomial keeps a single 0).
class Polynomial1D {
public:
    Polynomial1D() : c_{cplx(0.0, 0.0)} {}
    explicit Polynomial1D(std::vector<cplx> coeffs);

    static Polynomial1D monomial(int n, cplx a = 1.0);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return c_; }
    cplx coeff(int i) const { return i >= 0 && i <= degree() ? c_[i] : cplx(0.0, 0.0); }
    cplx leading() const { return c_.back(); }

    cplx operator()(cplx z) const;
    // Value and first derivative in one Horner pass.
    void eval2(cplx z, cplx& value, cplx& deriv) const;
    Polynomial1D derivative() const;
    // this ∘ inner
    Polynomial1D compose(const Polynomial1D& inner) const;

    // All complex roots via eigenvalues of the companion matrix, each polished
    // by a few Newton steps on the original polynomial.
    std::vector<cplx> roots() const;

    friend Polynomial1D operator+(const Polynomial1D& a, const Polynomial1D& b);
    friend Polynomial1D operator-(const Polynomial1D& a, const Polynomial1D& b);
    friend Polynomial1D operator*(const Polynomial1D& a, const Polynomial1D& b);
    friend Polynomial1D operator*(cplx s, const Polynomial1D& a);

private:
    std::vector<cplx> c_;
};

}  // namespace blend
