#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blend/blender.hpp"
#include "blend/complexgeo.hpp"
#include "blend/polynomial.hpp"
#include "blend/report.hpp"

namespace blend {

using Point2 = std::array<cplx, 2>;

// Smallest |kappa| for which |kappa|^{-(d-1)/d} <= 1/2000; for d = 3 this is 2000^{3/2}.
double min_kappa(int d);

// f(z, w) = (p(z) + eps w, w^d + kappa), with z0 a fixed point of p and
// m = 1/p'(z0). Rescaled coordinates are
//   (zt, wt) = (e^{-i psi} (z - z0) / delta, w / (2c)),   c = (-kappa)^{1/d} (principal),
// where psi is chosen so that every base translation is a positive multiple of zeta_j.
struct SkewProduct {
    Polynomial1D p;
    int d = 3;
    cplx kappa;
    cplx eps;
    cplx z0;
    cplx m;
    double delta = 0.0;
    cplx c;
    double alpha0 = 0.8;
    cplx alphaEff;  // -eps c / (delta (1 - |m|))
    double psi = 0.0;

    // Finds z0 by Newton from z0Guess and checks the hypotheses on m. A positive
    // deltaOverride replaces choose_delta (required when eps = 0).
    static SkewProduct make(const Polynomial1D& p, int d, cplx kappa, cplx eps, cplx z0Guess = 0.0,
                            double deltaOverride = 0.0);

    cplx zeta(int j) const;  // e^{2 pi i j / d}, j = 1..d
    Point2 forward(cplx z, cplx w) const;
    cplx q(cplx w) const;
    cplx p0_inverse(cplx y) const;
    // Inverse branch of q with qinv(j, 0) = zeta_j c; no domain check.
    cplx qinv(int j, cplx x) const;

    Point2 to_rescaled(cplx z, cplx w) const;
    Point2 from_rescaled(cplx zt, cplx wt) const;
    cplx qt(cplx wt) const;
    cplx qt_inv(int j, cplx xt) const;
    cplx qt_inv_deriv(int j, cplx xt) const;
    cplx forward_z_rescaled(cplx zt, cplx wt) const;
    Point2 forward_rescaled(cplx zt, cplx wt) const;
    // First coordinate of the inverse branch given the new fiber value wtNew.
    cplx branch_z_rescaled(cplx zt, cplx wtNew) const;
    Point2 branch_rescaled(int j, cplx zt, cplx wt) const;
    // Affine reference m zt + |m| |alphaEff| (1-|m|) zeta_j.
    AffineContraction base_branch(int j) const;

    void require_delta() const;
};

cplx julia_inverse_branch(int d, cplx kappa, cplx zeta, cplx x);

Report verify_julia_geometry(int d, cplx kappa, int nSamples = 10000);

double choose_delta(const SkewProduct& skew);
double choose_delta(int d, cplx kappa, cplx eps, cplx m);

BlenderIfs rescaled_inverse_ifs(const SkewProduct& skew);

using Map2 = std::function<Point2(const Point2&)>;

struct RoucheResult {
    bool ok = false;
    double minDisplacement = 0.0;  // min ||h(x) - x|| on the boundary
    double maxEta = 0.0;           // max ||eta(x)|| on the boundary
    double margin = 0.0;
};

// Max-norm comparison on the boundary of the bidisk box.
RoucheResult rouche_verify(const Map2& h, const Map2& eta, const Polydisk& box, int boundaryN = 64);

struct CorePoint {
    Point2 point;
    int period = 1;
    double residual = 0.0;
    std::string regime;
    std::vector<int> symbols;  // branch indices in application order
    double clearance = 0.0;    // distance to the boundary of D(0,1/10) x D
    std::optional<RoucheResult> rouche;
    double selfMapClearance = 0.0;  // near regime: min boundary-image clearance
};

CorePoint find_core_point(const SkewProduct& skew);
// Applies the core's composed inverse branch once.
Point2 apply_core_branch(const SkewProduct& skew, const CorePoint& core, const Point2& x);

std::vector<VerticalGraph> push_graph(const SkewProduct& skew, const VerticalGraph& graph);

struct UnstableManifold {
    VerticalGraph graph;
    std::vector<double> distances;  // C0 distance between successive iterates
    int iterations = 0;
    double invarianceResidual = 0.0;
};

UnstableManifold unstable_manifold(const SkewProduct& skew, const CorePoint& core, int nIters, int gridN = 64);
// Pushes the graph along the core cycle and returns the C0 distance to itself.
double wuu_invariance_residual(const SkewProduct& skew, const CorePoint& core, const VerticalGraph& graph);

inline constexpr int kPushCap = 12;
inline constexpr std::size_t kMaxPushComponents = 64;

struct MisiurewiczWitness {
    IntersectionWitness witness;  // rescaled coordinates
    cplx critPoint;
    std::vector<int> pushSymbols;  // fiber branch per push, forward order
    std::vector<double> pushSlopes;
    bool usedUnstableManifold = false;
    Point2 pointOriginal;  // witness point in original coordinates
    cplx w0;               // fiber point on the critical line reaching pointOriginal
    std::size_t componentsExamined = 0;
};

MisiurewiczWitness misiurewicz_certify(const SkewProduct& skew, cplx critPoint, int nPush, int nPull,
                                       int gridN = 64, double tol = 1e-13);

using PolyFamily = std::function<Polynomial1D(cplx)>;

struct ParabolicSplit {
    std::vector<cplx> points;
    std::vector<cplx> multipliers;
    cplx b;         // rho_lambda^q = 1 + b lambda + O(lambda^2)
    cplx A;         // coefficient of z^{nu q + 1} in f_0^q(z) - z
    double residual = 0.0;  // max |x_i^{nu q} + b lambda / A| over nonzero fixed points
    double gap = 0.0;       // |next root| / |largest selected root|
};

ParabolicSplit parabolic_split(const PolyFamily& family, int q, int nu, cplx lambda);
// Log-log slope of the residual against |lambda|.
double fit_split_exponent(const PolyFamily& family, int q, int nu, const std::vector<cplx>& lambdas);

struct HenonOptions {
    double a = -1.0;  // defaults to the midpoint of (beta/d, beta)
    bool enforceGate = true;
    std::uint64_t seed = 1;
};

Report henon_covering_check(cplx c, const Polynomial1D& pPlus, const Polynomial1D& pMinus, double eps,
                            int nSamples, const HenonOptions& opt = {});

json core_json(const CorePoint& core);
json misiurewicz_json(const MisiurewiczWitness& mw);

}  // namespace blend
