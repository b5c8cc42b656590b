#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blend/complexgeo.hpp"
#include "blend/ifs1d.hpp"
#include "blend/report.hpp"

namespace blend {

// (z, omega) -> omega' in C^{k-1}.
using FiberMap = std::function<std::vector<cplx>(cplx, std::span<const cplx>)>;
// (z, omega) -> z'.
using FirstMap = std::function<cplx(cplx, std::span<const cplx>)>;

// L(z, omega) = (zmap(z, omega), fiber(z, omega)). Without zmap the first
// coordinate is exactly base(z); with it, zmap - base is a perturbation whose
// C1 size is epsC1.
struct SkewBranch {
    AffineContraction base;
    FiberMap fiber;
    double dzBound = 0.0;
    double dwBound = 0.0;
    FirstMap zmap;
    double epsC1 = 0.0;
    bool empiricalBounds = false;

    cplx first(cplx z, std::span<const cplx> w) const { return zmap ? zmap(z, w) : base(z); }
    std::vector<cplx> apply(std::span<const cplx> p) const;
};

struct BlenderIfs {
    int k = 2;
    std::vector<SkewBranch> branches;
    double perturbationC1 = 0.0;
    // 1: base satisfies the d-branch covering lemma directly.
    // 2: two-branch form whose square covers.
    int wordLength = 1;
    std::string label;

    BlenderIfs() = default;
    BlenderIfs(int k_, std::vector<SkewBranch> b, double c1, int wordLength_ = 1, std::string lbl = "");

    cplx multiplier() const { return branches.front().base.m; }
    Ifs1D base_ifs() const;
};

struct IntersectionWitness {
    // Outer to inner: point = L_{s_1} ∘ ... ∘ L_{s_N}(innerPoint).
    std::vector<int> symbols;
    std::vector<cplx> point;
    std::vector<cplx> innerPoint;
    double radius = 0.0;
    std::vector<double> graphTrail;
    // Diameter bound of graph ∩ depth-n cylinder, n = 1..N (nonincreasing).
    std::vector<double> cylinderDiameters;
};

double slope_threshold(int k, cplx m);

// [g (dw + e) + e] / [|m| - g (1 + e) - e].
double propagate_slope(double graphSlope, const SkewBranch& branch, double epsC1, cplx m);

inline constexpr int kMaxFixedPointIters = 200;

VerticalGraph pullback_graph(const SkewBranch& branch, const VerticalGraph& graph, double tol);

IntersectionWitness intersect_graph_blender(const BlenderIfs& ifs, const VerticalGraph& graph, int steps,
                                            double tol);

struct FiberBounds {
    double dz = 0.0;
    double dw = 0.0;
    double maxModulus = 0.0;  // max |omega'_a| over the samples
};

inline constexpr double kFiberSafety = 1.1;

// Sampled sup of |d_z phi| and |d_omega phi| over the unit polydisk (no safety factor).
FiberBounds sample_fiber_bounds(const FiberMap& fiber, int k, int nSamples = 4096);
// Sampled bounds times kFiberSafety.
FiberBounds estimate_fiber_bounds(const FiberMap& fiber, int k, int nSamples = 4096);
// Sampled sup of |e|, |d_z e|, |d_omega e| for e = zmap - base over the unit polydisk.
double measure_perturbation_c1(const SkewBranch& branch, int k, int nSamples = 4096);

Report validate_blender(const BlenderIfs& ifs);

std::vector<std::vector<cplx>> sample_limit_set_k(const BlenderIfs& ifs, std::size_t nPoints, int burnIn,
                                                  std::uint64_t seed);

json witness_json(const IntersectionWitness& w);

}  // namespace blend
