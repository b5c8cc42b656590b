#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace blend {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

bool is_finite(cplx z);

// Returns z unchanged; throws NonFiniteSample if a component is NaN or Inf.
cplx checked(cplx z, const char* what = "value");

struct Disk {
    cplx center{0.0, 0.0};
    double radius = 0.0;

    Disk() = default;
    Disk(cplx c, double r);

    bool contains(cplx z, double slack = 0.0) const;
    // Positive when z is inside; distance from z to the boundary circle.
    double clearance(cplx z) const { return radius - std::abs(z - center); }
    // True when `inner` lies in the closed disk.
    bool contains(const Disk& inner) const;
};

struct Polydisk {
    std::vector<cplx> centers;
    std::vector<double> radii;

    Polydisk() = default;
    Polydisk(std::vector<cplx> c, std::vector<double> r);

    static Polydisk unit(std::size_t k);
    std::size_t dim() const { return centers.size(); }
    bool contains(std::span<const cplx> p, double slack = 0.0) const;
    // Euclidean radius of the polydisk about its center.
    double outer_radius() const;
};

struct AffineContraction {
    cplx m;
    cplx t;

    AffineContraction() : m(0.5, 0.0), t(0.0, 0.0) {}
    AffineContraction(cplx m_, cplx t_);

    cplx operator()(cplx z) const { return m * z + t; }
    cplx inverse(cplx z) const { return (z - t) / m; }
    // (this ∘ inner)(z) = this(inner(z)).
    AffineContraction after(const AffineContraction& inner) const;
};

Disk affine_image(const AffineContraction& map, const Disk& disk);
Disk affine_preimage(const AffineContraction& map, const Disk& disk);

struct AngularSector {
    double rmin;
    double rmax;
    double halfAngle;
    double axisAngle;

    AngularSector(double rmin_, double rmax_, double halfAngle_, double axisAngle_ = 0.0);

    bool contains(cplx z) const;
    // Largest eta with D(z, eta) inside the sector; negative outside.
    double inner_clearance(cplx z) const;

    static AngularSector lemma_range();       // 3/5 < |a| < 1, |arg a| < pi/20
    static AngularSector blender_range();     // 0.7 < |a| < 0.9, |arg a| < pi/40
};

// z = gamma(omega) sampled on a uniform tensor grid over the bounding box of the
// omega-polydisk: n points per real direction, 2(k-1) real directions.
struct VerticalGraph {
    Polydisk domain;
    int n = 0;
    std::vector<cplx> values;
    double slopeBound = 0.0;
    double fdSlope = 0.0;

    std::size_t fiber_dim() const { return domain.dim(); }
    std::size_t real_dims() const { return 2 * domain.dim(); }
    std::size_t node_count() const { return values.size(); }
    double spacing(std::size_t axis) const;
    std::vector<cplx> node(std::size_t flat) const;
    bool node_in_domain(std::size_t flat) const;
    cplx eval(std::span<const cplx> omega) const;
    // Operator-norm estimate of d(gamma): per-coordinate bound times sqrt(k-1).
    double operator_slope() const;
};

using GraphEvaluator = std::function<cplx(std::span<const cplx>)>;

std::size_t graph_node_count(std::size_t fiberDim, int n);
std::vector<cplx> graph_node(const Polydisk& domain, int n, std::size_t flat);

// Largest |d gamma| / |d omega| over adjacent grid pairs.
double finite_difference_slope(const Polydisk& domain, int n, std::span<const cplx> values);

inline constexpr double kSlopeSafety = 1.05;

VerticalGraph graph_from_callable(const GraphEvaluator& evaluator, const Polydisk& domain,
                                  int gridN = 64);
VerticalGraph graph_from_values(const Polydisk& domain, int n, std::vector<cplx> values);

// Smallest disk containing all points (randomized incremental, fixed shuffle).
Disk min_enclosing_disk(std::span<const cplx> pts);

}  // namespace blend
