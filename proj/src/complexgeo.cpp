#include "blend/complexgeo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blend/errors.hpp"
#include "blend/parallel.hpp"
#include "blend/rng.hpp"

namespace blend {

bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cplx checked(cplx z, const char* what) {
    if (!is_finite(z)) throw NonFiniteSample(what);
    return z;
}

Disk::Disk(cplx c, double r) : center(checked(c, "disk center")), radius(r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("disk radius must be finite and >= 0");
}

bool Disk::contains(cplx z, double slack) const { return std::abs(z - center) <= radius + slack; }

bool Disk::contains(const Disk& inner) const {
    return std::abs(inner.center - center) + inner.radius <= radius;
}

Polydisk::Polydisk(std::vector<cplx> c, std::vector<double> r) : centers(std::move(c)), radii(std::move(r)) {
    if (centers.empty() || centers.size() != radii.size())
        throw InvalidArgument("polydisk needs matching, nonempty centers and radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        checked(centers[i], "polydisk center");
        if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) throw InvalidArgument("polydisk radii must be > 0");
    }
}

Polydisk Polydisk::unit(std::size_t k) {
    return Polydisk(std::vector<cplx>(k, cplx(0.0, 0.0)), std::vector<double>(k, 1.0));
}

bool Polydisk::contains(std::span<const cplx> p, double slack) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (std::abs(p[i] - centers[i]) > radii[i] + slack) return false;
    return true;
}

double Polydisk::outer_radius() const {
    double s = 0.0;
    for (double r : radii) s += r * r;
    return std::sqrt(s);
}

AffineContraction::AffineContraction(cplx m_, cplx t_) : m(checked(m_, "multiplier")), t(checked(t_, "translation")) {
    double a = std::abs(m);
    if (!(a > 0.0) || !(a < 1.0)) throw InvalidArgument("affine contraction needs 0 < |m| < 1");
}

AffineContraction AffineContraction::after(const AffineContraction& inner) const {
    return AffineContraction(m * inner.m, m * inner.t + t);
}

Disk affine_image(const AffineContraction& map, const Disk& disk) {
    return Disk(map.m * disk.center + map.t, std::abs(map.m) * disk.radius);
}

Disk affine_preimage(const AffineContraction& map, const Disk& disk) {
    return Disk((disk.center - map.t) / map.m, disk.radius / std::abs(map.m));
}

AngularSector::AngularSector(double rmin_, double rmax_, double halfAngle_, double axisAngle_)
    : rmin(rmin_), rmax(rmax_), halfAngle(halfAngle_), axisAngle(axisAngle_) {
    if (!(0.0 < rmin && rmin < rmax)) throw InvalidArgument("sector needs 0 < rmin < rmax");
    if (!(0.0 < halfAngle && halfAngle < kPi)) throw InvalidArgument("sector needs 0 < half-angle < pi");
}

bool AngularSector::contains(cplx z) const {
    double r = std::abs(z);
    if (!(r > rmin && r < rmax)) return false;
    double a = std::arg(z * std::polar(1.0, -axisAngle));
    return std::abs(a) < halfAngle;
}

double AngularSector::inner_clearance(cplx z) const {
    double r = std::abs(z);
    double a = std::abs(std::arg(z * std::polar(1.0, -axisAngle)));
    double radial = std::min(r - rmin, rmax - r);
    double gap = halfAngle - a;
    double angular = gap >= kPi / 2 ? r : r * std::sin(gap);
    return std::min(radial, angular);
}

AngularSector AngularSector::lemma_range() { return AngularSector(0.6, 1.0, kPi / 20); }
AngularSector AngularSector::blender_range() { return AngularSector(0.7, 0.9, kPi / 40); }

std::size_t graph_node_count(std::size_t fiberDim, int n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < 2 * fiberDim; ++i) total *= static_cast<std::size_t>(n);
    return total;
}

// Real direction 2a is Re(omega_a), 2a+1 is Im(omega_a); the last direction
// varies fastest in the flat index.
std::vector<cplx> graph_node(const Polydisk& domain, int n, std::size_t flat) {
    const std::size_t dims = 2 * domain.dim();
    std::vector<int> idx(dims);
    for (std::size_t r = dims; r-- > 0;) {
        idx[r] = static_cast<int>(flat % n);
        flat /= n;
    }
    std::vector<cplx> w(domain.dim());
    for (std::size_t a = 0; a < domain.dim(); ++a) {
        double rad = domain.radii[a];
        double h = 2.0 * rad / (n - 1);
        w[a] = domain.centers[a] + cplx(-rad + h * idx[2 * a], -rad + h * idx[2 * a + 1]);
    }
    return w;
}

double finite_difference_slope(const Polydisk& domain, int n, std::span<const cplx> values) {
    const std::size_t dims = 2 * domain.dim();
    std::vector<std::size_t> stride(dims, 1);
    for (std::size_t r = dims - 1; r-- > 0;) stride[r] = stride[r + 1] * n;
    double best = 0.0;
    for (std::size_t r = 0; r < dims; ++r) {
        double h = 2.0 * domain.radii[r / 2] / (n - 1);
        for (std::size_t f = 0; f < values.size(); ++f) {
            std::size_t coord = (f / stride[r]) % n;
            if (coord + 1 >= static_cast<std::size_t>(n)) continue;
            best = std::max(best, std::abs(values[f + stride[r]] - values[f]) / h);
        }
    }
    return best;
}

double VerticalGraph::spacing(std::size_t axis) const { return 2.0 * domain.radii[axis] / (n - 1); }

std::vector<cplx> VerticalGraph::node(std::size_t flat) const { return graph_node(domain, n, flat); }

bool VerticalGraph::node_in_domain(std::size_t flat) const {
    auto w = node(flat);
    return domain.contains(w, 1e-12);
}

cplx VerticalGraph::eval(std::span<const cplx> omega) const {
    const std::size_t dims = real_dims();
    std::vector<int> base(dims);
    std::vector<double> frac(dims);
    for (std::size_t r = 0; r < dims; ++r) {
        std::size_t a = r / 2;
        double rad = domain.radii[a];
        double x = (r % 2 == 0) ? (omega[a] - domain.centers[a]).real() : (omega[a] - domain.centers[a]).imag();
        double u = (x + rad) / (2.0 * rad) * (n - 1);
        int i = static_cast<int>(std::floor(u));
        i = std::clamp(i, 0, n - 2);
        base[r] = i;
        frac[r] = u - i;
    }
    std::vector<std::size_t> stride(dims, 1);
    for (std::size_t r = dims - 1; r-- > 0;) stride[r] = stride[r + 1] * n;
    cplx acc(0.0, 0.0);
    const std::size_t corners = std::size_t{1} << dims;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t r = 0; r < dims; ++r) {
            int bit = (c >> r) & 1;
            w *= bit ? frac[r] : 1.0 - frac[r];
            flat += (base[r] + bit) * stride[r];
        }
        acc += w * values[flat];
    }
    return acc;
}

double VerticalGraph::operator_slope() const {
    return slopeBound * std::sqrt(static_cast<double>(domain.dim()));
}

VerticalGraph graph_from_values(const Polydisk& domain, int n, std::vector<cplx> values) {
    if (n < 2) throw InvalidGrid("gridN must be >= 2");
    if (values.size() != graph_node_count(domain.dim(), n)) throw InvalidArgument("graph value count mismatch");
    for (const auto& v : values) checked(v, "graph sample");
    VerticalGraph g;
    g.domain = domain;
    g.n = n;
    g.values = std::move(values);
    g.fdSlope = finite_difference_slope(g.domain, n, g.values);
    g.slopeBound = kSlopeSafety * g.fdSlope;
    return g;
}

VerticalGraph graph_from_callable(const GraphEvaluator& evaluator, const Polydisk& domain, int gridN) {
    if (gridN < 2) throw InvalidGrid("gridN must be >= 2");
    const std::size_t total = graph_node_count(domain.dim(), gridN);
    std::vector<cplx> values(total);
    std::vector<char> bad(total, 0);
    parallel_for(total, [&](std::size_t f) {
        auto w = graph_node(domain, gridN, f);
        cplx v = evaluator(w);
        if (!is_finite(v)) bad[f] = 1;
        values[f] = v;
    });
    if (std::find(bad.begin(), bad.end(), 1) != bad.end()) throw NonFiniteSample("evaluator returned NaN/Inf");
    return graph_from_values(domain, gridN, std::move(values));
}

namespace {

Disk disk_from2(cplx a, cplx b) { return Disk((a + b) / 2.0, std::abs(a - b) / 2.0); }

Disk disk_from3(cplx a, cplx b, cplx c) {
    cplx bb = b - a, cc = c - a;
    double d = 2.0 * (bb.real() * cc.imag() - bb.imag() * cc.real());
    if (std::abs(d) < 1e-300) {
        Disk best = disk_from2(a, b);
        for (const Disk& k : {disk_from2(a, c), disk_from2(b, c)})
            if (k.radius > best.radius) best = k;
        return best;
    }
    double b2 = std::norm(bb), c2 = std::norm(cc);
    cplx u((cc.imag() * b2 - bb.imag() * c2) / d, (bb.real() * c2 - cc.real() * b2) / d);
    return Disk(a + u, std::abs(u));
}

bool inside(const Disk& D, cplx p) { return std::abs(p - D.center) <= D.radius * (1.0 + 1e-14) + 1e-300; }

}  // namespace

Disk min_enclosing_disk(std::span<const cplx> input) {
    if (input.empty()) throw InvalidArgument("min_enclosing_disk of empty set");
    std::vector<cplx> p(input.begin(), input.end());
    SplitMix64 rng(0x5eed);
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    Disk D(p[0], 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (inside(D, p[i])) continue;
        D = Disk(p[i], 0.0);
        for (std::size_t j = 0; j < i; ++j) {
            if (inside(D, p[j])) continue;
            D = disk_from2(p[i], p[j]);
            for (std::size_t k = 0; k < j; ++k)
                if (!inside(D, p[k])) D = disk_from3(p[i], p[j], p[k]);
        }
    }
    return D;
}

}  // namespace blend
