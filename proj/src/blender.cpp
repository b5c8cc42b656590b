#include "blend/blender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blend/errors.hpp"
#include "blend/io.hpp"
#include "blend/parallel.hpp"
#include "blend/rng.hpp"

namespace blend {

std::vector<cplx> SkewBranch::apply(std::span<const cplx> p) const {
    std::span<const cplx> w = p.subspan(1);
    std::vector<cplx> out;
    out.reserve(p.size());
    out.push_back(first(p[0], w));
    auto f = fiber(p[0], w);
    out.insert(out.end(), f.begin(), f.end());
    return out;
}

BlenderIfs::BlenderIfs(int k_, std::vector<SkewBranch> b, double c1, int wordLength_, std::string lbl)
    : k(k_), branches(std::move(b)), perturbationC1(c1), wordLength(wordLength_), label(std::move(lbl)) {
    if (k < 2) throw InvalidArgument("blender dimension k must be >= 2");
    if (branches.size() < 2) throw InvalidArgument("blender needs at least two branches");
    if (wordLength != 1 && wordLength != 2) throw InvalidArgument("wordLength must be 1 or 2");
    for (const auto& br : branches)
        if (!br.fiber) throw InvalidArgument("every branch needs a fiber map");
    if (!(c1 >= 0.0)) throw InvalidArgument("perturbationC1 must be >= 0");
}

Ifs1D BlenderIfs::base_ifs() const {
    std::vector<AffineContraction> b;
    for (const auto& br : branches) b.push_back(br.base);
    return Ifs1D(std::move(b), label);
}

double slope_threshold(int k, cplx m) {
    if (k < 2) throw InvalidArgument("slope_threshold needs k >= 2");
    double am = std::abs(m);
    if (!(am > 0.0 && am < 1.0)) throw InvalidArgument("slope_threshold needs 0 < |m| < 1");
    return (1.0 - am) / (100.0 * std::sqrt(static_cast<double>(k - 1)));
}

double propagate_slope(double g, const SkewBranch& branch, double e, cplx m) {
    double den = std::abs(m) - g * (1.0 + e) - e;
    if (!(den > 0.0)) throw DenominatorNonpositive("slope propagation denominator " + format_double(den));
    return (g * (branch.dwBound + e) + e) / den;
}

VerticalGraph pullback_graph(const SkewBranch& branch, const VerticalGraph& graph, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
    const std::size_t total = graph.node_count();
    std::vector<cplx> out(total);
    std::vector<char> failed(total, 0);
    parallel_for(total, [&](std::size_t f) {
        auto w = graph.node(f);
        cplx z = graph.values[f];
        for (int it = 0; it < kMaxFixedPointIters; ++it) {
            auto wp = branch.fiber(z, w);
            cplx target = graph.eval(wp);
            if (branch.zmap) target -= branch.zmap(z, w) - branch.base(z);
            cplx next = branch.base.inverse(target);
            if (!is_finite(next)) {
                failed[f] = 2;
                return;
            }
            bool done = std::abs(next - z) < tol;
            z = next;
            if (done) {
                out[f] = z;
                return;
            }
        }
        failed[f] = 1;
        out[f] = z;
    });
    for (std::size_t f = 0; f < total; ++f) {
        if (failed[f] == 2) throw NonFiniteSample("pullback iterate at node " + std::to_string(f));
        if (failed[f] == 1) throw NoConvergence("pullback node " + std::to_string(f) + " after 200 iterations");
    }
    VerticalGraph g = graph_from_values(graph.domain, graph.n, std::move(out));
    const double sq = std::sqrt(static_cast<double>(graph.fiber_dim()));
    const double analytic = propagate_slope(graph.operator_slope(), branch, branch.epsC1, branch.base.m);
    g.slopeBound = std::max(g.fdSlope, std::min(kSlopeSafety * g.fdSlope, analytic));
    const double thr = slope_threshold(static_cast<int>(graph.fiber_dim()) + 1, branch.base.m);
    if (g.slopeBound * sq > thr)
        throw SlopeBlowup("pulled-back slope " + format_double(g.slopeBound * sq) + " exceeds threshold " +
                          format_double(thr));
    return g;
}

namespace {

Disk graph_hull(const VerticalGraph& g) {
    std::vector<cplx> pts;
    pts.reserve(g.node_count());
    for (std::size_t f = 0; f < g.node_count(); ++f)
        if (g.node_in_domain(f)) pts.push_back(g.values[f]);
    if (pts.empty()) throw InvalidGrid("graph grid has no node inside its domain");
    Disk d = min_enclosing_disk(pts);
    return Disk(d.center, d.radius + g.operator_slope() * g.domain.outer_radius());
}

// Diameter bound of L_{s_from} ∘ ... ∘ L_{s_last}(Gamma_last), carried outward.
double carried_diameter(const BlenderIfs& ifs, const std::vector<int>& symbols, std::size_t from, double zDiam,
                        double wDiam, double outerSlope) {
    double Z = zDiam, W = wDiam;
    const double e = ifs.perturbationC1;
    const double am = std::abs(ifs.multiplier());
    for (std::size_t i = symbols.size(); i-- > from;) {
        const auto& br = ifs.branches[symbols[i]];
        double Zn = (am + e) * Z + e * W;
        double Wn = br.dzBound * Z + br.dwBound * W;
        Z = Zn;
        W = Wn;
    }
    double onGraph = std::hypot(outerSlope * W, W);
    return std::min(std::hypot(Z, W), onGraph);
}

}  // namespace

IntersectionWitness intersect_graph_blender(const BlenderIfs& ifs, const VerticalGraph& graph, int steps,
                                            double tol) {
    if (steps < 1) throw InvalidArgument("steps must be >= 1");
    if (graph.fiber_dim() != static_cast<std::size_t>(ifs.k - 1))
        throw InvalidArgument("graph fiber dimension does not match blender dimension");
    const cplx m = ifs.multiplier();
    const double thr = slope_threshold(ifs.k, m);
    if (graph.operator_slope() > thr)
        throw SlopeBlowup("input graph slope " + format_double(graph.operator_slope()) + " exceeds threshold " +
                          format_double(thr));

    const Disk target(0.0, 0.1);
    const Ifs1D covering = compose_power(ifs.base_ifs(), ifs.wordLength);
    const std::size_t d = ifs.branches.size();

    IntersectionWitness wit;
    std::vector<VerticalGraph> graphs{graph};
    VerticalGraph cur = graph;
    for (int s = 0; s < steps; ++s) {
        Disk hull = graph_hull(cur);
        if (!target.contains(hull.center))
            throw NoBranch("graph z-projection at step " + std::to_string(s + 1) + " is outside D(0,1/10)");
        int word = select_branch(covering, hull.center, hull.radius, target);
        // Word digits are (j_1, ..., j_L) with j_1 applied first, so the
        // outermost map is j_L; pull back through it first.
        std::vector<int> digits(ifs.wordLength);
        for (int i = ifs.wordLength, x = word; i-- > 0; x /= static_cast<int>(d)) digits[i] = x % static_cast<int>(d);
        for (int i = ifs.wordLength; i-- > 0;) {
            cur = pullback_graph(ifs.branches[digits[i]], cur, tol);
            wit.symbols.push_back(digits[i]);
            wit.graphTrail.push_back(cur.operator_slope());
        }
        for (std::size_t f = 0; f < cur.node_count(); ++f)
            if (cur.node_in_domain(f) && !target.contains(cur.values[f], 1e-12))
                throw NoBranch("pulled-back graph left D(0,1/10) at step " + std::to_string(s + 1));
        graphs.push_back(cur);
    }

    std::vector<cplx> p(ifs.k, cplx(0.0, 0.0));
    for (int a = 0; a < ifs.k - 1; ++a) p[a + 1] = cur.domain.centers[a];
    p[0] = cur.eval(std::span<const cplx>(p).subspan(1));
    wit.innerPoint = p;
    for (std::size_t i = wit.symbols.size(); i-- > 0;) p = ifs.branches[wit.symbols[i]].apply(p);
    wit.point = p;

    // graphs[i] is the graph after i words; symbols consumed so far = i * wordLength.
    const double wDiam = 2.0 * graph.domain.outer_radius();
    const double outerSlope = graph.operator_slope();
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < graphs.size(); ++i) {
        Disk hull = graph_hull(graphs[i]);
        std::vector<int> prefix(wit.symbols.begin(), wit.symbols.begin() + i * ifs.wordLength);
        double b = carried_diameter(ifs, prefix, 0, 2.0 * hull.radius, wDiam, outerSlope);
        running = std::min(running, b);
        wit.cylinderDiameters.push_back(running);
    }
    wit.radius = running;
    return wit;
}

namespace {

std::vector<std::vector<cplx>> polydisk_samples(int k, int n, std::uint64_t seed) {
    std::vector<std::vector<cplx>> pts(n, std::vector<cplx>(k));
    for (int i = 0; i < n; ++i) {
        SplitMix64 rng(SplitMix64::stream(seed, i));
        for (int a = 0; a < k; ++a) {
            double r = (i % 4 == 0) ? 1.0 : std::sqrt(rng.uniform());
            pts[i][a] = std::polar(r, 2.0 * kPi * rng.uniform());
        }
    }
    return pts;
}

constexpr double kFdStep = 1e-6;
constexpr std::uint64_t kSampleSeed = 0xb1e4d;

}  // namespace

FiberBounds sample_fiber_bounds(const FiberMap& fiber, int k, int nSamples) {
    auto pts = polydisk_samples(k, nSamples, kSampleSeed);
    std::vector<FiberBounds> per(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        const auto& p = pts[i];
        std::vector<cplx> w(p.begin() + 1, p.end());
        auto v = fiber(p[0], w);
        FiberBounds b;
        for (const auto& x : v) b.maxModulus = std::max(b.maxModulus, std::abs(x));
        auto vp = fiber(p[0] + kFdStep, w), vm = fiber(p[0] - kFdStep, w);
        double dz2 = 0.0;
        for (std::size_t a = 0; a < vp.size(); ++a) dz2 += std::norm((vp[a] - vm[a]) / (2 * kFdStep));
        b.dz = std::sqrt(dz2);
        double dw2 = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) {
            auto wp = w, wm = w;
            wp[c] += kFdStep;
            wm[c] -= kFdStep;
            auto fp = fiber(p[0], wp), fm = fiber(p[0], wm);
            for (std::size_t a = 0; a < fp.size(); ++a) dw2 += std::norm((fp[a] - fm[a]) / (2 * kFdStep));
        }
        b.dw = std::sqrt(dw2);
        per[i] = b;
    });
    FiberBounds out;
    for (const auto& b : per) {
        out.dz = std::max(out.dz, b.dz);
        out.dw = std::max(out.dw, b.dw);
        out.maxModulus = std::max(out.maxModulus, b.maxModulus);
    }
    return out;
}

FiberBounds estimate_fiber_bounds(const FiberMap& fiber, int k, int nSamples) {
    FiberBounds b = sample_fiber_bounds(fiber, k, nSamples);
    b.dz *= kFiberSafety;
    b.dw *= kFiberSafety;
    return b;
}

double measure_perturbation_c1(const SkewBranch& branch, int k, int nSamples) {
    if (!branch.zmap) return 0.0;
    auto pts = polydisk_samples(k, nSamples, kSampleSeed + 1);
    std::vector<double> per(pts.size());
    auto e = [&](cplx z, std::span<const cplx> w) { return branch.zmap(z, w) - branch.base(z); };
    parallel_for(pts.size(), [&](std::size_t i) {
        const auto& p = pts[i];
        std::vector<cplx> w(p.begin() + 1, p.end());
        double v = std::abs(e(p[0], w));
        v = std::max(v, std::abs((e(p[0] + kFdStep, w) - e(p[0] - kFdStep, w)) / (2 * kFdStep)));
        double g2 = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) {
            auto wp = w, wm = w;
            wp[c] += kFdStep;
            wm[c] -= kFdStep;
            g2 += std::norm((e(p[0], wp) - e(p[0], wm)) / (2 * kFdStep));
        }
        per[i] = std::max(v, std::sqrt(g2));
    });
    return *std::max_element(per.begin(), per.end());
}

Report validate_blender(const BlenderIfs& ifs) {
    Report r;
    const cplx m = ifs.multiplier();
    const double am = std::abs(m);
    const std::size_t d = ifs.branches.size();

    double dev = 0.0;
    for (const auto& br : ifs.branches) dev = std::max(dev, std::abs(std::abs(br.base.m) - am));
    r.add_upper("shared |m|", dev, 1e-9);

    if (ifs.wordLength == 1) {
        r.add(Clause{"d >= 3", d >= 3, static_cast<double>(d), 3.0, static_cast<double>(d) - 3.0, ""});
        r.add_lower("|m| > 0.98", am, 0.98);
        r.add_upper("|m| < 1", am, 1.0);
        const AngularSector A = AngularSector::blender_range();
        for (std::size_t j = 0; j < d; ++j) {
            cplx zeta = std::polar(1.0, 2.0 * kPi * static_cast<double>(j + 1) / static_cast<double>(d));
            cplx alpha = ifs.branches[j].base.t / ((1.0 - am) * zeta);
            r.add_lower("alpha_" + std::to_string(j + 1) + " in A'", A.inner_clearance(alpha), 0.0);
        }
    } else {
        r.add(Clause{"d = 2", d == 2, static_cast<double>(d), 2.0, 0.0, ""});
        r.add_lower("|m| > 0.99", am, 0.99);
        r.add_upper("|m| < 1", am, 1.0);
        r.add_upper("|arg m - pi/2|", std::abs(std::arg(m) - kPi / 2), kPi / 50);
        for (std::size_t j = 0; j < d; ++j) {
            double aa = std::abs(ifs.branches[j].base.t) / (1.0 - am);
            r.add_lower("|alpha_" + std::to_string(j + 1) + "| in (0.9,1)", std::min(aa - 0.9, 1.0 - aa), 0.0);
        }
    }

    double maxC1 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const auto& br = ifs.branches[j];
        const std::string tag = "branch " + std::to_string(j + 1) + ": ";
        const std::string note = br.empiricalBounds ? "empirical" : "";
        r.add_upper(tag + "d_z phi < 1", br.dzBound, 1.0, note);
        r.add_upper(tag + "d_omega phi < 1/2", br.dwBound, 0.5, note);
        FiberBounds s = sample_fiber_bounds(br.fiber, ifs.k);
        r.add_upper(tag + "sampled d_z phi <= stated", s.dz, br.dzBound * (1.0 + 1e-9) + 1e-15);
        r.add_upper(tag + "sampled d_omega phi <= stated", s.dw, br.dwBound * (1.0 + 1e-9) + 1e-15);
        r.add_upper(tag + "fiber maps into unit polydisk", s.maxModulus, 1.0);
        maxC1 = std::max(maxC1, measure_perturbation_c1(br, ifs.k));
    }
    r.add_upper("sampled C1 <= stated", maxC1, ifs.perturbationC1 * (1.0 + 1e-9) + 1e-15);
    r.add_upper("C1 budget", ifs.perturbationC1,
                (1.0 - am) / (1000.0 * std::sqrt(static_cast<double>(ifs.k - 1))));
    return r;
}

std::vector<std::vector<cplx>> sample_limit_set_k(const BlenderIfs& ifs, std::size_t nPoints, int burnIn,
                                                  std::uint64_t seed) {
    if (nPoints < 1) throw InvalidArgument("nPoints must be >= 1");
    if (burnIn < 0) throw InvalidArgument("burnIn must be >= 0");
    std::vector<std::vector<cplx>> pts(nPoints);
    const std::size_t d = ifs.branches.size();
    parallel_for(nPoints, [&](std::size_t i) {
        SplitMix64 rng(SplitMix64::stream(seed, i));
        std::vector<cplx> p(ifs.k, cplx(0.0, 0.0));
        for (int s = 0; s < burnIn; ++s) p = ifs.branches[rng.below(d)].apply(p);
        pts[i] = std::move(p);
    });
    return pts;
}

json witness_json(const IntersectionWitness& w) {
    json j;
    j["symbols"] = w.symbols;
    json pt = json::array(), inner = json::array();
    for (auto z : w.point) pt.push_back(complex_json(z));
    for (auto z : w.innerPoint) inner.push_back(complex_json(z));
    j["point"] = pt;
    j["innerPoint"] = inner;
    j["radius"] = w.radius;
    j["graphTrail"] = w.graphTrail;
    j["cylinderDiameters"] = w.cylinderDiameters;
    return j;
}

}  // namespace blend
