#include "blend/skewprod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blend/errors.hpp"
#include "blend/io.hpp"
#include "blend/parallel.hpp"
#include "blend/rng.hpp"

namespace blend {

namespace {

double maxnorm(const Point2& a, const Point2& b) { return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1])); }

cplx unit_root(int j, int d) { return std::polar(1.0, 2.0 * kPi * j / d); }

// Rescaled fiber branch (zeta/2)(1 + 2 xt / c^{d-1})^{1/d} and its derivative.
cplx qt_inv_raw(int d, cplx c, cplx zeta, cplx xt) {
    cplx cd1 = std::pow(c, d - 1);
    return 0.5 * zeta * std::pow(1.0 + 2.0 * xt / cd1, 1.0 / d);
}

cplx qt_inv_deriv_raw(int d, cplx c, cplx zeta, cplx xt) {
    cplx cd1 = std::pow(c, d - 1);
    return zeta / (static_cast<double>(d) * cd1) * std::pow(1.0 + 2.0 * xt / cd1, 1.0 / d - 1.0);
}

cplx principal_root(cplx kappa, int d) { return std::pow(-kappa, 1.0 / d); }

}  // namespace

double min_kappa(int d) {
    if (d < 2) throw InvalidArgument("min_kappa needs d >= 2");
    return std::pow(2000.0, static_cast<double>(d) / (d - 1));
}

SkewProduct SkewProduct::make(const Polynomial1D& p, int d, cplx kappa, cplx eps, cplx z0Guess,
                              double deltaOverride) {
    if (d < 2) throw InvalidArgument("fiber degree d must be >= 2");
    if (p.degree() < 2) throw InvalidArgument("p must have degree >= 2");
    if (kappa == cplx(0.0, 0.0)) throw InvalidArgument("kappa must be nonzero");
    SkewProduct s;
    s.p = p;
    s.d = d;
    s.kappa = checked(kappa, "kappa");
    s.eps = checked(eps, "eps");

    cplx z = z0Guess;
    for (int it = 0; it < 100; ++it) {
        cplx v, dv;
        p.eval2(z, v, dv);
        cplx step = (v - z) / (dv - 1.0);
        if (!is_finite(step)) break;
        z -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    if (!is_finite(z) || std::abs(p(z) - z) > 1e-10) throw HypothesisViolation("p(z0) = z0", "no fixed point near guess");
    s.z0 = z;
    cplx v, dv;
    p.eval2(z, v, dv);
    s.m = 1.0 / dv;
    const double am = std::abs(s.m);
    if (d >= 3) {
        if (!(am > 0.98 && am < 1.0)) throw HypothesisViolation("|m|", "need 0.98 < |m| < 1, got " + format_double(am));
    } else {
        if (!(am > 0.99 && am < 1.0)) throw HypothesisViolation("|m|", "need 0.99 < |m| < 1, got " + format_double(am));
        if (!(std::abs(std::arg(s.m) - kPi / 2) < kPi / 50)) throw HypothesisViolation("arg m", "need |arg m - pi/2| < pi/50");
    }
    s.c = principal_root(kappa, d);
    s.alpha0 = d == 2 ? 0.95 : 0.8;
    if (deltaOverride > 0.0) s.delta = deltaOverride;
    else if (eps != cplx(0.0, 0.0)) s.delta = choose_delta(s);
    if (eps != cplx(0.0, 0.0) && s.delta > 0.0) {
        s.alphaEff = -eps * s.c / (s.delta * (1.0 - am));
        s.psi = std::arg(s.m * s.alphaEff);
    }
    return s;
}

cplx SkewProduct::zeta(int j) const { return unit_root(j, d); }

Point2 SkewProduct::forward(cplx z, cplx w) const { return {p(z) + eps * w, q(w)}; }

cplx SkewProduct::q(cplx w) const { return std::pow(w, d) + kappa; }

cplx SkewProduct::p0_inverse(cplx y) const {
    cplx u = z0 + m * (y - z0);
    for (int it = 0; it < 60; ++it) {
        cplx v, dv;
        p.eval2(u, v, dv);
        cplx step = (v - y) / dv;
        if (!is_finite(step)) throw NonFiniteSample("p0 inverse Newton step");
        u -= step;
        if (std::abs(step) <= 4e-16 * (1.0 + std::abs(u))) break;
    }
    return u;
}

cplx SkewProduct::qinv(int j, cplx x) const { return zeta(j) * c * std::pow(1.0 - x / kappa, 1.0 / d); }

void SkewProduct::require_delta() const {
    if (!(delta > 0.0)) throw EpsZero("rescaling needs eps != 0 or an explicit delta");
}

Point2 SkewProduct::to_rescaled(cplx z, cplx w) const {
    require_delta();
    return {std::polar(1.0, -psi) * (z - z0) / delta, w / (2.0 * c)};
}

Point2 SkewProduct::from_rescaled(cplx zt, cplx wt) const {
    require_delta();
    return {z0 + delta * std::polar(1.0, psi) * zt, 2.0 * c * wt};
}

cplx SkewProduct::qt(cplx wt) const { return (std::pow(2.0 * c * wt, d) + kappa) / (2.0 * c); }

cplx SkewProduct::qt_inv(int j, cplx xt) const { return qt_inv_raw(d, c, zeta(j), xt); }

cplx SkewProduct::qt_inv_deriv(int j, cplx xt) const { return qt_inv_deriv_raw(d, c, zeta(j), xt); }

cplx SkewProduct::forward_z_rescaled(cplx zt, cplx wt) const {
    cplx z = z0 + delta * std::polar(1.0, psi) * zt;
    return std::polar(1.0, -psi) * (p(z) + eps * 2.0 * c * wt - z0) / delta;
}

Point2 SkewProduct::forward_rescaled(cplx zt, cplx wt) const { return {forward_z_rescaled(zt, wt), qt(wt)}; }

cplx SkewProduct::branch_z_rescaled(cplx zt, cplx wtNew) const {
    cplx y = z0 + delta * std::polar(1.0, psi) * zt - eps * 2.0 * c * wtNew;
    return std::polar(1.0, -psi) * (p0_inverse(y) - z0) / delta;
}

Point2 SkewProduct::branch_rescaled(int j, cplx zt, cplx wt) const {
    cplx wn = qt_inv(j, wt);
    return {branch_z_rescaled(zt, wn), wn};
}

AffineContraction SkewProduct::base_branch(int j) const {
    const double am = std::abs(m);
    return AffineContraction(m, am * std::abs(alphaEff) * (1.0 - am) * zeta(j));
}

cplx julia_inverse_branch(int d, cplx kappa, cplx zeta, cplx x) {
    if (d < 2) throw InvalidArgument("d must be >= 2");
    if (std::abs(std::pow(zeta, d) - 1.0) > 1e-9) throw InvalidArgument("zeta is not a d-th root of unity");
    const double ak = std::abs(kappa);
    if (!(std::pow(ak, (d - 1.0) / d) > 4.0 / d)) throw OutOfDomain("|kappa| too small for a branch on D_kappa");
    if (std::abs(x) > 2.0 * std::pow(ak, 1.0 / d) * (1.0 + 1e-12)) throw OutOfDomain("x outside D_kappa");
    return zeta * principal_root(kappa, d) * std::pow(1.0 - x / kappa, 1.0 / d);
}

Report verify_julia_geometry(int d, cplx kappa, int nSamples) {
    if (d < 2) throw InvalidArgument("d must be >= 2");
    if (nSamples < 16) throw InvalidArgument("nSamples must be >= 16");
    const double ak = std::abs(kappa);
    const double scale = std::pow(ak, -(d - 1.0) / d);
    const cplx c = principal_root(kappa, d);
    std::vector<cplx> xs(nSamples);
    const int nb = nSamples / 2;
    SplitMix64 rng(0x7a11a);
    for (int i = 0; i < nSamples; ++i) {
        if (i < nb) xs[i] = std::polar(1.0, 2.0 * kPi * i / nb);
        else xs[i] = std::polar(std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
    }
    double dev = 0.0, der = 0.0, mod = 0.0;
    for (int j = 1; j <= d; ++j) {
        cplx zeta = unit_root(j, d);
        std::vector<Point2> per(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) {
            per[i] = {qt_inv_raw(d, c, zeta, xs[i]), qt_inv_deriv_raw(d, c, zeta, xs[i])};
        });
        for (const auto& v : per) {
            dev = std::max(dev, std::abs(v[0] - 0.5 * zeta));
            der = std::max(der, std::abs(v[1]));
            mod = std::max(mod, std::abs(v[0]));
        }
    }
    Report r;
    r.add_lower("branch domain |kappa|^{(d-1)/d} > 4/d", std::pow(ak, (d - 1.0) / d), 4.0 / d);
    r.add_upper("containment radius (1/2)|kappa|^{-(d-1)/d}", dev, 0.5 * scale);
    r.add_upper("derivative bound |kappa|^{-(d-1)/d}", der, scale);
    r.add_upper("images inside unit disk", mod, 1.0);
    const double gate = min_kappa(d);
    r.add(Clause{"min |kappa| gate", ak >= gate * (1.0 - 1e-12), ak, gate, ak - gate, "sign convention q(w) = w^d + kappa"});
    return r;
}

double choose_delta(int d, cplx kappa, cplx eps, cplx m) {
    if (eps == cplx(0.0, 0.0)) throw EpsZero("choose_delta needs eps != 0");
    const double alpha0 = d == 2 ? 0.95 : 0.8;
    return std::pow(std::abs(kappa), 1.0 / d) * std::abs(eps) / (alpha0 * (1.0 - std::abs(m)));
}

double choose_delta(const SkewProduct& skew) { return choose_delta(skew.d, skew.kappa, skew.eps, skew.m); }

BlenderIfs rescaled_inverse_ifs(const SkewProduct& skew) {
    skew.require_delta();
    Report geo = verify_julia_geometry(skew.d, skew.kappa);
    std::string bad;
    for (const char* name : {"derivative bound |kappa|^{-(d-1)/d}", "images inside unit disk", "min |kappa| gate"}) {
        const Clause* cl = geo.find(name);
        if (!cl->pass) bad += std::string(bad.empty() ? "" : ", ") + name;
    }
    if (!bad.empty()) throw GeometryUnverified(bad);

    const double dw = std::pow(std::abs(skew.kappa), -(skew.d - 1.0) / skew.d);
    std::vector<SkewBranch> branches;
    double c1 = 0.0;
    for (int j = 1; j <= skew.d; ++j) {
        SkewBranch br;
        br.base = skew.base_branch(j);
        br.fiber = [skew, j](cplx, std::span<const cplx> w) { return std::vector<cplx>{skew.qt_inv(j, w[0])}; };
        br.zmap = [skew, j](cplx z, std::span<const cplx> w) { return skew.branch_z_rescaled(z, skew.qt_inv(j, w[0])); };
        br.dzBound = 0.0;
        br.dwBound = dw;
        br.epsC1 = measure_perturbation_c1(br, 2) * kFiberSafety;
        c1 = std::max(c1, br.epsC1);
        branches.push_back(std::move(br));
    }
    return BlenderIfs(2, std::move(branches), c1, skew.d == 2 ? 2 : 1, "rescaled d=" + std::to_string(skew.d));
}

RoucheResult rouche_verify(const Map2& h, const Map2& eta, const Polydisk& box, int boundaryN) {
    if (boundaryN < 64) throw InvalidArgument("boundaryN must be >= 64");
    if (box.dim() != 2) throw InvalidArgument("rouche_verify works on bidisks");
    // Interior samples of the other coordinate: center plus 8 rings of 16.
    std::vector<cplx> inner{0.0};
    for (int r = 1; r <= 8; ++r)
        for (int a = 0; a < 16; ++a) inner.push_back(std::polar(r / 8.0, 2.0 * kPi * (a + 0.5 * (r % 2)) / 16));
    const std::size_t per = inner.size();
    const std::size_t total = 2 * static_cast<std::size_t>(boundaryN) * per;
    std::vector<double> disp(total), et(total);
    parallel_for(total, [&](std::size_t i) {
        std::size_t face = i / (boundaryN * per);
        std::size_t rest = i % (boundaryN * per);
        cplx circle = std::polar(1.0, 2.0 * kPi * static_cast<double>(rest / per) / boundaryN);
        cplx in = inner[rest % per];
        Point2 x;
        if (face == 0) x = {box.centers[0] + box.radii[0] * circle, box.centers[1] + box.radii[1] * in};
        else x = {box.centers[0] + box.radii[0] * in, box.centers[1] + box.radii[1] * circle};
        Point2 hx = h(x), ex = eta(x);
        disp[i] = maxnorm(hx, x);
        et[i] = std::max(std::abs(ex[0]), std::abs(ex[1]));
    });
    RoucheResult r;
    r.minDisplacement = *std::min_element(disp.begin(), disp.end());
    r.maxEta = *std::max_element(et.begin(), et.end());
    r.margin = r.minDisplacement - r.maxEta;
    r.ok = r.margin > 0.0;
    return r;
}

Point2 apply_core_branch(const SkewProduct& skew, const CorePoint& core, const Point2& x) {
    Point2 y = x;
    for (int s : core.symbols) y = skew.branch_rescaled(s, y[0], y[1]);
    return y;
}

CorePoint find_core_point(const SkewProduct& skew) {
    skew.require_delta();
    const int d = skew.d;
    CorePoint core;
    const bool far = std::abs(skew.m - 1.0) > 0.1;
    core.regime = far ? "far" : "near";
    if (far) {
        core.symbols = {d};
    } else {
        core.symbols.push_back(d);
        for (int j = 1; j < d; ++j) core.symbols.push_back(j);
    }
    core.period = static_cast<int>(core.symbols.size());

    // Affine predictor from the reference branches.
    AffineContraction comp = skew.base_branch(core.symbols[0]);
    for (std::size_t i = 1; i < core.symbols.size(); ++i) comp = skew.base_branch(core.symbols[i]).after(comp);
    Point2 x{comp.t / (1.0 - comp.m), 0.5 * skew.zeta(core.symbols.back())};

    if (far) {
        const AffineContraction h0 = skew.base_branch(d);
        Map2 h = [h0](const Point2& y) { return Point2{h0(y[0]), cplx(0.5, 0.0)}; };
        Map2 eta = [&skew, h0, d](const Point2& y) {
            Point2 f = skew.branch_rescaled(d, y[0], y[1]);
            return Point2{f[0] - h0(y[0]), f[1] - 0.5};
        };
        core.rouche = rouche_verify(h, eta, Polydisk({0.0, 0.0}, {0.1, 1.0}), 64);
    } else {
        const int nb = 500;
        std::vector<double> clr(2 * nb);
        parallel_for(2 * nb, [&](std::size_t i) {
            SplitMix64 rng(SplitMix64::stream(0xc0de, i));
            cplx inner = std::polar(std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
            double th = 2.0 * kPi * static_cast<double>(i % nb) / nb;
            Point2 y = i < static_cast<std::size_t>(nb) ? Point2{std::polar(0.1, th), inner}
                                                          : Point2{0.1 * inner, std::polar(1.0, th)};
            Point2 g = apply_core_branch(skew, core, y);
            clr[i] = std::min(0.1 - std::abs(g[0]), 1.0 - std::abs(g[1]));
        });
        core.selfMapClearance = *std::min_element(clr.begin(), clr.end());
        if (!(core.selfMapClearance > 0.0))
            throw NotContracting("composed branch does not map the bidisk strictly inside itself; clearance " +
                                 format_double(core.selfMapClearance));
    }

    const int maxIters = 200000;
    int it = 0;
    for (; it < maxIters; ++it) {
        Point2 y = apply_core_branch(skew, core, x);
        double step = maxnorm(y, x);
        x = y;
        if (step < 1e-15) break;
    }
    core.point = x;
    core.residual = maxnorm(apply_core_branch(skew, core, x), x);
    if (it == maxIters || !(core.residual < 1e-10))
        throw NoConvergence("core point iteration residual " + format_double(core.residual));
    core.clearance = std::min(0.1 - std::abs(x[0]), 1.0 - std::abs(x[1]));
    if (!(core.clearance > 0.0)) throw GeometryUnverified("core point outside D(0,1/10) x D");
    return core;
}

std::vector<VerticalGraph> push_graph(const SkewProduct& skew, const VerticalGraph& graph) {
    skew.require_delta();
    if (graph.fiber_dim() != 1) throw InvalidArgument("push_graph expects a graph over one fiber coordinate");
    std::vector<VerticalGraph> out;
    for (int j = 1; j <= skew.d; ++j) {
        std::vector<cplx> vals(graph.node_count());
        parallel_for(vals.size(), [&](std::size_t f) {
            cplx w = graph.node(f)[0];
            cplx wp = skew.qt_inv(j, w);
            cplx zp = graph.eval(std::span<const cplx>(&wp, 1));
            vals[f] = skew.forward_z_rescaled(zp, wp);
        });
        out.push_back(graph_from_values(graph.domain, graph.n, std::move(vals)));
    }
    return out;
}

double wuu_invariance_residual(const SkewProduct& skew, const CorePoint& core, const VerticalGraph& graph) {
    VerticalGraph g = graph;
    for (std::size_t i = core.symbols.size(); i-- > 0;) g = push_graph(skew, g)[core.symbols[i] - 1];
    double r = 0.0;
    for (std::size_t f = 0; f < g.node_count(); ++f)
        if (graph.node_in_domain(f)) r = std::max(r, std::abs(g.values[f] - graph.values[f]));
    return r;
}

UnstableManifold unstable_manifold(const SkewProduct& skew, const CorePoint& core, int nIters, int gridN) {
    skew.require_delta();
    if (nIters < 1) throw InvalidArgument("nIters must be >= 1");
    const Polydisk dom = Polydisk::unit(1);
    const std::size_t total = graph_node_count(1, gridN);
    const std::size_t P = core.symbols.size();

    // Exact nodewise iterate: pull the fiber point back n cycles along the
    // core's branches, then push the vertical line through the core forward.
    auto iterate = [&](int n) {
        std::vector<cplx> vals(total);
        parallel_for(total, [&](std::size_t f) {
            std::vector<cplx> ws(n * P + 1);
            ws[0] = graph_node(dom, gridN, f)[0];
            std::size_t idx = 0;
            for (int k = 0; k < n; ++k)
                for (int s : core.symbols) {
                    ws[idx + 1] = skew.qt_inv(s, ws[idx]);
                    ++idx;
                }
            cplx z = core.point[0];
            for (std::size_t i = idx; i >= 1; --i) z = skew.forward_z_rescaled(z, ws[i]);
            vals[f] = z;
        });
        return vals;
    };

    UnstableManifold out;
    std::vector<cplx> prev(total, core.point[0]);
    std::vector<cplx> cur;
    bool converged = false;
    for (int n = 1; n <= nIters; ++n) {
        cur = iterate(n);
        double dist = 0.0;
        for (std::size_t f = 0; f < total; ++f)
            if (dom.contains(graph_node(dom, gridN, f), 1e-12)) dist = std::max(dist, std::abs(cur[f] - prev[f]));
        out.distances.push_back(dist);
        out.iterations = n;
        prev = cur;
        if (dist < 1e-12) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NoConvergence("graph transform distance " + format_double(out.distances.back()) + " after " +
                            std::to_string(nIters) + " cycles");
    out.graph = graph_from_values(dom, gridN, std::move(cur));
    const double limit = (1.0 - std::abs(skew.m)) / 100.0;
    if (out.graph.operator_slope() > limit)
        throw SlopeBlowup("unstable manifold slope " + format_double(out.graph.operator_slope()) + " exceeds " +
                          format_double(limit));
    out.invarianceResidual = wuu_invariance_residual(skew, core, out.graph);
    return out;
}

namespace {

// z-coordinate (rescaled) of the pushed critical line along a fiber-branch chain.
cplx chain_value(const SkewProduct& skew, cplx crit, const std::vector<int>& chain, std::size_t len, cplx wt) {
    std::vector<cplx> ws(len + 1);
    ws[len] = wt;
    for (std::size_t k = len; k >= 1; --k) ws[k - 1] = skew.qt_inv(chain[k - 1], ws[k]);
    cplx z = crit;
    for (std::size_t k = 1; k <= len; ++k) z = skew.p(z) + skew.eps * 2.0 * skew.c * ws[k - 1];
    return std::polar(1.0, -skew.psi) * (z - skew.z0) / skew.delta;
}

}  // namespace

MisiurewiczWitness misiurewicz_certify(const SkewProduct& skew, cplx crit, int nPush, int nPull, int gridN,
                                       double tol) {
    skew.require_delta();
    if (nPush < 1) throw InvalidArgument("nPush must be >= 1");
    const Polynomial1D dp = skew.p.derivative();
    const double coefScale = std::abs(skew.p.leading()) * std::max(1.0, std::pow(std::abs(crit), skew.p.degree() - 1));
    if (std::abs(dp(crit)) > 1e-8 * coefScale)
        throw HypothesisViolation("simple critical point", "p'(c) = " + format_double(std::abs(dp(crit))));
    if (std::abs(dp.derivative()(crit)) < 1e-12 * coefScale)
        throw HypothesisViolation("simple critical point", "p''(c) vanishes");

    const BlenderIfs ifs = rescaled_inverse_ifs(skew);
    const double thr = slope_threshold(2, skew.m);
    const Polydisk dom = Polydisk::unit(1);
    MisiurewiczWitness mw;
    mw.critPoint = crit;

    if (nPush > kPushCap) {
        CorePoint core = find_core_point(skew);
        UnstableManifold wuu = unstable_manifold(skew, core, 20, gridN);
        mw.usedUnstableManifold = true;
        mw.pushSlopes.push_back(wuu.graph.operator_slope());
        mw.witness = intersect_graph_blender(ifs, wuu.graph, nPull, tol);
        mw.pointOriginal = skew.from_rescaled(mw.witness.point[0], mw.witness.point[1]);
        mw.w0 = mw.pointOriginal[1];
        mw.componentsExamined = 1;
        return mw;
    }

    const std::size_t d = skew.d;
    std::size_t total = 1;
    for (int i = 0; i < nPush; ++i) {
        if (total > kMaxComposedBranches / d) throw BranchExplosion("d^nPush exceeds 10^6");
        total *= d;
    }
    auto chain_of = [&](std::size_t idx) {
        std::vector<int> ch(nPush);
        for (int i = nPush; i-- > 0; idx /= d) ch[i] = static_cast<int>(idx % d) + 1;
        return ch;
    };
    std::vector<double> centerMod(total);
    parallel_for(total, [&](std::size_t i) {
        auto ch = chain_of(i);
        centerMod[i] = std::abs(chain_value(skew, crit, ch, ch.size(), 0.0));
    });
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < total; ++i)
        if (centerMod[i] < 1.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centerMod[a] < centerMod[b]; });
    if (order.size() > kMaxPushComponents) order.resize(kMaxPushComponents);

    const Disk target(0.0, 0.1);
    std::optional<VerticalGraph> chosen;
    std::vector<int> chosenChain;
    for (std::size_t idx : order) {
        mw.componentsExamined++;
        auto ch = chain_of(idx);
        VerticalGraph g = graph_from_callable(
            [&](std::span<const cplx> w) { return chain_value(skew, crit, ch, ch.size(), w[0]); }, dom, gridN);
        bool inside = true;
        std::vector<cplx> pts;
        for (std::size_t f = 0; f < g.node_count(); ++f) {
            if (!g.node_in_domain(f)) continue;
            pts.push_back(g.values[f]);
            if (!(std::abs(g.values[f]) < 1.0)) inside = false;
        }
        if (!inside || g.operator_slope() > thr) continue;
        if (!target.contains(min_enclosing_disk(pts).center)) continue;
        chosen = std::move(g);
        chosenChain = ch;
        break;
    }
    if (!chosen) throw NoEnteringComponent("no pushed component passes the region and slope gate");

    mw.pushSymbols = chosenChain;
    for (int k = 1; k <= nPush; ++k) {
        VerticalGraph gk = graph_from_callable(
            [&](std::span<const cplx> w) { return chain_value(skew, crit, chosenChain, k, w[0]); }, dom, gridN);
        mw.pushSlopes.push_back(gk.operator_slope());
    }
    mw.witness = intersect_graph_blender(ifs, *chosen, nPull, tol);
    mw.pointOriginal = skew.from_rescaled(mw.witness.point[0], mw.witness.point[1]);
    cplx w = mw.pointOriginal[1];
    for (int k = nPush; k >= 1; --k) w = skew.qinv(chosenChain[k - 1], w);
    mw.w0 = w;
    return mw;
}

ParabolicSplit parabolic_split(const PolyFamily& family, int q, int nu, cplx lambda) {
    if (q < 1 || nu < 1) throw InvalidArgument("q and nu must be >= 1");
    const int count = nu * q + 1;
    auto iterate = [q](const Polynomial1D& f) {
        Polynomial1D g = f;
        for (int i = 1; i < q; ++i) g = f.compose(g);
        return g;
    };
    const Polynomial1D z = Polynomial1D::monomial(1);

    const Polynomial1D f0 = family(0.0);
    if (std::abs(f0(0.0)) > 1e-12) throw HypothesisViolation("f_0(0) = 0");
    const cplx rho0 = f0.derivative()(0.0);
    if (std::abs(std::pow(rho0, q) - 1.0) > 1e-9) throw HypothesisViolation("multiplier order q", "rho_0^q != 1");
    for (int j = 1; j < q; ++j)
        if (std::abs(std::pow(rho0, j) - 1.0) < 1e-6) throw HypothesisViolation("multiplier order q", "order below q");
    const Polynomial1D G0 = iterate(f0) - z;
    for (int i = 0; i < count; ++i)
        if (std::abs(G0.coeff(i)) > 1e-9) throw HypothesisViolation("nu", "f_0^q - z has a lower-order term");
    ParabolicSplit out;
    out.A = G0.coeff(count);
    if (std::abs(out.A) < 1e-12) throw HypothesisViolation("nu", "coefficient of z^{nu q + 1} vanishes");

    const double h = 1e-6;
    auto rhoq = [&](cplx l) { return std::pow(family(l).derivative()(0.0), q); };
    out.b = (rhoq(h) - rhoq(-h)) / (2.0 * h);

    const Polynomial1D f = family(lambda);
    if (std::abs(f(0.0)) > 1e-12) throw HypothesisViolation("f_lambda(0) = 0");
    const Polynomial1D G = iterate(f) - z;
    auto roots = G.roots();
    if (static_cast<int>(roots.size()) < count) throw RootFindingFailure("fewer roots than nu q + 1");
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
        return std::arg(a) < std::arg(b);
    });
    const double rmax = std::abs(roots[count - 1]);
    out.gap = static_cast<int>(roots.size()) > count ? std::abs(roots[count]) / std::max(rmax, 1e-300)
                                                     : std::numeric_limits<double>::infinity();
    if (!(out.gap > 2.0)) throw RootFindingFailure("fixed points near 0 are not separated from the rest");
    out.points.assign(roots.begin(), roots.begin() + count);
    for (const auto& x : out.points) {
        cplx mult = 1.0, y = x;
        const Polynomial1D df = f.derivative();
        for (int i = 0; i < q; ++i) {
            mult *= df(y);
            y = f(y);
        }
        out.multipliers.push_back(mult);
    }
    const cplx shift = out.b * lambda / out.A;
    for (int i = 1; i < count; ++i)
        out.residual = std::max(out.residual, std::abs(std::pow(out.points[i], nu * q) + shift));
    return out;
}

double fit_split_exponent(const PolyFamily& family, int q, int nu, const std::vector<cplx>& lambdas) {
    if (lambdas.size() < 2) throw InvalidArgument("need at least two lambdas");
    std::vector<double> xs, ys;
    for (const auto& l : lambdas) {
        auto s = parabolic_split(family, q, nu, l);
        if (!(s.residual > 0.0)) throw RootFindingFailure("zero residual; exponent undefined");
        xs.push_back(std::log(std::abs(l)));
        ys.push_back(std::log(s.residual));
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

namespace {

struct FactorStats {
    double containment = std::numeric_limits<double>::infinity();
    double escape = std::numeric_limits<double>::infinity();
    double residual = 0.0;
    int minCount = std::numeric_limits<int>::max();
    int maxCount = 0;
    std::size_t criticalInV = 0;
};

FactorStats check_factor(cplx cc, const Polynomial1D& p, double eps, double a, int nSamples, std::uint64_t seed) {
    const int d = p.degree();
    const double beta = 1.0 / (d - 1);
    const double s = std::pow(eps, -beta);
    const double R = std::pow(eps, -a);
    const Polynomial1D dp = p.derivative();

    std::vector<FactorStats> per(nSamples);
    parallel_for(nSamples, [&](std::size_t i) {
        SplitMix64 rng(SplitMix64::stream(seed, i));
        FactorStats st;
        cplx u = std::polar(s * rng.uniform(0.5, 1.5), 2.0 * kPi * rng.uniform());
        cplx v = std::polar(R * std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
        // z = s y; then eps z^d = s y^d.
        std::vector<cplx> inner(d + 1, 0.0);
        inner[0] = u;
        inner[d] = -s;
        Polynomial1D P = p.compose(Polynomial1D(inner)) + Polynomial1D({-v, cc * s});
        auto ys = P.roots();
        std::vector<cplx> zs;
        for (auto y : ys) {
            cplx z = s * y;
            if (!is_finite(z)) continue;
            bool dup = false;
            for (auto o : zs)
                if (std::abs(o - z) < 1e-9 * s) dup = true;
            if (!dup) zs.push_back(z);
        }
        st.minCount = st.maxCount = static_cast<int>(zs.size());
        for (auto z : zs) {
            cplx w = u - eps * std::pow(z, d);
            cplx hu = w + eps * std::pow(z, d), hv = cc * z + p(w);
            st.residual = std::max(st.residual, std::max(std::abs(hu - u) / s, std::abs(hv - v) / std::max(R, std::abs(v))));
            double m = std::min({std::abs(z) / s - 0.5, 1.5 - std::abs(z) / s, 1.0 - std::abs(w) / R});
            st.containment = std::min(st.containment, m);
        }
        // Critical curve: eps d z^{d-1} p'(w) = cc.
        cplx z = std::polar(s * rng.uniform(0.5, 1.5), 2.0 * kPi * rng.uniform());
        cplx rhs = cc / (eps * d * std::pow(z, d - 1));
        auto ws = (dp - Polynomial1D({rhs})).roots();
        for (auto w : ws) {
            if (!(std::abs(w) < R)) continue;
            st.criticalInV++;
            cplx nu = w + eps * std::pow(z, d), nv = cc * z + p(w);
            double e = std::max({std::abs(nv) / R - 1.0, 0.5 - std::abs(nu) / s, std::abs(nu) / s - 1.5});
            st.escape = std::min(st.escape, e);
        }
        per[i] = st;
    });
    FactorStats out;
    for (const auto& st : per) {
        out.containment = std::min(out.containment, st.containment);
        out.escape = std::min(out.escape, st.escape);
        out.residual = std::max(out.residual, st.residual);
        out.minCount = std::min(out.minCount, st.minCount);
        out.maxCount = std::max(out.maxCount, st.maxCount);
        out.criticalInV += st.criticalInV;
    }
    return out;
}

}  // namespace

Report henon_covering_check(cplx c, const Polynomial1D& pPlus, const Polynomial1D& pMinus, double eps, int nSamples,
                            const HenonOptions& opt) {
    const int d = pPlus.degree();
    if (d < 2 || pMinus.degree() != d) throw InvalidArgument("p+ and p- need the same degree d >= 2");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be > 0");
    if (nSamples < 1) throw InvalidArgument("nSamples must be >= 1");
    if (c == cplx(0.0, 0.0)) throw InvalidArgument("c must be nonzero");
    const double beta = 1.0 / (d - 1);
    const double a = opt.a < 0.0 ? 0.5 * (beta / d + beta) : opt.a;
    if (!(beta / d < a && a < beta)) throw InvalidArgument("need beta/d < a < beta");
    const double gate = std::pow(eps, beta - a);
    if (opt.enforceGate && !(gate < 0.1))
        throw HypothesisViolation("eps^(beta-a)", "smallness gate eps^(beta-a) = " + format_double(gate) + " >= 1/10");

    Report r;
    r.add_upper("eps^(beta-a) < 1/10", gate, 0.1, opt.enforceGate ? "" : "gate not enforced");
    const int d2 = d * d;
    const std::pair<const char*, std::pair<cplx, const Polynomial1D*>> factors[] = {
        {"h+", {c, &pPlus}}, {"h-", {1.0 / c, &pMinus}}};
    for (const auto& [tag, fp] : factors) {
        FactorStats st = check_factor(fp.first, *fp.second, eps, a, nSamples, opt.seed);
        const std::string t = tag;
        r.add_lower(t + " preimage containment", st.containment, 0.0, "relative margin inside V_eps");
        r.add(Clause{t + " preimage count = d^2", st.minCount == d2 && st.maxCount == d2,
                     static_cast<double>(st.minCount), static_cast<double>(d2),
                     static_cast<double>(st.minCount - d2), "max " + std::to_string(st.maxCount)});
        r.add_upper(t + " preimage residual", st.residual, 1e-8);
        r.add_lower(t + " critical points escape", st.escape, 0.0,
                    std::to_string(st.criticalInV) + " critical samples in V_eps");
    }
    return r;
}

json core_json(const CorePoint& core) {
    json j;
    j["point"] = json::array({complex_json(core.point[0]), complex_json(core.point[1])});
    j["period"] = core.period;
    j["regime"] = core.regime;
    j["symbols"] = core.symbols;
    j["residual"] = core.residual;
    j["clearance"] = core.clearance;
    if (core.rouche) {
        j["rouche"] = {{"ok", core.rouche->ok},
                       {"minDisplacement", core.rouche->minDisplacement},
                       {"maxEta", core.rouche->maxEta},
                       {"margin", core.rouche->margin}};
    } else {
        j["selfMapClearance"] = core.selfMapClearance;
    }
    return j;
}

json misiurewicz_json(const MisiurewiczWitness& mw) {
    json j;
    j["critPoint"] = complex_json(mw.critPoint);
    j["pushSymbols"] = mw.pushSymbols;
    j["pushSlopes"] = mw.pushSlopes;
    j["usedUnstableManifold"] = mw.usedUnstableManifold;
    j["componentsExamined"] = mw.componentsExamined;
    j["pointOriginal"] = json::array({complex_json(mw.pointOriginal[0]), complex_json(mw.pointOriginal[1])});
    j["w0"] = complex_json(mw.w0);
    j["witness"] = witness_json(mw.witness);
    return j;
}

}  // namespace blend
