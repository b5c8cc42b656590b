#include "blend/ifs1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blend/errors.hpp"
#include "blend/io.hpp"
#include "blend/parallel.hpp"
#include "blend/rng.hpp"

namespace blend {

Ifs1D::Ifs1D(std::vector<AffineContraction> b, std::string lbl) : branches(std::move(b)), label(std::move(lbl)) {
    if (branches.empty()) throw InvalidArgument("IFS needs at least one branch");
    for (const auto& br : branches) {
        if (std::abs(br.m) + std::abs(br.t) > 1.0 + 1e-12)
            throw InvalidArgument("branch does not map the unit disk into itself");
    }
}

double Ifs1D::inverse_lipschitz() const {
    double L = 0.0;
    for (const auto& b : branches) L = std::max(L, 1.0 / std::abs(b.m));
    return L;
}

namespace {

struct CellResult {
    double minClearance = std::numeric_limits<double>::infinity();
    double minSlack = std::numeric_limits<double>::infinity();
    double finestH = std::numeric_limits<double>::infinity();
    std::size_t leaves = 0;
    std::size_t unresolved = 0;
    int depth = 0;
    int chart = -1;
    bool hasCounter = false;
    cplx counter;
    double counterClearance = 0.0;
};

struct Best {
    int j;
    double clearance;
};

Best best_branch(const Ifs1D& ifs, const Disk& target, cplx z) {
    Best b{-1, -std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < ifs.size(); ++j) {
        double c = target.clearance(ifs.branches[j].inverse(z));
        if (c > b.clearance) b = {static_cast<int>(j), c};
    }
    return b;
}

// Nearest point of the closed target disk to z.
cplx project(const Disk& target, cplx z) {
    cplx d = z - target.center;
    double r = std::abs(d);
    if (r <= target.radius) return z;
    return target.center + d * (target.radius / r);
}

double square_distance(const Disk& target, double x0, double y0, double s) {
    double cx = std::clamp(target.center.real(), x0, x0 + s);
    double cy = std::clamp(target.center.imag(), y0, y0 + s);
    return std::abs(cplx(cx, cy) - target.center);
}

void process_cell(const Ifs1D& ifs, const Disk& target, double lip, double x0, double y0, double s, int depth,
                  CellResult& out) {
    if (square_distance(target, x0, y0, s) > target.radius) return;
    cplx z = project(target, cplx(x0 + s / 2, y0 + s / 2));
    double h = s * std::sqrt(2.0);
    Best b = best_branch(ifs, target, z);
    if (depth == 0) out.chart = b.j;
    out.depth = std::max(out.depth, depth);
    if (b.clearance > lip * h) {
        out.leaves++;
        out.minClearance = std::min(out.minClearance, b.clearance);
        out.minSlack = std::min(out.minSlack, b.clearance - lip * h);
        out.finestH = std::min(out.finestH, h);
        return;
    }
    if (b.clearance <= 0.0) {
        out.minClearance = std::min(out.minClearance, b.clearance);
        if (!out.hasCounter || b.clearance < out.counterClearance) {
            out.hasCounter = true;
            out.counter = z;
            out.counterClearance = b.clearance;
        }
        return;
    }
    if (depth >= kMaxRefineDepth) {
        out.unresolved++;
        out.minClearance = std::min(out.minClearance, b.clearance);
        return;
    }
    double t = s / 2;
    process_cell(ifs, target, lip, x0, y0, t, depth + 1, out);
    process_cell(ifs, target, lip, x0 + t, y0, t, depth + 1, out);
    process_cell(ifs, target, lip, x0, y0 + t, t, depth + 1, out);
    process_cell(ifs, target, lip, x0 + t, y0 + t, t, depth + 1, out);
}

}  // namespace

CoveringCertificate certify_covering(const Ifs1D& ifs, const Disk& target, int gridN) {
    if (gridN < 16) throw InvalidGrid("certify_covering needs gridN >= 16");
    if (!(target.radius > 0.0)) throw InvalidArgument("target disk must have positive radius");
    const double lip = ifs.inverse_lipschitz();
    const double side = 2.0 * target.radius / gridN;
    const double x0 = target.center.real() - target.radius;
    const double y0 = target.center.imag() - target.radius;
    const std::size_t cells = static_cast<std::size_t>(gridN) * gridN;

    std::vector<CellResult> res(cells);
    parallel_for(cells, [&](std::size_t c) {
        std::size_t row = c / gridN, col = c % gridN;
        process_cell(ifs, target, lip, x0 + col * side, y0 + row * side, side, 0, res[c]);
    });

    CoveringCertificate cert;
    cert.targetDisk = target;
    cert.witnessGridN = gridN;
    cert.lipschitz = lip;
    cert.cellDiameter = side * std::sqrt(2.0);
    cert.branchChart.resize(cells);
    cert.margin = std::numeric_limits<double>::infinity();
    cert.soundnessSlack = std::numeric_limits<double>::infinity();
    cert.finestCellDiameter = std::numeric_limits<double>::infinity();
    std::size_t unresolved = 0;
    double worstCounter = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cells; ++c) {
        const auto& r = res[c];
        cert.branchChart[c] = r.chart;
        cert.margin = std::min(cert.margin, r.minClearance);
        cert.soundnessSlack = std::min(cert.soundnessSlack, r.minSlack);
        cert.finestCellDiameter = std::min(cert.finestCellDiameter, r.finestH);
        cert.leafCells += r.leaves;
        cert.maxDepthUsed = std::max(cert.maxDepthUsed, r.depth);
        unresolved += r.unresolved;
        if (r.hasCounter && r.counterClearance < worstCounter) {
            worstCounter = r.counterClearance;
            cert.counterexample = r.counter;
        }
    }
    if (cert.counterexample) {
        cert.holds = false;
        return cert;
    }
    if (unresolved > 0)
        throw Inconclusive(std::to_string(unresolved) + " cells unresolved at refinement depth " +
                           std::to_string(kMaxRefineDepth) + "; min clearance " + format_double(cert.margin));
    cert.holds = true;
    return cert;
}

Ifs1D lemma_ifs(int d, cplx m, const std::vector<cplx>& alphas, double theta) {
    if (d < 1 || alphas.size() != static_cast<std::size_t>(d))
        throw InvalidArgument("need d >= 1 and one alpha per branch");
    const cplx rot = std::polar(1.0, theta);
    std::vector<AffineContraction> b;
    for (int j = 1; j <= d; ++j) {
        cplx t = rot * alphas[j - 1] * (1.0 - std::abs(m)) * std::polar(1.0, 2.0 * kPi * j / d);
        b.emplace_back(m, t);
    }
    return Ifs1D(std::move(b), "lemma d=" + std::to_string(d));
}

void check_lemma_ifs_hypotheses(int d, cplx m, const std::vector<cplx>& alphas) {
    if (d < 3) throw HypothesisViolation("d", "need d >= 3");
    if (alphas.size() != static_cast<std::size_t>(d)) throw HypothesisViolation("alphas", "need one alpha per branch");
    double am = std::abs(m);
    if (!(am > 0.98 && am < 1.0)) throw HypothesisViolation("|m|", "need 0.98 < |m| < 1, got " + format_double(am));
    for (const auto& a : alphas) {
        double aa = std::abs(a);
        if (!(aa > 0.6 && aa < 1.0))
            throw HypothesisViolation("|alpha_j|", "need 3/5 < |alpha_j| < 1, got " + format_double(aa));
        if (!(std::abs(std::arg(a)) < kPi / 20))
            throw HypothesisViolation("arg alpha_j", "need |arg alpha_j| < pi/20");
    }
}

CoveringCertificate certify_lemma_ifs(int d, cplx m, const std::vector<cplx>& alphas, int gridN) {
    return certify_rotated(d, m, alphas, 0.0, gridN);
}

CoveringCertificate certify_rotated(int d, cplx m, const std::vector<cplx>& alphas, double theta, int gridN) {
    check_lemma_ifs_hypotheses(d, m, alphas);
    if (gridN < 16) throw InvalidGrid("certify_covering needs gridN >= 16");
    return certify_covering(lemma_ifs(d, m, alphas, theta), Disk(0.0, 0.1), gridN);
}

Ifs1D compose_power(const Ifs1D& ifs, int n) {
    if (n < 1) throw InvalidArgument("compose_power needs n >= 1");
    const std::size_t d = ifs.size();
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
        if (total > kMaxComposedBranches / d) throw BranchExplosion("d^n exceeds 10^6");
        total *= d;
    }
    // Words in lexicographic order: the word index written in base d has j_1 as
    // its most significant digit.
    std::vector<AffineContraction> out(total);
    parallel_for(total, [&](std::size_t w) {
        std::vector<std::size_t> word(n);
        std::size_t x = w;
        for (int i = n; i-- > 0;) {
            word[i] = x % d;
            x /= d;
        }
        AffineContraction acc = ifs.branches[word[0]];
        for (int i = 1; i < n; ++i) acc = ifs.branches[word[i]].after(acc);
        out[w] = acc;
    });
    return Ifs1D(std::move(out), ifs.label + "^" + std::to_string(n));
}

Ifs1D two_branch_ifs(cplx m, cplx alpha) {
    cplx t = alpha * (1.0 - std::abs(m));
    return Ifs1D({AffineContraction(m, t), AffineContraction(m, -t)}, "l+-");
}

void check_lemma_ifs2_hypotheses(cplx m, cplx alpha) {
    double am = std::abs(m);
    if (!(am > 0.99 && am < 1.0)) throw HypothesisViolation("|m|", "need 0.99 < |m| < 1, got " + format_double(am));
    if (!(std::abs(std::arg(m) - kPi / 2) < kPi / 50))
        throw HypothesisViolation("arg m", "need |arg m - pi/2| < pi/50");
    double aa = std::abs(alpha);
    if (!(aa > 0.9 && aa < 1.0)) throw HypothesisViolation("|alpha|", "need 0.9 < |alpha| < 1, got " + format_double(aa));
}

CoveringCertificate certify_lemma_ifs2(cplx m, cplx alpha, int gridN) {
    check_lemma_ifs2_hypotheses(m, alpha);
    if (gridN < 16) throw InvalidGrid("certify_covering needs gridN >= 16");
    return certify_covering(compose_power(two_branch_ifs(m, alpha), 2), Disk(0.0, 0.1), gridN);
}

double preimage_clearance(const AffineContraction& branch, cplx z0, double r, const Disk& target) {
    Disk pre = affine_preimage(branch, Disk(z0, r));
    return target.radius - std::abs(pre.center - target.center) - pre.radius;
}

int select_branch(const Ifs1D& ifs, cplx z0, double r, const Disk& target) {
    if (!(r >= 0.0)) throw InvalidArgument("radius must be >= 0");
    if (!target.contains(z0)) throw NoBranch("z0 lies outside the target disk");
    int best = -1;
    double bestClr = -std::numeric_limits<double>::infinity();
    double bestCenter = 0.0;
    for (std::size_t j = 0; j < ifs.size(); ++j) {
        double clr = preimage_clearance(ifs.branches[j], z0, r, target);
        double cen = std::abs(ifs.branches[j].inverse(z0));
        double tol = 1e-15 * std::max(1.0, std::abs(clr));
        if (best < 0 || clr > bestClr + tol || (std::abs(clr - bestClr) <= tol && cen < bestCenter)) {
            best = static_cast<int>(j);
            bestClr = clr;
            bestCenter = cen;
        }
    }
    if (bestClr < 0.0)
        throw NoBranch("no branch pulls D(z0, r) back into the target; best clearance " + format_double(bestClr));
    return best;
}

std::vector<cplx> sample_limit_set(const Ifs1D& ifs, std::size_t nPoints, int burnIn, std::uint64_t seed) {
    if (nPoints < 1) throw InvalidArgument("nPoints must be >= 1");
    if (burnIn < 0) throw InvalidArgument("burnIn must be >= 0");
    std::vector<cplx> pts(nPoints);
    const std::size_t d = ifs.size();
    parallel_for(nPoints, [&](std::size_t i) {
        SplitMix64 rng(SplitMix64::stream(seed, i));
        cplx z(0.0, 0.0);
        for (int s = 0; s < burnIn; ++s) z = ifs.branches[rng.below(d)](z);
        pts[i] = z;
    });
    return pts;
}

json certificate_json(const CoveringCertificate& cert) {
    json j;
    j["holds"] = cert.holds;
    j["targetDisk"] = {{"center", complex_json(cert.targetDisk.center)}, {"radius", cert.targetDisk.radius}};
    j["margin"] = cert.margin;
    j["witnessGridN"] = cert.witnessGridN;
    j["counterexample"] = cert.counterexample ? complex_json(*cert.counterexample) : json(nullptr);
    j["lipschitz"] = cert.lipschitz;
    j["cellDiameter"] = cert.cellDiameter;
    j["finestCellDiameter"] = cert.finestCellDiameter;
    j["soundnessSlack"] = cert.soundnessSlack;
    j["leafCells"] = cert.leafCells;
    j["maxDepthUsed"] = cert.maxDepthUsed;
    j["branchChart"] = cert.branchChart;
    return j;
}

}  // namespace blend
