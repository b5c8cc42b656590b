#include "blend/topo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "blend/errors.hpp"
#include "blend/io.hpp"
#include "blend/parallel.hpp"

namespace blend {

bool Viewport::contains(cplx z) const {
    return z.real() >= xmin && z.real() <= xmax && z.imag() >= ymin && z.imag() <= ymax;
}

const char* region_name(Region r) {
    switch (r) {
        case Region::Inn: return "Inn";
        case Region::NearE: return "NearE";
        case Region::Out: return "Out";
    }
    return "?";
}

double RegionMap::cell_diameter() const { return std::hypot(dx(), dy()); }

cplx RegionMap::cell_center(int ix, int iy) const {
    return {viewport.xmin + (ix + 0.5) * dx(), viewport.ymin + (iy + 0.5) * dy()};
}

std::size_t RegionMap::count(Region r) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), r)); }

namespace {

double escape_radius(const Polynomial1D& p) {
    const int d = p.degree();
    const double lead = std::abs(p.leading());
    double r = 0.0;
    for (int i = 0; i < d; ++i) r = std::max(r, std::abs(p.coeff(i)) / lead);
    return std::max(1.0 + r, std::pow(2.0 / lead, 1.0 / (d - 1)) + 1.0);
}

enum : std::uint8_t { kEscaped = 0, kAttracted = 1, kUndetermined = 2 };

// Marching squares on a zero-padded binary field; returns closed polylines.
std::vector<std::vector<cplx>> trace_contours(const std::vector<std::uint8_t>& inside, const RegionMap& map) {
    const int nx = map.nx, ny = map.ny;
    auto val = [&](int ix, int iy) -> int {
        if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return 0;
        return inside[static_cast<std::size_t>(iy) * nx + ix];
    };
    // Edge keys over the padded lattice (ix, iy in [-1, n]).
    const long W = nx + 2;
    auto hkey = [&](int ix, int iy) { return 2 * ((iy + 1L) * W + (ix + 1L)); };
    auto vkey = [&](int ix, int iy) { return 2 * ((iy + 1L) * W + (ix + 1L)) + 1; };
    auto point_of = [&](long key) {
        long cell = key / 2;
        int ix = static_cast<int>(cell % W) - 1, iy = static_cast<int>(cell / W) - 1;
        cplx a = map.cell_center(ix, iy);
        return key % 2 == 0 ? a + cplx(0.5 * map.dx(), 0.0) : a + cplx(0.0, 0.5 * map.dy());
    };
    // Edges: 0 bottom, 1 right, 2 top, 3 left. Saddles keep diagonal cells apart.
    static const int table[16][4] = {{-1, -1, -1, -1}, {3, 0, -1, -1}, {0, 1, -1, -1}, {3, 1, -1, -1},
                                     {1, 2, -1, -1},   {3, 0, 1, 2},   {0, 2, -1, -1}, {3, 2, -1, -1},
                                     {2, 3, -1, -1},   {0, 2, -1, -1}, {0, 1, 2, 3},   {1, 2, -1, -1},
                                     {1, 3, -1, -1},   {0, 1, -1, -1}, {3, 0, -1, -1}, {-1, -1, -1, -1}};
    std::map<long, std::vector<long>> adj;
    for (int iy = -1; iy < ny; ++iy)
        for (int ix = -1; ix < nx; ++ix) {
            int code = val(ix, iy) | val(ix + 1, iy) << 1 | val(ix + 1, iy + 1) << 2 | val(ix, iy + 1) << 3;
            long keys[4] = {hkey(ix, iy), vkey(ix + 1, iy), hkey(ix, iy + 1), vkey(ix, iy)};
            for (int s = 0; s < 4 && table[code][s] >= 0; s += 2) {
                long a = keys[table[code][s]], b = keys[table[code][s + 1]];
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
        }
    std::vector<std::vector<cplx>> lines;
    std::map<long, bool> seen;
    for (const auto& [start, nb] : adj) {
        if (seen[start]) continue;
        std::vector<cplx> line{point_of(start)};
        seen[start] = true;
        long prev = -1, cur = start;
        while (true) {
            const auto& n = adj[cur];
            long next = n[0] != prev ? n[0] : (n.size() > 1 ? n[1] : -1);
            if (next < 0 || next == start) {
                if (next == start) line.push_back(line.front());
                break;
            }
            if (seen[next]) break;
            seen[next] = true;
            line.push_back(point_of(next));
            prev = cur;
            cur = next;
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

double segment_distance(cplx z, cplx a, cplx b) {
    cplx ab = b - a;
    double len2 = std::norm(ab);
    double t = len2 > 0.0 ? std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
    return std::abs(z - (a + t * ab));
}

}  // namespace

RegionMap basin_classify(const Polynomial1D& p, const std::vector<cplx>& cycle, const Viewport& viewport, int nx,
                         int ny, int maxIter) {
    if (!viewport.valid()) throw InvalidArgument("empty viewport");
    if (nx < 8 || ny < 8) throw InvalidGrid("resolution must be at least 8 x 8");
    if (maxIter < 1) throw InvalidArgument("maxIter must be >= 1");
    if (p.degree() < 2) throw InvalidArgument("p must have degree >= 2");
    if (cycle.empty()) throw InvalidArgument("empty cycle");
    cplx mult = 1.0;
    const Polynomial1D dp = p.derivative();
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        cplx next = cycle[(i + 1) % cycle.size()];
        if (std::abs(p(cycle[i]) - next) > 1e-9 * (1.0 + std::abs(next))) throw NotAttracting("points do not form a cycle");
        mult *= dp(cycle[i]);
    }
    if (!(std::abs(mult) < 1.0)) throw NotAttracting("cycle multiplier modulus " + format_double(std::abs(mult)));

    RegionMap map;
    map.viewport = viewport;
    map.nx = nx;
    map.ny = ny;
    const std::size_t total = static_cast<std::size_t>(nx) * ny;
    const double R = escape_radius(p);
    const double capture = 1e-6;
    std::vector<std::uint8_t> status(total);
    parallel_for(total, [&](std::size_t i) {
        cplx z = map.cell_center(static_cast<int>(i % nx), static_cast<int>(i / nx));
        std::uint8_t s = kUndetermined;
        for (int k = 0; k < maxIter; ++k) {
            if (std::abs(z) > R) {
                s = kEscaped;
                break;
            }
            bool hit = false;
            for (const auto& c : cycle) hit = hit || std::abs(z - c) < capture;
            if (hit) {
                s = kAttracted;
                break;
            }
            z = p(z);
        }
        status[i] = s;
    });

    // Attracted component(s) containing the cycle, 4-connected.
    map.basin.assign(total, 0);
    std::deque<std::size_t> queue;
    for (const auto& c : cycle) {
        if (!viewport.contains(c)) throw OutOfViewport("cycle point outside viewport");
        int ix = std::min(nx - 1, static_cast<int>((c.real() - viewport.xmin) / map.dx()));
        int iy = std::min(ny - 1, static_cast<int>((c.imag() - viewport.ymin) / map.dy()));
        std::size_t f = static_cast<std::size_t>(iy) * nx + ix;
        if (status[f] != kAttracted) throw NotAttracting("cycle cell not classified as attracted");
        if (!map.basin[f]) {
            map.basin[f] = 1;
            queue.push_back(f);
        }
    }
    while (!queue.empty()) {
        std::size_t f = queue.front();
        queue.pop_front();
        int ix = static_cast<int>(f % nx), iy = static_cast<int>(f / nx);
        const int nbx[4] = {ix - 1, ix + 1, ix, ix}, nby[4] = {iy, iy, iy - 1, iy + 1};
        for (int k = 0; k < 4; ++k) {
            if (nbx[k] < 0 || nby[k] < 0 || nbx[k] >= nx || nby[k] >= ny) continue;
            std::size_t g = static_cast<std::size_t>(nby[k]) * nx + nbx[k];
            if (!map.basin[g] && status[g] == kAttracted) {
                map.basin[g] = 1;
                queue.push_back(g);
            }
        }
    }

    map.labels.resize(total);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            std::size_t f = static_cast<std::size_t>(iy) * nx + ix;
            const int nbx[4] = {ix - 1, ix + 1, ix, ix}, nby[4] = {iy, iy, iy - 1, iy + 1};
            bool edge = false;
            for (int k = 0; k < 4; ++k) {
                bool nb = nbx[k] >= 0 && nby[k] >= 0 && nbx[k] < nx && nby[k] < ny &&
                          map.basin[static_cast<std::size_t>(nby[k]) * nx + nbx[k]];
                edge = edge || nb != static_cast<bool>(map.basin[f]);
            }
            map.labels[f] = edge ? Region::NearE : (map.basin[f] ? Region::Inn : Region::Out);
        }
    map.curveApprox = trace_contours(map.basin, map);
    map.jordanLike = map.curveApprox.size() == 1;
    return map;
}

Region region_of(const RegionMap& map, cplx z) {
    if (!map.viewport.contains(z) || !is_finite(z)) throw OutOfViewport("point outside the region map viewport");
    int ix = std::min(map.nx - 1, static_cast<int>((z.real() - map.viewport.xmin) / map.dx()));
    int iy = std::min(map.ny - 1, static_cast<int>((z.imag() - map.viewport.ymin) / map.dy()));
    return map.at(ix, iy);
}

bool band_separates(const RegionMap& map) {
    const int nx = map.nx, ny = map.ny;
    std::vector<std::uint8_t> seen(map.labels.size(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t f = 0; f < map.labels.size(); ++f)
        if (map.labels[f] == Region::Inn) {
            seen[f] = 1;
            queue.push_back(f);
        }
    while (!queue.empty()) {
        std::size_t f = queue.front();
        queue.pop_front();
        int ix = static_cast<int>(f % nx), iy = static_cast<int>(f / nx);
        if (ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1) return false;
        const int nbx[4] = {ix - 1, ix + 1, ix, ix}, nby[4] = {iy, iy, iy - 1, iy + 1};
        for (int k = 0; k < 4; ++k) {
            std::size_t g = static_cast<std::size_t>(nby[k]) * nx + nbx[k];
            if (seen[g] || map.labels[g] == Region::NearE) continue;
            if (map.labels[g] == Region::Out) return false;
            seen[g] = 1;
            queue.push_back(g);
        }
    }
    return true;
}

RefinementStats refinement_check(const RegionMap& coarse, const RegionMap& fine) {
    RefinementStats st;
    for (int iy = 0; iy < coarse.ny; ++iy)
        for (int ix = 0; ix < coarse.nx; ++ix) {
            Region r = coarse.at(ix, iy);
            if (r == Region::NearE) continue;
            st.compared++;
            Region f = region_of(fine, coarse.cell_center(ix, iy));
            if (f == r) {
                st.agree++;
                continue;
            }
            if (f == Region::NearE) continue;
            st.flips++;
            bool nearBand = false;
            for (int oy = -1; oy <= 1; ++oy)
                for (int ox = -1; ox <= 1; ++ox) {
                    int jx = ix + ox, jy = iy + oy;
                    if (jx >= 0 && jy >= 0 && jx < coarse.nx && jy < coarse.ny && coarse.at(jx, jy) == Region::NearE)
                        nearBand = true;
                }
            if (!nearBand) st.flipsAwayFromBand++;
        }
    return st;
}

double signed_distance(const RegionMap& map, cplx z) {
    Region r = region_of(map, z);
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& line : map.curveApprox)
        for (std::size_t i = 0; i + 1 < line.size(); ++i) dist = std::min(dist, segment_distance(z, line[i], line[i + 1]));
    bool negative = r == Region::Inn;
    if (r == Region::NearE) {
        int ix = std::min(map.nx - 1, static_cast<int>((z.real() - map.viewport.xmin) / map.dx()));
        int iy = std::min(map.ny - 1, static_cast<int>((z.imag() - map.viewport.ymin) / map.dy()));
        negative = map.basin[static_cast<std::size_t>(iy) * map.nx + ix] != 0;
    }
    return negative ? -dist : dist;
}

double rational_distance(double x, int maxDen) {
    double best = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= maxDen; ++q) best = std::min(best, std::abs(x - std::round(x * q) / q));
    return best;
}

Polynomial1D claim_q(cplx alpha) { return Polynomial1D({alpha, -(1.0 + alpha), 1.0}); }

std::vector<cplx> EpsGrid::values() const {
    if (!(minModulus > 0.0 && maxModulus >= minModulus) || n < 1) throw InvalidArgument("bad eps grid");
    std::vector<cplx> out(n);
    const double l0 = std::log(minModulus), l1 = std::log(maxModulus);
    for (int i = 0; i < n; ++i) out[i] = std::polar(std::exp(n == 1 ? l0 : l0 + (l1 - l0) * i / (n - 1)), phase);
    return out;
}

EpsScan scan_epsilon(const RegionMap& map, cplx anchor, const Polynomial1D& q, int d, const EpsGrid& grid,
                     const RegionMap* verify) {
    if (d < 2) throw InvalidArgument("d must be >= 2");
    const cplx zp = std::polar(1.0, 2.0 * kPi / d), zm = std::conj(zp);
    const cplx qm = q(zm), qp = q(zp);
    EpsScan scan;
    scan.theta = std::numeric_limits<double>::quiet_NaN();
    scan.thetaRationalDistance = std::numeric_limits<double>::quiet_NaN();
    auto classify = [&](const RegionMap& m, cplx eps, Region& a, Region& b) {
        cplx za = anchor + eps * qm, zb = anchor + eps * qp;
        if (!m.viewport.contains(za) || !m.viewport.contains(zb)) return false;
        a = region_of(m, za);
        b = region_of(m, zb);
        return true;
    };
    for (cplx eps : grid.values()) {
        Region a, b;
        if (!classify(map, eps, a, b)) continue;
        EpsCandidate cand{eps, false};
        if (a == Region::Inn && b == Region::Out) cand.swapped = false;
        else if (a == Region::Out && b == Region::Inn) cand.swapped = true;
        else continue;
        if (verify) {
            Region va, vb;
            if (!classify(*verify, eps, va, vb) || va != a || vb != b) {
                scan.marginal.push_back(cand);
                continue;
            }
        }
        scan.admissible.push_back(cand);
    }
    return scan;
}

EpsScan scan_epsilon(const RegionMap& map, cplx anchor, cplx alpha, int d, const EpsGrid& grid,
                     const RegionMap* verify) {
    EpsScan scan = scan_epsilon(map, anchor, claim_q(alpha), d, grid, verify);
    const cplx zp = std::polar(1.0, 2.0 * kPi / d), zm = std::conj(zp);
    scan.theta = std::arg((zp - alpha) / (zm - alpha));
    scan.thetaRationalDistance = rational_distance(scan.theta / kPi, 64);
    scan.thetaIrrational = scan.thetaRationalDistance > 1e-3;
    return scan;
}

int winding_number(const LoopSamples& loop) {
    const auto& pts = loop.points;
    if (!loop.closed) throw InvalidArgument("winding number needs a closed loop");
    if (pts.size() < 4) throw Undersampled("fewer than 4 loop samples");
    if (std::abs(pts.front() - pts.back()) > 1e-12) throw InvalidArgument("loop is not closed");
    double maxMod = 0.0, minMod = std::numeric_limits<double>::infinity();
    for (const auto& z : pts) {
        if (!is_finite(z)) throw NonFiniteSample("loop sample");
        maxMod = std::max(maxMod, std::abs(z));
        minMod = std::min(minMod, std::abs(z));
    }
    if (!(minMod > 1e-12 * maxMod)) throw ZeroOnLoop("min modulus " + format_double(minMod));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double step = std::arg(pts[i + 1] / pts[i]);
        if (std::abs(step) > kPi / 2) throw Undersampled("argument jump " + format_double(step) + " at sample " + std::to_string(i));
        total += step;
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

TransversalityResult transversality_check(const Polynomial1D& p, const Polynomial1D& q, cplx eps, cplx c, double rho,
                                          const RegionMap& map, int nSamples, int d) {
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
    if (nSamples < 64) throw InvalidArgument("nSamples must be >= 64");
    if (d < 2) throw InvalidArgument("d must be >= 2");
    const int n4 = nSamples / 4;
    const double t0 = 2.0 * kPi / d;
    std::vector<cplx> ws;
    std::vector<bool> radial;
    for (int i = 0; i < n4; ++i) {  // zeta-, outward
        ws.push_back(std::polar(1.0 - rho + 2.0 * rho * i / n4, -t0));
        radial.push_back(true);
    }
    for (int i = 0; i < n4; ++i) {  // outer arc
        ws.push_back(std::polar(1.0 + rho, -t0 + 2.0 * t0 * i / n4));
        radial.push_back(false);
    }
    for (int i = 0; i < n4; ++i) {  // zeta+, inward
        ws.push_back(std::polar(1.0 + rho - 2.0 * rho * i / n4, t0));
        radial.push_back(true);
    }
    for (int i = 0; i < n4; ++i) {  // inner arc
        ws.push_back(std::polar(1.0 - rho, t0 - 2.0 * t0 * i / n4));
        radial.push_back(false);
    }
    const cplx base = p(c);
    std::vector<cplx> phi(ws.size());
    std::vector<std::uint8_t> inBand(ws.size(), 0);
    std::vector<double> bandDist(ws.size(), std::numeric_limits<double>::infinity());
    parallel_for(ws.size(), [&](std::size_t i) {
        cplx z = base + eps * q(ws[i]);
        if (radial[i]) {
            inBand[i] = region_of(map, z) == Region::NearE;
            if (inBand[i]) return;
        }
        double s = signed_distance(map, z);
        if (radial[i]) bandDist[i] = std::abs(s);
        phi[i] = cplx(s, -(std::pow(std::abs(ws[i]), d) - 1.0));
    });
    for (std::size_t i = 0; i < ws.size(); ++i)
        if (inBand[i]) throw LoopHitsBand("radial side sample " + std::to_string(i) + " lies in the NearE band");
    LoopSamples loop{phi, true};
    loop.points.push_back(phi.front());
    TransversalityResult r;
    r.winding = winding_number(loop);
    r.minBandDistance = *std::min_element(bandDist.begin(), bandDist.end());
    r.samples = ws.size();
    return r;
}

void write_region_map(const std::string& pgmPath, const RegionMap& map) {
    std::vector<std::uint8_t> px(map.labels.size());
    for (int iy = 0; iy < map.ny; ++iy)
        for (int ix = 0; ix < map.nx; ++ix) {
            Region r = map.at(ix, iy);
            px[static_cast<std::size_t>(map.ny - 1 - iy) * map.nx + ix] = r == Region::Inn ? 0 : r == Region::NearE ? 128 : 255;
        }
    write_pgm(pgmPath, map.nx, map.ny, px);
}

json region_map_json(const RegionMap& map) {
    json j;
    j["viewport"] = {{"xmin", map.viewport.xmin}, {"xmax", map.viewport.xmax}, {"ymin", map.viewport.ymin}, {"ymax", map.viewport.ymax}};
    j["nx"] = map.nx;
    j["ny"] = map.ny;
    j["encoding"] = {{"Inn", 0}, {"NearE", 128}, {"Out", 255}};
    j["counts"] = {{"Inn", map.count(Region::Inn)}, {"NearE", map.count(Region::NearE)}, {"Out", map.count(Region::Out)}};
    j["polylines"] = map.curveApprox.size();
    j["jordanLike"] = map.jordanLike;
    j["cellDiameter"] = map.cell_diameter();
    return j;
}

std::vector<int> escape_time(const Polynomial1D& f, const Viewport& viewport, int nx, int ny, int maxIter,
                             double escapeRadius) {
    if (!viewport.valid()) throw InvalidArgument("empty viewport");
    if (nx < 1 || ny < 1) throw InvalidGrid("raster must be nonempty");
    if (maxIter < 1 || !(escapeRadius > 0.0)) throw InvalidArgument("maxIter and escape radius must be positive");
    std::vector<int> out(static_cast<std::size_t>(nx) * ny);
    const double dx = (viewport.xmax - viewport.xmin) / nx, dy = (viewport.ymax - viewport.ymin) / ny;
    parallel_for(out.size(), [&](std::size_t i) {
        int ix = static_cast<int>(i % nx), row = static_cast<int>(i / nx);
        cplx z(viewport.xmin + (ix + 0.5) * dx, viewport.ymax - (row + 0.5) * dy);
        int k = 0;
        while (k < maxIter && std::abs(z) <= escapeRadius) {
            z = f(z);
            ++k;
        }
        out[i] = k;
    });
    return out;
}

int count_components(const std::vector<int>& times, int nx, int ny, int minIter) {
    std::vector<std::uint8_t> seen(times.size(), 0);
    int comps = 0;
    for (std::size_t s = 0; s < times.size(); ++s) {
        if (seen[s] || times[s] < minIter) continue;
        ++comps;
        std::deque<std::size_t> queue{s};
        seen[s] = 1;
        while (!queue.empty()) {
            std::size_t f = queue.front();
            queue.pop_front();
            int ix = static_cast<int>(f % nx), iy = static_cast<int>(f / nx);
            const int nbx[4] = {ix - 1, ix + 1, ix, ix}, nby[4] = {iy, iy, iy - 1, iy + 1};
            for (int k = 0; k < 4; ++k) {
                if (nbx[k] < 0 || nby[k] < 0 || nbx[k] >= nx || nby[k] >= ny) continue;
                std::size_t g = static_cast<std::size_t>(nby[k]) * nx + nbx[k];
                if (!seen[g] && times[g] >= minIter) {
                    seen[g] = 1;
                    queue.push_back(g);
                }
            }
        }
    }
    return comps;
}

}  // namespace blend
