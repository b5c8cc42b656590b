// mcert: certification pipelines for affine IFS coverings, blenders, skew-product
// Misiurewicz witnesses and the basin-boundary topology check.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blend/blender.hpp"
#include "blend/errors.hpp"
#include "blend/ifs1d.hpp"
#include "blend/io.hpp"
#include "blend/parallel.hpp"
#include "blend/rng.hpp"
#include "blend/skewprod.hpp"
#include "blend/topo.hpp"

namespace fs = std::filesystem;
using namespace blend;

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Flat key=value parameters; every read is echoed into the report.
class Config {
public:
    void load_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw InvalidArgument("cannot read config " + path);
        std::string line;
        int lineNo = 0;
        while (std::getline(f, line)) {
            ++lineNo;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            line = trim(line);
            if (line.empty()) continue;
            set_pair(line, path + ":" + std::to_string(lineNo));
        }
    }

    void set_pair(const std::string& kv, const std::string& where) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw InvalidArgument(where + ": expected key=value, got '" + kv + "'");
        values_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }

    double real(const std::string& key, double def) {
        double v = def;
        if (auto it = values_.find(key); it != values_.end()) v = parse_real(key, it->second);
        echo_[key] = v;
        return v;
    }

    int integer(const std::string& key, int def) {
        double v = real(key, def);
        if (v != std::floor(v)) throw InvalidArgument(key + " must be an integer");
        echo_[key] = static_cast<int>(v);
        return static_cast<int>(v);
    }

    // "x", "re,im" or "r@theta".
    cplx complex(const std::string& key, cplx def) {
        cplx v = def;
        if (auto it = values_.find(key); it != values_.end()) v = parse_complex(key, it->second);
        echo_[key] = complex_json(v);
        return v;
    }

    std::vector<double> real_list(const std::string& key, const std::vector<double>& def) {
        std::vector<double> v = def;
        if (auto it = values_.find(key); it != values_.end()) {
            v.clear();
            std::stringstream ss(it->second);
            std::string item;
            while (std::getline(ss, item, ';'))
                if (!trim(item).empty()) v.push_back(parse_real(key, trim(item)));
        }
        echo_[key] = v;
        return v;
    }

    std::string text(const std::string& key, const std::string& def) {
        std::string v = def;
        if (auto it = values_.find(key); it != values_.end()) v = it->second;
        echo_[key] = v;
        return v;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void reject_unused() const {
        for (const auto& [k, v] : values_)
            if (!echo_.contains(k)) throw InvalidArgument("unknown config key '" + k + "'");
    }

    const json& echo() const { return echo_; }

private:
    static double parse_real(const std::string& key, const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InvalidArgument("cannot parse '" + s + "' for " + key);
        }
    }

    static cplx parse_complex(const std::string& key, const std::string& s) {
        if (auto at = s.find('@'); at != std::string::npos)
            return std::polar(parse_real(key, trim(s.substr(0, at))), parse_real(key, trim(s.substr(at + 1))));
        if (auto comma = s.find(','); comma != std::string::npos)
            return {parse_real(key, trim(s.substr(0, comma))), parse_real(key, trim(s.substr(comma + 1)))};
        return {parse_real(key, s), 0.0};
    }

    std::map<std::string, std::string> values_;
    json echo_ = json::object();
};

struct RunContext {
    std::string command;
    Config cfg;
    fs::path out;
    std::uint64_t seed = 1;
    int gridN = 0;  // 0: command default
    double tol = 1e-13;
    Report clauses;
    json result = json::object();
    json artifacts = json::array();
    bool certifiedFalse = false;

    std::string artifact(const std::string& name) {
        artifacts.push_back(name);
        return (out / name).string();
    }
};

// Resolves the command default and records it so the report shows the grid actually used.
int grid_or(RunContext& ctx, int def) {
    if (ctx.gridN <= 0) ctx.gridN = def;
    return ctx.gridN;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw InvalidArgument(std::string(what) + " must be > 0");
}

// ---- certify-ifs ----

json certify_one(const std::string& mode, int d, cplx m, cplx alpha, double theta, int gridN) {
    CoveringCertificate cert;
    if (mode == "lemma") {
        std::vector<cplx> alphas(d, alpha);
        cert = theta == 0.0 ? certify_lemma_ifs(d, m, alphas, gridN) : certify_rotated(d, m, alphas, theta, gridN);
    } else if (mode == "lemma2") {
        cert = certify_lemma_ifs2(m, alpha, gridN);
    } else {
        throw InvalidArgument("mode must be lemma or lemma2");
    }
    return certificate_json(cert);
}

void cmd_certify_ifs(RunContext& ctx) {
    auto& c = ctx.cfg;
    const std::string mode = c.text("mode", "lemma");
    const bool two = mode == "lemma2";
    const int d = c.integer("d", 3);
    const cplx m = c.complex("m", two ? std::polar(0.995, kPi / 2) : cplx(0.99, 0.0));
    const cplx alpha = c.complex("alpha", two ? cplx(0.95, 0.0) : cplx(0.8, 0.0));
    const double theta = c.real("theta", 0.0);
    const int samples = c.integer("samples", 0);
    const int burnIn = c.integer("burnIn", 60);
    const auto sweepM = c.real_list("sweep_mabs", {});
    const auto sweepA = c.real_list("sweep_alpha", {});
    const int gridN = grid_or(ctx, 64);
    c.reject_unused();

    if (!sweepM.empty() || !sweepA.empty()) {
        const auto ms = sweepM.empty() ? std::vector<double>{std::abs(m)} : sweepM;
        const auto as = sweepA.empty() ? std::vector<double>{std::abs(alpha)} : sweepA;
        json cells = json::array();
        int idx = 0, held = 0;
        for (double ma : ms)
            for (double aa : as) {
                cplx mi = std::polar(ma, std::arg(m)), ai = std::polar(aa, std::arg(alpha));
                json cell = {{"index", idx}, {"m", complex_json(mi)}, {"alpha", complex_json(ai)}};
                try {
                    json cert = certify_one(mode, d, mi, ai, theta, gridN);
                    cell["certificate"] = cert;
                    held += cert["holds"].get<bool>();
                } catch (const Error& e) {
                    cell["error"] = {{"kind", e.kind()}, {"message", e.what()}};
                }
                char name[32];
                std::snprintf(name, sizeof name, "cell_%03d.json", idx);
                write_json(ctx.artifact(name), cell);
                cells.push_back({{"index", idx}, {"m", complex_json(mi)}, {"alpha", complex_json(ai)},
                                 {"holds", cell.contains("certificate") && cell["certificate"]["holds"].get<bool>()}});
                ++idx;
            }
        ctx.result["cells"] = cells;
        ctx.clauses.add(Clause{"sweep cells certified", held == idx, static_cast<double>(held), static_cast<double>(idx),
                               static_cast<double>(held - idx), ""});
        ctx.certifiedFalse = held != idx;
        return;
    }

    json cert = certify_one(mode, d, m, alpha, theta, gridN);
    ctx.result["certificate"] = cert;
    const bool holds = cert["holds"].get<bool>();
    ctx.clauses.add(Clause{"covering of D(0,1/10)", holds, cert["margin"].get<double>(), 0.0,
                           cert["soundnessSlack"].get<double>(), "margin is the min best clearance"});
    ctx.certifiedFalse = !holds;
    if (samples > 0) {
        Ifs1D ifs = two ? compose_power(two_branch_ifs(m, alpha), 2) : lemma_ifs(d, m, std::vector<cplx>(d, alpha), theta);
        write_points_csv(ctx.artifact("limit_set.csv"), sample_limit_set(ifs, samples, burnIn, ctx.seed));
    }
}

// ---- blender ----

void cmd_blender(RunContext& ctx) {
    auto& c = ctx.cfg;
    const int d = c.integer("d", 3);
    const cplx kappa = c.complex("kappa", d == 2 ? 1e7 : 1e6);
    const cplx eps = c.complex("eps", d == 2 ? 1e-8 : 1e-6);
    const cplx m = c.complex("m", d == 2 ? std::polar(0.995, kPi / 2) : std::polar(0.99, 0.2));
    const cplx graphZ = c.complex("graphZ", 0.05);
    const int steps = c.integer("steps", 60);
    const int cloud = c.integer("cloud", 100000);
    const int burnIn = c.integer("burnIn", 60);
    const int gridN = grid_or(ctx, 64);
    c.reject_unused();
    if (steps < 1) throw InvalidArgument("steps must be >= 1");

    // p(z) = z/m + z^2, so z0 = 0 with multiplier 1/m.
    const Polynomial1D p({0.0, 1.0 / m, 1.0});
    const SkewProduct skew = SkewProduct::make(p, d, kappa, eps, 0.0);
    const BlenderIfs ifs = rescaled_inverse_ifs(skew);
    Report v = validate_blender(ifs);
    for (auto& cl : v.clauses) ctx.clauses.add(cl);

    VerticalGraph graph = graph_from_callable([&](std::span<const cplx>) { return graphZ; }, Polydisk::unit(1), gridN);
    IntersectionWitness w = intersect_graph_blender(ifs, graph, steps, ctx.tol);
    write_json(ctx.artifact("witness.json"), witness_json(w));
    ctx.clauses.add_upper("localization radius", w.radius, 1e-8);

    if (cloud > 0) {
        auto pts = sample_limit_set_k(ifs, cloud, burnIn, ctx.seed);
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& q : pts) nearest = std::min(nearest, std::hypot(std::abs(q[0] - w.point[0]), std::abs(q[1] - w.point[1])));
        write_points_csv_k(ctx.artifact("cloud.csv"), pts);
        ctx.clauses.add_upper("witness near chaos-game cloud", nearest, 1e-3);
    }
    ctx.result["skew"] = {{"z0", complex_json(skew.z0)}, {"m", complex_json(skew.m)}, {"delta", skew.delta},
                          {"psi", skew.psi}, {"wordLength", ifs.wordLength}, {"perturbationC1", ifs.perturbationC1}};
    ctx.result["witness"] = {{"radius", w.radius}, {"point", json::array({complex_json(w.point[0]), complex_json(w.point[1])})}};
    ctx.certifiedFalse = !ctx.clauses.all_pass();
}

// ---- misiurewicz ----

struct MisiurewiczParams {
    int d;
    cplx kappa, eps, m, crit;
    int nPush, nPull, gridN;
    double tol;
};

// p(z) = z (z - 1)^2 / m: fixed point 0 with multiplier 1/m, critical point 1 mapped to 0.
Polynomial1D misiurewicz_poly(cplx m) { return Polynomial1D({0.0, 1.0 / m, -2.0 / m, 1.0 / m}); }

cplx newton_critical(const Polynomial1D& p, cplx guess) {
    const Polynomial1D dp = p.derivative();
    cplx z = guess;
    for (int it = 0; it < 50; ++it) {
        cplx v, dv;
        dp.eval2(z, v, dv);
        cplx step = v / dv;
        z -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return z;
}

void cmd_misiurewicz(RunContext& ctx) {
    auto& c = ctx.cfg;
    MisiurewiczParams P;
    P.d = c.integer("d", 3);
    P.kappa = c.complex("kappa", 1e6);
    P.eps = c.complex("eps", 1e-6);
    P.m = c.complex("m", std::polar(0.99, 0.2));
    P.crit = c.complex("crit", 1.0);
    P.nPush = c.integer("nPush", 3);
    P.nPull = c.integer("nPull", 60);
    const int perturb = c.integer("perturb", 10);
    const auto sweepEps = c.real_list("sweep_eps", {});
    P.gridN = grid_or(ctx, 64);
    P.tol = ctx.tol;
    c.reject_unused();

    const Polynomial1D p = misiurewicz_poly(P.m);
    const SkewProduct skew = SkewProduct::make(p, P.d, P.kappa, P.eps, 0.0);
    MisiurewiczWitness mw = misiurewicz_certify(skew, P.crit, P.nPush, P.nPull, P.gridN, P.tol);
    write_json(ctx.artifact("witness.json"), misiurewicz_json(mw));
    ctx.clauses.add_upper("localization radius", mw.witness.radius, 1e-8);

    // The critical orbit lands on the witness point.
    Point2 x{P.crit, mw.w0};
    for (int k = 0; k < P.nPush && !mw.usedUnstableManifold; ++k) x = skew.forward(x[0], x[1]);
    if (!mw.usedUnstableManifold)
        ctx.clauses.add_upper("critical orbit reaches witness (rescaled)", std::abs(x[0] - mw.pointOriginal[0]) / skew.delta,
                              1e-6);

    const double budget = (1.0 - std::abs(skew.m)) / 2000.0;
    std::ostringstream table;
    table << "index,ok,radius,kind\n";
    int survived = 0;
    for (int r = 0; r < perturb; ++r) {
        SplitMix64 rng(SplitMix64::stream(ctx.seed, r));
        std::vector<cplx> coef = p.coeffs();
        for (std::size_t k = 0; k < coef.size(); ++k) {
            cplx u = std::polar(std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
            // Sup of the perturbation and its derivative on the unit disk (which holds z0 and crit)
            // stays below budget * delta, i.e. below budget after rescaling.
            coef[k] += u * budget * skew.delta / (4.0 * std::max<double>(1.0, k));
        }
        Polynomial1D pp(coef);
        try {
            SkewProduct sk = SkewProduct::make(pp, P.d, P.kappa, P.eps, skew.z0);
            MisiurewiczWitness w = misiurewicz_certify(sk, newton_critical(pp, P.crit), P.nPush, P.nPull, P.gridN, P.tol);
            bool ok = w.witness.radius < 1e-8;
            survived += ok;
            table << r << ',' << (ok ? 1 : 0) << ',' << format_double(w.witness.radius) << ",\n";
        } catch (const Error& e) {
            table << r << ",0,," << e.kind() << '\n';
        }
    }
    if (perturb > 0) {
        write_text(ctx.artifact("persistence.csv"), table.str());
        ctx.clauses.add(Clause{"perturbation persistence", survived == perturb, static_cast<double>(survived),
                               static_cast<double>(perturb), static_cast<double>(survived - perturb),
                               "C1 budget (1/2000)(1-|m|) in rescaled coordinates"});
    }
    if (!sweepEps.empty()) {
        std::ostringstream sw;
        sw << "eps,ok,radius,kind\n";
        for (double e : sweepEps) {
            try {
                SkewProduct sk = SkewProduct::make(p, P.d, P.kappa, e, 0.0);
                MisiurewiczWitness w = misiurewicz_certify(sk, P.crit, P.nPush, P.nPull, P.gridN, P.tol);
                sw << format_double(e) << ",1," << format_double(w.witness.radius) << ",\n";
            } catch (const Error& err) {
                sw << format_double(e) << ",0,," << err.kind() << '\n';
            }
        }
        write_text(ctx.artifact("eps_sweep.csv"), sw.str());
    }
    ctx.result["delta"] = skew.delta;
    ctx.result["pushSymbols"] = mw.pushSymbols;
    ctx.result["radius"] = mw.witness.radius;
    ctx.result["survived"] = survived;
    ctx.certifiedFalse = !ctx.clauses.all_pass();
}

// ---- topology ----

void cmd_topology(RunContext& ctx) {
    auto& c = ctx.cfg;
    const cplx a1 = c.complex("p1", 0.5);  // p(z) = z^3 + p1 z
    const int res = grid_or(ctx, 1024);
    const int maxIter = c.integer("maxIter", 256);
    const int verifyFactor = c.integer("verifyFactor", 2);
    const cplx alpha = c.complex("alpha", 0.7);
    const double phase = c.real("epsPhase", kPi / 2);
    const double controlPhase = c.real("controlPhase", 0.0);
    const double epsMin = c.real("epsMin", 1e-3), epsMax = c.real("epsMax", 1e-1);
    const int epsN = c.integer("epsN", 1000);
    const double rho = c.real("rho", 0.1);
    const int loopN = c.integer("loopSamples", 1024);
    const double extent = c.real("extent", 1.5);
    c.reject_unused();
    if (verifyFactor < 1) throw InvalidArgument("verifyFactor must be >= 1");
    require_positive(extent, "extent");

    const int d = 3;
    const Polynomial1D p({0.0, a1, 0.0, 1.0});
    // Repelling fixed point on the basin boundary: z^2 = 1 - p1.
    const cplx anchor = std::sqrt(1.0 - a1);
    const Viewport vp{-extent, extent, -extent, extent};
    RegionMap map = basin_classify(p, {0.0}, vp, res, res, maxIter);
    RegionMap fine = basin_classify(p, {0.0}, vp, res * verifyFactor, res * verifyFactor, maxIter);
    write_region_map(ctx.artifact("region.pgm"), map);
    write_json(ctx.artifact("region.json"), region_map_json(map));

    RefinementStats rs = refinement_check(map, fine);
    ctx.clauses.add(Clause{"band separates Inn from Out", band_separates(map), 0, 0, 0, ""});
    ctx.clauses.add_upper("refinement flips away from band", static_cast<double>(rs.flipsAwayFromBand), 0.5);
    ctx.clauses.add_lower("refinement agreement", rs.agreement(), 0.999);

    EpsScan scan = scan_epsilon(map, anchor, alpha, d, EpsGrid{epsMin, epsMax, epsN, phase}, &fine);
    json eps = json::array();
    for (const auto& e : scan.admissible) eps.push_back({{"eps", complex_json(e.eps)}, {"swapped", e.swapped}});
    json marg = json::array();
    for (const auto& e : scan.marginal) marg.push_back({{"eps", complex_json(e.eps)}, {"swapped", e.swapped}});
    write_json(ctx.artifact("eps.json"), json{{"admissible", eps}, {"marginal", marg}});
    ctx.clauses.add_lower("theta/pi distance to rationals (q <= 64)", scan.thetaRationalDistance, 1e-3);
    ctx.clauses.add_lower("admissible eps count", static_cast<double>(scan.admissible.size()), 0.0);
    ctx.result["theta"] = scan.theta;
    ctx.result["admissible"] = scan.admissible.size();
    ctx.result["marginal"] = scan.marginal.size();

    const Polynomial1D q = claim_q(alpha);
    if (!scan.admissible.empty()) {
        const cplx e = scan.admissible[scan.admissible.size() / 2].eps;
        auto t1 = transversality_check(p, q, e, anchor, rho, map, loopN, d);
        auto t2 = transversality_check(p, q, e, anchor, rho, map, 2 * loopN, d);
        ctx.clauses.add(Clause{"winding = 1 on admissible eps", t1.winding == 1, static_cast<double>(t1.winding), 1.0,
                               t1.minBandDistance, "margin is min |phi| on the radial sides"});
        ctx.clauses.add(Clause{"winding stable under sample doubling", t1.winding == t2.winding,
                               static_cast<double>(t2.winding), static_cast<double>(t1.winding), 0.0, ""});
        ctx.result["eps"] = complex_json(e);
    }
    // Control: same modulus range, phase chosen so both images fall in Out.
    EpsGrid cg{epsMin, epsMax, epsN, controlPhase};
    const cplx zp = std::polar(1.0, 2.0 * kPi / d), zm = std::conj(zp);
    // Largest both-Out eps whose loop keeps its radial sides off the band.
    auto ray = cg.values();
    std::optional<cplx> control;
    std::optional<TransversalityResult> tc;
    for (auto it = ray.rbegin(); it != ray.rend() && !control; ++it) {
        cplx za = anchor + *it * q(zm), zb = anchor + *it * q(zp);
        if (!vp.contains(za) || !vp.contains(zb) || region_of(map, za) != Region::Out || region_of(map, zb) != Region::Out)
            continue;
        try {
            tc = transversality_check(p, q, *it, anchor, rho, map, loopN, d);
            control = *it;
        } catch (const LoopHitsBand&) {
        }
    }
    if (control) {
        ctx.clauses.add(Clause{"winding = 0 on both-Out control", tc->winding == 0, static_cast<double>(tc->winding), 0.0,
                               tc->minBandDistance, ""});
        ctx.result["controlEps"] = complex_json(*control);
    } else {
        ctx.clauses.add(Clause{"winding = 0 on both-Out control", false, 0, 0, 0, "no usable both-Out eps on the control ray"});
    }
    ctx.certifiedFalse = !ctx.clauses.all_pass();
}

// ---- render ----

void cmd_render(RunContext& ctx) {
    auto& c = ctx.cfg;
    const int d = c.integer("d", 3);
    const cplx kappa = c.complex("kappa", 1e6);
    const double half = c.real("extent", 150.0);
    const cplx center = c.complex("center", 0.0);
    const int maxIter = c.integer("maxIter", 64);
    const double R = c.real("escapeRadius", std::abs(kappa) / 2);
    const int res = grid_or(ctx, 512);
    c.reject_unused();
    require_positive(half, "extent");
    if (d < 2) throw InvalidArgument("d must be >= 2");

    std::vector<cplx> coef(d + 1, 0.0);
    coef[0] = kappa;
    coef[d] = 1.0;
    const Polynomial1D q(coef);
    const Viewport vp{center.real() - half, center.real() + half, center.imag() - half, center.imag() + half};
    auto times = escape_time(q, vp, res, res, maxIter, R);
    std::vector<std::uint8_t> px(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) px[i] = static_cast<std::uint8_t>(255.0 * times[i] / maxIter);
    write_pgm(ctx.artifact("render.pgm"), res, res, px);
    const int comps = count_components(times, res, res, 2);
    write_json(ctx.artifact("render.json"),
               json{{"viewport", {{"xmin", vp.xmin}, {"xmax", vp.xmax}, {"ymin", vp.ymin}, {"ymax", vp.ymax}}},
                    {"nx", res}, {"ny", res}, {"maxIter", maxIter}, {"escapeRadius", R}, {"componentsLevel2", comps}});
    ctx.result["componentsLevel2"] = comps;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcert: certified checks for blenders and Misiurewicz intersections"};
    app.require_subcommand(1);
    std::string configPath, outDir = "out";
    std::vector<std::string> sets;
    std::uint64_t seed = 1;
    int threads = 0, gridN = 0;
    double tol = 1e-13;
    app.add_option("--config", configPath, "key=value parameter file");
    app.add_option("--out", outDir, "output directory");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--threads", threads, "worker threads (0: hardware)");
    app.add_option("--gridN", gridN, "grid / raster resolution override")->check(CLI::NonNegativeNumber);
    app.add_option("--tol", tol, "fixed-point tolerance")->check(CLI::PositiveNumber);
    app.add_option("--set", sets, "key=value override (repeatable, wins over --config)");
    const std::vector<std::pair<std::string, void (*)(RunContext&)>> commands = {
        {"certify-ifs", cmd_certify_ifs}, {"blender", cmd_blender}, {"misiurewicz", cmd_misiurewicz},
        {"topology", cmd_topology},       {"render", cmd_render}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name, "")->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunContext ctx;
    ctx.out = outDir;
    ctx.seed = seed;
    ctx.gridN = gridN;
    ctx.tol = tol;
    void (*fn)(RunContext&) = nullptr;
    for (const auto& [name, f] : commands)
        if (app.got_subcommand(name)) {
            ctx.command = name;
            fn = f;
        }

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    json error;
    try {
        fs::create_directories(ctx.out);
        set_thread_count(threads);
        if (!configPath.empty()) ctx.cfg.load_file(configPath);
        for (const auto& s : sets) ctx.cfg.set_pair(s, "--set");
        fn(ctx);
        rc = ctx.certifiedFalse ? 1 : 0;
    } catch (const HypothesisViolation& e) {
        error = {{"kind", e.kind()}, {"clause", e.clause}, {"message", e.what()}};
        rc = 2;
    } catch (const Error& e) {
        error = {{"kind", e.kind()}, {"message", e.what()}};
        rc = e.error_class() == ErrorClass::Precondition ? 2 : 3;
    } catch (const std::exception& e) {
        error = {{"kind", "InternalError"}, {"message", e.what()}};
        rc = 3;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json report;
    report["command"] = ctx.command;
    report["seed"] = ctx.seed;
    report["gridN"] = ctx.gridN;
    report["tol"] = ctx.tol;
    report["config"] = ctx.cfg.echo();
    report["clauses"] = ctx.clauses.to_json();
    report["result"] = ctx.result;
    report["artifacts"] = ctx.artifacts;
    report["status"] = rc == 0 ? "pass" : rc == 1 ? "fail" : "error";
    if (!error.is_null()) report["error"] = error;
    report["exitCode"] = rc;
    report["wallTimeSeconds"] = wall;
    try {
        write_json((ctx.out / "report.json").string(), report);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    std::cout << ctx.command << ": " << report["status"].get<std::string>();
    if (!error.is_null()) std::cout << " (" << error["message"].get<std::string>() << ")";
    std::cout << '\n';
    return rc;
}
