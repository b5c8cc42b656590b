#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blend/complexgeo.hpp"
#include "blend/polynomial.hpp"
#include "blend/report.hpp"

namespace blend {

struct Viewport {
    double xmin = -1.5;
    double xmax = 1.5;
    double ymin = -1.5;
    double ymax = 1.5;

    bool valid() const { return xmax > xmin && ymax > ymin; }
    bool contains(cplx z) const;
};

enum class Region : std::uint8_t { Inn = 0, NearE = 1, Out = 2 };

const char* region_name(Region r);

// Cells are indexed (ix, iy) with iy = 0 at ymin; labels are row-major.
struct RegionMap {
    Viewport viewport;
    int nx = 0;
    int ny = 0;
    std::vector<Region> labels;
    // 1 where the cell belongs to the attracted component containing the cycle.
    std::vector<std::uint8_t> basin;
    // Marching-squares polylines on the basin indicator; closed ones repeat the first vertex.
    std::vector<std::vector<cplx>> curveApprox;
    bool jordanLike = false;  // exactly one closed polyline

    double dx() const { return (viewport.xmax - viewport.xmin) / nx; }
    double dy() const { return (viewport.ymax - viewport.ymin) / ny; }
    double cell_diameter() const;
    cplx cell_center(int ix, int iy) const;
    Region at(int ix, int iy) const { return labels[static_cast<std::size_t>(iy) * nx + ix]; }
    std::size_t count(Region r) const;
};

RegionMap basin_classify(const Polynomial1D& p, const std::vector<cplx>& cycle, const Viewport& viewport,
                         int nx, int ny, int maxIter = 256);

Region region_of(const RegionMap& map, cplx z);

// True when no 4-connected path of non-NearE cells joins an Inn cell to an
// Out cell or to the frame.
bool band_separates(const RegionMap& map);

struct RefinementStats {
    std::size_t compared = 0;     // coarse Inn/Out cells
    std::size_t agree = 0;        // same label at the cell center on the fine map
    std::size_t flips = 0;        // Inn <-> Out
    std::size_t flipsAwayFromBand = 0;  // flips with no NearE cell in the 8-neighborhood
    double agreement() const { return compared ? static_cast<double>(agree) / compared : 1.0; }
};

RefinementStats refinement_check(const RegionMap& coarse, const RegionMap& fine);

// Signed distance to curveApprox: positive on Out, negative on Inn, and on
// NearE the sign of the containing cell's basin bit.
double signed_distance(const RegionMap& map, cplx z);

// Distance from x to the nearest rational with denominator <= maxDen.
double rational_distance(double x, int maxDen);

// q(w) = (w - 1)(w - alpha).
Polynomial1D claim_q(cplx alpha);

struct EpsGrid {
    double minModulus = 1e-3;
    double maxModulus = 1e-1;
    int n = 1000;
    double phase = 0.0;  // arg eps, fixed along the scan

    std::vector<cplx> values() const;
};

struct EpsCandidate {
    cplx eps;
    bool swapped = false;  // Inn at zeta+ and Out at zeta-
};

struct EpsScan {
    std::vector<EpsCandidate> admissible;
    std::vector<EpsCandidate> marginal;  // lost their classification on the verification map
    double theta = 0.0;                  // arg((zeta+ - alpha) / (zeta- - alpha))
    double thetaRationalDistance = 0.0;  // distance of theta/pi to rationals with denominator <= 64
    bool thetaIrrational = false;
};

// Images anchor + eps q(zeta-/+) with zeta+- = e^{+-2 pi i / d}.
EpsScan scan_epsilon(const RegionMap& map, cplx anchor, const Polynomial1D& q, int d, const EpsGrid& grid,
                     const RegionMap* verify = nullptr);
EpsScan scan_epsilon(const RegionMap& map, cplx anchor, cplx alpha, int d, const EpsGrid& grid,
                     const RegionMap* verify = nullptr);

struct LoopSamples {
    std::vector<cplx> points;
    bool closed = true;
};

int winding_number(const LoopSamples& loop);

struct TransversalityResult {
    int winding = 0;
    double minBandDistance = 0.0;  // min |phi| along the radial sides
    std::size_t samples = 0;
};

// Loop w over the boundary of {1-rho <= |w| <= 1+rho, |arg w| <= 2 pi / d}, mapped
// by w -> (p(c) + eps q(w), w^d) and read through Phi = phi(z) - i(|w^d| - 1).
TransversalityResult transversality_check(const Polynomial1D& p, const Polynomial1D& q, cplx eps, cplx c,
                                          double rho, const RegionMap& map, int nSamples, int d = 3);

void write_region_map(const std::string& pgmPath, const RegionMap& map);
json region_map_json(const RegionMap& map);

// First k with |f^k(z)| > escapeRadius, capped at maxIter; one value per pixel,
// row-major with the first row at ymax.
std::vector<int> escape_time(const Polynomial1D& f, const Viewport& viewport, int nx, int ny, int maxIter,
                             double escapeRadius);
// 4-connected components of pixels whose escape time is at least minIter.
int count_components(const std::vector<int>& times, int nx, int ny, int minIter);

}  // namespace blend
