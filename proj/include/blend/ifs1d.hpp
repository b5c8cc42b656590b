#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blend/complexgeo.hpp"
#include "blend/report.hpp"

namespace blend {

struct Ifs1D {
    std::vector<AffineContraction> branches;
    std::string label;

    Ifs1D() = default;
    Ifs1D(std::vector<AffineContraction> b, std::string lbl = "");

    std::size_t size() const { return branches.size(); }
    // max_j 1/|m_j|, the Lipschitz constant of every inverse branch.
    double inverse_lipschitz() const;
};

struct CoveringCertificate {
    bool holds = false;
    Disk targetDisk;
    // min over samples of the best clearance of l_j^{-1}(z) inside the target.
    double margin = 0.0;
    int witnessGridN = 0;
    std::optional<cplx> counterexample;
    // Branch used at each base cell (row-major, row 0 at the bottom); -1 outside the disk.
    std::vector<int> branchChart;

    double lipschitz = 0.0;
    double cellDiameter = 0.0;        // base grid cell diameter h
    double finestCellDiameter = 0.0;  // smallest cell reached by refinement
    // min over leaf cells of clearance - Lip * h_cell; positive iff certified.
    double soundnessSlack = 0.0;
    std::size_t leafCells = 0;
    int maxDepthUsed = 0;
};

inline constexpr int kMaxRefineDepth = 8;

CoveringCertificate certify_covering(const Ifs1D& ifs, const Disk& target, int gridN = 64);

// l_j(z) = m z + e^{i theta} alpha_j (1-|m|) e^{2 pi i j/d}, j = 1..d.
Ifs1D lemma_ifs(int d, cplx m, const std::vector<cplx>& alphas, double theta = 0.0);
void check_lemma_ifs_hypotheses(int d, cplx m, const std::vector<cplx>& alphas);
CoveringCertificate certify_lemma_ifs(int d, cplx m, const std::vector<cplx>& alphas, int gridN = 64);
CoveringCertificate certify_rotated(int d, cplx m, const std::vector<cplx>& alphas, double theta,
                                    int gridN = 64);

inline constexpr std::size_t kMaxComposedBranches = 1000000;

// Branch order is lexicographic in (j_1, ..., j_n); the branch for that word is
// l_{j_n} ∘ ... ∘ l_{j_1}, so j_1 is applied first.
Ifs1D compose_power(const Ifs1D& ifs, int n);

// l_±(z) = m z ± alpha (1-|m|).
Ifs1D two_branch_ifs(cplx m, cplx alpha);
void check_lemma_ifs2_hypotheses(cplx m, cplx alpha);
CoveringCertificate certify_lemma_ifs2(cplx m, cplx alpha, int gridN = 64);

// Branch j whose preimage of D(z0, r) sits inside target with the largest clearance.
int select_branch(const Ifs1D& ifs, cplx z0, double r, const Disk& target);
// Clearance of affine_preimage(branch j, D(z0, r)) inside target.
double preimage_clearance(const AffineContraction& branch, cplx z0, double r, const Disk& target);

// Chaos game from 0: each point is an independent word of length burnIn drawn
// from the point's own RNG stream.
std::vector<cplx> sample_limit_set(const Ifs1D& ifs, std::size_t nPoints, int burnIn, std::uint64_t seed);

json certificate_json(const CoveringCertificate& cert);

}  // namespace blend
