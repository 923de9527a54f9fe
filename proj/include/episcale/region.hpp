#pragma once

// Two-patch eradication regions. With sigma^E, gamma^E and beta shared by
// both patches, the reduced reproduction number is a function of the
// stationary shares x = m_1^E and y = m_1^I only:
//
//   R0_bar(x, y) = A g(x, y)
//   A       = sigma_E gamma_E beta / (1 - sigma_E (1 - gamma_E))
//   g(x, y) = (s1 x + s2 (1 - x)) / (d1 y + d2 (1 - y)),  d_j = 1 - s_j (1 - gamma_j^I)
//
// where s_j = sigma_j^I. The level set R0_bar = 1 is a straight line.

#include "episcale/linalg.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace episcale {

struct TwoPatchSharedParams {
    double sigma_E = 0;
    double gamma_E = 0;
    double beta = 0;
};

struct TwoPatchInfectiousParams {
    double sigma1_I = 0;
    double gamma1_I = 0;
    double sigma2_I = 0;
    double gamma2_I = 0;
};

/// Throw ValidationError on values outside (0,1) (beta: (0,1]).
void validate(const TwoPatchSharedParams& shared);
void validate(const TwoPatchInfectiousParams& ip);

double two_patch_A(const TwoPatchSharedParams& shared);

/// x, y in [0,1]; throws std::domain_error otherwise.
double two_patch_g(double x, double y, const TwoPatchInfectiousParams& ip);

/// A g(x, y)
double two_patch_r0_bar(double x, double y, const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip);

/// Local reproduction numbers of the two patches, A s_j / d_j.
std::array<double, 2> two_patch_local_r0(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip);

/// The patch roles swapped.
TwoPatchInfectiousParams swap_patches(const TwoPatchInfectiousParams& ip);

enum class Feasibility { None, UnderLine, OverLine };

std::string_view to_string(Feasibility f);

struct FeasibilityReport {
    /// In the caller's patch labels.
    Feasibility verdict = Feasibility::None;
    /// Patches were swapped internally so that R0^1 >= R0^2.
    bool relabeled = false;
    /// g(1,0) < 1/A and g(0,1) < 1/A, evaluated after relabeling
    bool under_line_condition = false;
    bool over_line_condition = false;
    double A = 0;
    std::array<double, 2> r0{};
    /// g at (0,0), (1,0), (0,1), (1,1) in the caller's labels
    std::array<double, 4> corners{};
};

/// Which corner of the unit square, if any, admits R0_bar < 1 while both
/// patches are endemic in isolation. Throws PreconditionError unless both
/// local reproduction numbers exceed 1.
FeasibilityReport eradication_feasibility(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip);

/// a x + b y + c = 0, the exact set where R0_bar = 1.
struct UnitLevelLine {
    double a = 0, b = 0, c = 0;

    double value(double x, double y) const noexcept { return a * x + b * y + c; }
    /// Euclidean distance of (x, y) to the line.
    double distance(double x, double y) const;
};

UnitLevelLine unit_level_line(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip);

struct RegionOptions {
    std::size_t resolution = 201;
    double boundary_tol = 1e-9;
    int workers = 1;
};

struct BoundaryVertex {
    double x = 0, y = 0;
    double r0_bar = 0;
    bool operator==(const BoundaryVertex&) const = default;
};

struct RegionReport {
    double A = 0;
    std::array<double, 2> r0{};
    /// Absent when a patch is not endemic in isolation.
    std::optional<FeasibilityReport> feasibility;
    std::size_t resolution = 0;
    /// grid(i, j) = R0_bar(x_i, y_j), x_i = i / (resolution - 1)
    Matrix grid;
    /// grid nodes with R0_bar < 1
    std::size_t eradication_nodes = 0;
    /// R0_bar = 1 crossings on grid edges, sorted by (x, y)
    std::vector<BoundaryVertex> boundary;
    double max_boundary_residual = 0;
    UnitLevelLine line;

    double x_at(std::size_t i) const noexcept { return static_cast<double>(i) / static_cast<double>(resolution - 1); }
};

/// Samples R0_bar on the grid and locates the R0_bar = 1 crossings on every
/// grid edge whose endpoints straddle 1. Throws ValidationError for
/// resolution < 2 or a non-positive tolerance, NumericalError if a crossing
/// misses boundary_tol.
RegionReport region_sweep(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                          const RegionOptions& options = {});

} // namespace episcale
