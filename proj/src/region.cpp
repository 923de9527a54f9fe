#include "episcale/region.hpp"

#include "episcale/errors.hpp"
#include "episcale/kernels.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace episcale {

namespace {

void require_open_unit(double v, const char* field)
{
    if (!(v > 0.0 && v < 1.0)) {
        throw ValidationError(field, "must lie strictly inside (0,1), got " + std::to_string(v));
    }
}

double denominator(double sigma, double gamma)
{
    return 1.0 - sigma * (1.0 - gamma);
}

} // namespace

void validate(const TwoPatchSharedParams& s)
{
    require_open_unit(s.sigma_E, "sigma_E");
    require_open_unit(s.gamma_E, "gamma_E");
    if (!(s.beta > 0.0 && s.beta <= 1.0)) {
        throw ValidationError("beta", "must lie in (0,1], got " + std::to_string(s.beta));
    }
}

void validate(const TwoPatchInfectiousParams& ip)
{
    require_open_unit(ip.sigma1_I, "sigma1_I");
    require_open_unit(ip.gamma1_I, "gamma1_I");
    require_open_unit(ip.sigma2_I, "sigma2_I");
    require_open_unit(ip.gamma2_I, "gamma2_I");
}

double two_patch_A(const TwoPatchSharedParams& s)
{
    return s.sigma_E * s.gamma_E * s.beta / denominator(s.sigma_E, s.gamma_E);
}

double two_patch_g(double x, double y, const TwoPatchInfectiousParams& ip)
{
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
        throw std::domain_error("two_patch_g: (x, y) must lie in [0,1]^2");
    }
    const double num = ip.sigma1_I * x + ip.sigma2_I * (1.0 - x);
    const double den = denominator(ip.sigma1_I, ip.gamma1_I) * y + denominator(ip.sigma2_I, ip.gamma2_I) * (1.0 - y);
    return num / den;
}

double two_patch_r0_bar(double x, double y, const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip)
{
    return two_patch_A(shared) * two_patch_g(x, y, ip);
}

std::array<double, 2> two_patch_local_r0(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip)
{
    const double A = two_patch_A(shared);
    return {A * ip.sigma1_I / denominator(ip.sigma1_I, ip.gamma1_I),
            A * ip.sigma2_I / denominator(ip.sigma2_I, ip.gamma2_I)};
}

TwoPatchInfectiousParams swap_patches(const TwoPatchInfectiousParams& ip)
{
    return {ip.sigma2_I, ip.gamma2_I, ip.sigma1_I, ip.gamma1_I};
}

std::string_view to_string(Feasibility f)
{
    switch (f) {
    case Feasibility::None: return "none";
    case Feasibility::UnderLine: return "under-line";
    case Feasibility::OverLine: return "over-line";
    }
    return "?";
}

FeasibilityReport eradication_feasibility(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip)
{
    validate(shared);
    validate(ip);
    FeasibilityReport out;
    out.A = two_patch_A(shared);
    out.r0 = two_patch_local_r0(shared, ip);
    out.corners = {two_patch_g(0, 0, ip), two_patch_g(1, 0, ip), two_patch_g(0, 1, ip), two_patch_g(1, 1, ip)};
    if (!(std::min(out.r0[0], out.r0[1]) > 1.0)) {
        throw PreconditionError("eradication_feasibility: both local reproduction numbers must exceed 1 (got " +
                                std::to_string(out.r0[0]) + ", " + std::to_string(out.r0[1]) + ")");
    }

    out.relabeled = out.r0[0] < out.r0[1];
    const TwoPatchInfectiousParams ordered = out.relabeled ? swap_patches(ip) : ip;
    const double threshold = 1.0 / out.A;
    out.under_line_condition = two_patch_g(1, 0, ordered) < threshold;
    out.over_line_condition = two_patch_g(0, 1, ordered) < threshold;

    Feasibility internal = Feasibility::None;
    if (out.under_line_condition) {
        internal = Feasibility::UnderLine;
    } else if (out.over_line_condition) {
        internal = Feasibility::OverLine;
    }
    // swapping the patches maps (x, y) to (1 - x, 1 - y), which exchanges the
    // corners (1,0) and (0,1)
    if (out.relabeled && internal != Feasibility::None) {
        internal = internal == Feasibility::UnderLine ? Feasibility::OverLine : Feasibility::UnderLine;
    }
    out.verdict = internal;
    return out;
}

double UnitLevelLine::distance(double x, double y) const
{
    const double norm = std::hypot(a, b);
    if (norm == 0.0) {
        throw std::domain_error("degenerate level line");
    }
    return std::abs(value(x, y)) / norm;
}

UnitLevelLine unit_level_line(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip)
{
    // A (s1 x + s2 (1 - x)) = d1 y + d2 (1 - y)
    const double A = two_patch_A(shared);
    const double d1 = denominator(ip.sigma1_I, ip.gamma1_I);
    const double d2 = denominator(ip.sigma2_I, ip.gamma2_I);
    return {A * (ip.sigma1_I - ip.sigma2_I), -(d1 - d2), A * ip.sigma2_I - d2};
}

// ---------------------------------------------------------------------------

namespace {

struct EdgeRoot {
    double t;
    double value;
};

// Root of f on [0, 1] given f(0) and f(1) of opposite sign.
template <class F>
EdgeRoot edge_root(F f)
{
    std::uintmax_t max_iter = 200;
    boost::math::tools::eps_tolerance<double> tol(52);
    const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, 1.0, tol, max_iter);
    const double fa = f(a);
    const double fb = f(b);
    return std::abs(fa) <= std::abs(fb) ? EdgeRoot{a, fa} : EdgeRoot{b, fb};
}

} // namespace

RegionReport region_sweep(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                          const RegionOptions& options)
{
    validate(shared);
    validate(ip);
    if (options.resolution < 2) {
        throw ValidationError("resolution", "must be at least 2");
    }
    if (!(options.boundary_tol > 0.0)) {
        throw ValidationError("boundary_tol", "must be positive");
    }

    RegionReport report;
    report.A = two_patch_A(shared);
    report.r0 = two_patch_local_r0(shared, ip);
    report.resolution = options.resolution;
    report.line = unit_level_line(shared, ip);
    try {
        report.feasibility = eradication_feasibility(shared, ip);
    } catch (const PreconditionError&) {
        report.feasibility.reset();
    }

    report.grid = options.workers > 1 ? sample_r0_grid_parallel(shared, ip, options.resolution, options.workers)
                                      : sample_r0_grid_serial(shared, ip, options.resolution);
    report.eradication_nodes = static_cast<std::size_t>((report.grid.array() < 1.0).count());

    const std::size_t n = options.resolution;
    const auto node = [&](std::size_t i) { return report.x_at(i); };
    const auto at = [&](std::size_t i, std::size_t j) {
        return report.grid(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    const double A = report.A;

    std::vector<BoundaryVertex> vertices;
    const auto emit = [&](double x, double y) {
        const double r = A * two_patch_g(x, y, ip);
        vertices.push_back({x, y, r});
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = at(i, j) - 1.0;
            if (v == 0.0) {
                emit(node(i), node(j));
                continue;
            }
            if (i + 1 < n) {
                const double w = at(i + 1, j) - 1.0;
                if ((v < 0.0) != (w < 0.0) && w != 0.0) {
                    const double x0 = node(i), x1 = node(i + 1), y = node(j);
                    const auto root = edge_root([&](double t) {
                        return A * two_patch_g(std::clamp(x0 + t * (x1 - x0), 0.0, 1.0), y, ip) - 1.0;
                    });
                    emit(std::clamp(x0 + root.t * (x1 - x0), 0.0, 1.0), y);
                }
            }
            if (j + 1 < n) {
                const double w = at(i, j + 1) - 1.0;
                if ((v < 0.0) != (w < 0.0) && w != 0.0) {
                    const double y0 = node(j), y1 = node(j + 1), x = node(i);
                    const auto root = edge_root([&](double t) {
                        return A * two_patch_g(x, std::clamp(y0 + t * (y1 - y0), 0.0, 1.0), ip) - 1.0;
                    });
                    emit(x, std::clamp(y0 + root.t * (y1 - y0), 0.0, 1.0));
                }
            }
        }
    }

    std::sort(vertices.begin(), vertices.end(), [](const BoundaryVertex& a, const BoundaryVertex& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    // a crossing exactly at a node can be found from two edges
    const auto close = [](const BoundaryVertex& a, const BoundaryVertex& b) {
        return std::abs(a.x - b.x) <= 1e-12 && std::abs(a.y - b.y) <= 1e-12;
    };
    vertices.erase(std::unique(vertices.begin(), vertices.end(), close), vertices.end());

    for (const auto& v : vertices) {
        report.max_boundary_residual = std::max(report.max_boundary_residual, std::abs(v.r0_bar - 1.0));
    }
    if (report.max_boundary_residual >= options.boundary_tol) {
        throw NumericalError("region_sweep: boundary vertex misses R0_bar = 1 by " +
                             std::to_string(report.max_boundary_residual));
    }
    report.boundary = std::move(vertices);
    return report;
}

} // namespace episcale
