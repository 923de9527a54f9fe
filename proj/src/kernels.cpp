#include "episcale/kernels.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace episcale {

namespace {

void check_resolution(std::size_t resolution)
{
    if (resolution < 2) {
        throw std::invalid_argument("grid resolution must be at least 2");
    }
}

void check_batch(std::span<const MetapopModel> models, std::span<const MetapopState> starts)
{
    if (models.size() != starts.size()) {
        throw std::invalid_argument("classify batch: " + std::to_string(models.size()) + " models but " +
                                    std::to_string(starts.size()) + " start states");
    }
}

} // namespace

Matrix sample_r0_grid_serial(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                             std::size_t resolution)
{
    check_resolution(resolution);
    const auto n = static_cast<Eigen::Index>(resolution);
    const double A = two_patch_A(shared);
    const double h = 1.0 / static_cast<double>(resolution - 1);
    Matrix grid(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            grid(i, j) = A * two_patch_g(static_cast<double>(i) * h, static_cast<double>(j) * h, ip);
        }
    }
    return grid;
}

Matrix sample_r0_grid_parallel(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                               std::size_t resolution, int workers)
{
    check_resolution(resolution);
    const auto n = static_cast<Eigen::Index>(resolution);
    const double A = two_patch_A(shared);
    const double h = 1.0 / static_cast<double>(resolution - 1);
    Matrix grid(n, n);
    // each thread owns whole columns of the column-major grid
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            grid(i, j) = A * two_patch_g(static_cast<double>(i) * h, static_cast<double>(j) * h, ip);
        }
    }
    return grid;
}

std::vector<ClassifyResult> classify_batch_serial(std::span<const MetapopModel> models,
                                                  std::span<const MetapopState> starts, const ClassifyOptions& options)
{
    check_batch(models, starts);
    validate(options);
    std::vector<ClassifyResult> out;
    out.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        out.push_back(classify_full(models[i], starts[i], options));
    }
    return out;
}

std::vector<ClassifyResult> classify_batch_parallel(std::span<const MetapopModel> models,
                                                    std::span<const MetapopState> starts,
                                                    const ClassifyOptions& options, int workers)
{
    check_batch(models, starts);
    validate(options);
    std::vector<ClassifyResult> out(models.size());
    std::vector<std::string> errors(models.size());
    const auto count = static_cast<std::ptrdiff_t>(models.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = classify_full(models[k], starts[k], options);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("classify batch entry " + std::to_string(i) + ": " + errors[i]);
        }
    }
    return out;
}

} // namespace episcale
