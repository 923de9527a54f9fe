#pragma once

// Data-parallel kernels. Each has a serial reference version; the OpenMP
// versions must return identical results for every worker count.

#include "episcale/classify.hpp"
#include "episcale/region.hpp"

#include <span>
#include <vector>

namespace episcale {

/// grid(i, j) = A g(x_i, y_j) on a resolution x resolution grid over [0,1]^2.
Matrix sample_r0_grid_serial(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                             std::size_t resolution);
Matrix sample_r0_grid_parallel(const TwoPatchSharedParams& shared, const TwoPatchInfectiousParams& ip,
                               std::size_t resolution, int workers);

/// classify_full on each (model, start) pair.
std::vector<ClassifyResult> classify_batch_serial(std::span<const MetapopModel> models,
                                                  std::span<const MetapopState> starts, const ClassifyOptions& options);
std::vector<ClassifyResult> classify_batch_parallel(std::span<const MetapopModel> models,
                                                    std::span<const MetapopState> starts,
                                                    const ClassifyOptions& options, int workers);

} // namespace episcale
