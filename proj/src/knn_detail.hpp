#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "incident/classifiers.hpp"

namespace incident::detail {

// Votes for k = 1..max_k against one query. Neighbors are ordered by
// (squared Euclidean distance, row index); a tied vote takes the label of
// the single nearest neighbor.
std::vector<std::uint8_t> knn_sweep(const NeighborStore& store, std::span<const double> query,
                                    std::size_t max_k);

}  // namespace incident::detail
