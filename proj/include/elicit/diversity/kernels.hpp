#pragma once

#include <cstddef>
#include <vector>

#include "elicit/domain.hpp"

namespace elicit::diversity::kernels {

// Data-parallel inner loops of the metrics core. Each kernel has a serial
// reference implementation and an OpenMP variant that parallelizes only over
// independent output elements, so both produce bit-identical results. The
// default entry points dispatch to the OpenMP variant when compiled with
// OpenMP and fall back to the serial reference otherwise.

using Matrix = std::vector<std::vector<double>>;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

/// Full n-by-n Euclidean distance matrix.
Matrix pairwise_distances_serial(const std::vector<domain::EmbeddingVector>& points);
Matrix pairwise_distances_omp(const std::vector<domain::EmbeddingVector>& points);
Matrix pairwise_distances(const std::vector<domain::EmbeddingVector>& points);

/// For each point, the index of the nearest centroid (ties -> lowest index)
/// and the squared distance to it.
struct Assignment {
    std::vector<int> labels;
    std::vector<double> squared_dists;
};

Assignment assign_nearest_serial(const std::vector<domain::EmbeddingVector>& points,
                                 const std::vector<std::vector<double>>& centroids);
Assignment assign_nearest_omp(const std::vector<domain::EmbeddingVector>& points,
                              const std::vector<std::vector<double>>& centroids);
Assignment assign_nearest(const std::vector<domain::EmbeddingVector>& points,
                          const std::vector<std::vector<double>>& centroids);

/// Euclidean distance from every point to a fixed center.
std::vector<double> distances_to_point_serial(
    const std::vector<domain::EmbeddingVector>& points, const std::vector<double>& center);
std::vector<double> distances_to_point_omp(
    const std::vector<domain::EmbeddingVector>& points, const std::vector<double>& center);
std::vector<double> distances_to_point(
    const std::vector<domain::EmbeddingVector>& points, const std::vector<double>& center);

/// True when the dispatching entry points run the OpenMP variants.
bool openmp_enabled();

} // namespace elicit::diversity::kernels
