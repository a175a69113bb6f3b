#pragma once

#include <array>
#include <vector>

#include "elicit/domain.hpp"

namespace elicit::diversity {

/// Orthonormal principal-axis basis of a centered point set.
struct PcaBasis {
    std::vector<double> mean;
    std::vector<std::vector<double>> axes; // each length d, orthonormal
    int rank = 0;                          // numerical rank of the centered data

    int components() const { return static_cast<int>(axes.size()); }
};

/// Top principal axes via the Gram-matrix route (n x n eigenproblem), which
/// stays cheap when n << d as with text embeddings. Axes use a deterministic
/// sign convention: the largest-magnitude loading of each axis is positive.
PcaBasis pca_basis(const std::vector<domain::EmbeddingVector>& points,
                   int max_components);

/// Coordinates of each point in the basis: (x - mean) . axis_j.
std::vector<std::vector<double>> pca_project(
    const std::vector<domain::EmbeddingVector>& points, const PcaBasis& basis);

/// PCA onto the top-2 axes, zero-padded when the data has rank < 2.
std::vector<std::array<double, 2>> project_2d(
    const std::vector<domain::EmbeddingVector>& points);

} // namespace elicit::diversity
