#pragma once

#include <vector>

#include "elicit/diversity/pca.hpp"
#include "elicit/domain.hpp"

namespace elicit::diversity {

struct HullResult {
    double volume = 0.0;
    int dim = 0;        // dimension the volume was measured in
    bool degenerate = false;
    PcaBasis basis;     // projection used; reusable for fixed-basis comparisons
};

/// Hypervolume of the convex hull after PCA reduction to
/// d' = min(target_dim, n-1). Input whose centered rank is below d' is
/// degenerate: it has zero d'-volume and is reported as 0 with the flag set.
HullResult convex_hull_volume(const std::vector<domain::EmbeddingVector>& points,
                              int target_dim);

/// Same computation under a caller-supplied projection basis. Lets callers
/// compare hulls of nested point sets in one fixed subspace.
double hull_volume_in_basis(const std::vector<domain::EmbeddingVector>& points,
                            const PcaBasis& basis);

/// Exact hull hypervolume of already low-dimensional coordinates
/// (incremental beneath-beyond construction; dimensions 1..8).
double hull_volume_exact(const std::vector<std::vector<double>>& coords);

} // namespace elicit::diversity
