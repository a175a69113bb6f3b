#include "elicit/diversity/hull.hpp"

#include "elicit/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace elicit::diversity {

namespace {

struct Facet {
    std::vector<int> vertices;  // d vertex indices, simplicial
    std::vector<double> normal; // outward unit normal
    double offset = 0.0;        // plane: dot(normal, x) == offset
    bool alive = true;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Generalized cross product of the facet's edge vectors: the hyperplane
/// normal through vertices[0..d-1], up to sign and scale.
std::vector<double> hyperplane_normal(const std::vector<std::vector<double>>& coords,
                                      const std::vector<int>& vertices) {
    const int d = static_cast<int>(coords[static_cast<std::size_t>(vertices[0])].size());
    Eigen::MatrixXd edges(d - 1, d);
    for (int i = 1; i < d; ++i)
        for (int j = 0; j < d; ++j)
            edges(i - 1, j) = coords[static_cast<std::size_t>(vertices[static_cast<std::size_t>(i)])][static_cast<std::size_t>(j)] -
                              coords[static_cast<std::size_t>(vertices[0])][static_cast<std::size_t>(j)];
    std::vector<double> normal(static_cast<std::size_t>(d));
    Eigen::MatrixXd minor_mat(d - 1, d - 1);
    for (int j = 0; j < d; ++j) {
        int cc = 0;
        for (int c = 0; c < d; ++c) {
            if (c == j) continue;
            minor_mat.col(cc++) = edges.col(c);
        }
        const double det = (d == 1) ? 1.0 : minor_mat.determinant();
        normal[static_cast<std::size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * det;
    }
    return normal;
}

std::optional<Facet> make_facet(const std::vector<std::vector<double>>& coords,
                                std::vector<int> vertices,
                                const std::vector<double>& interior) {
    Facet facet;
    facet.vertices = std::move(vertices);
    std::sort(facet.vertices.begin(), facet.vertices.end());
    facet.normal = hyperplane_normal(coords, facet.vertices);
    double norm = std::sqrt(dot(facet.normal, facet.normal));
    if (norm <= 0.0 || !std::isfinite(norm)) return std::nullopt;
    for (double& v : facet.normal) v /= norm;
    facet.offset = dot(facet.normal, coords[static_cast<std::size_t>(facet.vertices[0])]);
    // Orient outward: the interior point must be strictly beneath the plane.
    if (dot(facet.normal, interior) > facet.offset) {
        for (double& v : facet.normal) v = -v;
        facet.offset = -facet.offset;
    }
    return facet;
}

double simplex_volume(const std::vector<std::vector<double>>& coords,
                      const std::vector<int>& vertices,
                      const std::vector<double>& apex) {
    const int d = static_cast<int>(apex.size());
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = coords[static_cast<std::size_t>(vertices[static_cast<std::size_t>(i)])][static_cast<std::size_t>(j)] -
                      apex[static_cast<std::size_t>(j)];
    double factorial = 1.0;
    for (int i = 2; i <= d; ++i) factorial *= i;
    return std::abs(m.determinant()) / factorial;
}

} // namespace

double hull_volume_exact(const std::vector<std::vector<double>>& coords) {
    const std::size_t n = coords.size();
    if (n == 0) return 0.0;
    const int d = static_cast<int>(coords.front().size());
    if (d == 0) return 0.0;

    if (d == 1) {
        double lo = coords[0][0];
        double hi = coords[0][0];
        for (const auto& c : coords) {
            lo = std::min(lo, c[0]);
            hi = std::max(hi, c[0]);
        }
        return hi - lo;
    }

    if (n < static_cast<std::size_t>(d) + 1) return 0.0;

    double scale = 0.0;
    for (const auto& c : coords)
        for (double v : c) scale = std::max(scale, std::abs(v));
    const double eps = 1e-9 * std::max(scale, 1.0);

    // Seed simplex: greedily pick affinely independent points by largest
    // residual against the span of the picks so far.
    std::vector<int> simplex{0};
    std::vector<std::vector<double>> ortho; // orthonormal spanning directions
    while (simplex.size() < static_cast<std::size_t>(d) + 1) {
        int best = -1;
        double best_res = eps;
        std::vector<double> best_dir;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::find(simplex.begin(), simplex.end(), static_cast<int>(i)) !=
                simplex.end())
                continue;
            std::vector<double> r(coords[i].size());
            for (std::size_t j = 0; j < r.size(); ++j)
                r[j] = coords[i][j] - coords[static_cast<std::size_t>(simplex[0])][j];
            for (const auto& b : ortho) {
                const double proj = dot(r, b);
                for (std::size_t j = 0; j < r.size(); ++j) r[j] -= proj * b[j];
            }
            const double res = std::sqrt(dot(r, r));
            if (res > best_res) {
                best_res = res;
                best = static_cast<int>(i);
                best_dir = std::move(r);
            }
        }
        if (best < 0) return 0.0; // rank-deficient: zero d-volume
        for (double& v : best_dir) v /= best_res;
        ortho.push_back(std::move(best_dir));
        simplex.push_back(best);
    }

    std::vector<double> interior(static_cast<std::size_t>(d), 0.0);
    for (int v : simplex)
        for (int j = 0; j < d; ++j)
            interior[static_cast<std::size_t>(j)] +=
                coords[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
    for (double& v : interior) v /= static_cast<double>(simplex.size());

    std::vector<Facet> facets;
    for (std::size_t skip = 0; skip < simplex.size(); ++skip) {
        std::vector<int> verts;
        for (std::size_t i = 0; i < simplex.size(); ++i)
            if (i != skip) verts.push_back(simplex[i]);
        auto facet = make_facet(coords, std::move(verts), interior);
        if (!facet)
            throw Error(ErrorCode::too_few_points,
                        "hull construction failed on a degenerate seed simplex");
        facets.push_back(std::move(*facet));
    }

    for (std::size_t p = 0; p < n; ++p) {
        if (std::find(simplex.begin(), simplex.end(), static_cast<int>(p)) !=
            simplex.end())
            continue;
        const auto& point = coords[p];

        std::vector<std::size_t> visible;
        for (std::size_t f = 0; f < facets.size(); ++f)
            if (facets[f].alive && dot(facets[f].normal, point) > facets[f].offset + eps)
                visible.push_back(f);
        if (visible.empty()) continue;

        // Ridge adjacency over alive facets: every ridge joins exactly two.
        std::map<std::vector<int>, std::vector<std::size_t>> ridges;
        for (std::size_t f = 0; f < facets.size(); ++f) {
            if (!facets[f].alive) continue;
            for (std::size_t skip = 0; skip < facets[f].vertices.size(); ++skip) {
                std::vector<int> ridge;
                for (std::size_t i = 0; i < facets[f].vertices.size(); ++i)
                    if (i != skip) ridge.push_back(facets[f].vertices[i]);
                ridges[ridge].push_back(f);
            }
        }

        std::vector<std::vector<int>> horizon;
        for (std::size_t f : visible) {
            for (std::size_t skip = 0; skip < facets[f].vertices.size(); ++skip) {
                std::vector<int> ridge;
                for (std::size_t i = 0; i < facets[f].vertices.size(); ++i)
                    if (i != skip) ridge.push_back(facets[f].vertices[i]);
                const auto& sharing = ridges[ridge];
                bool boundary = false;
                for (std::size_t other : sharing) {
                    if (other == f) continue;
                    if (std::find(visible.begin(), visible.end(), other) == visible.end())
                        boundary = true;
                }
                if (boundary) horizon.push_back(std::move(ridge));
            }
        }

        for (std::size_t f : visible) facets[f].alive = false;
        for (auto& ridge : horizon) {
            ridge.push_back(static_cast<int>(p));
            if (auto facet = make_facet(coords, ridge, interior))
                facets.push_back(std::move(*facet));
        }
    }

    double volume = 0.0;
    for (const auto& facet : facets)
        if (facet.alive) volume += simplex_volume(coords, facet.vertices, interior);
    return volume;
}

HullResult convex_hull_volume(const std::vector<domain::EmbeddingVector>& points,
                              int target_dim) {
    if (target_dim < 1) throw ValidationError("target_dim must be positive");
    if (points.size() < 2)
        throw Error(ErrorCode::too_few_points,
                    "convex_hull_volume requires at least 2 points");

    const int wanted = std::min<int>(target_dim, static_cast<int>(points.size()) - 1);
    HullResult result;
    result.basis = pca_basis(points, wanted);
    result.dim = wanted;
    if (result.basis.rank < wanted) {
        // Rank-deficient beyond the reduction: the d'-volume is exactly zero.
        result.volume = 0.0;
        result.degenerate = true;
        return result;
    }
    result.volume = hull_volume_exact(pca_project(points, result.basis));
    return result;
}

double hull_volume_in_basis(const std::vector<domain::EmbeddingVector>& points,
                            const PcaBasis& basis) {
    if (basis.components() == 0) return 0.0;
    return hull_volume_exact(pca_project(points, basis));
}

} // namespace elicit::diversity
