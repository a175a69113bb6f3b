#include "elicit/diversity/kernels.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace elicit::diversity::kernels {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

namespace {

void fill_distance_row(const std::vector<domain::EmbeddingVector>& points,
                       std::size_t i, std::vector<double>& row) {
    for (std::size_t j = 0; j < points.size(); ++j)
        row[j] = std::sqrt(squared_distance(points[i].values, points[j].values));
}

void assign_one(const std::vector<domain::EmbeddingVector>& points,
                const std::vector<std::vector<double>>& centroids, std::size_t i,
                Assignment& out) {
    double best = std::numeric_limits<double>::infinity();
    int best_label = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(points[i].values, centroids[c]);
        if (d < best) {
            best = d;
            best_label = static_cast<int>(c);
        }
    }
    out.labels[i] = best_label;
    out.squared_dists[i] = best;
}

} // namespace

Matrix pairwise_distances_serial(const std::vector<domain::EmbeddingVector>& points) {
    const std::size_t n = points.size();
    Matrix dists(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) fill_distance_row(points, i, dists[i]);
    return dists;
}

Matrix pairwise_distances_omp(const std::vector<domain::EmbeddingVector>& points) {
    const std::size_t n = points.size();
    Matrix dists(n, std::vector<double>(n, 0.0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        fill_distance_row(points, static_cast<std::size_t>(i),
                          dists[static_cast<std::size_t>(i)]);
    return dists;
}

Matrix pairwise_distances(const std::vector<domain::EmbeddingVector>& points) {
#ifdef _OPENMP
    return pairwise_distances_omp(points);
#else
    return pairwise_distances_serial(points);
#endif
}

Assignment assign_nearest_serial(const std::vector<domain::EmbeddingVector>& points,
                                 const std::vector<std::vector<double>>& centroids) {
    Assignment out;
    out.labels.resize(points.size());
    out.squared_dists.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) assign_one(points, centroids, i, out);
    return out;
}

Assignment assign_nearest_omp(const std::vector<domain::EmbeddingVector>& points,
                              const std::vector<std::vector<double>>& centroids) {
    Assignment out;
    out.labels.resize(points.size());
    out.squared_dists.resize(points.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(points.size()); ++i)
        assign_one(points, centroids, static_cast<std::size_t>(i), out);
    return out;
}

Assignment assign_nearest(const std::vector<domain::EmbeddingVector>& points,
                          const std::vector<std::vector<double>>& centroids) {
#ifdef _OPENMP
    return assign_nearest_omp(points, centroids);
#else
    return assign_nearest_serial(points, centroids);
#endif
}

std::vector<double> distances_to_point_serial(
    const std::vector<domain::EmbeddingVector>& points,
    const std::vector<double>& center) {
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = std::sqrt(squared_distance(points[i].values, center));
    return out;
}

std::vector<double> distances_to_point_omp(
    const std::vector<domain::EmbeddingVector>& points,
    const std::vector<double>& center) {
    std::vector<double> out(points.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(points.size()); ++i)
        out[static_cast<std::size_t>(i)] =
            std::sqrt(squared_distance(points[static_cast<std::size_t>(i)].values, center));
    return out;
}

std::vector<double> distances_to_point(
    const std::vector<domain::EmbeddingVector>& points,
    const std::vector<double>& center) {
#ifdef _OPENMP
    return distances_to_point_omp(points, center);
#else
    return distances_to_point_serial(points, center);
#endif
}

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

} // namespace elicit::diversity::kernels
