#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "elicit/diversity/hull.hpp"
#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"

namespace elicit::diversity {

struct ClusterAssignment {
    std::vector<int> labels;
    std::vector<domain::EmbeddingVector> centroids;
    int k = 0;
    double inertia = 0.0;
    std::int64_t seed = 0;
};

/// Lloyd's iterations to convergence (max centroid shift < 1e-8 or 300
/// iterations) from a k-means++ seeding. Deterministic given (points, k,
/// seed). Empty clusters are repaired by reseeding the farthest point; if the
/// input has fewer than k distinct points this throws DegenerateClustering.
/// inertia_trace, when given, records the inertia after every assignment step.
ClusterAssignment kmeans(const std::vector<domain::EmbeddingVector>& points, int k,
                         std::int64_t seed, std::vector<double>* inertia_trace = nullptr);

/// Best-of-restarts kmeans: lowest inertia wins, first such seed on ties.
ClusterAssignment kmeans_best_of(const std::vector<domain::EmbeddingVector>& points,
                                 int k, std::int64_t seed, int restarts);

struct SilhouetteResult {
    double mean = 0.0;
    std::vector<double> per_sample;
};

/// Per-sample s = (b - a) / max(a, b) with Euclidean distances; samples in
/// singleton clusters score 0.
SilhouetteResult silhouette(const std::vector<domain::EmbeddingVector>& points,
                            const ClusterAssignment& assignment);

struct BestKResult {
    int best_k = 0;
    std::map<int, double> scores; // k -> mean silhouette
};

/// Argmax of mean silhouette over k in [k_lo, k_hi]; ties go to the smallest k.
BestKResult best_k(const std::vector<domain::EmbeddingVector>& points, int k_lo,
                   int k_hi, std::int64_t seed);

double mean_distance_to_centroid(const std::vector<domain::EmbeddingVector>& points);

/// Global min-max over all cells; a constant matrix maps to all 0.5.
std::vector<std::vector<double>> normalize_table(
    const std::vector<std::vector<double>>& raw);

enum class DiversityMetric { hull_volume, mean_centroid_distance };

std::string to_string(DiversityMetric metric);

struct DiversityTable {
    std::vector<std::string> row_names;    // input rows plus a final "Mean"
    std::vector<std::string> method_names;
    std::vector<std::vector<double>> raw;        // row x method
    std::vector<std::vector<double>> normalized; // row x method, in [0, 1]
    DiversityMetric metric = DiversityMetric::hull_volume;

    nlohmann::json to_json() const;
};

struct MethodEmbeddingSets {
    std::string method;
    std::vector<std::pair<std::string, std::vector<domain::EmbeddingVector>>> rows;
};

/// One metric value per (row, method) cell, plus an appended per-method Mean
/// row, normalized together. All methods must share the same row names in the
/// same order.
DiversityTable diversity_table(const std::vector<MethodEmbeddingSets>& sets,
                               DiversityMetric metric, int hull_target_dim = 5);

/// One chat call summarizing each group of role descriptions with a theme;
/// returns exactly one theme per group, in group order.
std::vector<std::string> theme_clusters(
    gw::Gateway& gateway, const std::vector<std::vector<std::string>>& groups,
    const std::string& stage = "metrics", const std::string& sort_key = "themes");

} // namespace elicit::diversity
