#include "elicit/diversity/metrics.hpp"

#include "elicit/diversity/kernels.hpp"
#include "elicit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace elicit::diversity {

namespace {

void check_uniform_dims(const std::vector<domain::EmbeddingVector>& points) {
    if (points.empty()) return;
    const std::size_t d = points.front().dim();
    for (const auto& p : points)
        if (p.dim() != d)
            throw Error(ErrorCode::dimension_mismatch,
                        "embedding dimensions are not uniform");
}

std::size_t distinct_count(const std::vector<domain::EmbeddingVector>& points) {
    std::set<std::vector<double>> values;
    for (const auto& p : points) values.insert(p.values);
    return values.size();
}

std::vector<std::vector<double>> kmeans_pp_init(
    const std::vector<domain::EmbeddingVector>& points, int k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));

    std::uniform_int_distribution<std::size_t> first_pick(0, n - 1);
    centroids.push_back(points[first_pick(rng)].values);

    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& centroid : centroids)
                best = std::min(best, kernels::squared_distance(points[i].values, centroid));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                target -= d2[i];
                pick = i;
                if (target <= 0.0) break;
            }
        } else {
            // All mass on already-chosen values: take the first unseen point.
            for (std::size_t i = 0; i < n; ++i) {
                const bool taken = std::any_of(
                    centroids.begin(), centroids.end(),
                    [&](const auto& centroid) { return centroid == points[i].values; });
                if (!taken) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points[pick].values);
    }
    return centroids;
}

} // namespace

ClusterAssignment kmeans(const std::vector<domain::EmbeddingVector>& points, int k,
                         std::int64_t seed, std::vector<double>* inertia_trace) {
    const std::size_t n = points.size();
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw ValidationError("kmeans requires 1 <= k <= n");
    check_uniform_dims(points);
    if (distinct_count(points) < static_cast<std::size_t>(k))
        throw Error(ErrorCode::degenerate_clustering,
                    "kmeans: fewer distinct points than clusters");

    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    auto centroids = kmeans_pp_init(points, k, rng);
    const std::size_t d = points.front().dim();

    kernels::Assignment assignment;
    for (int iter = 0; iter < 300; ++iter) {
        assignment = kernels::assign_nearest(points, centroids);

        // Reseed any empty cluster with the point farthest from its centroid.
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (int label : assignment.labels) ++counts[static_cast<std::size_t>(label)];
        bool repaired = false;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::size_t farthest = 0;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto owner = static_cast<std::size_t>(assignment.labels[i]);
                if (counts[owner] <= 1) continue; // do not empty another cluster
                if (assignment.squared_dists[i] > far_dist) {
                    far_dist = assignment.squared_dists[i];
                    farthest = i;
                }
            }
            --counts[static_cast<std::size_t>(assignment.labels[farthest])];
            centroids[static_cast<std::size_t>(c)] = points[farthest].values;
            assignment.labels[farthest] = c;
            assignment.squared_dists[farthest] = 0.0;
            ++counts[static_cast<std::size_t>(c)];
            repaired = true;
        }
        if (repaired) assignment = kernels::assign_nearest(points, centroids);

        if (inertia_trace) {
            double inertia = 0.0;
            for (double sq : assignment.squared_dists) inertia += sq;
            inertia_trace->push_back(inertia);
        }

        std::vector<std::vector<double>> updated(static_cast<std::size_t>(k),
                                                 std::vector<double>(d, 0.0));
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignment.labels[i]);
            ++sizes[c];
            for (std::size_t j = 0; j < d; ++j) updated[c][j] += points[i].values[j];
        }
        double max_shift_sq = 0.0;
        for (int c = 0; c < k; ++c) {
            const auto cc = static_cast<std::size_t>(c);
            if (sizes[cc] == 0) continue;
            for (std::size_t j = 0; j < d; ++j)
                updated[cc][j] /= static_cast<double>(sizes[cc]);
            max_shift_sq = std::max(
                max_shift_sq, kernels::squared_distance(updated[cc], centroids[cc]));
            centroids[cc] = updated[cc];
        }
        if (std::sqrt(max_shift_sq) < 1e-8) break;
    }

    assignment = kernels::assign_nearest(points, centroids);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int label : assignment.labels) ++counts[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw Error(ErrorCode::degenerate_clustering,
                        "kmeans converged with an empty cluster");

    ClusterAssignment result;
    result.labels = assignment.labels;
    result.k = k;
    result.seed = seed;
    result.centroids.reserve(static_cast<std::size_t>(k));
    for (auto& centroid : centroids)
        result.centroids.push_back(domain::EmbeddingVector{std::move(centroid)});
    result.inertia = 0.0;
    for (double sq : assignment.squared_dists) result.inertia += sq;
    return result;
}

ClusterAssignment kmeans_best_of(const std::vector<domain::EmbeddingVector>& points,
                                 int k, std::int64_t seed, int restarts) {
    if (restarts < 1) throw ValidationError("kmeans_best_of requires restarts >= 1");
    ClusterAssignment best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        auto candidate = kmeans(points, k, seed + r * 7919, nullptr);
        if (!have || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have = true;
        }
    }
    return best;
}

SilhouetteResult silhouette(const std::vector<domain::EmbeddingVector>& points,
                            const ClusterAssignment& assignment) {
    const std::size_t n = points.size();
    if (assignment.k < 2)
        throw Error(ErrorCode::insufficient_clusters,
                    "silhouette requires at least 2 clusters");
    if (assignment.labels.size() != n)
        throw ValidationError("silhouette: labels/points size mismatch");

    const auto k = static_cast<std::size_t>(assignment.k);
    std::vector<std::size_t> sizes(k, 0);
    for (int label : assignment.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= k)
            throw ValidationError("silhouette: cluster id out of range");
        ++sizes[static_cast<std::size_t>(label)];
    }

    const auto dists = kernels::pairwise_distances(points);

    SilhouetteResult result;
    result.per_sample.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignment.labels[i]);
        if (sizes[own] <= 1) {
            result.per_sample[i] = 0.0; // singleton convention
            continue;
        }
        std::vector<double> sums(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sums[static_cast<std::size_t>(assignment.labels[j])] += dists[i][j];
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        result.per_sample[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }

    double total = 0.0;
    for (double s : result.per_sample) total += s;
    result.mean = total / static_cast<double>(n);
    return result;
}

BestKResult best_k(const std::vector<domain::EmbeddingVector>& points, int k_lo,
                   int k_hi, std::int64_t seed) {
    const auto n = static_cast<int>(points.size());
    if (k_lo < 2 || k_hi < k_lo || k_hi > n - 1)
        throw ValidationError("best_k requires 2 <= k_lo <= k_hi <= n-1");

    BestKResult result;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = k_lo; k <= k_hi; ++k) {
        const auto assignment = kmeans(points, k, seed);
        const double score = silhouette(points, assignment).mean;
        result.scores[k] = score;
        if (score > best_score) {
            best_score = score;
            result.best_k = k;
        }
    }
    return result;
}

double mean_distance_to_centroid(const std::vector<domain::EmbeddingVector>& points) {
    if (points.empty())
        throw ValidationError("mean_distance_to_centroid requires points");
    check_uniform_dims(points);
    const std::size_t d = points.front().dim();
    std::vector<double> centroid(d, 0.0);
    for (const auto& p : points)
        for (std::size_t j = 0; j < d; ++j) centroid[j] += p.values[j];
    for (double& c : centroid) c /= static_cast<double>(points.size());

    const auto dists = kernels::distances_to_point(points, centroid);
    double total = 0.0;
    for (double dist : dists) total += dist;
    return total / static_cast<double>(points.size());
}

std::vector<std::vector<double>> normalize_table(
    const std::vector<std::vector<double>>& raw) {
    if (raw.empty() || raw.front().empty())
        throw ValidationError("normalize_table requires a non-empty matrix");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : raw)
        for (double v : row) {
            if (!std::isfinite(v))
                throw ValidationError("normalize_table requires finite values");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    std::vector<std::vector<double>> out(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        out[r].resize(raw[r].size());
        for (std::size_t c = 0; c < raw[r].size(); ++c)
            out[r][c] = (hi > lo) ? (raw[r][c] - lo) / (hi - lo) : 0.5;
    }
    return out;
}

std::string to_string(DiversityMetric metric) {
    return metric == DiversityMetric::hull_volume ? "hull_volume"
                                                  : "mean_centroid_distance";
}

nlohmann::json DiversityTable::to_json() const {
    return nlohmann::json{{"row_names", row_names},
                          {"method_names", method_names},
                          {"raw", raw},
                          {"normalized", normalized},
                          {"metric", to_string(metric)}};
}

DiversityTable diversity_table(const std::vector<MethodEmbeddingSets>& sets,
                               DiversityMetric metric, int hull_target_dim) {
    if (sets.empty()) throw ValidationError("diversity_table requires methods");
    const auto& reference = sets.front();
    if (reference.rows.empty())
        throw ValidationError("diversity_table requires at least one row");
    for (const auto& method : sets) {
        if (method.rows.size() != reference.rows.size())
            throw ValidationError("diversity_table: methods disagree on rows");
        for (std::size_t r = 0; r < method.rows.size(); ++r) {
            if (method.rows[r].first != reference.rows[r].first)
                throw ValidationError("diversity_table: methods disagree on row names");
            if (method.rows[r].second.empty())
                throw ValidationError("diversity_table: empty embedding set for row " +
                                      method.rows[r].first);
        }
    }

    DiversityTable table;
    table.metric = metric;
    for (const auto& [name, _] : reference.rows) table.row_names.push_back(name);
    table.row_names.push_back("Mean");
    for (const auto& method : sets) table.method_names.push_back(method.method);

    const std::size_t n_rows = reference.rows.size();
    const std::size_t n_methods = sets.size();
    table.raw.assign(n_rows + 1, std::vector<double>(n_methods, 0.0));
    for (std::size_t m = 0; m < n_methods; ++m) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            const auto& points = sets[m].rows[r].second;
            const double value =
                metric == DiversityMetric::hull_volume
                    ? convex_hull_volume(points, hull_target_dim).volume
                    : mean_distance_to_centroid(points);
            table.raw[r][m] = value;
            sum += value;
        }
        table.raw[n_rows][m] = sum / static_cast<double>(n_rows);
    }
    table.normalized = normalize_table(table.raw);
    return table;
}

std::vector<std::string> theme_clusters(
    gw::Gateway& gateway, const std::vector<std::vector<std::string>>& groups,
    const std::string& stage, const std::string& sort_key) {
    if (groups.empty()) throw ValidationError("theme_clusters requires groups");
    for (const auto& group : groups)
        if (group.empty())
            throw ValidationError("theme_clusters: every group must be non-empty");

    const auto k = groups.size();
    std::string prompt = "Here are " + std::to_string(k) +
                         " groups of users, give a theme for each group.\n";
    for (std::size_t g = 0; g < k; ++g) {
        prompt += "Group " + std::to_string(g + 1) + ": ";
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            if (i > 0) prompt += "; ";
            prompt += groups[g][i];
        }
        prompt += "\n";
    }

    gw::ChatRequest request;
    request.stage = stage;
    request.sort_key = sort_key;
    request.system_text =
        "You summarize groups of simulated product users into short themes.";
    request.user_turns = {prompt};
    request.response_schema = schema::Schema::object(
        {{"themes", schema::Schema::array(schema::Schema::string(),
                                          static_cast<long>(k),
                                          static_cast<long>(k))}});

    const auto result = gateway.chat_structured(request);
    return result.record.at("themes").get<std::vector<std::string>>();
}

} // namespace elicit::diversity
