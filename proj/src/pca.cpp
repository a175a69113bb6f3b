#include "elicit/diversity/pca.hpp"

#include "elicit/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace elicit::diversity {

PcaBasis pca_basis(const std::vector<domain::EmbeddingVector>& points,
                   int max_components) {
    const std::size_t n = points.size();
    if (n == 0) throw Error(ErrorCode::too_few_points, "pca_basis requires points");
    const std::size_t d = points.front().dim();
    for (const auto& p : points)
        if (p.dim() != d)
            throw Error(ErrorCode::dimension_mismatch, "pca_basis: ragged dimensions");

    PcaBasis basis;
    basis.mean.assign(d, 0.0);
    for (const auto& p : points)
        for (std::size_t j = 0; j < d; ++j) basis.mean[j] += p.values[j];
    for (double& m : basis.mean) m /= static_cast<double>(n);

    Eigen::MatrixXd centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                points[i].values[j] - basis.mean[j];

    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::dimension_mismatch, "pca_basis: eigensolver failed");

    const Eigen::VectorXd eigenvalues = solver.eigenvalues(); // ascending
    const double max_eig = eigenvalues.size() > 0 ? eigenvalues(eigenvalues.size() - 1) : 0.0;
    const double tol = std::max(max_eig * 1e-12, 1e-18);

    int rank = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        if (eigenvalues(i) > tol) ++rank;
    basis.rank = rank;

    const int take = std::min(max_components, rank);
    for (int c = 0; c < take; ++c) {
        const Eigen::Index col = eigenvalues.size() - 1 - c; // descending order
        const double lambda = eigenvalues(col);
        Eigen::VectorXd axis = centered.transpose() * solver.eigenvectors().col(col);
        axis /= std::sqrt(lambda);

        // Deterministic sign: flip so the largest-magnitude loading is positive.
        Eigen::Index max_idx = 0;
        axis.cwiseAbs().maxCoeff(&max_idx);
        if (axis(max_idx) < 0.0) axis = -axis;

        basis.axes.emplace_back(axis.data(), axis.data() + axis.size());
    }
    return basis;
}

std::vector<std::vector<double>> pca_project(
    const std::vector<domain::EmbeddingVector>& points, const PcaBasis& basis) {
    std::vector<std::vector<double>> projected(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].dim() != basis.mean.size())
            throw Error(ErrorCode::dimension_mismatch,
                        "pca_project: point dimension does not match basis");
        std::vector<double> coords;
        coords.reserve(basis.axes.size());
        for (const auto& axis : basis.axes) {
            double dot = 0.0;
            for (std::size_t j = 0; j < axis.size(); ++j)
                dot += (points[i].values[j] - basis.mean[j]) * axis[j];
            coords.push_back(dot);
        }
        projected[i] = std::move(coords);
    }
    return projected;
}

std::vector<std::array<double, 2>> project_2d(
    const std::vector<domain::EmbeddingVector>& points) {
    if (points.size() < 2)
        throw ValidationError("project_2d requires at least 2 points");
    const PcaBasis basis = pca_basis(points, 2);
    const auto coords = pca_project(points, basis);
    std::vector<std::array<double, 2>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out[i][0] = coords[i].size() > 0 ? coords[i][0] : 0.0;
        out[i][1] = coords[i].size() > 1 ? coords[i][1] : 0.0;
    }
    return out;
}

} // namespace elicit::diversity
