// Timing comparison of the serial reference kernels against the OpenMP
// variants on synthetic embedding data.

#include "elicit/diversity/kernels.hpp"

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

using elicit::diversity::kernels::Matrix;
using elicit::domain::EmbeddingVector;
namespace kernels = elicit::diversity::kernels;

namespace {

std::vector<EmbeddingVector> synthetic_points(std::size_t n, std::size_t dim,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<EmbeddingVector> points(n);
    for (auto& p : points) {
        p.values.resize(dim);
        for (auto& v : p.values) v = u(rng);
    }
    return points;
}

template <typename F>
double time_ms(F&& fn, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(
            best,
            std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-28s serial %9.2f ms   omp %9.2f ms   speedup %5.2fx\n", name,
                serial_ms, omp_ms, serial_ms / omp_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; omp variants fall back to serial\n");
#endif

    {
        const auto points = synthetic_points(3000, 128, 1);
        Matrix sink;
        const double serial_ms =
            time_ms([&] { sink = kernels::pairwise_distances_serial(points); });
        const double omp_ms =
            time_ms([&] { sink = kernels::pairwise_distances_omp(points); });
        report("pairwise_distances 3000x128", serial_ms, omp_ms);
    }

    {
        const auto points = synthetic_points(200000, 32, 2);
        const auto centroid_points = synthetic_points(64, 32, 3);
        std::vector<std::vector<double>> centroids;
        for (const auto& c : centroid_points) centroids.push_back(c.values);
        kernels::Assignment sink;
        const double serial_ms =
            time_ms([&] { sink = kernels::assign_nearest_serial(points, centroids); });
        const double omp_ms =
            time_ms([&] { sink = kernels::assign_nearest_omp(points, centroids); });
        report("assign_nearest 200k x 64", serial_ms, omp_ms);
    }

    {
        const auto points = synthetic_points(500000, 64, 4);
        const std::vector<double> center(64, 0.25);
        std::vector<double> sink;
        const double serial_ms =
            time_ms([&] { sink = kernels::distances_to_point_serial(points, center); });
        const double omp_ms =
            time_ms([&] { sink = kernels::distances_to_point_omp(points, center); });
        report("distances_to_point 500k x 64", serial_ms, omp_ms);
    }

    return 0;
}
