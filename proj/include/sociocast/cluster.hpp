#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sociocast::cluster {

using Point = std::vector<double>;

struct KMeansModel {
    std::vector<Point> centroids;
    std::vector<int> assignments;

    // Nearest centroid, ties broken by lowest index.
    int assign(const Point & p) const;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic under seed.
KMeansModel kmeans(const std::vector<Point> & points, int k, uint64_t seed,
                   int max_iterations = 100);

// One k-means++ D^2 draw: index of the next seed given the centroids chosen
// so far. Points at distance zero from every centroid fall back to the
// farthest point (deterministic).
int kmeanspp_next_seed(const std::vector<Point> & points, const std::vector<Point> & centroids,
                       std::mt19937_64 & rng);

struct GmmModel {
    // Diagonal covariance, one row per component.
    std::vector<Point> means;
    std::vector<Point> variances;
    std::vector<double> mixing;
    int iterations_run = 0;

    // Component with the highest responsibility, ties broken by lowest index.
    int assign(const Point & p) const;
};

// EM for a diagonal-covariance Gaussian mixture: k components, k-means
// initialization, tolerance 1e-4 on mean log-likelihood, max 200 iterations.
GmmModel gmm_fit(const std::vector<Point> & points, int k, uint64_t seed,
                 double tolerance = 1e-4, int max_iterations = 200);

double squared_distance(const Point & a, const Point & b);
double cosine_similarity(const Point & a, const Point & b);

}  // namespace sociocast::cluster
