#include "sociocast/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sociocast::cluster {

namespace {
constexpr double kVarianceFloor = 1e-6;
constexpr double kLog2Pi = 1.8378770664093453;
}  // namespace

double squared_distance(const Point & a, const Point & b) {
    double s = 0.0;
    for (size_t d = 0; d < a.size(); ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

double cosine_similarity(const Point & a, const Point & b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t d = 0; d < a.size(); ++d) {
        dot += a[d] * b[d];
        na += a[d] * a[d];
        nb += b[d] * b[d];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

int KMeansModel::assign(const Point & p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

int kmeanspp_next_seed(const std::vector<Point> & points, const std::vector<Point> & centroids,
                       std::mt19937_64 & rng) {
    if (points.empty()) throw std::invalid_argument("kmeanspp_next_seed: empty point set");
    std::vector<double> d2(points.size());
    double total = 0.0;
    for (size_t p = 0; p < points.size(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto & c : centroids) best = std::min(best, squared_distance(points[p], c));
        if (centroids.empty()) best = 1.0;
        d2[p] = best;
        total += best;
    }
    if (total <= 0.0) {
        // every point coincides with a centroid; farthest (= first) point
        return static_cast<int>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double target = unit(rng) * total;
    double acc = 0.0;
    for (size_t p = 0; p < points.size(); ++p) {
        acc += d2[p];
        if (acc >= target) return static_cast<int>(p);
    }
    return static_cast<int>(points.size()) - 1;
}

KMeansModel kmeans(const std::vector<Point> & points, int k, uint64_t seed, int max_iterations) {
    if (points.empty()) throw std::invalid_argument("kmeans: empty point set");
    if (k <= 0) throw std::invalid_argument("kmeans: k must be > 0");

    std::mt19937_64 rng(seed);
    KMeansModel model;
    std::uniform_int_distribution<size_t> first(0, points.size() - 1);
    model.centroids.push_back(points[first(rng)]);
    while (static_cast<int>(model.centroids.size()) < k) {
        int next = kmeanspp_next_seed(points, model.centroids, rng);
        model.centroids.push_back(points[static_cast<size_t>(next)]);
    }

    model.assignments.assign(points.size(), -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (size_t p = 0; p < points.size(); ++p) {
            int c = model.assign(points[p]);
            if (c != model.assignments[p]) {
                model.assignments[p] = c;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        std::vector<Point> sums(static_cast<size_t>(k), Point(points[0].size(), 0.0));
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (size_t p = 0; p < points.size(); ++p) {
            auto c = static_cast<size_t>(model.assignments[p]);
            ++counts[c];
            for (size_t d = 0; d < points[p].size(); ++d) sums[c][d] += points[p][d];
        }
        for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (size_t d = 0; d < sums[c].size(); ++d) {
                model.centroids[c][d] = sums[c][d] / counts[c];
            }
        }
    }
    return model;
}

int GmmModel::assign(const Point & p) const {
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < means.size(); ++c) {
        double ll = mixing[c] > 0.0 ? std::log(mixing[c]) : -1e300;
        for (size_t d = 0; d < p.size(); ++d) {
            double var = variances[c][d];
            double diff = p[d] - means[c][d];
            ll += -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
        }
        if (ll > best_ll) {
            best_ll = ll;
            best = static_cast<int>(c);
        }
    }
    return best;
}

GmmModel gmm_fit(const std::vector<Point> & points, int k, uint64_t seed, double tolerance,
                 int max_iterations) {
    if (static_cast<int>(points.size()) < k) {
        throw std::invalid_argument("gmm_fit: need at least k points");
    }
    const size_t dims = points[0].size();
    const size_t n = points.size();

    KMeansModel init = kmeans(points, k, seed);
    GmmModel model;
    model.means = init.centroids;
    model.variances.assign(static_cast<size_t>(k), Point(dims, kVarianceFloor));
    model.mixing.assign(static_cast<size_t>(k), 1.0 / k);
    {
        std::vector<int> counts(static_cast<size_t>(k), 0);
        std::vector<Point> sq(static_cast<size_t>(k), Point(dims, 0.0));
        for (size_t p = 0; p < n; ++p) {
            auto c = static_cast<size_t>(init.assignments[p]);
            ++counts[c];
            for (size_t d = 0; d < dims; ++d) {
                double diff = points[p][d] - model.means[c][d];
                sq[c][d] += diff * diff;
            }
        }
        for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
            if (counts[c] > 0) {
                model.mixing[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
                for (size_t d = 0; d < dims; ++d) {
                    model.variances[c][d] = std::max(sq[c][d] / counts[c], kVarianceFloor);
                }
            }
        }
    }

    std::vector<std::vector<double>> resp(n, std::vector<double>(static_cast<size_t>(k)));
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iterations; ++iter) {
        model.iterations_run = iter + 1;
        // E-step with log-sum-exp.
        double total_ll = 0.0;
        for (size_t p = 0; p < n; ++p) {
            std::vector<double> log_p(static_cast<size_t>(k));
            double max_lp = -std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
                double lp = model.mixing[c] > 0.0 ? std::log(model.mixing[c]) : -1e300;
                for (size_t d = 0; d < dims; ++d) {
                    double var = model.variances[c][d];
                    double diff = points[p][d] - model.means[c][d];
                    lp += -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
                }
                log_p[c] = lp;
                max_lp = std::max(max_lp, lp);
            }
            double sum = 0.0;
            for (double lp : log_p) sum += std::exp(lp - max_lp);
            double lse = max_lp + std::log(sum);
            total_ll += lse;
            for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
                resp[p][c] = std::exp(log_p[c] - lse);
            }
        }
        // M-step.
        for (size_t c = 0; c < static_cast<size_t>(k); ++c) {
            double weight = 0.0;
            for (size_t p = 0; p < n; ++p) weight += resp[p][c];
            if (weight < 1e-12) continue;  // starved component keeps its parameters
            model.mixing[c] = weight / static_cast<double>(n);
            for (size_t d = 0; d < dims; ++d) {
                double mean = 0.0;
                for (size_t p = 0; p < n; ++p) mean += resp[p][c] * points[p][d];
                mean /= weight;
                double var = 0.0;
                for (size_t p = 0; p < n; ++p) {
                    double diff = points[p][d] - mean;
                    var += resp[p][c] * diff * diff;
                }
                model.means[c][d] = mean;
                model.variances[c][d] = std::max(var / weight, kVarianceFloor);
            }
        }
        double mean_ll = total_ll / static_cast<double>(n);
        if (std::abs(mean_ll - prev_ll) < tolerance) break;
        prev_ll = mean_ll;
    }
    return model;
}

}  // namespace sociocast::cluster
