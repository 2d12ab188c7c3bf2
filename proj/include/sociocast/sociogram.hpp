#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sociocast/ingest.hpp"
#include "sociocast/matrix.hpp"

#include <json.hpp>

namespace sociocast {

// The three per-window interaction graphs. conv is directed (row speaks
// toward column); prox and attn are symmetric. Weights are fractions of
// window seconds, so they live in [0,1] with zero diagonals.
struct SociogramTriple {
    Mat conv{kRosterSize};
    Mat prox{kRosterSize};
    Mat attn{kRosterSize};
    int window_index = 0;
    bool is_predicted = false;

    bool operator==(const SociogramTriple & o) const {
        return conv == o.conv && prox == o.prox && attn == o.attn &&
               window_index == o.window_index && is_predicted == o.is_predicted;
    }
};

struct NetworkMetrics {
    double density = 0.0;
    double reciprocity = 0.0;  // 1.0 for undirected graphs by symmetry
    std::vector<double> eigenvector_centrality;  // unit L2 norm, non-negative
    double clustering = 0.0;
};

struct FusedMetrics {
    double density = 0.0;
    double reciprocity = 0.0;  // conv only; symmetric modalities are degenerate
    double clustering = 0.0;
    std::array<double, 3> pca_weights{};  // conv, prox, attn; sums to 1
    bool uniform_fallback = false;        // history too short for PCA
};

struct ModalityMetrics {
    NetworkMetrics conv, prox, attn;
};

// weight(i,j) = active seconds / window length per modality.
SociogramTriple build_sociograms(const ingest::WindowSeries & window);

inline constexpr double kDefaultBinarizeThreshold = 1.0 / 32.0;  // any activity

// edge = weight >= threshold, mapped to weights {0,1}. threshold in (0,1].
SociogramTriple binarize(const SociogramTriple & g, double threshold = kDefaultBinarizeThreshold);

// Density, reciprocity, eigenvector centrality (power iteration, tol 1e-10,
// max 1000 iterations) and mean local clustering of one modality matrix.
// Edges are the nonzero off-diagonal entries. Directed clustering uses the
// OR-symmetrized graph. An empty graph gets the uniform centrality vector.
NetworkMetrics network_metrics(const Mat & g, bool directed);

ModalityMetrics triple_metrics(const SociogramTriple & g);

// PCA-weighted fusion over a metric history: modality weights are the
// explained-variance-ratio shares from the eigendecomposition of the
// 3x3 across-modality covariance of stacked (density, reciprocity,
// clustering) observations. Histories shorter than 2 windows fall back to
// uniform weights, flagged.
FusedMetrics fuse_metrics(const std::vector<ModalityMetrics> & history);

// Sum of elementwise minima over sum of elementwise maxima, off-diagonal
// entries only. Both-zero matrices compare as 1.0 (perfect agreement on
// absence); callers flag that case in reports via both_zero.
double weighted_jaccard(const Mat & a, const Mat & b, bool * both_zero = nullptr);

nlohmann::ordered_json triple_to_json(const SociogramTriple & g, const Roster & roster);
SociogramTriple triple_from_json(const nlohmann::json & j);

}  // namespace sociocast
