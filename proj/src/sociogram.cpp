#include "sociocast/sociogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sociocast {

namespace {

void check_square_nonnegative(const Mat & g) {
    if (g.n() <= 0) throw std::invalid_argument("network_metrics: empty matrix");
    for (double v : g.data()) {
        if (v < 0.0 || !std::isfinite(v)) {
            throw std::invalid_argument("network_metrics: negative or non-finite weight");
        }
    }
}

Mat binarize_nonzero(const Mat & g) {
    Mat b(g.n());
    for (int i = 0; i < g.n(); ++i) {
        for (int j = 0; j < g.n(); ++j) {
            if (i != j && g.at(i, j) > 0.0) b.at(i, j) = 1.0;
        }
    }
    return b;
}

std::vector<double> uniform_unit(int n) {
    return std::vector<double>(static_cast<size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
}

// Power iteration, tolerance 1e-10 on the L2 step, max 1000 iterations.
// Graphs where the iterate collapses to zero (no dominant eigenvector) get
// the uniform unit vector, same as the empty graph.
std::vector<double> eigenvector_centrality(const Mat & b) {
    const int n = b.n();
    std::vector<double> x = uniform_unit(n);
    std::vector<double> y(static_cast<size_t>(n));
    for (int iter = 0; iter < 1000; ++iter) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += b.at(i, j) * x[static_cast<size_t>(j)];
            y[static_cast<size_t>(i)] = s;
        }
        double norm = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        if (norm == 0.0) return uniform_unit(n);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            y[static_cast<size_t>(i)] /= norm;
            double d = y[static_cast<size_t>(i)] - x[static_cast<size_t>(i)];
            diff += d * d;
        }
        x = y;
        if (std::sqrt(diff) < 1e-10) break;
    }
    for (double & v : x) v = std::max(v, 0.0);
    double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (norm == 0.0) return uniform_unit(n);
    for (double & v : x) v /= norm;
    return x;
}

double mean_local_clustering(const Mat & b_sym) {
    const int n = b_sym.n();
    double total = 0.0;
    for (int v = 0; v < n; ++v) {
        std::vector<int> nbrs;
        for (int u = 0; u < n; ++u) {
            if (u != v && b_sym.at(v, u) > 0.0) nbrs.push_back(u);
        }
        const int k = static_cast<int>(nbrs.size());
        if (k < 2) continue;  // degree < 2 contributes 0
        int links = 0;
        for (size_t a = 0; a < nbrs.size(); ++a) {
            for (size_t c = a + 1; c < nbrs.size(); ++c) {
                if (b_sym.at(nbrs[a], nbrs[c]) > 0.0) ++links;
            }
        }
        total += 2.0 * links / (static_cast<double>(k) * (k - 1));
    }
    return total / n;
}

// Cyclic Jacobi eigendecomposition for small symmetric matrices.
// Returns eigenvalues and matching unit eigenvectors (columns).
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double> & values,
                  std::vector<std::vector<double>> & vectors) {
    const size_t n = a.size();
    vectors.assign(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-24) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    double vkp = vectors[k][p], vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    values.resize(n);
    for (size_t i = 0; i < n; ++i) values[i] = a[i][i];
}

}  // namespace

SociogramTriple build_sociograms(const ingest::WindowSeries & window) {
    const int len = window.length();
    if (len <= 0 || static_cast<int>(window.slices.size()) != len) {
        throw std::invalid_argument("build_sociograms: window slices do not match its length");
    }
    SociogramTriple g;
    g.window_index = window.window_index;
    for (const auto & slice : window.slices) {
        for (int op = 0; op < kOrderedPairs; ++op) {
            if (slice.conv[static_cast<size_t>(op)]) {
                auto [i, j] = ordered_pair_at(op);
                g.conv.at(i, j) += 1.0;
            }
        }
        for (int u = 0; u < kUnorderedPairs; ++u) {
            auto [i, j] = unordered_pair_at(u);
            if (slice.prox[static_cast<size_t>(u)]) {
                g.prox.at(i, j) += 1.0;
                g.prox.at(j, i) += 1.0;
            }
            if (slice.attn[static_cast<size_t>(u)]) {
                g.attn.at(i, j) += 1.0;
                g.attn.at(j, i) += 1.0;
            }
        }
    }
    for (Mat * m : {&g.conv, &g.prox, &g.attn}) {
        for (double & v : m->data()) v /= len;
    }
    return g;
}

SociogramTriple binarize(const SociogramTriple & g, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("binarize threshold must be in (0,1]");
    }
    SociogramTriple b;
    b.window_index = g.window_index;
    b.is_predicted = g.is_predicted;
    auto apply = [&](const Mat & src, Mat & dst) {
        for (int i = 0; i < src.n(); ++i) {
            for (int j = 0; j < src.n(); ++j) {
                if (i != j && src.at(i, j) >= threshold) dst.at(i, j) = 1.0;
            }
        }
    };
    apply(g.conv, b.conv);
    apply(g.prox, b.prox);
    apply(g.attn, b.attn);
    return b;
}

NetworkMetrics network_metrics(const Mat & g, bool directed) {
    check_square_nonnegative(g);
    const int n = g.n();
    Mat b = binarize_nonzero(g);

    int edges = 0, reciprocated = 0, undirected_edges = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (b.at(i, j) > 0.0) {
                ++edges;
                if (b.at(j, i) > 0.0) ++reciprocated;
                if (i < j) ++undirected_edges;
            } else if (i < j && b.at(j, i) > 0.0) {
                // counted once from the other direction
            }
        }
    }

    NetworkMetrics m;
    if (directed) {
        m.density = static_cast<double>(edges) / (n * (n - 1));
        m.reciprocity = edges > 0 ? static_cast<double>(reciprocated) / edges : 0.0;
    } else {
        m.density = static_cast<double>(undirected_edges) / (n * (n - 1) / 2);
        m.reciprocity = edges > 0 ? 1.0 : 0.0;
    }

    m.eigenvector_centrality = eigenvector_centrality(b);

    Mat b_sym(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && (b.at(i, j) > 0.0 || b.at(j, i) > 0.0)) b_sym.at(i, j) = 1.0;
        }
    }
    m.clustering = mean_local_clustering(b_sym);
    return m;
}

ModalityMetrics triple_metrics(const SociogramTriple & g) {
    return {network_metrics(g.conv, /*directed=*/true), network_metrics(g.prox, false),
            network_metrics(g.attn, false)};
}

FusedMetrics fuse_metrics(const std::vector<ModalityMetrics> & history) {
    if (history.empty()) throw std::invalid_argument("fuse_metrics: empty history");
    const ModalityMetrics & cur = history.back();

    FusedMetrics f;
    if (history.size() < 2) {
        f.pca_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
        f.uniform_fallback = true;
    } else {
        // Observations: one row per (window, metric kind), columns = modalities.
        std::vector<std::array<double, 3>> rows;
        rows.reserve(history.size() * 3);
        for (const auto & h : history) {
            rows.push_back({h.conv.density, h.prox.density, h.attn.density});
            rows.push_back({h.conv.reciprocity, h.prox.reciprocity, h.attn.reciprocity});
            rows.push_back({h.conv.clustering, h.prox.clustering, h.attn.clustering});
        }
        std::array<double, 3> mean{};
        for (const auto & r : rows) {
            for (int m = 0; m < 3; ++m) mean[static_cast<size_t>(m)] += r[static_cast<size_t>(m)];
        }
        for (double & v : mean) v /= static_cast<double>(rows.size());
        std::vector<std::vector<double>> cov(3, std::vector<double>(3, 0.0));
        for (const auto & r : rows) {
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                    cov[static_cast<size_t>(a)][static_cast<size_t>(b)] +=
                        (r[static_cast<size_t>(a)] - mean[static_cast<size_t>(a)]) *
                        (r[static_cast<size_t>(b)] - mean[static_cast<size_t>(b)]);
                }
            }
        }
        for (auto & row : cov) {
            for (double & v : row) v /= static_cast<double>(rows.size() - 1);
        }

        std::vector<double> values;
        std::vector<std::vector<double>> vectors;
        jacobi_eigen(cov, values, vectors);
        double total = std::accumulate(values.begin(), values.end(), 0.0);
        if (total <= 1e-15) {
            f.pca_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
            f.uniform_fallback = true;
        } else {
            // Explained-variance-ratio share per modality via squared loadings.
            std::array<double, 3> w{};
            for (size_t k = 0; k < 3; ++k) {
                double evr = values[k] / total;
                for (size_t m = 0; m < 3; ++m) w[m] += evr * vectors[m][k] * vectors[m][k];
            }
            double wsum = w[0] + w[1] + w[2];
            for (double & v : w) v /= wsum;
            f.pca_weights = w;
        }
    }

    const auto & w = f.pca_weights;
    f.density = w[0] * cur.conv.density + w[1] * cur.prox.density + w[2] * cur.attn.density;
    f.clustering =
        w[0] * cur.conv.clustering + w[1] * cur.prox.clustering + w[2] * cur.attn.clustering;
    // Symmetric modalities have degenerate reciprocity; fuse over conv only.
    f.reciprocity = cur.conv.reciprocity;
    return f;
}

double weighted_jaccard(const Mat & a, const Mat & b, bool * both_zero) {
    if (!a.same_shape(b)) throw std::invalid_argument("weighted_jaccard: shape mismatch");
    double min_sum = 0.0, max_sum = 0.0;
    for (int i = 0; i < a.n(); ++i) {
        for (int j = 0; j < a.n(); ++j) {
            if (i == j) continue;
            min_sum += std::min(a.at(i, j), b.at(i, j));
            max_sum += std::max(a.at(i, j), b.at(i, j));
        }
    }
    if (both_zero) *both_zero = max_sum == 0.0;
    return max_sum == 0.0 ? 1.0 : min_sum / max_sum;
}

nlohmann::ordered_json triple_to_json(const SociogramTriple & g, const Roster & roster) {
    auto mat_to_json = [](const Mat & m) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int i = 0; i < m.n(); ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int j = 0; j < m.n(); ++j) row.push_back(m.at(i, j));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    nlohmann::ordered_json j;
    j["window_index"] = g.window_index;
    j["is_predicted"] = g.is_predicted;
    j["participants"] = roster.ids();
    j["conv"] = mat_to_json(g.conv);
    j["prox"] = mat_to_json(g.prox);
    j["attn"] = mat_to_json(g.attn);
    return j;
}

SociogramTriple triple_from_json(const nlohmann::json & j) {
    SociogramTriple g;
    g.window_index = j.at("window_index").get<int>();
    g.is_predicted = j.at("is_predicted").get<bool>();
    auto mat_from_json = [](const nlohmann::json & rows) {
        Mat m(static_cast<int>(rows.size()));
        for (int i = 0; i < m.n(); ++i) {
            for (int j2 = 0; j2 < m.n(); ++j2) m.at(i, j2) = rows.at(i).at(j2).get<double>();
        }
        return m;
    };
    g.conv = mat_from_json(j.at("conv"));
    g.prox = mat_from_json(j.at("prox"));
    g.attn = mat_from_json(j.at("attn"));
    return g;
}

}  // namespace sociocast
