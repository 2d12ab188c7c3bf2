#include "sociocast/context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "sociocast/errors.hpp"

namespace sociocast::context {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Shannon entropy (base 2) of a non-negative weight vector, 0*log0 = 0.
double shannon_entropy(const std::vector<double> & weights) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (w <= 0.0) continue;
        double p = w / total;
        h -= p * std::log2(p);
    }
    return h;
}

double column_variance(const std::vector<cluster::Point> & points, size_t col) {
    double mean = 0.0;
    for (const auto & p : points) mean += p[col];
    mean /= static_cast<double>(points.size());
    double var = 0.0;
    for (const auto & p : points) var += (p[col] - mean) * (p[col] - mean);
    return var / static_cast<double>(points.size());
}

const std::vector<std::string> & domain_descriptors(const std::string & domain) {
    static const std::vector<std::string> speaking = {"Infrequent Talker", "Moderate Talker",
                                                      "Frequent Talker"};
    static const std::vector<std::string> gaze = {"Low Gaze Activity", "Medium Gaze Activity",
                                                  "High Gaze Activity"};
    static const std::vector<std::string> locomotion = {"Static Mover", "Moderate Mover",
                                                        "Dynamic Mover"};
    if (domain == "speaking") return speaking;
    if (domain == "gaze") return gaze;
    return locomotion;
}

std::string descriptor_for(const std::string & domain, int rank, int k) {
    const auto & names = domain_descriptors(domain);
    if (k == static_cast<int>(names.size())) return names[static_cast<size_t>(rank)];
    return domain + " level " + std::to_string(rank);
}

DomainModel fit_domain(const std::vector<cluster::Point> & points, int k, uint64_t seed) {
    DomainModel model;
    model.k = k;

    bool degenerate = static_cast<int>(points.size()) < k;
    if (!degenerate) {
        for (size_t col = 0; col < points[0].size(); ++col) {
            if (column_variance(points, col) < 1e-12) {
                degenerate = true;
                break;
            }
        }
    }

    if (degenerate) {
        model.tertile_fallback = true;
        std::vector<double> values;
        values.reserve(points.size());
        for (const auto & p : points) values.push_back(p[0]);
        std::sort(values.begin(), values.end());
        auto cut_at = [&](double frac) {
            size_t idx = static_cast<size_t>(std::ceil(frac * static_cast<double>(values.size())));
            idx = std::min(std::max<size_t>(idx, 1), values.size()) - 1;
            return values[idx];
        };
        model.tertile_cuts = {cut_at(1.0 / 3), cut_at(2.0 / 3)};
        return model;
    }

    model.gmm = cluster::gmm_fit(points, k, seed);
    std::vector<int> order(static_cast<size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return model.gmm.means[static_cast<size_t>(a)][0] < model.gmm.means[static_cast<size_t>(b)][0];
    });
    model.rank_by_component.assign(static_cast<size_t>(k), 0);
    for (int rank = 0; rank < k; ++rank) {
        model.rank_by_component[static_cast<size_t>(order[static_cast<size_t>(rank)])] = rank;
    }
    return model;
}

ordered_json domain_to_json(const DomainModel & d) {
    ordered_json j;
    j["k"] = d.k;
    j["tertile_fallback"] = d.tertile_fallback;
    j["tertile_cuts"] = d.tertile_cuts;
    j["rank_by_component"] = d.rank_by_component;
    j["means"] = d.gmm.means;
    j["variances"] = d.gmm.variances;
    j["mixing"] = d.gmm.mixing;
    return j;
}

DomainModel domain_from_json(const json & j) {
    DomainModel d;
    d.k = j.at("k").get<int>();
    d.tertile_fallback = j.at("tertile_fallback").get<bool>();
    d.tertile_cuts = j.at("tertile_cuts").get<std::vector<double>>();
    d.rank_by_component = j.at("rank_by_component").get<std::vector<int>>();
    d.gmm.means = j.at("means").get<std::vector<cluster::Point>>();
    d.gmm.variances = j.at("variances").get<std::vector<cluster::Point>>();
    d.gmm.mixing = j.at("mixing").get<std::vector<double>>();
    return d;
}

}  // namespace

std::vector<ProfileFeatures> profile_features(const ingest::SessionData & session) {
    std::vector<ProfileFeatures> rows;
    for (int p = 0; p < kRosterSize; ++p) {
        ProfileFeatures row;
        row.session_id = session.session_id;
        row.participant_id = session.roster.id(p);

        const auto & feats = session.features[static_cast<size_t>(p)];
        bool any_speaking_feature = false;
        for (const auto & f : feats) {
            if (f.speaking) {
                any_speaking_feature = true;
                break;
            }
        }
        // Utterances: rising edges of the speaking indicator; derived from
        // outgoing conv when no speaking stream was recorded.
        bool prev = false;
        for (int t = 0; t < session.duration; ++t) {
            bool speaking = false;
            if (any_speaking_feature) {
                speaking = feats[static_cast<size_t>(t)].speaking.value_or(false);
            } else {
                const auto & slice = session.slice(t);
                for (int j = 0; j < kRosterSize; ++j) {
                    if (j != p && slice.conv[static_cast<size_t>(ordered_pair_index(p, j))]) {
                        speaking = true;
                        break;
                    }
                }
            }
            if (speaking && !prev) row.utterances += 1.0;
            prev = speaking;
        }

        // Gaze: fixation starts plus target-distribution entropy.
        std::map<std::string, double> target_counts;
        std::optional<std::string> prev_target;
        for (const auto & f : feats) {
            if (f.gaze_target) {
                target_counts[*f.gaze_target] += 1.0;
                if (!prev_target || *prev_target != *f.gaze_target) row.gaze_events += 1.0;
            }
            prev_target = f.gaze_target;
        }
        std::vector<double> counts;
        counts.reserve(target_counts.size());
        for (const auto & [id, c] : target_counts) counts.push_back(c);
        row.gaze_entropy = shannon_entropy(counts);

        // Locomotion: mean step speed and heading-octant entropy.
        std::array<double, 8> octants{};
        double speed_sum = 0.0;
        int steps = 0;
        for (int t = 1; t < session.duration; ++t) {
            const auto & a = feats[static_cast<size_t>(t - 1)];
            const auto & b = feats[static_cast<size_t>(t)];
            if (!(a.x && a.y && b.x && b.y)) continue;
            double dx = *b.x - *a.x;
            double dy = *b.y - *a.y;
            double dist = std::sqrt(dx * dx + dy * dy);
            speed_sum += dist;
            ++steps;
            if (dist > 1e-9) {
                double angle = std::atan2(dy, dx);  // [-pi, pi]
                int bin = std::min(7, static_cast<int>((angle + M_PI) / (2 * M_PI) * 8));
                octants[static_cast<size_t>(bin)] += 1.0;
            }
        }
        row.mean_speed = steps > 0 ? speed_sum / steps : 0.0;
        row.path_entropy = shannon_entropy({octants.begin(), octants.end()});
        rows.push_back(std::move(row));
    }
    return rows;
}

int DomainModel::assign(const cluster::Point & features) const {
    if (tertile_fallback) {
        double v = features[0];
        if (v <= tertile_cuts[0]) return 0;
        if (v <= tertile_cuts[1]) return 1;
        return 2;
    }
    return gmm.assign(features);
}

int DomainModel::rank_of(int component) const {
    if (tertile_fallback) return std::min(component, k - 1);
    return rank_by_component[static_cast<size_t>(component)];
}

BehavioralProfile ProfileModel::profile_for(const ProfileFeatures & row) const {
    BehavioralProfile profile;
    profile.participant_id = row.participant_id;

    int c = speaking.assign({row.utterances});
    profile.speaking = {c, descriptor_for("speaking", speaking.rank_of(c), k), row.utterances};
    c = gaze.assign({row.gaze_events, row.gaze_entropy});
    profile.gaze = {c, descriptor_for("gaze", gaze.rank_of(c), k), row.gaze_events};
    c = locomotion.assign({row.mean_speed, row.path_entropy});
    profile.locomotion = {c, descriptor_for("locomotion", locomotion.rank_of(c), k), 0.0};
    return profile;
}

ordered_json ProfileModel::to_json() const {
    ordered_json j;
    j["version"] = 1;
    j["kind"] = "profile_model";
    j["seed"] = seed;
    j["k"] = k;
    j["speaking"] = domain_to_json(speaking);
    j["gaze"] = domain_to_json(gaze);
    j["locomotion"] = domain_to_json(locomotion);
    return j;
}

ProfileModel ProfileModel::from_json(const json & j) {
    ProfileModel m;
    m.seed = j.at("seed").get<uint64_t>();
    m.k = j.at("k").get<int>();
    m.speaking = domain_from_json(j.at("speaking"));
    m.gaze = domain_from_json(j.at("gaze"));
    m.locomotion = domain_from_json(j.at("locomotion"));
    return m;
}

ProfileModel fit_behavioral_profiles(const std::vector<ProfileFeatures> & rows, int k,
                                     uint64_t seed) {
    if (rows.empty()) throw DataError("fit_behavioral_profiles: no feature rows");
    ProfileModel model;
    model.seed = seed;
    model.k = k;

    std::vector<cluster::Point> speaking, gaze, locomotion;
    for (const auto & r : rows) {
        speaking.push_back({r.utterances});
        gaze.push_back({r.gaze_events, r.gaze_entropy});
        locomotion.push_back({r.mean_speed, r.path_entropy});
    }
    model.speaking = fit_domain(speaking, k, seed);
    model.gaze = fit_domain(gaze, k, seed + 1);
    model.locomotion = fit_domain(locomotion, k, seed + 2);
    return model;
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

WindowFeatures window_features(const SociogramTriple & binary) {
    WindowFeatures f;
    std::vector<double> shares(kRosterSize, 0.0);
    for (int i = 0; i < kRosterSize; ++i) {
        for (int j = 0; j < kRosterSize; ++j) {
            if (i != j) shares[static_cast<size_t>(i)] += binary.conv.at(i, j);
        }
    }
    f.speaking_entropy = shannon_entropy(shares);
    auto metrics = triple_metrics(binary);
    f.conv_density = metrics.conv.density;
    f.prox_density = metrics.prox.density;
    f.attn_density = metrics.attn.density;
    int events = 0;
    for (int u = 0; u < kUnorderedPairs; ++u) {
        auto [i, j] = unordered_pair_at(u);
        if (binary.attn.at(i, j) > 0.0) ++events;
    }
    f.attention_events = events;
    return f;
}

int PhaseModel::assign(const WindowFeatures & f, int window_index) const {
    if (external) {
        int phase = external_labels.empty() ? 0 : external_labels.front().phase_id;
        for (const auto & l : external_labels) {
            if (l.window_index <= window_index) phase = l.phase_id;
        }
        return phase;
    }
    cluster::Point p = f.as_point();
    for (size_t d = 0; d < p.size(); ++d) p[d] = (p[d] - feature_mean[d]) / feature_sd[d];
    return km.assign(p);
}

std::string PhaseModel::label_of(int phase_id) const {
    if (external) {
        for (const auto & l : external_labels) {
            if (l.phase_id == phase_id && !l.label.empty()) return l.label;
        }
        return "Phase " + std::to_string(phase_id);
    }
    if (phase_id >= 0 && phase_id < static_cast<int>(labels.size())) {
        return labels[static_cast<size_t>(phase_id)];
    }
    return "Phase " + std::to_string(phase_id);
}

ordered_json PhaseModel::to_json() const {
    ordered_json j;
    j["version"] = 1;
    j["kind"] = "phase_model";
    j["seed"] = seed;
    j["external"] = external;
    j["centroids"] = km.centroids;
    j["feature_mean"] = feature_mean;
    j["feature_sd"] = feature_sd;
    j["labels"] = labels;
    ordered_json ext = ordered_json::array();
    for (const auto & l : external_labels) {
        ext.push_back({{"window_index", l.window_index}, {"phase_id", l.phase_id}, {"label", l.label}});
    }
    j["external_labels"] = std::move(ext);
    return j;
}

PhaseModel PhaseModel::from_json(const json & j) {
    PhaseModel m;
    m.seed = j.at("seed").get<uint64_t>();
    m.external = j.at("external").get<bool>();
    m.km.centroids = j.at("centroids").get<std::vector<cluster::Point>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_sd = j.at("feature_sd").get<std::vector<double>>();
    m.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto & l : j.at("external_labels")) {
        m.external_labels.push_back({l.at("window_index").get<int>(), l.at("phase_id").get<int>(),
                                     l.at("label").get<std::string>()});
    }
    return m;
}

PhaseModel fit_phases(const std::vector<WindowFeatures> & windows, int k, uint64_t seed) {
    if (windows.size() < 2) throw DataError("fit_phases: need at least 2 windows");
    PhaseModel model;
    model.seed = seed;

    std::vector<cluster::Point> points;
    points.reserve(windows.size());
    for (const auto & w : windows) points.push_back(w.as_point());
    const size_t dims = points[0].size();
    model.feature_mean.assign(dims, 0.0);
    model.feature_sd.assign(dims, 0.0);
    for (const auto & p : points) {
        for (size_t d = 0; d < dims; ++d) model.feature_mean[d] += p[d];
    }
    for (double & v : model.feature_mean) v /= static_cast<double>(points.size());
    for (const auto & p : points) {
        for (size_t d = 0; d < dims; ++d) {
            double diff = p[d] - model.feature_mean[d];
            model.feature_sd[d] += diff * diff;
        }
    }
    for (double & v : model.feature_sd) {
        v = std::sqrt(v / static_cast<double>(points.size()));
        if (v < 1e-9) v = 1.0;  // constant column standardizes to zero
    }
    for (auto & p : points) {
        for (size_t d = 0; d < dims; ++d) p[d] = (p[d] - model.feature_mean[d]) / model.feature_sd[d];
    }

    model.km = cluster::kmeans(points, std::min<int>(k, static_cast<int>(points.size())), seed);

    // Label phases by activity rank of their centroid.
    const int kk = static_cast<int>(model.km.centroids.size());
    std::vector<int> order(static_cast<size_t>(kk));
    std::iota(order.begin(), order.end(), 0);
    auto activity = [&](int c) {
        const auto & centroid = model.km.centroids[static_cast<size_t>(c)];
        return std::accumulate(centroid.begin(), centroid.end(), 0.0);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return activity(a) < activity(b); });
    static const std::vector<std::string> activity_names = {"Low Activity", "Mixed Activity",
                                                            "High Activity"};
    model.labels.assign(static_cast<size_t>(kk), "");
    for (int rank = 0; rank < kk; ++rank) {
        int c = order[static_cast<size_t>(rank)];
        model.labels[static_cast<size_t>(c)] =
            kk == 3 ? activity_names[static_cast<size_t>(rank)] : "Phase " + std::to_string(rank);
    }
    return model;
}

PhaseModel phases_from_external_labels(const std::vector<ExternalPhaseLabel> & labels) {
    if (labels.empty()) throw DataError("external phase labels are empty");
    PhaseModel model;
    model.external = true;
    model.external_labels = labels;
    std::sort(model.external_labels.begin(), model.external_labels.end(),
              [](const auto & a, const auto & b) { return a.window_index < b.window_index; });
    return model;
}

std::vector<ExternalPhaseLabel> load_phase_sidecar(const std::string & path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open phase sidecar: " + path);
    std::vector<ExternalPhaseLabel> labels;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error & e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ExternalPhaseLabel l;
        l.window_index = row.at("window_index").get<int>();
        l.phase_id = row.at("phase_id").get<int>();
        if (row.contains("label")) l.label = row["label"].get<std::string>();
        labels.push_back(std::move(l));
    }
    return labels;
}

std::vector<PhaseAnnotation> annotate_phases(const PhaseModel & model,
                                             const std::vector<WindowFeatures> & windows) {
    std::vector<PhaseAnnotation> out;
    out.reserve(windows.size());
    for (size_t w = 0; w < windows.size(); ++w) {
        PhaseAnnotation a;
        a.phase_id = model.assign(windows[w], static_cast<int>(w));
        a.phase_label = model.label_of(a.phase_id);
        a.metrics = windows[w];
        a.stability = 1;
        if (!out.empty() && out.back().phase_id == a.phase_id) {
            a.stability = out.back().stability + 1;
        }
        out.push_back(std::move(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Context bundles
// ---------------------------------------------------------------------------

WindowContextFeatures pseudo_features_from_prediction(const SociogramTriple & predicted_binary) {
    WindowContextFeatures f;
    f.metrics = triple_metrics(predicted_binary);
    f.features = window_features(predicted_binary);
    f.events.window_index = predicted_binary.window_index;
    f.events.is_predicted = predicted_binary.is_predicted;
    int conv_edges = 0;
    for (int i = 0; i < kRosterSize; ++i) {
        for (int j = 0; j < kRosterSize; ++j) {
            if (i != j && predicted_binary.conv.at(i, j) > 0.0) ++conv_edges;
        }
    }
    f.events.conv_edges = conv_edges;
    for (int u = 0; u < kUnorderedPairs; ++u) {
        auto [i, j] = unordered_pair_at(u);
        if (predicted_binary.prox.at(i, j) > 0.0) ++f.events.prox_edges;
        if (predicted_binary.attn.at(i, j) > 0.0) ++f.events.attn_edges;
    }
    f.is_predicted = predicted_binary.is_predicted;
    return f;
}

WindowContextFeatures oracle_window_features(const SociogramTriple & truth_weighted) {
    return pseudo_features_from_prediction(binarize(truth_weighted));
}

ContextBundle build_context(int window_index, const std::vector<SociogramTriple> & history,
                            const std::vector<BehavioralProfile> & profiles,
                            const PhaseModel & phases, const Roster & roster) {
    if (window_index < 1) throw DataError("build_context: window_index must be >= 1");
    if (static_cast<int>(history.size()) != window_index) {
        throw DataError("build_context: history must cover windows 0..window_index-1");
    }

    ContextBundle bundle;
    bundle.window_index = window_index;
    bundle.roster = roster;
    bundle.indiv = profiles;

    std::vector<WindowContextFeatures> per_window;
    per_window.reserve(history.size());
    bool any_predicted = false;
    for (const auto & g : history) {
        per_window.push_back(g.is_predicted ? pseudo_features_from_prediction(g)
                                            : oracle_window_features(g));
        any_predicted = any_predicted || g.is_predicted;
    }
    bundle.source = any_predicted ? ContextSource::Predicted : ContextSource::Oracle;

    std::vector<ModalityMetrics> metric_history;
    metric_history.reserve(per_window.size());
    for (const auto & f : per_window) metric_history.push_back(f.metrics);
    bundle.group = metric_history.back();
    bundle.fused = fuse_metrics(metric_history);

    // Phase of the latest window plus its run length.
    std::vector<int> phase_ids(per_window.size());
    for (size_t w = 0; w < per_window.size(); ++w) {
        phase_ids[w] = phases.assign(per_window[w].features, history[w].window_index);
    }
    PhaseAnnotation phase;
    phase.phase_id = phase_ids.back();
    phase.phase_label = phases.label_of(phase.phase_id);
    phase.metrics = per_window.back().features;
    phase.stability = 1;
    for (int w = static_cast<int>(phase_ids.size()) - 2; w >= 0; --w) {
        if (phase_ids[static_cast<size_t>(w)] != phase.phase_id) break;
        ++phase.stability;
    }
    bundle.phase = phase;

    // Trends: fused metric 5 windows back (or the earliest, flagged short).
    int now = window_index - 1;
    int from = now - kPairHistorySpan;
    bool short_history = from < 0;
    if (short_history) from = 0;
    std::vector<ModalityMetrics> prefix(metric_history.begin(),
                                        metric_history.begin() + from + 1);
    FusedMetrics fused_from = fuse_metrics(prefix);
    bundle.density_trend = {fused_from.density, bundle.fused.density, from, short_history};
    bundle.reciprocity_trend = {fused_from.reciprocity, bundle.fused.reciprocity, from,
                                short_history};

    int pair_start = std::max(0, static_cast<int>(history.size()) - kPairHistorySpan);
    bundle.pair_history.assign(history.begin() + pair_start, history.end());
    int event_start = std::max(0, static_cast<int>(per_window.size()) - kEventTimelineSpan);
    for (size_t w = static_cast<size_t>(event_start); w < per_window.size(); ++w) {
        WindowEvents e = per_window[w].events;
        e.window_index = history[w].window_index;
        e.is_predicted = history[w].is_predicted;
        bundle.event_timeline.push_back(e);
    }

    bundle.phase_features = per_window.back().features.as_point();
    return bundle;
}

}  // namespace sociocast::context
