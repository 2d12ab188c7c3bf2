#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sociocast/cluster.hpp"
#include "sociocast/ingest.hpp"
#include "sociocast/sociogram.hpp"

namespace sociocast::context {

// ---------------------------------------------------------------------------
// Individual behavioral profiles
// ---------------------------------------------------------------------------

struct ClusterAssignment {
    int id = 0;
    std::string descriptor;
    double rate = 0.0;  // per-session rate backing the descriptor
};

// Assigned once per session from full-session statistics; constant across
// all windows of that session.
struct BehavioralProfile {
    std::string participant_id;
    ClusterAssignment speaking;    // utterances per session
    ClusterAssignment gaze;        // gaze events per session
    ClusterAssignment locomotion;  // rate field unused
};

struct ProfileFeatures {
    std::string session_id;
    std::string participant_id;
    double utterances = 0.0;
    double gaze_events = 0.0;
    double gaze_entropy = 0.0;
    double mean_speed = 0.0;
    double path_entropy = 0.0;
};

// Full-session feature rows for every roster member.
std::vector<ProfileFeatures> profile_features(const ingest::SessionData & session);

// One feature domain: GMM over its feature columns, or rank tertiles when a
// column is degenerate (zero variance).
struct DomainModel {
    int k = 3;
    bool tertile_fallback = false;
    std::vector<double> tertile_cuts;          // 2 cuts when fallback
    cluster::GmmModel gmm;                     // otherwise
    std::vector<int> rank_by_component;        // component id -> rank (0 = lowest mean)

    int assign(const cluster::Point & features) const;
    int rank_of(int component) const;
};

struct ProfileModel {
    uint64_t seed = 0;
    int k = 3;
    DomainModel speaking, gaze, locomotion;

    BehavioralProfile profile_for(const ProfileFeatures & row) const;
    nlohmann::ordered_json to_json() const;
    static ProfileModel from_json(const nlohmann::json & j);
};

// Independent diagonal-covariance GMMs per feature domain (EM tolerance
// 1e-4, max 200 iterations, k-means init, fixed seed). Descriptors are
// assigned by rank of the component mean.
ProfileModel fit_behavioral_profiles(const std::vector<ProfileFeatures> & rows, int k = 3,
                                     uint64_t seed = 17);

// ---------------------------------------------------------------------------
// Collaboration phases
// ---------------------------------------------------------------------------

// Per-window aggregate features, computed from the binarized triple so the
// oracle and predicted paths share one code path.
struct WindowFeatures {
    double speaking_entropy = 0.0;  // base-2 entropy of conv out-degree shares
    double conv_density = 0.0;
    double prox_density = 0.0;
    double attn_density = 0.0;
    double attention_events = 0.0;  // attn edge count

    cluster::Point as_point() const {
        return {speaking_entropy, conv_density, prox_density, attn_density, attention_events};
    }
};

WindowFeatures window_features(const SociogramTriple & binary);

struct PhaseAnnotation {
    int phase_id = 0;
    std::string phase_label;
    int stability = 1;  // consecutive windows in the current phase
    WindowFeatures metrics;
};

struct ExternalPhaseLabel {
    int window_index = 0;
    int phase_id = 0;
    std::string label;
};

struct PhaseModel {
    uint64_t seed = 0;
    bool external = false;
    cluster::KMeansModel km;
    std::vector<double> feature_mean, feature_sd;  // standardization for assignment
    std::vector<std::string> labels;               // per phase id
    std::vector<ExternalPhaseLabel> external_labels;

    // Phase id for a window. External models look the window up by index and
    // carry the last known phase forward for unlabeled (e.g. predicted)
    // windows.
    int assign(const WindowFeatures & f, int window_index) const;
    std::string label_of(int phase_id) const;
    nlohmann::ordered_json to_json() const;
    static PhaseModel from_json(const nlohmann::json & j);
};

// Seeded k-means over per-window feature vectors. Phases are labeled by
// activity rank of their centroid.
PhaseModel fit_phases(const std::vector<WindowFeatures> & windows, int k = 3, uint64_t seed = 29);

PhaseModel phases_from_external_labels(const std::vector<ExternalPhaseLabel> & labels);

// Reads the optional phase-label sidecar (JSONL: {window_index, phase_id, label}).
std::vector<ExternalPhaseLabel> load_phase_sidecar(const std::string & path);

// Annotations (phase + stability) for a consecutive window series.
std::vector<PhaseAnnotation> annotate_phases(const PhaseModel & model,
                                             const std::vector<WindowFeatures> & windows);

// ---------------------------------------------------------------------------
// Context bundles
// ---------------------------------------------------------------------------

enum class ContextSource { Oracle, Predicted };

struct TrendPair {
    double from = 0.0, to = 0.0;
    int from_window = 0;
    bool short_history = false;  // fewer than 5 windows back
};

struct WindowEvents {
    int window_index = 0;
    int conv_edges = 0;
    int prox_edges = 0;
    int attn_edges = 0;
    bool is_predicted = false;
};

// Everything recomputable from one window's sociogram triple, identical for
// ground-truth and predicted windows.
struct WindowContextFeatures {
    ModalityMetrics metrics;
    WindowEvents events;
    WindowFeatures features;
    bool is_predicted = false;
};

// Pseudo-features for a predicted binary triple: metrics and event summaries
// recomputed exactly as if the prediction were ground truth.
WindowContextFeatures pseudo_features_from_prediction(const SociogramTriple & predicted_binary);

// Same computation for an observed (weighted) window; binarizes first.
WindowContextFeatures oracle_window_features(const SociogramTriple & truth_weighted);

inline constexpr int kPairHistorySpan = 5;
inline constexpr int kEventTimelineSpan = 10;

struct ContextBundle {
    int window_index = 0;  // the window being predicted
    ContextSource source = ContextSource::Oracle;
    Roster roster;
    std::vector<BehavioralProfile> indiv;
    ModalityMetrics group;  // latest history window
    FusedMetrics fused;
    PhaseAnnotation phase;
    TrendPair density_trend, reciprocity_trend;
    std::vector<SociogramTriple> pair_history;   // <= 5, oldest first
    std::vector<WindowEvents> event_timeline;    // <= 10, oldest first
    cluster::Point phase_features;               // similarity vector for few-shot
};

// history covers windows 0..window_index-1 in order; oracle entries carry
// ground-truth weights, predicted entries are binary with is_predicted set.
ContextBundle build_context(int window_index, const std::vector<SociogramTriple> & history,
                            const std::vector<BehavioralProfile> & profiles,
                            const PhaseModel & phases, const Roster & roster);

}  // namespace sociocast::context
