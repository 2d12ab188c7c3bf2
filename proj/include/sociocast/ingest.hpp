#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sociocast/matrix.hpp"

namespace sociocast::ingest {

inline constexpr int kDefaultWindowLen = 32;
inline constexpr int kDefaultStride    = 16;
// 1.5 ft close-proximity threshold, converted to the canonical internal unit.
inline constexpr double kDefaultProximityMeters = 0.4572;

enum class Schema { Jsonl, Csv };

Schema schema_from_string(const std::string & s);

// One second of pairwise indicators for the whole group.
// conv is per ordered pair; prox/attn per unordered pair (symmetrized on load).
struct SecondSlice {
    std::array<bool, kOrderedPairs> conv{};
    std::array<bool, kUnorderedPairs> prox{};
    std::array<bool, kUnorderedPairs> attn{};
    bool has_records = false;  // false marks a gap second (treated all-false downstream)
};

struct ParticipantSecond {
    std::optional<bool> speaking;
    std::optional<double> x, y;
    std::optional<std::string> gaze_target;
};

struct SessionData {
    std::string session_id;
    Roster roster;
    int duration = 0;  // seconds, [0, duration)
    std::vector<SecondSlice> seconds;
    // features[participant][t]
    std::vector<std::vector<ParticipantSecond>> features;
    std::vector<int> gap_seconds;
    int symmetry_warnings = 0;  // mirrored prox/attn disagreements, resolved by OR
    int position_warnings = 0;  // NaN/Inf positions skipped by derive_proximity

    const SecondSlice & slice(int t) const { return seconds[static_cast<size_t>(t)]; }
};

struct WindowSeries {
    int window_index = 0;
    int start_t = 0;
    int end_t = 0;  // exclusive; end_t - start_t == window length
    std::string session_id;
    std::vector<SecondSlice> slices;
    int gap_count = 0;

    int length() const { return end_t - start_t; }
};

// Loads and fully validates one session stream. Throws DataError with the
// offending line number on malformed rows, roster size != 4, or
// non-monotonic timestamps within an ordered-pair stream. Missing seconds
// are recorded in gap_seconds, never silently filled.
SessionData load_session(const std::string & path, Schema schema,
                         const std::vector<std::string> & roster_override = {});

struct PositionSample {
    double x = 0.0, y = 0.0;
    bool valid = false;
};

// positions[participant][t] -> prox[t][unordered pair]. Comparison is
// inclusive (distance <= threshold). Seconds with a NaN/Inf coordinate are
// skipped for the pairs involved and counted in skip_warnings.
std::vector<std::array<bool, kUnorderedPairs>> derive_proximity(
    const std::vector<std::vector<PositionSample>> & positions, double threshold_m,
    int * skip_warnings = nullptr);

// Recomputes session prox channels from the participant position stream.
void apply_derived_proximity(SessionData & session, double threshold_m = kDefaultProximityMeters);

// Fixed-length overlapping windows at starts 0, stride, 2*stride, ...
// The trailing partial window is dropped. Throws DataError when the session
// is shorter than one window.
std::vector<WindowSeries> segment_windows(const SessionData & session,
                                          int window_len = kDefaultWindowLen,
                                          int stride = kDefaultStride);

}  // namespace sociocast::ingest
