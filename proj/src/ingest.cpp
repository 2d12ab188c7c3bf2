#include "sociocast/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sociocast/errors.hpp"

namespace sociocast::ingest {

using nlohmann::json;

Schema schema_from_string(const std::string & s) {
    if (s == "jsonl") return Schema::Jsonl;
    if (s == "csv") return Schema::Csv;
    throw ConfigError("unknown input schema '" + s + "' (expected jsonl or csv)");
}

namespace {

struct PairRow {
    int line = 0;
    int t = 0;
    std::string i, j;
    bool conv = false, prox = false, attn = false;
};

struct FeatureRow {
    int line = 0;
    int t = 0;
    std::string p;
    std::optional<bool> speaking;
    std::optional<double> x, y;
    std::optional<std::string> gaze;
};

[[noreturn]] void malformed(const std::string & path, int line, const std::string & why) {
    throw DataError(path + ":" + std::to_string(line) + ": malformed row: " + why);
}

bool json_flag(const json & v, const std::string & path, int line) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number_integer()) {
        int n = v.get<int>();
        if (n == 0 || n == 1) return n == 1;
    }
    malformed(path, line, "indicator must be 0/1 or boolean");
}

Roster resolve_roster(const std::set<std::string> & seen,
                      const std::vector<std::string> & override_ids) {
    if (!override_ids.empty()) {
        Roster roster(override_ids);
        for (const auto & id : seen) {
            if (roster.index_of(id) < 0) {
                throw DataError("participant '" + id + "' not in configured roster");
            }
        }
        return roster;
    }
    if (seen.size() != kRosterSize) {
        throw DataError("roster size must be 4, found " + std::to_string(seen.size()) +
                        " distinct participant ids");
    }
    return Roster(std::vector<std::string>(seen.begin(), seen.end()));
}

SessionData assemble(const std::string & path, std::string session_id,
                     const std::vector<PairRow> & pairs, const std::vector<FeatureRow> & feats,
                     const std::vector<std::string> & roster_override) {
    std::set<std::string> seen;
    for (const auto & r : pairs) {
        seen.insert(r.i);
        seen.insert(r.j);
    }
    for (const auto & r : feats) seen.insert(r.p);

    SessionData session;
    session.session_id = std::move(session_id);
    session.roster = resolve_roster(seen, roster_override);

    int max_t = -1;
    std::map<std::pair<int, int>, int> last_t;  // ordered pair -> last timestamp
    for (const auto & r : pairs) {
        int i = session.roster.index_of(r.i);
        int j = session.roster.index_of(r.j);
        if (i == j) malformed(path, r.line, "self pair (" + r.i + ", " + r.j + ")");
        auto key = std::make_pair(i, j);
        auto it = last_t.find(key);
        if (it != last_t.end() && r.t <= it->second) {
            throw DataError(path + ":" + std::to_string(r.line) +
                            ": non-monotonic timestamp t=" + std::to_string(r.t) + " for pair (" +
                            r.i + ", " + r.j + ")");
        }
        last_t[key] = r.t;
        max_t = std::max(max_t, r.t);
    }
    for (const auto & r : feats) max_t = std::max(max_t, r.t);
    session.duration = max_t + 1;
    session.seconds.assign(static_cast<size_t>(session.duration), SecondSlice{});
    session.features.assign(kRosterSize,
                            std::vector<ParticipantSecond>(static_cast<size_t>(session.duration)));

    // prox/attn tracked per direction first so mirrored disagreements are visible.
    struct SymCell {
        bool seen = false, value = false;
    };
    std::vector<std::array<SymCell, kOrderedPairs>> prox_dir(
        static_cast<size_t>(session.duration));
    std::vector<std::array<SymCell, kOrderedPairs>> attn_dir(
        static_cast<size_t>(session.duration));

    for (const auto & r : pairs) {
        int i = session.roster.index_of(r.i);
        int j = session.roster.index_of(r.j);
        auto & slice = session.seconds[static_cast<size_t>(r.t)];
        slice.has_records = true;
        slice.conv[static_cast<size_t>(ordered_pair_index(i, j))] = r.conv;
        int op = ordered_pair_index(i, j);
        prox_dir[static_cast<size_t>(r.t)][static_cast<size_t>(op)] = {true, r.prox};
        attn_dir[static_cast<size_t>(r.t)][static_cast<size_t>(op)] = {true, r.attn};
    }

    for (int t = 0; t < session.duration; ++t) {
        auto & slice = session.seconds[static_cast<size_t>(t)];
        for (int u = 0; u < kUnorderedPairs; ++u) {
            auto [a, b] = unordered_pair_at(u);
            auto fwd_p = prox_dir[static_cast<size_t>(t)][static_cast<size_t>(ordered_pair_index(a, b))];
            auto rev_p = prox_dir[static_cast<size_t>(t)][static_cast<size_t>(ordered_pair_index(b, a))];
            auto fwd_a = attn_dir[static_cast<size_t>(t)][static_cast<size_t>(ordered_pair_index(a, b))];
            auto rev_a = attn_dir[static_cast<size_t>(t)][static_cast<size_t>(ordered_pair_index(b, a))];
            if (fwd_p.seen && rev_p.seen && fwd_p.value != rev_p.value) ++session.symmetry_warnings;
            if (fwd_a.seen && rev_a.seen && fwd_a.value != rev_a.value) ++session.symmetry_warnings;
            slice.prox[static_cast<size_t>(u)] = (fwd_p.seen && fwd_p.value) || (rev_p.seen && rev_p.value);
            slice.attn[static_cast<size_t>(u)] = (fwd_a.seen && fwd_a.value) || (rev_a.seen && rev_a.value);
        }
        if (!slice.has_records) session.gap_seconds.push_back(t);
    }

    for (const auto & r : feats) {
        int p = session.roster.index_of(r.p);
        auto & cell = session.features[static_cast<size_t>(p)][static_cast<size_t>(r.t)];
        cell.speaking = r.speaking;
        cell.x = r.x;
        cell.y = r.y;
        cell.gaze_target = r.gaze;
    }
    return session;
}

SessionData load_jsonl(const std::string & path, const std::vector<std::string> & roster_override) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open session file: " + path);

    std::vector<PairRow> pairs;
    std::vector<FeatureRow> feats;
    std::string session_id;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error & e) {
            malformed(path, lineno, e.what());
        }
        if (!row.is_object()) malformed(path, lineno, "expected a JSON object");
        if (!row.contains("t") || !row["t"].is_number_integer()) {
            malformed(path, lineno, "missing integer field 't'");
        }
        int t = row["t"].get<int>();
        if (t < 0) malformed(path, lineno, "t must be >= 0");
        if (row.contains("session")) {
            std::string sid = row["session"].get<std::string>();
            if (session_id.empty()) {
                session_id = sid;
            } else if (session_id != sid) {
                malformed(path, lineno, "mixed session ids '" + session_id + "' and '" + sid + "'");
            }
        }
        if (row.contains("p")) {
            FeatureRow r;
            r.line = lineno;
            r.t = t;
            r.p = row["p"].get<std::string>();
            if (row.contains("speaking")) r.speaking = json_flag(row["speaking"], path, lineno);
            if (row.contains("x")) r.x = row["x"].get<double>();
            if (row.contains("y")) r.y = row["y"].get<double>();
            if (row.contains("gaze") && !row["gaze"].is_null()) {
                r.gaze = row["gaze"].get<std::string>();
            }
            feats.push_back(std::move(r));
        } else {
            if (!row.contains("i") || !row.contains("j")) {
                malformed(path, lineno, "pair row needs 'i' and 'j'");
            }
            PairRow r;
            r.line = lineno;
            r.t = t;
            r.i = row["i"].get<std::string>();
            r.j = row["j"].get<std::string>();
            if (r.i == r.j) malformed(path, lineno, "self pair");
            if (row.contains("conv")) r.conv = json_flag(row["conv"], path, lineno);
            if (row.contains("prox")) r.prox = json_flag(row["prox"], path, lineno);
            if (row.contains("attn")) r.attn = json_flag(row["attn"], path, lineno);
            pairs.push_back(std::move(r));
        }
    }
    if (pairs.empty()) throw DataError(path + ": no pair records found");
    if (session_id.empty()) session_id = path;
    return assemble(path, session_id, pairs, feats, roster_override);
}

std::vector<std::string> split_csv_line(const std::string & line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

// Wide CSV: header `t,conv_<i>_<j> x12,prox_<i>_<j> x6,attn_<i>_<j> x6`.
// Participant ids must not contain '_'.
SessionData load_csv(const std::string & path, const std::vector<std::string> & roster_override) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open session file: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError(path + ": empty file");
    auto header = split_csv_line(header_line);
    if (header.empty() || header[0] != "t") malformed(path, 1, "first column must be 't'");

    struct Col {
        int kind;  // 0 conv, 1 prox, 2 attn
        std::string i, j;
    };
    std::vector<Col> cols;
    for (size_t c = 1; c < header.size(); ++c) {
        std::stringstream ss(header[c]);
        std::string kind, pi, pj;
        if (!std::getline(ss, kind, '_') || !std::getline(ss, pi, '_') || !std::getline(ss, pj)) {
            malformed(path, 1, "column '" + header[c] + "' is not <mod>_<i>_<j>");
        }
        int k = kind == "conv" ? 0 : kind == "prox" ? 1 : kind == "attn" ? 2 : -1;
        if (k < 0) malformed(path, 1, "unknown modality in column '" + header[c] + "'");
        cols.push_back({k, pi, pj});
    }

    std::vector<PairRow> pairs;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            malformed(path, lineno,
                      "expected " + std::to_string(header.size()) + " cells, got " +
                          std::to_string(cells.size()));
        }
        int t = 0;
        try {
            t = std::stoi(cells[0]);
        } catch (...) {
            malformed(path, lineno, "non-integer timestamp '" + cells[0] + "'");
        }
        if (t < 0) malformed(path, lineno, "t must be >= 0");
        // One PairRow per ordered pair; symmetric columns populate both directions.
        std::map<std::pair<std::string, std::string>, PairRow> by_pair;
        auto touch = [&](const std::string & i, const std::string & j) -> PairRow & {
            auto & r = by_pair[{i, j}];
            r.line = lineno;
            r.t = t;
            r.i = i;
            r.j = j;
            return r;
        };
        for (size_t c = 0; c < cols.size(); ++c) {
            const auto & col = cols[c];
            const std::string & cell = cells[c + 1];
            if (cell != "0" && cell != "1") {
                malformed(path, lineno, "indicator cell must be 0/1, got '" + cell + "'");
            }
            bool v = cell == "1";
            if (col.kind == 0) {
                touch(col.i, col.j).conv = v;
            } else if (col.kind == 1) {
                touch(col.i, col.j).prox = v;
                touch(col.j, col.i).prox = v;
            } else {
                touch(col.i, col.j).attn = v;
                touch(col.j, col.i).attn = v;
            }
        }
        for (auto & [key, row] : by_pair) pairs.push_back(std::move(row));
    }
    if (pairs.empty()) throw DataError(path + ": no data rows");
    return assemble(path, path, pairs, {}, roster_override);
}

}  // namespace

SessionData load_session(const std::string & path, Schema schema,
                         const std::vector<std::string> & roster_override) {
    return schema == Schema::Jsonl ? load_jsonl(path, roster_override)
                                   : load_csv(path, roster_override);
}

std::vector<std::array<bool, kUnorderedPairs>> derive_proximity(
    const std::vector<std::vector<PositionSample>> & positions, double threshold_m,
    int * skip_warnings) {
    if (threshold_m <= 0.0) throw ConfigError("proximity threshold must be > 0");
    if (positions.size() != kRosterSize) {
        throw DataError("derive_proximity expects positions for exactly 4 participants");
    }
    size_t duration = 0;
    for (const auto & series : positions) duration = std::max(duration, series.size());

    int skipped = 0;
    std::vector<std::array<bool, kUnorderedPairs>> prox(duration);
    for (size_t t = 0; t < duration; ++t) {
        for (int u = 0; u < kUnorderedPairs; ++u) {
            auto [a, b] = unordered_pair_at(u);
            const auto & sa = positions[static_cast<size_t>(a)];
            const auto & sb = positions[static_cast<size_t>(b)];
            if (t >= sa.size() || t >= sb.size() || !sa[t].valid || !sb[t].valid) continue;
            const auto & pa = sa[t];
            const auto & pb = sb[t];
            if (!std::isfinite(pa.x) || !std::isfinite(pa.y) || !std::isfinite(pb.x) ||
                !std::isfinite(pb.y)) {
                ++skipped;
                continue;
            }
            double dx = pa.x - pb.x;
            double dy = pa.y - pb.y;
            prox[t][static_cast<size_t>(u)] = std::sqrt(dx * dx + dy * dy) <= threshold_m;
        }
    }
    if (skip_warnings) *skip_warnings += skipped;
    return prox;
}

void apply_derived_proximity(SessionData & session, double threshold_m) {
    std::vector<std::vector<PositionSample>> positions(kRosterSize);
    for (int p = 0; p < kRosterSize; ++p) {
        auto & series = positions[static_cast<size_t>(p)];
        series.resize(static_cast<size_t>(session.duration));
        for (int t = 0; t < session.duration; ++t) {
            const auto & cell = session.features[static_cast<size_t>(p)][static_cast<size_t>(t)];
            if (cell.x && cell.y) series[static_cast<size_t>(t)] = {*cell.x, *cell.y, true};
        }
    }
    auto prox = derive_proximity(positions, threshold_m, &session.position_warnings);
    for (int t = 0; t < session.duration; ++t) {
        for (int u = 0; u < kUnorderedPairs; ++u) {
            auto [a, b] = unordered_pair_at(u);
            const auto & sa = positions[static_cast<size_t>(a)][static_cast<size_t>(t)];
            const auto & sb = positions[static_cast<size_t>(b)][static_cast<size_t>(t)];
            if (sa.valid && sb.valid) {
                session.seconds[static_cast<size_t>(t)].prox[static_cast<size_t>(u)] =
                    prox[static_cast<size_t>(t)][static_cast<size_t>(u)];
            }
        }
    }
}

std::vector<WindowSeries> segment_windows(const SessionData & session, int window_len, int stride) {
    if (window_len <= 0 || stride <= 0) throw ConfigError("window_len and stride must be > 0");
    if (session.duration < window_len) {
        throw DataError("session '" + session.session_id + "' is shorter (" +
                        std::to_string(session.duration) + " s) than one window (" +
                        std::to_string(window_len) + " s)");
    }
    std::vector<WindowSeries> windows;
    for (int start = 0; start + window_len <= session.duration; start += stride) {
        WindowSeries w;
        w.window_index = static_cast<int>(windows.size());
        w.start_t = start;
        w.end_t = start + window_len;
        w.session_id = session.session_id;
        w.slices.reserve(static_cast<size_t>(window_len));
        for (int t = start; t < w.end_t; ++t) {
            const auto & slice = session.slice(t);
            w.slices.push_back(slice);
            if (!slice.has_records) ++w.gap_count;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

}  // namespace sociocast::ingest
