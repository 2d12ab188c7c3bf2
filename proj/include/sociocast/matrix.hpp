#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sociocast {

// Small dense square matrix, row-major. Group graphs are tiny (roster of 4),
// so everything is by value.
class Mat {
  public:
    Mat() = default;
    explicit Mat(int n, double fill = 0.0) : n_(n), v_(static_cast<size_t>(n) * n, fill) {}

    int n() const { return n_; }
    double & at(int i, int j) { return v_[static_cast<size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return v_[static_cast<size_t>(i) * n_ + j]; }

    const std::vector<double> & data() const { return v_; }
    std::vector<double> & data() { return v_; }

    bool same_shape(const Mat & other) const { return n_ == other.n_; }

    bool operator==(const Mat & other) const { return n_ == other.n_ && v_ == other.v_; }
    bool operator!=(const Mat & other) const { return !(*this == other); }

  private:
    int n_ = 0;
    std::vector<double> v_;
};

inline constexpr int kRosterSize     = 4;
inline constexpr int kOrderedPairs   = kRosterSize * (kRosterSize - 1);      // 12
inline constexpr int kUnorderedPairs = kRosterSize * (kRosterSize - 1) / 2;  // 6

// Ordered pairs enumerate as (0,1),(0,2),(0,3),(1,0),(1,2),... in roster order.
inline int ordered_pair_index(int i, int j) {
    return i * (kRosterSize - 1) + (j > i ? j - 1 : j);
}

struct OrderedPair {
    int i, j;
};

inline OrderedPair ordered_pair_at(int index) {
    int i = index / (kRosterSize - 1);
    int r = index % (kRosterSize - 1);
    int j = (r >= i) ? r + 1 : r;
    return {i, j};
}

// Unordered pairs enumerate as (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
inline int unordered_pair_index(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * (2 * kRosterSize - i - 3) / 2 + (j - i - 1);
}

inline OrderedPair unordered_pair_at(int index) {
    static constexpr std::array<OrderedPair, kUnorderedPairs> pairs = {
        {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    return pairs[static_cast<size_t>(index)];
}

// The four participant ids of one session, in canonical (index) order.
class Roster {
  public:
    Roster() = default;
    explicit Roster(std::vector<std::string> ids) : ids_(std::move(ids)) {
        if (ids_.size() != kRosterSize) {
            throw std::invalid_argument("roster must contain exactly 4 participant ids, got " +
                                        std::to_string(ids_.size()));
        }
    }

    const std::string & id(int index) const { return ids_[static_cast<size_t>(index)]; }
    const std::vector<std::string> & ids() const { return ids_; }

    // -1 when unknown.
    int index_of(const std::string & id) const {
        for (size_t k = 0; k < ids_.size(); ++k) {
            if (ids_[k] == id) return static_cast<int>(k);
        }
        return -1;
    }

    bool operator==(const Roster & other) const { return ids_ == other.ids_; }

  private:
    std::vector<std::string> ids_;
};

}  // namespace sociocast
