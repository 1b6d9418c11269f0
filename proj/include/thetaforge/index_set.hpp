#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace thetaforge {

// A subset of {0, ..., r-1} stored as a bitmask. Indices are zero based in
// code; text renderings use the one-based convention ({1,3}).
class IndexSet {
public:
    constexpr IndexSet() = default;
    constexpr explicit IndexSet(std::uint32_t bits) : bits_(bits) {}

    static constexpr IndexSet full(int r) { return IndexSet(r >= 32 ? ~0u : ((1u << r) - 1u)); }
    static constexpr IndexSet single(int j) { return IndexSet(1u << j); }
    static IndexSet of(std::initializer_list<int> indices) {
        IndexSet s;
        for (int j : indices) s = s.with(j);
        return s;
    }

    constexpr std::uint32_t bits() const { return bits_; }
    constexpr bool contains(int j) const { return (bits_ >> j) & 1u; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr IndexSet with(int j) const { return IndexSet(bits_ | (1u << j)); }
    constexpr IndexSet without(int j) const { return IndexSet(bits_ & ~(1u << j)); }
    constexpr IndexSet complement(int r) const { return IndexSet(full(r).bits_ & ~bits_); }
    constexpr IndexSet operator&(IndexSet o) const { return IndexSet(bits_ & o.bits_); }
    constexpr IndexSet operator|(IndexSet o) const { return IndexSet(bits_ | o.bits_); }
    constexpr IndexSet minus(IndexSet o) const { return IndexSet(bits_ & ~o.bits_); }
    constexpr bool subset_of(IndexSet o) const { return (bits_ & ~o.bits_) == 0; }
    constexpr auto operator<=>(const IndexSet&) const = default;

    // Members in increasing order.
    std::vector<int> indices() const {
        std::vector<int> out;
        for (std::uint32_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (int j : indices()) {
            if (!first) s += ",";
            s += std::to_string(j + 1);
            first = false;
        }
        return s + "}";
    }

private:
    std::uint32_t bits_ = 0;
};

// All subsets of `outer` (including the empty set and `outer` itself), in
// increasing bitmask order.
inline std::vector<IndexSet> subsets_of(IndexSet outer) {
    std::vector<IndexSet> out;
    std::uint32_t m = outer.bits();
    std::uint32_t s = 0;
    while (true) {
        out.emplace_back(s);
        if (s == m) break;
        s = (s - m) & m;
    }
    return out;
}

inline std::vector<IndexSet> subsets_of_range(int r) { return subsets_of(IndexSet::full(r)); }

}  // namespace thetaforge
