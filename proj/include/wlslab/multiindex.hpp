#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace wlslab {

/// Finitely supported multi-index: a sparse map from 1-based variable
/// positions to positive exponents. Unstored positions have exponent 0.
/// Immutable after construction.
class MultiIndex {
public:
    using Entry = std::pair<int, int>;  // (position >= 1, exponent >= 1)

    MultiIndex() = default;

    /// Builds from (position, exponent) pairs. Zero exponents are dropped,
    /// entries are sorted by position. Throws on nonpositive positions,
    /// negative exponents, or duplicate positions.
    explicit MultiIndex(std::vector<Entry> entries);

    /// The unit index e_j.
    static MultiIndex unit(int position);

    /// Dense construction from exponents for positions 1..values.size().
    static MultiIndex from_dense(std::span<const int> values);

    int exponent(int position) const;
    int operator[](int position) const { return exponent(position); }

    int total_degree() const;
    int max_exponent() const;
    /// Largest position with a nonzero exponent; 0 for the zero index.
    int max_position() const;
    bool is_zero() const { return entries_.empty(); }

    const std::vector<Entry>& entries() const { return entries_; }

    /// This index with the exponent at `position` raised by one.
    MultiIndex plus_unit(int position) const;
    /// This index with the exponent at `position` lowered by one.
    /// Throws if the exponent there is zero.
    MultiIndex minus_unit(int position) const;

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
    bool operator!=(const MultiIndex& other) const { return !(*this == other); }

private:
    std::vector<Entry> entries_;  // sorted by position, exponents >= 1
};

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& nu) const;
};

/// Componentwise partial order: a_j <= b_j for every position j.
bool leq(const MultiIndex& a, const MultiIndex& b);

/// Canonical total order without a weight context: ascending total degree,
/// ties broken reverse-lexicographically (scan positions from the highest
/// downward; smaller exponent at the first difference comes first).
bool canonical_less(const MultiIndex& a, const MultiIndex& b);

/// Text form "j1:e1 j2:e2 ..." with sorted positions; the zero index is
/// the empty string.
std::string to_line(const MultiIndex& nu);
MultiIndex parse_line(const std::string& line);

/// Finite ordered collection of distinct multi-indices. The member order is
/// whatever the producer chose (build_lambda emits the canonical weighted
/// order); it is preserved by serialization. Downward-closedness is a
/// property of the content, checked by is_downward_closed().
class IndexSet {
public:
    IndexSet() = default;

    /// Keeps the given order. Throws on duplicates.
    explicit IndexSet(std::vector<MultiIndex> members);

    const std::vector<MultiIndex>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    const MultiIndex& operator[](std::size_t i) const { return members_[i]; }

    bool contains(const MultiIndex& nu) const;

    /// Largest univariate exponent over all members (0 for {0} or empty).
    int max_degree() const;
    /// Largest active position over all members.
    int max_position() const;

    /// One index per line in to_line() form; the zero index is an empty line.
    void save(std::ostream& out) const;
    static IndexSet load(std::istream& in);

private:
    std::vector<MultiIndex> members_;
    std::unordered_set<MultiIndex, MultiIndexHash> lookup_;
};

/// True iff for every member nu and every position j with nu_j >= 1 the
/// index nu - e_j is also a member. Equivalent to the global property that
/// every componentwise-smaller index is a member.
bool is_downward_closed(const IndexSet& set);

/// All nu not in `set`, supported on positions 1..variable_budget, whose
/// every downward neighbor nu - e_j lies in `set`. Sorted canonically.
/// Throws if `set` is empty or not downward closed.
std::vector<MultiIndex> reduced_margin(const IndexSet& set, int variable_budget);

}  // namespace wlslab
