#include "wlslab/multiindex.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wlslab {

MultiIndex::MultiIndex(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    entries_.reserve(entries.size());
    for (const auto& [pos, exp] : entries) {
        if (pos < 1) throw std::invalid_argument("MultiIndex: positions are 1-based");
        if (exp < 0) throw std::invalid_argument("MultiIndex: negative exponent");
        if (exp == 0) continue;
        if (!entries_.empty() && entries_.back().first == pos)
            throw std::invalid_argument("MultiIndex: duplicate position");
        entries_.emplace_back(pos, exp);
    }
}

MultiIndex MultiIndex::unit(int position) {
    return MultiIndex({{position, 1}});
}

MultiIndex MultiIndex::from_dense(std::span<const int> values) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] != 0) entries.emplace_back(static_cast<int>(i) + 1, values[i]);
    return MultiIndex(std::move(entries));
}

int MultiIndex::exponent(int position) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(),
                               Entry{position, 0});
    return (it != entries_.end() && it->first == position) ? it->second : 0;
}

int MultiIndex::total_degree() const {
    int deg = 0;
    for (const auto& [pos, exp] : entries_) deg += exp;
    return deg;
}

int MultiIndex::max_exponent() const {
    int m = 0;
    for (const auto& [pos, exp] : entries_) m = std::max(m, exp);
    return m;
}

int MultiIndex::max_position() const {
    return entries_.empty() ? 0 : entries_.back().first;
}

MultiIndex MultiIndex::plus_unit(int position) const {
    MultiIndex out(*this);
    auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(),
                               Entry{position, 0});
    if (it != out.entries_.end() && it->first == position)
        ++it->second;
    else
        out.entries_.insert(it, {position, 1});
    return out;
}

MultiIndex MultiIndex::minus_unit(int position) const {
    MultiIndex out(*this);
    auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(),
                               Entry{position, 0});
    if (it == out.entries_.end() || it->first != position)
        throw std::invalid_argument("MultiIndex: cannot lower a zero exponent");
    if (--it->second == 0) out.entries_.erase(it);
    return out;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& nu) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const auto& [pos, exp] : nu.entries()) {
        h = (h ^ static_cast<std::uint64_t>(pos)) * 1099511628211ull;
        h = (h ^ static_cast<std::uint64_t>(exp)) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

bool leq(const MultiIndex& a, const MultiIndex& b) {
    // a's support must be covered by b's with componentwise-larger exponents.
    auto itb = b.entries().begin();
    const auto endb = b.entries().end();
    for (const auto& [pos, exp] : a.entries()) {
        while (itb != endb && itb->first < pos) ++itb;
        if (itb == endb || itb->first != pos || itb->second < exp) return false;
    }
    return true;
}

bool canonical_less(const MultiIndex& a, const MultiIndex& b) {
    const int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db;
    // Reverse-lexicographic with equal degree: walk both entry lists from
    // the highest position down; first difference decides.
    auto ita = a.entries().rbegin();
    auto itb = b.entries().rbegin();
    while (ita != a.entries().rend() && itb != b.entries().rend()) {
        if (ita->first != itb->first) {
            // The one with a nonzero exponent at the higher position is larger.
            return ita->first < itb->first;
        }
        if (ita->second != itb->second) return ita->second < itb->second;
        ++ita;
        ++itb;
    }
    // One list exhausted: equal total degree makes this impossible unless
    // both are exhausted (equal indices).
    return false;
}

std::string to_line(const MultiIndex& nu) {
    std::string out;
    for (const auto& [pos, exp] : nu.entries()) {
        if (!out.empty()) out += ' ';
        out += std::to_string(pos) + ':' + std::to_string(exp);
    }
    return out;
}

MultiIndex parse_line(const std::string& line) {
    std::vector<MultiIndex::Entry> entries;
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) {
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("MultiIndex: malformed token '" + token + "'");
        entries.emplace_back(std::stoi(token.substr(0, colon)),
                             std::stoi(token.substr(colon + 1)));
    }
    return MultiIndex(std::move(entries));
}

IndexSet::IndexSet(std::vector<MultiIndex> members) : members_(std::move(members)) {
    lookup_.reserve(members_.size());
    for (const auto& nu : members_)
        if (!lookup_.insert(nu).second)
            throw std::invalid_argument("IndexSet: duplicate member");
}

bool IndexSet::contains(const MultiIndex& nu) const {
    return lookup_.count(nu) > 0;
}

int IndexSet::max_degree() const {
    int m = 0;
    for (const auto& nu : members_) m = std::max(m, nu.max_exponent());
    return m;
}

int IndexSet::max_position() const {
    int m = 0;
    for (const auto& nu : members_) m = std::max(m, nu.max_position());
    return m;
}

void IndexSet::save(std::ostream& out) const {
    for (const auto& nu : members_) out << to_line(nu) << '\n';
}

IndexSet IndexSet::load(std::istream& in) {
    std::vector<MultiIndex> members;
    std::string line;
    while (std::getline(in, line)) members.push_back(parse_line(line));
    return IndexSet(std::move(members));
}

bool is_downward_closed(const IndexSet& set) {
    for (const auto& nu : set.members())
        for (const auto& [pos, exp] : nu.entries())
            if (!set.contains(nu.minus_unit(pos))) return false;
    return true;
}

std::vector<MultiIndex> reduced_margin(const IndexSet& set, int variable_budget) {
    if (set.empty()) throw std::invalid_argument("reduced_margin: empty set");
    if (variable_budget < 1) throw std::invalid_argument("reduced_margin: budget < 1");
    if (!is_downward_closed(set))
        throw std::invalid_argument("reduced_margin: set is not downward closed");

    std::unordered_set<MultiIndex, MultiIndexHash> seen;
    std::vector<MultiIndex> margin;
    for (const auto& nu : set.members()) {
        for (int j = 1; j <= variable_budget; ++j) {
            MultiIndex candidate = nu.plus_unit(j);
            if (set.contains(candidate) || seen.count(candidate)) continue;
            bool ready = true;
            for (const auto& [pos, exp] : candidate.entries()) {
                if (!set.contains(candidate.minus_unit(pos))) {
                    ready = false;
                    break;
                }
            }
            if (ready) {
                seen.insert(candidate);
                margin.push_back(std::move(candidate));
            }
        }
    }
    std::sort(margin.begin(), margin.end(), canonical_less);
    return margin;
}

}  // namespace wlslab
