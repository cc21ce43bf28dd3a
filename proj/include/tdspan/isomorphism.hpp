#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tdspan/structure.hpp"

namespace tdspan {

namespace detail {

// Per-element signature under a coloring: the element's own color plus the
// colors seen through every incident tuple. Position inside a tuple matters
// for directed relations and is erased for the symmetric edge relation, so
// that the stored orientation of an unordered pair cannot leak into colors.
inline std::vector<std::int64_t> refinement_signature(const Structure& s, ElementId x,
                                                      const std::vector<int>& color,
                                                      int color_offset) {
    std::vector<std::vector<std::int64_t>> contribs;
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        if (s.vocabulary().relation(rel).arity == 1) continue;  // static, part of the seed
        bool sym = s.relation_is_symmetric(rel);
        for (const auto& t : s.tuples(rel)) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] != x) continue;
                std::vector<std::int64_t> c;
                c.push_back(rel);
                c.push_back(sym ? -1 : static_cast<std::int64_t>(i));
                std::vector<std::int64_t> others;
                for (std::size_t j = 0; j < t.size(); ++j) {
                    if (j == i) continue;
                    std::int64_t oc = color[color_offset + t[j]];
                    if (sym)
                        others.push_back(oc);
                    else
                        c.push_back(oc);
                }
                if (sym) {
                    std::sort(others.begin(), others.end());
                    c.insert(c.end(), others.begin(), others.end());
                }
                contribs.push_back(std::move(c));
            }
        }
    }
    std::sort(contribs.begin(), contribs.end());
    std::vector<std::int64_t> sig{color[color_offset + x]};
    for (const auto& c : contribs) {
        sig.push_back(-7);  // separator
        sig.insert(sig.end(), c.begin(), c.end());
    }
    return sig;
}

// Seed coloring from the unary relations (equivalently, the colors).
inline std::vector<std::int64_t> unary_seed(const Structure& s, ElementId x) {
    std::vector<std::int64_t> key;
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        if (s.vocabulary().relation(rel).arity != 1) continue;
        key.push_back(s.has_tuple(rel, {x}) ? 1 : 0);
    }
    return key;
}

}  // namespace detail

struct JointColoring {
    std::vector<int> color_a;  // stable color per element of the first structure
    std::vector<int> color_b;
    int classes = 0;
};

// Simultaneous color refinement of two structures over the same vocabulary.
// Stable colors are comparable across the two sides; same orbit implies same
// color (the converse does not hold).
inline JointColoring joint_refinement(const Structure& a, const Structure& b) {
    if (!(a.vocabulary() == b.vocabulary()))
        throw std::invalid_argument("joint_refinement: vocabulary mismatch");
    int n = a.size() + b.size();
    std::vector<int> color(n);

    std::map<std::vector<std::int64_t>, int> seed_ids;
    for (ElementId x = 0; x < a.size(); ++x) seed_ids[detail::unary_seed(a, x)] = 0;
    for (ElementId x = 0; x < b.size(); ++x) seed_ids[detail::unary_seed(b, x)] = 0;
    {
        int next = 0;
        for (auto& [k, v] : seed_ids) v = next++;
    }
    for (ElementId x = 0; x < a.size(); ++x) color[x] = seed_ids[detail::unary_seed(a, x)];
    for (ElementId x = 0; x < b.size(); ++x)
        color[a.size() + x] = seed_ids[detail::unary_seed(b, x)];

    int classes = static_cast<int>(seed_ids.size());
    while (true) {
        std::map<std::vector<std::int64_t>, int> sig_ids;
        std::vector<std::vector<std::int64_t>> sigs(n);
        for (ElementId x = 0; x < a.size(); ++x)
            sigs[x] = detail::refinement_signature(a, x, color, 0);
        for (ElementId x = 0; x < b.size(); ++x)
            sigs[a.size() + x] = detail::refinement_signature(b, x, color, a.size());
        for (const auto& sig : sigs) sig_ids.emplace(sig, 0);
        int next = 0;
        for (auto& [k, v] : sig_ids) v = next++;
        std::vector<int> fresh(n);
        for (int i = 0; i < n; ++i) fresh[i] = sig_ids[sigs[i]];
        int fresh_classes = next;
        if (fresh_classes == classes) break;
        color = std::move(fresh);
        classes = fresh_classes;
    }

    JointColoring jc;
    jc.color_a.assign(color.begin(), color.begin() + a.size());
    jc.color_b.assign(color.begin() + a.size(), color.end());
    jc.classes = classes;
    return jc;
}

inline std::vector<int> refinement(const Structure& s) {
    return joint_refinement(s, s).color_a;
}

namespace detail {

struct IsoSearch {
    const Structure& a;
    const Structure& b;
    const JointColoring& jc;
    std::vector<int> map_ab;   // a element -> b element or -1
    std::vector<int> map_ba;
    std::uint64_t budget;
    std::uint64_t spent = 0;

    bool consistent(ElementId x, ElementId y) const {
        if (jc.color_a[x] != jc.color_b[y]) return false;
        // Every tuple that becomes fully mapped by adding (x, y) must be
        // present on both sides.
        for (int rel = 0; rel < a.vocabulary().relation_count(); ++rel) {
            for (const auto& t : a.tuples(rel)) {
                bool touches = false, complete = true;
                for (int e : t) {
                    if (e == x)
                        touches = true;
                    else if (map_ab[e] < 0)
                        complete = false;
                }
                if (!touches || !complete) continue;
                std::vector<int> img(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) img[i] = t[i] == x ? y : map_ab[t[i]];
                if (!b.has_tuple(rel, img)) return false;
            }
            for (const auto& t : b.tuples(rel)) {
                bool touches = false, complete = true;
                for (int e : t) {
                    if (e == y)
                        touches = true;
                    else if (map_ba[e] < 0)
                        complete = false;
                }
                if (!touches || !complete) continue;
                std::vector<int> pre(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) pre[i] = t[i] == y ? x : map_ba[t[i]];
                if (!a.has_tuple(rel, pre)) return false;
            }
        }
        return true;
    }

    // Next element to map: prefer the frontier of the mapped region, then the
    // smallest color cell, so forced assignments are taken early.
    ElementId pick_next() const {
        ElementId best = -1;
        long best_key = -1;
        for (ElementId x = 0; x < a.size(); ++x) {
            if (map_ab[x] >= 0) continue;
            long mapped_nb = 0;
            for (ElementId z : a.neighbors(x))
                if (map_ab[z] >= 0) ++mapped_nb;
            long key = mapped_nb * 1000000L - jc.color_a[x];
            if (best < 0 || key > best_key) {
                best = x;
                best_key = key;
            }
        }
        return best;
    }

    bool extend() {
        ElementId x = pick_next();
        if (x < 0) return true;
        if (++spent > budget) throw ResourceExhausted("isomorphism search budget exceeded");
        for (ElementId y = 0; y < b.size(); ++y) {
            if (map_ba[y] >= 0 || !consistent(x, y)) continue;
            map_ab[x] = y;
            map_ba[y] = x;
            if (extend()) return true;
            map_ab[x] = -1;
            map_ba[y] = -1;
        }
        return false;
    }
};

}  // namespace detail

// Color- and relation-preserving bijection between two structures, found by
// refinement-guided backtracking. Annotations are ignored. Returns the
// element mapping when one exists. Throws ResourceExhausted past the budget.
inline std::optional<std::vector<int>> are_isomorphic(const Structure& a, const Structure& b,
                                                      std::uint64_t budget_nodes = 20'000'000) {
    if (!(a.vocabulary() == b.vocabulary()) || a.size() != b.size()) return std::nullopt;
    for (int rel = 0; rel < a.vocabulary().relation_count(); ++rel)
        if (a.tuples(rel).size() != b.tuples(rel).size()) return std::nullopt;

    JointColoring jc = joint_refinement(a, b);
    std::map<int, int> balance;
    for (int c : jc.color_a) ++balance[c];
    for (int c : jc.color_b) --balance[c];
    for (auto& [c, diff] : balance)
        if (diff != 0) return std::nullopt;

    detail::IsoSearch search{a, b, jc, std::vector<int>(a.size(), -1),
                             std::vector<int>(b.size(), -1), budget_nodes};
    if (search.extend()) return search.map_ab;
    return std::nullopt;
}

}  // namespace tdspan
