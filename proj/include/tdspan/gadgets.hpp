#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tdspan/plans.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

namespace detail {

inline void check_node_cap(long long expected, long long cap) {
    if (expected > cap)
        throw ResourceExhausted("generator would emit " + std::to_string(expected) +
                                " nodes, above the cap of " + std::to_string(cap));
}

inline Annotation run_annotation(int block, RunSide side, int run_value) {
    Annotation a;
    a.role = Role::run_member;
    a.block = block;
    a.side = side;
    a.run_value = run_value;
    return a;
}

inline Annotation source_annotation(Role role, int block = -1) {
    Annotation a;
    a.role = role;
    a.block = block;
    return a;
}

// One rail of a gadget: buffer path, run, buffer path, between two existing
// endpoints. Returns nothing; ids grow in left-to-right order.
inline void append_rail(StructureBuilder& b, ElementId s, ElementId t, long long beta,
                        long long run_length, int block, RunSide side, int run_value,
                        const std::string& pattern) {
    long long buffer = (1LL << beta) - 1;
    ElementId prev = s;
    for (long long i = 0; i < buffer; ++i) {
        ElementId fresh = b.add_element();
        b.add_edge(prev, fresh);
        prev = fresh;
    }
    for (long long i = 0; i < run_length; ++i) {
        Color c = Color::none;
        if (!pattern.empty()) c = pattern[i % pattern.size()] == '1' ? Color::p1 : Color::p0;
        ElementId fresh = b.add_element(c, run_annotation(block, side, run_value));
        b.add_edge(prev, fresh);
        prev = fresh;
    }
    for (long long i = 0; i < buffer; ++i) {
        ElementId fresh = b.add_element();
        b.add_edge(prev, fresh);
        prev = fresh;
    }
    b.add_edge(prev, t);
}

inline std::string run_pattern(long long n, long long ones) {
    std::string p;
    for (long long i = 0; i < n; ++i) p.push_back(i < n - ones ? '0' : '1');
    return p;
}

// Appends one two-rail gadget between existing s and t. Empty patterns mean
// uncolored runs.
inline void append_gadget_body(StructureBuilder& b, ElementId s, ElementId t, long long beta,
                               long long p, long long n, int block, int top_value,
                               int bottom_value, const std::string& top_pattern,
                               const std::string& bottom_pattern) {
    append_rail(b, s, t, beta, p * n, block, RunSide::top, top_value, top_pattern);
    append_rail(b, s, t, beta, p * n, block, RunSide::bottom, bottom_value, bottom_pattern);
}

}  // namespace detail

// Two parallel s-t rails: 2^beta edges, a run of p*n nodes, 2^beta edges.
// Size 2^{beta+2} + 2pn - 2.
inline Structure make_gadget(long long beta, long long p, long long n,
                             long long node_cap = 10'000'000) {
    if (beta < 0 || p < 1 || n < 1) throw std::invalid_argument("make_gadget: bad inputs");
    detail::check_node_cap((1LL << (beta + 2)) + 2 * p * n - 2, node_cap);
    StructureBuilder b(Vocabulary::colored_graphs());
    ElementId s = b.add_element(Color::none, detail::source_annotation(Role::source_s, 0));
    ElementId t = b.add_element(Color::none, detail::source_annotation(Role::source_t, 1));
    detail::append_gadget_body(b, s, t, beta, p, n, 0, -1, -1, "", "");
    return b.build();
}

// Gadget whose runs are colored (0^{n-n1} 1^{n1})^p on top and the n2
// pattern on the bottom.
inline Structure make_bicol(long long beta, long long p, long long n, long long n1, long long n2,
                            long long node_cap = 10'000'000) {
    if (beta < 0 || p < 1 || n < 1) throw std::invalid_argument("make_bicol: bad inputs");
    if (n1 < 0 || n1 > n || n2 < 0 || n2 > n)
        throw std::invalid_argument("make_bicol: run counts outside [0, n]");
    detail::check_node_cap((1LL << (beta + 2)) + 2 * p * n - 2, node_cap);
    StructureBuilder b(Vocabulary::colored_graphs());
    ElementId s = b.add_element(Color::none, detail::source_annotation(Role::source_s, 0));
    ElementId t = b.add_element(Color::none, detail::source_annotation(Role::source_t, 1));
    detail::append_gadget_body(b, s, t, beta, p, n, 0, static_cast<int>(n1),
                               static_cast<int>(n2), detail::run_pattern(n, n1),
                               detail::run_pattern(n, n2));
    return b.build();
}

// Concatenation of m colored gadgets sharing their endpoints s_0..s_m.
// Size m(2^{beta+2} + 2pn - 2) - (m - 1).
inline Structure make_bicolit(long long beta, long long p, long long n, long long n1,
                              long long n2, long long m, long long node_cap = 10'000'000) {
    if (m < 1) throw std::invalid_argument("make_bicolit: m must be positive");
    if (beta < 0 || p < 1 || n < 1) throw std::invalid_argument("make_bicolit: bad inputs");
    if (n1 < 0 || n1 > n || n2 < 0 || n2 > n)
        throw std::invalid_argument("make_bicolit: run counts outside [0, n]");
    long long gadget = (1LL << (beta + 2)) + 2 * p * n - 2;
    detail::check_node_cap(m * gadget - (m - 1), node_cap);
    StructureBuilder b(Vocabulary::colored_graphs());
    std::vector<ElementId> junction(m + 1);
    junction[0] = b.add_element(Color::none, detail::source_annotation(Role::source_s, 0));
    for (long long i = 1; i <= m; ++i)
        junction[i] = b.add_element(
            Color::none, detail::source_annotation(i == m ? Role::source_t : Role::source_s,
                                                   static_cast<int>(i)));
    for (long long i = 0; i < m; ++i)
        detail::append_gadget_body(b, junction[i], junction[i + 1], beta, p, n,
                                   static_cast<int>(i), static_cast<int>(n1),
                                   static_cast<int>(n2), detail::run_pattern(n, n1),
                                   detail::run_pattern(n, n2));
    return b.build();
}

// Micro-overridable parameters of the pathwidth pair. The planner's values
// are the conforming ones; anything smaller is for test scale only.
struct PwInstance {
    long long beta = 1, p = 1, n = 3, m = 1, l = 1;
    long long node_cap = 10'000'000;
};

inline PwInstance pw_instance(const PwPlan& plan) {
    PwInstance inst;
    inst.beta = plan.beta;
    inst.n = plan.n;
    if (plan.p > 1'000'000'000 || plan.m > 1'000'000'000 || plan.l > 1'000'000'000)
        throw ResourceExhausted("pw_instance: plan parameters beyond generator scale");
    inst.p = static_cast<long long>(plan.p);
    inst.m = static_cast<long long>(plan.m);
    inst.l = static_cast<long long>(plan.l);
    return inst;
}

namespace detail {

// Shared chassis of the two pathwidth structures: a row of Bicolit blocks,
// paired inside groups by a length-l path and joined across groups by a
// single edge. The run-color values of block j come from the caller.
inline Structure build_pw_row(const PwInstance& inst,
                              const std::vector<std::pair<int, int>>& block_values) {
    if (inst.n % 2 == 0) throw std::invalid_argument("pathwidth build: n must be odd");
    if (inst.beta < 0 || inst.p < 1 || inst.m < 1 || inst.l < 1)
        throw std::invalid_argument("pathwidth build: bad instance");
    long long blocks = static_cast<long long>(block_values.size());
    long long gadget = (1LL << (inst.beta + 2)) + 2 * inst.p * inst.n - 2;
    long long bicolit = inst.m * gadget - (inst.m - 1);
    check_node_cap(blocks * bicolit + (blocks / 2) * (inst.l - 1), inst.node_cap);

    StructureBuilder b(Vocabulary::colored_graphs());
    ElementId prev_tail = kNoMark;
    for (long long j = 0; j < blocks; ++j) {
        auto [n1, n2] = block_values[j];
        // One bicolit, inline so ids stay globally sequential.
        std::vector<ElementId> junction(inst.m + 1);
        for (long long i = 0; i <= inst.m; ++i)
            junction[i] = b.add_element(
                Color::none, source_annotation(i == inst.m ? Role::source_t : Role::source_s,
                                               static_cast<int>(i)));
        for (long long i = 0; i < inst.m; ++i)
            append_gadget_body(b, junction[i], junction[i + 1], inst.beta, inst.p, inst.n,
                               static_cast<int>(i), n1, n2, run_pattern(inst.n, n1),
                               run_pattern(inst.n, n2));
        if (prev_tail != kNoMark) {
            if (j % 2 == 1) {
                // Second block of a group: length-l connector path.
                ElementId prev = prev_tail;
                for (long long i = 0; i + 1 < inst.l; ++i) {
                    ElementId fresh = b.add_element();
                    b.add_edge(prev, fresh);
                    prev = fresh;
                }
                b.add_edge(prev, junction[0]);
            } else {
                // New group: single edge.
                b.add_edge(prev_tail, junction[0]);
            }
        }
        prev_tail = junction[inst.m];
    }
    return b.build();
}

}  // namespace detail

// Row of Bicolit(2i, 2i+1) blocks, two per group, for i = 0..(n-1)/2.
inline Structure build_pw_G(const PwInstance& inst) {
    std::vector<std::pair<int, int>> values;
    for (long long i = 0; 2 * i + 1 <= inst.n; ++i) {
        values.emplace_back(static_cast<int>(2 * i), static_cast<int>(2 * i + 1));
        values.emplace_back(static_cast<int>(2 * i), static_cast<int>(2 * i + 1));
    }
    return detail::build_pw_row(inst, values);
}

// Row of Bicolit(i, i) blocks for i = 0..n, grouped in consecutive pairs.
inline Structure build_pw_H(const PwInstance& inst) {
    std::vector<std::pair<int, int>> values;
    for (long long i = 0; i <= inst.n; ++i)
        values.emplace_back(static_cast<int>(i), static_cast<int>(i));
    return detail::build_pw_row(inst, values);
}

namespace detail {

// Interior of one Loz between existing endpoints a and b: two complete
// binary trees of height p whose i-th leaves are joined by a length-l path.
inline void append_loz_body(StructureBuilder& b, ElementId a, ElementId bnode, long long p,
                            long long l) {
    auto grow_tree = [&](ElementId root) {
        std::vector<ElementId> level{root};
        std::vector<ElementId> leaves;
        for (long long depth = 1; depth <= p; ++depth) {
            std::vector<ElementId> next;
            for (ElementId parent : level)
                for (int c = 0; c < 2; ++c) {
                    ElementId fresh = b.add_element();
                    b.add_edge(parent, fresh);
                    next.push_back(fresh);
                }
            level = std::move(next);
        }
        return level;  // the 2^p leaves in left-to-right order
    };
    std::vector<ElementId> leaves_a = grow_tree(a);
    std::vector<ElementId> leaves_b = grow_tree(bnode);
    for (std::size_t i = 0; i < leaves_a.size(); ++i) {
        Annotation ann;
        ann.role = Role::loz_leaf;
        ann.pair_index = static_cast<int>(i);
        b.set_annotation(leaves_a[i], ann);
        b.set_annotation(leaves_b[i], ann);
        ElementId prev = leaves_a[i];
        for (long long j = 0; j + 1 < l; ++j) {
            ElementId fresh = b.add_element();
            b.add_edge(prev, fresh);
            prev = fresh;
        }
        b.add_edge(prev, leaves_b[i]);
    }
}

inline long long loz_size(long long p, long long l) {
    return 2 * ((1LL << (p + 1)) - 1) + (1LL << p) * (l - 1);
}

}  // namespace detail

// Standalone Loz gadget with annotated sources.
inline Structure make_loz(long long p, long long l, long long node_cap = 10'000'000) {
    if (p < 1 || l < 1) throw std::invalid_argument("make_loz: bad inputs");
    detail::check_node_cap(detail::loz_size(p, l), node_cap);
    StructureBuilder b(Vocabulary::colored_graphs());
    ElementId a = b.add_element(Color::none, detail::source_annotation(Role::source_s));
    ElementId bnode = b.add_element(Color::none, detail::source_annotation(Role::source_t));
    detail::append_loz_body(b, a, bnode, p, l);
    return b.build();
}

// Fresh path of |w| nodes hanging off x, the i-th colored by bit i of w.
inline Structure attach_word_label(const Structure& s, ElementId x, const std::string& w) {
    if (x < 0 || x >= s.size()) throw std::invalid_argument("attach_word_label: unknown element");
    StructureBuilder b(s.vocabulary());
    for (ElementId e = 0; e < s.size(); ++e) b.add_element(s.color(e), s.annotation(e));
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        if (s.vocabulary().relation(rel).name == "P0" || s.vocabulary().relation(rel).name == "P1")
            continue;
        for (const auto& t : s.tuples(rel)) b.add_tuple(rel, t);
    }
    ElementId prev = x;
    for (std::size_t i = 0; i < w.size(); ++i) {
        Annotation ann;
        ann.role = Role::label_path;
        ann.position = static_cast<int>(i);
        ann.word = w;
        ElementId fresh = b.add_element(w[i] == '1' ? Color::p1 : Color::p0, ann);
        b.add_edge(prev, fresh);
        prev = fresh;
    }
    return b.build();
}

// Micro-overridable parameters of the treewidth pair.
struct TwInstance {
    long long k = 1;
    long long p = 2;         // Loz tree height
    long long l = 2;         // Loz rail length
    long long n = 4;         // word length bound
    int stop_after_stage = 3;  // 1: spine links only; 2: + cross links; 3: full chain
    long long node_cap = 10'000'000;
};

inline TwInstance tw_instance(const TwPlan& plan) {
    TwInstance inst;
    inst.k = plan.k;
    inst.p = plan.p;
    if (plan.l > 1'000'000'000) throw ResourceExhausted("tw_instance: l beyond generator scale");
    inst.l = static_cast<long long>(plan.l);
    inst.n = plan.n;
    return inst;
}

namespace detail {

// Words of length <= n in (length, lex) order; index in this list = id of
// the source standing for the word.
inline std::vector<std::string> all_words(long long n) {
    std::vector<std::string> words{""};
    for (long long len = 1; len <= n; ++len) {
        std::vector<std::string> level;
        std::size_t begin = words.size() - (1ULL << (len - 1));
        for (std::size_t i = begin; i < words.size(); ++i) {
            level.push_back(words[i] + "0");
            level.push_back(words[i] + "1");
        }
        // Levels come out in lex order because parents are in lex order.
        for (auto& w : level) words.push_back(std::move(w));
    }
    return words;
}

inline Structure build_tw(const TwInstance& inst, bool link_zero_child) {
    if (inst.k < 1 || inst.p < 1 || inst.l < 1 || inst.n < 1)
        throw std::invalid_argument("treewidth build: bad instance");
    long long sources = (1LL << (inst.n + 1)) - 1;
    long long labels = 0;
    for (long long len = 1; len <= inst.n; ++len) labels += len * (1LL << len);
    long long loz_interior = loz_size(inst.p, inst.l) - 2;
    check_node_cap(sources + labels + (sources - 1) * loz_interior, inst.node_cap);

    long long h = std::max<long long>(0, tw_depth(inst.k, inst.n));
    std::vector<std::string> words = all_words(inst.n);
    std::map<std::string, ElementId> id_of;

    StructureBuilder b(Vocabulary::colored_graphs());
    for (const auto& w : words) {
        Annotation ann;
        ann.role = Role::source_word;
        ann.word = w;
        if (static_cast<long long>(w.size()) >= h) ann.htree = w.substr(0, h);
        id_of[w] = b.add_element(Color::none, ann);
    }
    for (const auto& w : words) {
        ElementId prev = id_of[w];
        for (std::size_t i = 0; i < w.size(); ++i) {
            Annotation ann;
            ann.role = Role::label_path;
            ann.position = static_cast<int>(i);
            ann.word = w;
            ElementId fresh = b.add_element(w[i] == '1' ? Color::p1 : Color::p0, ann);
            b.add_edge(prev, fresh);
            prev = fresh;
        }
    }

    std::vector<int> loz_count(words.size(), 0);
    DisjointSet linked(static_cast<int>(words.size()));
    auto add_loz = [&](const std::string& u, const std::string& v) {
        ElementId a = id_of.at(u), bb = id_of.at(v);
        append_loz_body(b, a, bb, inst.p, inst.l);
        ++loz_count[a];
        ++loz_count[bb];
        linked.merge(a, bb);
    };

    // Stage (i): the spine, one Loz per (w, w0) in one structure and per
    // (w, w1) in the other.
    for (const auto& w : words) {
        if (static_cast<long long>(w.size()) >= inst.n) continue;
        add_loz(w, w + (link_zero_child ? "0" : "1"));
    }

    // Stage (ii): only where the zero-spine leaves depth-n words ending in
    // 1 isolated, cross-link the h-trees pairwise through those leaves.
    if (link_zero_child && inst.stop_after_stage >= 2 && h >= 1) {
        long long copies = 2 * inst.k + 3;
        std::vector<std::string> roots;
        for (const auto& w : words)
            if (static_cast<long long>(w.size()) == h) roots.push_back(w);
        std::map<std::string, std::vector<std::string>> free_leaves;
        for (const auto& w : words)
            if (static_cast<long long>(w.size()) == inst.n && w.back() == '1')
                free_leaves[w.substr(0, h)].push_back(w);
        std::map<std::string, std::size_t> cursor;
        for (std::size_t i = 0; i < roots.size(); ++i)
            for (std::size_t j = i + 1; j < roots.size(); ++j)
                for (long long c = 0; c < copies; ++c) {
                    auto& li = free_leaves[roots[i]];
                    auto& lj = free_leaves[roots[j]];
                    std::size_t& ci = cursor[roots[i]];
                    std::size_t& cj = cursor[roots[j]];
                    if (ci >= li.size() || cj >= lj.size())
                        throw std::invalid_argument(
                            "treewidth build: not enough free leaves for cross links");
                    add_loz(li[ci++], lj[cj++]);
                }
    }

    // Stage (iii): close everything into a single chain of Loz copies.
    // Components ordered by least word; each is a path in the source graph,
    // joined tail-to-head at free endpoints.
    if (inst.stop_after_stage >= 3) {
        std::map<int, std::vector<ElementId>> comps;
        for (std::size_t i = 0; i < words.size(); ++i)
            comps[linked.find(static_cast<int>(i))].push_back(static_cast<ElementId>(i));
        std::vector<std::pair<ElementId, ElementId>> ends;  // (head, tail) per component
        for (auto& [root, members] : comps) {
            std::vector<ElementId> free;
            for (ElementId e : members)
                if (loz_count[e] < 2) free.push_back(e);
            if (members.size() == 1) {
                ends.emplace_back(members.front(), members.front());
                continue;
            }
            if (free.size() != 2)
                throw std::logic_error("treewidth build: component is not a path");
            ends.emplace_back(std::min(free[0], free[1]), std::max(free[0], free[1]));
        }
        std::sort(ends.begin(), ends.end());  // by head = least word in component
        for (std::size_t j = 0; j + 1 < ends.size(); ++j)
            add_loz(words[ends[j].second], words[ends[j + 1].first]);
    }
    return b.build();
}

}  // namespace detail

inline Structure build_tw_G(const TwInstance& inst) { return detail::build_tw(inst, true); }
inline Structure build_tw_H(const TwInstance& inst) { return detail::build_tw(inst, false); }

}  // namespace tdspan
