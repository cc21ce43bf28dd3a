#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdspan/classical.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

namespace detail {

inline bool is_generator_source(const Structure& s, ElementId x) {
    const auto& a = s.annotation(x);
    return a && (a->role == Role::source_s || a->role == Role::source_t ||
                 a->role == Role::source_word);
}

// A maximal source-free corridor between two sources: interior ids in walk
// order plus whether the corridor carries run members (and on which side).
struct Corridor {
    ElementId from = 0, to = 0;
    std::vector<ElementId> interior;
    bool has_run = false;
    RunSide side = RunSide::top;
};

inline std::vector<Corridor> source_corridors(const Structure& s,
                                              const std::vector<ElementId>& sources) {
    std::vector<char> is_src(s.size(), 0);
    for (ElementId x : sources) is_src[x] = 1;
    std::vector<Corridor> out;
    std::set<ElementId> seen_interior;
    for (ElementId x : sources) {
        for (ElementId first : s.neighbors(x)) {
            if (is_src[first] || seen_interior.count(first)) continue;
            Corridor c;
            c.from = x;
            ElementId prev = x, cur = first;
            while (!is_src[cur]) {
                c.interior.push_back(cur);
                const auto& a = s.annotation(cur);
                if (a && a->role == Role::run_member) {
                    c.has_run = true;
                    c.side = a->side;
                }
                if (s.degree(cur) != 2)
                    throw std::invalid_argument(
                        "canonical sweep: corridor node of degree != 2; "
                        "input lacks generator shape");
                const auto& nb = s.neighbors(cur);
                ElementId next = nb[0] == prev ? nb[1] : nb[0];
                prev = cur;
                cur = next;
            }
            c.to = cur;
            seen_interior.insert(c.interior.begin(), c.interior.end());
            out.push_back(std::move(c));
        }
    }
    return out;
}

// Orders the sources along the row/chain they form, starting from the
// smallest-id end. Multiple corridors between the same pair count once.
inline std::vector<ElementId> source_walk(const Structure& s,
                                          const std::vector<ElementId>& sources,
                                          const std::vector<Corridor>& corridors) {
    std::map<ElementId, std::set<ElementId>> link;
    for (const auto& c : corridors) {
        link[c.from].insert(c.to);
        link[c.to].insert(c.from);
    }
    for (ElementId x : sources)
        for (ElementId y : s.neighbors(x))
            if (is_generator_source(s, y)) link[x].insert(y);
    ElementId start = -1;
    for (ElementId x : sources)
        if (link[x].size() <= 1 && (start < 0 || x < start)) start = x;
    if (start < 0) throw std::invalid_argument("canonical sweep: sources do not form a row");
    std::vector<ElementId> walk{start};
    std::set<ElementId> visited{start};
    while (true) {
        ElementId next = -1;
        for (ElementId y : link[walk.back()])
            if (!visited.count(y)) {
                next = y;
                break;
            }
        if (next < 0) break;
        walk.push_back(next);
        visited.insert(next);
    }
    if (walk.size() != sources.size())
        throw std::invalid_argument("canonical sweep: sources do not form a row");
    return walk;
}

}  // namespace detail

// Left-to-right path decomposition of a pathwidth row (or a single gadget
// chain): rails swept one step on the top path then one step on the bottom
// path, connectors two elements at a time. Width 2, span <= 2.
inline TreeDecomposition canonical_pd_pw(const Structure& s) {
    std::vector<ElementId> sources;
    for (ElementId x = 0; x < s.size(); ++x)
        if (detail::is_generator_source(s, x)) sources.push_back(x);
    if (sources.empty())
        throw std::invalid_argument("canonical_pd_pw: no annotated sources");

    std::vector<detail::Corridor> corridors = detail::source_corridors(s, sources);
    std::vector<ElementId> walk = detail::source_walk(s, sources, corridors);

    // Corridors grouped per consecutive source pair, oriented left-to-right.
    std::map<std::pair<ElementId, ElementId>, std::vector<const detail::Corridor*>> by_pair;
    for (const auto& c : corridors)
        by_pair[std::minmax(c.from, c.to)].push_back(&c);

    std::vector<std::vector<ElementId>> bags;
    for (std::size_t j = 0; j + 1 < walk.size(); ++j) {
        ElementId a = walk[j], b = walk[j + 1];
        auto it = by_pair.find(std::minmax(a, b));
        if (it == by_pair.end()) {
            bags.push_back({a, b});  // direct join edge
            continue;
        }
        const auto& segs = it->second;
        if (segs.size() == 1 && !segs[0]->has_run) {
            // Connector path, two elements per bag.
            std::vector<ElementId> nodes = segs[0]->interior;
            if (segs[0]->from != a) std::reverse(nodes.begin(), nodes.end());
            ElementId prev = a;
            for (ElementId x : nodes) {
                bags.push_back({prev, x});
                prev = x;
            }
            bags.push_back({prev, b});
        } else if (segs.size() == 2 && segs[0]->has_run && segs[1]->has_run &&
                   segs[0]->side != segs[1]->side) {
            const detail::Corridor* top = segs[0]->side == RunSide::top ? segs[0] : segs[1];
            const detail::Corridor* bottom = segs[0]->side == RunSide::top ? segs[1] : segs[0];
            std::vector<ElementId> t = top->interior, u = bottom->interior;
            if (top->from != a) std::reverse(t.begin(), t.end());
            if (bottom->from != a) std::reverse(u.begin(), u.end());
            if (t.size() != u.size() || t.empty())
                throw std::invalid_argument("canonical_pd_pw: rails of unequal length");
            bags.push_back({a, t[0], u[0]});
            for (std::size_t i = 0; i + 1 < t.size(); ++i) {
                bags.push_back({t[i], t[i + 1], u[i]});
                bags.push_back({t[i + 1], u[i], u[i + 1]});
            }
            bags.push_back({t.back(), u.back(), b});
        } else {
            throw std::invalid_argument("canonical_pd_pw: missing run annotations");
        }
    }
    if (bags.empty()) bags.push_back({walk[0]});

    ClassicalDecomposition cd;
    cd.bag = std::move(bags);
    cd.parent.resize(cd.bag.size());
    for (std::size_t i = 0; i < cd.bag.size(); ++i)
        cd.parent[i] = static_cast<NodeId>(i) - 1;
    return encode_classical(s, cd, 2);
}

enum class TwVariant { series_parallel, sweep };

namespace detail {

// Geometry of one Loz copy, recovered from the graph and leaf annotations.
struct LozGeometry {
    ElementId x = 0, y = 0;            // chain-order terminals
    long long p = 0, l = 0;            // tree height, rail length
    std::vector<ElementId> nodes;      // interior nodes
    std::vector<int> dist_x;           // distance from x, indexed like nodes
    std::map<ElementId, int> index;    // node -> index into nodes
    std::vector<std::vector<ElementId>> levels;  // dist 1 .. 2p+l-1
};

inline LozGeometry recover_loz(const Structure& s, ElementId x, ElementId y,
                               const std::vector<ElementId>& component) {
    LozGeometry g;
    g.x = x;
    g.y = y;
    g.nodes = component;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) g.index[g.nodes[i]] = static_cast<int>(i);
    g.dist_x.assign(g.nodes.size(), -1);
    std::deque<ElementId> queue;
    for (ElementId nb : s.neighbors(x))
        if (g.index.count(nb)) {
            g.dist_x[g.index[nb]] = 1;
            queue.push_back(nb);
        }
    while (!queue.empty()) {
        ElementId v = queue.front();
        queue.pop_front();
        for (ElementId w : s.neighbors(v)) {
            auto it = g.index.find(w);
            if (it == g.index.end() || g.dist_x[it->second] >= 0) continue;
            g.dist_x[it->second] = g.dist_x[g.index[v]] + 1;
            queue.push_back(w);
        }
    }
    int leaf_min = -1, depth = 0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.dist_x[i] < 0)
            throw std::invalid_argument("canonical_td_tw: loz interior not connected");
        depth = std::max(depth, g.dist_x[i]);
        const auto& a = s.annotation(g.nodes[i]);
        if (a && a->role == Role::loz_leaf)
            leaf_min = leaf_min < 0 ? g.dist_x[i] : std::min(leaf_min, g.dist_x[i]);
    }
    if (leaf_min < 0) throw std::invalid_argument("canonical_td_tw: loz without leaf marks");
    g.p = leaf_min;
    g.l = (depth + 1) - 2 * g.p;  // y sits at distance 2p + l
    if (g.l < 1) throw std::invalid_argument("canonical_td_tw: malformed loz");
    g.levels.assign(depth + 1, {});
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        g.levels[g.dist_x[i]].push_back(g.nodes[i]);
    g.levels.erase(g.levels.begin());  // distance 0 is x itself, not interior
    for (auto& level : g.levels) std::sort(level.begin(), level.end());
    return g;
}

// All Loz copies of a generated chain in walk order, plus per-source labels.
struct ChainLayout {
    std::vector<ElementId> walk;                       // sources in chain order
    std::vector<LozGeometry> lozzes;                   // lozzes[j] joins walk[j], walk[j+1]
    std::map<ElementId, std::vector<ElementId>> labels;  // source -> label path in order
};

inline ChainLayout recover_chain(const Structure& s) {
    std::vector<ElementId> sources;
    std::vector<char> is_src(s.size(), 0), is_label(s.size(), 0);
    for (ElementId x = 0; x < s.size(); ++x) {
        const auto& a = s.annotation(x);
        if (is_generator_source(s, x)) {
            sources.push_back(x);
            is_src[x] = 1;
        } else if (a && a->role == Role::label_path) {
            is_label[x] = 1;
        }
    }
    if (sources.empty()) throw std::invalid_argument("canonical_td_tw: no annotated sources");

    ChainLayout layout;
    // Label paths, read off the position annotation.
    for (ElementId x = 0; x < s.size(); ++x) {
        if (!is_label[x]) continue;
        const auto& a = s.annotation(x);
        if (a->position == 0) {
            ElementId source = -1;
            std::vector<ElementId> path;
            ElementId prev = -1, cur = x;
            for (ElementId nb : s.neighbors(x))
                if (is_src[nb]) source = nb;
            if (source < 0)
                throw std::invalid_argument("canonical_td_tw: label path detached from source");
            prev = source;
            while (true) {
                path.push_back(cur);
                ElementId next = -1;
                for (ElementId nb : s.neighbors(cur))
                    if (nb != prev && is_label[nb]) next = nb;
                if (next < 0) break;
                prev = cur;
                cur = next;
            }
            layout.labels[source] = std::move(path);
        }
    }

    // Loz interiors: connected components after removing sources and labels.
    std::vector<int> comp(s.size(), -1);
    int comp_count = 0;
    for (ElementId x = 0; x < s.size(); ++x) {
        if (is_src[x] || is_label[x] || comp[x] >= 0) continue;
        std::deque<ElementId> queue{x};
        comp[x] = comp_count;
        while (!queue.empty()) {
            ElementId v = queue.front();
            queue.pop_front();
            for (ElementId w : s.neighbors(v)) {
                if (is_src[w] || is_label[w] || comp[w] >= 0) continue;
                comp[w] = comp_count;
                queue.push_back(w);
            }
        }
        ++comp_count;
    }
    std::vector<std::vector<ElementId>> raw_members(comp_count);
    std::vector<std::set<ElementId>> raw_terminals(comp_count);
    for (ElementId x = 0; x < s.size(); ++x)
        if (comp[x] >= 0) {
            raw_members[comp[x]].push_back(x);
            for (ElementId nb : s.neighbors(x))
                if (is_src[nb]) raw_terminals[comp[x]].insert(nb);
        }

    // Removing both sources splits each Loz interior into its two depth-1
    // branches: re-join the pieces sharing a terminal pair.
    std::map<std::pair<ElementId, ElementId>, std::vector<ElementId>> members_of;
    for (int c = 0; c < comp_count; ++c) {
        if (raw_terminals[c].size() != 2)
            throw std::invalid_argument("canonical_td_tw: loz with terminal count != 2");
        auto key = std::make_pair(*raw_terminals[c].begin(), *raw_terminals[c].rbegin());
        auto& bucket = members_of[key];
        bucket.insert(bucket.end(), raw_members[c].begin(), raw_members[c].end());
    }
    std::vector<std::pair<ElementId, ElementId>> pairs;
    std::vector<std::vector<ElementId>> members;
    for (auto& [key, bucket] : members_of) {
        std::sort(bucket.begin(), bucket.end());
        pairs.push_back(key);
        members.push_back(std::move(bucket));
    }
    int loz_count = static_cast<int>(pairs.size());

    // Source order along the chain of Loz copies.
    std::map<ElementId, std::vector<int>> incident;
    for (int c = 0; c < loz_count; ++c) {
        incident[pairs[c].first].push_back(c);
        incident[pairs[c].second].push_back(c);
    }
    ElementId start = -1;
    for (ElementId x : sources)
        if (incident[x].size() <= 1 && (start < 0 || x < start)) start = x;
    if (start < 0) throw std::invalid_argument("canonical_td_tw: sources do not form a chain");
    std::set<int> used;
    layout.walk.push_back(start);
    while (true) {
        ElementId here = layout.walk.back();
        int next_comp = -1;
        for (int c : incident[here])
            if (!used.count(c)) {
                next_comp = c;
                break;
            }
        if (next_comp < 0) break;
        used.insert(next_comp);
        ElementId other =
            pairs[next_comp].first == here ? pairs[next_comp].second : pairs[next_comp].first;
        layout.lozzes.push_back(recover_loz(s, here, other, members[next_comp]));
        layout.walk.push_back(other);
    }
    if (layout.walk.size() != sources.size() || used.size() != std::size_t(loz_count))
        throw std::invalid_argument("canonical_td_tw: sources do not form a chain");
    return layout;
}

// Appends a classical bag and returns its index.
inline int push_bag(ClassicalDecomposition& cd, NodeId parent, std::vector<ElementId> bag) {
    cd.bag.push_back(std::move(bag));
    cd.parent.push_back(parent);
    return static_cast<int>(cd.bag.size()) - 1;
}

inline void attach_label_chains(ClassicalDecomposition& cd,
                                const std::map<ElementId, int>& anchor,
                                const ChainLayout& layout) {
    for (const auto& [source, path] : layout.labels) {
        int at = anchor.at(source);
        ElementId prev = source;
        for (ElementId node : path) {
            at = push_bag(cd, at, {prev, node});
            prev = node;
        }
    }
}

// Series-parallel recursion: a subtree of bags rooted at {u, v} covering the
// sub-lozenge between mirrored tree nodes u and v at the given depth.
// Returns the index of the {u, v} root bag.
inline int sp_descend(ClassicalDecomposition& cd, const Structure& s, const LozGeometry& g,
                      NodeId parent, ElementId u, ElementId v, long long depth) {
    int pair_root = push_bag(cd, parent, {u, v});
    if (depth == g.p) {
        // Base: the length-l rail from u to v.
        ElementId prev = u, cur = u;
        int at = pair_root;
        for (long long step = 1; step < g.l; ++step) {
            ElementId next = -1;
            for (ElementId nb : s.neighbors(cur)) {
                auto it = g.index.find(nb);
                if (it == g.index.end() || nb == prev) continue;
                if (g.dist_x[it->second] == g.dist_x[g.index.at(cur)] + 1) next = nb;
            }
            if (next < 0) throw std::invalid_argument("canonical_td_tw: broken rail");
            at = push_bag(cd, at, {cur, next, v});
            prev = cur;
            cur = next;
        }
        return pair_root;  // l = 1 leaves just the {u, v} bag, covering the edge
    }
    // Children of u one level further from x; mirrors of v one level closer
    // to y, matched through the rail below the leftmost descendant leaf.
    std::vector<ElementId> uc, vc;
    for (ElementId nb : s.neighbors(u)) {
        auto it = g.index.find(nb);
        if (it != g.index.end() && g.dist_x[it->second] == depth + 1) uc.push_back(nb);
    }
    for (ElementId nb : s.neighbors(v)) {
        auto it = g.index.find(nb);
        if (it != g.index.end() &&
            g.dist_x[it->second] == 2 * g.p + g.l - depth - 1)
            vc.push_back(nb);
    }
    std::sort(uc.begin(), uc.end());
    if (uc.size() != 2 || vc.size() != 2)
        throw std::invalid_argument("canonical_td_tw: tree node without two children");
    for (ElementId c : uc) {
        // Descend to the leftmost leaf under c, cross its rail, climb back up
        // to depth+1 on the y side to find the mirror child.
        ElementId leaf = c;
        while (g.dist_x[g.index.at(leaf)] < g.p) {
            ElementId down = -1;
            for (ElementId nb : s.neighbors(leaf)) {
                auto it = g.index.find(nb);
                if (it != g.index.end() && g.dist_x[it->second] == g.dist_x[g.index.at(leaf)] + 1)
                    down = down < 0 ? nb : std::min(down, nb);
            }
            leaf = down;
        }
        ElementId across = leaf;
        while (g.dist_x[g.index.at(across)] < g.p + g.l) {
            ElementId down = -1;
            for (ElementId nb : s.neighbors(across)) {
                auto it = g.index.find(nb);
                if (it != g.index.end() &&
                    g.dist_x[it->second] == g.dist_x[g.index.at(across)] + 1)
                    down = nb;
            }
            across = down;
        }
        ElementId mirror = across;
        while (g.dist_x[g.index.at(mirror)] < 2 * g.p + g.l - depth - 1) {
            ElementId up = -1;
            for (ElementId nb : s.neighbors(mirror)) {
                auto it = g.index.find(nb);
                if (it != g.index.end() &&
                    g.dist_x[it->second] == g.dist_x[g.index.at(mirror)] + 1)
                    up = nb;
            }
            mirror = up;
        }
        if (std::find(vc.begin(), vc.end(), mirror) == vc.end())
            throw std::invalid_argument("canonical_td_tw: mirror child not under v");
        int link_u = push_bag(cd, pair_root, {u, c, v});
        int link_v = push_bag(cd, link_u, {c, mirror, v});
        sp_descend(cd, s, g, link_v, c, mirror, depth + 1);
    }
    return pair_root;
}

}  // namespace detail

// Width-2 decomposition from each Loz's series-parallel shape, or a
// level-sweep variant of width 2^{p+1} - 1 whose span stays small.
inline TreeDecomposition canonical_td_tw(const Structure& s, TwVariant variant) {
    detail::ChainLayout layout = detail::recover_chain(s);
    ClassicalDecomposition cd;
    std::map<ElementId, int> anchor;  // source -> bag index labels hang from

    if (variant == TwVariant::series_parallel) {
        NodeId spine = detail::push_bag(cd, kNoParent, {layout.walk[0]});
        anchor[layout.walk[0]] = spine;
        for (std::size_t j = 0; j < layout.lozzes.size(); ++j) {
            const auto& g = layout.lozzes[j];
            int pair_root = detail::sp_descend(cd, s, g, spine, g.x, g.y, 0);
            spine = detail::push_bag(cd, pair_root, {g.y});
            anchor[g.y] = spine;
        }
        detail::attach_label_chains(cd, anchor, layout);
        return encode_classical(s, cd, 2);
    }

    // Sweep variant: bags are unions of consecutive distance slices of each
    // Loz, walked left to right; labels hang off their source's first bag.
    NodeId prev = kNoParent;
    std::size_t max_bag = 1;
    if (layout.lozzes.empty()) {
        prev = detail::push_bag(cd, prev, {layout.walk[0]});
        anchor[layout.walk[0]] = prev;
    }
    for (std::size_t j = 0; j < layout.lozzes.size(); ++j) {
        const auto& g = layout.lozzes[j];
        std::vector<std::vector<ElementId>> slices;
        slices.push_back({g.x});
        for (const auto& level : g.levels) slices.push_back(level);
        slices.push_back({g.y});
        for (std::size_t i = 0; i + 1 < slices.size(); ++i) {
            std::vector<ElementId> bag = slices[i];
            bag.insert(bag.end(), slices[i + 1].begin(), slices[i + 1].end());
            max_bag = std::max(max_bag, bag.size());
            bool first_of_loz = i == 0;
            prev = detail::push_bag(cd, prev, std::move(bag));
            if (first_of_loz && !anchor.count(g.x)) anchor[g.x] = prev;
        }
        if (!anchor.count(g.y)) anchor[g.y] = prev;
    }
    detail::attach_label_chains(cd, anchor, layout);
    for (const auto& bag : cd.bag) max_bag = std::max(max_bag, bag.size());
    return encode_classical(s, cd, static_cast<int>(max_bag) - 1);
}

}  // namespace tdspan
