#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdspan/decomposition.hpp"
#include "tdspan/ef.hpp"
#include "tdspan/isomorphism.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

// Exhaustive-search configuration: the decomposition bounds plus the caps
// that keep the search finite. Intended for structures of at most ~8
// elements; the element count is hard-capped at 16.
struct SearchConfig {
    int k = 1;                           // width bound: bags hold at most k+1 elements
    int delta = 1;                       // span bound on each element's occurrence diameter
    bool path_only = false;              // restrict to single-branch bag trees
    int max_tree_nodes = 8;              // largest bag tree explored
    long long budget_nodes = 5'000'000;  // search-step cap; exceeding it truncates the stream
};

struct EnumeratedDecomposition {
    TreeDecomposition td;
    std::string canonical_key;  // bag-class-labeled rooted-tree canonical form
};

struct EnumerationResult {
    std::vector<EnumeratedDecomposition> items;  // sorted by canonical_key, keys unique
    bool complete = true;                        // false when a budget truncated the search
    long long explored = 0;                      // search steps spent
};

// Canonical form of a decomposition up to bag-class-labeled rooted-tree
// isomorphism: recursive encoding with sorted child forms, node labels
// being the bag class keys. Two decompositions get the same key exactly
// when a tree isomorphism matches them bag-class by bag-class.
inline std::string decomposition_canonical_key(const TreeDecomposition& td) {
    auto ch = td.children();
    std::vector<std::string> bag_keys(td.node_count());
    for (NodeId t = 0; t < td.node_count(); ++t) bag_keys[t] = bag_class_key(td.bags[t]);
    auto rec = [&](auto&& self, NodeId t) -> std::string {
        std::vector<std::string> kids;
        kids.reserve(ch[t].size());
        for (NodeId u : ch[t]) kids.push_back(self(self, u));
        std::sort(kids.begin(), kids.end());
        std::string s = "{" + bag_keys[t];
        for (const std::string& kk : kids) s += kk;
        s += "}";
        return s;
    };
    return rec(rec, td.root());
}

namespace detail {

// All rooted tree shapes on m nodes as parent arrays with non-decreasing
// parents (parent[i] <= parent[i+1], parent[i] < i). Every rooted tree has
// a breadth-first labeling of this form, so the family is exhaustive up to
// isomorphism; shape-level duplicates are removed later by the canonical
// key. path_only keeps only the single-branch chain.
inline void append_tree_shapes(int m, bool path_only, std::vector<std::vector<NodeId>>& out) {
    std::vector<NodeId> p(m, kNoParent);
    if (m == 1) {
        out.push_back(p);
        return;
    }
    if (path_only) {
        for (int i = 1; i < m; ++i) p[i] = i - 1;
        out.push_back(p);
        return;
    }
    auto rec = [&](auto&& self, int i) -> void {
        if (i == m) {
            out.push_back(p);
            return;
        }
        int lo = (i == 1) ? 0 : p[i - 1];
        for (int q = lo; q < i; ++q) {
            p[i] = q;
            self(self, i + 1);
        }
    };
    rec(rec, 1);
}

inline std::vector<std::vector<int>> shape_distances(const std::vector<NodeId>& parent) {
    int m = static_cast<int>(parent.size());
    std::vector<std::vector<NodeId>> adj(m);
    for (int i = 0; i < m; ++i)
        if (parent[i] != kNoParent) {
            adj[i].push_back(parent[i]);
            adj[parent[i]].push_back(i);
        }
    std::vector<std::vector<int>> dist(m, std::vector<int>(m, -1));
    for (int s = 0; s < m; ++s) {
        dist[s][s] = 0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int t = queue.front();
            queue.pop_front();
            for (int u : adj[t])
                if (dist[s][u] < 0) {
                    dist[s][u] = dist[s][t] + 1;
                    queue.push_back(u);
                }
        }
    }
    return dist;
}

// One worker's share of the exhaustive search. Bags are element subsets of
// the input structure encoded as bit masks; decorations (mark indices and
// tuple placements) are enumerated separately once a bag layout survives
// the exact prunes. Every copy of an element carries the element's colors,
// so unary predicates are never split across occurrences.
class DecompositionSearch {
public:
    DecompositionSearch(const Structure& s, const SearchConfig& cfg, long long budget)
        : s_(s), cfg_(cfg), budget_(budget) {
        n_ = s_.size();
        full_mask_ = (n_ >= 32) ? 0u : ((1u << n_) - 1u);
        const Vocabulary& vocab = s_.vocabulary();
        for (int rel = 0; rel < vocab.relation_count(); ++rel) {
            const std::string& name = vocab.relation(rel).name;
            if (name == "P0" || name == "P1") continue;  // colors live on the elements
            for (const auto& tup : s_.tuples(rel)) {
                CoverageTuple ct;
                ct.rel = rel;
                ct.elements = tup;
                for (ElementId x : tup) ct.mask |= 1u << x;
                tuples_.push_back(std::move(ct));
            }
        }
    }

    void run_shape(int shape_index, const std::vector<NodeId>& parent) {
        if (out_of_budget_) return;
        shape_index_ = shape_index;
        parent_ = parent;
        m_ = static_cast<int>(parent.size());
        children_.assign(m_, {});
        for (int i = 0; i < m_; ++i)
            if (parent[i] != kNoParent) children_[parent[i]].push_back(i);
        dist_ = shape_distances(parent);
        bags_.assign(m_, 0u);
        std::vector<OccTrack> occ(n_);
        place(0, 0u, occ, std::vector<int>(tuples_.size(), 0));
    }

    struct Found {
        int shape_index;
        long long sequence;
        std::string key;
        TreeDecomposition td;
    };

    std::vector<Found> found;
    bool complete() const { return !out_of_budget_; }
    long long explored() const { return explored_; }

private:
    struct CoverageTuple {
        int rel = 0;
        std::vector<int> elements;
        std::uint32_t mask = 0;
    };
    struct OccTrack {
        NodeId end1 = -1, end2 = -1;
        int diam = 0;
    };

    bool spend() {
        if (out_of_budget_) return false;
        if (++explored_ > budget_) {
            out_of_budget_ = true;
            return false;
        }
        return true;
    }

    // Choose the bag of node t. Exact prunes:
    //  * re-used elements must come from the parent's bag (occurrence sets
    //    stay connected, and any valid completion satisfies this),
    //  * occurrence diameters are monotone, so a span overshoot is final,
    //  * a tuple whose elements are all seen but which fits in no chosen
    //    bag can never be covered later (any future bag holding it would
    //    need an ancestor bag holding it too),
    //  * remaining nodes must have room for the unseen elements.
    void place(int t, std::uint32_t seen, std::vector<OccTrack> occ, std::vector<int> capable) {
        if (out_of_budget_) return;
        if (t == m_) {
            if (seen != full_mask_) return;
            for (std::size_t j = 0; j < tuples_.size(); ++j)
                if (capable[j] == 0) return;
            decorate();
            return;
        }
        std::uint32_t allowed =
            (t == 0) ? full_mask_ : (bags_[parent_[t]] | (full_mask_ & ~seen));
        for (std::uint32_t mask = 1; mask <= full_mask_; ++mask) {
            if ((mask & ~allowed) != 0) continue;
            if (std::popcount(mask) > cfg_.k + 1) continue;
            if (!spend()) return;

            std::vector<OccTrack> occ2 = occ;
            bool ok = true;
            for (int x = 0; x < n_ && ok; ++x) {
                if (!(mask & (1u << x))) continue;
                OccTrack& o = occ2[x];
                if (!(seen & (1u << x))) {
                    o = OccTrack{t, t, 0};
                    continue;
                }
                int d1 = dist_[t][o.end1];
                int d2 = dist_[t][o.end2];
                int nd = std::max(o.diam, std::max(d1, d2));
                if (nd > cfg_.delta) {
                    ok = false;
                    break;
                }
                if (d1 >= d2 && d1 >= o.diam)
                    o = OccTrack{t, o.end1, d1};
                else if (d2 >= d1 && d2 >= o.diam)
                    o = OccTrack{t, o.end2, d2};
            }
            if (!ok) continue;

            std::uint32_t seen2 = seen | mask;
            std::vector<int> capable2 = capable;
            for (std::size_t j = 0; j < tuples_.size(); ++j)
                if ((mask & tuples_[j].mask) == tuples_[j].mask) ++capable2[j];
            bool dead = false;
            for (std::size_t j = 0; j < tuples_.size() && !dead; ++j)
                if (capable2[j] == 0 && (seen2 & tuples_[j].mask) == tuples_[j].mask) dead = true;
            if (dead) continue;

            int unseen_left = n_ - std::popcount(seen2);
            if (unseen_left > (m_ - 1 - t) * (cfg_.k + 1)) continue;

            bags_[t] = mask;
            place(t + 1, seen2, occ2, capable2);
            if (out_of_budget_) return;
        }
    }

    // A completed bag layout. Enumerate the decorations: one injective mark
    // index per element shared with a child, and a nonempty set of
    // asserting bags per tuple. Each combination is a genuinely distinct
    // decomposition under bag-class-labeled tree isomorphism.
    void decorate() {
        shared_.assign(m_, {});
        for (int q = 0; q < m_; ++q) {
            std::uint32_t u = 0;
            for (int c : children_[q]) u |= bags_[q] & bags_[c];
            for (int x = 0; x < n_; ++x)
                if (u & (1u << x)) shared_[q].push_back(x);
        }
        capable_nodes_.assign(tuples_.size(), {});
        for (std::size_t j = 0; j < tuples_.size(); ++j)
            for (int t = 0; t < m_; ++t)
                if ((bags_[t] & tuples_[j].mask) == tuples_[j].mask)
                    capable_nodes_[j].push_back(t);
        mark_of_.assign(m_, std::vector<int>(n_, -1));
        chosen_.assign(tuples_.size(), 0u);
        assign_marks(0, 0, 0u);
    }

    void assign_marks(int q, std::size_t pos, std::uint32_t used) {
        if (out_of_budget_) return;
        if (q == m_) {
            assign_tuples(0);
            return;
        }
        if (pos == shared_[q].size()) {
            assign_marks(q + 1, 0, 0u);
            return;
        }
        int x = shared_[q][pos];
        for (int idx = 0; idx <= cfg_.k; ++idx) {
            if (used & (1u << idx)) continue;
            mark_of_[q][x] = idx;
            assign_marks(q, pos + 1, used | (1u << idx));
            if (out_of_budget_) return;
        }
        mark_of_[q][x] = -1;
    }

    void assign_tuples(std::size_t j) {
        if (out_of_budget_) return;
        if (j == tuples_.size()) {
            emit();
            return;
        }
        int c = static_cast<int>(capable_nodes_[j].size());
        for (std::uint32_t sub = 1; sub < (1u << c); ++sub) {
            chosen_[j] = sub;
            assign_tuples(j + 1);
            if (out_of_budget_) return;
        }
    }

    void emit() {
        if (!spend()) return;
        TreeDecomposition td;
        td.k = cfg_.k;
        td.parent = parent_;
        std::vector<std::vector<int>> local(m_, std::vector<int>(n_, -1));
        for (int t = 0; t < m_; ++t) {
            StructureBuilder b(s_.vocabulary(), s_.symmetric_edges());
            int next = 0;
            for (int x = 0; x < n_; ++x)
                if (bags_[t] & (1u << x)) {
                    local[t][x] = next++;
                    b.add_element(s_.color(x), s_.annotation(x));
                }
            for (std::size_t j = 0; j < tuples_.size(); ++j) {
                for (int pos = 0; pos < static_cast<int>(capable_nodes_[j].size()); ++pos) {
                    if (capable_nodes_[j][pos] != t || !(chosen_[j] & (1u << pos))) continue;
                    std::vector<ElementId> img(tuples_[j].elements.size());
                    for (std::size_t i = 0; i < img.size(); ++i)
                        img[i] = local[t][tuples_[j].elements[i]];
                    b.add_tuple(tuples_[j].rel, img);
                }
            }
            td.bags.push_back(KBag::make(cfg_.k, b.build()));
        }
        for (int q = 0; q < m_; ++q)
            for (int x : shared_[q]) td.bags[q].out_mark[mark_of_[q][x]] = local[q][x];
        for (int c = 0; c < m_; ++c) {
            if (parent_[c] == kNoParent) continue;
            int q = parent_[c];
            std::uint32_t sh = bags_[c] & bags_[q];
            for (int x = 0; x < n_; ++x)
                if (sh & (1u << x)) td.bags[c].in_mark[mark_of_[q][x]] = local[c][x];
        }

        // Second code path: nothing leaves the enumerator unless the
        // generic validators agree with the search's own bookkeeping.
        if (!validate_td(td).empty())
            throw std::logic_error("enumerate_decompositions: emitted an invalid decomposition");
        if (width(td) > cfg_.k)
            throw std::logic_error("enumerate_decompositions: emitted an over-wide decomposition");
        ExtResult er = ext(td);
        if (span(td, er.quotient) > cfg_.delta)
            throw std::logic_error("enumerate_decompositions: emitted an over-span decomposition");
        if (!are_isomorphic(er.structure, s_))
            throw std::logic_error("enumerate_decompositions: reconstruction mismatch");

        std::string key = decomposition_canonical_key(td);
        if (!keys_.insert(key).second) return;
        found.push_back(Found{shape_index_, sequence_++, std::move(key), std::move(td)});
    }

    const Structure& s_;
    SearchConfig cfg_;
    long long budget_;
    long long explored_ = 0;
    bool out_of_budget_ = false;
    int n_ = 0;
    std::uint32_t full_mask_ = 0;
    std::vector<CoverageTuple> tuples_;

    int shape_index_ = 0;
    long long sequence_ = 0;
    std::vector<NodeId> parent_;
    int m_ = 0;
    std::vector<std::vector<int>> children_;
    std::vector<std::vector<int>> dist_;
    std::vector<std::uint32_t> bags_;
    std::vector<std::vector<int>> shared_;
    std::vector<std::vector<int>> capable_nodes_;
    std::vector<std::vector<int>> mark_of_;
    std::vector<std::uint32_t> chosen_;
    std::set<std::string> keys_;
};

}  // namespace detail

// Every valid decomposition of s within the bounds, each emitted once up to
// bag-class-labeled rooted-tree isomorphism, in canonical-key order. Copies
// always carry their element's colors; mark index choices and tuple
// placements are enumerated in full. Workers split the tree shapes and each
// receives an equal slice of the step budget, so complete runs produce the
// same result for every worker count.
inline EnumerationResult enumerate_decompositions(const Structure& s, const SearchConfig& cfg,
                                                  int workers = 1) {
    if (cfg.k < 0 || cfg.delta < 0)
        throw std::invalid_argument("enumerate_decompositions: negative bounds");
    if (cfg.max_tree_nodes < 1 || cfg.budget_nodes < 1)
        throw std::invalid_argument("enumerate_decompositions: caps must be positive");
    if (workers < 1) throw std::invalid_argument("enumerate_decompositions: workers must be positive");
    if (s.size() > 16)
        throw std::invalid_argument("enumerate_decompositions: structure too large for exhaustive search");
    if (cfg.k > 15 || cfg.max_tree_nodes > 16)
        throw std::invalid_argument("enumerate_decompositions: bounds beyond the exhaustive engine");

    std::vector<std::vector<NodeId>> shapes;
    for (int m = 1; m <= cfg.max_tree_nodes; ++m)
        detail::append_tree_shapes(m, cfg.path_only, shapes);

    int lanes = std::min<int>(workers, static_cast<int>(shapes.size()));
    lanes = std::max(lanes, 1);
    long long slice = std::max<long long>(1, cfg.budget_nodes / workers);

    std::vector<std::unique_ptr<detail::DecompositionSearch>> searches;
    searches.reserve(lanes);
    for (int w = 0; w < lanes; ++w)
        searches.push_back(std::make_unique<detail::DecompositionSearch>(s, cfg, slice));
    auto run = [&](int w) {
        for (std::size_t i = w; i < shapes.size(); i += lanes)
            searches[w]->run_shape(static_cast<int>(i), shapes[i]);
    };
    if (lanes == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(lanes);
        for (int w = 0; w < lanes; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }

    EnumerationResult out;
    std::vector<detail::DecompositionSearch::Found> all;
    for (auto& se : searches) {
        out.complete = out.complete && se->complete();
        out.explored += se->explored();
        for (auto& f : se->found) all.push_back(std::move(f));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.key != b.key) return a.key < b.key;
        if (a.shape_index != b.shape_index) return a.shape_index < b.shape_index;
        return a.sequence < b.sequence;
    });
    for (auto& f : all) {
        if (!out.items.empty() && out.items.back().canonical_key == f.key) continue;
        out.items.push_back(EnumeratedDecomposition{std::move(f.td), std::move(f.key)});
    }
    return out;
}

// True when some bag holds both a run member of value n1 and a run member
// of value n2 (the same element may serve both when n1 == n2). Decided via
// generator annotations; a decomposition holding no run members at all is
// rejected, since then the question is not about a two-rail structure.
inline bool check_supp(const TreeDecomposition& td, int n1, int n2) {
    bool any_run = false;
    bool hit = false;
    for (const KBag& b : td.bags) {
        bool has1 = false, has2 = false;
        for (ElementId x = 0; x < b.structure.size(); ++x) {
            const auto& a = b.structure.annotation(x);
            if (!a || a->role != Role::run_member) continue;
            any_run = true;
            if (a->run_value == n1) has1 = true;
            if (a->run_value == n2) has2 = true;
        }
        if (has1 && has2) hit = true;
    }
    if (!any_run) throw std::invalid_argument("check_supp: decomposition holds no run members");
    return hit;
}

struct Lemma1Violation {
    ElementId first = 0, second = 0;  // reconstructed element ids
    int gaifman_distance = 0;
    int bag_distance = 0;
};

// Distance transfer check: any two reconstructed elements at Gaifman
// distance d must own bags at tree distance at most delta*(d+1). This holds
// for every valid decomposition of span <= delta (adjacent elements share a
// bag and occurrence subtrees have diameter <= delta), so a violation
// indicates corrupted bookkeeping rather than an unlucky input.
inline std::optional<Lemma1Violation> check_lemma1(const TreeDecomposition& td, int delta) {
    if (delta < 0) throw std::invalid_argument("check_lemma1: negative span bound");
    ExtResult er = ext(td);
    if (span(td, er.quotient) > delta)
        throw std::invalid_argument("check_lemma1: decomposition span exceeds delta");

    int m = td.node_count();
    auto ch = td.children();
    std::vector<std::vector<NodeId>> tadj(m);
    for (NodeId t = 0; t < m; ++t) {
        tadj[t] = ch[t];
        if (td.parent[t] != kNoParent) tadj[t].push_back(td.parent[t]);
    }
    const Structure& s = er.structure;
    int n = s.size();
    for (ElementId x = 0; x < n; ++x) {
        // Tree distance from x's occurrence set to every node.
        std::vector<int> tdist(m, -1);
        std::deque<NodeId> tq;
        for (NodeId t : er.quotient.occurrences(x)) {
            tdist[t] = 0;
            tq.push_back(t);
        }
        while (!tq.empty()) {
            NodeId t = tq.front();
            tq.pop_front();
            for (NodeId u : tadj[t])
                if (tdist[u] < 0) {
                    tdist[u] = tdist[t] + 1;
                    tq.push_back(u);
                }
        }
        // Gaifman distances from x.
        std::vector<int> gdist(n, -1);
        std::deque<ElementId> gq{x};
        gdist[x] = 0;
        while (!gq.empty()) {
            ElementId y = gq.front();
            gq.pop_front();
            for (ElementId z : s.neighbors(y))
                if (gdist[z] < 0) {
                    gdist[z] = gdist[y] + 1;
                    gq.push_back(z);
                }
        }
        for (ElementId y = x + 1; y < n; ++y) {
            if (gdist[y] < 0) continue;
            int best = -1;
            for (NodeId t : er.quotient.occurrences(y))
                if (best < 0 || tdist[t] < best) best = tdist[t];
            if (best > delta * (gdist[y] + 1))
                return Lemma1Violation{x, y, gdist[y], best};
        }
    }
    return std::nullopt;
}

struct OverlapEntry {
    int block = 0;                    // the pair (s_block, s_block+1)
    ElementId first = 0, second = 0;  // reconstructed junction ids
    int min_bag_distance = 0;
    bool flagged = false;  // exceeds the jump threshold
};

struct OverlapProfile {
    std::vector<OverlapEntry> entries;
    long long threshold = 0;  // 2*delta*(2^beta + 1)
};

// Minimum bag distance between each consecutive junction pair of a chained
// two-rail structure, against the jump threshold 2*delta*(2^beta+1). Any
// pair farther apart than the threshold forces a crossing bag somewhere
// between them, so flagged entries are the interesting ones.
inline OverlapProfile overlap_profile(const TreeDecomposition& td, int delta, int beta) {
    if (delta < 0 || beta < 0 || beta > 40)
        throw std::invalid_argument("overlap_profile: parameters out of range");
    ExtResult er = ext(td);
    const Structure& s = er.structure;
    std::map<int, ElementId> junction;
    for (ElementId x = 0; x < s.size(); ++x) {
        const auto& a = s.annotation(x);
        if (!a || (a->role != Role::source_s && a->role != Role::source_t)) continue;
        if (a->block < 0)
            throw std::invalid_argument("overlap_profile: junctions lack block annotations");
        if (!junction.emplace(a->block, x).second)
            throw std::invalid_argument("overlap_profile: duplicate junction block");
    }
    if (junction.empty())
        throw std::invalid_argument("overlap_profile: structure has no junction annotations");
    int m = static_cast<int>(junction.size()) - 1;
    for (int i = 0; i <= m; ++i)
        if (!junction.count(i))
            throw std::invalid_argument("overlap_profile: junction blocks not contiguous");

    int nodes = td.node_count();
    auto ch = td.children();
    std::vector<std::vector<NodeId>> tadj(nodes);
    for (NodeId t = 0; t < nodes; ++t) {
        tadj[t] = ch[t];
        if (td.parent[t] != kNoParent) tadj[t].push_back(td.parent[t]);
    }
    OverlapProfile out;
    out.threshold = 2LL * delta * ((1LL << beta) + 1);
    for (int i = 0; i < m; ++i) {
        ElementId a = junction[i], b = junction[i + 1];
        std::vector<int> dist(nodes, -1);
        std::deque<NodeId> queue;
        for (NodeId t : er.quotient.occurrences(a)) {
            dist[t] = 0;
            queue.push_back(t);
        }
        while (!queue.empty()) {
            NodeId t = queue.front();
            queue.pop_front();
            for (NodeId u : tadj[t])
                if (dist[u] < 0) {
                    dist[u] = dist[t] + 1;
                    queue.push_back(u);
                }
        }
        int best = -1;
        for (NodeId t : er.quotient.occurrences(b))
            if (best < 0 || dist[t] < best) best = dist[t];
        OverlapEntry e;
        e.block = i;
        e.first = a;
        e.second = b;
        e.min_bag_distance = best;
        e.flagged = best > out.threshold;
        out.entries.push_back(e);
    }
    return out;
}

namespace detail {

inline void require_classes(const QuotientMap& qm, const std::vector<ElementId>& marked,
                            const char* who) {
    for (ElementId x : marked)
        if (x < 0 || x >= qm.class_count())
            throw std::invalid_argument(std::string(who) + ": marked id outside the quotient");
}

inline std::vector<std::vector<NodeId>> tree_adjacency(const TreeDecomposition& td) {
    auto ch = td.children();
    std::vector<std::vector<NodeId>> adj(td.node_count());
    for (NodeId t = 0; t < td.node_count(); ++t) {
        adj[t] = ch[t];
        if (td.parent[t] != kNoParent) adj[t].push_back(td.parent[t]);
    }
    return adj;
}

}  // namespace detail

// Union of the pairwise tree paths between all bags holding a marked
// element: the unique minimal connected subtree covering every occurrence.
inline std::vector<NodeId> minimal_connecting_subtree(const TreeDecomposition& td,
                                                      const QuotientMap& qm,
                                                      const std::vector<ElementId>& marked) {
    if (marked.empty())
        throw std::invalid_argument("minimal_connecting_subtree: no marked elements");
    detail::require_classes(qm, marked, "minimal_connecting_subtree");
    int m = td.node_count();
    std::vector<char> required(m, 0);
    for (ElementId x : marked)
        for (NodeId t : qm.occurrences(x)) required[t] = 1;
    auto adj = detail::tree_adjacency(td);
    std::vector<char> alive(m, 1);
    std::vector<int> degree(m, 0);
    for (NodeId t = 0; t < m; ++t) degree[t] = static_cast<int>(adj[t].size());
    std::deque<NodeId> queue;
    for (NodeId t = 0; t < m; ++t)
        if (degree[t] <= 1 && !required[t]) queue.push_back(t);
    while (!queue.empty()) {
        NodeId t = queue.front();
        queue.pop_front();
        if (!alive[t] || required[t] || degree[t] > 1) continue;
        alive[t] = 0;
        for (NodeId u : adj[t])
            if (alive[u] && --degree[u] <= 1 && !required[u]) queue.push_back(u);
    }
    std::vector<NodeId> out;
    for (NodeId t = 0; t < m; ++t)
        if (alive[t]) out.push_back(t);
    return out;
}

namespace detail {

struct SubtreeView {
    std::vector<char> member;                // node -> in subtree
    std::vector<std::vector<NodeId>> adj;    // restricted adjacency
    std::vector<std::vector<ElementId>> at;  // node -> marked ids present in its bag (sorted)
    std::vector<ElementId> marks;            // sorted unique marked ids
};

inline SubtreeView subtree_view(const std::vector<NodeId>& subtree, const TreeDecomposition& td,
                                const QuotientMap& qm, const std::vector<ElementId>& marked,
                                const char* who) {
    if (subtree.empty()) throw std::invalid_argument(std::string(who) + ": empty subtree");
    int m = td.node_count();
    SubtreeView v;
    v.member.assign(m, 0);
    for (NodeId t : subtree) {
        if (t < 0 || t >= m)
            throw std::invalid_argument(std::string(who) + ": subtree node out of range");
        v.member[t] = 1;
    }
    auto full = tree_adjacency(td);
    v.adj.assign(m, {});
    for (NodeId t = 0; t < m; ++t) {
        if (!v.member[t]) continue;
        for (NodeId u : full[t])
            if (v.member[u]) v.adj[t].push_back(u);
    }
    // Connectivity of the subtree.
    std::vector<char> seen(m, 0);
    std::deque<NodeId> queue{subtree.front()};
    seen[subtree.front()] = 1;
    int reached = 1;
    while (!queue.empty()) {
        NodeId t = queue.front();
        queue.pop_front();
        for (NodeId u : v.adj[t])
            if (!seen[u]) {
                seen[u] = 1;
                ++reached;
                queue.push_back(u);
            }
    }
    int members = 0;
    for (NodeId t = 0; t < m; ++t) members += v.member[t];
    if (reached != members)
        throw std::invalid_argument(std::string(who) + ": subtree is not connected");

    v.marks = marked;
    sort_unique(v.marks);
    require_classes(qm, v.marks, who);
    v.at.assign(m, {});
    for (ElementId x : v.marks)
        for (NodeId t : qm.occurrences(x))
            if (v.member[t]) v.at[t].push_back(x);
    return v;
}

}  // namespace detail

struct TrimResult {
    std::vector<NodeId> nodes;
    std::vector<std::string> findings;  // irreducible nodes or (defensively) lost marks
};

// Shrink a marked subtree to degree at most 2k+3: at each over-degree node,
// drop every hanging component whose marked elements all appear in that
// node's own bag. Coverage of the marked set is preserved by construction;
// a node that stays over-degree afterwards is reported as a finding, since
// on conforming instances the counting argument rules that out.
inline TrimResult trim_to_bounded_degree(const std::vector<NodeId>& subtree,
                                         const TreeDecomposition& td, const QuotientMap& qm,
                                         const std::vector<ElementId>& marked, int k) {
    if (k < 0) throw std::invalid_argument("trim_to_bounded_degree: negative width bound");
    auto view = detail::subtree_view(subtree, td, qm, marked, "trim_to_bounded_degree");
    for (ElementId x : view.marks) {
        bool covered = false;
        for (NodeId t : qm.occurrences(x))
            if (view.member[t]) covered = true;
        if (!covered)
            throw std::invalid_argument("trim_to_bounded_degree: subtree misses a marked element");
    }
    int m = td.node_count();
    int bound = 2 * k + 3;
    std::vector<char> alive = view.member;
    std::vector<char> at_node(qm.class_count(), 0);

    auto degree = [&](NodeId t) {
        int d = 0;
        for (NodeId u : view.adj[t]) d += alive[u];
        return d;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId t = 0; t < m; ++t) {
            if (!alive[t] || degree(t) <= bound) continue;
            for (ElementId x : view.at[t]) at_node[x] = 1;
            for (NodeId u : view.adj[t]) {
                if (!alive[u]) continue;
                // The hanging component behind u, viewed from t.
                std::vector<NodeId> branch{u};
                std::vector<char> seen(m, 0);
                seen[u] = 1;
                seen[t] = 1;
                bool removable = true;
                for (std::size_t i = 0; i < branch.size(); ++i) {
                    NodeId w = branch[i];
                    for (ElementId x : view.at[w])
                        if (!at_node[x]) removable = false;
                    for (NodeId z : view.adj[w])
                        if (alive[z] && !seen[z]) {
                            seen[z] = 1;
                            branch.push_back(z);
                        }
                }
                if (!removable) continue;
                for (NodeId w : branch) alive[w] = 0;
                changed = true;
            }
            for (ElementId x : view.at[t]) at_node[x] = 0;
        }
    }

    TrimResult out;
    for (NodeId t = 0; t < m; ++t)
        if (alive[t]) out.nodes.push_back(t);
    for (NodeId t : out.nodes)
        if (degree(t) > bound)
            out.findings.push_back("node " + std::to_string(t) + ": degree " +
                                   std::to_string(degree(t)) + " stays above " +
                                   std::to_string(bound) +
                                   "; every branch keeps a marked element outside its bag");
    for (ElementId x : view.marks) {
        bool covered = false;
        for (NodeId t : qm.occurrences(x))
            if (alive[t]) covered = true;
        if (!covered)
            out.findings.push_back("marked element " + std::to_string(x) +
                                   " lost by trimming; the counting argument fails here");
    }
    return out;
}

// Census of a subtree around one of its nodes: the components left after
// removing the node, how many marked elements live exclusively in each, and
// which marked elements sit in the node's own bag. A marked element seen in
// two components would have to occur at the node itself, so the counts and
// the bag list partition the marked elements occurring in the subtree.
struct InodeCensus {
    std::vector<std::vector<NodeId>> components;  // sorted members, ordered by least node
    std::vector<int> exclusive;                   // marked ids confined to that component
    std::vector<ElementId> in_bag;                // marked ids present at the node
};

inline InodeCensus inode_census(const std::vector<NodeId>& subtree, const TreeDecomposition& td,
                                NodeId t, const QuotientMap& qm,
                                const std::vector<ElementId>& marked) {
    auto view = detail::subtree_view(subtree, td, qm, marked, "inode_census");
    int m = td.node_count();
    if (t < 0 || t >= m || !view.member[t])
        throw std::invalid_argument("inode_census: node not in the subtree");

    InodeCensus out;
    std::vector<int> comp_of(m, -1);
    for (NodeId s = 0; s < m; ++s) {
        if (!view.member[s] || s == t || comp_of[s] >= 0) continue;
        int id = static_cast<int>(out.components.size());
        std::vector<NodeId> comp{s};
        comp_of[s] = id;
        for (std::size_t i = 0; i < comp.size(); ++i)
            for (NodeId u : view.adj[comp[i]])
                if (u != t && comp_of[u] < 0) {
                    comp_of[u] = id;
                    comp.push_back(u);
                }
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
    }
    out.exclusive.assign(out.components.size(), 0);
    for (ElementId x : view.marks) {
        bool at_t = false;
        int comp = -1;
        bool present = false, split = false;
        for (NodeId u : qm.occurrences(x)) {
            if (!view.member[u]) continue;
            present = true;
            if (u == t) {
                at_t = true;
            } else if (comp < 0) {
                comp = comp_of[u];
            } else if (comp != comp_of[u]) {
                split = true;
            }
        }
        if (at_t) {
            out.in_bag.push_back(x);
        } else if (split) {
            throw std::logic_error("inode_census: occurrence set split across components");
        } else if (present) {
            ++out.exclusive[comp];
        }
    }
    return out;
}

struct LargeComponentReport {
    std::optional<int> component;       // the unique component above the threshold
    long long threshold = 0;            // total - (k+1) - n_bound
    std::vector<std::string> findings;  // counts inside the forbidden band
};

// The dichotomy step: a component is large when its exclusive count exceeds
// total - (k+1) - n_bound. Counts are not allowed to land in the band
// [n_bound, threshold] on conforming instances, so any that do are reported.
// Two components above the threshold cannot both partition the marks.
inline LargeComponentReport large_component(const InodeCensus& census, long long n_bound,
                                            long long total_marks, int k) {
    LargeComponentReport out;
    out.threshold = total_marks - (k + 1) - n_bound;
    for (std::size_t i = 0; i < census.exclusive.size(); ++i) {
        long long c = census.exclusive[i];
        if (c > out.threshold) {
            if (out.component)
                throw std::invalid_argument(
                    "large_component: two components above the threshold; census inconsistent");
            out.component = static_cast<int>(i);
        } else if (c >= n_bound) {
            out.findings.push_back("component " + std::to_string(i) + ": exclusive count " +
                                   std::to_string(c) + " lies in the forbidden band [" +
                                   std::to_string(n_bound) + ", " +
                                   std::to_string(out.threshold) + "]");
        }
    }
    return out;
}

struct WalkResult {
    std::vector<NodeId> trace;
    bool backtrack_found = false;       // some t1,t2,t1 occurred
    std::vector<std::string> findings;  // missing large component, or budget exhaustion
};

// Follow the large component from node to node, starting at the least
// subtree node. On a finite subtree whose every node sees a unique large
// component the walk must revisit a node immediately — the first such
// t1,t2,t1 is the certificate. A node without a large component halts the
// walk with a finding.
inline WalkResult algorithm1_walk(const std::vector<NodeId>& subtree, const TreeDecomposition& td,
                                  const QuotientMap& qm, const std::vector<ElementId>& marked,
                                  long long n_bound, int k, int max_steps) {
    if (max_steps < 1) throw std::invalid_argument("algorithm1_walk: max_steps must be positive");
    std::vector<ElementId> marks = marked;
    sort_unique(marks);
    WalkResult out;
    NodeId cur = *std::min_element(subtree.begin(), subtree.end());
    out.trace.push_back(cur);
    for (int step = 0; step < max_steps; ++step) {
        InodeCensus census = inode_census(subtree, td, cur, qm, marks);
        LargeComponentReport rep =
            large_component(census, n_bound, static_cast<long long>(marks.size()), k);
        if (!rep.component) {
            out.findings.push_back("node " + std::to_string(cur) +
                                   ": no large component; walk halts");
            return out;
        }
        const std::vector<NodeId>& comp = census.components[*rep.component];
        NodeId next = kNoParent;
        for (NodeId u : comp)
            if (td.parent[u] == cur || td.parent[cur] == u) {
                next = u;
                break;
            }
        if (next == kNoParent)
            throw std::logic_error("algorithm1_walk: large component not adjacent to the node");
        out.trace.push_back(next);
        std::size_t sz = out.trace.size();
        if (sz >= 3 && out.trace[sz - 1] == out.trace[sz - 3]) {
            out.backtrack_found = true;
            return out;
        }
        cur = next;
    }
    out.findings.push_back("max steps exhausted without a backtrack");
    return out;
}

struct RefuteReport {
    std::string jsonl;  // one JSON record per line: header, decompositions, findings, summary
    bool complete = true;
    long long g_count = 0, h_count = 0;
    long long pair_count = 0;
    long long similar_count = 0;  // pairs equivalent at the requested rank
    long long budget_pairs = 0;   // pairs where the game ran out of budget
    std::optional<std::pair<long long, long long>> first_similar;
};

// Enumerate both decomposition spaces, view every decomposition as a
// colored tree (one unary predicate per bag class, one child relation), and
// play the rank-alpha game on every cross pair. The report is canonical:
// records are emitted in index order with no timestamps, so identical
// inputs produce byte-identical output for any worker count once the
// enumerations are exhaustive.
inline RefuteReport micro_refute(const Structure& g, const Structure& h, const SearchConfig& cfg,
                                 int alpha, int workers = 1, EfBudget ef_budget = {}) {
    if (alpha < 0) throw std::invalid_argument("micro_refute: negative rank");
    if (workers < 1) throw std::invalid_argument("micro_refute: workers must be positive");

    EnumerationResult eg = enumerate_decompositions(g, cfg, workers);
    EnumerationResult eh = enumerate_decompositions(h, cfg, workers);

    // Shared bag-class registry and the colored-tree vocabulary.
    std::vector<std::string> registry;
    for (const auto* res : {&eg, &eh})
        for (const auto& item : res->items)
            for (const KBag& b : item.td.bags) registry.push_back(bag_class_key(b));
    sort_unique(registry);
    std::vector<RelationSymbol> rels{{"S", 2}};
    for (std::size_t i = 0; i < registry.size(); ++i)
        rels.push_back({"B" + std::to_string(i), 1});
    Vocabulary vocab(rels);
    auto class_index = [&](const KBag& b) {
        return static_cast<int>(std::lower_bound(registry.begin(), registry.end(),
                                                 bag_class_key(b)) -
                                registry.begin());
    };
    auto as_tree = [&](const TreeDecomposition& td) {
        StructureBuilder b(vocab);
        for (NodeId t = 0; t < td.node_count(); ++t) b.add_element();
        for (NodeId t = 0; t < td.node_count(); ++t) {
            if (td.parent[t] != kNoParent)
                b.add_tuple(0, {td.parent[t], t});
            b.add_tuple(1 + class_index(td.bags[t]), {t});
        }
        return b.build();
    };
    std::vector<Structure> gt, ht;
    gt.reserve(eg.items.size());
    ht.reserve(eh.items.size());
    for (const auto& item : eg.items) gt.push_back(as_tree(item.td));
    for (const auto& item : eh.items) ht.push_back(as_tree(item.td));

    long long total = static_cast<long long>(gt.size()) * static_cast<long long>(ht.size());
    std::vector<std::uint8_t> outcome(total, 0);
    auto run = [&](int w) {
        for (long long idx = w; idx < total; idx += workers) {
            long long i = idx / static_cast<long long>(ht.size());
            long long j = idx % static_cast<long long>(ht.size());
            EfOutcome o = ef_equivalent(gt[i], ht[j], alpha, ef_budget);
            outcome[idx] = o == EfOutcome::equivalent     ? 0
                           : o == EfOutcome::distinguishable ? 1
                                                             : 2;
        }
    };
    if (total > 0) {
        if (workers == 1) {
            run(0);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
            for (auto& th : pool) th.join();
        }
    }

    RefuteReport rep;
    rep.complete = eg.complete && eh.complete;
    rep.g_count = static_cast<long long>(eg.items.size());
    rep.h_count = static_cast<long long>(eh.items.size());
    rep.pair_count = total;

    using ordered_json = nlohmann::ordered_json;
    std::string& outjson = rep.jsonl;
    auto emit = [&](const ordered_json& j) { outjson += j.dump() + "\n"; };

    ordered_json header;
    header["type"] = "header";
    header["alpha"] = alpha;
    header["k"] = cfg.k;
    header["delta"] = cfg.delta;
    header["path_only"] = cfg.path_only;
    header["max_tree_nodes"] = cfg.max_tree_nodes;
    header["g_count"] = rep.g_count;
    header["h_count"] = rep.h_count;
    header["g_complete"] = eg.complete;
    header["h_complete"] = eh.complete;
    header["bag_classes"] = registry.size();
    emit(header);

    for (const auto* res : {&eg, &eh}) {
        const char* side = (res == &eg) ? "G" : "H";
        for (std::size_t i = 0; i < res->items.size(); ++i) {
            const auto& item = res->items[i];
            ordered_json j;
            j["type"] = "decomposition";
            j["side"] = side;
            j["index"] = i;
            j["nodes"] = item.td.node_count();
            j["width"] = width(item.td);
            j["span"] = span(item.td);
            j["key"] = item.canonical_key;
            emit(j);
        }
        if (!res->complete) {
            ordered_json j;
            j["type"] = "finding";
            j["what"] = "enumeration_truncated";
            j["side"] = side;
            emit(j);
        }
    }

    for (long long idx = 0; idx < total; ++idx) {
        if (outcome[idx] == 1) continue;
        long long i = idx / static_cast<long long>(ht.size());
        long long j = idx % static_cast<long long>(ht.size());
        ordered_json rec;
        if (outcome[idx] == 0) {
            ++rep.similar_count;
            if (!rep.first_similar) rep.first_similar = {i, j};
            rec["type"] = "similar";
        } else {
            ++rep.budget_pairs;
            rec["type"] = "ef_budget";
        }
        rec["g"] = i;
        rec["h"] = j;
        emit(rec);
    }

    ordered_json summary;
    summary["type"] = "summary";
    summary["pairs"] = rep.pair_count;
    summary["similar"] = rep.similar_count;
    summary["ef_budget"] = rep.budget_pairs;
    summary["exhaustive"] = rep.complete;
    summary["no_similar_pair"] = rep.complete && rep.similar_count == 0 && rep.budget_pairs == 0;
    emit(summary);
    return rep;
}

}  // namespace tdspan
