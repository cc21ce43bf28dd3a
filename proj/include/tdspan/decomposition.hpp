#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdspan/structure.hpp"

namespace tdspan {

// A bag: a structure on at most k+1 elements plus two mark families indexed
// 0..k. in_mark[i] / out_mark[i] give the marked element or kNoMark; within
// a family distinct indices mark distinct elements.
struct KBag {
    int k = 0;
    Structure structure = StructureBuilder(Vocabulary::colored_graphs()).build();
    std::vector<ElementId> in_mark;
    std::vector<ElementId> out_mark;

    static KBag make(int k, Structure s) {
        KBag b;
        b.k = k;
        b.structure = std::move(s);
        b.in_mark.assign(k + 1, kNoMark);
        b.out_mark.assign(k + 1, kNoMark);
        return b;
    }
};

inline void append_bag_violations(const KBag& b, const std::string& where,
                                  std::vector<std::string>& out) {
    if (b.k < 0) out.push_back(where + ": negative mark budget");
    if (b.structure.size() == 0) out.push_back(where + ": bag is empty");
    if (b.structure.size() > b.k + 1)
        out.push_back(where + ": bag holds more than k+1 elements");
    if (static_cast<int>(b.in_mark.size()) != b.k + 1 ||
        static_cast<int>(b.out_mark.size()) != b.k + 1) {
        out.push_back(where + ": mark vectors not sized k+1");
        return;
    }
    for (const auto* family : {&b.in_mark, &b.out_mark}) {
        std::vector<ElementId> used;
        for (ElementId e : *family) {
            if (e == kNoMark) continue;
            if (e < 0 || e >= b.structure.size()) {
                out.push_back(where + ": mark points outside the bag");
                continue;
            }
            used.push_back(e);
        }
        std::size_t distinct = used.size();
        sort_unique(used);
        if (used.size() != distinct)
            out.push_back(where + ": two indices of one family mark the same element");
    }
}

// Rooted tree of bags. parent[t] == kNoParent exactly at the root.
struct TreeDecomposition {
    int k = 0;
    std::vector<KBag> bags;
    std::vector<NodeId> parent;

    int node_count() const { return static_cast<int>(bags.size()); }

    NodeId root() const {
        for (NodeId t = 0; t < node_count(); ++t)
            if (parent[t] == kNoParent) return t;
        throw std::logic_error("decomposition has no root");
    }

    std::vector<std::vector<NodeId>> children() const {
        std::vector<std::vector<NodeId>> ch(node_count());
        for (NodeId t = 0; t < node_count(); ++t)
            if (parent[t] != kNoParent) ch[parent[t]].push_back(t);
        return ch;
    }
};

// Structural soundness: tree shape, bag budgets, mark injectivity, the
// out/in correspondence (out(t, i) is present exactly when some child
// carries in(., i)), and a rootless in-mark ban. Empty result means valid.
inline std::vector<std::string> validate_td(const TreeDecomposition& td) {
    std::vector<std::string> out;
    int n = td.node_count();
    if (n == 0) {
        out.push_back("decomposition has no nodes");
        return out;
    }
    if (static_cast<int>(td.parent.size()) != n) {
        out.push_back("parent vector size disagrees with bag count");
        return out;
    }
    int roots = 0;
    for (NodeId t = 0; t < n; ++t) {
        if (td.parent[t] == kNoParent) {
            ++roots;
            continue;
        }
        if (td.parent[t] < 0 || td.parent[t] >= n || td.parent[t] == t)
            out.push_back("node " + std::to_string(t) + ": parent out of range");
    }
    if (roots != 1) out.push_back("expected exactly one root, found " + std::to_string(roots));
    if (!out.empty()) return out;

    // Connectivity and acyclicity: everything must reach the root.
    NodeId r = td.root();
    auto ch = td.children();
    std::vector<bool> seen(n, false);
    std::deque<NodeId> queue{r};
    seen[r] = true;
    while (!queue.empty()) {
        NodeId t = queue.front();
        queue.pop_front();
        for (NodeId u : ch[t])
            if (!seen[u]) {
                seen[u] = true;
                queue.push_back(u);
            }
    }
    for (NodeId t = 0; t < n; ++t)
        if (!seen[t]) out.push_back("node " + std::to_string(t) + ": unreachable from the root");
    if (!out.empty()) return out;

    const Vocabulary& vocab = td.bags[r].structure.vocabulary();
    for (NodeId t = 0; t < n; ++t) {
        const KBag& b = td.bags[t];
        std::string where = "node " + std::to_string(t);
        if (b.k != td.k) out.push_back(where + ": bag budget disagrees with decomposition");
        if (!(b.structure.vocabulary() == vocab)) out.push_back(where + ": vocabulary mismatch");
        append_bag_violations(b, where, out);
    }
    if (!out.empty()) return out;

    for (int i = 0; i <= td.k; ++i)
        if (td.bags[r].in_mark[i] != kNoMark)
            out.push_back("root carries an in-mark at index " + std::to_string(i));
    for (NodeId t = 0; t < n; ++t) {
        for (int i = 0; i <= td.k; ++i) {
            bool has_out = td.bags[t].out_mark[i] != kNoMark;
            bool child_in = false;
            for (NodeId u : ch[t])
                if (td.bags[u].in_mark[i] != kNoMark) child_in = true;
            if (has_out && !child_in)
                out.push_back("node " + std::to_string(t) + ": out-mark " + std::to_string(i) +
                              " not taken up by any child");
            if (!has_out && child_in)
                out.push_back("node " + std::to_string(t) + ": children use in-mark " +
                              std::to_string(i) + " without a matching out-mark");
        }
    }
    return out;
}

// Which reconstructed element each bag-local copy became, and where each
// reconstructed element occurs in the tree.
class QuotientMap {
public:
    QuotientMap(std::vector<std::vector<ElementId>> class_of, int classes)
        : class_of_(std::move(class_of)), occurrences_(classes) {
        for (NodeId t = 0; t < static_cast<NodeId>(class_of_.size()); ++t)
            for (ElementId c : class_of_[t]) occurrences_[c].push_back(t);
        for (auto& occ : occurrences_) sort_unique(occ);
    }

    ElementId class_of(NodeId node, ElementId local) const { return class_of_.at(node).at(local); }
    int class_count() const { return static_cast<int>(occurrences_.size()); }
    const std::vector<NodeId>& occurrences(ElementId cls) const { return occurrences_.at(cls); }

private:
    std::vector<std::vector<ElementId>> class_of_;  // node -> local element -> class
    std::vector<std::vector<NodeId>> occurrences_;
};

struct ExtResult {
    Structure structure;
    QuotientMap quotient;
};

// Glue the bags along their mark identifications and quotient the copies.
// A tuple holds in the result exactly when some single bag holds a
// representative of it. Requires a valid decomposition; a reconstructed
// element carrying both colors raises MergeConflictError.
inline ExtResult ext(const TreeDecomposition& td) {
    auto violations = validate_td(td);
    if (!violations.empty())
        throw std::invalid_argument("ext: invalid decomposition: " + violations.front());

    int n = td.node_count();
    std::vector<int> offset(n + 1, 0);
    for (NodeId t = 0; t < n; ++t) offset[t + 1] = offset[t] + td.bags[t].structure.size();
    DisjointSet ds(offset[n]);
    for (NodeId u = 0; u < n; ++u) {
        if (td.parent[u] == kNoParent) continue;
        NodeId p = td.parent[u];
        for (int i = 0; i <= td.k; ++i) {
            ElementId mine = td.bags[u].in_mark[i];
            if (mine == kNoMark) continue;
            ElementId theirs = td.bags[p].out_mark[i];
            ds.merge(offset[u] + mine, offset[p] + theirs);
        }
    }

    // Classes numbered by first copy in (node, local) order.
    std::vector<ElementId> class_id(offset[n], kNoMark);
    int classes = 0;
    for (int c = 0; c < offset[n]; ++c) {
        int r = ds.find(c);
        if (class_id[r] == kNoMark) class_id[r] = classes++;
        class_id[c] = class_id[r];
    }

    const Vocabulary& vocab = td.bags[td.root()].structure.vocabulary();
    StructureBuilder sb(vocab);
    std::vector<Color> color(classes, Color::none);
    std::vector<std::optional<Annotation>> ann(classes);
    for (NodeId t = 0; t < n; ++t) {
        const Structure& bs = td.bags[t].structure;
        for (ElementId x = 0; x < bs.size(); ++x) {
            ElementId cls = class_id[offset[t] + x];
            Color c = bs.color(x);
            if (c != Color::none) {
                if (color[cls] != Color::none && color[cls] != c)
                    throw MergeConflictError(cls,
                                             "reconstructed element " + std::to_string(cls) +
                                                 " inherits both colors");
                color[cls] = c;
            }
            if (!ann[cls] && bs.annotation(x)) ann[cls] = bs.annotation(x);
        }
    }
    for (int cls = 0; cls < classes; ++cls) sb.add_element(color[cls], ann[cls]);
    for (NodeId t = 0; t < n; ++t) {
        const Structure& bs = td.bags[t].structure;
        for (int rel = 0; rel < vocab.relation_count(); ++rel) {
            if (vocab.relation(rel).name == "P0" || vocab.relation(rel).name == "P1") continue;
            for (const auto& tup : bs.tuples(rel)) {
                std::vector<ElementId> img(tup.size());
                for (std::size_t i = 0; i < tup.size(); ++i)
                    img[i] = class_id[offset[t] + tup[i]];
                sb.add_tuple(rel, img);
            }
        }
    }

    std::vector<std::vector<ElementId>> class_of(n);
    for (NodeId t = 0; t < n; ++t) {
        class_of[t].resize(td.bags[t].structure.size());
        for (ElementId x = 0; x < td.bags[t].structure.size(); ++x)
            class_of[t][x] = class_id[offset[t] + x];
    }
    return ExtResult{sb.build(), QuotientMap(std::move(class_of), classes)};
}

inline int width(const TreeDecomposition& td) {
    int w = -1;
    for (const KBag& b : td.bags) w = std::max(w, b.structure.size() - 1);
    return w;
}

inline bool is_path_decomposition(const TreeDecomposition& td) {
    auto ch = td.children();
    for (const auto& c : ch)
        if (c.size() > 1) return false;
    return true;
}

inline int tree_distance(const TreeDecomposition& td, NodeId from, NodeId to) {
    int n = td.node_count();
    if (from < 0 || from >= n || to < 0 || to >= n)
        throw std::invalid_argument("tree_distance: node out of range");
    auto ch = td.children();
    std::vector<int> dist(n, -1);
    std::deque<NodeId> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
        NodeId t = queue.front();
        queue.pop_front();
        if (t == to) return dist[t];
        std::vector<NodeId> nb = ch[t];
        if (td.parent[t] != kNoParent) nb.push_back(td.parent[t]);
        for (NodeId u : nb)
            if (dist[u] < 0) {
                dist[u] = dist[t] + 1;
                queue.push_back(u);
            }
    }
    throw std::logic_error("tree_distance: nodes not connected");
}

namespace detail {

// Diameter of the subtree induced by a connected node set: BFS twice inside
// the set (exact on trees).
inline int subset_diameter(const std::vector<std::vector<NodeId>>& adj,
                           const std::vector<NodeId>& members) {
    if (members.size() <= 1) return 0;
    std::vector<bool> in_set(adj.size(), false);
    for (NodeId t : members) in_set[t] = true;
    auto bfs = [&](NodeId start) {
        std::vector<int> dist(adj.size(), -1);
        std::deque<NodeId> queue{start};
        dist[start] = 0;
        NodeId far = start;
        while (!queue.empty()) {
            NodeId t = queue.front();
            queue.pop_front();
            if (dist[t] > dist[far]) far = t;
            for (NodeId u : adj[t])
                if (in_set[u] && dist[u] < 0) {
                    dist[u] = dist[t] + 1;
                    queue.push_back(u);
                }
        }
        return std::pair<NodeId, int>{far, dist[far]};
    };
    int best = 0;
    std::vector<bool> done(adj.size(), false);
    for (NodeId s : members) {
        if (done[s]) continue;
        auto [far, d1] = bfs(s);
        auto [far2, d2] = bfs(far);
        best = std::max(best, d2);
        // Mark this component handled.
        std::deque<NodeId> queue{s};
        done[s] = true;
        while (!queue.empty()) {
            NodeId t = queue.front();
            queue.pop_front();
            for (NodeId u : adj[t])
                if (in_set[u] && !done[u]) {
                    done[u] = true;
                    queue.push_back(u);
                }
        }
        (void)far2;
    }
    return best;
}

}  // namespace detail

// Largest tree diameter over the occurrence sets of the reconstructed
// elements: how far apart a single element's copies may sit.
inline int span(const TreeDecomposition& td, const QuotientMap& qm) {
    auto ch = td.children();
    std::vector<std::vector<NodeId>> adj(td.node_count());
    for (NodeId t = 0; t < td.node_count(); ++t) {
        adj[t] = ch[t];
        if (td.parent[t] != kNoParent) adj[t].push_back(td.parent[t]);
    }
    int best = 0;
    for (int cls = 0; cls < qm.class_count(); ++cls)
        best = std::max(best, detail::subset_diameter(adj, qm.occurrences(cls)));
    return best;
}

inline int span(const TreeDecomposition& td) { return span(td, ext(td).quotient); }

struct OccurrenceReport {
    std::vector<NodeId> nodes;
    int diameter = 0;
};

// Occurrence nodes of one reconstructed element and how far apart they sit.
inline OccurrenceReport element_occurrences(const TreeDecomposition& td, const QuotientMap& qm,
                                            ElementId cls) {
    if (cls < 0 || cls >= qm.class_count())
        throw std::invalid_argument("element_occurrences: unknown class");
    auto ch = td.children();
    std::vector<std::vector<NodeId>> adj(td.node_count());
    for (NodeId t = 0; t < td.node_count(); ++t) {
        adj[t] = ch[t];
        if (td.parent[t] != kNoParent) adj[t].push_back(td.parent[t]);
    }
    return OccurrenceReport{qm.occurrences(cls), detail::subset_diameter(adj, qm.occurrences(cls))};
}

// Restriction to the subtree under new_root; the new root forgets its
// in-marks. Node ids are renumbered in preorder.
inline TreeDecomposition subtree_decomposition(const TreeDecomposition& td, NodeId new_root) {
    if (new_root < 0 || new_root >= td.node_count())
        throw std::invalid_argument("subtree_decomposition: node out of range");
    auto ch = td.children();
    TreeDecomposition out;
    out.k = td.k;
    std::vector<std::pair<NodeId, NodeId>> stack{{new_root, kNoParent}};  // (old, new parent)
    while (!stack.empty()) {
        auto [old_id, new_parent] = stack.back();
        stack.pop_back();
        NodeId fresh = out.node_count();
        out.bags.push_back(td.bags[old_id]);
        out.parent.push_back(new_parent);
        if (new_parent == kNoParent)
            std::fill(out.bags.back().in_mark.begin(), out.bags.back().in_mark.end(), kNoMark);
        for (auto it = ch[old_id].rbegin(); it != ch[old_id].rend(); ++it)
            stack.emplace_back(*it, fresh);
    }
    return out;
}

// Canonical key of a bag up to relabeling its elements (marks, colors and
// tuples all participate). Lexicographically least encoding over all
// permutations; intended for bags of at most eight elements.
inline std::string bag_class_key(const KBag& b) {
    int n = b.structure.size();
    if (n > 8) throw std::invalid_argument("bag_class_key: bag too large");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::string best;
    do {
        std::ostringstream enc;
        enc << n << ';';
        std::vector<int> pos(n);  // old element -> new position
        for (int i = 0; i < n; ++i) pos[perm[i]] = i;
        for (int j = 0; j < n; ++j) enc << static_cast<int>(b.structure.color(perm[j])) << ',';
        enc << ';';
        for (ElementId e : b.in_mark) enc << (e == kNoMark ? -1 : pos[e]) << ',';
        enc << ';';
        for (ElementId e : b.out_mark) enc << (e == kNoMark ? -1 : pos[e]) << ',';
        enc << ';';
        const Vocabulary& vocab = b.structure.vocabulary();
        for (int rel = 0; rel < vocab.relation_count(); ++rel) {
            std::vector<std::vector<int>> mapped;
            for (const auto& t : b.structure.tuples(rel)) {
                std::vector<int> img(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) img[i] = pos[t[i]];
                if (b.structure.relation_is_symmetric(rel) && img.size() == 2 &&
                    img[0] > img[1])
                    std::swap(img[0], img[1]);
                mapped.push_back(std::move(img));
            }
            std::sort(mapped.begin(), mapped.end());
            enc << '|';
            for (const auto& t : mapped) {
                for (int x : t) enc << x << ',';
                enc << '/';
            }
        }
        std::string s = enc.str();
        if (best.empty() || s < best) best = std::move(s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace tdspan
