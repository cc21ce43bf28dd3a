#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "tdspan/decomposition.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

// Plain set-of-elements decomposition of a target structure: a rooted tree
// whose nodes carry subsets of the structure's domain.
struct ClassicalDecomposition {
    std::vector<NodeId> parent;
    std::vector<std::vector<ElementId>> bag;

    int node_count() const { return static_cast<int>(bag.size()); }
};

// The three textbook conditions: every element occurs somewhere, every tuple
// fits inside one bag, and each element's occurrence set is connected.
inline std::vector<std::string> check_classical(const Structure& s,
                                                const ClassicalDecomposition& d) {
    std::vector<std::string> out;
    int n = d.node_count();
    if (n == 0 || static_cast<int>(d.parent.size()) != n) {
        out.push_back("tree shape: bag and parent counts disagree or empty");
        return out;
    }
    int roots = 0;
    for (NodeId t = 0; t < n; ++t) {
        if (d.parent[t] == kNoParent)
            ++roots;
        else if (d.parent[t] < 0 || d.parent[t] >= n || d.parent[t] == t)
            out.push_back("node " + std::to_string(t) + ": parent out of range");
    }
    if (roots != 1) out.push_back("expected exactly one root");
    if (!out.empty()) return out;

    std::vector<std::vector<NodeId>> adj(n);
    for (NodeId t = 0; t < n; ++t)
        if (d.parent[t] != kNoParent) {
            adj[t].push_back(d.parent[t]);
            adj[d.parent[t]].push_back(t);
        }
    {
        std::vector<bool> seen(n, false);
        std::deque<NodeId> queue{0};
        seen[0] = true;
        int reached = 1;
        while (!queue.empty()) {
            NodeId t = queue.front();
            queue.pop_front();
            for (NodeId u : adj[t])
                if (!seen[u]) {
                    seen[u] = true;
                    ++reached;
                    queue.push_back(u);
                }
        }
        if (reached != n) {
            out.push_back("tree shape: not connected");
            return out;
        }
    }

    std::vector<std::vector<NodeId>> occ(s.size());
    for (NodeId t = 0; t < n; ++t)
        for (ElementId x : d.bag[t]) {
            if (x < 0 || x >= s.size()) {
                out.push_back("node " + std::to_string(t) + ": bag element out of range");
                continue;
            }
            occ[x].push_back(t);
        }
    for (ElementId x = 0; x < s.size(); ++x) {
        if (occ[x].empty()) {
            out.push_back("element " + std::to_string(x) + ": not covered by any bag");
            continue;
        }
        // Connectivity of the occurrence set.
        std::vector<bool> in_set(n, false), seen(n, false);
        for (NodeId t : occ[x]) in_set[t] = true;
        std::deque<NodeId> queue{occ[x].front()};
        seen[occ[x].front()] = true;
        std::size_t reached = 1;
        while (!queue.empty()) {
            NodeId t = queue.front();
            queue.pop_front();
            for (NodeId u : adj[t])
                if (in_set[u] && !seen[u]) {
                    seen[u] = true;
                    ++reached;
                    queue.push_back(u);
                }
        }
        std::vector<NodeId> distinct = occ[x];
        sort_unique(distinct);
        if (reached != distinct.size())
            out.push_back("element " + std::to_string(x) + ": occurrence set disconnected");
    }

    std::vector<std::vector<ElementId>> sorted_bag = d.bag;
    for (auto& b : sorted_bag) sort_unique(b);
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        for (const auto& tup : s.tuples(rel)) {
            bool covered = false;
            for (NodeId t = 0; t < n && !covered; ++t) {
                bool all = true;
                for (ElementId x : tup)
                    if (!std::binary_search(sorted_bag[t].begin(), sorted_bag[t].end(), x)) {
                        all = false;
                        break;
                    }
                covered = all;
            }
            if (!covered)
                out.push_back("a " + s.vocabulary().relation(rel).name +
                              " tuple fits in no single bag");
        }
    }
    return out;
}

// Turn a classical decomposition into the marked form. Elements shared with
// a child receive out-mark indices 0, 1, 2, ... in ascending element order;
// each child copies the parent's index for every element they share.
inline TreeDecomposition encode_classical(const Structure& s, const ClassicalDecomposition& d,
                                          int k) {
    {
        auto violations = check_classical(s, d);
        if (!violations.empty())
            throw std::invalid_argument("encode_classical: " + violations.front());
    }
    int n = d.node_count();
    std::vector<std::vector<ElementId>> bag(n);
    for (NodeId t = 0; t < n; ++t) {
        bag[t] = d.bag[t];
        sort_unique(bag[t]);
        if (bag[t].empty())
            throw std::invalid_argument("encode_classical: bag " + std::to_string(t) +
                                        " is empty");
        if (static_cast<int>(bag[t].size()) > k + 1)
            throw std::invalid_argument("encode_classical: bag " + std::to_string(t) +
                                        " exceeds width budget " + std::to_string(k));
    }

    std::vector<std::vector<NodeId>> ch(n);
    for (NodeId t = 0; t < n; ++t)
        if (d.parent[t] != kNoParent) ch[d.parent[t]].push_back(t);

    // Out-mark index per (node, structure element) for elements shared with
    // at least one child.
    std::vector<std::map<ElementId, int>> out_index(n);
    for (NodeId t = 0; t < n; ++t) {
        std::vector<ElementId> shared;
        for (ElementId x : bag[t]) {
            bool with_child = false;
            for (NodeId u : ch[t])
                if (std::binary_search(bag[u].begin(), bag[u].end(), x)) with_child = true;
            if (with_child) shared.push_back(x);
        }
        for (std::size_t i = 0; i < shared.size(); ++i)
            out_index[t][shared[i]] = static_cast<int>(i);
    }

    TreeDecomposition td;
    td.k = k;
    td.parent = d.parent;
    td.bags.reserve(n);
    for (NodeId t = 0; t < n; ++t) {
        StructureBuilder sb(s.vocabulary());
        std::map<ElementId, ElementId> local;
        for (ElementId x : bag[t]) {
            local[x] = sb.element_count();
            sb.add_element(s.color(x), s.annotation(x));
        }
        for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
            if (s.vocabulary().relation(rel).name == "P0" ||
                s.vocabulary().relation(rel).name == "P1")
                continue;
            for (const auto& tup : s.tuples(rel)) {
                bool inside = true;
                for (ElementId x : tup)
                    if (!local.count(x)) {
                        inside = false;
                        break;
                    }
                if (!inside) continue;
                std::vector<ElementId> img(tup.size());
                for (std::size_t i = 0; i < tup.size(); ++i) img[i] = local[tup[i]];
                sb.add_tuple(rel, img);
            }
        }
        KBag b = KBag::make(k, sb.build());
        for (auto [x, idx] : out_index[t]) b.out_mark[idx] = local[x];
        if (d.parent[t] != kNoParent) {
            NodeId p = d.parent[t];
            for (ElementId x : bag[t]) {
                auto it = out_index[p].find(x);
                if (it != out_index[p].end()) b.in_mark[it->second] = local[x];
            }
        }
        td.bags.push_back(std::move(b));
    }
    return td;
}

}  // namespace tdspan
