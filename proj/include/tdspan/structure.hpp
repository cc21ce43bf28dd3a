#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "tdspan/core.hpp"

namespace tdspan {

struct RelationSymbol {
    std::string name;
    int arity = 0;
    bool operator==(const RelationSymbol&) const = default;
};

// A finite relational signature. Relation names are unique, arities >= 1.
class Vocabulary {
public:
    Vocabulary() = default;

    explicit Vocabulary(std::vector<RelationSymbol> relations) : relations_(std::move(relations)) {
        for (std::size_t i = 0; i < relations_.size(); ++i) {
            if (relations_[i].arity < 1) throw std::invalid_argument("relation arity must be >= 1");
            for (std::size_t j = 0; j < i; ++j)
                if (relations_[j].name == relations_[i].name)
                    throw std::invalid_argument("duplicate relation name: " + relations_[i].name);
        }
    }

    // One binary adjacency relation plus the two color predicates.
    static Vocabulary colored_graphs() {
        return Vocabulary({{"E", 2}, {"P0", 1}, {"P1", 1}});
    }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < relations_.size(); ++i)
            if (relations_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    const RelationSymbol& relation(int idx) const { return relations_.at(idx); }
    int relation_count() const { return static_cast<int>(relations_.size()); }
    const std::vector<RelationSymbol>& relations() const { return relations_; }
    bool operator==(const Vocabulary&) const = default;

private:
    std::vector<RelationSymbol> relations_;
};

enum class Color : std::uint8_t { none, p0, p1 };

enum class Role : std::uint8_t {
    plain,
    source_s,
    source_t,
    source_word,
    run_member,
    loz_leaf,
    label_path,
};

enum class RunSide : std::uint8_t { top, bottom };

// Optional per-element generator metadata. Never part of the relational
// content: isomorphism and game comparisons ignore it.
struct Annotation {
    Role role = Role::plain;
    std::string word;               // source_word: the word this source stands for
    int block = -1;                 // run_member: gadget index along the chain
    RunSide side = RunSide::top;    // run_member
    int run_value = -1;             // run_member: the color count of the run
    int pair_index = -1;            // loz_leaf: which rail the leaf starts
    int position = -1;              // label_path: offset along the label
    std::string htree;              // containing subtree prefix, empty when unset
    bool operator==(const Annotation&) const = default;
};

class StructureBuilder;

// An immutable finite relational structure over a fixed vocabulary.
// Elements are dense naturals 0..size-1. When symmetric_edges is set the
// binary relation named E is stored once per unordered pair (smaller id
// first); lookups normalize accordingly. The Gaifman adjacency is always
// symmetric regardless of the flag.
class Structure {
public:
    const Vocabulary& vocabulary() const { return vocab_; }
    bool symmetric_edges() const { return symmetric_edges_; }
    int size() const { return size_; }

    const std::vector<std::vector<int>>& tuples(int rel) const { return tuples_.at(rel); }

    bool has_tuple(int rel, std::vector<int> tuple) const {
        normalize_tuple(rel, tuple);
        const auto& ts = tuples_.at(rel);
        return std::binary_search(ts.begin(), ts.end(), tuple);
    }

    bool has_edge(ElementId a, ElementId b) const {
        return edge_rel_ >= 0 && has_tuple(edge_rel_, {a, b});
    }

    Color color(ElementId x) const { return colors_.at(x); }
    const std::optional<Annotation>& annotation(ElementId x) const { return annotations_.at(x); }

    // Gaifman neighbors: elements co-occurring with x in some tuple.
    const std::vector<ElementId>& neighbors(ElementId x) const { return adjacency_.at(x); }
    int degree(ElementId x) const { return static_cast<int>(adjacency_.at(x).size()); }

    int edge_relation() const { return edge_rel_; }

    // True when the relation index is stored under the unordered convention.
    bool relation_is_symmetric(int rel) const { return symmetric_edges_ && rel == edge_rel_; }

    void normalize_tuple(int rel, std::vector<int>& tuple) const {
        if (relation_is_symmetric(rel) && tuple.size() == 2 && tuple[0] > tuple[1])
            std::swap(tuple[0], tuple[1]);
    }

private:
    friend class StructureBuilder;
    Vocabulary vocab_;
    bool symmetric_edges_ = true;
    int size_ = 0;
    int edge_rel_ = -1;
    std::vector<std::vector<std::vector<int>>> tuples_;  // [relation][tuple][position]
    std::vector<Color> colors_;
    std::vector<std::optional<Annotation>> annotations_;
    std::vector<std::vector<ElementId>> adjacency_;
};

class StructureBuilder {
public:
    explicit StructureBuilder(Vocabulary vocab = Vocabulary::colored_graphs(),
                              bool symmetric_edges = true)
        : vocab_(std::move(vocab)), symmetric_edges_(symmetric_edges) {
        tuples_.resize(vocab_.relation_count());
    }

    ElementId add_element(Color color = Color::none,
                          std::optional<Annotation> annotation = std::nullopt) {
        colors_.push_back(color);
        annotations_.push_back(std::move(annotation));
        return static_cast<ElementId>(colors_.size()) - 1;
    }

    void set_color(ElementId x, Color c) { colors_.at(x) = c; }
    void set_annotation(ElementId x, Annotation a) { annotations_.at(x) = std::move(a); }

    void add_tuple(const std::string& relation, std::vector<int> tuple) {
        int rel = vocab_.index_of(relation);
        if (rel < 0) throw std::invalid_argument("unknown relation: " + relation);
        add_tuple(rel, std::move(tuple));
    }

    void add_tuple(int rel, std::vector<int> tuple) {
        if (static_cast<int>(tuple.size()) != vocab_.relation(rel).arity)
            throw std::invalid_argument("tuple arity mismatch for " + vocab_.relation(rel).name);
        tuples_.at(rel).push_back(std::move(tuple));
    }

    void add_edge(ElementId a, ElementId b) {
        int rel = vocab_.index_of("E");
        if (rel < 0) throw std::invalid_argument("vocabulary has no E relation");
        add_tuple(rel, {a, b});
    }

    int element_count() const { return static_cast<int>(colors_.size()); }

    Structure build() {
        Structure s;
        s.vocab_ = vocab_;
        s.symmetric_edges_ = symmetric_edges_;
        s.size_ = element_count();
        s.edge_rel_ = vocab_.index_of("E");
        s.colors_ = colors_;
        s.annotations_ = annotations_;

        // Colors double as the unary predicates P0/P1 when present.
        int p0 = vocab_.index_of("P0");
        int p1 = vocab_.index_of("P1");
        for (ElementId x = 0; x < s.size_; ++x) {
            if (colors_[x] == Color::p0 && p0 >= 0) tuples_[p0].push_back({x});
            if (colors_[x] == Color::p1 && p1 >= 0) tuples_[p1].push_back({x});
        }

        s.tuples_.resize(vocab_.relation_count());
        for (int rel = 0; rel < vocab_.relation_count(); ++rel) {
            auto ts = tuples_[rel];
            for (auto& t : ts) {
                for (int x : t)
                    if (x < 0 || x >= s.size_) throw std::invalid_argument("tuple element out of range");
                s.normalize_tuple(rel, t);
            }
            sort_unique(ts);
            s.tuples_[rel] = std::move(ts);
        }

        // Unary color predicates fed back from tuple input, for parsers that
        // hand colors in as tuples rather than through add_element.
        if (p0 >= 0)
            for (const auto& t : s.tuples_[p0]) s.colors_[t[0]] = Color::p0;
        if (p1 >= 0)
            for (const auto& t : s.tuples_[p1]) {
                if (s.colors_[t[0]] == Color::p0)
                    throw std::invalid_argument("element carries both colors: " + std::to_string(t[0]));
                s.colors_[t[0]] = Color::p1;
            }

        s.adjacency_.assign(s.size_, {});
        for (int rel = 0; rel < vocab_.relation_count(); ++rel)
            for (const auto& t : s.tuples_[rel])
                for (int a : t)
                    for (int b : t)
                        if (a != b) s.adjacency_[a].push_back(b);
        for (auto& nb : s.adjacency_) sort_unique(nb);
        return s;
    }

private:
    Vocabulary vocab_;
    bool symmetric_edges_;
    std::vector<std::vector<std::vector<int>>> tuples_;
    std::vector<Color> colors_;
    std::vector<std::optional<Annotation>> annotations_;
};

// Shortest-path distance in the Gaifman graph; nullopt when disconnected.
inline std::optional<int> gaifman_distance(const Structure& s, ElementId from, ElementId to) {
    if (from < 0 || from >= s.size() || to < 0 || to >= s.size())
        throw std::invalid_argument("gaifman_distance: element out of range");
    if (from == to) return 0;
    std::vector<int> dist(s.size(), -1);
    dist[from] = 0;
    std::deque<ElementId> queue{from};
    while (!queue.empty()) {
        ElementId x = queue.front();
        queue.pop_front();
        for (ElementId y : s.neighbors(x)) {
            if (dist[y] >= 0) continue;
            dist[y] = dist[x] + 1;
            if (y == to) return dist[y];
            queue.push_back(y);
        }
    }
    return std::nullopt;
}

// Connected components of the Gaifman graph, each sorted, ordered by least element.
inline std::vector<std::vector<ElementId>> connected_components(const Structure& s) {
    DisjointSet ds(s.size());
    for (ElementId x = 0; x < s.size(); ++x)
        for (ElementId y : s.neighbors(x)) ds.merge(x, y);
    std::vector<std::vector<ElementId>> by_root(s.size());
    for (ElementId x = 0; x < s.size(); ++x) by_root[ds.find(x)].push_back(x);
    std::vector<std::vector<ElementId>> parts;
    for (auto& part : by_root)
        if (!part.empty()) parts.push_back(std::move(part));
    return parts;
}

// Disjoint union: elements of b are shifted by a.size(). Annotations carry over.
inline Structure disjoint_union(const Structure& a, const Structure& b) {
    if (!(a.vocabulary() == b.vocabulary()) || a.symmetric_edges() != b.symmetric_edges())
        throw std::invalid_argument("disjoint_union: vocabulary mismatch");
    StructureBuilder sb(a.vocabulary(), a.symmetric_edges());
    for (ElementId x = 0; x < a.size(); ++x) sb.add_element(a.color(x), a.annotation(x));
    for (ElementId x = 0; x < b.size(); ++x) sb.add_element(b.color(x), b.annotation(x));
    int p0 = a.vocabulary().index_of("P0");
    int p1 = a.vocabulary().index_of("P1");
    for (int rel = 0; rel < a.vocabulary().relation_count(); ++rel) {
        if (rel == p0 || rel == p1) continue;  // regenerated from colors
        for (const auto& t : a.tuples(rel)) sb.add_tuple(rel, t);
        for (auto t : b.tuples(rel)) {
            for (int& x : t) x += a.size();
            sb.add_tuple(rel, std::move(t));
        }
    }
    return sb.build();
}

}  // namespace tdspan
