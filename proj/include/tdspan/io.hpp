#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdspan/classical.hpp"
#include "tdspan/decomposition.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON plumbing
// ---------------------------------------------------------------------------

// Canonical dump: two-space indent, trailing newline. Writers below emit
// sorted ids and sorted tuples, so dump . parse . dump is the identity.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());  // message carries line and column
    }
}

// Integers stay JSON numbers up to 2^53 and become decimal strings beyond,
// so the emitted documents survive double-precision JSON readers.
template <typename BigNumber>
Json json_integer(const BigNumber& v) {
    static const BigNumber bound = BigNumber(1) << 53;
    if (v <= bound && -v <= bound) return Json(static_cast<std::int64_t>(v));
    std::ostringstream out;
    out << v;
    return Json(out.str());
}

namespace detail {

inline long long io_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer())
        throw ParseError(where + ": expected an integer, got " + j.dump());
    return j.get<long long>();
}

inline std::string io_str(const Json& j, const std::string& where) {
    if (!j.is_string()) throw ParseError(where + ": expected a string, got " + j.dump());
    return j.get<std::string>();
}

inline const Json& io_field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(where + ": missing field \"" + key + "\"");
    return j.at(key);
}

inline void io_expect_keys(const Json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys)
            if (key == k) known = true;
        if (!known) throw ParseError(where + ": unknown field \"" + key + "\"");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Colors, roles, annotations
// ---------------------------------------------------------------------------

inline std::string color_name(Color c) { return c == Color::p0 ? "p0" : "p1"; }

inline Json colors_to_json(Color c) {
    Json list = Json::array();
    if (c != Color::none) list.push_back(color_name(c));
    return list;
}

inline Color colors_from_json(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": colors must be a list");
    Color c = Color::none;
    for (const auto& entry : j) {
        std::string name = detail::io_str(entry, where);
        Color parsed;
        if (name == "p0")
            parsed = Color::p0;
        else if (name == "p1")
            parsed = Color::p1;
        else
            throw ParseError(where + ": unknown color \"" + name + "\"");
        if (c != Color::none && c != parsed)
            throw ParseError(where + ": an element carries both colors");
        c = parsed;
    }
    return c;
}

inline std::string role_name(Role r) {
    switch (r) {
        case Role::plain: return "plain";
        case Role::source_s: return "source_s";
        case Role::source_t: return "source_t";
        case Role::source_word: return "source_word";
        case Role::run_member: return "run_member";
        case Role::loz_leaf: return "loz_leaf";
        case Role::label_path: return "label_path";
    }
    throw std::logic_error("role_name: unhandled role");
}

inline Role role_from_name(const std::string& name, const std::string& where) {
    for (Role r : {Role::plain, Role::source_s, Role::source_t, Role::source_word,
                   Role::run_member, Role::loz_leaf, Role::label_path})
        if (role_name(r) == name) return r;
    throw ParseError(where + ": unknown role \"" + name + "\"");
}

inline Json annotation_to_json(const Annotation& a) {
    Json j;
    j["role"] = role_name(a.role);
    if (!a.word.empty()) j["word"] = a.word;
    if (a.block >= 0) j["block"] = a.block;
    if (a.role == Role::run_member) j["side"] = a.side == RunSide::top ? "top" : "bottom";
    if (a.run_value >= 0) j["run_value"] = a.run_value;
    if (a.pair_index >= 0) j["pair_index"] = a.pair_index;
    if (a.position >= 0) j["position"] = a.position;
    if (!a.htree.empty()) j["htree"] = a.htree;
    return j;
}

inline Annotation annotation_from_json(const Json& j, const std::string& where) {
    detail::io_expect_keys(
        j, {"role", "word", "block", "side", "run_value", "pair_index", "position", "htree"},
        where);
    Annotation a;
    a.role = role_from_name(detail::io_str(detail::io_field(j, "role", where), where), where);
    if (j.contains("word")) a.word = detail::io_str(j.at("word"), where + ".word");
    if (j.contains("block"))
        a.block = static_cast<int>(detail::io_int(j.at("block"), where + ".block"));
    if (j.contains("side")) {
        std::string side = detail::io_str(j.at("side"), where + ".side");
        if (side != "top" && side != "bottom")
            throw ParseError(where + ": unknown side \"" + side + "\"");
        a.side = side == "top" ? RunSide::top : RunSide::bottom;
    }
    if (j.contains("run_value"))
        a.run_value = static_cast<int>(detail::io_int(j.at("run_value"), where + ".run_value"));
    if (j.contains("pair_index"))
        a.pair_index = static_cast<int>(detail::io_int(j.at("pair_index"), where + ".pair_index"));
    if (j.contains("position"))
        a.position = static_cast<int>(detail::io_int(j.at("position"), where + ".position"));
    if (j.contains("htree")) a.htree = detail::io_str(j.at("htree"), where + ".htree");
    return a;
}

// ---------------------------------------------------------------------------
// Structure files
// ---------------------------------------------------------------------------

inline Json vocabulary_to_json(const Vocabulary& vocab) {
    Json list = Json::array();
    for (const auto& r : vocab.relations()) {
        Json sym;
        sym["name"] = r.name;
        sym["arity"] = r.arity;
        list.push_back(std::move(sym));
    }
    return list;
}

inline Vocabulary vocabulary_from_json(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": vocabulary must be a list");
    std::vector<RelationSymbol> rels;
    for (const auto& entry : j) {
        detail::io_expect_keys(entry, {"name", "arity"}, where);
        rels.push_back(
            {detail::io_str(detail::io_field(entry, "name", where), where),
             static_cast<int>(detail::io_int(detail::io_field(entry, "arity", where), where))});
    }
    try {
        return Vocabulary(std::move(rels));
    } catch (const std::invalid_argument& e) {
        throw ParseError(where + ": " + e.what());
    }
}

namespace detail {

inline Json tuples_to_json(const Structure& s) {
    Json out = Json::object();
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        Json list = Json::array();
        for (const auto& t : s.tuples(rel)) list.push_back(t);
        out[s.vocabulary().relation(rel).name] = std::move(list);
    }
    return out;
}

inline void tuples_from_json(StructureBuilder& b, const Vocabulary& vocab, const Json& j,
                             const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": tuples must be an object");
    for (const auto& [name, list] : j.items()) {
        if (vocab.index_of(name) < 0)
            throw ParseError(where + ": unknown relation \"" + name + "\"");
        if (!list.is_array()) throw ParseError(where + "." + name + ": expected a list");
        for (const auto& entry : list) {
            if (!entry.is_array()) throw ParseError(where + "." + name + ": expected a tuple");
            std::vector<int> tuple;
            for (const auto& id : entry)
                tuple.push_back(static_cast<int>(io_int(id, where + "." + name)));
            try {
                b.add_tuple(name, std::move(tuple));
            } catch (const std::invalid_argument& e) {
                throw ParseError(where + "." + name + ": " + e.what());
            }
        }
    }
}

// Validates that the key's values cover 0..n-1 and returns entries in order.
inline std::vector<const Json*> entries_by_key(const Json& nodes, const char* key,
                                               const std::string& where) {
    if (!nodes.is_array()) throw ParseError(where + ": expected a list");
    std::vector<const Json*> by_id(nodes.size(), nullptr);
    for (const auto& node : nodes) {
        long long id = io_int(io_field(node, key, where), where);
        if (id < 0 || id >= static_cast<long long>(by_id.size()))
            throw ParseError(where + ": " + key + " " + std::to_string(id) + " outside 0.." +
                             std::to_string(static_cast<long long>(by_id.size()) - 1));
        if (by_id[id])
            throw ParseError(where + ": duplicate " + key + " " + std::to_string(id));
        by_id[id] = &node;
    }
    return by_id;
}

inline std::vector<const Json*> nodes_by_id(const Json& nodes, const std::string& where) {
    return entries_by_key(nodes, "id", where);
}

inline std::vector<const Json*> nodes_by_id_local(const Json& nodes, const std::string& where) {
    return entries_by_key(nodes, "local", where);
}

}  // namespace detail

inline Json structure_to_json(const Structure& s) {
    Json j;
    j["vocabulary"] = vocabulary_to_json(s.vocabulary());
    j["symmetric_edges"] = s.symmetric_edges();
    Json nodes = Json::array();
    for (ElementId x = 0; x < s.size(); ++x) {
        Json node;
        node["id"] = x;
        node["colors"] = colors_to_json(s.color(x));
        if (s.annotation(x)) node["annotation"] = annotation_to_json(*s.annotation(x));
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    j["tuples"] = detail::tuples_to_json(s);
    return j;
}

inline Structure structure_from_json(const Json& j) {
    detail::io_expect_keys(j, {"vocabulary", "symmetric_edges", "nodes", "tuples"}, "structure");
    Vocabulary vocab =
        vocabulary_from_json(detail::io_field(j, "vocabulary", "structure"), "vocabulary");
    const Json& sym = detail::io_field(j, "symmetric_edges", "structure");
    if (!sym.is_boolean()) throw ParseError("structure.symmetric_edges: expected a boolean");
    StructureBuilder b(vocab, sym.get<bool>());
    for (const Json* node : detail::nodes_by_id(detail::io_field(j, "nodes", "structure"), "nodes")) {
        detail::io_expect_keys(*node, {"id", "colors", "annotation"}, "node");
        std::optional<Annotation> ann;
        if (node->contains("annotation"))
            ann = annotation_from_json(node->at("annotation"), "node.annotation");
        b.add_element(colors_from_json(detail::io_field(*node, "colors", "node"), "node.colors"),
                      std::move(ann));
    }
    detail::tuples_from_json(b, vocab, detail::io_field(j, "tuples", "structure"), "tuples");
    try {
        return b.build();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("structure: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Decomposition files
// ---------------------------------------------------------------------------

inline Json decomposition_to_json(const TreeDecomposition& td) {
    Json j;
    j["k"] = td.k;
    Json nodes = Json::array();
    const Vocabulary* vocab = nullptr;
    bool symmetric = true;
    for (NodeId t = 0; t < td.node_count(); ++t) {
        const KBag& bag = td.bags[t];
        if (!vocab) {
            vocab = &bag.structure.vocabulary();
            symmetric = bag.structure.symmetric_edges();
        }
        Json node;
        node["id"] = t;
        node["parent"] = td.parent[t];
        Json elements = Json::array();
        for (ElementId x = 0; x < bag.structure.size(); ++x) {
            Json e;
            e["local"] = x;
            e["colors"] = colors_to_json(bag.structure.color(x));
            if (bag.structure.annotation(x))
                e["annotation"] = annotation_to_json(*bag.structure.annotation(x));
            for (int i = 0; i <= bag.k; ++i) {
                if (bag.in_mark[i] == x) e["in"] = i;
                if (bag.out_mark[i] == x) e["out"] = i;
            }
            elements.push_back(std::move(e));
        }
        Json inner;
        inner["elements"] = std::move(elements);
        inner["tuples"] = detail::tuples_to_json(bag.structure);
        node["bag"] = std::move(inner);
        nodes.push_back(std::move(node));
    }
    j["vocabulary"] = vocabulary_to_json(vocab ? *vocab : Vocabulary::colored_graphs());
    j["symmetric_edges"] = symmetric;
    j["nodes"] = std::move(nodes);
    return j;
}

inline TreeDecomposition decomposition_from_json(const Json& j) {
    detail::io_expect_keys(j, {"k", "vocabulary", "symmetric_edges", "nodes"}, "decomposition");
    TreeDecomposition td;
    td.k = static_cast<int>(detail::io_int(detail::io_field(j, "k", "decomposition"), "k"));
    if (td.k < 0) throw ParseError("decomposition: negative k");
    Vocabulary vocab =
        vocabulary_from_json(detail::io_field(j, "vocabulary", "decomposition"), "vocabulary");
    const Json& sym = detail::io_field(j, "symmetric_edges", "decomposition");
    if (!sym.is_boolean()) throw ParseError("decomposition.symmetric_edges: expected a boolean");

    for (const Json* node :
         detail::nodes_by_id(detail::io_field(j, "nodes", "decomposition"), "nodes")) {
        detail::io_expect_keys(*node, {"id", "parent", "bag"}, "node");
        long long parent = detail::io_int(detail::io_field(*node, "parent", "node"), "node.parent");
        td.parent.push_back(static_cast<NodeId>(parent));
        const Json& inner = detail::io_field(*node, "bag", "node");
        detail::io_expect_keys(inner, {"elements", "tuples"}, "bag");

        StructureBuilder b(vocab, sym.get<bool>());
        std::vector<std::pair<int, int>> in_marks, out_marks;  // (index, local)
        for (const Json* e :
             detail::nodes_by_id_local(detail::io_field(inner, "elements", "bag"), "bag.elements")) {
            detail::io_expect_keys(*e, {"local", "colors", "annotation", "in", "out"},
                                   "bag.element");
            std::optional<Annotation> ann;
            if (e->contains("annotation"))
                ann = annotation_from_json(e->at("annotation"), "bag.element.annotation");
            ElementId local = b.add_element(
                colors_from_json(detail::io_field(*e, "colors", "bag.element"), "bag.element"),
                std::move(ann));
            if (e->contains("in"))
                in_marks.emplace_back(
                    static_cast<int>(detail::io_int(e->at("in"), "bag.element.in")), local);
            if (e->contains("out"))
                out_marks.emplace_back(
                    static_cast<int>(detail::io_int(e->at("out"), "bag.element.out")), local);
        }
        detail::tuples_from_json(b, vocab, detail::io_field(inner, "tuples", "bag"), "bag.tuples");
        KBag bag;
        try {
            bag = KBag::make(td.k, b.build());
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("bag: ") + e.what());
        }
        for (auto [family, marks] :
             {std::pair{&bag.in_mark, &in_marks}, std::pair{&bag.out_mark, &out_marks}}) {
            for (auto [idx, local] : *marks) {
                if (idx < 0 || idx > td.k)
                    throw ParseError("bag: mark index " + std::to_string(idx) + " outside 0.." +
                                     std::to_string(td.k));
                if ((*family)[idx] != kNoMark)
                    throw ParseError("bag: mark index " + std::to_string(idx) + " used twice");
                (*family)[idx] = local;
            }
        }
        td.bags.push_back(std::move(bag));
    }
    return td;
}

// ---------------------------------------------------------------------------
// PACE classical files: .gr graphs and .td decompositions, both 1-based
// ---------------------------------------------------------------------------

namespace detail {

struct PaceLine {
    long number = 0;
    std::vector<std::string> fields;
};

inline std::vector<PaceLine> pace_lines(const std::string& text) {
    std::vector<PaceLine> out;
    std::istringstream in(text);
    std::string raw;
    long number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::istringstream fields(raw);
        PaceLine line;
        line.number = number;
        std::string f;
        while (fields >> f) line.fields.push_back(f);
        if (line.fields.empty() || line.fields[0] == "c") continue;
        out.push_back(std::move(line));
    }
    return out;
}

inline long long pace_int(const std::string& f, const PaceLine& line) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected an integer, got \"" + f + "\"", line.number);
    }
}

}  // namespace detail

// Graph file: header "p tw <n> <m>", then one "u v" line per undirected edge.
inline Structure parse_pace_gr(const std::string& text) {
    auto lines = detail::pace_lines(text);
    if (lines.empty()) throw ParseError("graph file has no content lines");
    const auto& head = lines[0];
    if (head.fields.size() != 4 || head.fields[0] != "p" || head.fields[1] != "tw")
        throw ParseError("expected header \"p tw <n> <m>\"", head.number);
    long long n = detail::pace_int(head.fields[2], head);
    long long m = detail::pace_int(head.fields[3], head);
    if (n < 0 || m < 0) throw ParseError("negative size in header", head.number);
    if (n > 1'000'000) throw ParseError("graph too large for this toolkit", head.number);

    StructureBuilder b(Vocabulary::colored_graphs());
    for (long long i = 0; i < n; ++i) b.add_element();
    long long edges = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.fields.size() != 2)
            throw ParseError("expected an edge line \"u v\"", line.number);
        long long u = detail::pace_int(line.fields[0], line);
        long long v = detail::pace_int(line.fields[1], line);
        if (u < 1 || u > n || v < 1 || v > n)
            throw ParseError("vertex outside 1.." + std::to_string(n), line.number);
        if (u == v) throw ParseError("self loop", line.number);
        b.add_edge(static_cast<ElementId>(u - 1), static_cast<ElementId>(v - 1));
        ++edges;
    }
    if (edges != m)
        throw ParseError("header announces " + std::to_string(m) + " edges, file has " +
                         std::to_string(edges));
    return b.build();
}

// Decomposition file: "s td <#bags> <max bag size> <n>", "b <id> <v...>"
// bag lines, then one "t1 t2" line per tree edge. The tree is rooted at
// bag 1.
inline ClassicalDecomposition parse_pace_td(const std::string& text, int n) {
    auto lines = detail::pace_lines(text);
    if (lines.empty()) throw ParseError("decomposition file has no content lines");
    const auto& head = lines[0];
    if (head.fields.size() != 5 || head.fields[0] != "s" || head.fields[1] != "td")
        throw ParseError("expected header \"s td <bags> <maxbag> <n>\"", head.number);
    long long bags = detail::pace_int(head.fields[2], head);
    long long maxbag = detail::pace_int(head.fields[3], head);
    long long declared_n = detail::pace_int(head.fields[4], head);
    if (declared_n != n)
        throw ParseError("decomposition is over " + std::to_string(declared_n) +
                             " vertices, graph has " + std::to_string(n),
                         head.number);
    if (bags < 1 || bags > 1'000'000) throw ParseError("bag count out of range", head.number);

    ClassicalDecomposition d;
    d.bag.assign(static_cast<std::size_t>(bags), {});
    std::vector<bool> seen(static_cast<std::size_t>(bags), false);
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(bags));
    long long tree_edges = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.fields[0] == "b") {
            if (line.fields.size() < 2) throw ParseError("bag line without an id", line.number);
            long long id = detail::pace_int(line.fields[1], line);
            if (id < 1 || id > bags)
                throw ParseError("bag id outside 1.." + std::to_string(bags), line.number);
            if (seen[id - 1])
                throw ParseError("bag " + std::to_string(id) + " declared twice", line.number);
            seen[id - 1] = true;
            for (std::size_t f = 2; f < line.fields.size(); ++f) {
                long long v = detail::pace_int(line.fields[f], line);
                if (v < 1 || v > n)
                    throw ParseError("vertex outside 1.." + std::to_string(n), line.number);
                d.bag[id - 1].push_back(static_cast<ElementId>(v - 1));
            }
            std::sort(d.bag[id - 1].begin(), d.bag[id - 1].end());
            if (std::adjacent_find(d.bag[id - 1].begin(), d.bag[id - 1].end()) !=
                d.bag[id - 1].end())
                throw ParseError("bag lists a vertex twice", line.number);
            if (static_cast<long long>(d.bag[id - 1].size()) > maxbag)
                throw ParseError("bag larger than the announced maximum", line.number);
        } else {
            if (line.fields.size() != 2)
                throw ParseError("expected a tree edge line \"t1 t2\"", line.number);
            long long a = detail::pace_int(line.fields[0], line);
            long long b = detail::pace_int(line.fields[1], line);
            if (a < 1 || a > bags || b < 1 || b > bags)
                throw ParseError("bag id outside 1.." + std::to_string(bags), line.number);
            if (a == b) throw ParseError("tree edge joins a bag to itself", line.number);
            adj[a - 1].push_back(static_cast<NodeId>(b - 1));
            adj[b - 1].push_back(static_cast<NodeId>(a - 1));
            ++tree_edges;
        }
    }
    for (long long t = 0; t < bags; ++t)
        if (!seen[t]) throw ParseError("bag " + std::to_string(t + 1) + " never declared");
    if (tree_edges != bags - 1)
        throw ParseError("a tree over " + std::to_string(bags) + " bags needs " +
                         std::to_string(bags - 1) + " edges, file has " +
                         std::to_string(tree_edges));

    d.parent.assign(static_cast<std::size_t>(bags), kNoParent);
    std::vector<bool> reached(static_cast<std::size_t>(bags), false);
    std::deque<NodeId> queue{0};
    reached[0] = true;
    long long count = 1;
    while (!queue.empty()) {
        NodeId t = queue.front();
        queue.pop_front();
        for (NodeId u : adj[t])
            if (!reached[u]) {
                reached[u] = true;
                d.parent[u] = t;
                ++count;
                queue.push_back(u);
            }
    }
    if (count != bags) throw ParseError("bag tree is disconnected");
    return d;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string annotation_tooltip(const Annotation& a) {
    std::ostringstream out;
    out << "role=" << role_name(a.role);
    if (!a.word.empty()) out << " word=" << a.word;
    if (a.block >= 0) out << " block=" << a.block;
    if (a.role == Role::run_member)
        out << " side=" << (a.side == RunSide::top ? "top" : "bottom");
    if (a.run_value >= 0) out << " run_value=" << a.run_value;
    if (a.pair_index >= 0) out << " pair_index=" << a.pair_index;
    if (a.position >= 0) out << " position=" << a.position;
    if (!a.htree.empty()) out << " htree=" << a.htree;
    return out.str();
}

}  // namespace detail

// Colors render as fills (white / black / gray for uncolored), annotations
// as tooltips. Nodes and edges are emitted in ascending order so equal
// structures yield byte-equal documents.
inline std::string to_dot(const Structure& s) {
    bool undirected = s.symmetric_edges();
    std::ostringstream out;
    out << (undirected ? "graph" : "digraph") << " g {\n";
    out << "  node [style=filled, fillcolor=gray85];\n";
    for (ElementId x = 0; x < s.size(); ++x) {
        out << "  n" << x;
        std::vector<std::string> attrs;
        if (s.color(x) == Color::p0) attrs.push_back("fillcolor=white");
        if (s.color(x) == Color::p1) attrs.push_back("fillcolor=black, fontcolor=white");
        if (s.annotation(x))
            attrs.push_back("tooltip=\"" +
                            detail::dot_escape(detail::annotation_tooltip(*s.annotation(x))) +
                            "\"");
        if (!attrs.empty()) {
            out << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i)
                out << (i ? ", " : "") << attrs[i];
            out << "]";
        }
        out << ";\n";
    }
    const char* link = undirected ? " -- " : " -> ";
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        const auto& symbol = s.vocabulary().relation(rel);
        if (symbol.arity == 1 && (symbol.name == "P0" || symbol.name == "P1"))
            continue;  // shown as fills
        for (const auto& t : s.tuples(rel)) {
            if (symbol.arity == 2) {
                out << "  n" << t[0] << link << "n" << t[1];
                if (symbol.name != "E")
                    out << " [label=\"" << detail::dot_escape(symbol.name) << "\"]";
                out << ";\n";
            } else {
                // Non-binary facts have no native DOT shape; keep them as
                // comments so the document stays lossless to a reader.
                out << "  // " << symbol.name << "(";
                for (std::size_t i = 0; i < t.size(); ++i) out << (i ? "," : "") << t[i];
                out << ")\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace tdspan
