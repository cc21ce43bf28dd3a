#include <catch2/catch_amalgamated.hpp>

#include "tdspan/classical.hpp"
#include "tdspan/decomposition.hpp"
#include "tdspan/isomorphism.hpp"

using namespace tdspan;

namespace {

Structure single_element(Color c = Color::p0) {
    StructureBuilder b(Vocabulary::colored_graphs());
    b.add_element(c);
    return b.build();
}

Structure edge_pair(Color c0 = Color::none, Color c1 = Color::none) {
    StructureBuilder b(Vocabulary::colored_graphs());
    b.add_element(c0);
    b.add_element(c1);
    b.add_edge(0, 1);
    return b.build();
}

Structure make_path(int n) {
    StructureBuilder b(Vocabulary::colored_graphs());
    for (int i = 0; i < n; ++i) b.add_element();
    for (int i = 0; i + 1 < n; ++i) b.add_edge(i, i + 1);
    return b.build();
}

bool mentions(const std::vector<std::string>& violations, const std::string& needle) {
    for (const auto& v : violations)
        if (v.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("a single marked-free bag is a valid decomposition") {
    TreeDecomposition td;
    td.k = 1;
    td.bags.push_back(KBag::make(1, single_element()));
    td.parent.push_back(kNoParent);
    CHECK(validate_td(td).empty());
    CHECK(width(td) == 0);
    CHECK(span(td) == 0);
    CHECK(is_path_decomposition(td));
}

TEST_CASE("validation pinpoints each broken condition") {
    auto base = [] {
        TreeDecomposition td;
        td.k = 1;
        td.bags.push_back(KBag::make(1, single_element()));
        td.parent.push_back(kNoParent);
        return td;
    };

    SECTION("root must not carry in-marks") {
        TreeDecomposition td = base();
        td.bags[0].in_mark[0] = 0;
        CHECK(mentions(validate_td(td), "root carries an in-mark"));
    }
    SECTION("an out-mark needs a child that takes it up") {
        TreeDecomposition td = base();
        td.bags[0].out_mark[0] = 0;
        CHECK(mentions(validate_td(td), "not taken up by any child"));
    }
    SECTION("a child in-mark needs the matching parent out-mark") {
        TreeDecomposition td = base();
        td.bags.push_back(KBag::make(1, single_element()));
        td.parent.push_back(0);
        td.bags[1].in_mark[1] = 0;
        CHECK(mentions(validate_td(td), "without a matching out-mark"));
    }
    SECTION("bags must be non-empty and within budget") {
        TreeDecomposition td = base();
        td.bags[0] = KBag::make(1, Structure(StructureBuilder(Vocabulary::colored_graphs())
                                                 .build()));
        CHECK(mentions(validate_td(td), "empty"));
        td = base();
        StructureBuilder sb(Vocabulary::colored_graphs());
        for (int i = 0; i < 3; ++i) sb.add_element();
        td.bags[0] = KBag::make(1, sb.build());
        CHECK(mentions(validate_td(td), "more than k+1"));
    }
    SECTION("one family cannot mark one element twice") {
        TreeDecomposition td = base();
        td.bags.push_back(KBag::make(1, single_element()));
        td.parent.push_back(0);
        td.bags[0].out_mark[0] = 0;
        td.bags[0].out_mark[1] = 0;
        td.bags[1].in_mark[0] = 0;
        td.bags[1].in_mark[1] = 0;
        CHECK(mentions(validate_td(td), "same element"));
    }
    SECTION("two roots or a parent cycle are rejected") {
        TreeDecomposition td = base();
        td.bags.push_back(KBag::make(1, single_element()));
        td.parent.push_back(kNoParent);
        CHECK(mentions(validate_td(td), "exactly one root"));
        td.parent[1] = 1;
        CHECK_FALSE(validate_td(td).empty());
    }
}

TEST_CASE("gluing one shared element produces the expected path") {
    // Parent bag {x, y} with edge, x out-marked at 0; child bag {x', z} with
    // edge, x' in-marked at 0. The quotient is the path y - x - z.
    TreeDecomposition td;
    td.k = 1;
    td.bags.push_back(KBag::make(1, edge_pair()));
    td.bags.push_back(KBag::make(1, edge_pair()));
    td.parent = {kNoParent, 0};
    td.bags[0].out_mark[0] = 0;
    td.bags[1].in_mark[0] = 0;
    REQUIRE(validate_td(td).empty());

    ExtResult r = ext(td);
    CHECK(r.structure.size() == 3);
    CHECK(r.structure.tuples(r.structure.edge_relation()).size() == 2);
    ElementId merged = r.quotient.class_of(0, 0);
    CHECK(merged == r.quotient.class_of(1, 0));
    CHECK(r.structure.degree(merged) == 2);
    CHECK(r.quotient.occurrences(merged) == std::vector<NodeId>{0, 1});
    CHECK(are_isomorphic(r.structure, make_path(3)).has_value());
    CHECK(span(td) == 1);
}

TEST_CASE("merging differently colored copies is a hard error") {
    TreeDecomposition td;
    td.k = 0;
    td.bags.push_back(KBag::make(0, single_element(Color::p0)));
    td.bags.push_back(KBag::make(0, single_element(Color::p1)));
    td.parent = {kNoParent, 0};
    td.bags[0].out_mark[0] = 0;
    td.bags[1].in_mark[0] = 0;
    REQUIRE(validate_td(td).empty());
    CHECK_THROWS_AS(ext(td), MergeConflictError);
}

TEST_CASE("ext refuses invalid input") {
    TreeDecomposition td;
    td.k = 0;
    td.bags.push_back(KBag::make(0, single_element()));
    td.parent.push_back(kNoParent);
    td.bags[0].in_mark[0] = 0;
    CHECK_THROWS_AS(ext(td), std::invalid_argument);
}

TEST_CASE("an element chained through three bags spans two tree edges") {
    // Bags {a, b}, {b}, {b, c} in a chain; b is passed down twice.
    Structure s = make_path(3);  // a=0, b=1, c=2 with edges 0-1, 1-2
    ClassicalDecomposition d;
    d.parent = {kNoParent, 0, 1};
    d.bag = {{0, 1}, {1}, {1, 2}};
    REQUIRE(check_classical(s, d).empty());
    TreeDecomposition td = encode_classical(s, d, 1);
    REQUIRE(validate_td(td).empty());

    ExtResult r = ext(td);
    ElementId b_cls = r.quotient.class_of(1, 0);
    OccurrenceReport rep = element_occurrences(td, r.quotient, b_cls);
    CHECK(rep.nodes == std::vector<NodeId>{0, 1, 2});
    CHECK(rep.diameter == 2);
    CHECK(span(td) == 2);
    CHECK(width(td) == 1);
    CHECK(are_isomorphic(r.structure, s).has_value());
    CHECK_THROWS_AS(element_occurrences(td, r.quotient, 99), std::invalid_argument);
}

TEST_CASE("classical encoding wires marks the way the chaining rule says") {
    Structure s = make_path(3);
    ClassicalDecomposition d;
    d.parent = {kNoParent, 0};
    d.bag = {{0, 1}, {1, 2}};
    TreeDecomposition td = encode_classical(s, d, 1);
    REQUIRE(validate_td(td).empty());
    // Node 0 shares only element 1 with its child: out index 0.
    CHECK(td.bags[0].out_mark[0] != kNoMark);
    CHECK(td.bags[0].out_mark[1] == kNoMark);
    CHECK(td.bags[1].in_mark[0] != kNoMark);
    // The marked copies both denote structure element 1, which is colored
    // nowhere but sits on both edges.
    ExtResult r = ext(td);
    CHECK(r.quotient.class_of(0, td.bags[0].out_mark[0]) ==
          r.quotient.class_of(1, td.bags[1].in_mark[0]));
    CHECK(span(td) == 1);
    CHECK(are_isomorphic(r.structure, s).has_value());
}

TEST_CASE("classical checking rejects each broken condition") {
    Structure s = edge_pair();
    SECTION("uncovered tuple") {
        ClassicalDecomposition d;
        d.parent = {kNoParent, 0};
        d.bag = {{0}, {1}};
        CHECK(mentions(check_classical(s, d), "no single bag"));
        CHECK_THROWS_AS(encode_classical(s, d, 1), std::invalid_argument);
    }
    SECTION("uncovered element") {
        ClassicalDecomposition d;
        d.parent = {kNoParent};
        d.bag = {{0}};
        CHECK(mentions(check_classical(s, d), "not covered"));
    }
    SECTION("disconnected occurrence set") {
        Structure p3 = make_path(3);
        ClassicalDecomposition d;
        d.parent = {kNoParent, 0, 1};
        d.bag = {{0, 1}, {1, 2}, {0, 2}};
        CHECK(mentions(check_classical(p3, d), "disconnected"));
    }
    SECTION("width budget") {
        Structure p3 = make_path(3);
        ClassicalDecomposition d;
        d.parent = {kNoParent};
        d.bag = {{0, 1, 2}};
        REQUIRE(check_classical(p3, d).empty());
        CHECK_THROWS_AS(encode_classical(p3, d, 1), std::invalid_argument);
        CHECK(width(encode_classical(p3, d, 2)) == 2);
    }
    SECTION("bags given out of order still count as covering") {
        Structure p3 = make_path(3);
        ClassicalDecomposition d;
        d.parent = {kNoParent};
        d.bag = {{2, 0, 1}};
        CHECK(check_classical(p3, d).empty());
    }
}

TEST_CASE("trivial whole-structure bag round-trips exactly") {
    StructureBuilder sb(Vocabulary::colored_graphs());
    sb.add_element(Color::p0);
    sb.add_element(Color::p1);
    sb.add_element();
    sb.add_edge(0, 1);
    sb.add_edge(1, 2);
    sb.add_edge(2, 0);
    Structure s = sb.build();
    ClassicalDecomposition d;
    d.parent = {kNoParent};
    d.bag = {{0, 1, 2}};
    TreeDecomposition td = encode_classical(s, d, 2);
    REQUIRE(validate_td(td).empty());
    ExtResult r = ext(td);
    CHECK(span(td) == 0);
    CHECK(are_isomorphic(r.structure, s).has_value());
}

TEST_CASE("round trip holds on a branching decomposition of a cycle") {
    StructureBuilder sb(Vocabulary::colored_graphs());
    for (int i = 0; i < 4; ++i) sb.add_element(i == 0 ? Color::p1 : Color::none);
    for (int i = 0; i < 4; ++i) sb.add_edge(i, (i + 1) % 4);
    Structure c4 = sb.build();
    ClassicalDecomposition d;
    d.parent = {kNoParent, 0};
    d.bag = {{0, 1, 3}, {1, 2, 3}};
    REQUIRE(check_classical(c4, d).empty());
    TreeDecomposition td = encode_classical(c4, d, 2);
    REQUIRE(validate_td(td).empty());
    CHECK(are_isomorphic(ext(td).structure, c4).has_value());

    // Occurrence sets of every quotient class stay connected.
    ExtResult r = ext(td);
    for (int cls = 0; cls < r.quotient.class_count(); ++cls) {
        OccurrenceReport rep = element_occurrences(td, r.quotient, cls);
        CHECK(rep.diameter <= span(td));
        CHECK(static_cast<int>(rep.nodes.size()) <= td.node_count());
    }
}

TEST_CASE("subtree restriction never increases width or span") {
    Structure s = make_path(5);
    ClassicalDecomposition d;
    d.parent = {kNoParent, 0, 1, 2};
    d.bag = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    TreeDecomposition td = encode_classical(s, d, 1);
    REQUIRE(validate_td(td).empty());
    int w = width(td), sp = span(td);
    for (NodeId t = 0; t < td.node_count(); ++t) {
        TreeDecomposition sub = subtree_decomposition(td, t);
        REQUIRE(validate_td(sub).empty());
        CHECK(width(sub) <= w);
        CHECK(span(sub) <= sp);
    }
}

TEST_CASE("bag keys identify bags exactly up to relabeling") {
    // Same bag written with the two possible element orders.
    KBag a = KBag::make(1, edge_pair(Color::p0, Color::none));
    a.out_mark[0] = 0;
    KBag b = KBag::make(1, edge_pair(Color::none, Color::p0));
    b.out_mark[0] = 1;
    CHECK(bag_class_key(a) == bag_class_key(b));

    SECTION("moving the mark to the other endpoint changes the class") {
        KBag c = KBag::make(1, edge_pair(Color::none, Color::p0));
        c.out_mark[0] = 0;
        CHECK(bag_class_key(a) != bag_class_key(c));
    }
    SECTION("mark family matters") {
        KBag c = b;
        c.out_mark[0] = kNoMark;
        c.in_mark[0] = 1;
        CHECK(bag_class_key(a) != bag_class_key(c));
    }
    SECTION("mark index matters") {
        KBag c = b;
        c.out_mark[0] = kNoMark;
        c.out_mark[1] = 1;
        CHECK(bag_class_key(a) != bag_class_key(c));
    }
}

TEST_CASE("relabeling elements inside one bag leaves ext unchanged up to iso") {
    Structure s = make_path(4);
    ClassicalDecomposition d;
    d.parent = {kNoParent, 0, 1};
    d.bag = {{0, 1}, {1, 2}, {2, 3}};
    TreeDecomposition td = encode_classical(s, d, 1);

    // Rewrite bag 1 with its two elements swapped.
    TreeDecomposition td2 = td;
    StructureBuilder sb(Vocabulary::colored_graphs());
    sb.add_element();
    sb.add_element();
    sb.add_edge(0, 1);
    td2.bags[1].structure = sb.build();
    auto swap_mark = [](ElementId e) { return e == kNoMark ? kNoMark : 1 - e; };
    for (int i = 0; i <= td2.k; ++i) {
        td2.bags[1].in_mark[i] = swap_mark(td.bags[1].in_mark[i]);
        td2.bags[1].out_mark[i] = swap_mark(td.bags[1].out_mark[i]);
    }
    REQUIRE(validate_td(td2).empty());
    CHECK(bag_class_key(td.bags[1]) == bag_class_key(td2.bags[1]));
    CHECK(are_isomorphic(ext(td).structure, ext(td2).structure).has_value());
}
