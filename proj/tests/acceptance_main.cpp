// Acceptance gate: one line per criterion, PASS or FAIL, with the measured
// runtime. Exits nonzero when any criterion fails. Tolerances and run sizes
// are pinned as constants next to each criterion.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tdspan/tdspan.hpp"

using namespace tdspan;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

bool report(int criterion, const char* title, bool pass, double seconds,
            const std::string& detail) {
    std::printf("%s  criterion %d: %-34s (%6.2fs)%s%s\n", pass ? "PASS" : "FAIL", criterion,
                title, seconds, detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    return pass;
}

// ---------------------------------------------------------------------------
// 1. Encoding round trip on the micro pathwidth pair: width exactly 2,
//    span <= 2, reconstruction isomorphic. Budget: 5 seconds.
// ---------------------------------------------------------------------------
bool criterion1() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 5.0;
    PwInstance micro;  // beta = 1, p = 1, n = 3, l = 1 are the defaults
    micro.m = 2;
    bool ok = true;
    std::string detail;
    for (auto [name, s] : {std::pair{"G", build_pw_G(micro)}, std::pair{"H", build_pw_H(micro)}}) {
        TreeDecomposition td = canonical_pd_pw(s);
        ExtResult er = ext(td);
        bool here = validate_td(td).empty() && is_path_decomposition(td) && width(td) == 2 &&
                    span(td, er.quotient) <= 2 && are_isomorphic(er.structure, s).has_value();
        if (!here) detail += std::string(name) + " round trip failed; ";
        ok = ok && here;
    }
    double t = clock.seconds();
    if (t >= kBudgetSeconds) {
        ok = false;
        detail += "over the 5s budget";
    }
    return report(1, "pathwidth encoding round trip", ok, t, detail);
}

// ---------------------------------------------------------------------------
// 2. Distance-transfer suite: every decomposition enumerated over 200 seeded
//    random colored graphs (sizes 1..7, edge probability 1/2, colors uniform)
//    at (k, delta) in {1,2}^2 passes check_lemma1. Budget: 10 minutes.
//    Enumeration is capped per run; the check covers everything produced.
// ---------------------------------------------------------------------------
bool criterion2() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 600.0;
    constexpr int kGraphs = 200;
    constexpr long long kSearchBudget = 20'000;  // explored placements per run
    std::mt19937 rng(987654321);
    long long decompositions = 0, violations = 0;
    for (int g = 0; g < kGraphs; ++g) {
        int n = 1 + static_cast<int>(rng() % 7);
        StructureBuilder b(Vocabulary::colored_graphs());
        for (int i = 0; i < n; ++i) b.add_element(static_cast<Color>(rng() % 3));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 2) b.add_edge(i, j);
        Structure s = b.build();
        for (int k = 1; k <= 2; ++k)
            for (int delta = 1; delta <= 2; ++delta) {
                SearchConfig cfg;
                cfg.k = k;
                cfg.delta = delta;
                cfg.budget_nodes = kSearchBudget;
                EnumerationResult r = enumerate_decompositions(s, cfg);
                decompositions += static_cast<long long>(r.items.size());
                for (const auto& item : r.items)
                    if (check_lemma1(item.td, delta)) ++violations;
            }
    }
    double t = clock.seconds();
    std::ostringstream detail;
    detail << decompositions << " decompositions, " << violations << " violations";
    bool ok = violations == 0 && decompositions > 0 && t < kBudgetSeconds;
    return report(2, "distance transfer on random graphs", ok, t, detail.str());
}

// ---------------------------------------------------------------------------
// 3. Game engine against the classical linear-order threshold (sizes <= 9,
//    ranks <= 3: equivalent iff equal or both >= 2^r - 1) and against an
//    independent type-enumeration oracle (sizes <= 5, ranks <= 2).
//    Budget: 5 minutes.
// ---------------------------------------------------------------------------
Structure make_order(int n) {
    StructureBuilder b(Vocabulary({{"LT", 2}}));
    for (int i = 0; i < n; ++i) b.add_element();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) b.add_tuple("LT", {i, j});
    return b.build();
}

// Back-and-forth types, written independently of the game engine: the rank-0
// type of a tuple is its atomic diagram, the rank-(r+1) type adds the set of
// rank-r types of all one-element extensions.
std::string atomic_diagram(const Structure& s, const std::vector<ElementId>& tup) {
    std::ostringstream o;
    for (std::size_t i = 0; i < tup.size(); ++i)
        for (std::size_t j = i + 1; j < tup.size(); ++j) o << (tup[i] == tup[j] ? '=' : '!');
    for (ElementId x : tup) o << static_cast<int>(s.color(x));
    for (int rel = 0; rel < s.vocabulary().relation_count(); ++rel) {
        int arity = s.vocabulary().relation(rel).arity;
        if (arity == 1) {
            for (ElementId x : tup) o << (s.has_tuple(rel, {x}) ? '1' : '0');
            continue;
        }
        std::vector<std::size_t> pos(arity, 0);
        while (true) {
            std::vector<int> probe(arity);
            bool in_range = !tup.empty();
            for (int i = 0; i < arity && in_range; ++i) probe[i] = tup[pos[i]];
            o << (in_range && s.has_tuple(rel, probe) ? '1' : '0');
            int c = arity - 1;
            while (c >= 0 && (tup.empty() || ++pos[c] == tup.size())) {
                pos[c] = 0;
                --c;
            }
            if (c < 0) break;
        }
    }
    return o.str();
}

std::string type_of(const Structure& s, std::vector<ElementId>& tup, int rank) {
    if (rank == 0) return "A[" + atomic_diagram(s, tup) + "]";
    std::set<std::string> extensions;
    for (ElementId x = 0; x < s.size(); ++x) {
        tup.push_back(x);
        extensions.insert(type_of(s, tup, rank - 1));
        tup.pop_back();
    }
    std::string out = "T[" + atomic_diagram(s, tup) + "|";
    for (const auto& e : extensions) out += e + ";";
    return out + "]";
}

bool oracle_equivalent(const Structure& a, const Structure& b, int rank) {
    std::vector<ElementId> empty;
    return type_of(a, empty, rank) == type_of(b, empty, rank);
}

bool criterion3() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 300.0;
    int mismatches = 0;
    for (int m = 0; m <= 9; ++m)
        for (int n = 0; n <= 9; ++n)
            for (int r = 0; r <= 3; ++r) {
                bool expected = m == n || (m >= (1 << r) - 1 && n >= (1 << r) - 1);
                EfOutcome o = ef_equivalent(make_order(m), make_order(n), r);
                if (o == EfOutcome::budget_exceeded ||
                    (o == EfOutcome::equivalent) != expected)
                    ++mismatches;
            }
    int oracle_mismatches = 0;
    for (int m = 0; m <= 5; ++m)
        for (int n = 0; n <= 5; ++n)
            for (int r = 0; r <= 2; ++r) {
                EfOutcome o = ef_equivalent(make_order(m), make_order(n), r);
                if (o == EfOutcome::budget_exceeded ||
                    (o == EfOutcome::equivalent) != oracle_equivalent(make_order(m),
                                                                      make_order(n), r))
                    ++oracle_mismatches;
            }
    double t = clock.seconds();
    std::ostringstream detail;
    detail << mismatches << " threshold mismatches, " << oracle_mismatches
           << " oracle mismatches";
    bool ok = mismatches == 0 && oracle_mismatches == 0 && t < kBudgetSeconds;
    return report(3, "game engine vs order threshold", ok, t, detail.str());
}

// ---------------------------------------------------------------------------
// 4. Block similarity at the micro pathwidth parameters (beta = 1): two
//    chained copies of the (0,1)-colored chain are rank-1 equivalent to the
//    union of the (0,0) and (1,1) chains, and the full G/H pair is rank-1
//    equivalent. Rank-2 runs under a node budget; running out is recorded
//    as inconclusive, never as failure.
// ---------------------------------------------------------------------------
bool criterion4() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 600.0;
    constexpr std::uint64_t kRank2Nodes = 40'000'000;  // per game, deterministic
    const long long beta = 1, p = 1, n = 3, m = 2;
    Structure two_copies = disjoint_union(make_bicolit(beta, p, n, 0, 1, m),
                                          make_bicolit(beta, p, n, 0, 1, m));
    Structure split = disjoint_union(make_bicolit(beta, p, n, 0, 0, m),
                                     make_bicolit(beta, p, n, 1, 1, m));
    PwInstance micro;
    micro.m = 2;
    Structure g = build_pw_G(micro), h = build_pw_H(micro);

    bool ok = true;
    std::string detail;
    if (ef_equivalent(two_copies, split, 1) != EfOutcome::equivalent) {
        ok = false;
        detail += "copies vs split not rank-1 equivalent; ";
    }
    if (ef_equivalent(g, h, 1) != EfOutcome::equivalent) {
        ok = false;
        detail += "G vs H not rank-1 equivalent; ";
    }
    EfBudget rank2;
    rank2.max_nodes = kRank2Nodes;
    for (auto [name, a, b] : {std::tuple{"copies/split", &two_copies, &split},
                              std::tuple{"G/H", &g, &h}}) {
        EfOutcome o = ef_equivalent(*a, *b, 2, rank2);
        if (o == EfOutcome::budget_exceeded)
            detail += std::string(name) + " rank-2 inconclusive (budget); ";
        else
            detail += std::string(name) + " rank-2 " +
                      (o == EfOutcome::equivalent ? "equivalent; " : "distinguishable; ");
    }
    double t = clock.seconds();
    if (t >= kBudgetSeconds) {
        ok = false;
        detail += "over the 10min budget";
    }
    return report(4, "block similarity at micro scale", ok, t, detail);
}

// ---------------------------------------------------------------------------
// 5. Bounds grid: both planners succeed on (k, delta, beta) in
//    [1,4] x [1,4] x [0,6], every inequality re-verifies, and decrementing
//    each minimal pathwidth parameter (p, m, l, n) breaks its inequality.
//    Budget: 1 second, pure integer arithmetic.
// ---------------------------------------------------------------------------
bool criterion5() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 1.0;
    int failures = 0, unbroken_probes = 0;
    for (long long k = 1; k <= 4; ++k)
        for (long long delta = 1; delta <= 4; ++delta)
            for (long long beta = 0; beta <= 6; ++beta) {
                PwPlan pw = plan_pw(k, delta, beta);
                if (!plan_ok(verify_plan(pw))) ++failures;
                TwPlan tw = plan_tw(k, delta, beta);
                if (!plan_ok(verify_plan(tw))) ++failures;

                PwPlan probe = pw;
                probe.p -= 1;
                if (plan_ok(verify_plan(probe))) ++unbroken_probes;
                probe = pw;
                probe.m -= 1;
                if (plan_ok(verify_plan(probe))) ++unbroken_probes;
                probe = pw;
                probe.l -= 1;
                if (plan_ok(verify_plan(probe))) ++unbroken_probes;
                probe = pw;
                probe.n -= 2;  // keeps the required parity
                if (plan_ok(verify_plan(probe))) ++unbroken_probes;
            }
    double t = clock.seconds();
    std::ostringstream detail;
    detail << failures << " grid failures, " << unbroken_probes << " unbroken probes";
    bool ok = failures == 0 && unbroken_probes == 0 && t < kBudgetSeconds;
    return report(5, "planner grid and minimality", ok, t, detail.str());
}

// ---------------------------------------------------------------------------
// 6. Treewidth generators at plan_tw(1,1,1) with the micro override n = 4:
//    exactly 2^{n+1} - 1 = 31 word-labeled sources, maximum degree exactly 5,
//    both decomposition variants validate and reconstruct, series-parallel
//    width exactly 2. Budget: 30 seconds.
// ---------------------------------------------------------------------------
bool criterion6() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 30.0;
    TwPlan plan = plan_tw(1, 1, 1);
    TwInstance inst;
    inst.k = plan.k;
    inst.p = plan.p;
    inst.l = static_cast<long long>(plan.l);
    inst.n = 4;  // micro override
    bool ok = true;
    std::string detail;
    for (auto [name, s] : {std::pair{"G", build_tw_G(inst)}, std::pair{"H", build_tw_H(inst)}}) {
        int sources = 0, max_degree = 0;
        for (ElementId x = 0; x < s.size(); ++x) {
            const auto& a = s.annotation(x);
            if (a && a->role == Role::source_word) ++sources;
            max_degree = std::max(max_degree, s.degree(x));
        }
        if (sources != 31) {
            ok = false;
            detail += std::string(name) + " has " + std::to_string(sources) + " sources; ";
        }
        if (max_degree != 5) {
            ok = false;
            detail += std::string(name) + " max degree " + std::to_string(max_degree) + "; ";
        }
        TreeDecomposition sp = canonical_td_tw(s, TwVariant::series_parallel);
        TreeDecomposition sweep = canonical_td_tw(s, TwVariant::sweep);
        bool variants = validate_td(sp).empty() && validate_td(sweep).empty() &&
                        width(sp) == 2 &&
                        are_isomorphic(ext(sp).structure, s).has_value() &&
                        are_isomorphic(ext(sweep).structure, s).has_value();
        if (!variants) {
            ok = false;
            detail += std::string(name) + " variant round trip failed; ";
        }
    }
    double t = clock.seconds();
    if (t >= kBudgetSeconds) {
        ok = false;
        detail += "over the 30s budget";
    }
    return report(6, "treewidth generator claims", ok, t, detail);
}

// ---------------------------------------------------------------------------
// 7. Proof mechanics on 50 synthetic subtrees (marks concentrated on one
//    tree edge, so every census has a defined large component): the walk
//    finds a t1,t2,t1 backtrack within 2 * |subtree| steps, trimming keeps
//    degrees <= 2k+3 without losing coverage, and every census is partition
//    consistent with at most one large component. Budget: 1 minute.
// ---------------------------------------------------------------------------
bool criterion7() {
    Stopwatch clock;
    constexpr double kBudgetSeconds = 60.0;
    constexpr int kInstances = 50;
    constexpr int kK = 4, kNBound = 1;
    std::mt19937 rng(20240817);
    int walk_failures = 0, trim_failures = 0, census_failures = 0;
    for (int iter = 0; iter < kInstances; ++iter) {
        int m = 2 + static_cast<int>(rng() % 7);
        std::vector<NodeId> parent(m, kNoParent);
        for (int i = 1; i < m; ++i) {
            int lo = (i == 1) ? 0 : parent[i - 1];
            parent[i] = lo + static_cast<int>(rng() % (i - lo));
        }
        int pair_child = 1 + static_cast<int>(rng() % (m - 1));
        int pair_parent = parent[pair_child];
        int m1 = 3 + static_cast<int>(rng() % 2);
        int m2 = 3 + static_cast<int>(rng() % 2);

        StructureBuilder b(Vocabulary::colored_graphs());
        ClassicalDecomposition d;
        d.parent = parent;
        d.bag.resize(m);
        std::vector<ElementId> marked;
        for (int t = 0; t < m; ++t) {
            d.bag[t].push_back(b.add_element());
            int extra = t == pair_parent ? m1 : t == pair_child ? m2 : 0;
            for (int j = 0; j < extra; ++j) {
                ElementId e = b.add_element();
                d.bag[t].push_back(e);
                marked.push_back(e);
            }
        }
        Structure s = b.build();
        TreeDecomposition td = encode_classical(s, d, kK);
        ExtResult er = ext(td);
        std::vector<NodeId> all(m);
        for (int t = 0; t < m; ++t) all[t] = t;

        // max_steps = 2m bounds the walk, so a found backtrack is within budget
        WalkResult w = algorithm1_walk(all, td, er.quotient, marked, kNBound, kK, 2 * m);
        if (!w.backtrack_found) ++walk_failures;

        TrimResult trim = trim_to_bounded_degree(all, td, er.quotient, marked, kK);
        std::vector<std::vector<NodeId>> adj(m);
        for (NodeId t = 0; t < m; ++t)
            if (td.parent[t] != kNoParent) {
                adj[t].push_back(td.parent[t]);
                adj[td.parent[t]].push_back(t);
            }
        for (NodeId t : trim.nodes) {
            int degree = 0;
            for (NodeId u : adj[t])
                if (std::find(trim.nodes.begin(), trim.nodes.end(), u) != trim.nodes.end())
                    ++degree;
            if (degree > 2 * kK + 3) ++trim_failures;
        }
        for (ElementId x : marked) {
            bool covered = false;
            for (NodeId t : er.quotient.occurrences(x))
                if (std::find(trim.nodes.begin(), trim.nodes.end(), t) != trim.nodes.end())
                    covered = true;
            if (!covered) ++trim_failures;
        }

        long long total_marks = static_cast<long long>(marked.size());
        for (NodeId t : all) {
            InodeCensus census = inode_census(all, td, t, er.quotient, marked);
            long long tally = static_cast<long long>(census.in_bag.size());
            for (int e : census.exclusive) tally += e;
            if (tally != total_marks) ++census_failures;
            try {
                large_component(census, kNBound, total_marks, kK);
            } catch (const std::invalid_argument&) {
                ++census_failures;  // two components above the threshold
            }
        }
    }
    double t = clock.seconds();
    std::ostringstream detail;
    detail << walk_failures << " walk, " << trim_failures << " trim, " << census_failures
           << " census failures";
    bool ok = walk_failures == 0 && trim_failures == 0 && census_failures == 0 &&
              t < kBudgetSeconds;
    return report(7, "proof mechanics on synthetic trees", ok, t, detail.str());
}

// ---------------------------------------------------------------------------
// 8. Falsifier smoke: a 6-node pair (plain path vs endpoint-colored path),
//    path-restricted search at k = 1, delta = 1, alpha = 1 under the default
//    caps (tree size 8, 5M placements). The run must terminate exhaustively
//    and the report must be byte-identical across two runs and across worker
//    counts 1 and 4.
// ---------------------------------------------------------------------------
bool criterion8() {
    Stopwatch clock;
    StructureBuilder gb(Vocabulary::colored_graphs());
    for (int i = 0; i < 6; ++i) gb.add_element();
    for (int i = 0; i + 1 < 6; ++i) gb.add_edge(i, i + 1);
    Structure g = gb.build();
    StructureBuilder hb(Vocabulary::colored_graphs());
    hb.add_element(Color::p0);
    for (int i = 1; i < 6; ++i) hb.add_element();
    for (int i = 0; i + 1 < 6; ++i) hb.add_edge(i, i + 1);
    Structure h = hb.build();

    SearchConfig cfg;  // caps stay at their defaults
    cfg.k = 1;
    cfg.delta = 1;
    cfg.path_only = true;
    RefuteReport first = micro_refute(g, h, cfg, 1, 1);
    RefuteReport second = micro_refute(g, h, cfg, 1, 1);
    RefuteReport wide = micro_refute(g, h, cfg, 1, 4);

    bool ok = first.complete && first.budget_pairs == 0 && first.pair_count > 0 &&
              first.jsonl == second.jsonl && first.jsonl == wide.jsonl;
    std::ostringstream detail;
    detail << first.g_count << "x" << first.h_count << " decompositions, "
           << first.similar_count << " similar, "
           << (first.complete ? "exhaustive" : "truncated") << ", "
           << (first.jsonl == wide.jsonl ? "byte-identical" : "reports differ");
    return report(8, "falsifier determinism smoke", ok, clock.seconds(), detail.str());
}

}  // namespace

int main() {
    bool all = true;
    all &= criterion1();
    all &= criterion2();
    all &= criterion3();
    all &= criterion4();
    all &= criterion5();
    all &= criterion6();
    all &= criterion7();
    all &= criterion8();
    std::printf("%s\n", all ? "ALL CRITERIA PASS" : "CRITERIA FAILED");
    return all ? 0 : 1;
}
