#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdspan/tdspan.hpp"

namespace {

using tdspan::Json;

std::string read_text(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

tdspan::Structure load_structure(const std::string& path) {
    return tdspan::structure_from_json(tdspan::parse_json_text(read_text(path)));
}

tdspan::TreeDecomposition load_decomposition(const std::string& path) {
    return tdspan::decomposition_from_json(tdspan::parse_json_text(read_text(path)));
}

// Budget defaults come from the environment; explicit flags win.
tdspan::EfBudget env_budget() {
    tdspan::EfBudget budget;
    if (const char* nodes = std::getenv("TDSPAN_EF_BUDGET_NODES"))
        budget.max_nodes = std::strtoull(nodes, nullptr, 10);
    if (const char* seconds = std::getenv("TDSPAN_EF_BUDGET_SECONDS"))
        budget.max_seconds = std::strtod(seconds, nullptr);
    return budget;
}

struct SeedNote {
    std::optional<long long> seed;
    void report() const {
        if (seed)
            std::cerr << "note: seed " << *seed
                      << " recorded; all generators are deterministic regardless\n";
    }
};

Json plan_to_json(const tdspan::PwPlan& plan) {
    Json j;
    j["kind"] = "pathwidth";
    j["k"] = plan.k;
    j["delta"] = plan.delta;
    j["beta"] = plan.beta;
    j["n"] = plan.n;
    j["alpha"] = tdspan::json_integer(plan.alpha);
    j["p"] = tdspan::json_integer(plan.p);
    j["m"] = tdspan::json_integer(plan.m);
    j["l"] = tdspan::json_integer(plan.l);
    return j;
}

Json plan_to_json(const tdspan::TwPlan& plan) {
    Json j;
    j["kind"] = "treewidth";
    j["k"] = plan.k;
    j["delta"] = plan.delta;
    j["beta"] = plan.beta;
    j["p"] = plan.p;
    j["l"] = tdspan::json_integer(plan.l);
    j["d"] = tdspan::json_integer(plan.d);
    j["n"] = plan.n;
    j["h"] = plan.h;
    j["N"] = tdspan::json_integer(plan.N);
    return j;
}

void print_reports(const std::string& title,
                   const std::vector<tdspan::InequalityReport>& reports, bool& all_ok) {
    std::cout << title << "\n";
    for (const auto& r : reports) {
        std::cout << "  " << (r.ok ? "ok  " : "FAIL") << "  " << r.name << "  [" << r.lhs
                  << " vs " << r.rhs << "]\n";
        all_ok = all_ok && r.ok;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"width- and span-bounded decomposition toolkit"};
    app.require_subcommand(1);
    SeedNote seed;
    app.add_option("--seed", seed.seed,
                   "recorded for provenance; every generator is deterministic");

    // ---- gen ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a structure file");
    std::string gen_kind;
    gen->add_option("kind", gen_kind, "gadget|bicol|bicolit|loz|pw-g|pw-h|tw-g|tw-h")
        ->required();
    long long g_beta = 1, g_p = 1, g_n = 1, g_n1 = 0, g_n2 = 1, g_m = 1, g_l = 1, g_k = 1;
    long long g_cap = 10'000'000;
    gen->add_option("--beta", g_beta, "buffer exponent");
    gen->add_option("--p", g_p, "run multiplier (pathwidth) or tree height (loz/treewidth)");
    gen->add_option("--n", g_n, "run period (pathwidth) or word length bound (treewidth)");
    gen->add_option("--n1", g_n1, "top run color count");
    gen->add_option("--n2", g_n2, "bottom run color count");
    gen->add_option("--m", g_m, "gadget count along the chain");
    gen->add_option("--l", g_l, "rail length (loz family)");
    gen->add_option("--k", g_k, "width parameter (treewidth family)");
    gen->add_option("--node-cap", g_cap, "refuse generations past this size");
    std::string gen_out;
    gen->add_option("-o,--output", gen_out, "output path (default stdout)");

    // ---- plan / verify-bounds -------------------------------------------
    auto* plan = app.add_subcommand("plan", "solve the parameter inequalities");
    long long p_k = 1, p_delta = 1, p_beta = 0;
    std::string plan_kind = "pw";
    plan->add_option("--k", p_k)->required();
    plan->add_option("--delta", p_delta)->required();
    plan->add_option("--beta", p_beta)->required();
    plan->add_option("--kind", plan_kind, "pw|tw|both (default pw)");

    auto* verify = app.add_subcommand("verify-bounds", "re-check every plan inequality");
    long long v_k = 1, v_delta = 1, v_beta = 0;
    std::string v_grid;
    verify->add_option("--k", v_k);
    verify->add_option("--delta", v_delta);
    verify->add_option("--beta", v_beta);
    verify->add_option("--grid", v_grid,
                       "K,D,B: check all k in [1,K], delta in [1,D], beta in [0,B]");

    // ---- check / span / width / ext --------------------------------------
    auto* check = app.add_subcommand("check", "validate a decomposition against a structure");
    std::string c_structure, c_decomposition;
    check->add_option("structure", c_structure, "StructureFile")->required();
    check->add_option("decomposition", c_decomposition, "DecompositionFile")->required();

    auto* span_cmd = app.add_subcommand("span", "print the span of a valid decomposition");
    std::string s_decomposition;
    span_cmd->add_option("decomposition", s_decomposition)->required();

    auto* width_cmd = app.add_subcommand("width", "print the width of a decomposition");
    std::string w_decomposition;
    width_cmd->add_option("decomposition", w_decomposition)->required();

    auto* ext_cmd = app.add_subcommand("ext", "reconstruct the structure a decomposition encodes");
    std::string e_decomposition, e_out;
    ext_cmd->add_option("decomposition", e_decomposition)->required();
    ext_cmd->add_option("-o,--output", e_out, "output path (default stdout)");

    // ---- ef ---------------------------------------------------------------
    auto* ef_cmd = app.add_subcommand("ef", "round-limited first-order comparison");
    std::string ef_a, ef_b;
    int ef_rank = 1;
    std::uint64_t ef_nodes = 0;
    double ef_seconds = -1;
    ef_cmd->add_option("A", ef_a, "StructureFile")->required();
    ef_cmd->add_option("B", ef_b, "StructureFile")->required();
    ef_cmd->add_option("--rank", ef_rank, "game rounds")->required();
    ef_cmd->add_option("--budget-nodes", ef_nodes, "overrides TDSPAN_EF_BUDGET_NODES");
    ef_cmd->add_option("--budget-seconds", ef_seconds, "overrides TDSPAN_EF_BUDGET_SECONDS");

    // ---- search / refute ---------------------------------------------------
    auto* search = app.add_subcommand("search", "enumerate the valid decompositions");
    std::string se_structure;
    tdspan::SearchConfig se_cfg;
    int se_workers = 1;
    search->add_option("structure", se_structure, "StructureFile")->required();
    search->add_option("--k", se_cfg.k)->required();
    search->add_option("--delta", se_cfg.delta)->required();
    search->add_flag("--path-only", se_cfg.path_only);
    search->add_option("--max-tree-nodes", se_cfg.max_tree_nodes);
    search->add_option("--budget-nodes", se_cfg.budget_nodes);
    search->add_option("--workers", se_workers);

    auto* refute = app.add_subcommand("refute", "pairwise similarity report over two searches");
    std::string r_g, r_h;
    tdspan::SearchConfig r_cfg;
    int r_alpha = 1, r_workers = 1;
    std::uint64_t r_nodes = 0;
    double r_seconds = -1;
    refute->add_option("G", r_g, "StructureFile")->required();
    refute->add_option("H", r_h, "StructureFile")->required();
    refute->add_option("--alpha", r_alpha, "similarity rank")->required();
    refute->add_option("--k", r_cfg.k)->required();
    refute->add_option("--delta", r_cfg.delta)->required();
    refute->add_flag("--path-only", r_cfg.path_only);
    refute->add_option("--max-tree-nodes", r_cfg.max_tree_nodes);
    refute->add_option("--budget-nodes", r_cfg.budget_nodes);
    refute->add_option("--workers", r_workers);
    refute->add_option("--ef-budget-nodes", r_nodes, "overrides TDSPAN_EF_BUDGET_NODES");
    refute->add_option("--ef-budget-seconds", r_seconds, "overrides TDSPAN_EF_BUDGET_SECONDS");

    // ---- export-dot / import-pace -------------------------------------------
    auto* dot = app.add_subcommand("export-dot", "render a structure as DOT");
    std::string d_structure, d_out;
    dot->add_option("structure", d_structure, "StructureFile")->required();
    dot->add_option("-o,--output", d_out, "output path (default stdout)");

    auto* pace = app.add_subcommand("import-pace", "read classical .gr/.td files");
    std::string pa_gr, pa_td, pa_out;
    long long pa_k = -1;
    pace->add_option("graph", pa_gr, ".gr file")->required();
    pace->add_option("decomposition", pa_td, ".td file")->required();
    pace->add_option("--k", pa_k, "mark budget (default: largest bag minus one)");
    pace->add_option("-o,--output", pa_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    seed.report();

    if (*gen) {
        tdspan::Structure s = [&] {
            if (gen_kind == "gadget") return tdspan::make_gadget(g_beta, g_p, g_n, g_cap);
            if (gen_kind == "bicol")
                return tdspan::make_bicol(g_beta, g_p, g_n, g_n1, g_n2, g_cap);
            if (gen_kind == "bicolit")
                return tdspan::make_bicolit(g_beta, g_p, g_n, g_n1, g_n2, g_m, g_cap);
            if (gen_kind == "loz") return tdspan::make_loz(g_p, g_l, g_cap);
            if (gen_kind == "pw-g" || gen_kind == "pw-h") {
                tdspan::PwInstance inst;
                inst.beta = g_beta;
                inst.p = g_p;
                inst.n = g_n;
                inst.m = g_m;
                inst.l = g_l;
                inst.node_cap = g_cap;
                return gen_kind == "pw-g" ? tdspan::build_pw_G(inst) : tdspan::build_pw_H(inst);
            }
            if (gen_kind == "tw-g" || gen_kind == "tw-h") {
                tdspan::TwInstance inst;
                inst.k = g_k;
                inst.p = g_p;
                inst.l = g_l;
                inst.n = g_n;
                inst.node_cap = g_cap;
                return gen_kind == "tw-g" ? tdspan::build_tw_G(inst) : tdspan::build_tw_H(inst);
            }
            throw CLI::ValidationError("gen", "unknown kind: " + gen_kind);
        }();
        write_text(gen_out, tdspan::dump_json(tdspan::structure_to_json(s)));
        return 0;
    }

    if (*plan) {
        Json out = Json::array();
        if (plan_kind == "pw" || plan_kind == "both")
            out.push_back(plan_to_json(tdspan::plan_pw(p_k, p_delta, p_beta)));
        if (plan_kind == "tw" || plan_kind == "both")
            out.push_back(plan_to_json(tdspan::plan_tw(p_k, p_delta, p_beta)));
        if (out.empty()) throw CLI::ValidationError("plan", "unknown kind: " + plan_kind);
        write_text("", tdspan::dump_json(out.size() == 1 ? out[0] : out));
        return 0;
    }

    if (*verify) {
        long long k_hi = v_k, d_hi = v_delta, b_hi = v_beta;
        long long k_lo = v_k, d_lo = v_delta, b_lo = v_beta;
        if (!v_grid.empty()) {
            std::istringstream grid(v_grid);
            char comma = 0;
            if (!(grid >> k_hi >> comma >> d_hi >> comma >> b_hi))
                throw CLI::ValidationError("verify-bounds", "grid must look like 4,4,6");
            k_lo = d_lo = 1;
            b_lo = 0;
        }
        bool all_ok = true;
        for (long long k = k_lo; k <= k_hi; ++k)
            for (long long d = d_lo; d <= d_hi; ++d)
                for (long long b = b_lo; b <= b_hi; ++b) {
                    std::string at =
                        "k=" + std::to_string(k) + " delta=" + std::to_string(d) +
                        " beta=" + std::to_string(b);
                    print_reports("pathwidth plan at " + at,
                                  tdspan::verify_plan(tdspan::plan_pw(k, d, b)), all_ok);
                    print_reports("treewidth plan at " + at,
                                  tdspan::verify_plan(tdspan::plan_tw(k, d, b)), all_ok);
                }
        std::cout << (all_ok ? "all inequalities hold\n" : "FAILURES above\n");
        return all_ok ? 0 : 1;
    }

    if (*check) {
        tdspan::Structure s = load_structure(c_structure);
        tdspan::TreeDecomposition td = load_decomposition(c_decomposition);
        auto violations = tdspan::validate_td(td);
        if (violations.empty()) {
            tdspan::ExtResult er = tdspan::ext(td);
            if (!tdspan::are_isomorphic(er.structure, s))
                violations.push_back("reconstruction is not isomorphic to the structure");
            else
                std::cout << "ok, width " << tdspan::width(td) << ", span "
                          << tdspan::span(td, er.quotient) << "\n";
        }
        for (const auto& v : violations) std::cout << "violation: " << v << "\n";
        return violations.empty() ? 0 : 1;
    }

    if (*span_cmd) {
        tdspan::TreeDecomposition td = load_decomposition(s_decomposition);
        auto violations = tdspan::validate_td(td);
        for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
        if (!violations.empty()) return 1;
        std::cout << tdspan::span(td) << "\n";
        return 0;
    }

    if (*width_cmd) {
        std::cout << tdspan::width(load_decomposition(w_decomposition)) << "\n";
        return 0;
    }

    if (*ext_cmd) {
        tdspan::TreeDecomposition td = load_decomposition(e_decomposition);
        auto violations = tdspan::validate_td(td);
        for (const auto& v : violations) std::cerr << "violation: " << v << "\n";
        if (!violations.empty()) return 1;
        write_text(e_out,
                   tdspan::dump_json(tdspan::structure_to_json(tdspan::ext(td).structure)));
        return 0;
    }

    if (*ef_cmd) {
        tdspan::EfBudget budget = env_budget();
        if (ef_cmd->count("--budget-nodes")) budget.max_nodes = ef_nodes;
        if (ef_cmd->count("--budget-seconds")) budget.max_seconds = ef_seconds;
        tdspan::EfOutcome o =
            tdspan::ef_equivalent(load_structure(ef_a), load_structure(ef_b), ef_rank, budget);
        switch (o) {
            case tdspan::EfOutcome::equivalent: std::cout << "equivalent\n"; return 0;
            case tdspan::EfOutcome::distinguishable: std::cout << "distinguishable\n"; return 1;
            case tdspan::EfOutcome::budget_exceeded: std::cout << "budget exceeded\n"; return 2;
        }
        return 2;
    }

    if (*search) {
        tdspan::Structure s = load_structure(se_structure);
        tdspan::EnumerationResult r = tdspan::enumerate_decompositions(s, se_cfg, se_workers);
        Json header;
        header["type"] = "header";
        header["k"] = se_cfg.k;
        header["delta"] = se_cfg.delta;
        header["path_only"] = se_cfg.path_only;
        header["max_tree_nodes"] = se_cfg.max_tree_nodes;
        header["count"] = r.items.size();
        header["complete"] = r.complete;
        std::cout << header.dump() << "\n";
        long long index = 0;
        for (const auto& item : r.items) {
            Json rec;
            rec["type"] = "decomposition";
            rec["index"] = index++;
            rec["nodes"] = item.td.node_count();
            rec["width"] = tdspan::width(item.td);
            rec["span"] = tdspan::span(item.td);
            rec["key"] = item.canonical_key;
            rec["document"] = tdspan::decomposition_to_json(item.td);
            std::cout << rec.dump() << "\n";
        }
        if (!r.complete) {
            Json finding;
            finding["type"] = "finding";
            finding["what"] = "enumeration_truncated";
            finding["explored"] = r.explored;
            std::cout << finding.dump() << "\n";
        }
        return 0;
    }

    if (*refute) {
        tdspan::EfBudget budget = env_budget();
        if (refute->count("--ef-budget-nodes")) budget.max_nodes = r_nodes;
        if (refute->count("--ef-budget-seconds")) budget.max_seconds = r_seconds;
        tdspan::RefuteReport report = tdspan::micro_refute(
            load_structure(r_g), load_structure(r_h), r_cfg, r_alpha, r_workers, budget);
        std::cout << report.jsonl;
        if (report.similar_count > 0) return 0;
        return report.complete && report.budget_pairs == 0 ? 1 : 2;
    }

    if (*dot) {
        write_text(d_out, tdspan::to_dot(load_structure(d_structure)));
        return 0;
    }

    if (*pace) {
        tdspan::Structure g = tdspan::parse_pace_gr(read_text(pa_gr));
        tdspan::ClassicalDecomposition d = tdspan::parse_pace_td(read_text(pa_td), g.size());
        long long k = pa_k;
        if (k < 0) {
            std::size_t largest = 1;
            for (const auto& bag : d.bag) largest = std::max(largest, bag.size());
            k = static_cast<long long>(largest) - 1;
        }
        tdspan::TreeDecomposition td = tdspan::encode_classical(g, d, static_cast<int>(k));
        write_text(pa_out, tdspan::dump_json(tdspan::decomposition_to_json(td)));
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tdspan::ParseError& e) {
        std::cerr << "parse error";
        if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
        std::cerr << ": " << e.what() << "\n";
        return 3;
    } catch (const tdspan::ResourceExhausted& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
