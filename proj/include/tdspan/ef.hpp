#pragma once

#include <chrono>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tdspan/isomorphism.hpp"
#include "tdspan/structure.hpp"

namespace tdspan {

enum class EfOutcome { equivalent, distinguishable, budget_exceeded };

struct EfBudget {
    std::uint64_t max_nodes = 50'000'000;
    double max_seconds = 0;  // 0 disables the wall clock; node counts stay deterministic
};

// Does the pairing (a_i -> b_i) preserve and reflect colors and all relation
// tuples among the picked elements, injectively both ways?
inline bool is_partial_isomorphism(const Structure& a, const Structure& b,
                                   const std::vector<std::pair<ElementId, ElementId>>& pairs) {
    if (!(a.vocabulary() == b.vocabulary()))
        throw std::invalid_argument("is_partial_isomorphism: vocabulary mismatch");
    for (auto [x, y] : pairs) {
        if (x < 0 || x >= a.size() || y < 0 || y >= b.size())
            throw std::invalid_argument("is_partial_isomorphism: unknown element");
        if (a.color(x) != b.color(y)) return false;
        for (int rel = 0; rel < a.vocabulary().relation_count(); ++rel) {
            if (a.vocabulary().relation(rel).arity != 1) continue;
            if (a.has_tuple(rel, {x}) != b.has_tuple(rel, {y})) return false;
        }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = i + 1; j < pairs.size(); ++j) {
            if ((pairs[i].first == pairs[j].first) != (pairs[i].second == pairs[j].second))
                return false;
        }
    for (int rel = 0; rel < a.vocabulary().relation_count(); ++rel) {
        int arity = a.vocabulary().relation(rel).arity;
        if (arity == 1) continue;  // compared per element above
        auto check = [&](const Structure& from, const Structure& to, bool forward) {
            for (const auto& t : from.tuples(rel)) {
                std::vector<int> img(t.size());
                bool all = true;
                for (std::size_t i = 0; i < t.size() && all; ++i) {
                    all = false;
                    for (auto [x, y] : pairs) {
                        int here = forward ? x : y, there = forward ? y : x;
                        if (here == t[i]) {
                            img[i] = there;
                            all = true;
                            break;
                        }
                    }
                }
                if (all && !to.has_tuple(rel, img)) return false;
            }
            return true;
        };
        if (!check(a, b, true) || !check(b, a, false)) return false;
    }
    return true;
}

namespace detail {

struct PairingHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b9;
            h *= 1099511628211ull;
        }
        return h;
    }
};

class EfSearch {
public:
    EfSearch(const Structure& a, const Structure& b, EfBudget budget)
        : a_(a), b_(b), budget_(budget), start_(std::chrono::steady_clock::now()) {
        JointColoring jc = joint_refinement(a, b);
        color_a_ = std::move(jc.color_a);
        color_b_ = std::move(jc.color_b);
        std::unordered_map<int, int> diff;
        for (int c : color_a_) ++diff[c];
        for (int c : color_b_) --diff[c];
        // Spoiler move order: rare-on-the-other-side colors first, so
        // refutations surface early. Pure heuristic; every move is tried.
        auto order = [&](const std::vector<int>& colors) {
            std::vector<ElementId> out(colors.size());
            for (std::size_t i = 0; i < colors.size(); ++i) out[i] = static_cast<ElementId>(i);
            std::stable_sort(out.begin(), out.end(), [&](ElementId x, ElementId y) {
                int dx = diff.count(colors[x]) ? std::abs(diff[colors[x]]) : 0;
                int dy = diff.count(colors[y]) ? std::abs(diff[colors[y]]) : 0;
                return dx > dy;
            });
            return out;
        };
        spoiler_order_a_ = order(color_a_);
        spoiler_order_b_ = order(color_b_);
    }

    // Duplicator wins the r-round game from the empty position?
    bool run(int rounds) {
        picked_a_.clear();
        picked_b_.clear();
        return wins(rounds);
    }

private:
    // Value of a position depends only on the set of picked pairs, not on
    // the order they were played in: any permutation of the pairing yields
    // the same legal continuations. Hence the memo key below is sound.
    // Spoiler re-picks of an already-picked element are skipped: replaying a
    // pair leaves the pairing set unchanged and only burns a round, and a
    // position winnable with fewer rounds left is winnable a fortiori, so
    // such moves never help the Spoiler.
    bool wins(int rounds) {
        if (rounds == 0) return true;  // invariant: current pairing is a partial isomorphism
        if (++nodes_ > budget_.max_nodes) throw ResourceExhausted("game node budget exceeded");
        if (budget_.max_seconds > 0 && (nodes_ & 4095) == 0) {
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
            if (elapsed.count() > budget_.max_seconds)
                throw ResourceExhausted("game time budget exceeded");
        }

        std::vector<int> key;
        key.reserve(picked_a_.size() * 2 + 1);
        key.push_back(rounds);
        {
            std::vector<std::pair<int, int>> sorted;
            for (std::size_t i = 0; i < picked_a_.size(); ++i)
                sorted.emplace_back(picked_a_[i], picked_b_[i]);
            std::sort(sorted.begin(), sorted.end());
            for (auto [x, y] : sorted) {
                key.push_back(x);
                key.push_back(y);
            }
        }
        auto hit = memo_.find(key);
        if (hit != memo_.end()) return hit->second;

        bool result = true;
        for (ElementId x : spoiler_order_a_) {
            if (picked(picked_a_, x)) continue;
            if (!has_reply(x, true, rounds)) {
                result = false;
                break;
            }
        }
        if (result)
            for (ElementId y : spoiler_order_b_) {
                if (picked(picked_b_, y)) continue;
                if (!has_reply(y, false, rounds)) {
                    result = false;
                    break;
                }
            }
        memo_.emplace(std::move(key), result);
        return result;
    }

    static bool picked(const std::vector<ElementId>& v, ElementId x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    }

    bool has_reply(ElementId pick, bool pick_in_a, int rounds) {
        const std::vector<int>& pick_colors = pick_in_a ? color_a_ : color_b_;
        const std::vector<int>& reply_colors = pick_in_a ? color_b_ : color_a_;
        const Structure& reply_side = pick_in_a ? b_ : a_;
        std::vector<ElementId>& picks = pick_in_a ? picked_a_ : picked_b_;
        std::vector<ElementId>& replies = pick_in_a ? picked_b_ : picked_a_;

        // Same refined color first; every consistent reply is still tried.
        std::vector<ElementId> candidates;
        candidates.reserve(reply_side.size());
        for (ElementId y = 0; y < reply_side.size(); ++y)
            if (!picked(replies, y) && reply_colors[y] == pick_colors[pick]) candidates.push_back(y);
        for (ElementId y = 0; y < reply_side.size(); ++y)
            if (!picked(replies, y) && reply_colors[y] != pick_colors[pick]) candidates.push_back(y);

        for (ElementId y : candidates) {
            if (!extension_consistent(pick, y, pick_in_a)) continue;
            picks.push_back(pick);
            replies.push_back(y);
            bool ok = wins(rounds - 1);
            picks.pop_back();
            replies.pop_back();
            if (ok) return true;
        }
        return false;
    }

    // Adding (x in A, y in B) keeps the pairing a partial isomorphism?
    // Both picks are fresh, so injectivity is automatic.
    bool extension_consistent(ElementId pick, ElementId reply, bool pick_in_a) {
        ElementId x = pick_in_a ? pick : reply;
        ElementId y = pick_in_a ? reply : pick;
        if (a_.color(x) != b_.color(y)) return false;
        for (int rel = 0; rel < a_.vocabulary().relation_count(); ++rel) {
            int arity = a_.vocabulary().relation(rel).arity;
            if (arity == 1) {
                if (a_.has_tuple(rel, {x}) != b_.has_tuple(rel, {y})) return false;
                continue;
            }
            for (const auto& t : a_.tuples(rel)) {
                std::vector<int> img(t.size());
                bool all = true, touches = false;
                for (std::size_t i = 0; i < t.size() && all; ++i) {
                    if (t[i] == x) {
                        img[i] = y;
                        touches = true;
                        continue;
                    }
                    all = false;
                    for (std::size_t p = 0; p < picked_a_.size(); ++p)
                        if (picked_a_[p] == t[i]) {
                            img[i] = picked_b_[p];
                            all = true;
                            break;
                        }
                }
                if (touches && all && !b_.has_tuple(rel, img)) return false;
            }
            for (const auto& t : b_.tuples(rel)) {
                std::vector<int> pre(t.size());
                bool all = true, touches = false;
                for (std::size_t i = 0; i < t.size() && all; ++i) {
                    if (t[i] == y) {
                        pre[i] = x;
                        touches = true;
                        continue;
                    }
                    all = false;
                    for (std::size_t p = 0; p < picked_b_.size(); ++p)
                        if (picked_b_[p] == t[i]) {
                            pre[i] = picked_a_[p];
                            all = true;
                            break;
                        }
                }
                if (touches && all && !a_.has_tuple(rel, pre)) return false;
            }
        }
        return true;
    }

    const Structure& a_;
    const Structure& b_;
    EfBudget budget_;
    std::chrono::steady_clock::time_point start_;
    std::vector<int> color_a_, color_b_;
    std::vector<ElementId> spoiler_order_a_, spoiler_order_b_;
    std::vector<ElementId> picked_a_, picked_b_;
    std::unordered_map<std::vector<int>, bool, PairingHash> memo_;
    std::uint64_t nodes_ = 0;
};

}  // namespace detail

// Does Duplicator win the r-round back-and-forth game? Equivalently: do the
// two structures satisfy the same sentences of quantifier rank at most r?
// Budget exhaustion is reported as its own outcome, never coerced to a
// truth value.
inline EfOutcome ef_equivalent(const Structure& a, const Structure& b, int rank,
                               EfBudget budget = {}) {
    if (!(a.vocabulary() == b.vocabulary()))
        throw std::invalid_argument("ef_equivalent: vocabulary mismatch");
    if (rank < 0) throw std::invalid_argument("ef_equivalent: negative rank");
    detail::EfSearch search(a, b, budget);
    try {
        return search.run(rank) ? EfOutcome::equivalent : EfOutcome::distinguishable;
    } catch (const ResourceExhausted&) {
        return EfOutcome::budget_exceeded;
    }
}

struct RankSearch {
    EfOutcome outcome = EfOutcome::equivalent;  // equivalent = no rank ≤ max_r distinguishes
    int rank = -1;                              // least distinguishing rank when distinguishable
};

// Least rank that tells the two structures apart, or the indistinguishable
// marker. Binary search is valid because equivalence is downward closed in
// the rank.
inline RankSearch distinguishing_rank(const Structure& a, const Structure& b, int max_rank,
                                      EfBudget budget = {}) {
    if (max_rank < 0) throw std::invalid_argument("distinguishing_rank: negative max rank");
    RankSearch out;
    out.outcome = ef_equivalent(a, b, max_rank, budget);
    if (out.outcome != EfOutcome::distinguishable) return out;
    // Invariant: distinguishable at hi, equivalent at lo-1 (rank 0 never
    // distinguishes).
    int lo = 1, hi = max_rank;
    while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        EfOutcome r = ef_equivalent(a, b, mid, budget);
        if (r == EfOutcome::budget_exceeded) {
            out.outcome = EfOutcome::budget_exceeded;
            out.rank = -1;
            return out;
        }
        if (r == EfOutcome::distinguishable)
            hi = mid;
        else
            lo = mid + 1;
    }
    out.rank = lo;
    return out;
}

}  // namespace tdspan
