#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "tdspan/core.hpp"

namespace tdspan {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt pow2(long long e) {
    if (e < 0) throw std::invalid_argument("pow2: negative exponent");
    return BigInt(1) << static_cast<unsigned>(e);
}

// The audited size expressions of the pathwidth construction, all exact.
//   expr1: upper bound on the piece of a decomposition a Bicolit can see;
//   expr2: lower bound on a Bicolit's length;
//   expr3: upper bound on the length of the reference decomposition;
//   expr4: lower bound on the whole structure's size.
struct BoundsRecord {
    BigInt expr1;
    BigInt expr2;
    BigInt gadget_size;
    BigInt expr3;
    BigInt expr4;
};

inline BoundsRecord bounds(const BigInt& k, const BigInt& delta, long long beta, const BigInt& p,
                           const BigInt& n, const BigInt& m, const BigInt& l) {
    BoundsRecord r;
    r.expr1 = (k + 1) * (delta * (pow2(beta + 4) * m + p * n) + 1);
    r.expr2 = m * (pow2(beta + 2) + 2 * p * n - 3);
    r.gadget_size = pow2(beta + 2) + 2 * p * n - 2;
    r.expr3 = (k + 1) * (n * delta * m * (p * n + pow2(beta + 1)) + l);
    r.expr4 = (n + 1) * m * (pow2(beta + 2) + 2 * p * n - 3) + n * (l - 1);
    return r;
}

struct PwPlan {
    long long k = 0, delta = 0, beta = 0;  // inputs
    long long n = 0;                       // k+2, bumped to k+3 when that is even
    BigInt alpha;                          // delta * (n+1)
    BigInt p, m, l;                        // least solutions of the chain below
};

struct TwPlan {
    long long k = 0, delta = 0, beta = 0;  // inputs
    long long p = 0;                       // ceil(log2(k+2))
    BigInt l;                              // 2^beta
    BigInt d;                              // 2*delta*(p+2) + 2*delta
    long long n = 0, h = 0;                // least feasible n and its tree depth
    BigInt N;                              // census threshold at (n, h)
    // alpha has no closed form in this construction; callers pick any rank
    // large enough for their run and record it alongside the plan.
};

namespace detail {

// floor(a/b) for b > 0 (cpp_int division truncates toward zero).
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && a < 0) --q;
    return q;
}

// Least integer x ≥ 1 with coeff*x > target.
inline BigInt least_exceeding(const BigInt& coeff, const BigInt& target) {
    if (coeff <= 0) throw std::invalid_argument("least_exceeding: coefficient not positive");
    if (target < 0) return 1;
    BigInt x = floor_div(target, coeff) + 1;
    return x < 1 ? BigInt(1) : x;
}

inline long long ceil_log2(long long v) {
    long long e = 0;
    while ((1LL << e) < v) ++e;
    return e;
}

}  // namespace detail

// Parameter chain of the pathwidth family: closed-form least solutions.
// Every inequality is re-checked from scratch by verify_plan.
inline PwPlan plan_pw(long long k, long long delta, long long beta) {
    if (k < 1 || delta < 1 || beta < 0) throw std::invalid_argument("plan_pw: bad inputs");
    PwPlan plan;
    plan.k = k;
    plan.delta = delta;
    plan.beta = beta;
    plan.n = (k + 2) % 2 == 1 ? k + 2 : k + 3;  // the construction needs n odd
    plan.alpha = BigInt(delta) * (plan.n + 1);

    BigInt K = k, D = delta, n = plan.n;
    // p: least positive with 2^{β+2} + 2pn − 3 − (k+1)δ2^{β+4} > 0.
    plan.p = detail::least_exceeding(2 * n, (K + 1) * D * pow2(beta + 4) + 3 - pow2(beta + 2));
    BigInt slack = pow2(beta + 2) + 2 * plan.p * n - 3 - (K + 1) * D * pow2(beta + 4);
    // m: least positive with m * slack > (k+1)(δpn + 1).
    plan.m = detail::least_exceeding(slack, (K + 1) * (D * plan.p * n + 1));
    // l: least positive with l(n−k−1) > (k+1)nδm(pn+2^{β+1}) − (n+1)m(2^{β+2}+2pn−3) + n.
    BigInt rhs = (K + 1) * n * D * plan.m * (plan.p * n + pow2(beta + 1)) -
                 (n + 1) * plan.m * (pow2(beta + 2) + 2 * plan.p * n - 3) + n;
    plan.l = detail::least_exceeding(n - K - 1, rhs);
    return plan;
}

namespace detail {

// Depth of the counting subtrees at a given n: the largest h ≥ 0 with
// 2k+3 ≤ 2^{n−1−2h}, or -1 when even h = 0 fails.
inline long long tw_depth(long long k, long long n) {
    long long s = ceil_log2(2 * k + 3);
    if (n - 1 < s) return -1;
    return (n - 1 - s) / 2;
}

inline BigInt tw_census_threshold(long long k, long long n, long long h) {
    return (pow2(h) - 1) + BigInt(4 * k + 4) * (pow2(n - h + 1) - 1) + 1;
}

struct TwFeasibility {
    bool ok = false;
    BigInt leaf_lhs, leaf_rhs;      // 2^{n−h−1} ≥ (2k+3)(2^h − 1)
    BigInt census_lhs, census_rhs;  // (2k+3)(N−1)+(k+1) < 2^{n+1}−1
    BigInt major_lhs, major_rhs;    // 2[(2^{n+1}−1)−(k+1)−N] > 2^{n+1}−1
};

inline TwFeasibility tw_feasible(long long k, long long n) {
    TwFeasibility f;
    long long h = tw_depth(k, n);
    if (h < 0) return f;
    BigInt N = tw_census_threshold(k, n, h);
    f.leaf_lhs = pow2(n - h - 1);
    f.leaf_rhs = BigInt(2 * k + 3) * (pow2(h) - 1);
    f.census_lhs = BigInt(2 * k + 3) * (N - 1) + (k + 1);
    f.census_rhs = pow2(n + 1) - 1;
    f.major_lhs = 2 * ((pow2(n + 1) - 1) - (k + 1) - N);
    f.major_rhs = pow2(n + 1) - 1;
    f.ok = f.leaf_lhs >= f.leaf_rhs && f.census_lhs < f.census_rhs && f.major_lhs > f.major_rhs;
    return f;
}

}  // namespace detail

// Parameter chain of the treewidth family. n is found by exact scan.
inline TwPlan plan_tw(long long k, long long delta, long long beta) {
    if (k < 1 || delta < 1 || beta < 0) throw std::invalid_argument("plan_tw: bad inputs");
    TwPlan plan;
    plan.k = k;
    plan.delta = delta;
    plan.beta = beta;
    plan.p = detail::ceil_log2(k + 2);
    plan.l = pow2(beta);
    plan.d = BigInt(2) * delta * (plan.p + 2) + 2 * delta;
    constexpr long long kSearchCap = 1LL << 16;
    for (long long n = 1; n <= kSearchCap; ++n) {
        if (!detail::tw_feasible(k, n).ok) continue;
        plan.n = n;
        plan.h = detail::tw_depth(k, n);
        plan.N = detail::tw_census_threshold(k, n, plan.h);
        return plan;
    }
    throw ResourceExhausted("plan_tw: no feasible n up to 2^16");
}

struct InequalityReport {
    std::string name;
    BigInt lhs, rhs;
    bool ok = false;
};

inline bool plan_ok(const std::vector<InequalityReport>& reports) {
    for (const auto& r : reports)
        if (!r.ok) return false;
    return true;
}

// Re-evaluates every defining condition of a pathwidth plan from scratch;
// deliberately ignorant of how the planner picked its values.
inline std::vector<InequalityReport> verify_plan(const PwPlan& plan) {
    std::vector<InequalityReport> out;
    BigInt K = plan.k, D = plan.delta, n = plan.n;
    out.push_back({"n is odd", BigInt(plan.n % 2), 1, plan.n % 2 == 1});
    out.push_back({"n matches k", n, K + 2, plan.n == plan.k + 2 || plan.n == plan.k + 3});
    out.push_back({"alpha = delta*(n+1)", plan.alpha, D * (n + 1), plan.alpha == D * (n + 1)});
    out.push_back({"p >= 1", plan.p, 1, plan.p >= 1});
    out.push_back({"m >= 1", plan.m, 1, plan.m >= 1});
    out.push_back({"l >= 1", plan.l, 1, plan.l >= 1});
    BigInt slack = pow2(plan.beta + 2) + 2 * plan.p * n - 3 - (K + 1) * D * pow2(plan.beta + 4);
    out.push_back({"gadget slack positive", slack, 0, slack > 0});
    BoundsRecord b = bounds(K, D, plan.beta, plan.p, n, plan.m, plan.l);
    out.push_back({"block length beats visibility (expr2 > expr1)", b.expr2, b.expr1,
                   b.expr2 > b.expr1});
    out.push_back({"structure size beats decomposition reach (expr4 > expr3)", b.expr4, b.expr3,
                   b.expr4 > b.expr3});
    return out;
}

inline std::vector<InequalityReport> verify_plan(const TwPlan& plan) {
    std::vector<InequalityReport> out;
    BigInt K = plan.k, D = plan.delta;
    out.push_back({"2^p >= k+2", pow2(plan.p), K + 2, pow2(plan.p) >= K + 2});
    out.push_back({"2^(p-1) < k+2", plan.p >= 1 ? pow2(plan.p - 1) : BigInt(0), K + 2,
                   plan.p >= 1 ? pow2(plan.p - 1) < K + 2 : false});
    out.push_back({"l = 2^beta", plan.l, pow2(plan.beta), plan.l == pow2(plan.beta)});
    out.push_back({"d = 2*delta*(p+2) + 2*delta", plan.d, BigInt(2) * D * (plan.p + 2) + 2 * D,
                   plan.d == BigInt(2) * D * (plan.p + 2) + 2 * D});
    bool h_sane = plan.h >= 0 && plan.n - 1 - 2 * plan.h >= 0;
    BigInt h_lhs = h_sane ? pow2(plan.n - 1 - 2 * plan.h) : BigInt(0);
    bool h_max = h_sane && h_lhs >= 2 * plan.k + 3 &&
                 pow2(plan.n - 1) < (BigInt(2 * plan.k + 3) << static_cast<unsigned>(2 * plan.h + 2));
    out.push_back({"h maximal for 2k+3 <= 2^(n-1-2h)", h_lhs, BigInt(2 * plan.k + 3), h_max});
    out.push_back({"N matches census formula", plan.N,
                   detail::tw_census_threshold(plan.k, plan.n, plan.h),
                   plan.N == detail::tw_census_threshold(plan.k, plan.n, plan.h)});
    detail::TwFeasibility f = detail::tw_feasible(plan.k, plan.n);
    out.push_back({"leaves suffice for cross copies", f.leaf_lhs, f.leaf_rhs,
                   f.leaf_lhs >= f.leaf_rhs});
    out.push_back({"census bound below source count", f.census_lhs, f.census_rhs,
                   f.census_lhs < f.census_rhs});
    out.push_back({"large side is a strict majority", f.major_lhs, f.major_rhs,
                   f.major_lhs > f.major_rhs});
    return out;
}

}  // namespace tdspan
