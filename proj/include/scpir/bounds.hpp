#pragma once

#include <string>
#include <vector>

#include "scpir/core_model.hpp"
#include "scpir/rational.hpp"

namespace scpir {

// Download cost per message bit of the replication-t scheme:
// 1 + 1/t + ... + 1/t^(K-1). Decreasing and convex in t.
Rational corner_cost(int t, int K);

// Nested harmonic sum: zero at depth k = 1; for k >= 2, the sum over
// non-decreasing tuples n <= n_2 <= ... <= n_{k-1} <= N of the reciprocal of
// their product (tuple lengths 1..k-1). Evaluated by memoized recursion on
// that definition: S(n,k) = (1/n) * (1 + sum_{m=n}^{N} S(m,k-1)).
Rational nested_harmonic_sum(int n, int k, int N);

// Weight that x_l receives in the converse objective after the per-database
// sums collapse: sum_{n=l}^{N} C(n,l) * S(n,k).
Rational objective_coefficient(int l, int k, int N);

// Slack coefficient of x_l after eliminating x_j and x_{j+1} from the
// objective: corner_cost(l) + (l-j-1)*corner_cost(j) - (l-j)*corner_cost(j+1).
// Nonnegative whenever l is not j or j+1; those arguments are a domain error.
Rational elimination_slack(int l, int j, int N, int K);

// The straight line through corners j and j+1 of the trade-off, evaluated at
// mu: (mu*N - j)*corner_cost(j+1) - (mu*N - j - 1)*corner_cost(j).
Rational segment_lower_bound(int j, const Rational& mu, int N, int K);

// Optimal-download lower bound: max over segments j in [1, N-1]; the N = 1
// instance degenerates to the single point (mu=1, cost=K).
// Throws ParameterError when mu is outside [1/N, 1].
Rational converse_lower_bound(const Rational& mu, int N, int K);

struct CurvePoint {
    Rational mu;
    Rational cost;
};
using Curve = std::vector<CurvePoint>;

// The N achievable corners (t/N, corner_cost(t)) for t = 1..N.
Curve corner_points(int N, int K);

// Piecewise-linear interpolation between consecutive corners. Convexity of
// corner_cost makes the polyline the lower convex hull of the corners.
Rational achievable_hull(const Rational& mu, int N, int K);

// Exact LP lower bound over placement fractions:
//   minimize 1 + sum_l objective_coefficient(l, K) * x_l
//   s.t. sum_l C(N,l) x_l = 1, sum_l l*C(N,l) x_l <= mu*N, x >= 0.
struct LpBound {
    Rational value;
    PlacementFractions argmin;
};
LpBound lp_lower_bound(const Rational& mu, int N, int K);

// Residual-entropy fractions lambda[n][k] for n in [0,N], k in [0,K].
// Boundaries: lambda[N][k] = 0, lambda[n][K] = 0, lambda[0][k] = 1 for k < K.
struct ResidualEntropyMatrix {
    int num_dbs = 0;
    int num_messages = 0;
    std::vector<std::vector<Rational>> lambda;

    // Checks the boundary rows/columns; throws ParameterError naming the
    // violated boundary.
    void validate() const;
};

// Uncoded placements make the fractions stage-independent:
// lambda[n][k] = sum_{l=1}^{N-n} C(N-n, l) x_l for every k in [1, K-1].
ResidualEntropyMatrix residual_entropy_from_fractions(const PlacementFractions& x,
                                                      int num_messages);

// The general converse in its final displayed form:
// 1 + sum_{k=1}^{K-1} sum_{n_1 <= ... <= n_k, each in [1,N]}
//       lambda[N - n_1][k] / (n_1 * ... * n_k).
Rational general_lower_bound(const ResidualEntropyMatrix& m);

// Curve CSV rows under the header mu_num,mu_den,D_num,D_den,D_float.
std::string curve_to_csv(const Curve& curve);

// The optimal trade-off sampled at grid_points evenly spaced storage
// fractions across [1/N, 1] (hull and converse coincide; the hull value is
// emitted).
Curve optimal_tradeoff_curve(int N, int K, int grid_points);

}  // namespace scpir
