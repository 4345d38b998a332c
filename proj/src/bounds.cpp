#include "scpir/bounds.hpp"

#include <map>
#include <sstream>

#include "scpir/errors.hpp"
#include "scpir/simplex.hpp"

namespace scpir {

namespace {

void check_nk(int N, int K) {
    if (N < 1) throw ParameterError("bounds require N >= 1");
    if (K < 1) throw ParameterError("bounds require K >= 1");
}

void check_mu_range(const Rational& mu, int N) {
    if (mu < Rational(1, N) || mu > 1)
        throw ParameterError("mu must lie in [1/N, 1], got " + to_string(mu));
}

}  // namespace

Rational corner_cost(int t, int K) {
    if (t < 1) throw ParameterError("corner_cost requires t >= 1");
    if (K < 1) throw ParameterError("corner_cost requires K >= 1");
    Rational sum = 0;
    Rational term = 1;
    for (int k = 0; k < K; ++k) {
        sum += term;
        term /= t;
    }
    return sum;
}

Rational nested_harmonic_sum(int n, int k, int N) {
    if (n < 1 || n > N) throw ParameterError("nested harmonic sum requires 1 <= n <= N");
    if (k < 1) throw ParameterError("nested harmonic sum requires k >= 1");
    static thread_local std::map<std::tuple<int, int, int>, Rational> memo;
    if (k == 1) return 0;
    auto key = std::make_tuple(n, k, N);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    // Factoring 1/n out of every tuple leaves the depth-(k-1) sums anchored at
    // each m from n to N, plus the bare 1/n term.
    Rational inner = 1;
    for (int m = n; m <= N; ++m) inner += nested_harmonic_sum(m, k - 1, N);
    Rational value = inner / n;
    memo.emplace(key, value);
    return value;
}

Rational objective_coefficient(int l, int k, int N) {
    if (l < 1 || l > N) throw ParameterError("objective coefficient requires 1 <= l <= N");
    Rational sum = 0;
    for (int n = l; n <= N; ++n)
        sum += Rational(binomial(n, l)) * nested_harmonic_sum(n, k, N);
    return sum;
}

Rational elimination_slack(int l, int j, int N, int K) {
    check_nk(N, K);
    if (l < 1 || l > N || j < 1 || j > N - 1)
        throw ParameterError("elimination slack requires 1 <= l <= N and 1 <= j <= N-1");
    if (l == j || l == j + 1)
        throw ParameterError("elimination slack is undefined at l = j and l = j+1");
    return corner_cost(l, K) + Rational(l - j - 1) * corner_cost(j, K) -
           Rational(l - j) * corner_cost(j + 1, K);
}

Rational segment_lower_bound(int j, const Rational& mu, int N, int K) {
    check_nk(N, K);
    if (j < 1 || j > N - 1) throw ParameterError("segment index must satisfy 1 <= j <= N-1");
    Rational mn = mu * N;
    return (mn - j) * corner_cost(j + 1, K) - (mn - j - 1) * corner_cost(j, K);
}

Rational converse_lower_bound(const Rational& mu, int N, int K) {
    check_nk(N, K);
    check_mu_range(mu, N);
    if (N == 1) return corner_cost(1, K);
    Rational best = segment_lower_bound(1, mu, N, K);
    for (int j = 2; j <= N - 1; ++j) {
        Rational v = segment_lower_bound(j, mu, N, K);
        if (v > best) best = v;
    }
    return best;
}

Curve corner_points(int N, int K) {
    check_nk(N, K);
    Curve c;
    for (int t = 1; t <= N; ++t) c.push_back({Rational(t, N), corner_cost(t, K)});
    return c;
}

Rational achievable_hull(const Rational& mu, int N, int K) {
    check_nk(N, K);
    check_mu_range(mu, N);
    Curve corners = corner_points(N, K);
    if (mu == corners.back().mu) return corners.back().cost;
    for (int i = 0; i + 1 < (int)corners.size(); ++i) {
        if (mu >= corners[i].mu && mu < corners[i + 1].mu) {
            Rational span = corners[i + 1].mu - corners[i].mu;
            Rational w = (mu - corners[i].mu) / span;
            return corners[i].cost + w * (corners[i + 1].cost - corners[i].cost);
        }
    }
    throw Error("achievable_hull: mu escaped the corner range");  // unreachable
}

LpBound lp_lower_bound(const Rational& mu, int N, int K) {
    check_nk(N, K);
    check_mu_range(mu, N);
    LpProblem p;
    p.objective.resize(N);
    std::vector<Rational> size_row(N), storage_row(N);
    for (int l = 1; l <= N; ++l) {
        p.objective[l - 1] = objective_coefficient(l, K, N);
        size_row[l - 1] = Rational(binomial(N, l));
        storage_row[l - 1] = Rational(l) * Rational(binomial(N, l));
    }
    p.eq_lhs = {size_row};
    p.eq_rhs = {Rational(1)};
    p.le_lhs = {storage_row};
    p.le_rhs = {mu * N};
    LpSolution s = solve_lp(p);
    if (!s.feasible) throw ParameterError("storage budget infeasible for mu=" + to_string(mu));
    if (!s.bounded) throw Error("placement LP cannot be unbounded");  // defensive
    LpBound out;
    out.value = 1 + s.value;
    out.argmin.num_dbs = N;
    out.argmin.x = s.x;
    out.argmin.validate();
    return out;
}

void ResidualEntropyMatrix::validate() const {
    const int N = num_dbs, K = num_messages;
    if ((int)lambda.size() != N + 1)
        throw ParameterError("residual entropy matrix must have rows 0..N");
    for (const auto& row : lambda)
        if ((int)row.size() != K + 1)
            throw ParameterError("residual entropy matrix must have columns 0..K");
    for (int k = 0; k <= K; ++k)
        if (lambda[N][k] != 0)
            throw ParameterError("boundary violated: lambda[N][k] must be 0 at k=" +
                                 std::to_string(k));
    for (int n = 0; n <= N; ++n)
        if (lambda[n][K] != 0)
            throw ParameterError("boundary violated: lambda[n][K] must be 0 at n=" +
                                 std::to_string(n));
    for (int k = 0; k < K; ++k)
        if (lambda[0][k] != 1)
            throw ParameterError("boundary violated: lambda[0][k] must be 1 at k=" +
                                 std::to_string(k));
}

ResidualEntropyMatrix residual_entropy_from_fractions(const PlacementFractions& x,
                                                      int num_messages) {
    x.validate();
    if (num_messages < 1) throw ParameterError("residual entropy requires K >= 1");
    const int N = x.num_dbs, K = num_messages;
    ResidualEntropyMatrix m;
    m.num_dbs = N;
    m.num_messages = K;
    m.lambda.assign(N + 1, std::vector<Rational>(K + 1, Rational(0)));
    for (int n = 0; n <= N; ++n) {
        Rational v = 0;
        for (int l = 1; l <= N - n; ++l) v += Rational(binomial(N - n, l)) * x.x[l - 1];
        // Uncoded placements leave the fraction independent of the stage.
        for (int k = 0; k < K; ++k) m.lambda[n][k] = v;
    }
    m.validate();
    return m;
}

namespace {

// Sum over non-decreasing tuples (n_1 <= ... <= n_k) in [1,N]^k of
// lambda[N-n_1][k] / prod(n_i), accumulated by depth-first extension.
Rational nested_tuple_sum(const ResidualEntropyMatrix& m, int k) {
    const int N = m.num_dbs;
    Rational total = 0;
    struct Frame {
        int depth;
        int low;
        Rational inv_prod;
        int first;
    };
    std::vector<Frame> stack;
    for (int n1 = 1; n1 <= N; ++n1)
        stack.push_back({1, n1, Rational(1, n1), n1});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth == k) {
            total += m.lambda[N - f.first][k] * f.inv_prod;
            continue;
        }
        for (int nx = f.low; nx <= N; ++nx)
            stack.push_back({f.depth + 1, nx, f.inv_prod / nx, f.first});
    }
    return total;
}

}  // namespace

Rational general_lower_bound(const ResidualEntropyMatrix& m) {
    m.validate();
    Rational bound = 1;
    for (int k = 1; k <= m.num_messages - 1; ++k) bound += nested_tuple_sum(m, k);
    return bound;
}

std::string curve_to_csv(const Curve& curve) {
    std::ostringstream out;
    out << "mu_num,mu_den,D_num,D_den,D_float\n";
    for (const auto& p : curve)
        out << num(p.mu) << ',' << den(p.mu) << ',' << num(p.cost) << ',' << den(p.cost) << ','
            << to_double(p.cost) << '\n';
    return out.str();
}

Curve optimal_tradeoff_curve(int N, int K, int grid_points) {
    check_nk(N, K);
    if (grid_points < 2) throw ParameterError("curve grid needs at least 2 points");
    Curve c;
    Rational lo(1, N), hi(1);
    for (int i = 0; i < grid_points; ++i) {
        Rational mu = lo + (hi - lo) * Rational(i, grid_points - 1);
        c.push_back({mu, achievable_hull(mu, N, K)});
    }
    return c;
}

}  // namespace scpir
