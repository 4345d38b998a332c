#include "scpir/simplex.hpp"

#include <cstddef>

#include "scpir/errors.hpp"

namespace scpir {

namespace {

struct Tableau {
    // rows[i] = constraint coefficients followed by the right-hand side.
    std::vector<std::vector<Rational>> rows;
    std::vector<int> basis;   // variable basic in each row
    std::vector<Rational> cost;  // reduced-cost row; last entry = -objective value
    int nvars = 0;

    Rational& rhs(int i) { return rows[i][nvars]; }

    void pivot(int row, int col) {
        Rational p = rows[row][col];
        for (auto& v : rows[row]) v /= p;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if ((int)i == row || rows[i][col] == 0) continue;
            Rational f = rows[i][col];
            for (int j = 0; j <= nvars; ++j) rows[i][j] -= f * rows[row][j];
        }
        if (cost[col] != 0) {
            Rational f = cost[col];
            for (int j = 0; j <= nvars; ++j) cost[j] -= f * rows[row][j];
        }
        basis[row] = col;
    }

    // Returns true when optimal, false when unbounded.
    bool run(int max_col) {
        while (true) {
            int enter = -1;
            for (int j = 0; j < max_col; ++j) {
                if (cost[j] < 0) {
                    enter = j;  // Bland: lowest index
                    break;
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            Rational best;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i][enter] <= 0) continue;
                Rational ratio = rhs(i) / rows[i][enter];
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = (int)i;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
    const int n = (int)problem.objective.size();
    const int n_eq = (int)problem.eq_lhs.size();
    const int n_le = (int)problem.le_lhs.size();
    const int m = n_eq + n_le;
    if ((int)problem.eq_rhs.size() != n_eq || (int)problem.le_rhs.size() != n_le)
        throw ParameterError("LP constraint sides have mismatched row counts");

    // Column layout: originals | slacks (one per <= row) | artificials.
    const int slack0 = n;
    const int art0 = n + n_le;
    const int nvars = n + n_le + m;

    Tableau t;
    t.nvars = nvars;
    t.rows.assign(m, std::vector<Rational>(nvars + 1, Rational(0)));
    t.basis.assign(m, -1);

    auto load_row = [&](int i, const std::vector<Rational>& lhs, const Rational& rhs) {
        if ((int)lhs.size() != n)
            throw ParameterError("LP constraint row has wrong variable count");
        for (int j = 0; j < n; ++j) t.rows[i][j] = lhs[j];
        t.rows[i][nvars] = rhs;
    };
    for (int i = 0; i < n_eq; ++i) load_row(i, problem.eq_lhs[i], problem.eq_rhs[i]);
    for (int i = 0; i < n_le; ++i) {
        load_row(n_eq + i, problem.le_lhs[i], problem.le_rhs[i]);
        t.rows[n_eq + i][slack0 + i] = 1;
    }
    // Nonnegative right-hand sides so the artificial basis is feasible.
    for (int i = 0; i < m; ++i) {
        if (t.rows[i][nvars] < 0)
            for (auto& v : t.rows[i]) v = -v;
    }
    // One artificial per row; slack columns that survived the sign flip with a
    // +1 coefficient could serve as the initial basis directly, but a uniform
    // artificial start keeps the logic simple and exactness makes it cheap.
    for (int i = 0; i < m; ++i) {
        t.rows[i][art0 + i] = 1;
        t.basis[i] = art0 + i;
    }

    // Phase 1: minimize the sum of artificials. Reduced costs start as
    // c - sum of rows with basic artificials.
    t.cost.assign(nvars + 1, Rational(0));
    for (int j = art0; j < nvars; ++j) t.cost[j] = 1;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= nvars; ++j) t.cost[j] -= t.rows[i][j];

    LpSolution sol;
    if (!t.run(nvars)) throw Error("phase-1 LP cannot be unbounded");  // defensive
    if (-t.cost[nvars] != 0) {
        sol.feasible = false;
        return sol;
    }
    // Pivot any artificial still basic (at level zero) out of the basis, or
    // drop its row when it is entirely redundant.
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < art0) continue;
        int col = -1;
        for (int j = 0; j < art0; ++j)
            if (t.rows[i][j] != 0) {
                col = j;
                break;
            }
        if (col >= 0) t.pivot(i, col);
    }
    std::vector<std::vector<Rational>> kept_rows;
    std::vector<int> kept_basis;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.basis[i] >= art0) continue;  // redundant zero row
        kept_rows.push_back(t.rows[i]);
        kept_basis.push_back(t.basis[i]);
    }
    t.rows = std::move(kept_rows);
    t.basis = std::move(kept_basis);

    // Phase 2: the real objective, artificial columns excluded from entering.
    t.cost.assign(nvars + 1, Rational(0));
    for (int j = 0; j < n; ++j) t.cost[j] = problem.objective[j];
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        int b = t.basis[i];
        Rational cb = (b < n) ? problem.objective[b] : Rational(0);
        if (cb != 0)
            for (int j = 0; j <= nvars; ++j) t.cost[j] -= cb * t.rows[i][j];
    }
    sol.feasible = true;
    if (!t.run(art0)) {
        sol.bounded = false;
        return sol;
    }
    sol.bounded = true;
    sol.value = -t.cost[nvars];
    sol.x.assign(n, Rational(0));
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (t.basis[i] < n) sol.x[t.basis[i]] = t.rows[i][nvars];
    return sol;
}

}  // namespace scpir
