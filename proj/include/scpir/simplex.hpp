#pragma once

#include <vector>

#include "scpir/rational.hpp"

namespace scpir {

// Minimize objective . x  subject to  eq_lhs x = eq_rhs,  le_lhs x <= le_rhs,
// x >= 0, everything exact rational.
struct LpProblem {
    std::vector<Rational> objective;
    std::vector<std::vector<Rational>> eq_lhs;
    std::vector<Rational> eq_rhs;
    std::vector<std::vector<Rational>> le_lhs;
    std::vector<Rational> le_rhs;
};

struct LpSolution {
    bool feasible = false;
    bool bounded = false;
    Rational value;
    std::vector<Rational> x;
};

// Two-phase primal simplex over exact rationals. Bland's rule picks the
// lowest-index entering column and breaks ratio-test ties by lowest basic
// variable index, which guarantees termination without cycling.
LpSolution solve_lp(const LpProblem& problem);

}  // namespace scpir
