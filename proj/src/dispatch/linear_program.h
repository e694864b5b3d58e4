// Dense linear-program solver for desk-scale dispatch problems.
//
// min c'x  s.t.  rows (=, <=, >=),  lower <= x <= upper  (infinite bounds ok)
//
// Two-phase tableau simplex with Bland's rule, which terminates on the
// degenerate bases that dispatch problems routinely produce. Adequate up to
// a few hundred buses; not meant for anything larger.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lp {

enum class Relation { eq, le, ge };

struct Constraint {
    Eigen::VectorXd coefficients;
    Relation relation = Relation::eq;
    double rhs = 0.0;
    std::string name;
};

struct Problem {
    Eigen::VectorXd objective;
    Eigen::VectorXd lower; // -infinity() for free
    Eigen::VectorXd upper; // +infinity() for unbounded
    std::vector<Constraint> constraints;

    int n_vars() const { return static_cast<int>(objective.size()); }
};

enum class SolveStatus { optimal, infeasible, unbounded };

struct Solution {
    SolveStatus status = SolveStatus::infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    // Names of constraints kept infeasible at the end of phase 1.
    std::vector<std::string> infeasible_constraints;
};

Solution solve(const Problem& problem);

} // namespace lp
