#include "src/dispatch/linear_program.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lp {

namespace {

constexpr double kTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr int kMaxIterations = 200000;

inline bool finite(double v) {
    return std::isfinite(v);
}

// How each original variable maps onto the non-negative standard-form ones.
struct VarMap {
    enum Kind { fixed, shifted, mirrored, split } kind = fixed;
    int col_a = -1; // y (shifted/mirrored) or y+ (split)
    int col_b = -1; // y- (split)
    double offset = 0.0;
};

struct Tableau {
    Eigen::MatrixXd a;        // rows x cols
    Eigen::VectorXd b;        // rhs, kept >= 0
    std::vector<int> basis;   // basic column per row
    std::vector<bool> allowed;
    Eigen::VectorXd reduced;  // reduced costs of the current objective

    int rows() const { return static_cast<int>(a.rows()); }
    int cols() const { return static_cast<int>(a.cols()); }

    void pivot(int row, int col) {
        const double p = a(row, col);
        a.row(row) /= p;
        b(row) /= p;
        for (int i = 0; i < rows(); ++i) {
            if (i == row) continue;
            const double f = a(i, col);
            if (f == 0.0) continue;
            a.row(i) -= f * a.row(row);
            b(i) -= f * b(row);
            if (b(i) < 0.0 && b(i) > -kTol) b(i) = 0.0;
        }
        const double rf = reduced(col);
        if (rf != 0.0) reduced -= rf * a.row(row).transpose();
        basis[static_cast<size_t>(row)] = col;
    }

    // Bland's rule: first allowed improving column; leaving row by minimum
    // ratio with ties broken on the smallest basic column index.
    // Returns false at optimality; throws on unboundedness.
    bool step() {
        int enter = -1;
        for (int j = 0; j < cols(); ++j) {
            if (allowed[static_cast<size_t>(j)] && reduced(j) < -kTol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return false;
        int leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < rows(); ++i) {
            const double aie = a(i, enter);
            if (aie > kTol) {
                const double ratio = b(i) / aie;
                if (ratio < best - kTol ||
                    (ratio < best + kTol && (leave < 0 || basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]))) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) throw std::runtime_error("lp: unbounded");
        pivot(leave, enter);
        return true;
    }

    void run() {
        for (int it = 0; it < kMaxIterations; ++it) {
            if (!step()) return;
        }
        throw std::runtime_error("lp: iteration limit exceeded");
    }

    void set_objective(const Eigen::VectorXd& cost) {
        reduced = cost;
        for (int i = 0; i < rows(); ++i) {
            const int bc = basis[static_cast<size_t>(i)];
            const double cb = cost(bc);
            if (cb != 0.0) reduced -= cb * a.row(i).transpose();
        }
    }
};

} // namespace

Solution solve(const Problem& problem) {
    const int n = problem.n_vars();
    if (problem.lower.size() != n || problem.upper.size() != n)
        throw std::invalid_argument("lp: bounds size mismatch");

    // Map variables to non-negative standard form.
    std::vector<VarMap> vmap(static_cast<size_t>(n));
    int n_struct = 0;
    struct UpperRow {
        int var;
        double range;
    };
    std::vector<UpperRow> upper_rows;
    for (int j = 0; j < n; ++j) {
        const double lo = problem.lower(j), hi = problem.upper(j);
        if (lo > hi) throw std::invalid_argument("lp: lower bound above upper bound");
        VarMap& m = vmap[static_cast<size_t>(j)];
        if (finite(lo) && finite(hi) && hi - lo < kTol) {
            m.kind = VarMap::fixed;
            m.offset = lo;
        } else if (finite(lo)) {
            m.kind = VarMap::shifted;
            m.offset = lo;
            m.col_a = n_struct++;
            if (finite(hi)) upper_rows.push_back({j, hi - lo});
        } else if (finite(hi)) {
            m.kind = VarMap::mirrored;
            m.offset = hi;
            m.col_a = n_struct++;
        } else {
            m.kind = VarMap::split;
            m.col_a = n_struct++;
            m.col_b = n_struct++;
        }
    }

    const int m_user = static_cast<int>(problem.constraints.size());
    const int m_total = m_user + static_cast<int>(upper_rows.size());

    Eigen::MatrixXd rows_a = Eigen::MatrixXd::Zero(m_total, n_struct);
    Eigen::VectorXd rows_b = Eigen::VectorXd::Zero(m_total);
    std::vector<Relation> rel(static_cast<size_t>(m_total));

    for (int i = 0; i < m_user; ++i) {
        const Constraint& c = problem.constraints[static_cast<size_t>(i)];
        if (c.coefficients.size() != n) throw std::invalid_argument("lp: constraint size mismatch");
        double rhs = c.rhs;
        for (int j = 0; j < n; ++j) {
            const double coef = c.coefficients(j);
            if (coef == 0.0) continue;
            const VarMap& m = vmap[static_cast<size_t>(j)];
            switch (m.kind) {
                case VarMap::fixed: rhs -= coef * m.offset; break;
                case VarMap::shifted:
                    rows_a(i, m.col_a) += coef;
                    rhs -= coef * m.offset;
                    break;
                case VarMap::mirrored:
                    rows_a(i, m.col_a) -= coef;
                    rhs -= coef * m.offset;
                    break;
                case VarMap::split:
                    rows_a(i, m.col_a) += coef;
                    rows_a(i, m.col_b) -= coef;
                    break;
            }
        }
        rows_b(i) = rhs;
        rel[static_cast<size_t>(i)] = c.relation;
    }
    for (size_t k = 0; k < upper_rows.size(); ++k) {
        const int i = m_user + static_cast<int>(k);
        rows_a(i, vmap[static_cast<size_t>(upper_rows[k].var)].col_a) = 1.0;
        rows_b(i) = upper_rows[k].range;
        rel[static_cast<size_t>(i)] = Relation::le;
    }

    for (int i = 0; i < m_total; ++i) {
        if (rows_b(i) < 0.0) {
            rows_a.row(i) *= -1.0;
            rows_b(i) *= -1.0;
            rel[static_cast<size_t>(i)] = rel[static_cast<size_t>(i)] == Relation::le    ? Relation::ge
                                          : rel[static_cast<size_t>(i)] == Relation::ge ? Relation::le
                                                                                        : Relation::eq;
        }
    }

    // Count slack and artificial columns.
    int n_slack = 0, n_art = 0;
    for (auto r : rel) {
        if (r != Relation::eq) ++n_slack;
        if (r != Relation::le) ++n_art;
    }
    const int total_cols = n_struct + n_slack + n_art;

    Tableau t;
    t.a = Eigen::MatrixXd::Zero(m_total, total_cols);
    t.a.leftCols(n_struct) = rows_a;
    t.b = rows_b;
    t.basis.assign(static_cast<size_t>(m_total), -1);
    t.allowed.assign(static_cast<size_t>(total_cols), true);

    int slack_at = n_struct, art_at = n_struct + n_slack;
    std::vector<int> artificial_of_row(static_cast<size_t>(m_total), -1);
    for (int i = 0; i < m_total; ++i) {
        switch (rel[static_cast<size_t>(i)]) {
            case Relation::le:
                t.a(i, slack_at) = 1.0;
                t.basis[static_cast<size_t>(i)] = slack_at++;
                break;
            case Relation::ge:
                t.a(i, slack_at) = -1.0;
                ++slack_at;
                t.a(i, art_at) = 1.0;
                artificial_of_row[static_cast<size_t>(i)] = art_at;
                t.basis[static_cast<size_t>(i)] = art_at++;
                break;
            case Relation::eq:
                t.a(i, art_at) = 1.0;
                artificial_of_row[static_cast<size_t>(i)] = art_at;
                t.basis[static_cast<size_t>(i)] = art_at++;
                break;
        }
    }

    Solution sol;

    // Phase 1: minimize the artificial total.
    if (n_art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total_cols);
        phase1.segment(n_struct + n_slack, n_art).setOnes();
        t.set_objective(phase1);
        t.run();
        double art_sum = 0.0;
        for (int i = 0; i < m_total; ++i) {
            if (t.basis[static_cast<size_t>(i)] >= n_struct + n_slack) art_sum += t.b(i);
        }
        const double scale = std::max(1.0, rows_b.cwiseAbs().maxCoeff());
        if (art_sum > kFeasTol * scale) {
            sol.status = SolveStatus::infeasible;
            for (int i = 0; i < m_total; ++i) {
                if (t.basis[static_cast<size_t>(i)] >= n_struct + n_slack && t.b(i) > kFeasTol * scale &&
                    i < m_user)
                    sol.infeasible_constraints.push_back(problem.constraints[static_cast<size_t>(i)].name);
            }
            return sol;
        }
        // Drive zero-level artificials out of the basis; rows that will not
        // pivot are redundant and get neutralized.
        for (int i = 0; i < m_total; ++i) {
            if (t.basis[static_cast<size_t>(i)] < n_struct + n_slack) continue;
            int col = -1;
            for (int j = 0; j < n_struct + n_slack; ++j) {
                if (t.allowed[static_cast<size_t>(j)] && std::abs(t.a(i, j)) > kTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                t.pivot(i, col);
            } else {
                t.a.row(i).setZero();
                const int art = artificial_of_row[static_cast<size_t>(i)];
                t.a(i, art) = 1.0;
                t.b(i) = 0.0;
            }
        }
        for (int j = n_struct + n_slack; j < total_cols; ++j) t.allowed[static_cast<size_t>(j)] = false;
    }

    // Phase 2.
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_cols);
    for (int j = 0; j < n; ++j) {
        const VarMap& m = vmap[static_cast<size_t>(j)];
        const double c = problem.objective(j);
        if (c == 0.0) continue;
        switch (m.kind) {
            case VarMap::fixed: break;
            case VarMap::shifted: cost(m.col_a) += c; break;
            case VarMap::mirrored: cost(m.col_a) -= c; break;
            case VarMap::split:
                cost(m.col_a) += c;
                cost(m.col_b) -= c;
                break;
        }
    }
    t.set_objective(cost);
    try {
        t.run();
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()) == "lp: unbounded") {
            sol.status = SolveStatus::unbounded;
            return sol;
        }
        throw;
    }

    Eigen::VectorXd y = Eigen::VectorXd::Zero(total_cols);
    for (int i = 0; i < m_total; ++i) y(t.basis[static_cast<size_t>(i)]) = t.b(i);

    sol.x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const VarMap& m = vmap[static_cast<size_t>(j)];
        switch (m.kind) {
            case VarMap::fixed: sol.x(j) = m.offset; break;
            case VarMap::shifted: sol.x(j) = m.offset + y(m.col_a); break;
            case VarMap::mirrored: sol.x(j) = m.offset - y(m.col_a); break;
            case VarMap::split: sol.x(j) = y(m.col_a) - y(m.col_b); break;
        }
    }
    sol.objective = problem.objective.dot(sol.x);
    sol.status = SolveStatus::optimal;
    return sol;
}

} // namespace lp
