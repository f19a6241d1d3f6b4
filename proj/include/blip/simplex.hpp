#pragma once

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

#include "blip/scalar.hpp"

namespace blip {

/// One ranged constraint: lower ≤ Σ coeffᵢ·x[idxᵢ] ≤ upper.
template <ScalarType S>
struct RangedRow {
    std::vector<std::pair<int, S>> coeffs;
    S lower;
    S upper;
};

template <ScalarType S>
struct LpSolution {
    S objective;
    std::vector<S> x;
    long iterations = 0;
};

/// Bounded-variable primal simplex. Entering variables are priced by the
/// largest reduced cost; after a long streak of degenerate pivots the rule
/// switches to Bland's permanently, which restores the termination
/// guarantee on the degenerate geometry the Lipschitz polytopes exhibit
/// without paying Bland's step count on every solve. Instantiated with
/// Rational it pivots exactly. The caller must arrange that x = lo is
/// feasible (true for every program built here); there is no phase one.
template <ScalarType S>
class BoundedSimplex {
public:
    BoundedSimplex(std::vector<S> objective, std::vector<S> lo, std::vector<S> hi,
                   const std::vector<RangedRow<S>>& rows)
        : n_(static_cast<int>(objective.size())), m_(static_cast<int>(rows.size())) {
        if (lo.size() != objective.size() || hi.size() != objective.size())
            throw PreconditionError("objective and bound sizes differ");
        const int total = n_ + m_;
        lo_ = std::move(lo);
        hi_ = std::move(hi);
        cost_.assign(total, S(0));
        for (int j = 0; j < n_; ++j) {
            if (lo_[j] > hi_[j]) throw PreconditionError("empty variable range");
            cost_[j] = objective[j];
        }
        reduced_ = cost_;

        tableau_ = Matrix::Zero(m_, total);
        basis_.resize(m_);
        basic_value_.resize(m_);
        status_.assign(total, AtLower);
        for (int i = 0; i < m_; ++i) {
            const auto& row = rows[i];
            if (row.lower > row.upper) throw PreconditionError("empty constraint range");
            S at_lo(0);
            for (const auto& [j, a] : row.coeffs) {
                if (j < 0 || j >= n_) throw PreconditionError("constraint index out of range");
                tableau_(i, j) += a;
                at_lo += a * lo_[j];
            }
            tableau_(i, n_ + i) = S(1);
            // slack s = upper − Σa·x ranges over [0, upper − lower]
            lo_.push_back(S(0));
            hi_.push_back(S(row.upper - row.lower));
            basis_[i] = n_ + i;
            basic_value_[i] = S(row.upper - at_lo);
            status_[n_ + i] = Basic;
            if (basic_value_[i] < S(0) || basic_value_[i] > hi_[n_ + i])
                throw PreconditionError("x = lo is not feasible for the given rows");
        }
    }

    LpSolution<S> solve() {
        const int total = n_ + m_;
        const long max_iters = 50000L + 400L * total;
        constexpr long degenerate_switch = 64;
        long iter = 0, degenerate_streak = 0;
        bool blands_rule = false;
        while (true) {
            if (++iter > max_iters) throw InternalError("simplex iteration cap exceeded");

            int enter = -1;
            S best_score(0);
            for (int j = 0; j < total; ++j) {
                if (status_[j] == Basic || lo_[j] == hi_[j]) continue;
                const S score = status_[j] == AtLower ? reduced_[j] : S(-reduced_[j]);
                if (!(score > entering_tol())) continue;
                if (blands_rule) {
                    enter = j; // smallest eligible index
                    break;
                }
                if (score > best_score) {
                    best_score = score;
                    enter = j;
                }
            }
            if (enter < 0) break;

            const bool up = status_[enter] == AtLower; // direction of movement
            // blocking step lengths; the entering variable's own span competes
            S best_t = hi_[enter] - lo_[enter];
            int block_var = enter, block_row = -1;
            bool block_at_upper = false;
            for (int i = 0; i < m_; ++i) {
                const S& y = tableau_(i, enter);
                if (scalar_abs(y) <= pivot_tol()) continue;
                const bool rises = up ? y < S(0) : y > S(0); // basic value moves up?
                const int k = basis_[i];
                S room = rises ? S(hi_[k] - basic_value_[i]) : S(basic_value_[i] - lo_[k]);
                if (room < S(0)) room = S(0);
                S t = room / scalar_abs(y);
                bool better = t < best_t;
                if (t == best_t) {
                    // ties: smallest variable index under Bland (the flip
                    // candidate counts as index `enter`), largest pivot otherwise
                    if (blands_rule) better = k < block_var;
                    else if (block_row >= 0)
                        better = scalar_abs(y) > scalar_abs(tableau_(block_row, enter));
                }
                if (better) {
                    best_t = t;
                    block_var = k;
                    block_row = i;
                    block_at_upper = rises;
                }
            }
            if (best_t > S(0)) {
                degenerate_streak = 0;
            } else if (++degenerate_streak > degenerate_switch) {
                blands_rule = true;
            }

            // move the entering variable by best_t and update the basics
            for (int i = 0; i < m_; ++i) {
                const S& y = tableau_(i, enter);
                if (y == S(0)) continue;
                basic_value_[i] += (up ? S(-best_t) : best_t) * y;
            }
            if (block_row < 0) {
                status_[enter] = up ? AtUpper : AtLower; // bound flip
                continue;
            }

            const S enter_value =
                up ? S(lo_[enter] + best_t) : S(hi_[enter] - best_t);
            status_[basis_[block_row]] = block_at_upper ? AtUpper : AtLower;
            status_[enter] = Basic;
            basis_[block_row] = enter;
            basic_value_[block_row] = enter_value;

            const S pivot = tableau_(block_row, enter);
            tableau_.row(block_row) /= pivot;
            for (int i = 0; i < m_; ++i) {
                if (i == block_row) continue;
                const S f = tableau_(i, enter);
                if (f == S(0)) continue;
                tableau_.row(i) -= tableau_.row(block_row) * f;
                tableau_(i, enter) = S(0);
            }
            const S d = reduced_[enter];
            if (d != S(0)) {
                for (int j = 0; j < total; ++j) reduced_[j] -= d * tableau_(block_row, j);
                reduced_[enter] = S(0);
            }
        }

        LpSolution<S> sol;
        sol.iterations = iter;
        sol.x.resize(n_);
        for (int j = 0; j < n_; ++j)
            sol.x[j] = status_[j] == AtLower ? lo_[j] : hi_[j];
        for (int i = 0; i < m_; ++i)
            if (basis_[i] < n_) sol.x[basis_[i]] = basic_value_[i];
        sol.objective = S(0);
        for (int j = 0; j < n_; ++j) sol.objective += cost_[j] * sol.x[j];
        return sol;
    }

private:
    using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    enum Status { Basic, AtLower, AtUpper };

    static S entering_tol() {
        if constexpr (is_exact_scalar_v<S>) return S(0);
        else return S(1e-11);
    }
    static S pivot_tol() {
        if constexpr (is_exact_scalar_v<S>) return S(0);
        else return S(1e-11);
    }

    int n_, m_;
    Matrix tableau_;
    std::vector<S> lo_, hi_, cost_, reduced_, basic_value_;
    std::vector<int> basis_;
    std::vector<Status> status_;
};

template <ScalarType S>
LpSolution<S> maximize_box_lp(std::vector<S> objective, std::vector<S> lo, std::vector<S> hi,
                              const std::vector<RangedRow<S>>& rows) {
    return BoundedSimplex<S>(std::move(objective), std::move(lo), std::move(hi), rows).solve();
}

} // namespace blip
