#include "itslb/simplex.hpp"

#include <algorithm>
#include <cassert>

namespace itslb {

Rat rat_floor(const Rat& q) {
    Int f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return Rat(f);
}

Rat rat_ceil(const Rat& q) {
    Int c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return Rat(c);
}

namespace {

// Dense tableau simplex on: maximize c^T y, A y = b, y >= 0, with b >= 0.
struct Tableau {
    int n = 0;                           // columns (variables)
    std::vector<std::vector<Rat>> rows;  // each n+1; last entry is rhs
    std::vector<Rat> obj;                // n+1; last entry is current objective value
    std::vector<int> basis;

    void pivot(int r, int c) {
        Rat p = rows[r][c];
        for (auto& v : rows[r]) v /= p;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<int>(i) == r) continue;
            Rat f = rows[i][c];
            if (f == 0) continue;
            for (int j = 0; j <= n; ++j) rows[i][j] -= f * rows[r][j];
        }
        Rat f = obj[c];
        if (f != 0)
            for (int j = 0; j <= n; ++j) obj[j] -= f * rows[r][j];
        basis[r] = c;
    }

    // Bland's rule; returns false when unbounded.
    bool run(const std::vector<bool>& allowed) {
        while (true) {
            int enter = -1;
            for (int j = 0; j < n; ++j)
                if (allowed[j] && obj[j] > 0) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            Rat best;
            for (size_t i = 0; i < rows.size(); ++i) {
                if (rows[i][enter] <= 0) continue;
                Rat ratio = rows[i][n] / rows[i][enter];
                if (leave < 0 || ratio < best ||
                    (ratio == best && basis[i] < basis[leave]))
                    leave = static_cast<int>(i), best = ratio;
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

LpResult lp_maximize(int nvars, const std::vector<LinCon>& cons, const std::vector<Rat>& objective) {
    // columns: 2*nvars split vars, then one slack/surplus per inequality, then artificials
    int nsplit = 2 * nvars;
    int nslack = 0;
    for (const auto& c : cons)
        if (c.rel != LinRel::Eq) ++nslack;
    int m = static_cast<int>(cons.size());
    int ncols = nsplit + nslack + m;  // one artificial per row (some unused)

    Tableau t;
    t.n = ncols;
    t.rows.assign(m, std::vector<Rat>(ncols + 1, Rat(0)));
    t.obj.assign(ncols + 1, Rat(0));
    t.basis.assign(m, -1);

    int slack_at = nsplit;
    for (int i = 0; i < m; ++i) {
        const auto& c = cons[i];
        auto& row = t.rows[i];
        for (const auto& [v, a] : c.terms) {
            row[2 * v] += a;
            row[2 * v + 1] -= a;
        }
        row[ncols] = c.rhs;
        if (c.rel == LinRel::Le) row[slack_at] = 1, ++slack_at;
        if (c.rel == LinRel::Ge) row[slack_at] = -1, ++slack_at;
        if (row[ncols] < 0)
            for (int j = 0; j <= ncols; ++j) row[j] = -row[j];
        int art = nsplit + nslack + i;
        row[art] = 1;
        t.basis[i] = art;
    }

    // phase 1: maximize -sum(artificials)
    for (int i = 0; i < m; ++i) {
        int art = nsplit + nslack + i;
        t.obj[art] = -1;
    }
    for (int i = 0; i < m; ++i) {
        // eliminate basic artificial from the objective row
        Rat f = t.obj[t.basis[i]];
        if (f != 0)
            for (int j = 0; j <= ncols; ++j) t.obj[j] -= f * t.rows[i][j];
    }
    std::vector<bool> all(ncols, true);
    t.run(all);  // phase 1 cannot be unbounded (objective <= 0)
    if (t.obj[ncols] != 0) return LpResult{LpStatus::Infeasible, {}, Rat(0)};

    // drive artificials out of the basis
    for (int i = 0; i < m; ++i) {
        if (t.basis[i] < nsplit + nslack) continue;
        int col = -1;
        for (int j = 0; j < nsplit + nslack; ++j)
            if (t.rows[i][j] != 0) {
                col = j;
                break;
            }
        if (col >= 0) t.pivot(i, col);
        // otherwise the row is redundant; leave the artificial basic at zero
    }

    // phase 2
    std::vector<bool> allowed(ncols, true);
    for (int j = nsplit + nslack; j < ncols; ++j) allowed[j] = false;
    t.obj.assign(ncols + 1, Rat(0));
    for (int v = 0; v < nvars; ++v) {
        t.obj[2 * v] = objective[v];
        t.obj[2 * v + 1] = -objective[v];
    }
    for (int i = 0; i < m; ++i) {
        Rat f = t.obj[t.basis[i]];
        if (f != 0)
            for (int j = 0; j <= ncols; ++j) t.obj[j] -= f * t.rows[i][j];
    }
    bool bounded = t.run(allowed);

    std::vector<Rat> split(ncols, Rat(0));
    for (int i = 0; i < m; ++i) split[t.basis[i]] = t.rows[i][ncols];
    std::vector<Rat> point(nvars, Rat(0));
    for (int v = 0; v < nvars; ++v) point[v] = split[2 * v] - split[2 * v + 1];
    Rat value(0);
    for (int v = 0; v < nvars; ++v) value += objective[v] * point[v];
    return LpResult{bounded ? LpStatus::Optimal : LpStatus::Unbounded, std::move(point), value};
}

namespace {

void mip_rec(int nvars, std::vector<LinCon>& cons, const std::vector<Rat>& objective,
             const std::vector<bool>& integer, int& nodes_left, bool& exhausted,
             std::optional<LpResult>& best) {
    if (nodes_left-- <= 0) {
        exhausted = true;
        return;
    }
    LpResult r = lp_maximize(nvars, cons, objective);
    if (r.status == LpStatus::Infeasible) return;
    if (r.status == LpStatus::Optimal && best && r.value <= best->value) return;  // bound
    int frac = -1;
    for (int v = 0; v < nvars; ++v)
        if (integer[v] && !is_integer(r.point[v])) {
            frac = v;
            break;
        }
    if (frac < 0 && r.status == LpStatus::Optimal) {
        if (!best || r.value > best->value) best = r;
        return;
    }
    if (frac < 0) {
        // unbounded relaxation with integral witness point: keep it as feasible,
        // flag exhaustion since the true optimum is unbounded
        if (!best) best = LpResult{LpStatus::Unbounded, r.point, r.value};
        exhausted = true;
        return;
    }
    Rat val = r.point[frac];
    {
        auto down = cons;
        down.push_back(LinCon{{{frac, Rat(1)}}, LinRel::Le, rat_floor(val)});
        mip_rec(nvars, down, objective, integer, nodes_left, exhausted, best);
    }
    {
        auto up = cons;
        up.push_back(LinCon{{{frac, Rat(1)}}, LinRel::Ge, rat_ceil(val)});
        mip_rec(nvars, up, objective, integer, nodes_left, exhausted, best);
    }
}

}  // namespace

std::optional<LpResult> mip_maximize(int nvars, const std::vector<LinCon>& cons,
                                     const std::vector<Rat>& objective,
                                     const std::vector<bool>& integer, int node_cap,
                                     bool* exhausted) {
    std::optional<LpResult> best;
    bool ex = false;
    int nodes = node_cap;
    auto work = cons;
    mip_rec(nvars, work, objective, integer, nodes, ex, best);
    if (exhausted) *exhausted = ex;
    return best;
}

}  // namespace itslb
