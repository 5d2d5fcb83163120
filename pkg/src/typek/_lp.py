"""Small exact-rational simplex solver.

Just enough linear programming for the geometry module: convex-hull
membership (a feasibility problem) and strict-dominance tests (a tiny
optimisation). Everything runs on ``fractions.Fraction`` with Bland's rule,
so results are exact and the iteration always terminates.
"""

from __future__ import annotations

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _pivot(tableau, basis, row, col):
    piv = tableau[row][col]
    tableau[row] = [v / piv for v in tableau[row]]
    for i in range(len(tableau)):
        if i != row and tableau[i][col] != 0:
            factor = tableau[i][col]
            tableau[i] = [
                v - factor * w for v, w in zip(tableau[i], tableau[row])
            ]
    basis[row] = col


def _optimize(tableau, basis, costs, ncols):
    """Run simplex iterations to maximise ``costs`` over the tableau.

    Bland's rule on both the entering and leaving choice, which rules out
    cycling. Returns 'optimal' or 'unbounded'.
    """
    m = len(tableau)
    while True:
        entering = None
        basic = set(basis)
        for j in range(ncols):
            if j in basic:
                continue
            zj = sum(costs[basis[i]] * tableau[i][j] for i in range(m))
            if costs[j] - zj > 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        leaving = None
        best_ratio = None
        for i in range(m):
            coeff = tableau[i][entering]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    leaving, best_ratio = i, ratio
        if leaving is None:
            return "unbounded"
        _pivot(tableau, basis, leaving, entering)


def simplex_max(c, A, b):
    """Maximise c.x subject to A x = b, x >= 0.

    Returns (status, x, value) where status is 'optimal', 'infeasible' or
    'unbounded'; x and value are None unless optimal.
    """
    m = len(A)
    n = len(c)
    rows = [[Fraction(v) for v in row] for row in A]
    rhs = [Fraction(v) for v in b]
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    # Phase 1: artificial variables, minimise their sum.
    ncols = n + m
    tableau = [
        rows[i] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]]
        for i in range(m)
    ]
    basis = [n + i for i in range(m)]
    phase1_costs = [ZERO] * n + [-ONE] * m
    _optimize(tableau, basis, phase1_costs, ncols)
    infeasibility = sum(
        tableau[i][-1] for i in range(m) if basis[i] >= n
    )
    if infeasibility != 0:
        return "infeasible", None, None

    # Drive leftover zero-level artificials out, dropping redundant rows.
    i = 0
    while i < len(tableau):
        if basis[i] >= n:
            col = next((j for j in range(n) if tableau[i][j] != 0), None)
            if col is None:
                del tableau[i]
                del basis[i]
                continue
            _pivot(tableau, basis, i, col)
        i += 1

    # Phase 2 on the original columns.
    tableau = [row[:n] + [row[-1]] for row in tableau]
    costs = [Fraction(v) for v in c]
    status = _optimize(tableau, basis, costs, n)
    if status == "unbounded":
        return "unbounded", None, None
    x = [ZERO] * n
    for i, var in enumerate(basis):
        x[var] = tableau[i][-1]
    value = sum(costs[j] * x[j] for j in range(n))
    return "optimal", x, value
