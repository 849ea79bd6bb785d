"""Exact-rational linear feasibility.

Phase-1 simplex over Fractions with Bland's rule, deciding whether
Ax = b, x >= 0 has a solution.  Either answer ships with an exactly
checkable certificate: a rational feasible point, or a Farkas vector y
with y'A <= 0 componentwise and y'b > 0.  Everything is exact; the caller
is responsible for rationalizing float data before building the system.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def _as_fraction_rows(rows, rhs):
    a = [[Fraction(v) for v in row] for row in rows]
    b = [Fraction(v) for v in rhs]
    if len(a) != len(b):
        raise ValueError("row count does not match right-hand side")
    if a:
        n = len(a[0])
        if any(len(row) != n for row in a):
            raise ValueError("ragged constraint matrix")
    return a, b


def verify_feasible(rows, rhs, x):
    """Exact check that x solves Ax = b with x >= 0."""
    a, b = _as_fraction_rows(rows, rhs)
    xs = [Fraction(v) for v in x]
    if a and len(xs) != len(a[0]):
        return False
    if any(v < 0 for v in xs):
        return False
    for row, target in zip(a, b):
        if sum(c * v for c, v in zip(row, xs)) != target:
            return False
    return True


def verify_farkas(rows, rhs, y):
    """Exact check that y proves Ax = b, x >= 0 infeasible."""
    a, b = _as_fraction_rows(rows, rhs)
    ys = [Fraction(v) for v in y]
    if len(ys) != len(a):
        return False
    if sum(yv * bv for yv, bv in zip(ys, b)) <= 0:
        return False
    n = len(a[0]) if a else 0
    for j in range(n):
        if sum(ys[i] * a[i][j] for i in range(len(a))) > 0:
            return False
    return True


def lp_feasible(rows, rhs):
    """Decide Ax = b, x >= 0 exactly.

    Returns ("SAT", x) or ("UNSAT", y); both certificates re-verify via
    verify_feasible / verify_farkas before being handed back.
    """
    a, b = _as_fraction_rows(rows, rhs)
    m = len(a)
    n = len(a[0]) if a else 0
    if m == 0:
        return "SAT", [ZERO] * n

    # orient every right-hand side nonnegative so the artificial start is
    # basic feasible
    flipped = []
    for i in range(m):
        if b[i] < 0:
            a[i] = [-v for v in a[i]]
            b[i] = -b[i]
            flipped.append(True)
        else:
            flipped.append(False)

    # tableau columns: n structural, m artificial, then the rhs
    tab = [a[i] + [ONE if k == i else ZERO for k in range(m)] + [b[i]]
           for i in range(m)]
    basis = [n + i for i in range(m)]

    # phase-1 objective row: reduced costs of minimizing the artificial sum,
    # kept in the "w_j = y'a_j - c_j" convention (positive w enters)
    w = [sum(tab[i][j] for i in range(m)) for j in range(n + m)]
    w_rhs = sum(tab[i][n + m] for i in range(m))
    for j in range(n, n + m):
        w[j] -= ONE

    while True:
        enter = next((j for j in range(n) if j not in basis and w[j] > 0),
                     None)
        if enter is None:
            break
        pivot_row = None
        best = None
        for i in range(m):
            coef = tab[i][enter]
            if coef > 0:
                ratio = tab[i][n + m] / coef
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[pivot_row]):
                    best = ratio
                    pivot_row = i
        if pivot_row is None:
            # the artificial objective is bounded below by zero, so an
            # unbounded improving direction cannot occur
            raise RuntimeError("phase-1 objective unbounded; invalid tableau")
        piv = tab[pivot_row][enter]
        tab[pivot_row] = [v / piv for v in tab[pivot_row]]
        for i in range(m):
            if i != pivot_row and tab[i][enter] != 0:
                f = tab[i][enter]
                tab[i] = [v - f * p for v, p in zip(tab[i], tab[pivot_row])]
        f = w[enter]
        w = [v - f * p for v, p in zip(w, tab[pivot_row][:n + m])]
        w_rhs -= f * tab[pivot_row][n + m]
        basis[pivot_row] = enter

    if w_rhs == 0:
        x = [ZERO] * n
        for i, var in enumerate(basis):
            if var < n:
                x[var] = tab[i][n + m]
        if not verify_feasible(rows, rhs, x):
            raise RuntimeError("simplex returned a non-verifying point")
        return "SAT", x

    y = [w[n + i] + ONE for i in range(m)]
    y = [-v if flip else v for v, flip in zip(y, flipped)]
    if not verify_farkas(rows, rhs, y):
        raise RuntimeError("simplex returned a non-verifying Farkas vector")
    return "UNSAT", y
