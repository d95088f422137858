"""Integer programs max{c.x : Hx <= b} whose n x n row-submatrices are all nonsingular.

Pipeline: exact LP optimum by basis enumeration, change of variables to
the Hermite block form around the optimal basis, Smith form of the
non-unit block, then a dynamic program over the resulting group problem

    min w.x  s.t.  G x = g (mod S),  h.x <= h0,  0 <= x <= n*Delta,

whose optimum is mapped back to an integer point of the original program.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .errors import (
    CrossCheckError,
    InfeasibleError,
    InternalInconsistencyError,
    ParameterError,
    ResourceLimitError,
    StructureError,
    UnboundedError,
    UnsupportedShapeError,
)
from .linalg import (
    HnfForm,
    IntMatrix,
    SnfDecomposition,
    adjugate,
    as_matrix,
    det,
    has_singular_rank_submatrix,
    hnf_normalize,
    max_rank_minor,
    rank,
    snf,
)

GROUP = "group"
BRUTE = "brute"

DEFAULT_MAX_STATES = 5_000_000
DEFAULT_MAX_POINTS = 20_000_000


@dataclass(frozen=True)
class IlpInstance:
    """max c.x subject to H x <= b over integer x.

    With ``strict`` (the default) every n x n row-submatrix of H must be
    nonsingular; only the brute-force route accepts other matrices.
    """

    H: IntMatrix
    b: tuple[int, ...]
    c: tuple[int, ...]
    strict: bool = True

    def __post_init__(self):
        H = as_matrix(self.H)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))
        if len(self.b) != H.rows or len(self.c) != H.cols:
            raise StructureError(f"b and c must have lengths {H.rows} and {H.cols}")
        if H.cols < 1 or H.rows < H.cols or rank(H) != H.cols:
            raise StructureError(f"constraint matrix of shape {H.shape} must have rank {H.cols}")
        if self.strict and has_singular_rank_submatrix(H):
            raise UnsupportedShapeError("constraint matrix has a singular n x n row-submatrix")

    @property
    def n(self) -> int:
        return self.H.cols

    @property
    def d(self) -> int:
        return self.H.rows


@dataclass(frozen=True)
class LpVertex:
    point: tuple[Fraction, ...]
    basis: tuple[int, ...]
    objective: Fraction


@dataclass(frozen=True)
class IlpSolution:
    x: tuple[int, ...]
    objective: int
    certificate: bool
    method: str = GROUP
    states: int = 0


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _basis_solution(H: IntMatrix, rhs: Sequence[int], rows: Sequence[int]):
    """Solve H_I x = rhs_I exactly; None when H_I is singular."""
    sub = H.submatrix(rows)
    dv = det(sub)
    if dv == 0:
        return None, None, None
    adj = adjugate(sub)
    return sub, adj, dv


def lp_is_bounded(H, c) -> bool:
    """True iff c lies in the cone of the rows of H.

    By duality, max c.x over a nonempty {Hx <= b} is finite iff
    H^T y = c has a solution y >= 0, and such a solution can be taken
    basic, i.e. supported on n independent rows.
    """
    H = as_matrix(H)
    for rows in combinations(range(H.rows), H.cols):
        sub, adj, dv = _basis_solution(H, (), rows)
        if sub is None:
            continue
        y = adj.T.apply(c)
        if all(Fraction(v, dv) >= 0 for v in y):
            return True
    return False


def solve_lp_relaxation(inst: IlpInstance) -> LpVertex:
    """Optimal vertex of the LP relaxation by enumerating every basis.

    Ties in the objective go to the lexicographically smallest basis.
    """
    H, b, c = inst.H, inst.b, inst.c
    best = None
    bounded = False
    feasible = False
    for rows in combinations(range(H.rows), H.cols):
        sub, adj, dv = _basis_solution(H, (), rows)
        if sub is None:
            continue
        if not bounded and all(Fraction(v, dv) >= 0 for v in adj.T.apply(c)):
            bounded = True
        v = tuple(Fraction(x, dv) for x in adj.apply([b[i] for i in rows]))
        if any(_dot(H.row(i), v) > b[i] for i in range(H.rows)):
            continue
        feasible = True
        obj = _dot(c, v)
        if best is None or obj > best.objective:
            best = LpVertex(v, rows, obj)
    if not feasible:
        raise InfeasibleError("the LP relaxation is infeasible")
    if not bounded:
        raise UnboundedError("the LP relaxation is unbounded")
    return best


# -- reduction ------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionContext:
    """Everything needed to map a group solution back to x."""

    order: tuple[int, ...]
    form: HnfForm
    b_form: tuple[int, ...]
    c_form: tuple[int, ...]
    b_hat: tuple[int, ...]
    adj_B: IntMatrix
    snf: SnfDecomposition | None


@dataclass(frozen=True)
class GroupProblem:
    """min w.x, G x = g (mod S), h.x <= h0, x in [0, box_bound]^n.

    The program's optimum is ``-(offset + w.x / delta_small)``. ``h`` and
    ``h0`` are None when the matrix is square.
    """

    G: IntMatrix
    g: tuple[int, ...]
    S: tuple[int, ...]
    h: tuple[int, ...] | None
    h0: int | None
    w: tuple[int, ...]
    box_bound: int
    eta_cap: int
    delta: int
    delta_small: int
    offset: Fraction
    context: ReductionContext

    @property
    def n(self) -> int:
        return len(self.w)

    @property
    def k(self) -> int:
        return self.context.form.k

    @property
    def s(self) -> int:
        return self.context.form.s

    def h_bound(self) -> int:
        """Delta^2 (n + 3^s): the bound on ||h||_max, 3^s standing in for Delta^log2(3)."""
        return self.delta ** 2 * (self.n + 3 ** self.s)

    def is_feasible(self, x: Sequence[int]) -> bool:
        if len(x) != self.n or any(not 0 <= xi <= self.box_bound for xi in x):
            return False
        for i, mod in enumerate(self.S):
            if (_dot(self.G.row(i), x) - self.g[i]) % mod:
                return False
        if self.h is not None and _dot(self.h, x) > self.h0:
            return False
        return True


def _matvec(M: IntMatrix, v):
    return M.apply(v) if M.cols else (0,) * M.rows


def reduce_to_group_problem(inst: IlpInstance, vertex: LpVertex, delta: int | None = None) -> GroupProblem:
    H, b, c = inst.H, inst.b, inst.c
    n, d = inst.n, inst.d
    m = d - n
    if m >= 2:
        raise UnsupportedShapeError(f"the group reduction handles at most one extra row, got {m}")
    if delta is None:
        delta = max_rank_minor(H)

    order = tuple(vertex.basis) + tuple(i for i in range(d) if i not in vertex.basis)
    form = hnf_normalize(H.submatrix(order))
    if sorted(form.row_perm[:n]) != list(range(n)):
        raise InternalInconsistencyError("basis rows did not become the pivot rows")
    b_form = tuple(b[order[r]] for r in form.row_perm)
    c_form = form.col_transform.T.apply(c)
    k, s = form.k, form.s
    A, B, Abar, Bbar = form.blockA, form.blockB, form.blockAbar, form.blockBbar
    c_alpha, c_beta = c_form[:k], c_form[k:]
    b_top = b_form[:k]

    A_b_top = _matvec(A, b_top)
    b_hat = tuple(x - y for x, y in zip(b_form[k:n], A_b_top))
    delta_small = form.delta_small
    adj_B = adjugate(B) if s else IntMatrix.zeros(0, 0)

    # slack substitution: beta = B^{-1} (b_hat + A alpha~ - y), alpha~ = b_top - alpha
    if s:
        dec = snf(B)
        P = dec.P
        S = dec.diagonal
        PA = P @ A if k else IntMatrix.zeros(s, 0)
        G_rows = [
            [(-PA[i, j]) % S[i] for j in range(k)] + [P[i, j] % S[i] for j in range(s)]
            for i in range(s)
        ]
        G = IntMatrix.from_rows(G_rows, n)
        g = tuple(x % S[i] for i, x in enumerate(P.apply(b_hat)))
    else:
        dec = None
        S = ()
        G = IntMatrix.zeros(0, n)
        g = ()

    # w = (delta c_alpha - A^T adj(B)^T c_beta, adj(B)^T c_beta)
    w_y = adj_B.T.apply(c_beta) if s else ()
    At_wy = A.T.apply(w_y) if s and k else (0,) * k
    w = tuple(delta_small * ca - x for ca, x in zip(c_alpha, At_wy)) + tuple(w_y)

    # objective constant: -c_alpha.b_top - c_beta.B^{-1} b_hat
    beta_hat = adj_B.apply(b_hat) if s else ()
    offset = -Fraction(_dot(c_alpha, b_top)) - Fraction(_dot(c_beta, beta_hat), delta_small)

    h = h0 = None
    if m == 1:
        abar = Abar.row(0)
        bbar = Bbar.row(0)
        bbar_adj = adj_B.T.apply(bbar) if s else ()  # row vector Bbar adj(B)
        bbar_adj_A = A.T.apply(bbar_adj) if s and k else (0,) * k
        h = tuple(x - delta_small * y for x, y in zip(bbar_adj_A, abar)) + tuple(-x for x in bbar_adj)
        b_hat_d = b_form[n] - _dot(abar, b_top)
        h0 = delta_small * b_hat_d - _dot(bbar_adj, b_hat)

    return GroupProblem(
        G=G,
        g=g,
        S=tuple(S),
        h=h,
        h0=h0,
        w=w,
        box_bound=n * delta,
        eta_cap=n * n * delta ** 3 * (n + delta),
        delta=delta,
        delta_small=delta_small,
        offset=offset,
        context=ReductionContext(order, form, b_form, tuple(c_form), b_hat, adj_B, dec),
    )


# -- group dynamic program ---------------------------------------------------------


class GroupDynamicProgram:
    """sigma(l, gamma, eta) = min_z sigma(l-1, gamma - z G_l, eta - z h_l) + z w_l.

    Only congruence rows with modulus > 1 enter the state. ``eta`` is
    clamped into the range the remaining columns can actually reach, which
    keeps equal subproblems on a single memo key.
    """

    def __init__(self, gp: GroupProblem, max_states: int = DEFAULT_MAX_STATES):
        self.gp = gp
        self.max_states = max_states
        self.n = gp.n
        self.box = gp.box_bound
        live = [i for i, mod in enumerate(gp.S) if mod > 1]
        self.mods = tuple(gp.S[i] for i in live)
        self.cols = [tuple(gp.G[i, l] for i in live) for l in range(self.n)]
        self.target = tuple(gp.g[i] for i in live)
        self.h = gp.h if gp.h is not None else (0,) * self.n
        self.has_h = gp.h is not None
        self.w = gp.w
        self.memo: dict[tuple, tuple] = {}

        # reachable h-range and objective floor of the first l columns
        self.h_lo, self.h_hi, self.w_lo = [0], [0], [0]
        for l in range(self.n):
            self.h_lo.append(self.h_lo[-1] + min(0, self.h[l]) * self.box)
            self.h_hi.append(self.h_hi[-1] + max(0, self.h[l]) * self.box)
            self.w_lo.append(self.w_lo[-1] + min(0, self.w[l]) * self.box)

        self._level1: dict[tuple, list[int]] = {}
        if self.n:
            for z in range(self.box + 1):
                self._level1.setdefault(self._shift((0,) * len(self.mods), 0, -z), []).append(z)

    def _shift(self, gamma, l, z):
        """gamma - z * G_l reduced mod S."""
        return tuple((gi - z * ci) % mod for gi, ci, mod in zip(gamma, self.cols[l], self.mods))

    def root(self):
        # h0 is clamped to the reachable range by key(); eta_cap is only
        # reported, since Delta^2 (n + 3^s) can exceed Delta^2 (n + Delta)
        eta = self.gp.h0 if self.has_h else 0
        return self.key(self.n, self.target, eta)

    def key(self, l, gamma, eta):
        if eta < self.h_lo[l]:
            return None
        return (l, gamma, min(eta, self.h_hi[l]))

    def value(self, key):
        if key is None:
            return (math.inf, None, None)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        l, gamma, eta = key
        result = self._level_one(gamma, eta) if l == 1 else self._step(l, gamma, eta)
        self.memo[key] = result
        if len(self.memo) > self.max_states:
            raise ResourceLimitError(
                f"group dynamic program exceeded {self.max_states} states", len(self.memo)
            )
        return result

    def _level_one(self, gamma, eta):
        zs = self._level1.get(gamma)
        if not zs:
            return (math.inf, None, None)
        h1, w1 = self.h[0], self.w[0]
        lo, hi = 0, len(zs)
        if h1 > 0:
            hi = bisect_right(zs, eta // h1)
        elif h1 < 0:
            lo = bisect_left(zs, -(eta // -h1))
        elif eta < 0:
            return (math.inf, None, None)
        if lo >= hi:
            return (math.inf, None, None)
        z = zs[hi - 1] if w1 < 0 else zs[lo]
        return (z * w1, z, None)

    def _z_range(self, l, eta):
        """z values of column l that leave the remaining h-constraint satisfiable."""
        hl, lo_rest = self.h[l - 1], self.h_lo[l - 1]
        z_min, z_max = 0, self.box
        if hl > 0:
            z_max = min(z_max, (eta - lo_rest) // hl)
        elif hl < 0:
            z_min = max(z_min, -((eta - lo_rest) // -hl))
        return z_min, z_max

    def _step(self, l, gamma, eta):
        wl, hl = self.w[l - 1], self.h[l - 1]
        floor_rest = self.w_lo[l - 1]
        z_min, z_max = self._z_range(l, eta)
        zs = range(z_min, z_max + 1) if wl >= 0 else range(z_max, z_min - 1, -1)
        best = (math.inf, None, None)
        for z in zs:
            if z * wl + floor_rest >= best[0]:
                break
            sub = self.key(l - 1, self._shift(gamma, l - 1, z), eta - z * hl)
            val = self.value(sub)[0] + z * wl
            if val < best[0]:
                best = (val, z, sub)
        return best

    def reconstruct(self, key) -> tuple[int, ...]:
        x = [0] * self.n
        while key is not None:
            _, z, nxt = self.memo[key]
            x[key[0] - 1] = z
            key = nxt
        return tuple(x)

    def etas(self):
        return [key[2] for key in self.memo]


def group_dp_solve(gp: GroupProblem, max_states: int = DEFAULT_MAX_STATES):
    """Minimiser of the group problem, or None when it is infeasible.

    Returns ``(x, states)``; x is None for an infeasible problem.
    """
    dp = GroupDynamicProgram(gp, max_states)
    if gp.n == 0:
        return None, 0
    root = dp.root()
    value = dp.value(root)[0]
    if value == math.inf:
        return None, len(dp.memo)
    x = dp.reconstruct(root)
    if _dot(gp.w, x) != value or not gp.is_feasible(x):
        raise InternalInconsistencyError(f"group solution {x} does not certify value {value}")
    return x, len(dp.memo)


# -- recovery -------------------------------------------------------------------------


def recover_solution(inst: IlpInstance, gp: GroupProblem, x_group: Sequence[int], states: int = 0) -> IlpSolution:
    """Map a group-problem point back to an integer point of the program."""
    if not gp.is_feasible(x_group):
        raise InternalInconsistencyError(f"{tuple(x_group)} is not feasible for the group problem")
    ctx = gp.context
    form = ctx.form
    k, s = form.k, form.s
    alpha_t, y = tuple(x_group[:k]), tuple(x_group[k:])
    alpha = tuple(bt - a for bt, a in zip(ctx.b_form[:k], alpha_t))
    if s:
        rhs = tuple(bh + ax - yi for bh, ax, yi in zip(ctx.b_hat, _matvec(form.blockA, alpha_t), y))
        scaled = ctx.adj_B.apply(rhs)
        if any(v % gp.delta_small for v in scaled):
            raise InternalInconsistencyError(f"beta = {scaled}/{gp.delta_small} is not integral")
        beta = tuple(v // gp.delta_small for v in scaled)
    else:
        beta = ()
    x = form.to_input_coordinates(alpha + beta)
    objective = _dot(inst.c, x)
    lhs = inst.H.apply(x)
    feasible = all(l <= r for l, r in zip(lhs, inst.b))
    if not feasible:
        raise InternalInconsistencyError(f"recovered point {x} violates H x <= b")
    if -(gp.offset + Fraction(_dot(gp.w, x_group), gp.delta_small)) != objective:
        raise InternalInconsistencyError("group objective does not match c.x after recovery")
    return IlpSolution(tuple(x), objective, True, GROUP, states)


# -- brute force ------------------------------------------------------------------------


def proximity_box(vertex: LpVertex, radius: int) -> list[tuple[int, int]]:
    return [(math.ceil(v - radius), math.floor(v + radius)) for v in vertex.point]


def brute_force_ilp(
    inst: IlpInstance,
    vertex: LpVertex,
    delta: int | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> IlpSolution | None:
    """Best feasible point with ||x - vertex||_inf <= n * Delta, if any."""
    if delta is None:
        delta = max_rank_minor(inst.H)
    ranges = proximity_box(vertex, inst.n * delta)
    total = math.prod(hi - lo + 1 for lo, hi in ranges)
    if total > max_points:
        raise ResourceLimitError(f"brute force would enumerate {total} points", total)
    H = np.array(inst.H.to_rows(), dtype=object)
    b = np.array(inst.b, dtype=object)
    c = np.array(inst.c, dtype=object)
    best = None
    # vectorise over the last coordinate
    lo_last, hi_last = ranges[-1]
    last = np.arange(lo_last, hi_last + 1, dtype=object)
    for head in product(*(range(lo, hi + 1) for lo, hi in ranges[:-1])):
        X = np.empty((len(last), inst.n), dtype=object)
        X[:, :-1] = head
        X[:, -1] = last
        ok = np.all(X @ H.T <= b, axis=1)
        if not ok.any():
            continue
        Xf = X[ok]
        values = Xf @ c
        i = int(np.argmax(values))
        if best is None or values[i] > best[0]:
            best = (int(values[i]), tuple(int(t) for t in Xf[i]))
    if best is None:
        return None
    return IlpSolution(best[1], best[0], True, BRUTE, total)


# -- pipeline -----------------------------------------------------------------------------


def solve_ilp(
    inst: IlpInstance,
    cross_check: bool = False,
    method: str = GROUP,
    max_states: int = DEFAULT_MAX_STATES,
) -> IlpSolution:
    """Optimal integer point; raises InfeasibleError / UnboundedError otherwise."""
    if method not in (GROUP, BRUTE):
        raise ParameterError(f"unknown method {method!r}")
    vertex = solve_lp_relaxation(inst)
    delta = max_rank_minor(inst.H)
    if method == GROUP:
        gp = reduce_to_group_problem(inst, vertex, delta)
        x_group, states = group_dp_solve(gp, max_states)
        solution = None if x_group is None else recover_solution(inst, gp, x_group, states)
    else:
        solution = brute_force_ilp(inst, vertex, delta)

    if cross_check and method != BRUTE:
        oracle = brute_force_ilp(inst, vertex, delta)
        mine = None if solution is None else solution.objective
        theirs = None if oracle is None else oracle.objective
        if mine != theirs:
            raise CrossCheckError(
                f"group DP objective {mine} differs from brute force {theirs}", solution, oracle
            )
    if solution is None:
        raise InfeasibleError("no integer point satisfies H x <= b")
    lhs = inst.H.apply(solution.x)
    if any(l > r for l, r in zip(lhs, inst.b)):
        raise InternalInconsistencyError(f"returned point {solution.x} is infeasible")
    return solution
