"""Exact shortest vector problem for integer lattices under l_p norms.

Three routes, all returning the p-th power of the norm as an exact int:

* :func:`fast_path` -- a zero or repeated column in the residual block of
  the normal form gives a vector of norm^p 1 or 2 immediately.
* :func:`dp_solve` -- the two-phase dynamic program over the normal form
  (beta coordinates first, then alpha coordinates).
* :func:`brute_force_svp` -- enumeration over a certified coefficient box,
  independent of the normal form; used as the oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from .bounds import (
    SvpBounds,
    bounds_with_ceiling,
    iroot_floor,
    lemma2_bounds,
    m_constant,
)
from .errors import (
    CrossCheckError,
    InternalInconsistencyError,
    ParameterError,
    RankError,
    ResourceLimitError,
    UnsupportedNormError,
    UnsupportedShapeError,
)
from .linalg import HnfForm, IntMatrix, adjugate, as_matrix, det, hnf_normalize, max_rank_minor, rank

INF = math.inf

FAST_PATH = "fast_path"
DP = "dp"
BRUTE = "brute"

DEFAULT_MAX_STATES = 5_000_000
DEFAULT_MAX_POINTS = 50_000_000


def check_norm_exponent(p) -> int:
    if isinstance(p, float) and math.isinf(p):
        raise UnsupportedNormError("the l_inf norm is not supported; p must be a finite integer")
    if isinstance(p, bool) or not isinstance(p, int) or p < 1:
        raise ParameterError(f"norm exponent must be an integer >= 1, got {p!r}")
    return p


def norm_p(vector: Sequence[int], p: int) -> int:
    return sum(abs(x) ** p for x in vector)


@dataclass(frozen=True)
class SvpInstance:
    H: IntMatrix
    p: int

    def __post_init__(self):
        object.__setattr__(self, "H", as_matrix(self.H))
        check_norm_exponent(self.p)
        H = self.H
        if H.cols < 1 or H.rows < H.cols or rank(H) != H.cols:
            raise RankError(f"lattice basis of shape {H.shape} must have full column rank")


@dataclass(frozen=True)
class SvpSolution:
    coeffs: tuple[int, ...]
    vector: tuple[int, ...]
    norm_p: int
    method: str
    states: int = 0


def certify(H, p: int, coeffs: Sequence[int], method: str, states: int = 0) -> SvpSolution:
    """Recompute ``H @ coeffs`` and its norm from scratch."""
    H = as_matrix(H)
    coeffs = tuple(int(c) for c in coeffs)
    if not any(coeffs):
        raise InternalInconsistencyError("zero coefficient vector returned as a shortest vector")
    vector = H.apply(coeffs)
    return SvpSolution(coeffs, vector, norm_p(vector, p), method, states)


def _form_solution(form: HnfForm, p: int, x: Sequence[int], method: str, states: int) -> SvpSolution:
    """Solution in input coordinates from form coordinates ``x``."""
    coeffs = form.to_input_coordinates(x)
    image = form.full().apply(x)
    vector = [0] * form.d
    for i, row in enumerate(form.row_perm):
        vector[row] = image[i]
    return SvpSolution(tuple(coeffs), tuple(vector), norm_p(image, p), method, states)


# -- fast path ------------------------------------------------------------------


def fast_path(form: HnfForm, p: int) -> SvpSolution | None:
    """Zero or duplicate column of (A over Abar), if there is one.

    A zero column i means e_i maps to a unit vector (norm^p 1, optimal).
    Otherwise two equal columns i, j give e_i - e_j with norm^p 2, which is
    optimal because no lattice vector of norm 1 exists without a zero
    column.
    """
    check_norm_exponent(p)
    stacked = form.stacked_residual()
    n = form.n
    for i in range(form.k):
        if not any(stacked.col(i)):
            x = [0] * n
            x[i] = 1
            return _form_solution(form, p, x, FAST_PATH, 0)
    columns = sorted((stacked.col(i), i) for i in range(form.k))
    for (c1, i), (c2, j) in zip(columns, columns[1:]):
        if c1 == c2:
            x = [0] * n
            x[min(i, j)] = 1
            x[max(i, j)] = -1
            return _form_solution(form, p, x, FAST_PATH, 0)
    return None


# -- dynamic program ------------------------------------------------------------

SIGMA = "sigma"
SIGMA_BAR = "sigma_bar"
_PHASE_NAMES = (SIGMA, SIGMA_BAR)


class DpKey(NamedTuple):
    phase: str
    level: int
    v: tuple[int, ...]
    u: tuple[int, ...]
    budget: int


class DpValue(NamedTuple):
    value: float | int
    choice: int | None
    next: tuple | None


_INFEASIBLE = DpValue(INF, None, None)


def _z_order(limit: int):
    for a in range(1, limit + 1):
        yield a
        yield -a


class SvpDynamicProgram:
    """Memoised evaluation of the sigma / sigma-bar recurrences.

    ``mp`` is the certified bound on the optimum's norm^p and serves as the
    alpha budget cap of the beta-to-alpha handoff. ``beta_abs`` clips the
    z-range of the beta levels. With ``prune=True`` three further sound
    reductions apply, all relying on ``mp`` bounding the optimum:
    alpha levels only try |z|**p <= mp, states whose interval lower
    bound exceeds ``mp`` are cut, and budgets are capped at what the
    clipped ranges can spend. Pruned states report +inf instead of their
    (larger than ``mp``) true value, which never affects the optimum.
    """

    def __init__(
        self,
        form: HnfForm,
        p: int,
        mp: int,
        beta_abs: Sequence[int] | None = None,
        prune: bool = True,
        max_states: int = DEFAULT_MAX_STATES,
        alpha_abs: Sequence[int] | None = None,
    ):
        self.form = form
        self.p = check_norm_exponent(p)
        self.k, self.s, self.m = form.k, form.s, form.m
        self.mp = mp
        self.prune = prune
        self.max_states = max_states
        self.memo: dict[tuple, DpValue] = {}

        A, B, Abar, Bbar = form.blockA, form.blockB, form.blockAbar, form.blockBbar
        self.a_cols = [A.col(i) for i in range(self.k)]
        self.abar_cols = [Abar.col(i) for i in range(self.k)]
        self.b_cols = [B.col(i) for i in range(self.s)]
        self.bbar_cols = [Bbar.col(i) for i in range(self.s)]

        self.alpha_clip = iroot_floor(mp, p) if prune else None
        if alpha_abs is not None and len(alpha_abs) != self.k:
            raise ParameterError(f"expected {self.k} alpha bounds, got {len(alpha_abs)}")
        self.alpha_box = None if alpha_abs is None else tuple(alpha_abs)
        if beta_abs is None:
            self.beta_clip = None
        else:
            if len(beta_abs) != self.s:
                raise ParameterError(f"expected {self.s} beta bounds, got {len(beta_abs)}")
            self.beta_clip = tuple(beta_abs)

        # reach tables for the interval lower bound
        self._alpha_reach_v = [self._prefix_max(self.a_cols, j) for j in range(self.s)]
        self._alpha_reach_u = [self._prefix_max(self.abar_cols, j) for j in range(self.m)]

    @staticmethod
    def _prefix_max(cols, row):
        out, best = [0], 0
        for col in cols:
            best = max(best, abs(col[row]))
            out.append(best)
        return out

    # -- keys ---------------------------------------------------------------

    def sigma_key(self, l: int, v, u, C: int):
        if l <= 0 or C <= 0:
            return None
        if self.prune:
            C = min(C, l * self.alpha_clip, self.mp)
        return (0, l, tuple(v), tuple(u), C)

    def sigma_bar_key(self, l: int, v, u, C: int):
        if l <= 0 or C <= 0:
            return None
        if self.prune and self.beta_clip is not None:
            spend = sum(self.beta_clip[:l]) + min(self.mp, self.k * self.alpha_clip)
            C = min(C, spend)
        return (1, l, tuple(v), tuple(u), C)

    def value(self, key) -> DpValue:
        if key is None:
            return _INFEASIBLE
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        phase, l, v, u, C = key
        if self.prune and self._lower_bound(phase, l, v, u, C) > self.mp:
            result = _INFEASIBLE
        elif phase == 0:
            result = self.sigma_base(v, u, C) if l == 1 else self.sigma_step(l, v, u, C)
        else:
            result = self.sigma_bar_base(v, u, C) if l == 1 else self.sigma_bar_step(l, v, u, C)
        self.memo[key] = result
        if len(self.memo) > self.max_states:
            raise ResourceLimitError(
                f"dynamic program exceeded {self.max_states} memoised states", len(self.memo)
            )
        return result

    def sigma(self, l: int, v, u, C: int) -> DpValue:
        return self.value(self.sigma_key(l, v, u, C))

    def sigma_bar(self, l: int, v, u, C: int) -> DpValue:
        return self.value(self.sigma_bar_key(l, v, u, C))

    # -- helpers ------------------------------------------------------------

    def _residual(self, v, u) -> int:
        p = self.p
        return sum(abs(x) ** p for x in v) + sum(abs(x) ** p for x in u)

    def _lower_bound(self, phase, l, v, u, C) -> int:
        p = self.p
        if phase == 0:
            alpha_l1 = min(C, l * self.alpha_clip)
            reach_v = [self._alpha_reach_v[j][l] * alpha_l1 for j in range(self.s)]
            reach_u = [self._alpha_reach_u[j][l] * alpha_l1 for j in range(self.m)]
            lb = 1  # alpha != 0 costs at least 1
        else:
            alpha_l1 = min(C, self.mp, self.k * self.alpha_clip)
            clip = self.beta_clip
            spans = [min(C, clip[i]) if clip is not None else C for i in range(l)]
            reach_v = [
                self._alpha_reach_v[j][self.k] * alpha_l1
                + sum(abs(self.b_cols[i][j]) * spans[i] for i in range(min(l, j + 1)))
                for j in range(self.s)
            ]
            reach_u = [
                self._alpha_reach_u[j][self.k] * alpha_l1
                + sum(abs(self.bbar_cols[i][j]) * spans[i] for i in range(l))
                for j in range(self.m)
            ]
            lb = 0
        for x, r in zip(v, reach_v):
            gap = abs(x) - r
            if gap > 0:
                lb += gap ** p
        for x, r in zip(u, reach_u):
            gap = abs(x) - r
            if gap > 0:
                lb += gap ** p
        return lb

    def _bounded_value(self, key, budget) -> float:
        """Value of ``key``, or INF without evaluating it when its lower
        bound already reaches ``budget`` (so it cannot improve the caller)."""
        if key is None:
            return INF
        if self.prune and key not in self.memo and self._lower_bound(*key) >= budget:
            return INF
        return self.value(key).value

    def _alpha_limit(self, l: int, C: int) -> int:
        limit = C if self.alpha_clip is None else min(C, self.alpha_clip)
        return limit if self.alpha_box is None else min(limit, self.alpha_box[l - 1])

    def _beta_limit(self, l: int, C: int) -> int:
        return C if self.beta_clip is None else min(C, self.beta_clip[l - 1])

    # -- alpha phase --------------------------------------------------------

    def sigma_base(self, v, u, C: int) -> DpValue:
        """Level 1: min over z != 0, |z| <= C, of |z|^p plus the residual.

        The objective is convex in z, so each sign is handled by a binary
        search for the first non-negative forward difference, which is the
        minimiser of smallest |z| on that side.
        """
        p = self.p
        coeffs = (1,) + self.a_cols[0] + self.abar_cols[0]
        shifts = (0,) + tuple(v) + tuple(u)

        def cost(z):
            return sum(abs(c * z + s) ** p for c, s in zip(coeffs, shifts))

        limit = self._alpha_limit(1, C)
        if limit < 1:
            return _INFEASIBLE
        best, best_z = INF, None
        for sign in (1, -1):
            lo, hi = 1, limit
            while lo < hi:
                mid = (lo + hi) // 2
                if cost(sign * (mid + 1)) >= cost(sign * mid):
                    hi = mid
                else:
                    lo = mid + 1
            value = cost(sign * lo)
            if value < best or (value == best and lo < abs(best_z)):
                best, best_z = value, sign * lo
        return DpValue(best, best_z, None)

    def sigma_step(self, l: int, v, u, C: int) -> DpValue:
        p = self.p
        a, abar = self.a_cols[l - 1], self.abar_cols[l - 1]
        key0 = self.sigma_key(l - 1, v, u, C)
        best, best_z, best_next = self.value(key0).value, 0, key0
        for z in _z_order(self._alpha_limit(l, C)):
            zp = abs(z) ** p
            if zp >= best:
                break
            vb = tuple(vi + ai * z for vi, ai in zip(v, a))
            ub = tuple(ui + ai * z for ui, ai in zip(u, abar))
            close = self._residual(vb, ub)
            sub = self.sigma_key(l - 1, vb, ub, C - abs(z))
            rest = self._bounded_value(sub, min(best - zp, close))
            if close <= rest:
                cand, nxt = zp + close, None
            else:
                cand, nxt = zp + rest, sub
            if cand < best:
                best, best_z, best_next = cand, z, nxt
        if best == INF:
            return _INFEASIBLE
        return DpValue(best, best_z, best_next)

    # -- beta phase ---------------------------------------------------------

    def _alpha_handoff(self, C: int) -> int:
        return min(C, self.mp)

    def sigma_bar_base(self, v, u, C: int) -> DpValue:
        """Level 1 of the beta phase; hands the alpha part to sigma(k, ...)."""
        b, bbar = self.b_cols[0], self.bbar_cols[0]
        key0 = self.sigma_key(self.k, v, u, self._alpha_handoff(C))
        best, best_z, best_next = self.value(key0).value, 0, key0
        for z in _z_order(self._beta_limit(1, C)):
            vb = tuple(vi + bi * z for vi, bi in zip(v, b))
            ub = tuple(ui + bi * z for ui, bi in zip(u, bbar))
            close = self._residual(vb, ub)
            sub = self.sigma_key(self.k, vb, ub, self._alpha_handoff(C - abs(z)))
            rest = self._bounded_value(sub, min(best, close))
            cand, nxt = (close, None) if close <= rest else (rest, sub)
            if cand < best:
                best, best_z, best_next = cand, z, nxt
        if best == INF:
            return _INFEASIBLE
        return DpValue(best, best_z, best_next)

    def sigma_bar_step(self, l: int, v, u, C: int) -> DpValue:
        b, bbar = self.b_cols[l - 1], self.bbar_cols[l - 1]
        key0 = self.sigma_bar_key(l - 1, v, u, C)
        best, best_z, best_next = self.value(key0).value, 0, key0
        for z in _z_order(self._beta_limit(l, C)):
            vb = tuple(vi + bi * z for vi, bi in zip(v, b))
            ub = tuple(ui + bi * z for ui, bi in zip(u, bbar))
            close = self._residual(vb, ub)
            sub = self.sigma_bar_key(l - 1, vb, ub, C - abs(z))
            rest = self._bounded_value(sub, min(best, close))
            cand, nxt = (close, None) if close <= rest else (rest, sub)
            if cand < best:
                best, best_z, best_next = cand, z, nxt
        if best == INF:
            return _INFEASIBLE
        return DpValue(best, best_z, best_next)

    # -- reconstruction -----------------------------------------------------

    def reconstruct(self, key) -> tuple[int, ...]:
        """Replay stored choices from ``key`` into form coordinates."""
        x = [0] * (self.k + self.s)
        while key is not None:
            entry = self.memo[key]
            phase, l = key[0], key[1]
            index = l - 1 if phase == 0 else self.k + l - 1
            x[index] = entry.choice
            key = entry.next
        return tuple(x)

    def states(self):
        for key in self.memo:
            phase, l, v, u, C = key
            yield DpKey(_PHASE_NAMES[phase], l, v, u, C)


def shortest_column_norm(H, p: int) -> int:
    H = as_matrix(H)
    return min(norm_p(H.col(j), p) for j in range(H.cols))


def dp_solve(
    form: HnfForm,
    p: int,
    delta: int,
    bounds: SvpBounds,
    max_states: int = DEFAULT_MAX_STATES,
) -> SvpSolution:
    """Optimal vector by the two-phase dynamic program.

    ``bounds`` is tightened with the shortest column of the form before
    the search; any lattice vector's norm is a valid bound on the optimum.
    Each coordinate is further clipped to the certified coefficient box of
    the form, which holds for every vector within that bound.
    """
    check_norm_exponent(p)
    full = form.full()
    ceiling = shortest_column_norm(full, p)
    work = bounds_with_ceiling(bounds, ceiling, form.s)
    box = coefficient_box(full, p, work.mp)
    beta_abs = tuple(min(a, b) for a, b in zip(work.beta_abs, box[form.k:]))
    dp = SvpDynamicProgram(
        form, p, work.mp, beta_abs, prune=True, max_states=max_states, alpha_abs=box[: form.k]
    )
    zeros_v, zeros_u = (0,) * form.s, (0,) * form.m
    if form.s >= 1:
        root = dp.sigma_bar_key(form.s, zeros_v, zeros_u, work.total_l1)
    else:
        root = dp.sigma_key(form.k, zeros_v, zeros_u, work.mp)
    result = dp.value(root)
    if result.value == INF:
        raise InternalInconsistencyError("dynamic program found no vector within certified bounds")
    x = dp.reconstruct(root)
    solution = _form_solution(form, p, x, DP, len(dp.memo))
    if solution.norm_p != result.value:
        raise InternalInconsistencyError(
            f"reconstructed norm {solution.norm_p} differs from DP value {result.value}"
        )
    return solution


# -- brute force ----------------------------------------------------------------


def coefficient_box(H, p: int, ceiling: int | None = None) -> tuple[int, ...]:
    """Per-coordinate bound on the coefficients of every shortest vector.

    Every coordinate of a shortest vector is at most R = floor(c^(1/p))
    in absolute value, c being ``ceiling`` (default: the shortest column
    norm^p), any proven bound on the optimum. For any
    nonsingular n-row block H_I, t = H_I^{-1} (H t)_I, hence
    |t_j| <= R * sum_i |adj(H_I)_{j,i}| / |det H_I|. The minimum over all
    row blocks is taken.
    """
    H = as_matrix(H)
    n = H.cols
    if ceiling is None:
        ceiling = shortest_column_norm(H, p)
    radius = iroot_floor(ceiling, p)
    box = [None] * n
    for rows in combinations(range(H.rows), n):
        sub = H.submatrix(rows)
        dv = abs(det(sub))
        if dv == 0:
            continue
        adj = adjugate(sub)
        for j in range(n):
            bound = radius * sum(abs(x) for x in adj.row(j)) // dv
            if box[j] is None or bound < box[j]:
                box[j] = bound
    return tuple(box)


_CHUNK_ROWS = 1 << 18


def _enumerate_min(H: IntMatrix, p: int, limits: Sequence[int], l1_radius: int | None, max_points: int):
    total = math.prod(2 * b + 1 for b in limits)
    if total > max_points:
        raise ResourceLimitError(f"brute force would enumerate {total} points", total)
    peak = sum(H.max_abs() * b for b in limits)
    use_int64 = H.rows * max(peak, 1) ** p < 2 ** 62
    dtype = np.int64 if use_int64 else object
    Hn = np.array(H.to_rows(), dtype=dtype)

    # vectorise the trailing coordinates, loop over the leading ones
    split = len(limits)
    while split > 0 and math.prod(2 * b + 1 for b in limits[split - 1:]) <= _CHUNK_ROWS:
        split -= 1
    inner = [np.arange(-b, b + 1, dtype=dtype) for b in limits[split:]]
    if inner:
        grids = np.meshgrid(*inner, indexing="ij")
        tail = np.stack([g.ravel() for g in grids], axis=1)
    else:
        tail = np.zeros((1, 0), dtype=dtype)

    best_norm, best_t = None, None
    for head in product(*(range(-b, b + 1) for b in limits[:split])):
        T = np.concatenate([np.tile(np.array(head, dtype=dtype), (tail.shape[0], 1)), tail], axis=1)
        keep = np.any(T != 0, axis=1)
        if l1_radius is not None:
            keep &= np.abs(T).sum(axis=1) <= l1_radius
        T = T[keep]
        if T.shape[0] == 0:
            continue
        norms = (np.abs(T @ Hn.T) ** p).sum(axis=1)
        i = int(np.argmin(norms))
        if best_norm is None or norms[i] < best_norm:
            best_norm, best_t = int(norms[i]), tuple(int(x) for x in T[i])
    return best_norm, best_t, total


def brute_force_svp(
    H,
    p: int,
    l1_radius: int | None = None,
    max_points: int = DEFAULT_MAX_POINTS,
) -> SvpSolution:
    """Exhaustive minimum of ||H t||_p^p over nonzero integer t.

    With ``l1_radius`` the search covers exactly the l1 ball of that
    radius. Otherwise the certified box of :func:`coefficient_box` is
    scanned for growing ceilings c = 1, 2, 4, ... (capped by the shortest
    column): the box for c holds every vector of norm^p <= c, so the
    first scan that meets such a vector has found the optimum.
    """
    H = as_matrix(H)
    check_norm_exponent(p)
    if l1_radius is not None:
        if l1_radius < 1:
            raise ParameterError("l1 radius must be at least 1")
        limits = (l1_radius,) * H.cols
        best_norm, best_t, total = _enumerate_min(H, p, limits, l1_radius, max_points)
        return certify(H, p, best_t, BRUTE, total)

    top = shortest_column_norm(H, p)
    ceiling, scanned = 1, 0
    while True:
        ceiling = min(ceiling, top)
        limits = coefficient_box(H, p, ceiling)
        if any(limits):
            best_norm, best_t, total = _enumerate_min(H, p, limits, None, max_points - scanned)
            scanned += total
            if best_t is not None and best_norm <= ceiling:
                return certify(H, p, best_t, BRUTE, scanned)
        if ceiling == top:
            raise InternalInconsistencyError("no vector within the shortest-column ceiling")
        ceiling *= 2


# -- dispatch ---------------------------------------------------------------------


def svp_bounds(form: HnfForm, delta: int, p: int) -> SvpBounds:
    return lemma2_bounds(m_constant(delta, form.m, p, form.d, form.n), delta, form.s)


def solve(
    instance: SvpInstance,
    method: str = "auto",
    cross_check: bool = False,
    max_states: int = DEFAULT_MAX_STATES,
) -> SvpSolution:
    """Shortest nonzero vector of the lattice spanned by the columns of H.

    ``method`` is one of ``auto``, ``fastpath``, ``dp`` or ``brute``.
    ``auto`` tries the fast path and falls back to the dynamic program.
    """
    H, p = instance.H, instance.p
    if method not in ("auto", "fastpath", "dp", "brute"):
        raise ParameterError(f"unknown method {method!r}")

    if method == "brute":
        solution = brute_force_svp(H, p)
    else:
        form = hnf_normalize(H)
        solution = None
        if method in ("auto", "fastpath"):
            solution = fast_path(form, p)
            if solution is None and method == "fastpath":
                raise UnsupportedShapeError("no zero or repeated residual column; fast path does not apply")
        if solution is None:
            delta = max_rank_minor(H)
            solution = dp_solve(form, p, delta, svp_bounds(form, delta, p), max_states)

    checked = certify(H, p, solution.coeffs, solution.method, solution.states)
    if checked != solution:
        raise InternalInconsistencyError(f"certificate mismatch: {solution} vs {checked}")
    if cross_check and solution.method != BRUTE:
        oracle = brute_force_svp(H, p)
        if oracle.norm_p != solution.norm_p:
            raise CrossCheckError(
                f"{solution.method} found norm^p {solution.norm_p}, brute force {oracle.norm_p}",
                solution,
                oracle,
            )
    return checked
