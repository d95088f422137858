"""Explicit bounds used to box the SVP dynamic program.

Irrational quantities (Minkowski's estimate, ``log2 3`` exponents) are
evaluated with mpmath interval arithmetic and the *upper* endpoint is
ceiled. All of these numbers are only ever used as box limits, so
over-estimating them costs time but never correctness.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from math import ceil
from typing import NamedTuple

from mpmath import iv

from .errors import ParameterError
from .linalg import HnfForm

_START_PREC = 128
_MAX_PREC = 4096


def _check_positive_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def iroot_floor(x: int, p: int) -> int:
    """Largest r >= 0 with r**p <= x."""
    if x < 0:
        raise ParameterError("root of a negative number")
    if x < 2 or p == 1:
        return x
    # integer Newton from above; decreasing until it reaches the floor
    r = 1 << -(-x.bit_length() // p)
    while True:
        y = ((p - 1) * r + x // r ** (p - 1)) // p
        if y >= r:
            return r
        r = y


def iroot_ceil(x: int, p: int) -> int:
    r = iroot_floor(x, p)
    return r if r ** p == x else r + 1


def _log2_exact(delta: int) -> int | None:
    """log2(delta) when delta is a power of two, else None."""
    if delta & (delta - 1) == 0:
        return delta.bit_length() - 1
    return None


@contextmanager
def _interval_prec(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _certified_ceil(evaluate) -> int:
    """Ceil of a real given by an interval-valued thunk.

    Refines precision until both endpoints agree on the ceiling. Only
    call this for values that are not integers (exact cases are handled
    by the callers), otherwise the refinement cannot converge.
    """
    prec = _START_PREC
    while prec <= _MAX_PREC:
        with _interval_prec(prec):
            x = evaluate()
            lo, hi = ceil(x.a), ceil(x.b)
        if lo == hi:
            return int(hi)
        prec *= 2
    return int(hi)


def _upper_ceil(evaluate) -> int:
    """Ceil of the upper endpoint: a certified integer upper bound."""
    with _interval_prec(_START_PREC):
        return int(ceil(evaluate().b))


# -- Lemma-1 entry bounds -----------------------------------------------------


def lemma1_entry_bound(delta: int, s: int, i: int) -> int:
    """Bound ``delta * (3**(s - i) + 1) / 2`` on the extra-row entries.

    ``i`` in ``1..s`` bounds column i of Bbar; ``i == 0`` bounds every
    entry of Abar. The value is an integer because 3**t + 1 is even.
    """
    _check_positive_int("delta", delta)
    _check_positive_int("s", s, 0)
    if not 0 <= i <= s:
        raise ParameterError(f"index {i} outside 0..{s}")
    return delta * (3 ** (s - i) + 1) // 2


class Lemma1Violation(NamedTuple):
    block: str
    row: int
    col: int
    value: int
    bound: int


class Lemma1Check(NamedTuple):
    ok: bool
    violation: Lemma1Violation | None


def verify_lemma1(form: HnfForm, delta: int) -> Lemma1Check:
    """Check every extra-row entry of ``form`` against its Lemma-1 bound."""
    s = form.s
    abar_bound = lemma1_entry_bound(delta, s, 0)
    for j in range(form.m):
        for i in range(form.k):
            value = form.blockAbar[j, i]
            if abs(value) > abar_bound:
                return Lemma1Check(False, Lemma1Violation("Abar", j, i, value, abar_bound))
        for i in range(s):
            bound = lemma1_entry_bound(delta, s, i + 1)
            value = form.blockBbar[j, i]
            if abs(value) > bound:
                return Lemma1Check(False, Lemma1Violation("Bbar", j, i, value, bound))
    return Lemma1Check(True, None)


# -- Shortest-vector bounds ---------------------------------------------------


@dataclass(frozen=True)
class SvpBounds:
    """Certified box limits for a shortest-vector search.

    ``mp`` bounds the p-th power of the shortest vector norm, ``m_half``
    bounds half the norm itself. ``beta_abs`` is empty until
    :func:`lemma2_bounds` fills it for a concrete ``s``.
    """

    delta: int
    p: int
    mp: int
    m_half: Fraction
    first_candidate: int
    second_candidate: int | None
    alpha_l1: int
    total_l1: int
    v_box: int
    u_box: int
    beta_abs: tuple[int, ...] = ()

    @property
    def m_upper(self) -> int:
        """Integer upper bound on the shortest vector norm."""
        return int(2 * self.m_half)


def _minkowski_power_bound(delta: int, p: int, d: int, n: int) -> int:
    """Upper bound on (2 sqrt(e d / n) (delta / vol B_p^n)^(1/n))^p."""

    def evaluate():
        one = iv.mpf(1)
        vol = (2 * iv.gamma(one + one / p)) ** n / iv.gamma(one + iv.mpf(n) / p)
        m = 2 * iv.sqrt(iv.e * d / iv.mpf(n)) * (iv.mpf(delta) / vol) ** (one / n)
        return m ** p

    return _upper_ceil(evaluate)


def minkowski_candidate_is_certified(p: int, d: int, n: int) -> bool:
    """Whether the volume estimate is a valid bound for this shape.

    When d > n the lattice sits in an n-dimensional section of the d-dim
    unit ball. Sections of the l_p ball with p >= 2 are at least as
    large as the n-dim ball, so the estimate stays valid; for p < 2
    they can be smaller and the estimate may undercut the true minimum.
    """
    return d == n or p >= 2


def m_constant(delta: int, m: int, p: int, d: int, n: int) -> SvpBounds:
    """Certified bound on the p-th power of the shortest vector norm.

    Takes the smaller of ``delta**p * (m + 1)`` (the last column of the
    normal form) and Minkowski's volume estimate, both as integer ceilings.
    """
    _check_positive_int("p", p)
    _check_positive_int("delta", delta)
    _check_positive_int("m", m, 0)
    _check_positive_int("n", n)
    _check_positive_int("d", d, n)
    first = delta ** p * (m + 1)
    second = None
    if minkowski_candidate_is_certified(p, d, n):
        second = _minkowski_power_bound(delta, p, d, n)
    mp = first if second is None else min(first, second)
    return _bounds_from_mp(delta, p, mp, first, second, s_max=delta.bit_length() - 1)


def _bounds_from_mp(delta, p, mp, first, second, s_max) -> SvpBounds:
    m_half = Fraction(iroot_ceil(mp, p), 2)
    total = 2 * (1 + delta) * mp
    return SvpBounds(
        delta=delta,
        p=p,
        mp=mp,
        m_half=m_half,
        first_candidate=first,
        second_candidate=second,
        alpha_l1=mp,
        total_l1=total,
        v_box=delta * total,
        u_box=lemma1_entry_bound(delta, s_max, 0) * total,
    )


def beta_bound(mp: int, m_half: Fraction, i: int) -> int:
    """ceil(2**(i-1) * (mp + m_half)) for a 1-based coordinate index."""
    if i < 1:
        raise ParameterError("beta coordinates are 1-based")
    return ceil(2 ** (i - 1) * (mp + Fraction(m_half)))


def lemma2_bounds(bounds: SvpBounds, delta: int, s: int) -> SvpBounds:
    """Fill the per-coordinate beta bounds for an instance with ``s`` pivots."""
    _check_positive_int("s", s, 0)
    return replace(
        bounds,
        beta_abs=tuple(beta_bound(bounds.mp, bounds.m_half, i) for i in range(1, s + 1)),
        total_l1=2 * (1 + delta) * bounds.mp,
        u_box=lemma1_entry_bound(delta, s, 0) * 2 * (1 + delta) * bounds.mp,
    )


def bounds_with_ceiling(bounds: SvpBounds, ceiling: int, s: int) -> SvpBounds:
    """Re-derive every field from a smaller certified bound on the optimum.

    ``ceiling`` must be the p-th power norm of some actual lattice vector
    (or any other proven upper bound on the optimum).
    """
    mp = min(bounds.mp, ceiling)
    tightened = _bounds_from_mp(
        bounds.delta, bounds.p, mp, bounds.first_candidate, bounds.second_candidate, s
    )
    return lemma2_bounds(tightened, bounds.delta, s)


# -- Dimension thresholds -----------------------------------------------------


def lemma3_threshold(delta: int) -> int:
    """ceil(delta**(3 + 2 log2 3) + log2 delta).

    Above this many columns a matrix without singular n x n submatrices
    has at most n + 1 rows.
    """
    _check_positive_int("delta", delta)
    t = _log2_exact(delta)
    if t is not None:
        # delta**(2 log2 3) == 9**t
        return 8 ** t * 9 ** t + t

    def evaluate():
        x = iv.mpf(delta)
        return x ** (3 + 2 * iv.log(3, 2)) + iv.log(x, 2)

    return _certified_ceil(evaluate)


def theorem1_threshold(delta: int, m: int) -> int:
    """ceil(delta**(1 + m (1 + log2 3)) + log2 delta).

    When n exceeds this value the duplicate-column shortcut must fire.
    """
    _check_positive_int("delta", delta)
    _check_positive_int("m", m, 0)
    t = _log2_exact(delta)
    if t is not None:
        # delta**(1 + log2 3) == 2**t * 3**t
        return delta * 6 ** (t * m) + t

    def evaluate():
        x = iv.mpf(delta)
        return x ** (1 + m * (1 + iv.log(3, 2))) + iv.log(x, 2)

    return _certified_ceil(evaluate)

