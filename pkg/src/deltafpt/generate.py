"""Seeded generators for test lattices and integer programs.

Randomness comes from SplitMix64 so that a (spec, seed) pair produces the
same instance in any language that implements the same generator.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

from .errors import GenerationError, ParameterError
from .linalg import IntMatrix, has_singular_rank_submatrix, max_rank_minor, rank

_MASK = (1 << 64) - 1
MAX_ATTEMPTS = 2_000


class SplitMix64:
    """Steele, Lea and Flood's 64-bit mixer, one word per call."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] by rejection (no modulo bias)."""
        if hi < lo:
            raise ParameterError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = (1 << 64) - (1 << 64) % span
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i)
            items[i], items[j] = items[j], items[i]
        return items


@dataclass(frozen=True)
class GenSpec:
    n: int
    d: int
    target_delta_max: int = 4
    require_nonsingular_submatrices: bool = False
    entry_range: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n <= self.d:
            raise ParameterError(f"need d >= n >= 1, got n={self.n}, d={self.d}")
        if self.entry_range < 1:
            raise ParameterError("entry_range must be >= 1")
        if self.target_delta_max < 1:
            raise ParameterError("target_delta_max must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class GeneratedLattice(NamedTuple):
    H: IntMatrix
    delta: int


def _pivots(rng: SplitMix64, n: int, delta_max: int) -> list[int]:
    """Random pivots >= 2 with product <= delta_max, at most n of them."""
    pivots, product = [], 1
    slots = min(n, delta_max.bit_length() - 1)
    for _ in range(rng.randint(0, slots)):
        room = delta_max // product
        if room < 2:
            break
        b = rng.randint(2, room)
        pivots.append(b)
        product *= b
    return pivots


def _skeleton(rng: SplitMix64, spec: GenSpec) -> list[list[int]]:
    n, d, r = spec.n, spec.d, spec.entry_range
    pivots = _pivots(rng, n, spec.target_delta_max)
    s = len(pivots)
    k = n - s
    rows = [[int(i == j) for j in range(n)] for i in range(k)]
    for i, b in enumerate(pivots):
        row = [rng.randint(0, b - 1) for _ in range(k)]
        row += [rng.randint(0, b - 1) for _ in range(i)] + [b] + [0] * (s - i - 1)
        rows.append(row)
    for _ in range(d - n):
        rows.append(_extra_row(rng, rows[:n], r))
    return rows


def _extra_row(rng: SplitMix64, top: list[list[int]], r: int) -> list[int]:
    """Mostly a {-1, 0, 1} combination of the top rows, whose minors against
    them are multiples of the top determinant; otherwise uniform entries."""
    n = len(top)
    if rng.randint(0, 3):
        lam = [rng.randint(-1, 1) for _ in range(n)]
        if any(lam):
            return [sum(l * row[j] for l, row in zip(lam, top)) for j in range(n)]
    return [rng.randint(-r, r) for _ in range(n)]


def _scramble(rng: SplitMix64, rows: list[list[int]], n: int, bound: int) -> list[list[int]]:
    """Bounded unimodular column operations, then a signed row permutation.

    Each step adds q in [-3, 3] times one column to another, skipped when an
    entry would leave [-bound, bound]; at most 2n steps.
    """
    for _ in range(2 * n):
        if n < 2:
            break
        i = rng.randint(0, n - 1)
        j = rng.randint(0, n - 2)
        j += j >= i
        q = rng.randint(-3, 3)
        new = [row[i] + q * row[j] for row in rows]
        if q and all(abs(x) <= bound for x in new):
            for row, x in zip(rows, new):
                row[i] = x
    order = rng.shuffle(list(range(len(rows))))
    out = []
    for idx in order:
        sign = -1 if rng.randint(0, 1) else 1
        out.append([sign * x for x in rows[idx]])
    return out


def _lattice_attempt(rng: SplitMix64, spec: GenSpec) -> GeneratedLattice | None:
    rows = _skeleton(rng, spec)
    if any(abs(x) > spec.entry_range for row in rows for x in row):
        return None
    rows = _scramble(rng, rows, spec.n, spec.entry_range)
    H = IntMatrix.from_rows(rows, spec.n)
    if rank(H) != spec.n:
        return None
    delta = max_rank_minor(H)
    if delta > spec.target_delta_max:
        return None
    return GeneratedLattice(H, delta)


def gen_lattice(spec: GenSpec, rng: SplitMix64 | None = None) -> GeneratedLattice:
    """Rank-n matrix with entries in [-entry_range, entry_range] and Delta <= target.

    Built from a random normal-form skeleton that is then scrambled by
    unimodular column operations and a signed row permutation.
    """
    rng = rng or SplitMix64(spec.seed)
    for _ in range(MAX_ATTEMPTS):
        result = _lattice_attempt(rng, spec)
        if result is not None:
            return result
    raise GenerationError(f"no lattice found for {spec} after {MAX_ATTEMPTS} attempts")


def gen_nonsingular(spec: GenSpec, rng: SplitMix64 | None = None) -> GeneratedLattice:
    """Like :func:`gen_lattice` but every n x n row-submatrix is nonsingular."""
    if not spec.require_nonsingular_submatrices:
        raise ParameterError("spec does not request nonsingular submatrices")
    rng = rng or SplitMix64(spec.seed)
    for _ in range(MAX_ATTEMPTS):
        result = _lattice_attempt(rng, spec)
        if result is not None and not has_singular_rank_submatrix(result.H):
            return result
    raise GenerationError(f"no nonsingular lattice found for {spec} after {MAX_ATTEMPTS} attempts")


class GeneratedIlp(NamedTuple):
    H: IntMatrix
    b: tuple[int, ...]
    c: tuple[int, ...]
    witness: tuple[int, ...]
    delta: int


def _dual_bounded(H: IntMatrix, c) -> bool:
    """True when max c.x over Hx <= b is bounded (c in the cone of the rows)."""
    from .ilp import lp_is_bounded

    return lp_is_bounded(H, c)


def gen_ilp(spec: GenSpec, bounded: bool = True) -> GeneratedIlp:
    """Feasible integer program max c.x, Hx <= b with a known interior point.

    b = H x0 + slack with slack >= 0, so x0 is a witness of feasibility.
    With ``bounded`` the objective is redrawn until the LP relaxation is
    bounded.
    """
    rng = SplitMix64(spec.seed)
    nonsingular = GenSpec(**{**spec.to_dict(), "require_nonsingular_submatrices": True})
    H, delta = gen_nonsingular(nonsingular, rng)
    r = spec.entry_range
    x0 = tuple(rng.randint(-r, r) for _ in range(spec.n))
    b = tuple(hx + rng.randint(0, r) for hx in H.apply(x0))
    for _ in range(MAX_ATTEMPTS):
        c = tuple(rng.randint(-r, r) for _ in range(spec.n))
        if not bounded or _dual_bounded(H, c):
            return GeneratedIlp(H, b, c, x0, delta)
    raise GenerationError(f"no bounded objective found for {spec}")
