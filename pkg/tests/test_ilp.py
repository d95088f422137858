from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from deltafpt.errors import InfeasibleError, StructureError, UnboundedError, UnsupportedShapeError
from deltafpt.generate import GenSpec, gen_ilp
from deltafpt.ilp import (
    IlpInstance,
    brute_force_ilp,
    group_dp_solve,
    lp_is_bounded,
    recover_solution,
    reduce_to_group_problem,
    solve_ilp,
    solve_lp_relaxation,
)
from deltafpt.linalg import IntMatrix, max_rank_minor, unimodular_inverse


def instance(rows, b, c):
    return IlpInstance(IntMatrix.from_rows(rows, len(c)), b, c)


def wide_oracle(inst: IlpInstance, radius: int):
    """Best c.x over integer points within ``radius`` of the LP vertex, plain loops."""
    v = solve_lp_relaxation(inst).point
    best = None
    ranges = [range(int(x) - radius, int(x) + radius + 2) for x in v]
    for x in product(*ranges):
        if all(sum(h * xi for h, xi in zip(inst.H.row(i), x)) <= inst.b[i] for i in range(inst.d)):
            val = sum(ci * xi for ci, xi in zip(inst.c, x))
            best = val if best is None else max(best, val)
    return best


def test_one_dimensional_example():
    sol = solve_ilp(instance([[2], [-1]], (3, 0), (1,)), cross_check=True)
    assert sol.objective == 1 and sol.x == (1,)


def test_integer_infeasible():
    with pytest.raises(InfeasibleError):
        solve_ilp(instance([[2], [-2]], (1, -1), (1,)))


def test_lp_infeasible():
    with pytest.raises(InfeasibleError):
        solve_lp_relaxation(instance([[1], [-1]], (0, -1), (1,)))


def test_unbounded():
    inst = instance([[1, 0], [0, 1]], (0, 0), (-1, 0))
    assert not lp_is_bounded(inst.H, inst.c)
    with pytest.raises(UnboundedError):
        solve_ilp(inst)


def test_rejects_singular_submatrix():
    with pytest.raises(UnsupportedShapeError):
        instance([[1, 0], [2, 0], [0, 1]], (1, 1, 1), (1, 1))
    relaxed = IlpInstance(IntMatrix.from_rows([[1, 0], [2, 0], [0, 1]]), (1, 1, 1), (1, 1), strict=False)
    assert solve_ilp(relaxed, method="brute").objective == 1


def test_rejects_two_extra_rows():
    inst = instance([[1, 0], [0, 1], [1, 1], [1, -1]], (1, 1, 1, 1), (1, 1))
    with pytest.raises(UnsupportedShapeError):
        reduce_to_group_problem(inst, solve_lp_relaxation(inst))


def test_shape_errors():
    with pytest.raises(StructureError):
        IlpInstance(IntMatrix.from_rows([[1, 0]]), (1,), (1, 1))
    with pytest.raises(StructureError):
        IlpInstance(IntMatrix.from_rows([[1]]), (1, 2), (1,))


def test_lp_vertex_small():
    # x <= 3/2, y <= 1, x + y <= 2 (as 2x <= 3), maximise x + y
    v = solve_lp_relaxation(instance([[2, 0], [0, 1], [-1, 0], [0, -1]][:2] + [[1, 1]], (3, 1, 2), (1, 2)))
    assert v.objective == Fraction(3)
    assert v.point == (Fraction(1), Fraction(1))


def ilp_cases(n_max=3):
    return st.builds(
        lambda n, extra, seed, dm: GenSpec(n, n + extra, target_delta_max=dm, seed=seed),
        st.integers(1, n_max),
        st.integers(0, 1),
        st.integers(0, 10**6),
        st.sampled_from([2, 4, 8]),
    )


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(ilp_cases())
def test_lp_matches_scipy(spec):
    g = gen_ilp(spec)
    inst = IlpInstance(g.H, g.b, g.c)
    v = solve_lp_relaxation(inst)
    res = linprog([-x for x in g.c], A_ub=g.H.to_rows(), b_ub=list(g.b), bounds=[(None, None)] * spec.n)
    assert res.status == 0
    assert abs(float(v.objective) + res.fun) < 1e-6


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(ilp_cases(n_max=2))
def test_group_dp_matches_wide_oracle(spec):
    g = gen_ilp(spec)
    inst = IlpInstance(g.H, g.b, g.c)
    sol = solve_ilp(inst)
    assert sol.objective >= sum(c * x for c, x in zip(g.c, g.witness))
    assert sol.objective == wide_oracle(inst, 2 * spec.n * g.delta)


def to_group(inst, gp, x):
    """Image of an integer point of the program in group coordinates."""
    form = gp.context.form
    xf = unimodular_inverse(form.col_transform).apply(x)
    k = form.k
    alpha_t = tuple(b - a for b, a in zip(gp.context.b_form[:k], xf[:k]))
    full = form.full().apply(xf)
    y = tuple(b - r for b, r in zip(gp.context.b_form[k:form.n], full[k:form.n]))
    return alpha_t + y


@settings(max_examples=80, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(ilp_cases())
def test_reduction_invariants(spec):
    g = gen_ilp(spec)
    inst = IlpInstance(g.H, g.b, g.c)
    v = solve_lp_relaxation(inst)
    gp = reduce_to_group_problem(inst, v)
    delta = max_rank_minor(g.H)
    assert all(0 <= e < S for i, S in enumerate(gp.S) for e in gp.G.row(i))
    assert all(0 <= e < S for e, S in zip(gp.g, gp.S))
    assert max([*gp.G.entries, *gp.g], default=0) <= delta
    if gp.h is not None:
        assert max(abs(e) for e in gp.h) <= gp.h_bound()

    # tied optima may carry slack beyond the box; only the box is widened
    oracle = brute_force_ilp(inst, v)
    z = to_group(inst, gp, oracle.x)
    assert min(z) >= 0
    wide = replace(gp, box_bound=max(gp.box_bound, *z))
    assert wide.is_feasible(z)
    assert -(gp.offset + Fraction(sum(w * zi for w, zi in zip(gp.w, z)), gp.delta_small)) == oracle.objective
    back = recover_solution(inst, wide, z)
    assert back.x == oracle.x

    found, _ = group_dp_solve(gp)
    assert found is not None
    assert recover_solution(inst, gp, found).objective == oracle.objective


def test_solution_fields():
    g = gen_ilp(GenSpec(2, 3, seed=5))
    sol = solve_ilp(IlpInstance(g.H, g.b, g.c), cross_check=True)
    assert sol.certificate and sol.method == "group"
    assert all(sum(h * x for h, x in zip(g.H.row(i), sol.x)) <= g.b[i] for i in range(3))


def test_integral_vertex_example():
    inst = instance([[1, 0], [0, 1], [-1, -1]], (5, 5, -3), (1, 1))
    assert solve_lp_relaxation(inst).point == (5, 5)
    sol = solve_ilp(inst, cross_check=True)
    assert sol.x == (5, 5) and sol.objective == 10


def test_eta_states_within_cap():
    from deltafpt.ilp import GroupDynamicProgram

    for seed in range(60):
        g = gen_ilp(GenSpec(1 + seed % 3, 2 + seed % 3, target_delta_max=8, seed=seed))
        inst = IlpInstance(g.H, g.b, g.c)
        gp = reduce_to_group_problem(inst, solve_lp_relaxation(inst))
        dp = GroupDynamicProgram(gp)
        dp.value(dp.root())
        assert all(abs(eta) <= gp.eta_cap for eta in dp.etas())
