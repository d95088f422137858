"""Command-line front end.

Exit codes: 0 optimal (or a successful utility command), 1 error,
2 infeasible or unbounded, 3 unsupported shape.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

from . import bounds as bnd
from . import ilp as ilp_mod
from . import svp as svp_mod
from .errors import (
    CrossCheckError,
    DeltaFptError,
    InfeasibleError,
    UnboundedError,
    UnsupportedShapeError,
)
from .generate import GenSpec, SplitMix64, gen_ilp, gen_lattice, gen_nonsingular
from .io import FormatError, InstanceFile, ResultFile, dumps
from .linalg import IntMatrix, has_singular_rank_submatrix, hnf_normalize, max_rank_minor, snf

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_OPTIMUM = 2
EXIT_UNSUPPORTED = 3


def _matrix_json(M: IntMatrix) -> dict:
    return {"rows": M.rows, "cols": M.cols, "data": [str(x) for x in M.entries]}


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit(obj: dict, args) -> None:
    _write(dumps(obj), getattr(args, "output", None))


def _report(args, line: str) -> None:
    if getattr(args, "report", False):
        print(line, file=sys.stderr)


def _elapsed_ms(t0: float) -> int:
    return int((time.perf_counter() - t0) * 1000)


def _certificate(solution) -> dict:
    if solution is None:
        return {"status": "none"}
    x = getattr(solution, "coeffs", None)
    if x is None:
        x = solution.x
    value = getattr(solution, "norm_p", None)
    if value is None:
        value = solution.objective
    return {"method": solution.method, "objective": str(value), "solution": [str(v) for v in x]}


# -- solvers --------------------------------------------------------------------------


def cmd_svp(args) -> int:
    inst_file = InstanceFile.parse(_read_text(args.input))
    p = args.p if args.p is not None else inst_file.p
    if p is None:
        raise FormatError("SVP needs p, either in the instance or via --p")
    t0 = time.perf_counter()
    method = args.method
    try:
        instance = svp_mod.SvpInstance(inst_file.matrix, p)
        delta = max_rank_minor(instance.H)
        sol = svp_mod.solve(instance, method, args.cross_check, args.max_states)
    except UnsupportedShapeError as exc:
        result = ResultFile("svp", method, "error", message=str(exc), stats={"elapsed_ms": _elapsed_ms(t0)})
        _emit(result.to_dict(), args)
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except CrossCheckError as exc:
        stats = {
            "elapsed_ms": _elapsed_ms(t0),
            "primary": _certificate(exc.primary),
            "oracle": _certificate(exc.oracle),
        }
        _emit(ResultFile("svp", method, "error", message=str(exc), stats=stats).to_dict(), args)
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    result = ResultFile(
        "svp",
        sol.method,
        "optimal",
        objective=sol.norm_p,
        solution=sol.coeffs,
        delta=delta,
        stats={"states": sol.states, "elapsed_ms": _elapsed_ms(t0)},
    )
    _emit(result.to_dict(), args)
    _report(args, f"svp: norm^{p} = {sol.norm_p} via {sol.method}, vector {list(sol.vector)}")
    return EXIT_OK


def cmd_ilp(args) -> int:
    inst_file = InstanceFile.parse(_read_text(args.input))
    if inst_file.b is None or inst_file.c is None:
        raise FormatError("ILP instances need both b and c")
    t0 = time.perf_counter()
    H = inst_file.matrix
    method = args.method
    shape_ok = H.rows - H.cols <= 1 and not has_singular_rank_submatrix(H)
    if method == "auto":
        if shape_ok:
            method = ilp_mod.GROUP
        elif args.allow_brute_fallback:
            method = ilp_mod.BRUTE
        else:
            method = ilp_mod.GROUP  # rejected below with exit 3
    try:
        inst = ilp_mod.IlpInstance(H, inst_file.b, inst_file.c, strict=method != ilp_mod.BRUTE)
        delta = max_rank_minor(H)
        sol = ilp_mod.solve_ilp(inst, args.cross_check, method, args.max_states)
    except UnsupportedShapeError as exc:
        _emit(ResultFile("ilp", method, "error", message=str(exc), stats={"elapsed_ms": _elapsed_ms(t0)}).to_dict(), args)
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (InfeasibleError, UnboundedError) as exc:
        status = "infeasible" if isinstance(exc, InfeasibleError) else "unbounded"
        _emit(ResultFile("ilp", method, status, message=str(exc), stats={"elapsed_ms": _elapsed_ms(t0)}).to_dict(), args)
        _report(args, f"ilp: {status}")
        return EXIT_NO_OPTIMUM
    except CrossCheckError as exc:
        stats = {
            "elapsed_ms": _elapsed_ms(t0),
            "primary": _certificate(exc.primary),
            "oracle": _certificate(exc.oracle),
        }
        _emit(ResultFile("ilp", method, "error", message=str(exc), stats=stats).to_dict(), args)
        print(f"cross-check failed: {exc}", file=sys.stderr)
        return EXIT_ERROR
    result = ResultFile(
        "ilp",
        sol.method,
        "optimal",
        objective=sol.objective,
        solution=sol.x,
        delta=delta,
        stats={"states": sol.states, "elapsed_ms": _elapsed_ms(t0)},
    )
    _emit(result.to_dict(), args)
    _report(args, f"ilp: max c.x = {sol.objective} at {list(sol.x)} via {sol.method}")
    return EXIT_OK


# -- utilities -------------------------------------------------------------------------


def cmd_hnf(args) -> int:
    H = InstanceFile.parse(_read_text(args.input)).matrix
    form = hnf_normalize(H)
    out = {
        "k": form.k,
        "s": form.s,
        "m": form.m,
        "A": _matrix_json(form.blockA),
        "B": _matrix_json(form.blockB),
        "Abar": _matrix_json(form.blockAbar),
        "Bbar": _matrix_json(form.blockBbar),
        "pivots": [str(x) for x in form.pivots],
        "row_perm": list(form.row_perm),
        "col_perm": list(form.col_perm),
        "col_transform": _matrix_json(form.col_transform),
        "form": _matrix_json(form.full()),
    }
    _emit(out, args)
    return EXIT_OK


def cmd_snf(args) -> int:
    B = InstanceFile.parse(_read_text(args.input)).matrix
    dec = snf(B)
    out = {
        "S": _matrix_json(dec.S),
        "P": _matrix_json(dec.P),
        "Q": _matrix_json(dec.Q),
        "diagonal": [str(x) for x in dec.diagonal],
    }
    _emit(out, args)
    return EXIT_OK


def cmd_delta(args) -> int:
    H = InstanceFile.parse(_read_text(args.input)).matrix
    out = {"delta": str(max_rank_minor(H)), "singular_submatrix": has_singular_rank_submatrix(H)}
    _emit(out, args)
    return EXIT_OK


def cmd_bounds(args) -> int:
    out: dict = {}
    if args.input is not None:
        H = InstanceFile.parse(_read_text(args.input)).matrix
        form = hnf_normalize(H)
        delta = max_rank_minor(H)
        s, m, n, d = form.s, form.m, form.n, form.d
        check = bnd.verify_lemma1(form, delta)
        out["lemma1_ok"] = check.ok
        if check.violation is not None:
            out["lemma1_violation"] = {k: str(v) for k, v in check.violation._asdict().items()}
    else:
        if args.delta is None:
            raise FormatError("bounds needs --delta or --input")
        delta, s, m = args.delta, args.s, args.m
        n = args.n
        d = None if n is None else n + m
    out["delta"] = str(delta)
    out["s"] = s
    out["lemma1"] = [str(bnd.lemma1_entry_bound(delta, s, i)) for i in range(s + 1)]
    out["lemma3_threshold"] = str(bnd.lemma3_threshold(delta))
    out["theorem1_threshold"] = str(bnd.theorem1_threshold(delta, m))
    if args.p is not None and n is not None:
        b = bnd.lemma2_bounds(bnd.m_constant(delta, m, args.p, d, n), delta, s)
        out["lemma2"] = {
            "p": args.p,
            "mp": str(b.mp),
            "first_candidate": str(b.first_candidate),
            "second_candidate": None if b.second_candidate is None else str(b.second_candidate),
            "alpha_l1": str(b.alpha_l1),
            "beta_abs": [str(x) for x in b.beta_abs],
            "total_l1": str(b.total_l1),
            "v_box": str(b.v_box),
            "u_box": str(b.u_box),
        }
    _emit(out, args)
    return EXIT_OK


def _gen_spec(args) -> GenSpec:
    fields: dict = {}
    if args.spec is not None:
        fields.update(json.loads(_read_text(args.spec)))
    for name in ("n", "d", "seed"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    if args.delta_max is not None:
        fields["target_delta_max"] = args.delta_max
    if args.entry_range is not None:
        fields["entry_range"] = args.entry_range
    if args.kind == "nonsingular":
        fields["require_nonsingular_submatrices"] = True
    if "d" not in fields and "n" in fields:
        fields["d"] = fields["n"]
    return GenSpec(**fields)


def generate_instance(spec: GenSpec, kind: str, p: int | None = None) -> InstanceFile:
    if kind == "ilp":
        g = gen_ilp(spec)
        return InstanceFile(g.H, None, g.b, g.c)
    rng = SplitMix64(spec.seed)
    lattice = gen_nonsingular(spec, rng) if kind == "nonsingular" else gen_lattice(spec, rng)
    return InstanceFile(lattice.H, p)


def cmd_gen(args) -> int:
    spec = _gen_spec(args)
    _write(generate_instance(spec, args.kind, args.p).serialize(), args.output)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deltafpt", description="Exact SVP and ILP solvers for bounded-minor integer matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    def io_args(p, needs_input=True):
        p.add_argument("--input", required=needs_input, help="instance JSON file, '-' for stdin")
        p.add_argument("--output", help="result file (default stdout)")

    p = sub.add_parser("svp", help="shortest lattice vector")
    io_args(p)
    p.add_argument("--p", type=int)
    p.add_argument("--method", choices=["auto", "dp", "fastpath", "brute"], default="auto")
    p.add_argument("--cross-check", action="store_true")
    p.add_argument("--max-states", type=int, default=svp_mod.DEFAULT_MAX_STATES)
    p.add_argument("--report", action="store_true", help="human-readable summary on stderr")
    p.set_defaults(func=cmd_svp)

    p = sub.add_parser("ilp", help="integer program max c.x, Hx <= b")
    io_args(p)
    p.add_argument("--method", choices=["auto", "group", "brute"], default="auto")
    p.add_argument("--cross-check", action="store_true")
    p.add_argument("--allow-brute-fallback", action="store_true")
    p.add_argument("--max-states", type=int, default=ilp_mod.DEFAULT_MAX_STATES)
    p.add_argument("--report", action="store_true", help="human-readable summary on stderr")
    p.set_defaults(func=cmd_ilp)

    for name, func, text in (
        ("hnf", cmd_hnf, "block Hermite form"),
        ("snf", cmd_snf, "Smith form of a square matrix"),
        ("delta", cmd_delta, "largest n x n minor and singular-submatrix check"),
    ):
        p = sub.add_parser(name, help=text)
        io_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("bounds", help="entry bounds, box limits and thresholds")
    io_args(p, needs_input=False)
    p.add_argument("--delta", type=int)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen", help="seeded random instance")
    p.add_argument("--spec", help="JSON generator spec; flags override its fields")
    p.add_argument("--kind", choices=["lattice", "nonsingular", "ilp"], default="lattice")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--delta-max", type=int)
    p.add_argument("--entry-range", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsupportedShapeError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (DeltaFptError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
