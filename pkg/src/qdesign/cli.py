"""Command-line interface: ``qdesign <module> <command> ...``.

Results are printed as JSON on standard output (``ame region`` prints CSV).
Exit code 0 means the computation completed, including negative verdicts;
2 means malformed input or flags; 3 means a numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from typing import NamedTuple, Sequence

import numpy as np

from . import ame, averages, birkhoff, gates, sudoq
from .core import RankDeficientError, haar_sample, load_matrix, matrix_to_json, save_matrix
from .data import resolve

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class CommandResult(NamedTuple):
    code: int
    stdout: str
    stderr: str


class UsageError(Exception):
    """Malformed flags or arguments (exit code 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# argument parsing helpers

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*(?:e[+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$", re.I)


def parse_angle(text: str) -> float:
    """Number or simple multiple of pi: ``0.3``, ``pi/4``, ``-3pi/8``, ``2*pi/3``."""
    m = _ANGLE.match(text)
    if not m or not (m.group(2) or m.group(3)):
        raise UsageError(f"cannot parse angle {text!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coef = float(m.group(2)) if m.group(2) else 1.0
    value = coef * (np.pi if m.group(3) else 1.0)
    if m.group(4):
        value /= float(m.group(4))
    return sign * value


def _csv(text: str, conv=float) -> list:
    try:
        return [conv(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad list {text!r}: {exc}") from None


def _load(path) -> np.ndarray:
    return load_matrix(resolve(path))


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _floats(a) -> list:
    return [float(x) for x in np.ravel(a)]


# --------------------------------------------------------------------------
# gates


def _gates(args):
    u = _load(args.matrix)
    if args.cmd == "ep":
        return {"e_p": gates.entangling_power(u, args.n)}
    if args.cmd == "gt":
        return {"g_t": gates.gate_typicality(u, args.n)}
    if args.cmd == "se":
        return {"s_e": gates.avg_singular_entropy(u, args.n)}
    if args.cmd == "grad":
        g = gates.ep_gradient(u, args.n)
        return {"gradient": _floats(g), "max_norm": float(np.max(np.abs(g)))}
    h = gates.ep_hessian(u, args.n)
    if args.spectrum:
        s = gates.hessian_spectrum(h)
        return {
            "eigenvalues": _floats(s["eigenvalues"]),
            "positive": s["positive"],
            "zero": s["zero"],
            "negative": s["negative"],
            "threshold": s["threshold"],
        }
    return {"hessian": [_floats(row) for row in h]}


# --------------------------------------------------------------------------
# ame


def _matrix_payload(u, n, out=None) -> dict:
    payload = {
        "e_p": gates.entangling_power(u, n),
        "g_t": gates.gate_typicality(u, n),
        "multiunitary_residuals": list(ame.is_multiunitary(u, n).residuals),
    }
    if out:
        save_matrix(out, u)
        payload["out"] = str(out)
    else:
        payload["matrix"] = matrix_to_json(u)
    return payload


def _trace_rows(trace) -> list:
    return [
        {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in t._asdict().items()}
        for t in trace
    ]


def _ame(args):
    if args.cmd == "family":
        params = [parse_angle(t) for t in args.params.split(",")]
        if len(params) != ame.FAMILY_ARITY[args.kind]:
            raise UsageError(f"family {args.kind} takes {ame.FAMILY_ARITY[args.kind]} parameters")
        return _matrix_payload(ame.family_matrix(args.kind, params), 6, args.out)
    if args.cmd == "rather":
        side = args.n * args.n
        if args.seed_matrix:
            u0 = ame.perturbed_seed(_load(args.seed_matrix), args.eps, args.seed)
        else:
            u0 = haar_sample(side, "unitary", args.seed)
        res = ame.rather_iterate(u0, args.n, max_steps=args.steps, record=False)
        payload = _matrix_payload(res.matrix, args.n, args.out)
        payload.update(converged=res.converged, steps=res.steps, reason=res.reason)
        return payload
    if args.cmd == "ascend":
        res = ame.steepest_ascent(_load(args.matrix), args.n, iters=args.iters)
        payload = _matrix_payload(res.matrix, args.n, args.out)
        payload["trace"] = _trace_rows(res.trace)
        return payload
    if args.cmd == "blocks":
        res = ame.block_search(args.strategy, seed=args.seed, budget=args.budget)
        payload = _matrix_payload(res.matrix, 6, args.out)
        payload["s_e"] = res.s_e
        return payload
    if args.cmd == "probe":
        gain = ame.row_rotation_probe(_load(args.matrix), args.n)
        return {"max_gain": gain, "ascent_found": gain > args.tol}
    scan = ame.w_region_scan(args.samples, seed=args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "x", "e_p", "g_t"])
    for ep, gt in scan.samples:
        w.writerow(["sample", "", repr(float(ep)), repr(float(gt))])
    for name, curve in (("boundary", scan.boundary), ("ellipse", scan.ellipse)):
        for x, (ep, gt) in zip(scan.parameters, curve):
            w.writerow([name, repr(float(x)), repr(float(ep)), repr(float(gt))])
    return buf.getvalue()


# --------------------------------------------------------------------------
# birkhoff


def _ray_payload(r) -> dict:
    return {
        "b": [_floats(row) for row in r.b],
        "unitary": matrix_to_json(r.u),
        "residual": birkhoff.residual(r.b, r.u),
    }


def _birkhoff(args):
    if args.cmd == "bracelet":
        rep = birkhoff.is_bracelet(birkhoff.as_bistochastic(_load(args.matrix).real))
        return {"bracelet": rep.ok, "kind": rep.kind, "pair": list(rep.pair) if rep.pair else None}
    if args.cmd == "decide4":
        b = _load(args.matrix).real
        return birkhoff.decide_unistochastic_4(b, grid=args.grid, tol=args.tol).to_json()
    if args.cmd == "circulant4":
        row = _csv(args.row)
        if len(row) != 4:
            raise UsageError("--row needs four numbers a,b,c,d")
        return birkhoff.circulant_unistochastic_4(*row).to_json()
    if args.cmd == "ray":
        p = _csv(args.perm, int) if args.perm else None
        return _ray_payload(birkhoff.ray_unitary(args.n, args.alpha, p))
    if args.cmd == "triangle":
        r = birkhoff.triangle_unistochastic(args.n, _csv(args.p, int), _csv(args.q, int), args.w1, args.w2)
        return _ray_payload(r)
    u = _load(args.matrix)
    vecs = birkhoff.equi_entangled_basis(u)
    n = u.shape[0]
    return {
        "vectors": [[[float(z.real), float(z.imag)] for z in v] for v in vecs],
        "schmidt": [_floats(birkhoff.schmidt_coefficients(v, n)) for v in vecs],
    }


# --------------------------------------------------------------------------
# averages


def _avg(args):
    dims = _csv(args.dims, int)
    if args.cmd == "formula":
        if len(dims) == 3:
            value = averages.avg_ep_tripartite(dims, args.group)
        else:
            value = averages.avg_ep_multipartite(dims, args.group)
        payload = {"value": float(value), "method": "formula"}
        exact = averages.avg_ep_multipartite(dims, args.group, exact=True)
        payload["exact"] = f"{exact.numerator}/{exact.denominator}"
        return payload
    est = averages.ep_tripartite_haar_mc(dims, args.group, args.gates, args.states, args.seed)
    return {"value": est.mean, "std_error": est.std_error, "samples": est.samples, "method": "mc"}


# --------------------------------------------------------------------------
# sudoq


def _grid_payload(g) -> dict:
    rep = sudoq.verify_sudoq(g)
    card = sudoq.cardinality(g)
    return {"ok": rep.ok, "certified": rep.certified, **card.to_json(), "grid": sudoq.grid_to_json(g)}


def _sudoq(args):
    if args.cmd in ("verify", "cardinality"):
        g = sudoq.load_grid(resolve(args.grid))
        if args.cmd == "cardinality":
            return sudoq.cardinality(g).to_json()
        rep = sudoq.verify_sudoq(g, args.tol)
        return {
            "ok": rep.ok,
            "certified": rep.certified,
            "violations": [
                {"set": v.kind, "index": v.index, "cells": [list(c) for c in v.cells], "overlap": v.overlap}
                for v in rep.violations
            ],
        }
    if args.cmd == "construct":
        rng = np.random.default_rng(args.seed)
        if args.family == "identity":
            fam = [[np.eye(args.n, dtype=complex)] * args.n for _ in range(2)]
        else:
            fam = [[haar_sample(args.n, "unitary", rng) for _ in range(args.n)] for _ in range(2)]
        return _grid_payload(sudoq.construct_from_families(*fam))
    if args.cmd == "wh":
        return _grid_payload(sudoq.construct_wh_sudoq(args.n))
    hist = sudoq.classify_random_4x4(args.samples, args.seed, args.generator)
    return {"histogram": {str(k): v for k, v in sorted(hist.items())}, "samples": args.samples}


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qdesign", description=__doc__.splitlines()[0])
    top = p.add_subparsers(dest="module", required=True, parser_class=_Parser)

    g = top.add_parser("gates", help="entangling power and related functionals")
    g.set_defaults(func=_gates)
    gs = g.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("ep", "gt", "se", "grad", "hessian"):
        c = gs.add_parser(name)
        c.add_argument("matrix")
        c.add_argument("--n", type=int, required=True)
        if name == "hessian":
            c.add_argument("--spectrum", action="store_true")

    a = top.add_parser("ame", help="searches for multiunitary matrices of order 36")
    a.set_defaults(func=_ame)
    s = a.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    c = s.add_parser("family")
    c.add_argument("--kind", choices=("A", "G", "W"), required=True)
    c.add_argument("--params", required=True, help="comma-separated angles, e.g. pi/4,3pi/8,pi/8")
    c.add_argument("--out")
    c = s.add_parser("rather")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--seed-matrix")
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--steps", type=int, default=2000)
    c.add_argument("--out")
    c = s.add_parser("ascend")
    c.add_argument("matrix")
    c.add_argument("--n", type=int, default=6)
    c.add_argument("--iters", type=int, default=1)
    c.add_argument("--out")
    c = s.add_parser("blocks")
    c.add_argument("--strategy", choices=("random", "hadamard", "invariant_vectors"), default="random")
    c.add_argument("--budget", type=int, default=1000)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out")
    c = s.add_parser("probe", help="sweep real rotations of every row pair for an e_p gain")
    c.add_argument("matrix")
    c.add_argument("--n", type=int, default=6)
    c.add_argument("--tol", type=float, default=1e-12)
    c = s.add_parser("region")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--seed", type=int, required=True)

    b = top.add_parser("birkhoff", help="unistochasticity of bistochastic matrices")
    b.set_defaults(func=_birkhoff)
    s = b.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("bracelet", "decide4", "basis"):
        c = s.add_parser(name)
        c.add_argument("matrix")
        if name == "decide4":
            c.add_argument("--grid", type=int, default=birkhoff.DEFAULT_GRID)
            c.add_argument("--tol", type=float, default=birkhoff.DEFAULT_TOL)
    c = s.add_parser("circulant4")
    c.add_argument("--row", required=True, help="a,b,c,d")
    c = s.add_parser("ray")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--perm", help="0-based permutation, comma-separated")
    c = s.add_parser("triangle")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", required=True)
    c.add_argument("--q", required=True)
    c.add_argument("--w1", type=float, required=True)
    c.add_argument("--w2", type=float, required=True)

    v = top.add_parser("avg", help="Haar averages of multipartite entangling power")
    v.set_defaults(func=_avg)
    s = v.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("formula", "mc"):
        c = s.add_parser(name)
        c.add_argument("--dims", required=True)
        c.add_argument("--group", choices=("orthogonal", "unitary"), required=True)
        if name == "mc":
            c.add_argument("--gates", type=int, default=200)
            c.add_argument("--states", type=int, default=10_000)
            c.add_argument("--seed", type=int, required=True)

    q = top.add_parser("sudoq", help="quantum Sudoku designs")
    q.set_defaults(func=_sudoq)
    s = q.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    c = s.add_parser("verify")
    c.add_argument("grid")
    c.add_argument("--tol", type=float, default=sudoq.GRID_TOL)
    c = s.add_parser("cardinality")
    c.add_argument("grid")
    c = s.add_parser("construct")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--family", choices=("haar", "identity"), default="haar")
    c.add_argument("--seed", type=int, required=True)
    c = s.add_parser("wh")
    c.add_argument("--n", type=int, required=True)
    c = s.add_parser("classify")
    c.add_argument("--samples", type=int, default=1000)
    c.add_argument("--generator", choices=sudoq.GENERATORS, default="mixed")
    c.add_argument("--seed", type=int, required=True)
    return p


def run(argv: Sequence[str] | None = None) -> CommandResult:
    """Execute one command and return its exit code, output and diagnostics."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        out = args.func(args)
    except (RankDeficientError, np.linalg.LinAlgError, FloatingPointError, RuntimeError) as exc:
        return CommandResult(EXIT_NUMERIC, "", f"numerical failure: {exc}")
    except (UsageError, ValueError, KeyError, TypeError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        return CommandResult(EXIT_INPUT, "", f"error: {msg}")
    text = out if isinstance(out, str) else _dump(out) + "\n"
    return CommandResult(EXIT_OK, text, "")


def main(argv: Sequence[str] | None = None) -> int:
    res = run(argv)
    if res.stdout:
        sys.stdout.write(res.stdout)
    if res.stderr:
        print(res.stderr, file=sys.stderr)
    return res.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
