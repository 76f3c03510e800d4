"""Command-line front end.

Every command prints a JSON report on stdout and a short summary on stderr.
Exit status: 0 success, 1 domain error or failed check, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .certificate import boundary_certificate, check_movable
from .completion import completion_lower_bound, fit_completion
from .constructions import (
    NmfPair,
    bipartite_factor,
    edm_factor_any,
    rank2_factor,
    separable_columns,
    separable_factor,
    symmetrization_factor,
)
from .errors import SNTError
from .matcore import SymMatrix, Trifactor, as_sym, numerical_rank, spectral_split, verify_trifactorization
from .matio import MatrixFormatError, dumps, file_digest, read_matrix, write_matrix
from .perturbation import PerronSimilarity, extract_similarity, optimize_S, perturb_factorization
from .reproduce import EXAMPLES, constants, run as run_examples
from .search import FitOptions, bounds_report, fit_trifactorization, snt_upper_bound

SCHEMA = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("SNT_SEED")
    try:
        return int(raw) if raw is not None else 0
    except ValueError:
        return 0


def _fit_opts(args) -> FitOptions:
    return FitOptions(restarts=args.restarts, max_iters=args.max_iters, tol_residual=args.tol_residual, seed=args.seed)


def _factor_out(F: Trifactor) -> dict:
    return {"k": F.k, "B": F.B, "C": F.C}


def _write(args, **mats):
    """Write matrices into ``--out-dir`` when given; return the written paths."""
    if not getattr(args, "out_dir", None):
        return {}
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, M in mats.items():
        p = out / f"{name}.mat"
        write_matrix(p, M)
        paths[name] = str(p)
    return paths


# ---------------------------------------------------------------- commands


def cmd_verify(args):
    A = read_matrix(args.A)
    F = Trifactor(read_matrix(args.B), read_matrix(args.C))
    rep = verify_trifactorization(A, F, tol=args.tol)
    out = {
        "valid": rep.valid,
        "max_residual": rep.max_residual,
        "nonneg_ok": rep.nonneg_ok,
        "symmetry_ok": rep.symmetry_ok,
        "k": F.k,
    }
    return out, rep.valid, f"valid={rep.valid} max_residual={rep.max_residual:.3g} k={F.k}"


def cmd_construct(args):
    kind = args.kind
    if kind == "edm":
        if len(args.operands) != 1:
            raise argparse.ArgumentTypeError("edm takes a single size n")
        n = int(args.operands[0])
        M, F = edm_factor_any(n)
        A = M.entries
    elif kind in ("bipartite", "sym"):
        if len(args.operands) != 2:
            raise argparse.ArgumentTypeError(f"{kind} takes two matrix files U V")
        pair = NmfPair(read_matrix(args.operands[0]), read_matrix(args.operands[1]))
        F = bipartite_factor(pair) if kind == "bipartite" else symmetrization_factor(pair)
        A = F.product()
    else:
        if len(args.operands) != 1:
            raise argparse.ArgumentTypeError(f"{kind} takes one matrix file A")
        A = as_sym(read_matrix(args.operands[0])).entries
        if kind == "rank2":
            F = rank2_factor(A)
        else:
            cols = [int(c) for c in args.cols.split(",")] if args.cols else separable_columns(A)
            F = separable_factor(A, cols)
    rep = verify_trifactorization(A, F)
    files = _write(args, A=A, B=F.B, C=F.C)
    out = {"kind": kind, "A": A, "factor": _factor_out(F), "max_residual": rep.max_residual, "valid": rep.valid}
    if files:
        out["files"] = files
    return out, rep.valid, f"{kind}: n={F.n} k={F.k} residual={rep.max_residual:.3g}"


def cmd_perturb(args):
    A = SymMatrix(read_matrix(args.A))
    sd = spectral_split(A)
    if args.S:
        S = PerronSimilarity.from_matrix(read_matrix(args.S))
    elif args.S_inv:
        S = PerronSimilarity.from_inverse(read_matrix(args.S_inv))
    else:
        S, _ = optimize_S(A, budget=args.budget, seed=args.seed, spectral=sd)
    res = perturb_factorization(A, S, spectral=sd, margin=args.margin)
    out = {
        "rank": sd.r,
        "beta": res.beta,
        "alpha": res.alpha,
        "S": S.S,
        "factor": _factor_out(res.F),
        "A_perturbed": res.A_perturbed.entries,
        "rank_perturbed": numerical_rank(res.A_perturbed),
    }
    if sd.r > 1:
        sim = extract_similarity(spectral_split(res.A_perturbed), res.F)
        out["similarity_check"] = {
            "b_residual": sim.b_residual,
            "c_residual": sim.c_residual,
            "first_col_nonneg": sim.first_col_nonneg,
            "first_row_inv_nonneg": sim.first_row_inv_nonneg,
        }
    files = _write(args, A_perturbed=res.A_perturbed.entries, B=res.F.B, C=res.F.C, S=S.S)
    if files:
        out["files"] = files
    return out, True, f"beta={res.beta:.12g} alpha={res.alpha:.12g} k={res.F.k}"


def cmd_certify(args):
    B, C = read_matrix(args.B), read_matrix(args.C)
    F = Trifactor(B, C)
    cert = boundary_certificate(F.B, F.C, args.tol)
    movable = check_movable(F.B, F.C, args.tol)
    out = {
        "movable": movable,
        "certificate": None if cert is None else {"X": cert.X, "W": cert.W, "residual": cert.residual(F.B, F.C)},
        "interpretation": (
            "no nonzero solution: the factorization can be moved toward positive factors"
            if cert is None
            else "nonzero solution: this factorization cannot be moved locally to positive factors; "
            "this does not prove the matrix lies on the boundary"
        ),
    }
    return out, True, f"movable={movable} certificate={'none' if cert is None else 'found'}"


def _bounds_out(rep) -> dict:
    return {
        "rank_lb": rep.rank_lb,
        "bool_rank_lb": rep.bool_rank_lb,
        "inertia": list(rep.inertia_pair),
        "upper_n": rep.upper_n,
        "upper_fit": rep.upper_fit,
        "interval": list(rep.interval),
        "per_k": list(rep.per_k),
        "cp": "unknown",
        "notes": rep.notes,
    }


def cmd_bounds(args):
    rep = bounds_report(read_matrix(args.A), _fit_opts(args), fit=not args.no_fit)
    lo, hi = rep.interval
    return _bounds_out(rep), True, f"st+ in [{lo}, {hi}]"


def cmd_search(args):
    A = as_sym(read_matrix(args.A))
    opts = _fit_opts(args)
    if args.k is not None:
        fit = fit_trifactorization(A, args.k, opts)
        ok = fit.rel_residual <= opts.tol_residual
        out = {"k": args.k, "rel_residual": fit.rel_residual, "success": ok, "factor": _factor_out(fit.factor)}
        F = fit.factor
        summary = f"k={args.k} rel_residual={fit.rel_residual:.3g} success={ok}"
    else:
        ub = snt_upper_bound(A, opts)
        F = ub.factor
        out = {"k": ub.k, "from_fit": ub.from_fit, "per_k": list(ub.per_k), "factor": _factor_out(F)}
        summary = f"upper bound k={ub.k}"
    files = _write(args, B=F.B, C=F.C)
    if files:
        out["files"] = files
    return out, True, summary


def cmd_complete(args):
    A1, A2 = read_matrix(args.A1), read_matrix(args.A2)
    lb = completion_lower_bound(A1, A2)
    res = fit_completion(A1, A2, args.k, args.strict_x, _fit_opts(args))
    A = res.F.product()
    out = {
        "k": args.k,
        "strict_x": args.strict_x,
        "lower_bound": lb,
        "success": res.success,
        "rel_residual": res.rel_residual,
        "penalty": res.penalty,
        "X": res.X,
        "A": A,
        "factor": _factor_out(res.F),
    }
    files = _write(args, A=A, X=res.X, B=res.F.B, C=res.F.C)
    if files:
        out["files"] = files
    return out, True, f"k={args.k} success={res.success} rel_residual={res.rel_residual:.3g} (lower bound {lb})"


def cmd_examples(args):
    results = run_examples(args.name, seed=args.seed)
    ok = all(r.passed for r in results)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}", file=sys.stderr)
        for c in r.checks:
            row = c.row()
            print(
                f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: expected {row['expected']!r}, computed {row['computed']!r}",
                file=sys.stderr,
            )
        for n in r.notes:
            print(f"    note: {n}", file=sys.stderr)
    out = {"constants": constants(), "examples": [r.report() for r in results], "pass": ok}
    return out, ok, f"{sum(r.passed for r in results)}/{len(results)} examples pass"


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="snt", description="Symmetric nonnegative trifactorization toolkit.")
    p.add_argument("--version", action="version", version=f"snt {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fit_flags(q):
        q.add_argument("--seed", type=int, default=_default_seed())
        q.add_argument("--restarts", type=int, default=30)
        q.add_argument("--max-iters", type=int, default=5000)
        q.add_argument("--tol-residual", type=float, default=1e-7)

    q = sub.add_parser("verify", help="check A = B C B^T")
    q.add_argument("A")
    q.add_argument("B")
    q.add_argument("C")
    q.add_argument("--tol", type=float, default=1e-9)
    q.set_defaults(func=cmd_verify, files=("A", "B", "C"))

    q = sub.add_parser("construct", help="closed-form factorizations")
    q.add_argument("kind", choices=["edm", "bipartite", "sym", "rank2", "separable"])
    q.add_argument("operands", nargs="+", help="edm: n; bipartite/sym: U V; rank2/separable: A")
    q.add_argument("--cols", help="comma-separated anchor columns (0-based) for separable")
    q.add_argument("--out-dir")
    q.set_defaults(func=cmd_construct, files=())

    q = sub.add_parser("perturb", help="minimal Perron perturbation factoring at rank")
    q.add_argument("A")
    g = q.add_mutually_exclusive_group()
    g.add_argument("--S", help="similarity matrix file")
    g.add_argument("--S-inv", dest="S_inv", help="file with the inverse of the similarity")
    q.add_argument("--budget", type=int, default=2000, help="search budget when no similarity is given")
    q.add_argument("--margin", type=float, default=0.0)
    q.add_argument("--seed", type=int, default=_default_seed())
    q.add_argument("--out-dir")
    q.set_defaults(func=cmd_perturb, files=("A", "S", "S_inv"))

    q = sub.add_parser("certify", help="local movability certificate for a factor pair")
    q.add_argument("B")
    q.add_argument("C")
    q.add_argument("--tol", type=float, default=1e-9)
    q.set_defaults(func=cmd_certify, files=("B", "C"))

    q = sub.add_parser("bounds", help="interval for the SNT-rank")
    q.add_argument("A")
    q.add_argument("--no-fit", action="store_true", help="skip the fitting upper bound")
    fit_flags(q)
    q.set_defaults(func=cmd_bounds, files=("A",))

    q = sub.add_parser("search", help="fit at a given k, or scan k upward")
    q.add_argument("A")
    q.add_argument("--k", type=int)
    q.add_argument("--out-dir")
    fit_flags(q)
    q.set_defaults(func=cmd_search, files=("A",))

    q = sub.add_parser("complete", help="fit a block completion [[A1, X], [X^T, A2]]")
    q.add_argument("A1")
    q.add_argument("A2")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--strict-x", action="store_true", help="require a positive off-diagonal block")
    q.add_argument("--out-dir")
    fit_flags(q)
    q.set_defaults(func=cmd_complete, files=("A1", "A2"))

    q = sub.add_parser("paper-examples", help="reproduce the worked examples")
    q.add_argument("name", choices=[*EXAMPLES, "all"])
    q.add_argument("--seed", type=int, default=_default_seed())
    q.set_defaults(func=cmd_examples, files=())
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    inputs = {}
    try:
        for name in args.files:
            path = getattr(args, name, None)
            if path:
                inputs[path] = file_digest(path)
        if args.command == "construct" and args.kind != "edm":
            inputs.update({p: file_digest(p) for p in args.operands})
        outputs, ok, summary = args.func(args)
    except MatrixFormatError as exc:
        print(f"snt {args.command}: {exc}", file=sys.stderr)
        return 2
    except (SNTError, np.linalg.LinAlgError) as exc:
        print(f"snt {args.command}: {exc}", file=sys.stderr)
        return 1
    except (OSError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"snt {args.command}: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "inputs": inputs,
        "seed": getattr(args, "seed", None),
        "outputs": outputs,
        "wall_time": time.perf_counter() - start,
        "version": __version__,
    }
    sys.stdout.write(dumps(report) + "\n")
    print(f"snt {args.command}: {summary}", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
