"""``schreier-kit`` command line: one JSON report per invocation.

Exit codes: 0 success (a violated property is a result, not an error),
1 invalid input, 2 truncation window exceeded, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import DomainError, IncompatiblePermutationError, NumericError, SchreierKitError, WindowExceededError
from .extreme import dual_extreme, perturbation_oracle, primal_extreme
from .family import is_spreading
from .io import jsonable, load_json_arg, parse_family, parse_matrix, parse_permutation, parse_set, parse_vector
from .isometry import (
    SignedPermutation,
    check_isometry,
    min_of_maximal,
    permutation_compatibility,
    rigidity_suite,
    rotation_matrix,
    schreier_witness,
    search_isometry,
    star_condition,
)
from .norms import as_params, dual_norm, norm
from .orlicz import (
    LuxemburgBase,
    OrliczBase,
    OrliczFunction,
    conjugate,
    growth_diagnostics,
    is_l2_span,
    luxemburg_norm,
    orlicz_norm,
)
from .schreier import Ordinal, SchreierFamily, check_head_split, check_maximal_block_split
from .topology import check_head_split_in_derivative, exact_rank, rank, verify_rank_monotone

EXIT_OK, EXIT_INPUT, EXIT_WINDOW, EXIT_NUMERIC = 0, 1, 2, 3
_META_KEYS = ("func", "pretty", "output")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def _angle(text: str) -> float:
    s = text.strip().replace(" ", "").lower()
    m = re.fullmatch(r"(?:(-?\d+(?:\.\d+)?)\*?)?pi(?:/(\d+(?:\.\d+)?))?", s)
    if m:
        return float(m.group(1) or 1.0) * math.pi / float(m.group(2) or 1.0)
    try:
        return float(s)
    except ValueError:
        raise DomainError(f"cannot read angle {text!r}; use a float or forms like pi/6, 2pi/3") from None


def _family(args, attr="family"):
    return parse_family(getattr(args, attr), getattr(args, "window", None))


def _set_json(F):
    return None if F is None else list(F)


# ---------------------------------------------------------------- commands

def cmd_member(args):
    fam = _family(args)
    F = parse_set(args.set)
    return {"member": fam.member(F), "set": list(F), "family": fam.describe(), "window": fam.window}


def _base(args):
    if not args.orlicz:
        return None, "lp"
    M = OrliczFunction.from_json(_maybe_json(args.orlicz))
    return (OrliczBase(M) if args.orlicz_norm == "orlicz" else LuxemburgBase(M)), args.orlicz_norm


def _maybe_json(text):
    s = text.strip()
    return load_json_arg(s) if s.startswith(("{", "[")) or os.path.isfile(s) else s


def cmd_norm(args):
    fam = _family(args)
    x = parse_vector(args.vector)
    base, kind = _base(args)
    res = norm(fam, args.p, x, base=base)
    return {"norm": res.value, "attained": list(res.attained), "base": kind}


def cmd_dual_norm(args):
    fam = _family(args)
    xs = parse_vector(args.vector)
    res = dual_norm(fam, args.p, xs, method=args.method, tol=args.tol)
    return {"dual_norm": res.value, "lower": res.lower, "upper": res.upper, "method": res.method,
            "lq_norm": xs.lp(as_params(args.p).q), "support_member": fam.member(xs.support),
            "maximizer": res.maximizer.to_json()}


def cmd_maximal(args):
    fam = _family(args)
    top = args.upto or fam.window
    sets = fam.maximal_elements(range(1, top + 1))
    return {"maximal": [list(G) for G in sets], "count": len(sets), "upto": top,
            "window_bounded": fam.lazy}


def cmd_spreading(args):
    fam = _family(args)
    res = is_spreading(fam, args.bound or fam.window)
    return {"spreading": res.spreading,
            "witness": None if res.witness is None else [list(res.witness[0]), list(res.witness[1])],
            "window_bounded": True}


def cmd_rank(args):
    if args.set is not None:
        fam = _family(args)
        F = parse_set(args.set)
        res = rank(fam, F)
        out = {"set": list(F), **res.to_json(), "shadow_rank": res.shadow_value}
        if isinstance(fam, SchreierFamily):
            out["exact"] = str(exact_rank(fam.alpha, F))
        return out
    if args.alpha is None:
        raise DomainError("rank needs --alpha with --n-max, or --family with --set")
    alpha = Ordinal.parse(args.alpha, args.fundamental)
    ok, table = verify_rank_monotone(alpha, args.n_max, args.window)
    return {"alpha": str(alpha), "window": table.window, "ranks": table.to_json(),
            "strictly_increasing": ok, "truncated_consistent": table.consistent}


def cmd_extreme(args):
    fam = _family(args)
    x = parse_vector(args.vector)
    out: dict[str, Any] = {}
    if args.dual:
        out.update(dual_extreme(fam, args.p, x, with_dual_norm=True).to_json())
        out["space"] = "dual"
        return out
    run_oracle = args.oracle or not isinstance(fam, SchreierFamily)
    if isinstance(fam, SchreierFamily):
        out.update(primal_extreme(fam, args.p, x).to_json())
        out["method"] = "criterion"
    if run_oracle:
        o = perturbation_oracle(fam, args.p, x, directions=args.directions, seed=args.seed)
        out["oracle"] = o.to_json()
        if "is_extreme" not in out:
            out["method"] = "oracle"
            out["is_extreme"] = None if not o.not_extreme else False
        out["seed"] = args.seed
    return out


def _perm(args):
    pi = parse_permutation(args.perm)
    signs = parse_permutation(args.signs) if args.signs else None
    return SignedPermutation(pi, signs)


def cmd_perm_check(args):
    fam = _family(args)
    sp = _perm(args)
    target = _family(args, "target") if args.target else None
    res = permutation_compatibility(fam, sp, target)
    out = {"compatible": res.compatible,
           "witness": None if res.witness is None else [list(res.witness[0]), list(res.witness[1])],
           "witness_source": None if res.witness is None else "window",
           "window_bounded": res.window_bounded and res.compatible}
    if res.compatible and target is None and isinstance(fam, SchreierFamily):
        w = schreier_witness(fam.alpha, sp.pi)
        if w is not None:
            out.update(compatible=False, witness=[list(w[0]), list(w[1])],
                       witness_source="constructed", window_bounded=False)
    if out["compatible"]:
        J = sp.matrix()
        out["matrix"] = J.tolist()
        if args.p is not None:
            out["isometry_deviation"] = check_isometry(target or fam, args.p, J, samples=args.samples,
                                                        seed=args.seed).max_deviation
            out["seed"] = args.seed
    return out


def cmd_check_isometry(args):
    fam = _family(args)
    if args.matrix is not None:
        J = parse_matrix(args.matrix)
    elif args.rotation is not None:
        if args.dim is None:
            raise DomainError("--rotation needs --dim")
        i, j = parse_permutation(args.plane)
        J = rotation_matrix(args.dim, _angle(args.rotation), i, j)
    else:
        raise DomainError("check-isometry needs --matrix or --rotation")
    rep = check_isometry(fam, args.p, J, samples=args.samples, seed=args.seed)
    return {**rep.to_json(), "is_isometry": rep.is_isometry, "dim": int(J.shape[0])}


def cmd_search_isometry(args):
    fam = _family(args)
    rep = search_isometry(fam, args.p, args.dim, restarts=args.restarts, seed=args.seed, iters=args.iters)
    return {**rep.to_json(), "dim": args.dim,
            "maximal_sets": [list(G) for G in fam.maximal_elements(range(1, args.dim + 1))]}


def _star_row(fam, j, k):
    r = star_condition(fam, j, k)
    verified = None
    if r.holds:
        W = r.witness
        verified = bool(fam.member(W) and (j in W or k in W) and not fam.member(W.union((j, k))))
    return {"j": j, "k": k, "holds": r.holds, "witness": _set_json(r.witness), "verified": verified,
            "window_bounded": r.window_bounded}


def cmd_star(args):
    fam = _family(args)
    if args.all is not None:
        rows = [_star_row(fam, j, k) for j in range(1, args.all + 1) for k in range(1, args.all + 1) if j != k]
        return {"pairs": rows, "all_hold": all(r["holds"] for r in rows),
                "all_verified": all(r["verified"] for r in rows)}
    if args.j is None or args.k is None:
        raise DomainError("star needs --j and --k, or --all N")
    return _star_row(fam, args.j, args.k)


def cmd_min_max(args):
    fam = _family(args)
    ok, table = min_of_maximal(fam, args.k_max)
    return {"holds": ok, "table": {str(k): _set_json(v) for k, v in table.items()}}


def cmd_rigidity(args):
    alpha = Ordinal.parse(args.alpha, args.fundamental)
    return rigidity_suite(alpha, args.p, args.dim, seed=args.seed, restarts=args.restarts,
                          samples=args.samples)


def cmd_properties(args):
    alpha = Ordinal.parse(args.alpha, args.fundamental)
    if args.check == "head-split":
        res = check_head_split(alpha, instances=args.instances, seed=args.seed)
    elif args.check == "head-split-derivative":
        res = check_head_split_in_derivative(alpha, args.mu, instances=args.instances, seed=args.seed)
    else:
        res = check_maximal_block_split(alpha, top=args.top)
    return {"check": res.name, "instances": res.instances, "violations": len(res.violations),
            "examples": [str(v) for v in res.violations[:5]], "ok": res.ok,
            **({"seed": args.seed} if args.check != "maximal-split" else {})}


def cmd_orlicz(args):
    M = OrliczFunction.from_json(_maybe_json(args.function))
    out: dict[str, Any] = {"function": M.to_json()}
    if args.eval:
        pts = [float(t) for t in args.eval.split(",") if t.strip()]
        out["values"] = [M(t) for t in pts]
        out["derivatives"] = [M.derivative(t) for t in pts]
    span = is_l2_span(M, args.samples)
    out["l2_span"] = span.to_json()
    if args.vector is not None:
        x = parse_vector(args.vector)
        out["luxemburg_norm"] = luxemburg_norm(M, x)
        out["orlicz_norm"] = orlicz_norm(M, x)
    if args.conjugate is not None:
        out["conjugate"] = conjugate(M, args.conjugate, grid=args.grid)
    if args.growth:
        out["growth"] = growth_diagnostics(M).to_json()
    return out


# ---------------------------------------------------------------- batch

def _lookup(report, path: str):
    cur = report
    for part in path.split(".") if path else []:
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def _check(report, exp: dict) -> dict:
    path = exp.get("path", "")
    try:
        got = _lookup(report, path)
    except (KeyError, IndexError, ValueError):
        return {"path": path, "ok": False, "got": None, "reason": "missing"}
    ok = True
    if "equals" in exp:
        ok &= got == exp["equals"]
    if "approx" in exp:
        ok &= isinstance(got, (int, float)) and abs(got - exp["approx"]) <= exp.get("tol", 0.0)
    for op, fn in (("lt", float.__lt__), ("le", float.__le__), ("gt", float.__gt__), ("ge", float.__ge__)):
        if op in exp:
            ok &= isinstance(got, (int, float)) and fn(float(got), float(exp[op]))
    return {"path": path, "ok": bool(ok), "got": got}


def _threads() -> int:
    env = os.environ.get("SCHREIER_KIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"SCHREIER_KIT_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


def _run_entry(entry) -> dict:
    if not isinstance(entry, dict) or not isinstance(entry.get("argv"), list):
        return {"status": "error", "exit_code": EXIT_INPUT,
                "error": "entry needs an 'argv' list"}
    argv = [str(a) for a in entry["argv"]]
    if argv and argv[0] == "batch":
        return {"status": "error", "exit_code": EXIT_INPUT, "error": "nested batch is not allowed"}
    code, report = run(argv)
    out = {"status": "error" if code else "ok", "exit_code": code, "report": report}
    if code == 0 and entry.get("expect"):
        checks = [_check(report, e) for e in entry["expect"]]
        out["checks"] = checks
        out["status"] = "pass" if all(c["ok"] for c in checks) else "fail"
    return out


def cmd_batch(args):
    manifest = load_json_arg(args.manifest)
    entries = manifest.get("entries", []) if isinstance(manifest, dict) else manifest
    if not isinstance(entries, list):
        raise DomainError("manifest must be a list of entries or {'entries': [...]}")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(_run_entry, entries))
    rows, criteria = [], {}
    for k, (e, r) in enumerate(zip(entries, results)):
        name = e.get("name", f"entry-{k}") if isinstance(e, dict) else f"entry-{k}"
        crit = str(e.get("criterion", name)) if isinstance(e, dict) else name
        rows.append({"name": name, "criterion": crit, **r})
        good = r["status"] in ("ok", "pass")
        criteria[crit] = criteria.get(crit, True) and good
    lines = [f"{c}: {'PASS' if ok else 'FAIL'}" for c, ok in criteria.items()]
    return {"entries": rows, "summary": {c: ("pass" if ok else "fail") for c, ok in criteria.items()},
            "errored": sum(r["status"] == "error" for r in results), "lines": lines}


# ---------------------------------------------------------------- parser

def _add_family(sp, required=True):
    sp.add_argument("--family", required=required,
                    help="schreier:ALPHA[:succ|plain], counter[:3-4,5-7], inline JSON or a JSON file")
    sp.add_argument("--window", type=int, default=None, help="override the family truncation window")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="schreier-kit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func: Callable, help_: str):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--pretty", action="store_true", help="indented JSON")
        sp.add_argument("--output", default=None, help="write the report to this file")
        return sp

    sp = add("member", cmd_member, "membership of a finite set")
    _add_family(sp)
    sp.add_argument("--set", required=True)

    sp = add("norm", cmd_norm, "family norm of a vector")
    _add_family(sp)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--orlicz", default=None, help="use an Orlicz base norm: builtin name or JSON")
    sp.add_argument("--orlicz-norm", choices=("luxemburg", "orlicz"), default="luxemburg")

    sp = add("dual-norm", cmd_dual_norm, "dual norm of a functional with certified bounds")
    _add_family(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--method", choices=("auto", "optimize"), default="auto")
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = add("maximal", cmd_maximal, "maximal members inside [1, N]")
    _add_family(sp)
    sp.add_argument("--upto", type=int, default=None)

    sp = add("spreading", cmd_spreading, "exhaustive spreading check")
    _add_family(sp)
    sp.add_argument("--bound", type=int, default=None)

    sp = add("rank", cmd_rank, "Cantor-Bendixson ranks")
    _add_family(sp, required=False)
    sp.add_argument("--set", default=None)
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--fundamental", choices=("succ", "plain"), default="succ")
    sp.add_argument("--n-max", type=int, default=6)

    sp = add("extreme", cmd_extreme, "extreme-point test in the unit ball or its dual")
    _add_family(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--dual", action="store_true")
    sp.add_argument("--oracle", action="store_true", help="also run the perturbation oracle")
    sp.add_argument("--directions", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("perm-check", cmd_perm_check, "compatibility of a signed permutation")
    _add_family(sp)
    sp.add_argument("--perm", required=True, help="1-based images, e.g. 2,1,3")
    sp.add_argument("--signs", default=None)
    sp.add_argument("--target", default=None, help="second family for (F1, F2)-compatibility")
    sp.add_argument("--p", type=float, default=None, help="also check the induced matrix as an isometry")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("check-isometry", cmd_check_isometry, "sampled isometry check of a matrix")
    _add_family(sp)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--matrix", default=None)
    sp.add_argument("--rotation", default=None, help="angle, e.g. pi/6")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--plane", default="1,2")
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("search-isometry", cmd_search_isometry, "randomized search for a non-permutation isometry")
    _add_family(sp)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--restarts", type=int, default=1000)
    sp.add_argument("--iters", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("star", cmd_star, "find a member meeting {j,k} whose union with {j,k} leaves the family")
    _add_family(sp)
    sp.add_argument("--j", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--all", type=int, default=None, help="check every pair j != k <= N")

    sp = add("min-max", cmd_min_max, "a maximal member with each prescribed minimum")
    _add_family(sp)
    sp.add_argument("--k-max", type=int, required=True)

    sp = add("rigidity", cmd_rigidity, "permutation rigidity suite for S_alpha")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--fundamental", choices=("succ", "plain"), default="succ")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--p", type=float, default=3.0)
    sp.add_argument("--restarts", type=int, default=200)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("properties", cmd_properties, "randomized or exhaustive structural checks on S_alpha")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--fundamental", choices=("succ", "plain"), default="succ")
    sp.add_argument("--check", choices=("head-split", "head-split-derivative", "maximal-split"), required=True)
    sp.add_argument("--instances", type=int, default=10_000)
    sp.add_argument("--mu", type=int, default=1)
    sp.add_argument("--top", type=int, default=12)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("orlicz", cmd_orlicz, "Orlicz function evaluation and norms")
    sp.add_argument("--function", default="example-c", help="builtin name or piecewise JSON")
    sp.add_argument("--eval", default=None, help="comma-separated points")
    sp.add_argument("--vector", default=None)
    sp.add_argument("--conjugate", type=float, default=None)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--growth", action="store_true", help="report growth samples near 0 (no verdict)")

    sp = add("batch", cmd_batch, "run a manifest of commands")
    sp.add_argument("manifest")
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _META_KEYS}


def _error(kind: str, exc: Exception) -> dict:
    out = {"type": kind, "message": str(exc)}
    if isinstance(exc, WindowExceededError):
        out.update(window=exc.window, offending=None if exc.offending is None else list(exc.offending))
    if isinstance(exc, NumericError) and exc.bounds is not None:
        out["bounds"] = list(exc.bounds)
    return out


def run(argv: list[str]) -> tuple[int, dict]:
    """Parse ``argv``, execute, and return ``(exit code, report)``."""
    try:
        args = build_parser().parse_args(argv)
    except DomainError as e:
        return EXIT_INPUT, {"version": __version__, "error": _error("invalid-input", e)}
    meta = {"version": __version__, "command": args.command, "config": _config(args)}
    try:
        result = args.func(args)
        code = EXIT_OK
    except WindowExceededError as e:
        result, code = {"error": _error("window-exceeded", e)}, EXIT_WINDOW
    except NumericError as e:
        result, code = {"error": _error("numeric-failure", e)}, EXIT_NUMERIC
    except (DomainError, IncompatiblePermutationError, SchreierKitError, ValueError) as e:
        result, code = {"error": _error("invalid-input", e)}, EXIT_INPUT
    return code, jsonable({**result, **meta})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, report = run(argv)
    pretty = "--pretty" in argv
    text = json.dumps(report, indent=2 if pretty else None, ensure_ascii=False)
    out_path = None
    if "--output" in argv:
        i = argv.index("--output")
        out_path = argv[i + 1] if i + 1 < len(argv) else None
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if code and "error" in report:
        sys.stderr.write(f"schreier-kit: {report['error']['message']}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
