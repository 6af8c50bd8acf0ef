"""Batch command line front end.

    varopkit group --type symmetric --n 3
    varopkit norm --target fourier --input u.json
    varopkit check --suite all --group c2 --n 1 --seed 7

Exit codes: 0 success, 2 input error, 3 certificate flagged, 4 failed check.
Reports contain no timings, so equal seeds and configs give identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import transfer as tr
from .errors import SchemaError, VaropkitError
from .fourier import AFn, a_norm_exact, a_norm_variational
from .group import FiniteGroup, MultiFn, build_group, describe, parse_descriptor
from .norms import schur_norm
from .reps import dual_of
from .varopoulos import VFn, v_norm

logger = logging.getLogger("varopkit")

EXIT_OK, EXIT_INPUT, EXIT_FLAGGED, EXIT_FAILED = 0, 2, 3, 4
FORMATS = ("json", "csv", "text")
SUITES = ("isometry", "lemma51", "transfer", "ditkin")
EXHAUSTIVE_POINTS = 9  # enumerate every subset of G^n up to this many points


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    group: dict
    n: int = 1
    seed: int = 0
    tol: float = 1e-6
    restarts: int = 4
    bond_cap: int = 8
    cases: int = 5
    format: str = "json"

    def __post_init__(self):
        if self.n < 1:
            raise InputError("--n must be at least 1")
        if self.seed < 0:
            raise InputError("--seed must be non-negative")
        if not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.restarts < 0 or self.bond_cap < 1 or self.cases < 1:
            raise InputError("--restarts must be non-negative, --bond-cap and --cases positive")
        if self.format not in FORMATS:
            raise InputError(f"--format must be one of {', '.join(FORMATS)}")

    def to_json(self) -> dict:
        out = asdict(self)
        out["group"] = describe(self.group)
        return out


def _threads() -> int:
    raw = os.environ.get("VAROPKIT_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise InputError(f"VAROPKIT_THREADS must be an integer, got {raw!r}") from None
    if k < 1:
        raise InputError("VAROPKIT_THREADS must be positive")
    return k


def _ordered_map(fn: Callable, items: list) -> list:
    k = min(_threads(), max(1, len(items)))
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def _case_rng(cfg: RunConfig, i: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, i])


# ---------------------------------------------------------------------------
# output


def _flatten(obj, prefix="") -> list[tuple[str, str]]:
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows += _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and all(isinstance(v, dict) for v in obj):
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}{i}.")
    else:
        rows.append((prefix[:-1], json.dumps(obj) if isinstance(obj, (list, bool)) or obj is None else str(obj)))
    return rows


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True)
    rows = _flatten(report)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        writer.writerows(rows)
        return buf.getvalue().rstrip("\n")
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# group


def cmd_group(desc: dict) -> dict:
    G = build_group(desc)
    dual = dual_of(G)
    dims = dual.dims
    return {
        "group": describe(desc),
        "order": G.order,
        "abelian": G.is_abelian(),
        "irrep_dims": dims,
        "sum_of_squares": int(sum(d * d for d in dims)),
        "sum_of_squares_ok": sum(d * d for d in dims) == G.order,
        "orthogonality_residual": float(dual.schur_orthogonality_residual()),
    }


# ---------------------------------------------------------------------------
# norm


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None


def _parse_matrix(rows) -> np.ndarray:
    try:
        M = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("matrix must be a list of rows of numbers or [re, im] pairs") from None
    if M.ndim == 3 and M.shape[2] == 2:
        M = M[..., 0] + 1j * M[..., 1]
    if M.ndim != 2 or M.size == 0:
        raise SchemaError("matrix must be two dimensional and non-empty")
    return M


def cmd_norm(target: str, obj, cfg: RunConfig) -> tuple[dict, bool]:
    if not isinstance(obj, dict):
        raise SchemaError("input must be a JSON object")
    if target == "schur":
        W = _parse_matrix(obj["matrix"]) if "matrix" in obj else MultiFn.from_json(obj).values
        if W.ndim != 2:
            raise SchemaError("the Schur norm needs a matrix or a function of two variables")
        cert = schur_norm(W, cfg.tol)
    elif target == "fourier":
        u = AFn.from_json(obj)
        cert, _ = a_norm_variational(u, restarts=cfg.restarts, seed=cfg.seed, tol=cfg.tol)
    else:
        w = VFn.from_json(obj)
        if w.arity < 2:
            raise SchemaError("the Haagerup norm needs at least two variables")
        cert = v_norm(w, tol=cfg.tol, bond_cap=cfg.bond_cap, seed=cfg.seed)
    report = {"target": target, "certificate": cert.to_json(), "width": float(cert.width)}
    return report, cert.flagged


# ---------------------------------------------------------------------------
# check suites


def _check(name: str, devs: list[float], oks: list[bool], **extra) -> dict:
    return {
        "name": name,
        "pass": bool(all(oks)),
        "cases": len(oks),
        "failures": int(sum(not ok for ok in oks)),
        "max_deviation": float(max(devs, default=0.0)),
        **extra,
    }


def suite_isometry(G: FiniteGroup, cfg: RunConfig) -> list[dict]:
    dual = dual_of(G)

    def one(i):
        u = AFn.random(G, cfg.n, _case_rng(cfg, i))
        if cfg.n == 1:
            c = schur_norm(tr.N_n(u).values, cfg.tol)
            exact = a_norm_exact(u, dual)
            dev = max(abs(c.upper - exact), abs(c.lower - exact))
            return dev, dev <= 1e-5, 0.0
        ca, wit = a_norm_variational(u, restarts=cfg.restarts, seed=cfg.seed + i, tol=cfg.tol, dual=dual)
        Nu = tr.N_n(u, witness=wit, dual=dual)
        cv = v_norm(Nu, tol=cfg.tol, bond_cap=cfg.bond_cap, seed=cfg.seed + i, restarts=0, max_sweeps=2)
        excess = Nu.factorization.bound() - wit.value()
        gap = max(ca.lower - cv.upper, cv.lower - ca.upper, 0.0)
        return max(gap, excess, 0.0), ca.overlaps(cv) and excess <= 1e-6, gap

    res = _ordered_map(one, list(range(cfg.cases)))
    return [_check("isometry", [r[0] for r in res], [r[1] for r in res], arity=cfg.n)]


def suite_lemma51(G: FiniteGroup, cfg: RunConfig) -> list[dict]:
    n = cfg.n

    def one(i):
        rng = _case_rng(cfg, i)
        w = MultiFn.random(G, n + 1, rng)
        T = MultiFn.random(G, n, rng)
        u = MultiFn.random(G, n, rng)
        S = MultiFn.random(G, n + 1, rng)
        return tr.lemma51_check(w, T), tr.dual_pairing_ops(u, T, w, S)["deviation"]

    res = _ordered_map(one, list(range(max(cfg.cases, 10))))
    d1, d2 = [r[0] for r in res], [r[1] for r in res]
    return [
        _check("adjoint_identity", d1, [d <= 1e-10 for d in d1], arity=n),
        _check("adjoint_closed_forms", d2, [d <= 1e-10 for d in d2], arity=n),
    ]


def _sets(G: FiniteGroup, cfg: RunConfig) -> list[tr.ClosedSet]:
    size = G.order**cfg.n
    if size <= EXHAUSTIVE_POINTS:
        return list(tr.all_subsets(G, cfg.n))
    rng = np.random.default_rng([cfg.seed, 10**6])
    out = [tr.ClosedSet.empty(G, cfg.n), tr.ClosedSet.full(G, cfg.n)]
    for _ in range(max(cfg.cases, 30)):
        out.append(tr.ClosedSet.from_mask(rng.random((G.order,) * cfg.n) < rng.random()))
    return out


def suite_transfer(G: FiniteGroup, cfg: RunConfig) -> list[dict]:
    sets = _sets(G, cfg)

    def one(i):
        E = sets[i]
        rng = _case_rng(cfg, i)
        u = AFn.random(G, cfg.n, rng)
        if i % 2:
            u = AFn(G, u.values * ~E.mask())  # make membership true
        rep = tr.ideal_transfer_check(u, E)
        sub = tr.submodule_transfer(E, G)
        return rep["pass"], sub["pass"], max(sub["roundtrip_residual"], sub["Y_vs_star_residual"])

    res = _ordered_map(one, list(range(len(sets))))

    def two(i):
        rng = _case_rng(cfg, 10**5 + i)
        w = MultiFn.random(G, cfg.n + 1, rng)
        u = AFn.random(G, cfg.n, rng)
        p = tr.P_n(w)
        Nu = tr.N_n(u)
        ok = (
            np.array_equal(tr.P_n(p).values, p.values)
            and tr.is_invariant(p)
            and np.array_equal(tr.Q_n(Nu).values, u.values)
            and np.array_equal(tr.N_n(tr.N_n_inverse(p)).values, p.values)
        )
        return bool(ok), float(np.max(np.abs(tr.Q_n(w).values - tr.Q_n_direct(w).values)))

    exact = _ordered_map(two, list(range(cfg.cases)))
    return [
        _check("ideal_transfer", [0.0] * len(res), [r[0] for r in res], sets=len(sets)),
        _check("submodule_roundtrip", [r[2] for r in res], [r[1] for r in res], sets=len(sets)),
        _check("averaging_identities", [e[1] for e in exact], [e[0] and e[1] <= 1e-12 for e in exact]),
    ]


def suite_ditkin(G: FiniteGroup, cfg: RunConfig) -> list[dict]:
    sets = _sets(G, cfg)
    dit = _ordered_map(lambda E: tr.ditkin_transfer(E, G)["report"]["pass"], sets)
    deg = _ordered_map(lambda E: tr.synthesis_degeneracy(E, G)["pass"], sets)
    return [
        _check("ditkin_transfer", [0.0] * len(sets), dit, sets=len(sets)),
        _check(
            "synthesis_degeneracy",
            [0.0] * len(sets),
            deg,
            sets=len(sets),
            note="I(E) = J(E) for every set tested; failure of synthesis cannot occur on a finite group",
        ),
    ]


SUITE_FNS = {"isometry": suite_isometry, "lemma51": suite_lemma51, "transfer": suite_transfer, "ditkin": suite_ditkin}


def cmd_check(suite: str, cfg: RunConfig) -> dict:
    G = build_group(cfg.group)
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        checks += SUITE_FNS[name](G, cfg)
    return {"config": cfg.to_json(), "suite": suite, "checks": checks, "pass": all(c["pass"] for c in checks)}


# ---------------------------------------------------------------------------
# entry point


def _add_common(p: argparse.ArgumentParser, group_required: bool = True):
    p.add_argument("--group", required=group_required, help="descriptor: c4, d4, s3, q8, c2xc2 or JSON")
    p.add_argument("--n", type=int, default=1, help="number of variables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--bond-cap", type=int, default=8)
    p.add_argument("--cases", type=int, default=5, help="random cases per check")
    p.add_argument("--format", default="json", choices=FORMATS)
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varopkit", description="Certified norms and transfer checks on finite groups.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="group order and irreducible representations")
    g.add_argument("--type", help="cyclic, dihedral, symmetric or quaternion8")
    g.add_argument("--n", type=int, help="group parameter")
    g.add_argument("--group", help="descriptor instead of --type/--n")
    g.add_argument("--format", default="json", choices=FORMATS)
    g.add_argument("--out")

    nm = sub.add_parser("norm", help="certified norm interval for a function in a JSON file")
    nm.add_argument("--target", required=True, choices=("fourier", "haagerup", "schur"))
    nm.add_argument("--input", required=True, help="JSON file, or - for stdin")
    _add_common(nm, group_required=False)

    ck = sub.add_parser("check", help="run property checks and report pass/fail")
    ck.add_argument("--suite", required=True, choices=SUITES + ("all",))
    _add_common(ck)
    return parser


def _group_desc(args) -> dict:
    if getattr(args, "group", None):
        return parse_descriptor(args.group)
    if args.type is None:
        raise InputError("give --group or --type")
    desc = {"type": args.type}
    if args.type != "quaternion8":
        if args.n is None:
            raise InputError(f"--type {args.type} needs --n")
        desc["n"] = args.n
    return desc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _threads()
        if args.command == "group":
            report, code = cmd_group(_group_desc(args)), EXIT_OK
        else:
            desc = parse_descriptor(args.group) if args.group else {"type": "cyclic", "n": 1}
            cfg = RunConfig(desc, args.n, args.seed, args.tol, args.restarts, args.bond_cap, args.cases, args.format)
            if args.command == "norm":
                report, flagged = cmd_norm(args.target, _load_json(args.input), cfg)
                code = EXIT_FLAGGED if flagged else EXIT_OK
            else:
                report = cmd_check(args.suite, cfg)
                code = EXIT_OK if report["pass"] else EXIT_FAILED
    except (InputError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as exc:
        print(f"error: missing field {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VaropkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        # numerical failures produce no usable certificate; everything else is bad input
        return EXIT_FLAGGED if isinstance(exc, RuntimeError) else EXIT_INPUT
    _emit(render(report, args.format), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
