"""Command line: verify-orbital, trace, equid, gen-fixture.

Exit codes: 0 pass, 1 numeric check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from sympy import isprime

from . import __version__
from .config import DEFAULT, Config, Tolerances, TruncationPolicy
from .errors import DomainError, InputError, JZError
from .localfactors import SymLaurentPoly

SCHEMA = 1
DATA_ENV = "JZTRACE_DATA"
EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    inputs: dict = field(default_factory=dict)     # path -> sha256
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def result_digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def cjson(v) -> list[float]:
    v = complex(v)
    return [v.real, v.imag]


def parse_complex(text: str) -> complex:
    t = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}") from None


def parse_primes(text: str | None) -> tuple[int, ...]:
    if text is None or not str(text).strip():
        return ()
    try:
        ps = tuple(int(x) for x in re.split(r"[,\s]+", str(text).strip()) if x)
    except ValueError:
        raise InputError(f"bad prime list {text!r}") from None
    for p in ps:
        if not isprime(p) or p == 2:
            raise InputError(f"{p} is not an odd prime")
    return ps


def parse_alpha(text: str) -> SymLaurentPoly:
    """'sigma1', '2*sigma0+sigma3', ... (sigma_0 = 2 convention)."""
    coeffs: dict[int, complex] = {}
    t = text.replace(" ", "")
    if not t:
        raise InputError("empty alpha")
    for sign, c, n in re.findall(r"([+-]?)(?:([0-9.eE]+)\*)?sigma(\d+)", t):
        val = float(c) if c else 1.0
        coeffs[int(n)] = coeffs.get(int(n), 0) + (-val if sign == "-" else val)
    rebuilt = re.sub(r"([+-]?)(?:([0-9.eE]+)\*)?sigma(\d+)", "", t)
    if rebuilt or not coeffs:
        raise InputError(f"cannot parse alpha {text!r}; use e.g. sigma1 or 2*sigma0+sigma2")
    return SymLaurentPoly(coeffs)


def load_config_file(path: str | None) -> Config:
    if not path:
        return DEFAULT
    try:
        obj = json.loads(Path(path).read_text())
        return Config(Tolerances(**obj.get("tol", {})), TruncationPolicy(**obj.get("policy", {})))
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        raise InputError(f"config {path}: {exc}") from exc


def _policy(args, cfg: Config) -> TruncationPolicy:
    kw = {}
    for name in ("eps", "nu_max", "max_height"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    depth = getattr(args, "depth", None)
    if depth is not None:
        kw["padic_depth"] = depth
    budget = getattr(args, "budget", None)
    if budget is not None:
        kw["quad_budget"] = budget
    return cfg.policy.with_(**kw)


def data_dir(args) -> Path | None:
    d = getattr(args, "data", None) or os.environ.get(DATA_ENV)
    return Path(d) if d else None


def emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------ verify-orbital

def cmd_verify_orbital(args, cfg: Config) -> int:
    from .suite import CASES, run_suite
    cases = args.case or list(CASES)
    for c in cases:
        if c not in CASES:
            raise InputError(f"unknown case {c!r}; choose from {', '.join(CASES)}")
    pol = _policy(args, cfg)
    t0 = time.perf_counter()
    rows, _ = run_suite(cases, args.draws, args.seed, pol.padic_depth, pol.quad_budget, args.eps)
    body = [r.to_json() for r in rows]
    worst = max(rows, key=lambda r: r.diff - r.bound) if rows else None
    ok = all(r.ok for r in rows)
    report = {"schema": SCHEMA, "command": "verify-orbital", "cases": cases, "pass": ok,
              "rows": body, "max_diff_row": worst.to_json() if worst else None,
              "result_digest": result_digest(body)}
    report["manifest"] = RunManifest(
        "verify-orbital", {"cases": cases, "draws": args.draws, "seed": args.seed, "eps": args.eps,
                           **cfg.snapshot(), "policy": asdict(pol)},
        wall_time=time.perf_counter() - t0).to_json()
    emit(report, args.out)
    return EXIT_OK if ok else EXIT_NUMERIC


# --------------------------------------------------------------------- trace

def trace_report(cfg_trace, forms, tol: Tolerances = DEFAULT.tol) -> dict:
    """Both sides, the residual and the acceptance bound for one configuration."""
    from .geomside import geometric_side
    from .specside import afe_error, spectral_constant, spectral_side
    N, k, S = cfg_trace.level, cfg_trace.weight, cfg_trace.S
    g = geometric_side(cfg_trace)
    test = cfg_trace.test()
    spec = spectral_side(N, k, test, cfg_trace.z, forms, raw=cfg_trace.raw)
    afe = afe_error(N, k, test, cfg_trace.z, forms, raw=cfg_trace.raw)
    C = spectral_constant(k, N)
    if cfg_trace.raw:
        factor = 1.0          # resolvent side already carries C(l, N)
    else:
        factor = (-1) ** len(S) * C
        afe *= C
    resid = g.total - factor * spec
    bound = max(tol.trace_abs, g.tail + 10 * afe)
    return {"geometric": cjson(g.total), "spectral": cjson(spec), "residual": cjson(resid),
            "abs_residual": abs(resid), "bound": bound, "pass": abs(resid) <= bound,
            "C": C, "sign": (-1) ** len(S), "mode": "raw" if cfg_trace.raw else "alpha",
            "geometric_detail": g.to_json(), "certified_tail": g.tail, "afe_error": afe,
            "forms": [f.label for f in forms]}


def trace_forms(N: int, k: int, ddir: Path | None):
    """Newforms of level dividing N: fixtures plus the internal level-1 form."""
    from .specside import LEVEL1_WEIGHTS, check_complete, level1_newform, load_newforms
    forms, inputs = [], {}
    if ddir is not None:
        if not ddir.is_dir():
            raise InputError(f"data directory {ddir} does not exist")
        for p in sorted(ddir.glob("*.json")):
            inputs[str(p)] = sha256_file(p)
        forms = [f for f in load_newforms(ddir, k) if N % f.level == 0]
    if k in LEVEL1_WEIGHTS and not any(f.level == 1 for f in forms):
        forms.append(level1_newform(k))
    return check_complete(forms, N, k), inputs


def cmd_trace(args, cfg: Config) -> int:
    from .geomside import TraceConfig
    t0 = time.perf_counter()
    S = parse_primes(args.S)
    z = parse_complex(args.z)
    alpha = s = None
    if args.s is not None:
        sv = parse_complex(args.s)
        s = {p: sv for p in S}
    else:
        a = parse_alpha(args.alpha)
        alpha = {p: a for p in S}
    tc = TraceConfig(args.weight, args.level, S, alpha=alpha, s=s, z=z, policy=_policy(args, cfg))
    forms, inputs = trace_forms(args.level, args.weight, data_dir(args))
    rep = trace_report(tc, forms, cfg.tol)
    snap = {"level": args.level, "weight": args.weight, "S": list(S), "alpha": args.alpha,
            "s": args.s, "z": str(z), **cfg.snapshot(), "policy": asdict(tc.policy)}
    out = {"schema": SCHEMA, "command": "trace", **rep}
    out["result_digest"] = result_digest(rep)
    out["manifest"] = RunManifest("trace", snap, inputs=inputs,
                                  wall_time=time.perf_counter() - t0).to_json()
    emit(out, args.out)
    return EXIT_OK if rep["pass"] else EXIT_NUMERIC


# --------------------------------------------------------------------- equid

def parse_monomial(text: str | None, nS: int) -> dict:
    """'2,0' -> x_1^2 x_2^0; empty -> constant 1."""
    if not text:
        return {(0,) * nS: 1.0}
    try:
        e = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"bad monomial {text!r}") from None
    if len(e) != nS or min(e, default=0) < 0:
        raise InputError("monomial needs one non-negative exponent per prime of S")
    return {e: 1.0}


def cmd_equid(args, cfg: Config) -> int:
    from .equid import convergence_report, report_csv
    from .specside import load_newform
    S = parse_primes(args.S)
    try:
        levels = [int(x) for x in args.levels.split(",") if x]
        zs = [float(x) for x in args.z.split(",") if x]
    except ValueError:
        raise InputError("levels and z must be comma separated numbers") from None
    f = parse_monomial(args.monomial, len(S))
    ddir = data_dir(args)
    if ddir is None or not ddir.is_dir():
        print(f"warning: no data directory ({ddir}); empty table", file=sys.stderr)
        _write(report_csv([]), args.out)
        return EXIT_OK
    files = sorted(ddir.glob("*.json"))
    bad = []
    for p in files:
        try:
            load_newform(p)
        except InputError as exc:
            bad.append(f"{p.name}: {exc}")
    if bad:
        for b in bad:
            print(f"error: {b}", file=sys.stderr)
        return EXIT_INPUT
    if not files:
        print(f"warning: {ddir} holds no newform fixtures; empty table", file=sys.stderr)
        _write(report_csv([]), args.out)
        return EXIT_OK
    rows, warnings = convergence_report(levels, args.weight, zs, f, S, ddir,
                                        internal_level1=not args.no_internal)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    _write(report_csv(rows), args.out)
    if args.manifest:
        emit({"schema": SCHEMA, "manifest": RunManifest(
            "equid", {"levels": levels, "weight": args.weight, "z": zs, "S": list(S),
                      "monomial": args.monomial, **cfg.snapshot()},
            inputs={str(p): sha256_file(p) for p in files}).to_json()}, args.manifest)
    return EXIT_OK


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------- gen-fixture

def gen_level1_fixture(weights, bound: int, out_dir) -> list[Path]:
    from .specside import LEVEL1_WEIGHTS, level1_newform
    out_dir = Path(out_dir)
    paths = []
    for k in weights:
        if k not in LEVEL1_WEIGHTS:
            raise InputError(f"weight {k} unsupported: S_k(1) must be one-dimensional "
                             f"({', '.join(map(str, LEVEL1_WEIGHTS))})")
    out_dir.mkdir(parents=True, exist_ok=True)
    for k in weights:
        f = level1_newform(k, bound)
        p = out_dir / f"{f.label}.json"
        p.write_text(json.dumps(f.to_json(), indent=1, sort_keys=True) + "\n")
        paths.append(p)
    return paths


def cmd_gen_fixture(args, cfg: Config) -> int:
    paths = gen_level1_fixture(args.weight, args.bound, args.out)
    for p in paths:
        print(p)
    return EXIT_OK


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jztrace")
    ap.add_argument("--config", help="JSON file with 'tol' and 'policy' overrides (flags win)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify-orbital", help="closed forms vs oracles for the local orbital integrals")
    v.add_argument("--case", action="append", help="case selector (repeatable); default all 9")
    v.add_argument("--draws", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--depth", type=int)
    v.add_argument("--budget", type=int)
    v.add_argument("--eps", type=float, help="absolute-relative tolerance override for every row")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify_orbital)

    t = sub.add_parser("trace", help="both sides of the trace identity")
    t.add_argument("--level", type=int, default=1)
    t.add_argument("--weight", type=int, required=True)
    t.add_argument("--S", default="", help="comma separated odd primes prime to the level")
    t.add_argument("--alpha", default="sigma0", help="test function at every p in S, e.g. sigma1")
    t.add_argument("--s", help="raw resolvent parameter s_p (same at every p in S)")
    t.add_argument("--z", default="0.5")
    t.add_argument("--data", help=f"newform fixture directory (default ${DATA_ENV})")
    t.add_argument("--eps", type=float)
    t.add_argument("--nu-max", dest="nu_max", type=int)
    t.add_argument("--max-height", dest="max_height", type=float)
    t.add_argument("--out")
    t.set_defaults(func=cmd_trace)

    e = sub.add_parser("equid", help="moment table for the weighted equidistribution")
    e.add_argument("--levels", default="1")
    e.add_argument("--weight", type=int, default=12)
    e.add_argument("--z", default="0,0.5,1")
    e.add_argument("--S", default="3")
    e.add_argument("--monomial", help="exponents per prime of S, e.g. 2 or 2,1; default constant 1")
    e.add_argument("--data", help=f"newform fixture directory (default ${DATA_ENV})")
    e.add_argument("--no-internal", action="store_true", help="do not add the internal level-1 form")
    e.add_argument("--out")
    e.add_argument("--manifest", help="write the run manifest JSON here")
    e.set_defaults(func=cmd_equid)

    g = sub.add_parser("gen-fixture", help="write level-1 newform fixtures")
    g.add_argument("--weight", type=int, action="append", required=True)
    g.add_argument("--bound", type=int, default=100)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen_fixture)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = load_config_file(args.config)
        return args.func(args, cfg)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except JZError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
