"""Closed form vs oracle suite for the local orbital integrals (9 cases)."""

from __future__ import annotations

import math
import random
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from .errors import DomainError
from .orbital import (ell_closed, ell_oracle_arch, ell_oracle_padic, hyp_closed,
                      hyp_oracle_arch, hyp_oracle_padic)
from .qfield import EllipticClassRep, is_square

CASES = ("hyp-arch", "hyp-generic", "hyp-level", "hyp-S",
         "ell-arch", "ell-generic", "ell-dyadic", "ell-level", "ell-S")
PADIC_TOL = 1e-9
ARCH_TOL = 1e-6


@dataclass
class OracleRow:
    case: str
    params: dict
    closed: complex
    oracle: complex
    diff: float
    bound: float          # tolerance this row is held to

    @property
    def ok(self) -> bool:
        return self.diff <= self.bound

    def to_json(self) -> dict:
        d = asdict(self)
        for key in ("closed", "oracle"):
            v = complex(d[key])
            d[key] = [v.real, v.imag]
        d["ok"] = self.ok
        return d


def _z(rng: random.Random, width: float) -> complex:
    return complex(round(rng.uniform(-width, width), 6), round(rng.uniform(-1, 1), 6))


def _s_for(rng: random.Random, z: complex) -> complex:
    # Re s > (|Re z| - 1)/2 with margin
    lo = max(0.0, (abs(z.real) - 1) / 2) + 0.6
    return complex(round(rng.uniform(lo, lo + 2), 6), round(rng.uniform(-1, 1), 6))


def _rational(rng: random.Random, p: int) -> Fraction:
    while True:
        a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 60), rng.randint(1, 60))
        a *= Fraction(p) ** rng.randint(-3, 3)
        if a != 1:
            return a


def _hyp_unit_rational(rng: random.Random, p: int) -> Fraction:
    # bias toward a close to 1 so that ord(a-1) > 0 shows up
    if rng.random() < 0.5:
        return 1 + Fraction(p) ** rng.randint(1, 4) * rng.choice([-1, 1, 2, -2])
    return _rational(rng, p)


def _elliptic(rng: random.Random, neg: bool | None = None, t0: bool = False) -> EllipticClassRep:
    while True:
        t = 0 if t0 else rng.randint(-40, 40)
        n = rng.choice([1, -1]) * rng.randint(1, 80)
        D = t * t - 4 * n
        if D == 0 or is_square(D):
            continue
        if neg is not None and (D < 0) != neg:
            continue
        return EllipticClassRep(t, n)


def _dyadic(rng: random.Random, want: str) -> EllipticClassRep:
    """Class whose 2-adic normal form has delta0 in the requested family."""
    while True:
        rep = _elliptic(rng)
        f = rep.local(2)
        if want == "uniformizer" and f.cls == "uniformizer":
            return rep
        if want == "5" and f.cls != "uniformizer" and abs(f.delta0) == 5:
            return rep
        if want == "1" and f.cls != "uniformizer" and abs(f.delta0) == 1:
            return rep


def _row(case, params, closed, oracle, tol) -> OracleRow:
    diff = abs(closed - oracle)
    return OracleRow(case, params, complex(closed), complex(oracle), diff, tol * (1 + abs(closed)))


def run_case(case: str, draws: int = 20, seed: int = 0, depth: int = 8,
             budget: int = 100_000, eps: float | None = None) -> list[OracleRow]:
    """Random in-strip draws for one case.  eps overrides the row tolerance."""
    if case not in CASES:
        raise DomainError(f"unknown case {case!r}; choose from {', '.join(CASES)}")
    rng = random.Random(f"{case}:{seed}")
    rows = []
    for i in range(draws):
        p = (3, 5, 7)[i % 3]
        if case == "hyp-arch":
            l = rng.choice([4, 6, 8])
            z = _z(rng, 2.0)
            a = round(rng.uniform(0.05, 12.0), 6)
            if abs(a - 1) < 1e-3:
                a = 2.0
            c = hyp_closed("arch", z, a, l=l)
            o = hyp_oracle_arch(l, z, a, budget=budget, tol=1e-12)
            rows.append(_row(case, {"l": l, "z": str(z), "a": a}, c, o.value,
                             ARCH_TOL if eps is None else eps))
        elif case.startswith("hyp-"):
            kind = case[4:]
            z = _z(rng, 0.9)
            s = _s_for(rng, z) if kind == "S" else None
            a = _hyp_unit_rational(rng, p)
            c = hyp_closed(kind, z, a, p=p, s=s)
            o = hyp_oracle_padic(p, kind, z, a, s=s, depth=depth)
            rows.append(_row(case, {"p": p, "z": str(z), "s": str(s), "a": str(a)}, c, o.value,
                             PADIC_TOL if eps is None else eps))
        elif case == "ell-arch":
            l = rng.choice([4, 6, 8])
            z = _z(rng, 2.0)
            rep = _elliptic(rng, neg=True, t0=(i == 0))
            m = math.sqrt(abs(rep.Delta)) / 2
            a = rep.t / (2 * m)
            c = ell_closed("arch", z, rep, l=l)
            o = ell_oracle_arch(l, z, a, m_abs=m, budget=budget, tol=1e-12)
            rows.append(_row(case, {"l": l, "z": str(z), "t": rep.t, "n": rep.n}, c, o.value,
                             ARCH_TOL if eps is None else eps))
        else:
            kind = {"ell-generic": "generic", "ell-level": "level", "ell-S": "S",
                    "ell-dyadic": "generic"}[case]
            z = _z(rng, 0.9)
            s = _s_for(rng, z) if kind == "S" else None
            if case == "ell-dyadic":
                p = 2
                rep = _dyadic(rng, ("5", "1", "uniformizer")[i % 3])
            else:
                rep = _elliptic(rng, t0=(i == 0))
            c = ell_closed(kind, z, rep, p=p, s=s)
            o = ell_oracle_padic(p, kind, z, rep, s=s, depth=depth)
            rows.append(_row(case, {"p": p, "z": str(z), "s": str(s), "t": rep.t, "n": rep.n,
                                    "delta0": rep.local(p).delta0, "class": rep.local(p).cls},
                             c, o.value, PADIC_TOL if eps is None else eps))
    return rows


def run_suite(cases=CASES, draws: int = 20, seed: int = 0, depth: int = 8,
              budget: int = 100_000, eps: float | None = None) -> tuple[list[OracleRow], float]:
    t0 = time.perf_counter()
    rows = []
    for c in cases:
        rows.extend(run_case(c, draws, seed, depth, budget, eps))
    return rows, time.perf_counter() - t0
