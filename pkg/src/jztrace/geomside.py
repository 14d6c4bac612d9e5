"""Geometric side: unipotent, hyperbolic and elliptic terms over Q.

Two modes share the factor code: raw parameters s_p (resolvent kernel) and
test functions alpha_p (residue-integrated S-factors).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Mapping

from sympy import factorint

from . import specfun as sf
from .config import DEFAULT, TruncationPolicy
from .errors import DomainError, InputError, PoleError
from .localfactors import (SymLaurentPoly, ocal_arch_minus, ocal_arch_plus, ocal_ord,
                           scal_hat, scal_ord, upsilon_local, upsilon_raw)
from .qfield import EllipticClassRep, check_coprime, is_square, kronecker, ordp


@dataclass
class TraceConfig:
    weight: int
    level: int = 1
    S: tuple[int, ...] = ()
    alpha: Mapping[int, SymLaurentPoly] | None = None
    s: Mapping[int, complex] | None = None
    z: complex = 0.5
    policy: TruncationPolicy = field(default_factory=lambda: DEFAULT.policy)

    def __post_init__(self):
        self.S = tuple(sorted(set(int(p) for p in self.S)))
        self.z = complex(self.z)
        self.validate()

    @property
    def raw(self) -> bool:
        return self.s is not None

    def validate(self) -> None:
        l = self.weight
        if l < 4 or l % 2:
            raise InputError("weight must be even and >= 4")
        check_coprime(self.S, self.level)
        if not abs(self.z.real) < l - 3:
            raise InputError(f"|Re z| = {abs(self.z.real):g} violates |Re z| < l - 3 = {l - 3}")
        if self.alpha is not None and self.s is not None:
            raise InputError("give either alpha or s, not both")
        test = self.s if self.raw else (self.alpha or {})
        if set(test) != set(self.S):
            raise InputError("test data must be given exactly at the primes of S")
        if self.raw:
            for p, sp in self.s.items():
                if not complex(sp).real > 2 * l - 1:
                    raise InputError(f"raw mode needs Re s_{p} > 2l - 1")

    def test(self) -> dict:
        return dict(self.s) if self.raw else dict(self.alpha or {})

    def nu_max(self, p: int) -> int:
        if self.raw:
            return self.policy.nu_max
        # S-factor vanishes once ord_p(n f^-2) exceeds the degree
        return max(1, self.alpha[p].degree)


@dataclass
class GeomReport:
    j_unip: complex
    j_unip_z: complex
    j_unip_mz: complex
    j_hyp: complex
    hyp_tail: float
    j_ell: complex
    ell_tail: float
    total: complex
    class_count: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def tail(self) -> float:
        return self.hyp_tail + self.ell_tail

    def to_json(self) -> dict:
        c = lambda v: [v.real, v.imag]
        return {"j_unip": c(self.j_unip), "j_unip_z": c(self.j_unip_z), "j_unip_minus_z": c(self.j_unip_mz),
                "j_hyp": c(self.j_hyp), "hyp_tail": self.hyp_tail,
                "j_ell": c(self.j_ell), "ell_tail": self.ell_tail,
                "total": c(self.total), "class_count": self.class_count,
                "diagnostics": self.diagnostics}


def _csum(vals) -> complex:
    vals = list(vals)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


# ------------------------------------------------------------- unipotent

def upsilon(cfg: TraceConfig, z=None) -> complex:
    z = cfg.z if z is None else complex(z)
    val = 1 + 0j
    for p in cfg.S:
        val *= upsilon_raw(p, z, cfg.s[p]) if cfg.raw else upsilon_local(p, z, cfg.alpha[p])
    return val


def _zeta_over_gamma(z: complex) -> complex:
    """Completed zeta(-z) / Gamma((z+1)/4); the z = -1 singularity is removable."""
    if abs(z + 1) < 1e-6:
        return -sf.gamma_r(-z) * sf.zeta_times_sm1(-z) / (4 * sf.cgamma((z + 5) / 4))
    if z == 0:
        raise PoleError("completed zeta(-z) has a pole at z = 0; use the symmetrized pair")
    return sf.completed_zeta(-z) * sf.rgamma((z + 1) / 4)


def j_unip0(cfg: TraceConfig, z=None) -> complex:
    z = cfg.z if z is None else complex(z)
    l = cfg.weight
    val = _zeta_over_gamma(z) * upsilon(cfg, z)
    for p in factorint(cfg.level):
        val *= (1 + p ** ((z + 1) / 2)) / (1 + p)
    val *= 2 ** (1 - z) * math.pi ** ((3 - z) / 4) * sf.cgamma(l + (z - 1) / 2) * sf.rgamma(l)
    return val


# ------------------------------------------------------------- B product

def b_product(cfg: TraceConfig, z: complex, eps_at: Callable[[int], int],
              ords: Mapping[int, int]) -> complex:
    """B(test | Delta; a) with ords the nonzero ord_p(a); eps_at(p) the local character."""
    Nps = set(factorint(cfg.level))
    val = 1 + 0j
    for p in sorted(set(ords) | set(cfg.S) | Nps):
        e = ords.get(p, 0)
        eps = eps_at(p)
        if p in cfg.S:
            if cfg.raw:
                val *= scal_ord(p, eps, z, cfg.s[p], e)
            else:
                val *= scal_hat(p, eps, z, cfg.alpha[p], e)
        else:
            val *= ocal_ord(p, eps, z, e, 1 if p in Nps else 0)
        if val == 0:
            return 0j
    return val


def _ords(x: Fraction) -> dict[int, int]:
    out = {}
    for p, k in factorint(x.numerator).items():
        out[p] = k
    for p, k in factorint(x.denominator).items():
        out[p] = out.get(p, 0) - k
    return out


# ------------------------------------------------------------ hyperbolic

def hyp_term(cfg: TraceConfig, a: Fraction, z=None) -> complex:
    z = cfg.z if z is None else complex(z)
    a = Fraction(a)
    # completed zeta((1-z)/2) times 1/Gamma_R((1-z)/2) is the finite zeta used in j_hyp0
    arch = ocal_arch_plus(z, cfg.weight, float((a + 1) / (a - 1)), drop_gamma_r=True)
    if arch == 0:
        return 0j
    B = b_product(cfg, z, lambda p: 1, _ords(a / (a - 1) ** 2))
    return 0.5 * B * arch


def _geometric_tail(blocks: list[complex]) -> float:
    """Tail after the last block, assuming geometric decay of block sizes."""
    if len(blocks) < 2:
        return float("inf")
    a, b = abs(blocks[-2]), abs(blocks[-1])
    if b == 0:
        return 0.0
    r = b / a if a else 1.0
    if r >= 0.9:
        return float("inf")
    return b * r / (1 - r)


def j_hyp0(cfg: TraceConfig, z=None, eps: float | None = None) -> tuple[complex, float]:
    z = cfg.z if z is None else complex(z)
    if not cfg.S:
        return 0j, 0.0
    if z == -1:
        raise PoleError("zeta((1-z)/2) pole at z = -1")
    eps = cfg.policy.eps if eps is None else eps
    zf = sf.zeta((1 - z) / 2)
    terms, blocks = [], []
    for K in range(1, 200):
        shell = []
        for ks in itertools.product(range(-K, K + 1), repeat=len(cfg.S)):
            if max(abs(k) for k in ks) != K:
                continue
            a = Fraction(1)
            for p, k in zip(cfg.S, ks):
                a *= Fraction(p) ** k
            shell.append(hyp_term(cfg, a, z))
        blk = _csum(shell)
        terms.extend(shell)
        blocks.append(blk)
        tot = _csum(terms)
        tail = _geometric_tail(blocks)
        if K >= 3 and tail <= eps * max(1.0, abs(tot)):
            return zf * tot, abs(zf) * tail
    return zf * _csum(terms), abs(zf) * _geometric_tail(blocks)


# -------------------------------------------------------------- elliptic

@lru_cache(maxsize=100_000)
def _lam(s: complex, d: int) -> complex:
    return sf.completed_class_l(s, d)


def ell_term(cfg: TraceConfig, t: int, n: int, z=None) -> complex:
    """Summand for the coset (t:n), t >= 0, counting (t, n) and (-t, n)."""
    z = cfg.z if z is None else complex(z)
    D = t * t - 4 * n
    if D == 0 or is_square(D):
        raise DomainError("Delta must be a non-square")
    x = t / math.sqrt(abs(D))
    if D > 0:
        arch = ocal_arch_plus(z, cfg.weight, x)
    else:
        arch = ocal_arch_minus(z, cfg.weight, x)
    if arch == 0:
        return 0j
    rep = EllipticClassRep(t, n)
    d = rep.d_Delta
    B = b_product(cfg, z, lambda p: kronecker(d, p), _ords(Fraction(n) / rep.f_Delta ** 2))
    if B == 0:
        return 0j
    mult = 2 if t else 1
    return 0.5 * mult * _lam((z + 1) / 2, d) * B * arch


def _n_values(cfg: TraceConfig) -> list[int]:
    out = [1]
    for p in cfg.S:
        out = [m * p ** nu for m in out for nu in range(cfg.nu_max(p) + 1)]
    return sorted(out)


def _admissible(cfg: TraceConfig, t: int, n: int, Nprimes) -> bool:
    for p in cfg.S:
        nu = ordp(n, p)
        ot = ordp(t, p) if t else 10 ** 6
        if min(2 * ot, nu) not in (0, 1):
            return False
    D = t * t - 4 * n
    if D == 0 or is_square(D):
        return False
    if Nprimes:
        rep = EllipticClassRep(t, n)
        for p in Nprimes:
            if kronecker(rep.d_Delta, p) == -1 and rep.a_ideal_ord(p) >= 0:
                return False
    return True


def _ell_for_n(cfg: TraceConfig, n: int, z: complex, eps: float, Nprimes) -> tuple[list, float, int]:
    """Sum over t >= 0 in doubling blocks until the extrapolated tail is small."""
    terms, blocks, count = [], [], 0
    lo, hi = 0, 8
    root = math.sqrt(n)
    while True:
        blk = []
        for t in range(lo, hi):
            if not _admissible(cfg, t, n, Nprimes):
                continue
            v = ell_term(cfg, t, n, z)
            count += 1
            blk.append(v)
        terms.extend(blk)
        blocks.append(_csum(blk))
        tot = _csum(terms)
        tail = _tail_power(blocks, lo, hi)
        if hi > 4 * root + 8 and tail <= eps * max(1.0, abs(tot)):
            return terms, tail, count
        if hi > cfg.policy.max_height * max(root, 1.0):
            return terms, tail, count
        lo, hi = hi, 2 * hi


def _tail_power(blocks: list[complex], lo: int, hi: int) -> float:
    # doubling blocks of a power-law tail t^{-k}: block ratio 2^{1-k}
    if len(blocks) < 3:
        return float("inf")
    b1, b2 = abs(blocks[-2]), abs(blocks[-1])
    if b2 == 0 and b1 == 0:
        return 0.0
    if b1 == 0:
        return float("inf")
    r = b2 / b1
    if r >= 0.75:
        return float("inf")
    # conservative: factor 2 on the geometric remainder
    return 2 * b2 * r / (1 - r)


def j_ell0(cfg: TraceConfig, z=None, eps: float | None = None) -> tuple[complex, float, int]:
    z = cfg.z if z is None else complex(z)
    eps = cfg.policy.eps if eps is None else eps
    Nprimes = sorted(factorint(cfg.level))
    terms, tail, count = [], 0.0, 0
    # n < 0 classes have Delta > 0 with |t| < sqrt(Delta): zero archimedean factor
    quiet, recent = 0, []
    for n in _n_values(cfg):
        tn, tl, c = _ell_for_n(cfg, n, z, eps, Nprimes)
        terms.extend(tn)
        tail += tl
        count += c
        # raw resolvents decay like n^{-(Re s+1)/2}: stop after a run of negligible n
        if cfg.raw:
            b = abs(_csum(tn)) + tl
            recent.append(b)
            quiet = quiet + 1 if b <= 1e-3 * eps * abs(_csum(terms)) else 0
            if quiet >= 3:
                tail += 10 * sum(recent[-3:])
                break
    return _csum(terms), tail, count


# ------------------------------------------------------------------ total

_Z0_STEP = 1e-3


def unip_pair(cfg: TraceConfig, z=None) -> tuple[complex, complex]:
    """(J_unip(z), J_unip(-z)).  Near z = 0 each term has a simple pole but the
    sum is even and regular; it is then taken by Richardson extrapolation from
    z = h, 2h and split evenly."""
    z = cfg.z if z is None else complex(z)
    if abs(z) > 1e-4:
        return j_unip0(cfg, z), j_unip0(cfg, -z)
    h = _Z0_STEP
    g1 = j_unip0(cfg, h) + j_unip0(cfg, -h)
    g2 = j_unip0(cfg, 2 * h) + j_unip0(cfg, -2 * h)
    g = (4 * g1 - g2) / 3
    return g / 2, g / 2


def geometric_side(cfg: TraceConfig) -> GeomReport:
    z = cfg.z
    uz, umz = unip_pair(cfg, z)
    h, htail = j_hyp0(cfg, z)
    e, etail, count = j_ell0(cfg, z)
    total = _csum([uz, umz, h, e])
    diag = {"n_values": _n_values(cfg), "eps": cfg.policy.eps,
            "tail_method": "geometric extrapolation of doubling blocks"}
    return GeomReport(uz + umz, uz, umz, h, htail, e, etail, total, count, diag)
