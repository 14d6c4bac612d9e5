"""Limit measures, constants and moment tables for the weighted equidistribution.

Test functions are polynomials on [-2, 2]^S stored as {exponent tuple: coeff},
exponents ordered like sorted(S).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy import factorint

from . import specfun as sf
from .errors import DomainError, IncompleteDataError, InputError
from .specside import (LEVEL1_WEIGHTS, NewformData, check_complete, level1_newform,
                       load_newforms, oldform_weight, satake, sym2_l_value)

Poly = Mapping[tuple, float]

CSV_COLUMNS = ["N", "z", "empirical", "limit", "discrepancy", "forms_used"]


def _check_z(z: float) -> float:
    z = float(z)
    if not 0 <= z <= 1:
        raise DomainError("z must lie in [0, 1]")
    return z


# ------------------------------------------------------------ lambda_p

def lambda_density(z: float, p: int, x):
    z = _check_z(z)
    c = p ** ((1 + z) / 4) + p ** (-(1 + z) / 4)
    x = np.asarray(x, dtype=float)
    return (1 + p ** ((z + 1) / 2)) / math.pi * np.sqrt(1 - x * x / 4) / (c * c - x * x)


def _gauss_cheb2(n: int) -> tuple[np.ndarray, np.ndarray]:
    # int_{-1}^{1} g(u) sqrt(1-u^2) du ~ sum w_i g(u_i)
    i = np.arange(1, n + 1)
    th = i * math.pi / (n + 1)
    return np.cos(th), math.pi / (n + 1) * np.sin(th) ** 2


def lambda_limit_moment(z: float, f, p: int, nodes: int = 200) -> float:
    """<lambda_p^{(z)}, f> for a univariate f (callable or ascending coefficient list)."""
    z = _check_z(z)
    if not callable(f):
        coeffs = list(f)
        f = lambda x: np.polynomial.polynomial.polyval(x, coeffs)
    u, w = _gauss_cheb2(nodes)
    x = 2 * u
    c = p ** ((1 + z) / 4) + p ** (-(1 + z) / 4)
    vals = np.asarray(f(x), dtype=float) / (c * c - x * x)
    # dx = 2 du
    return float((1 + p ** ((z + 1) / 2)) / math.pi * 2 * np.dot(w, vals))


def _power_to_chebU(coeffs: Sequence[float]) -> np.ndarray:
    """Coefficients b_m with sum a_k x^k = sum b_m U_m(x/2)."""
    n = len(coeffs)
    # rows: power coefficients (in x) of U_m(x/2): U_0 = 1, U_1 = x, U_{m+1} = x U_m - U_{m-1}
    U = np.zeros((n, n))
    if n:
        U[0, 0] = 1
    if n > 1:
        U[1, 1] = 1
    for m in range(2, n):
        U[m, 1:] = U[m - 1, :-1]
        U[m] -= U[m - 2]
    return np.linalg.solve(U.T, np.asarray(coeffs, dtype=float))


def lambda_moment_closed(z: float, coeffs: Sequence[float], p: int) -> float:
    """Same moment via <lambda_p^{(z)}, U_m(x/2)> = p^{-m(1+z)/4} (m even), 0 (m odd)."""
    z = _check_z(z)
    b = _power_to_chebU(coeffs)
    return float(sum(bm * p ** (-m * (1 + z) / 4) for m, bm in enumerate(b) if m % 2 == 0))


def product_limit_moment(z: float, f: Poly, S: Sequence[int]) -> float:
    """<(x) lambda_p, f> for multivariate polynomial f over sorted(S)."""
    S = sorted(S)
    tot = []
    cache: dict[tuple[int, int], float] = {}
    for exps, c in f.items():
        if len(exps) != len(S):
            raise InputError("monomial arity does not match S")
        val = c
        for p, k in zip(S, exps):
            if (p, k) not in cache:
                cache[(p, k)] = lambda_moment_closed(z, [0] * k + [1], p)
            val *= cache[(p, k)]
        tot.append(val)
    return math.fsum(tot)


def box_limit_measure(z: float, box: Mapping[int, tuple[float, float]],
                      assumes_p: bool = False) -> tuple[float, str]:
    """(x) lambda_p mass of a box prod_p [a_p, b_p].  Convergence of indicator
    moments is only known conditionally, so the caller must opt in and the
    result carries the label."""
    from scipy.integrate import quad
    if not assumes_p:
        raise DomainError("box moments are conditional; pass assumes_p=True")
    z = _check_z(z)
    val = 1.0
    for p, (a, b) in sorted(box.items()):
        a, b = max(a, -2.0), min(b, 2.0)
        if b <= a:
            return 0.0, "assumes-(P)"
        val *= quad(lambda x: float(lambda_density(z, p, x)), a, b, epsabs=1e-12)[0]
    return val, "assumes-(P)"


def eval_poly(f: Poly, x: Sequence[float]) -> float:
    return math.fsum(c * math.prod(xi ** k for xi, k in zip(x, exps)) for exps, c in f.items())


# ---------------------------------------------------------------- constants

def r_value(z: float) -> float:
    z = _check_z(z)
    if z == 0:
        return 1.0          # residue of zeta at 1
    return sf.zeta(z + 1).real


def limit_constants(z: float, k: int) -> tuple[float, float]:
    z = _check_z(z)
    C = (2 * 2 ** ((1 - z) / 2) * math.pi ** (-(3 * z + 1) / 4) * sf.cgamma((z + 3) / 4).real
         * sf.cgamma(k + (z - 1) / 2).real / (4 * math.pi * sf.cgamma(k - 1).real))
    return C, r_value(z)


def m_level(N: int) -> float:
    return math.fsum(math.log(p) / (1 + p ** -0.5) for p in factorint(N))


# ---------------------------------------------------------------- empirical

def empirical_moment(N: int, k: int, z: float, f: Poly, S: Sequence[int],
                     forms: Iterable[NewformData]) -> float:
    z = _check_z(z)
    S = sorted(S)
    forms = check_complete(forms, N, k)
    pre = 1.0
    if z == 0:
        M = m_level(N)
        if M == 0:
            raise DomainError("M(1) = 0: the z = 0 normalization needs N > 1")
        pre /= M
    for p in factorint(N):
        pre *= p ** ((z - 1) / 2) / (1 + p ** ((z + 1) / 2))
    tot = []
    for g in forms:
        W = oldform_weight(g, N, z).real
        ratio = (sym2_l_value(g, (z + 1) / 2) / sym2_l_value(g, 1.0)).real
        x = [satake(g, p).x for p in S]
        tot.append(W * ratio * eval_poly(f, x))
    return pre * math.fsum(tot)


@dataclass
class MeasureMoment:
    N: int
    z: float
    empirical: float
    limit: float
    forms_used: int
    note: str = ""

    @property
    def discrepancy(self) -> float:
        return abs(self.empirical - self.limit)

    def row(self) -> list:
        return [self.N, repr(self.z), repr(self.empirical), repr(self.limit),
                repr(self.discrepancy), self.forms_used]


def _forms_for(N: int, k: int, data_dir, internal_level1: bool) -> list[NewformData]:
    forms = load_newforms(data_dir, k) if data_dir is not None and Path(data_dir).is_dir() else []
    forms = [f for f in forms if N % f.level == 0]
    if internal_level1 and k in LEVEL1_WEIGHTS and not any(f.level == 1 for f in forms):
        forms.append(level1_newform(k))
    return forms


def convergence_report(levels: Sequence[int], k: int, z_grid: Sequence[float], f: Poly,
                       S: Sequence[int], data_dir=None, internal_level1: bool = True
                       ) -> tuple[list[MeasureMoment], list[str]]:
    """Rows per (N, z); levels with missing or incomplete data give a warning row."""
    rows, warnings = [], []
    for N in levels:
        try:
            forms = check_complete(_forms_for(N, k, data_dir, internal_level1), N, k)
        except IncompleteDataError as exc:
            warnings.append(f"N={N}: {exc}")
            for z in z_grid:
                rows.append(MeasureMoment(N, float(z), math.nan, math.nan, 0, "missing data"))
            continue
        for z in z_grid:
            C, r = limit_constants(z, k)
            lim = r * C * product_limit_moment(z, f, S)
            try:
                emp = empirical_moment(N, k, z, f, S, forms)
                note = "z=0 convention row" if z == 0 else ""
            except DomainError as exc:
                emp, note = math.nan, str(exc)
                warnings.append(f"N={N}, z={z}: {exc}")
            rows.append(MeasureMoment(N, float(z), emp, lim, len(forms), note))
    return rows, warnings


def report_csv(rows: Iterable[MeasureMoment]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.row())
    return buf.getvalue()
