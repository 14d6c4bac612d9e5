import csv
import io
import math

import numpy as np
import pytest
from scipy.integrate import quad

from jztrace import specfun as sf
from jztrace.equid import (CSV_COLUMNS, box_limit_measure, convergence_report, empirical_moment,
                           lambda_density, lambda_limit_moment, lambda_moment_closed,
                           limit_constants, m_level, product_limit_moment, r_value, report_csv)
from jztrace.errors import DomainError, IncompleteDataError
from jztrace.specside import level1_newform, load_newforms, oldform_weight, sym2_l_value


@pytest.mark.parametrize("p", [3, 5, 7])
@pytest.mark.parametrize("z", [0.0, 0.5, 1.0])
def test_mass_one(p, z):
    assert abs(lambda_limit_moment(z, [1], p) - 1) < 1e-10
    assert abs(lambda_moment_closed(z, [1], p) - 1) < 1e-12


def test_mass_against_scipy():
    m = quad(lambda x: float(lambda_density(1.0, 3, x)), -2, 2, epsabs=1e-13)[0]
    assert abs(m - 1) < 1e-10


@pytest.mark.parametrize("deg", range(9))
def test_two_routes(deg):
    for p in (3, 5, 7):
        for z in (0.0, 0.3, 1.0):
            c = [0.0] * deg + [1.0]
            assert abs(lambda_limit_moment(z, c, p) - lambda_moment_closed(z, c, p)) < 1e-9


def test_odd_vanishes():
    assert abs(lambda_limit_moment(0.5, [0, 1], 5)) < 1e-14
    assert abs(lambda_limit_moment(0.5, [0, 2, 0, -1], 3)) < 1e-13


def test_z1_density_shape():
    p = 5
    x = np.linspace(-1.9, 1.9, 11)
    serre = (p + 1) / math.pi * np.sqrt(1 - x * x / 4) / ((p ** 0.5 + p ** -0.5) ** 2 - x * x)
    assert np.allclose(lambda_density(1.0, p, x), serre, rtol=1e-13)


def test_z_range():
    with pytest.raises(DomainError):
        lambda_limit_moment(1.5, [1], 3)


def test_product_moment():
    f = {(2, 0): 1.0, (0, 2): 2.0, (1, 1): 5.0}
    z = 0.5
    ref = lambda_limit_moment(z, [0, 0, 1], 3) + 2 * lambda_limit_moment(z, [0, 0, 1], 5)
    assert abs(product_limit_moment(z, f, [3, 5]) - ref) < 1e-10


def test_box_flag():
    with pytest.raises(DomainError):
        box_limit_measure(0.5, {3: (-1, 1)})
    v, lab = box_limit_measure(0.5, {3: (-3, 3), 5: (-2, 2)}, assumes_p=True)
    assert lab == "assumes-(P)" and abs(v - 1) < 1e-10


@pytest.mark.parametrize("N", [15, 21, 35])
def test_m_bounds(N):
    assert 0.5 * math.log(N) <= m_level(N) <= math.log(N)


def test_constants():
    for k in (12, 16, 24):
        C, r = limit_constants(1.0, k)
        assert abs(C - (k - 1) / (2 * math.pi ** 2)) < 1e-12
    assert r_value(0) == 1.0
    assert abs(r_value(0.5) - 2.612375348685488) < 1e-12
    # r blows up as z -> 0+ while r(0) stays 1
    assert r_value(1e-6) > 1e5


def test_empirical_trivial():
    f = level1_newform(12)
    v = empirical_moment(1, 12, 1.0, {(): 1.0}, [], [f])
    assert abs(v - 1) < 1e-12


def test_empirical_needs_complete(fixtures_dir):
    with pytest.raises(IncompleteDataError):
        empirical_moment(3, 12, 0.5, {(): 1.0}, [], load_newforms(fixtures_dir, 12))


def test_summands_nonnegative(fixtures_dir):
    forms = load_newforms(fixtures_dir, 12) + [level1_newform(12)]
    for z in (0.0, 0.5, 1.0):
        for g in forms:
            ratio = (sym2_l_value(g, (z + 1) / 2) / sym2_l_value(g, 1.0)).real
            if ratio >= 0:
                assert oldform_weight(g, 3, z).real * ratio >= 0


def test_report(fixtures_dir):
    assert convergence_report([], 12, [0.5], {(0,): 1.0}, [5])[0] == []
    rows, warn = convergence_report([1, 3, 7], 12, [0.0, 0.5, 1.0], {(2,): 1.0}, [5], fixtures_dir)
    assert len(rows) == 9
    assert any("N=7" in w for w in warn) and any("z=0" in w for w in warn)
    r0 = [r for r in rows if r.N == 1 and r.z == 0.0][0]
    assert math.isnan(r0.empirical) and "M(1)" in r0.note
    r3 = [r for r in rows if r.N == 3 and r.z == 0.5][0]
    assert r3.forms_used == 2 and math.isfinite(r3.discrepancy)
    text = report_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == CSV_COLUMNS and len(parsed) == 10
    again = report_csv(convergence_report([1, 3, 7], 12, [0.0, 0.5, 1.0], {(2,): 1.0}, [5], fixtures_dir)[0])
    assert again == text
