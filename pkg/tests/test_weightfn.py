from __future__ import annotations

import cmath
import json
import math

import numpy as np
import pytest
from scipy import integrate, special

from smoothxyz import weightfn as wf
from smoothxyz.weightfn import (
    SeriesDivergence, calibrate, decay_shape, decay_slope, incomplete_gamma_identity,
    kummer_m, l1_transform_bound, lower_incomplete_gamma, make_bump, make_plateau,
    mellin_inversion_check, phi_transform, phi_transform_line, plancherel_check,
    sharp_cutoff_transform, smooth_step, stationary_phase_profile, weight_l2_moment,
)


@pytest.fixture(scope="module")
def phi():
    return make_plateau(0.05)


def test_plateau_values(phi):
    assert phi(0.5) == 1.0
    assert phi(0.01) == 0.0
    assert 0 < phi(0.075) < 1
    t = np.linspace(-1, 2, 3001)
    v = phi(t)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[(t <= 0.05) | (t >= 0.95)] == 0)
    assert np.all(v[(t >= 0.1) & (t <= 0.9)] == 1)


def test_plateau_range():
    for bad in (0, 0.125, -0.1, 0.3):
        with pytest.raises(ValueError):
            make_plateau(bad)


def test_smooth_step_symmetry_and_norm():
    t = np.linspace(0, 1, 101)
    assert np.allclose(smooth_step(t) + smooth_step(1 - t), 1, atol=1e-14)
    # normalized integral of the mollifier, checked with adaptive quadrature
    m = lambda s: math.exp(-1 / (s * (1 - s))) if 0 < s < 1 else 0.0
    total = integrate.quad(m, 0, 1, epsabs=0, epsrel=1e-13)[0]
    part = integrate.quad(m, 0, 0.3, epsabs=0, epsrel=1e-13)[0]
    assert abs(smooth_step(0.3) - part / total) < 1e-12


@pytest.mark.parametrize("w", [make_plateau(0.05), make_plateau(0.1), make_bump(0.2, 0.7)])
def test_derivatives_finite_difference(w):
    t = np.linspace(w.a, w.b, 57)[1:-1]
    h = 1e-6
    assert np.array_equal(w.deriv(0, t), w(t))
    for k in range(1, 4):
        fd = (w.deriv(k - 1, t + h) - w.deriv(k - 1, t - h)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(w.deriv(k, t)))))
        assert np.max(np.abs(fd - w.deriv(k, t))) < 1e-5 * scale
    with pytest.raises(ValueError):
        w.deriv(9, 0.5)


def test_transform_basic(phi):
    area = integrate.quad(phi, 0.05, 0.95, points=[0.1, 0.9], epsabs=0, epsrel=1e-12)[0]
    assert abs(phi_transform(phi, 1.0, 0.0) - area) < 1e-10
    s, lam = 0.7 + 3.1j, 2.5
    a = phi_transform(phi, s.conjugate(), -lam)
    b = phi_transform(phi, s, lam).conjugate()
    assert abs(a - b) < 1e-12
    with pytest.raises(ValueError):
        phi_transform(phi, 0.2, 0.0)


def test_transform_against_quad(phi):
    s, lam = 0.875 + 40j, 5.0
    f = lambda w, part: (phi(w) * w ** (s - 1) * cmath.exp(2j * math.pi * lam * w)).__getattribute__(part)
    re = integrate.quad(f, 0.05, 0.95, args=("real",), limit=500, epsabs=1e-13)[0]
    im = integrate.quad(f, 0.05, 0.95, args=("imag",), limit=500, epsabs=1e-13)[0]
    assert abs(phi_transform(phi, s, lam) - complex(re, im)) < 1e-9


def test_decay_slope(phi):
    assert decay_slope(phi, 0.875, 5.0, 100, 1e4, 25) <= -1.5


@pytest.mark.parametrize("k", [1, 2, 3])
def test_decay_shape(phi, k):
    lam = 5.0
    ts = np.linspace(4 * (1 + lam), 2000, 400)
    d = decay_shape(phi, 0.875, lam, k, ts)
    v = np.asarray(d["values"])
    # weighted profile stays bounded and is smaller in the far tail than near the peak
    assert math.isfinite(d["max"]) and d["k"] == k
    assert v[300:].max() < 0.1 * d["max"]


def test_joint_continuity(phi):
    ts = np.linspace(0, 50, 2001)
    v = phi_transform_line(phi, 0.875, ts, 3.0)
    step = ts[1] - ts[0]
    assert np.max(np.abs(np.diff(v))) < 5 * step
    lams = np.linspace(0, 5, 501)
    vals = np.array([phi_transform_line(phi, 0.875, np.array([7.0]), l)[0] for l in lams])
    assert np.max(np.abs(np.diff(vals))) < 20 * (lams[1] - lams[0])


def test_plancherel_examples(phi):
    r = plancherel_check(phi, 0.5, 0.0)
    assert r.gap < 1e-4
    assert weight_l2_moment(phi, 0.5) == r.rhs
    r7 = plancherel_check(phi, 0.5, 7.0)
    assert r7.rhs == r.rhs
    assert abs(r7.lhs - r.lhs) < 1e-4 * r.rhs


def test_l2_moment_against_quad(phi):
    f = lambda w: phi(w) ** 2 * w ** (2 * 0.875 - 1)
    ref = integrate.quad(f, 0.05, 0.95, points=[0.1, 0.9], epsabs=0, epsrel=1e-12)[0]
    assert abs(weight_l2_moment(phi, 0.875) - ref) < 1e-10


def test_mellin_examples(phi):
    assert mellin_inversion_check(phi, 0.5, 0.0, 0.5).gap < 1e-4
    out = mellin_inversion_check(phi, 0.5, 0.0, 0.02)
    assert abs(out.lhs) < 1e-4 and out.rhs == 0
    r = mellin_inversion_check(phi, 0.5, 3.0, 0.5)
    assert abs(r.rhs - cmath.exp(2j * math.pi * 1.5)) < 1e-15
    assert r.gap < 1e-4


def test_mellin_line_independence(phi):
    a = mellin_inversion_check(phi, 0.5, 3.0, 0.3)
    b = mellin_inversion_check(phi, 1.5, 3.0, 0.3)
    assert abs(a.lhs - b.lhs) < 1e-4


def test_l1_bound(phi):
    r0 = l1_transform_bound(phi, 0.875, 0.0, 0.0)
    assert math.isfinite(r0.integral) and r0.integral > 0
    ratios = [l1_transform_bound(phi, 0.875, 0.0, lam).ratio for lam in (1, 10, 100)]
    assert max(ratios) < 2 * ratios[0]
    d1 = [l1_transform_bound(phi, 0.875, 1.0, lam).ratio for lam in (1, 10, 100)]
    slope = np.polyfit(np.log([1, 10, 100]), np.log(d1), 1)[0]
    assert slope <= 1.6


def test_stationary_phase_rows(phi):
    rows = stationary_phase_profile(phi, 0.875, [0, 10, 100])
    assert len(rows) == 3 and all(r["sup"] > 0 for r in rows)


def test_calibration_sidecar(phi, tmp_path, monkeypatch):
    monkeypatch.setenv(wf.CACHE_ENV, str(tmp_path))
    env = calibrate(phi, 0.5, 0.0, 1e-6, kind="l2")
    data = json.loads((tmp_path / "envelopes.json").read_text())
    assert len(data) == 1
    assert calibrate(phi, 0.5, 0.0, 1e-6, kind="l2") == env


# sharp cutoff


def test_gamma_elementary():
    r = incomplete_gamma_identity(1.0, -1.0)
    assert abs(r.lhs - (1 - math.exp(-1))) < 1e-12
    assert abs(r.rhs - (1 - math.exp(-1))) < 1e-12


@pytest.mark.parametrize("s,lam", [(1, -1), (2.5, -3), (0.5, -10), (1.7 + 2j, -4)])
def test_gamma_and_kummer(s, lam):
    r = incomplete_gamma_identity(s, lam)
    assert r.gap < 1e-8 and r.kummer_gap < 1e-8


def test_series_against_scipy():
    for s, z in [(2.5, 3.0), (0.5, 10.0), (1.0, 1.0), (4.2, 0.3)]:
        ref = special.gammainc(s, z) * special.gamma(s)
        assert abs(lower_incomplete_gamma(s, z) - ref) < 1e-12 * ref
    assert abs(kummer_m(2.5, 3.5, -3.0) - special.hyp1f1(2.5, 3.5, -3.0)) < 1e-13
    assert abs(kummer_m(2.5, 3.5, -3.0) - math.exp(-3) * kummer_m(1.0, 3.5, 3.0)) < 1e-8


def test_sharp_cutoff_quadrature():
    ref = integrate.quad(lambda x: math.exp(-2 * x) * x ** (0.5 - 1), 0, 1, epsabs=0, epsrel=1e-12)[0]
    assert abs(sharp_cutoff_transform(0.5, -2.0) - ref) < 1e-10


def test_series_guard():
    with pytest.raises(SeriesDivergence):
        incomplete_gamma_identity(1.0, -60.0)
    with pytest.raises(ValueError):
        incomplete_gamma_identity(1.0, 2.0)
