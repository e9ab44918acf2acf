import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from htqueue import _numerics as nx
from htqueue import zeta as Z

mp.mp.dps = 40

small = st.complex_numbers(max_magnitude=0.6, allow_nan=False, allow_infinity=False)


def _dps(x):
    """Working digits that survive the cancellation in ``1 + x`` or ``exp(x) - 1``."""
    return 40 + 2 * max(0, int(-np.log10(max(abs(x), 1e-300))))


def _rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


@given(small)
def test_log1p_minus_x(x):
    with mp.workdps(_dps(x)):
        ref = mp.log(1 + mp.mpc(x)) - mp.mpc(x)
    assert _rel(nx.log1p_minus_x(np.array([x]))[0], ref) < 1e-13


@given(small)
def test_clog1p(x):
    with mp.workdps(_dps(x)):
        ref = mp.log(1 + mp.mpc(x))
    assert _rel(nx.clog1p(np.array([x]))[0], ref) < 1e-14


@given(small)
def test_expm1_minus_x(x):
    with mp.workdps(_dps(x)):
        ref = mp.exp(mp.mpc(x)) - 1 - mp.mpc(x)
    assert _rel(nx.expm1_minus_x(np.array([x]))[0], ref) < 1e-13


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_log_sinhc(u):
    if abs(u.imag) > 3.0 or abs(mp.sinh(mp.mpc(u))) < 1e-3:
        return
    ref = mp.log(mp.sinh(mp.mpc(u)) / mp.mpc(u)) if u != 0 else mp.mpf(0)
    got = nx.log_sinhc(np.array([u]))[0]
    # compare modulo 2 pi i
    d = complex(got) - complex(ref)
    d -= 2j * np.pi * round(d.imag / (2 * np.pi))
    assert abs(d) < 1e-13 * max(1.0, abs(complex(ref)))


@given(st.floats(-60, -1e-6), st.floats(-20, 20))
def test_log_one_minus_exp(a, b):
    w = complex(a, b)
    ref = mp.log(1 - mp.exp(mp.mpc(w)))
    assert _rel(nx.log_one_minus_exp(np.array([w]))[0], ref) < 1e-12


@pytest.mark.parametrize("w", [-9 + 8j, -0.69 + 3j, -0.7 + 0.1j, -40 + 1j])
def test_log_one_minus_exp_branch_edges(w):
    ref = mp.log(1 - mp.exp(mp.mpc(w)))
    assert _rel(nx.log_one_minus_exp(np.array([w]))[0], ref) < 1e-15


def test_complex_log1p_tiny_argument():
    # numpy's complex log1p loses the relative accuracy here
    x = np.array([1e-10 + 1e-10j])
    ref = complex(mp.log(1 + mp.mpc(x[0])))
    assert _rel(nx.clog1p(x)[0], ref) < 1e-15


def test_longdouble_paths():
    x = np.array([0.1 + 0.2j], dtype=np.clongdouble)
    assert nx.clog1p(x).dtype == np.clongdouble
    assert _rel(nx.clog1p(x)[0], mp.log(1 + mp.mpc(0.1, 0.2))) < 1e-15


# zeta ---------------------------------------------------------------------

@pytest.mark.parametrize("s", [2.0, 3.0, 0.5, 0.9, 1.1, 1.5, 10.0, 45.0, -0.5, -1.0, -3.0,
                               -4.5, -7.0, -15.5, -30.5])
def test_zeta_against_mpmath(s):
    assert Z.riemann_zeta(s) == pytest.approx(float(mp.zeta(s)), rel=1e-13, abs=1e-300)


def test_zeta_known_values():
    assert Z.riemann_zeta(-1) == pytest.approx(-1 / 12, abs=1e-14)
    assert Z.riemann_zeta(-3) == pytest.approx(1 / 120, abs=1e-14)
    assert Z.riemann_zeta(0) == -0.5
    assert Z.riemann_zeta(-2) == 0.0 and Z.riemann_zeta(-10) == 0.0
    assert Z.riemann_zeta(2) == pytest.approx(np.pi ** 2 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        Z.riemann_zeta(1.0)


@given(st.floats(-200, -0.6))
def test_log_abs_zeta_far_left(s):
    ref = mp.zeta(s)
    mag, sign = Z.log_abs_zeta(s)
    if ref == 0:
        assert sign == 0
        return
    assert sign == (1 if ref > 0 else -1)
    assert mag == pytest.approx(float(mp.log(abs(ref))), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("k2", range(1, 14))
def test_gamma_half(k2):
    assert Z.gamma_half(k2) == pytest.approx(float(mp.gamma(mp.mpf(k2) / 2)), rel=1e-15)
