import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from layerscatter.special import (bessel_j, bessel_j_prime, bessel_y, hankel1,
                                  hankel1_prime)

mpmath.mp.dps = 30


def test_bessel_j_against_mpmath():
    for n in (0, 1, 5, -3, 12):
        for z in (0.3, 2.7, 11.0, 0.5 + 0.4j, 3.0 - 0.2j):
            ref = complex(mpmath.besselj(n, z))
            got = complex(bessel_j(n, z))
            assert abs(got - ref) <= 1e-13 * max(1.0, abs(ref))


def test_bessel_y_against_mpmath():
    for n in (0, 1, 4, -2):
        for z in (0.4, 1.9, 8.3):
            ref = complex(mpmath.bessely(n, z))
            assert abs(complex(bessel_y(n, z)) - ref) <= 1e-12 * max(1, abs(ref))


def test_hankel_is_j_plus_iy():
    z = np.array([0.7, 2.0, 9.5])
    for n in (0, 1, 3, -4):
        h = hankel1(n, z + 0j)
        jy = bessel_j(n, z) + 1j * bessel_y(n, z)
        assert np.abs(h - jy).max() <= 1e-12 * np.abs(h).max()


def test_wronskian_jy():
    """J_n(x) Y_n'(x) - J_n'(x) Y_n(x) = 2 / (pi x)."""
    x = np.linspace(0.2, 25.0, 60)
    for n in range(0, 8):
        yp = 0.5 * (bessel_y(n - 1, x) - bessel_y(n + 1, x))
        w = bessel_j(n, x) * yp - bessel_j_prime(n, x) * bessel_y(n, x)
        assert np.abs(w - 2 / (np.pi * x)).max() <= 1e-12


def test_derivative_matches_finite_difference():
    z = 1.7 + 0.3j
    h = 1e-6
    for n in (0, 2, -3):
        fd = (bessel_j(n, z + h) - bessel_j(n, z - h)) / (2 * h)
        assert abs(bessel_j_prime(n, z) - fd) <= 1e-8
        fdh = (hankel1(n, z + h) - hankel1(n, z - h)) / (2 * h)
        assert abs(hankel1_prime(n, z) - fdh) <= 1e-8 * abs(fdh)


def test_negative_order_symmetry():
    z = np.array([0.9 + 0.1j, 4.2 + 0j])
    for n in (1, 2, 5):
        assert np.abs(bessel_j(-n, z) - (-1) ** n * bessel_j(n, z)).max() < 1e-13
        assert np.abs(hankel1(-n, z) - (-1) ** n * hankel1(n, z)).max() < 1e-12


@settings(deadline=None, max_examples=40)
@given(n=st.integers(-8, 8), x=st.floats(0.1, 30.0),
       yim=st.floats(0.0, 2.0))
def test_recurrence_property(n, x, yim):
    """2n/z J_n(z) = J_{n-1}(z) + J_{n+1}(z)."""
    z = x + 1j * yim
    lhs = 2 * n / z * bessel_j(n, z)
    rhs = bessel_j(n - 1, z) + bessel_j(n + 1, z)
    scale = max(1.0, abs(bessel_j(n - 1, z)), abs(bessel_j(n + 1, z)))
    assert abs(lhs - rhs) <= 1e-11 * scale


def test_rejects_zero_argument():
    with pytest.raises((ValueError, ZeroDivisionError)):
        hankel1(0, 0.0 + 0j)
