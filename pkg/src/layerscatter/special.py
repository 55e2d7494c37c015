"""Cylinder functions for complex argument.

Thin wrappers around the AMOS routines in :mod:`scipy.special`, with the
negative-order reflections applied explicitly and derivative helpers built
from the standard recurrence C_n'(z) = (C_{n-1}(z) - C_{n+1}(z)) / 2.
All functions accept scalar or array ``z`` and integer (or integer-array)
orders.
"""

import numpy as np
import scipy.special as sp

__all__ = [
    "bessel_j", "bessel_j_prime", "bessel_y",
    "hankel1", "hankel1_prime",
]

MAX_ORDER = 200


def _check_order(n):
    if np.any(np.abs(n) > MAX_ORDER):
        raise ValueError(f"order |n| > {MAX_ORDER} not supported")


def bessel_j(n, z):
    """J_n(z) for integer order n and complex argument z."""
    _check_order(n)
    z = np.asarray(z)
    if np.iscomplexobj(z):
        out = sp.jv(n, z)
    else:
        out = sp.jn(np.asarray(n), z)
    if np.any(~np.isfinite(np.atleast_1d(out))):
        raise FloatingPointError("bessel_j overflowed or returned non-finite")
    return out


def bessel_y(n, z):
    """Y_n(z); z must be nonzero."""
    _check_order(n)
    _reject_zero(z)
    return sp.yv(n, np.asarray(z, dtype=complex))


def hankel1(n, z):
    """H^(1)_n(z) = J_n(z) + i Y_n(z); z must be nonzero."""
    _check_order(n)
    _reject_zero(z)
    out = sp.hankel1(n, np.asarray(z, dtype=complex))
    if np.any(~np.isfinite(np.atleast_1d(out))):
        raise FloatingPointError("hankel1 overflowed or returned non-finite")
    return out


def bessel_j_prime(n, z):
    """d/dz J_n(z)."""
    n = np.asarray(n)
    return 0.5 * (bessel_j(n - 1, z) - bessel_j(n + 1, z))


def hankel1_prime(n, z):
    """d/dz H^(1)_n(z)."""
    n = np.asarray(n)
    return 0.5 * (hankel1(n - 1, z) - hankel1(n + 1, z))


def _reject_zero(z):
    if np.any(np.asarray(z) == 0):
        raise ValueError("argument z = 0: logarithmic singularity")
