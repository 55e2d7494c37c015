import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from layerscatter.chebgrid import (bary_matrix, bary_weights, cheb_build,
                                   cheb_eval, cheb_nodes)


def test_cheb_nodes_endpoints_and_order():
    x = cheb_nodes(9, -2.0, 3.0)
    assert x[0] == pytest.approx(-2.0) and x[-1] == pytest.approx(3.0)
    assert (np.diff(x) > 0).all()


def test_bary_matrix_cardinality():
    nodes = cheb_nodes(8, 0.0, 1.0)
    P = bary_matrix(nodes, nodes)
    assert np.abs(P - np.eye(8)).max() <= 1e-12


def test_bary_rows_sum_to_one():
    nodes = cheb_nodes(12, -1.0, 1.0)
    P = bary_matrix(nodes, np.linspace(-1, 1, 37))
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12


def test_polynomial_exactness():
    """Degree m-1 polynomials are interpolated exactly by m nodes."""
    nodes = cheb_nodes(10, -1.5, 0.5)
    t = np.linspace(-1.5, 0.5, 51)
    P = bary_matrix(nodes, t)
    for deg in (0, 4, 9):
        assert np.abs(P @ nodes ** deg - t ** deg).max() <= 1e-11


def test_tensor_patch_interpolates_oscillatory_field():
    k = 3.0
    box = (0.0, 2.0, -1.0, 1.0)     # one-wavelength-scale box, 16 nodes
    f = lambda X, Y: np.exp(1j * k * (0.8 * X + 0.6 * Y))
    patch = cheb_build(box, 16, 16, f)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(0, 2)
        y = rng.uniform(-1, 1)
        got = cheb_eval(patch, (x, y))
        assert abs(got - np.exp(1j * k * (0.8 * x + 0.6 * y))) <= 1e-11


def test_eval_outside_box_rejected():
    patch = cheb_build((0, 1, 0, 1), 4, 4, lambda X, Y: X + Y)
    with pytest.raises(ValueError):
        cheb_eval(patch, (2.0, 0.5))


@settings(deadline=None, max_examples=30)
@given(m=st.integers(4, 20), x=st.floats(-0.999, 0.999))
def test_interpolation_error_decays_with_m(m, x):
    """Chebyshev interpolation of exp(x) on [-1,1] is accurate for m >= 12."""
    nodes = cheb_nodes(m, -1.0, 1.0)
    got = bary_matrix(nodes, [x])[0] @ np.exp(nodes)
    bound = 10.0 / math.factorial(m - 1) * 2.0 ** (1 - (m - 1))
    assert abs(got - np.exp(x)) <= max(bound, 1e-14) * 10
