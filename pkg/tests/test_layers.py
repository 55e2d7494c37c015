import numpy as np
import pytest

from layerscatter.layers import (InterfaceSolver, LayerStack, build_contour,
                                 build_contour_adaptive, eval_sommerfeld_field,
                                 gamma, incident_rhs, interface_matrix,
                                 sommerfeld_point_source)
from layerscatter.special import hankel1


def test_layerstack_validation():
    with pytest.raises(ValueError):
        LayerStack(k1=-1.0, k2=3.0, k3=1.0, d=32.0, source=(1, 1))
    with pytest.raises(ValueError):
        LayerStack(k1=1.0, k2=3.0, k3=1.0, d=-2.0, source=(1, 1))
    with pytest.raises(ValueError):
        LayerStack(k1=1.0, k2=3.0, k3=1.0, d=32.0, source=(1, 0.1))


def test_gamma_branch():
    """Re gamma >= 0 on the contour tails and gamma(0) = -i k."""
    k = 3.0
    assert abs(gamma(0.0 + 0j, k) - (-1j * k)) <= 1e-14 * k
    lam = np.linspace(-40, 40, 401) - 0.2j * np.sign(np.linspace(-40, 40, 401))
    g = gamma(lam, k)
    big = np.abs(lam.real) > k + 1
    assert (g[big].real > 0).all()


def test_contour_structure():
    layers = LayerStack(k1=1.0, k2=3.0, k3=1.0, d=32.0, source=(1, 1))
    c = build_contour(layers)
    n_mid = (c.segments == 2).sum()
    assert n_mid == 20
    assert (c.segments == 1).sum() == (c.segments == 3).sum() >= 240
    tails = c.segments != 2
    assert np.allclose(np.abs(c.nodes[tails].imag), c.b)
    # anti-symmetric traversal: nodes come in pairs lambda, -conj(lambda)
    assert np.allclose(np.sort(c.nodes.real), np.sort(-c.nodes.real))


def test_sommerfeld_identity_free_space():
    """Contour quadrature of the spectral H0 form vs the Hankel function."""
    rng = np.random.default_rng(0)
    for k in (1.0, 3.0):
        sep = 0.2 * 2 * np.pi / k
        layers = LayerStack(k1=k, k2=k, k3=k, d=10.0, source=(0.5, 1.0))
        contour = build_contour_adaptive(layers, min_vertical_sep=sep,
                                         tol=1e-12, max_horiz=10.0)
        src = (0.5, 1.0)
        x = src[0] + rng.uniform(-5, 5, 25)
        y = src[1] + sep + rng.uniform(0, 3, 25)
        pts = np.stack([x, y], axis=-1)
        r = np.hypot(x - src[0], y - src[1])
        ref = 0.25j * hankel1(0, k * r + 0j)
        got = sommerfeld_point_source(contour, k, src, pts)
        assert np.abs(got - ref).max() / np.abs(ref).max() <= 1e-9


def test_interface_rows_satisfied(layers131, contour131):
    """The solved spectral densities satisfy the 4x4 system rows exactly."""
    solver = InterfaceSolver(contour131, layers131)
    dens = solver.solve()
    idx = np.arange(0, len(contour131), 7)
    scale = np.abs(dens.values).max()
    for i in idx:
        lam = contour131.nodes[i]
        A = interface_matrix(lam, layers131)
        b = incident_rhs(lam, layers131)
        res = A @ dens.values[i] - b
        assert np.abs(res).max() <= 1e-12 * max(scale, np.abs(b).max())


def test_interface_field_continuity(layers131, contour131):
    """Value and normal-derivative continuity of the interface solution."""
    dens = InterfaceSolver(contour131, layers131).solve()
    xs = np.linspace(-6.0, 6.0, 9)
    k1 = layers131.k1

    def total_top(pts):
        u, g = eval_sommerfeld_field(dens, contour131, layers131, pts, "u1s",
                                     want_gradient=True)
        src = np.asarray(layers131.source, dtype=float)
        d = pts - src
        r = np.hypot(d[:, 0], d[:, 1])
        u0 = 0.25j * hankel1(0, k1 * r + 0j)
        du0 = -0.25j * k1 * hankel1(1, k1 * r + 0j)[:, None] * d / r[:, None]
        return u + u0, g + du0

    def mid(pts):
        ut, gt = eval_sommerfeld_field(dens, contour131, layers131, pts, "u2t",
                                       want_gradient=True)
        ub, gb = eval_sommerfeld_field(dens, contour131, layers131, pts, "u2b",
                                       want_gradient=True)
        return ut + ub, gt + gb

    def bottom(pts):
        return eval_sommerfeld_field(dens, contour131, layers131, pts, "u3s",
                                     want_gradient=True)

    eps = 1e-8
    # top interface
    above = np.stack([xs, np.full_like(xs, eps)], -1)
    below = np.stack([xs, np.full_like(xs, -eps)], -1)
    ua, ga = total_top(above)
    ub, gb = mid(below)
    assert np.abs(ua - ub).max() / np.abs(ua).max() <= 1e-6
    assert np.abs(ga[:, 1] - gb[:, 1]).max() / np.abs(ga[:, 1]).max() <= 1e-6
    # bottom interface
    above = np.stack([xs, np.full_like(xs, -layers131.d + eps)], -1)
    below = np.stack([xs, np.full_like(xs, -layers131.d - eps)], -1)
    ua, ga = mid(above)
    ub, gb = bottom(below)
    assert np.abs(ua - ub).max() / np.abs(ub).max() <= 1e-6
    assert np.abs(ga[:, 1] - gb[:, 1]).max() / np.abs(gb[:, 1]).max() <= 1e-6


def test_equal_wavenumbers_transmit_source():
    """k1 = k2 = k3: no interface scattering; the middle-layer field is the
    free-space Green's function of the source."""
    k = 2.0
    layers = LayerStack(k1=k, k2=k, k3=k, d=8.0, source=(0.0, 1.0))
    contour = build_contour_adaptive(layers, min_vertical_sep=1.0, tol=1e-12,
                                     max_horiz=6.0)
    dens = InterfaceSolver(contour, layers).solve()
    pts = np.array([[1.0, -2.0], [-2.5, -4.0], [3.0, -6.5]])
    u = (eval_sommerfeld_field(dens, contour, layers, pts, "u2t")
         + eval_sommerfeld_field(dens, contour, layers, pts, "u2b"))
    d = pts - np.array(layers.source)
    ref = 0.25j * hankel1(0, k * np.hypot(d[:, 0], d[:, 1]) + 0j)
    assert np.abs(u - ref).max() / np.abs(ref).max() <= 1e-9
    # and the reflected top-layer field vanishes
    top = np.array([[0.5, 2.0], [-1.0, 3.0]])
    u1s = eval_sommerfeld_field(dens, contour, layers, top, "u1s")
    assert np.abs(u1s).max() <= 1e-9 * np.abs(ref).max()


def test_extra_rhs_linearity(layers131, contour131):
    """solve(extra_rhs) - solve() is linear in the extra right-hand side."""
    solver = InterfaceSolver(contour131, layers131)
    rng = np.random.default_rng(1)
    n = len(contour131)
    e = rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))
    base = solver.solve().values
    full = solver.solve(extra_rhs=e).values
    only = solver.solve(extra_rhs=e, include_source=False).values
    assert np.abs(full - base - only).max() <= 1e-12 * np.abs(full).max()


def test_evaluation_region_guards(layers131, contour131):
    dens = InterfaceSolver(contour131, layers131).solve()
    with pytest.raises(ValueError):
        eval_sommerfeld_field(dens, contour131, layers131,
                              np.array([[0.0, -1.0]]), "u1s")
    with pytest.raises(ValueError):
        eval_sommerfeld_field(dens, contour131, layers131,
                              np.array([[0.0, 1.0]]), "u2t")
