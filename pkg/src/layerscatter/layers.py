"""Spectral (Sommerfeld-integral) machinery for the three-layer medium.

The scattered field in each layer is represented by a Fourier-type contour
integral with one unknown spectral density per interface side.  The
integration contour is deformed off the real axis into the second and
fourth quadrants to avoid the square-root branch points at +-k_i, and each
value of the spectral parameter decouples into a 4x4 interface system.
"""

from dataclasses import dataclass, field

import numpy as np

from .quadrature import gauss_legendre

__all__ = ["LayerStack", "SommerfeldContour", "SpectralDensities", "gamma",
           "build_contour", "interface_matrix", "incident_rhs",
           "InterfaceSolver", "solve_interfaces", "eval_sommerfeld_field",
           "build_contour_adaptive",
           "sommerfeld_point_source"]

FIELD_KINDS = ("u1s", "u2t", "u2b", "u3s")
MIN_BRANCH_DISTANCE = 0.05


@dataclass(frozen=True)
class LayerStack:
    """Wavenumbers of the three layers, middle-layer depth, and the source.

    Layer 1 occupies y > 0, layer 2 the slab -d < y < 0, layer 3 y < -d.
    The point source sits at ``source`` in the top layer, roughly 0.2
    wavelengths or more above the upper interface (enforced with a 25%
    slack so that e.g. height 1 at k1 = 1 is admitted).
    """
    k1: complex
    k2: complex
    k3: complex
    d: float
    source: tuple

    def __post_init__(self):
        for k in (self.k1, self.k2, self.k3):
            if not (np.real(k) > 0 and np.imag(k) >= 0):
                raise ValueError(f"wavenumber {k} must have Re k > 0, Im k >= 0")
        if not self.d > 0:
            raise ValueError("middle-layer depth d must be positive")
        y0 = self.source[1]
        standoff = 0.75 * 0.2 * 2 * np.pi / np.real(self.k1)
        if y0 < standoff:
            raise ValueError(
                f"source height {y0} below the 0.2-wavelength standoff {standoff:.4g}")

    @property
    def ks(self):
        return (self.k1, self.k2, self.k3)


@dataclass(frozen=True)
class SommerfeldContour:
    """Deformed contour: two horizontal tails at Im = -+b joined by a
    vertical segment through the origin."""
    b: float
    t_max: float
    nodes: np.ndarray      # complex lambda_j, in traversal order
    weights: np.ndarray    # complex, direction times Gauss-Legendre weight
    segments: np.ndarray   # 1, 2 or 3 per node

    def __len__(self):
        return self.nodes.size


@dataclass
class SpectralDensities:
    """Per contour node, the 4-vector (sigma1, sigma2+, sigma2-, sigma3)."""
    values: np.ndarray     # shape (n_nodes, 4)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite spectral density")


def gamma(lam, k):
    """Vertical wavenumber root sqrt(lam^2 - k^2).

    Branch cuts run vertically upward from +k and downward from -k, so the
    function is continuous along the deformed contour.  On the real axis
    between the branch points the value is -i sqrt(k^2 - lam^2) (decaying
    evanescent modes, outgoing propagating modes); for large real lam it is
    +|lam|.
    """
    lam = np.asarray(lam, dtype=complex)
    a = 1j * (lam - k)          # cut of sqrt(lam - k) rotated to point up
    b = -1j * (lam + k)         # cut of sqrt(lam + k) rotated to point down
    for w in (a, b):
        bad = (np.real(w) < 0) & (np.imag(w) == 0)
        if np.any(bad):
            raise ValueError("lambda lies on a branch cut")
    s1 = np.exp(-1j * np.pi / 4) * np.sqrt(a)
    s2 = np.exp(1j * np.pi / 4) * np.sqrt(b)
    return s1 * s2


def _tail_edges(ks, b, t_max):
    """Panel edges on [0, t_max], graded toward each branch-point abscissa
    |k_i| (where the integrand has curvature on the scale of b) and widening
    geometrically in between."""
    marks = {0.0, t_max}
    for ka in sorted({abs(k) for k in ks}):
        for e in (ka - 2 * b, ka - 0.5 * b, ka + 0.5 * b, ka + 2 * b, ka + 8 * b):
            if 0 < e < t_max:
                marks.add(e)
    marks = sorted(marks)
    edges = [marks[0]]
    for lo, hi in zip(marks[:-1], marks[1:]):
        gap = hi - lo
        nsub = max(1, int(np.ceil(np.log2(gap / (4 * b)))))
        for j in range(1, nsub):
            edges.append(lo + gap * (2 ** j - 1) / (2 ** nsub - 1))
        edges.append(hi)
    return np.array(edges)


def build_contour(layers, b=0.2, pad=20.0, n_tail=240, n_mid=20):
    """Gauss-Legendre discretization of the three-segment contour.

    Each horizontal tail of length t_max = max|k_i| + pad is split into
    panels graded toward the branch-point abscissas |k_i| (at distance b
    above/below the tails the integrand varies on that scale), with about
    ``n_tail`` nodes per tail in total; the short vertical segment gets a
    single ``n_mid``-point panel.
    """
    if b <= 0 or pad <= 0:
        raise ValueError("need b > 0 and pad > 0")
    t_max = max(abs(k) for k in layers.ks) + pad
    edges = _tail_edges(layers.ks, b, t_max)
    n_per = max(6, int(np.ceil(n_tail / (edges.size - 1))))

    nodes, weights, tags = [], [], []
    # Gamma_3: lambda = t + ib, t from -t_max to 0
    for lo, hi in zip(-edges[::-1][:-1], -edges[::-1][1:]):
        q = gauss_legendre(n_per, lo, hi)
        nodes.append(q.nodes + 1j * b)
        weights.append(q.weights.astype(complex))
        tags.append(np.full(n_per, 3))
    # Gamma_2: lambda = it, t from b down to -b  => d(lambda) = -i dt (ascending t)
    q = gauss_legendre(n_mid, -b, b)
    nodes.append(1j * q.nodes)
    weights.append(-1j * q.weights)
    tags.append(np.full(n_mid, 2))
    # Gamma_1: lambda = t - ib, t from 0 to t_max
    for lo, hi in zip(edges[:-1], edges[1:], strict=True):
        q = gauss_legendre(n_per, lo, hi)
        nodes.append(q.nodes - 1j * b)
        weights.append(q.weights.astype(complex))
        tags.append(np.full(n_per, 1))

    contour = SommerfeldContour(
        b=b, t_max=t_max,
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        segments=np.concatenate(tags).astype(int))
    for k in layers.ks:
        dist = np.abs(contour.nodes[:, None] - np.array([k, -k])[None, :]).min()
        if dist < MIN_BRANCH_DISTANCE:
            raise ValueError(
                f"contour passes within {dist:.3g} of a branch point of k={k}")
    return contour


def build_contour_adaptive(layers, min_vertical_sep, tol=1e-12, b=0.2,
                           n_mid=20, max_horiz=0.0):
    """Contour sized for a given worst-case vertical separation.

    The tails are truncated where the evanescent factor e^{-t * sep} falls
    below ``tol`` (with a safety margin), and the node count grows with the
    tail length -- and, if ``max_horiz`` (the largest |x - x0| to be
    evaluated) is given, with the number of oscillations of e^{i lam dx}
    along the tail.
    """
    if min_vertical_sep <= 0:
        raise ValueError("need a positive vertical separation")
    pad = max(20.0, -np.log(tol * 1e-2) / min_vertical_sep)
    kmax = max(abs(k) for k in layers.ks)
    t_max = kmax + pad
    n_osc = int(np.ceil(8.0 * t_max * max_horiz / (2 * np.pi)))
    n_tail = max(240, int(np.ceil(2.0 * t_max)), n_osc)
    return build_contour(layers, b=b, pad=pad, n_tail=n_tail, n_mid=n_mid)


def interface_matrix(lam, layers):
    """The 4x4 per-mode system enforcing value and derivative continuity of
    the no-particle field at y = 0 and y = -d.

    Unknown ordering: (sigma1, sigma2+, sigma2-, sigma3).  Rows 1-2 are
    value continuity at y = 0 and y = -d, rows 3-4 the corresponding
    y-derivative conditions.
    """
    g1, g2, g3 = (gamma(lam, k) for k in layers.ks)
    e2 = np.exp(-g2 * layers.d)
    return np.array([
        [1 / g1, -1 / g2, -e2 / g2, 0],
        [0, e2 / g2, 1 / g2, -1 / g3],
        [1, 1, -e2, 0],
        [0, e2, -1, -1],
    ], dtype=complex)


def incident_rhs(lam, layers):
    """Right-hand side carrying the point source above the top interface."""
    y0 = layers.source[1]
    if not y0 > 0:
        raise ValueError("source must lie in the top layer (y0 > 0)")
    g1 = gamma(lam, layers.k1)
    e = np.exp(-g1 * y0)
    return np.array([-e / g1, 0, e, 0], dtype=complex)


class InterfaceSolver:
    """Factors every per-node 4x4 interface block once; solves are then a
    batched back-substitution (implemented as multiplication by the cached
    inverses, which is accurate at these block sizes and condition numbers).
    """

    def __init__(self, contour, layers):
        self.contour = contour
        self.layers = layers
        lam = contour.nodes
        g = np.stack([gamma(lam, k) for k in layers.ks], axis=-1)  # (N, 3)
        e2 = np.exp(-g[:, 1] * layers.d)
        n = lam.size
        A = np.zeros((n, 4, 4), dtype=complex)
        A[:, 0, 0] = 1 / g[:, 0]
        A[:, 0, 1] = -1 / g[:, 1]
        A[:, 0, 2] = -e2 / g[:, 1]
        A[:, 1, 1] = e2 / g[:, 1]
        A[:, 1, 2] = 1 / g[:, 1]
        A[:, 1, 3] = -1 / g[:, 2]
        A[:, 2, 0] = 1
        A[:, 2, 1] = 1
        A[:, 2, 2] = -e2
        A[:, 3, 1] = e2
        A[:, 3, 2] = -1
        A[:, 3, 3] = -1
        try:
            self._inv = np.linalg.inv(A)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"singular interface block: {exc}") from exc
        e1 = np.exp(-g[:, 0] * layers.source[1])
        self.rhs0 = np.zeros((n, 4), dtype=complex)
        self.rhs0[:, 0] = -e1 / g[:, 0]
        self.rhs0[:, 2] = e1
        self.gammas = g

    def solve(self, extra_rhs=None, include_source=True):
        rhs = self.rhs0 if include_source else np.zeros_like(self.rhs0)
        if extra_rhs is not None:
            rhs = rhs + extra_rhs
        vals = np.einsum("nij,nj->ni", self._inv, rhs)
        return SpectralDensities(values=vals)


def solve_interfaces(contour, layers, extra_rhs=None):
    """Solve every 4x4 interface block; ``extra_rhs`` (n_nodes, 4) carries
    particle contributions."""
    return InterfaceSolver(contour, layers).solve(extra_rhs)


def _integrand_factors(which, lam, g, layers, y):
    d = layers.d
    if which == "u1s":
        if np.any(y < 0):
            raise ValueError("u1s is defined in the top layer (y >= 0)")
        return np.exp(-np.multiply.outer(y, g[:, 0])) / g[:, 0], -g[:, 0], 0
    if which == "u2t":
        _check_mid(y, d)
        return np.exp(np.multiply.outer(y, g[:, 1])) / g[:, 1], g[:, 1], 1
    if which == "u2b":
        _check_mid(y, d)
        return np.exp(-np.multiply.outer(y + d, g[:, 1])) / g[:, 1], -g[:, 1], 2
    if which == "u3s":
        if np.any(y > -d):
            raise ValueError("u3s is defined in the bottom layer (y <= -d)")
        return np.exp(np.multiply.outer(y + d, g[:, 2])) / g[:, 2], g[:, 2], 3
    raise ValueError(f"unknown field kind {which!r}; expected one of {FIELD_KINDS}")


def _check_mid(y, d):
    if np.any((y > 0) | (y < -d)):
        raise ValueError("u2t/u2b are defined in the middle layer (-d <= y <= 0)")


def eval_sommerfeld_field(densities, contour, layers, points, which,
                          want_gradient=False):
    """Contour quadrature of one spectral field at one point or an (n, 2)
    array of points.  Gradients differentiate the integrand analytically."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    lam = contour.nodes
    solver_g = np.stack([gamma(lam, k) for k in layers.ks], axis=-1)
    vert, dvert, col = _integrand_factors(which, lam, solver_g, layers, y)
    x0 = layers.source[0]
    osc = np.exp(1j * np.multiply.outer(x - x0, lam))
    core = (contour.weights / (4 * np.pi)) * densities.values[:, col]
    base = osc * vert * core
    val = base.sum(axis=1)
    scalar = np.asarray(points).ndim == 1
    if not want_gradient:
        return val[0] if scalar else val
    gx = (base * (1j * lam)).sum(axis=1)
    gy = (base * dvert).sum(axis=1)
    grad = np.stack([gx, gy], axis=-1)
    return (val[0], grad[0]) if scalar else (val, grad)


def sommerfeld_point_source(contour, k, source, points):
    """Free-space Green's function via the same contour machinery.

    Quadrature of the spectral form of (i/4) H0^(1)(k |x - x0|); requires a
    vertical separation from the source for the integrand to decay.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x0, y0 = source
    lam = contour.nodes
    g = gamma(lam, k)
    dy = np.abs(pts[:, 1] - y0)
    vert = np.exp(-np.multiply.outer(dy, g)) / g
    osc = np.exp(1j * np.multiply.outer(pts[:, 0] - x0, lam))
    val = (osc * vert * (contour.weights / (4 * np.pi))).sum(axis=1)
    return val[0] if np.asarray(points).ndim == 1 else val
