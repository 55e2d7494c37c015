"""Coupling between the interface spectral densities and the particle
expansions: the Sommerfeld-to-local (C block) and multipole-to-Sommerfeld
(B block) operators, each in a direct reference form and a NUFFT-accelerated
form.

Plane-wave factor conventions (certified by the reconstruction oracles in
the tests):

* Jacobi-Anger for a spectral mode in the middle layer:
  e^{+gamma y + i lam x} has local coefficients (i (lam - gamma)/k2)^n and
  e^{-gamma y + i lam x} has (i (lam + gamma)/k2)^n, as genuine n-th powers
  for n of either sign.
* Plane-wave representation of H_n (Graf/Weyl): the per-mode factor is the
  plain power [i (gamma - lam)/k2]^n on the upper interface and
  [-i (lam + gamma)/k2]^n on the lower one, for n of either sign.
"""

from dataclasses import dataclass

import numpy as np

from .chebgrid import bary_weights, cheb_nodes
from .layers import gamma
from .nufft import Nufft3Plan
from .special import bessel_j, bessel_j_prime

__all__ = ["SpectralUpdate", "InterpGrid", "sommerfeld_to_local_direct",
           "multipole_to_sommerfeld_direct", "SommerfeldGridPlan",
           "build_interp_grid", "sommerfeld_to_local_nufft",
           "MultipoleToSommerfeldPlan", "multipole_to_sommerfeld_nufft",
           "local_coefficients_from_samples"]


@dataclass
class SpectralUpdate:
    """Additive contribution of the particle fields to the interface
    right-hand side, per contour node."""
    sigma_plus: np.ndarray     # induced density on the upper interface
    sigma_minus: np.ndarray    # induced density on the lower interface

    def rhs(self, contour, layers):
        """The 4-vector right-hand-side increment for the interface blocks:
        (s+/g2, -s-/g2, s+, -s-) from the value and derivative jumps."""
        g2 = gamma(contour.nodes, layers.k2)
        out = np.zeros(self.sigma_plus.shape + (4,), dtype=complex)
        out[..., 0] = self.sigma_plus / g2
        out[..., 1] = -self.sigma_minus / g2
        out[..., 2] = self.sigma_plus
        out[..., 3] = -self.sigma_minus
        return out


def _ja_powers(lam, g2, k2, p):
    """Jacobi-Anger factors for up- and downgoing spectral modes."""
    n = np.arange(-p, p + 1)
    up = (1j * (lam - g2) / k2)[:, None] ** n[None, :]
    dn = (1j * (lam + g2) / k2)[:, None] ** n[None, :]
    return up, dn


def _hankel_factors(lam, g2, k2, p):
    """Plane-wave factors of H_n on the upper/lower interface, as genuine
    n-th powers (the (-1)^n from stepping the order downward cancels against
    H_{-n} = (-1)^n H_n)."""
    n = np.arange(-p, p + 1)
    base_up = 1j * (g2 - lam) / k2
    base_dn = -1j * (lam + g2) / k2
    up = base_up[:, None] ** n[None, :]
    dn = base_dn[:, None] ** n[None, :]
    return up, dn


def _density_weights(densities, contour, layers, y):
    """Per-node weights of the two middle-layer spectral fields at height y:
    c_plus e^{gamma2 y} and c_minus e^{-gamma2 (y+d)} (quadrature weight and
    1/(4 pi gamma2) included)."""
    g2 = gamma(contour.nodes, layers.k2)
    base = contour.weights / (4 * np.pi * g2)
    cp = base * densities.values[:, 1] * np.exp(np.multiply.outer(y, g2))
    cm = base * densities.values[:, 2] * np.exp(-np.multiply.outer(y + layers.d, g2))
    return cp, cm


def sommerfeld_to_local_direct(densities, contour, layers, centers, p):
    """Local J-expansion coefficients of u2t + u2b about each center,
    via the Jacobi-Anger factors; O(M N_S (2p+1))."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    lam = contour.nodes
    g2 = gamma(lam, layers.k2)
    up, dn = _ja_powers(lam, g2, layers.k2, p)
    cp, cm = _density_weights(densities, contour, layers, centers[:, 1])
    osc = np.exp(1j * np.multiply.outer(centers[:, 0] - layers.source[0], lam))
    return (osc * cp) @ up + (osc * cm) @ dn      # (M, 2p+1)


def multipole_to_sommerfeld_direct(betas, centers, contour, layers):
    """Spectral densities induced on the interfaces by all outgoing
    multipole expansions; O(M N_S (2p+1))."""
    betas = np.atleast_2d(np.asarray(betas, dtype=complex))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    p = (betas.shape[1] - 1) // 2
    lam = contour.nodes
    g2 = gamma(lam, layers.k2)
    fup, fdn = _hankel_factors(lam, g2, layers.k2, p)
    phase = np.exp(1j * np.multiply.outer(layers.source[0] - centers[:, 0], lam))
    eup = np.exp(np.multiply.outer(centers[:, 1], g2))
    edn = np.exp(-np.multiply.outer(layers.d + centers[:, 1], g2))
    tu = betas @ fup.T                            # (M, N_S)
    td = betas @ fdn.T
    sp = -4j * (phase * eup * tu).sum(axis=0)
    sm = -4j * (phase * edn * td).sum(axis=0)
    return SpectralUpdate(sigma_plus=sp, sigma_minus=sm)


# ---------------------------------------------------------------------------
# NUFFT-accelerated C block: field grid + barycentric sampling + projection
# ---------------------------------------------------------------------------

@dataclass
class InterpGrid:
    """Tensor-product Chebyshev samples of u2t + u2b (and gradient) on a
    grid of boxes covering all enclosing disks."""
    x0: float
    y0: float
    wx: float                  # box width
    wy: float                  # box height
    n1: int
    n2: int
    m: int
    k2: complex
    xnodes: np.ndarray         # (n1 * m,) all Chebyshev abscissas
    ynodes: np.ndarray         # (n2 * m,)
    u: np.ndarray              # (n1 * m, n2 * m)
    ux: np.ndarray
    uy: np.ndarray

    def box_of(self, x, y):
        bx = np.clip(((x - self.x0) / self.wx).astype(int), 0, self.n1 - 1)
        by = np.clip(((y - self.y0) / self.wy).astype(int), 0, self.n2 - 1)
        return bx, by

    def _bary_rows(self, nodes_per_box, box_idx, coords):
        """Barycentric weight rows for every point against its own box's
        nodes, fully vectorized (the Chebyshev weight pattern is the same
        in every box)."""
        w = bary_weights(self.m)
        d = coords[:, None] - nodes_per_box[box_idx]
        exact = np.abs(d) < 1e-300
        P = w[None, :] / np.where(exact, 1.0, d)
        P /= P.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if np.any(hit):
            P[hit] = exact[hit].astype(float)
        return P

    def eval(self, points):
        """Barycentric evaluation of (u, ux, uy) at an (n, 2) point array.

        Points are sorted by box key so the per-box tensor contraction runs
        on contiguous slices."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        bx, by = self.box_of(pts[:, 0], pts[:, 1])
        m = self.m
        px = self._bary_rows(self.xnodes.reshape(self.n1, m), bx, pts[:, 0])
        py = self._bary_rows(self.ynodes.reshape(self.n2, m), by, pts[:, 1])
        key = bx * self.n2 + by
        order = np.argsort(key, kind="stable")
        skey = key[order]
        starts = np.flatnonzero(np.r_[True, skey[1:] != skey[:-1]])
        bounds = np.r_[starts, skey.size]
        out = np.empty((3, pts.shape[0]), dtype=complex)
        px = px.astype(complex)        # one upcast instead of one per box
        for s, e in zip(bounds[:-1], bounds[1:]):
            i, j = divmod(int(skey[s]), self.n2)
            sel = order[s:e]
            v = np.concatenate(
                [f[i * m:(i + 1) * m, j * m:(j + 1) * m]
                 for f in (self.u, self.ux, self.uy)], axis=1)   # (m, 3m)
            tmp = (px[sel] @ v).reshape(sel.size, 3, m)
            out[:, sel] = (tmp * py[sel][:, None, :]).sum(-1).T
        return out


class SommerfeldGridPlan:
    """Precomputed machinery to sample u2t + u2b and its gradient on the
    Chebyshev grid: one batched type-3 NUFFT per tail segment over all
    distinct x-abscissas, direct (separable, cached-phase) summation for
    the short vertical segment."""

    def __init__(self, contour, layers, region, tol=1e-12, m=16):
        self.contour = contour
        self.layers = layers
        self.m = m
        x_lo, x_hi, y_lo, y_hi = region
        lam2 = 2 * np.pi / abs(layers.k2)
        # pad by one wavelength around the requested region, clamped to the
        # middle layer; boxes shrink below lam2 as needed to fit (accuracy
        # only improves with smaller boxes)
        x_lo, x_hi = x_lo - lam2, x_hi + lam2
        y_lo = max(y_lo - lam2, -layers.d)
        y_hi = min(y_hi + lam2, 0.0)
        if y_lo >= y_hi or not (-layers.d <= y_lo and y_hi <= 0):
            raise ValueError("interpolation grid leaves the middle layer")
        self.n1 = int(np.ceil((x_hi - x_lo) / lam2))
        self.n2 = int(np.ceil((y_hi - y_lo) / lam2))
        self.wx = (x_hi - x_lo) / self.n1
        self.wy = (y_hi - y_lo) / self.n2
        self.x0 = x_lo
        self.y0 = y_lo
        self.xnodes = np.concatenate(
            [cheb_nodes(m, self.x0 + i * self.wx, self.x0 + (i + 1) * self.wx)
             for i in range(self.n1)])
        self.ynodes = np.concatenate(
            [cheb_nodes(m, self.y0 + j * self.wy, self.y0 + (j + 1) * self.wy)
             for j in range(self.n2)])

        lam = contour.nodes
        self.g2 = gamma(lam, layers.k2)
        self._base = contour.weights / (4 * np.pi * self.g2)
        seg = contour.segments
        self._tails = {s: np.flatnonzero(seg == s) for s in (1, 3)}
        self._mid = np.flatnonzero(seg == 2)
        xs = self.xnodes - layers.source[0]
        self._plans = {}
        self._xside = {}
        for s, idx in self._tails.items():
            self._plans[s] = Nufft3Plan(np.real(lam[idx]), xs, tol=tol)
            # e^{i lam x} = e^{i t x} * e^{-Im(lam) x}; Im lam = -+b per tail
            self._xside[s] = np.exp(-np.imag(lam[idx])[0] * xs)
        # vertical-segment separable factors
        lam_m = lam[self._mid]
        self._mid_x = np.exp(1j * np.multiply.outer(xs, lam_m))   # (nx, nm)
        self._eyp = np.exp(np.multiply.outer(self.ynodes, self.g2))
        self._eym = np.exp(-np.multiply.outer(self.ynodes + layers.d, self.g2))

    def apply(self, densities):
        """Build the InterpGrid for one set of spectral densities."""
        cpl = self._base * densities.values[:, 1]       # per-node, no y yet
        cml = self._base * densities.values[:, 2]
        ny = self.ynodes.size
        nx = self.xnodes.size
        # strengths per (node, y, component); components: u, uy  (ux via i lam)
        cp = cpl[:, None] * self._eyp.T                  # (N_S, ny)
        cm = cml[:, None] * self._eym.T
        u = np.zeros((nx, ny), dtype=complex)
        uy = np.zeros((nx, ny), dtype=complex)
        ux = np.zeros((nx, ny), dtype=complex)
        for s, idx in self._tails.items():
            lam_s = self.contour.nodes[idx]
            g2s = self.g2[idx]
            su = cp[idx] + cm[idx]
            sy = g2s[:, None] * (cp[idx] - cm[idx])
            sx = 1j * lam_s[:, None] * su
            stack = np.concatenate([su, sy, sx], axis=1)  # (nt, 3 ny)
            vals = self._plans[s].apply(stack)            # (nx, 3 ny)
            xf = self._xside[s][:, None]
            u += xf * vals[:, :ny]
            uy += xf * vals[:, ny:2 * ny]
            ux += xf * vals[:, 2 * ny:]
        # vertical segment, separable direct evaluation
        i = self._mid
        u += np.einsum("xj,jy->xy", self._mid_x,
                       cp[i] + cm[i])
        uy += np.einsum("xj,jy->xy", self._mid_x,
                        self.g2[i][:, None] * (cp[i] - cm[i]))
        ux += np.einsum("xj,jy->xy", self._mid_x * (1j * self.contour.nodes[i]),
                        cp[i] + cm[i])
        return InterpGrid(x0=self.x0, y0=self.y0, wx=self.wx, wy=self.wy,
                          n1=self.n1, n2=self.n2, m=self.m, k2=self.layers.k2,
                          xnodes=self.xnodes, ynodes=self.ynodes,
                          u=u, ux=ux, uy=uy)


def build_interp_grid(densities, contour, layers, region, tol=1e-12, m=16):
    """One-shot interpolation-grid build (see SommerfeldGridPlan)."""
    return SommerfeldGridPlan(contour, layers, region, tol=tol, m=m).apply(densities)


def local_coefficients_from_samples(u, du_radial, k2, R, p):
    """Robust projection of circle samples onto a local J-expansion:
    a_n = (u_n J_n + u'_n k2 J'_n) / (J_n^2 + (k2 J'_n)^2) with u_n, u'_n
    the Fourier coefficients of the value and radial derivative on the
    radius-R circle.  Safe at Bessel-function zeros.  Batched: u and
    du_radial may be (..., 2p+1) over equispaced angles 2 pi q / (2p+1)."""
    nang = 2 * p + 1
    un = np.fft.fft(u, axis=-1) / nang
    upn = np.fft.fft(du_radial, axis=-1) / nang
    ns = np.arange(-p, p + 1)
    un = un[..., ns % nang]
    upn = upn[..., ns % nang]
    jn = bessel_j(ns, k2 * R + 0j)
    jnp = k2 * bessel_j_prime(ns, k2 * R + 0j)
    return (un * jn + upn * jnp) / (jn ** 2 + jnp ** 2)


def sommerfeld_to_local_nufft(grid, instances, p):
    """Local coefficients for every instance by sampling the interpolation
    grid at 2p+1 equispaced points on each enclosing circle and applying
    the robust projection."""
    M = len(instances)
    nang = 2 * p + 1
    th = 2 * np.pi * np.arange(nang) / nang
    ct, st = np.cos(th), np.sin(th)
    centers = np.array([inst.center for inst in instances], dtype=float)
    Rs = np.array([inst.R for inst in instances], dtype=float)
    px = centers[:, 0][:, None] + Rs[:, None] * ct[None, :]
    py = centers[:, 1][:, None] + Rs[:, None] * st[None, :]
    pts = np.stack([px.ravel(), py.ravel()], axis=-1)
    u, ux, uy = grid.eval(pts)
    u = u.reshape(M, nang)
    dur = (ux.reshape(M, nang) * ct[None, :] + uy.reshape(M, nang) * st[None, :])
    out = np.empty((M, nang), dtype=complex)
    for R in np.unique(Rs):
        sel = Rs == R
        out[sel] = local_coefficients_from_samples(
            u[sel], dur[sel], grid.k2, R, p)
    return out


# ---------------------------------------------------------------------------
# NUFFT-accelerated B block: vertical M2M snapping + per-row type-3 NUFFTs
# ---------------------------------------------------------------------------

class MultipoleToSommerfeldPlan:
    """Precomputed B-block application.

    Expansion centers are shifted vertically (M2M) to the nearest of a set
    of rows spaced at most 0.2/|k2| apart, so the y-dependent evanescent
    factor is shared within each row; the x-sums then become Fourier sums
    evaluated by one batched type-3 NUFFT per row and tail segment.  The
    horizontal coordinates need no snapping (the NUFFT accepts them
    exactly), and the 20-node vertical segment is summed directly.
    """

    def __init__(self, contour, layers, instances, p, row_spacing=None,
                 tol=1e-12):
        self.contour = contour
        self.layers = layers
        self.p = p
        centers = np.array([inst.center for inst in instances], dtype=float)
        self.centers = centers
        M = centers.shape[0]
        max_spacing = 0.2 / abs(layers.k2)
        if row_spacing is None:
            row_spacing = max_spacing
        if row_spacing > max_spacing * (1 + 1e-12):
            raise ValueError("snap-row spacing exceeds 0.2/|k2|")
        ylo = centers[:, 1].min()
        self.rows_y = ylo + row_spacing * np.arange(
            int(np.floor((centers[:, 1].max() - ylo) / row_spacing)) + 1)
        self.row_of = np.clip(
            np.rint((centers[:, 1] - ylo) / row_spacing).astype(int),
            0, self.rows_y.size - 1)
        occupied = np.unique(self.row_of)
        self.occupied = occupied

        # per-instance vertical M2M matrices (exact translations)
        ns = np.arange(-p, p + 1)
        q = np.subtract.outer(-ns, -ns)          # q[i, j] = nu_j - n_i
        shifts = self.rows_y[self.row_of] - centers[:, 1]
        self._m2m = np.empty((M, 2 * p + 1, 2 * p + 1), dtype=complex)
        for i, dy in enumerate(shifts):
            if dy == 0:
                self._m2m[i] = np.eye(2 * p + 1)
            else:
                th = np.pi / 2 if dy > 0 else -np.pi / 2
                self._m2m[i] = (bessel_j(q, layers.k2 * abs(dy) + 0j)
                                * np.exp(1j * q * th))

        lam = contour.nodes
        self.g2 = gamma(lam, layers.k2)
        seg = contour.segments
        self._tails = {s: np.flatnonzero(seg == s) for s in (1, 3)}
        self._mid = np.flatnonzero(seg == 2)
        self._fup, self._fdn = _hankel_factors(lam, self.g2, layers.k2, p)
        # per-row NUFFT plans: sources are that row's x coordinates,
        # targets the negated tail abscissas (for e^{-i lam x})
        self._plans = {}
        self._srcfac = {}
        for r in occupied:
            sel = self.row_of == r
            xs = centers[sel, 0]
            self._plans[r] = {}
            self._srcfac[r] = {}
            for s, idx in self._tails.items():
                t = np.real(lam[idx])
                self._plans[r][s] = Nufft3Plan(xs, -t, tol=tol)
                self._srcfac[r][s] = np.exp(np.imag(lam[idx])[0] * xs)
        self._sel = {r: self.row_of == r for r in occupied}
        # interface evanescent factors per occupied row
        self._eup = {r: np.exp(self.rows_y[r] * self.g2) for r in occupied}
        self._edn = {r: np.exp(-(layers.d + self.rows_y[r]) * self.g2)
                     for r in occupied}
        self._x0phase = np.exp(1j * layers.source[0] * lam)
        # direct machinery for the short vertical segment (exact centers)
        lam_m = lam[self._mid]
        self._mid_phase = np.exp(
            -1j * np.multiply.outer(centers[:, 0], lam_m))
        self._mid_eup = np.exp(np.multiply.outer(centers[:, 1], self.g2[self._mid]))
        self._mid_edn = np.exp(
            -np.multiply.outer(layers.d + centers[:, 1], self.g2[self._mid]))

    def apply(self, betas):
        betas = np.asarray(betas, dtype=complex)
        width = 2 * self.p + 1
        snapped = np.einsum("mln,mn->ml", self._m2m, betas)
        n_nodes = self.contour.nodes.size
        sp = np.zeros(n_nodes, dtype=complex)
        sm = np.zeros(n_nodes, dtype=complex)
        for r in self.occupied:
            b_r = snapped[self._sel[r]]                  # (M_r, 2p+1)
            for s, idx in self._tails.items():
                c = b_r * self._srcfac[r][s][:, None]
                G = self._plans[r][s].apply(c)           # (n_tail, 2p+1)
                sp[idx] += self._eup[r][idx] * (G * self._fup[idx]).sum(1)
                sm[idx] += self._edn[r][idx] * (G * self._fdn[idx]).sum(1)
        sp *= -4j * self._x0phase
        sm *= -4j * self._x0phase
        # vertical segment: direct with exact (unsnapped) centers
        i = self._mid
        tu = betas @ self._fup[i].T                      # (M, n_mid)
        td = betas @ self._fdn[i].T
        sp[i] += -4j * self._x0phase[i] * (self._mid_phase * self._mid_eup * tu).sum(0)
        sm[i] += -4j * self._x0phase[i] * (self._mid_phase * self._mid_edn * td).sum(0)
        return SpectralUpdate(sigma_plus=sp, sigma_minus=sm)


def multipole_to_sommerfeld_nufft(betas, instances, contour, layers,
                                  row_spacing=None, tol=1e-12):
    """One-shot NUFFT B-block application (see MultipoleToSommerfeldPlan)."""
    plan = MultipoleToSommerfeldPlan(contour, layers, instances,
                                     p=(np.asarray(betas).shape[1] - 1) // 2,
                                     row_spacing=row_spacing, tol=tol)
    return plan.apply(betas)
