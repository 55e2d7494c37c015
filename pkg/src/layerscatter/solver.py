"""Fully coupled layered-medium solve: the Schur-complement operator on the
multipole unknowns, a restarted GMRES driver, and total-field evaluation in
every region of the geometry.

Block structure (interface densities sigma, multipole coefficients beta):

    [A  B] [sigma]   [b]
    [C  D] [beta ] = [0]

with A the per-node 4x4 interface systems, B the multipole-to-Sommerfeld
map, C the Sommerfeld-to-local map followed by the scattering matrices, and
D = I - S T the preconditioned free-space multiple-scattering operator.
Eliminating sigma gives the Schur system

    (D - C A^{-1} B) beta = -C A^{-1} b,

where, in the preconditioned convention used throughout, both C terms carry
the S-multiplication, so the right-hand side is S applied to the incoming
local coefficients of the transmitted incident field.
"""

from dataclasses import dataclass

import numpy as np

from .coupling import (MultipoleToSommerfeldPlan, SommerfeldGridPlan,
                       multipole_to_sommerfeld_direct,
                       sommerfeld_to_local_direct, sommerfeld_to_local_nufft)
from .layers import InterfaceSolver, eval_sommerfeld_field, sommerfeld_point_source
from .multiscat import (ExpansionVector, PairCoupling, _stack_smatrices,
                        eval_expansion, eval_multipole_field)
from .special import hankel1

__all__ = ["GmresConfig", "GmresError", "gmres", "SchurOperator",
           "apply_schur", "Solution", "solve_layered_scene",
           "eval_total_field", "NUFFT_CROSSOVER"]

# direct coupling paths below this M * N_S work estimate, NUFFT above;
# measured break-even for the accelerated B and C applies is near 1e6
NUFFT_CROSSOVER = 1e6


@dataclass
class GmresConfig:
    tol: float = 1e-6
    maxiter: int = 1000
    restart: int = 100
    use_nufft: bool = None      # None selects by the crossover estimate

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("GMRES tolerance must be positive")


class GmresError(RuntimeError):
    """Non-convergence (iteration cap or stagnation); carries the residual
    history in ``history``."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


def gmres(op, b, tol=1e-6, maxiter=1000, restart=100):
    """Restarted GMRES with modified Gram-Schmidt and Givens rotations.

    Solves op(x) = b to relative residual ``tol``; returns (x, history)
    with one relative-residual entry per Arnoldi step.  Raises GmresError
    on hitting the iteration cap or on stagnation (residual reduction by
    less than a factor 1e-12 over a full restart cycle).
    """
    b = np.asarray(b, dtype=complex)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), [0.0]
    x = np.zeros_like(b)
    history = []
    total = 0
    while True:
        r = b - op(x) if total else b.copy()
        beta = np.linalg.norm(r)
        if beta / bnorm <= tol:
            return x, history or [beta / bnorm]
        m = min(restart, maxiter - total)
        V = np.empty((m + 1, b.size), dtype=complex)
        H = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m, dtype=complex)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        V[0] = r / beta
        j_used = 0
        for j in range(m):
            w = np.array(op(V[j]), dtype=complex)   # copy: op may alias input
            for i in range(j + 1):
                H[i, j] = np.vdot(V[i], w)
                w -= H[i, j] * V[i]
            H[j + 1, j] = np.linalg.norm(w)
            if H[j + 1, j] > 0:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            h1, h2 = H[j, j], H[j + 1, j]
            denom = np.hypot(abs(h1), abs(h2))
            if denom == 0:
                cs[j], sn[j] = 1.0, 0.0
            elif h1 == 0:
                cs[j], sn[j] = 0.0, np.conj(h2) / abs(h2)
            else:
                cs[j] = abs(h1) / denom
                sn[j] = (h1 / abs(h1)) * np.conj(h2) / denom
            H[j, j] = cs[j] * h1 + sn[j] * h2
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            res = abs(g[j + 1]) / bnorm
            history.append(res)
            total += 1
            j_used = j + 1
            if res <= tol or total >= maxiter:
                break
        y = np.linalg.solve(H[:j_used, :j_used], g[:j_used])
        x = x + y @ V[:j_used]
        if history[-1] <= tol:
            return x, history
        if total >= maxiter:
            raise GmresError(
                f"GMRES did not reach tol={tol} in {maxiter} iterations "
                f"(residual {history[-1]:.3e})", history)
        if beta > 0 and abs(g[j_used]) / beta > 1 - 1e-12:
            raise GmresError(
                f"GMRES stagnated at residual {history[-1]:.3e}", history)


class SchurOperator:
    """Matrix-free Schur-complement operator and its right-hand side.

    Holds the factored interface blocks, the all-pairs free-space coupling,
    the stacked (instance-rotated) scattering matrices, and -- when the
    work estimate M * N_S exceeds the crossover -- the NUFFT coupling plans.
    """

    def __init__(self, contour, layers, instances, smats, p, use_nufft=None,
                 coupling_tol=1e-13):
        self.contour = contour
        self.layers = layers
        self.instances = list(instances)
        self.p = p
        self.M = len(self.instances)
        self.centers = np.array([i.center for i in self.instances], dtype=float)
        self.S = _stack_smatrices(smats, self.M)
        self.interface = InterfaceSolver(contour, layers)
        self.pair = (PairCoupling(self.centers, layers.k2, p)
                     if self.M > 1 else None)
        if use_nufft is None:
            use_nufft = self.M * len(contour) > NUFFT_CROSSOVER
        self.use_nufft = bool(use_nufft) and self.M > 0
        if self.use_nufft:
            R = max(i.R for i in self.instances)
            region = (self.centers[:, 0].min() - R, self.centers[:, 0].max() + R,
                      self.centers[:, 1].min() - R, self.centers[:, 1].max() + R)
            self._grid_plan = SommerfeldGridPlan(contour, layers, region,
                                                tol=coupling_tol)
            self._b_plan = MultipoleToSommerfeldPlan(contour, layers,
                                                     self.instances, p,
                                                     tol=coupling_tol)

    def _c_block(self, densities):
        """Incoming local coefficients of the interface-generated field."""
        if self.use_nufft:
            grid = self._grid_plan.apply(densities)
            return sommerfeld_to_local_nufft(grid, self.instances, self.p)
        return sommerfeld_to_local_direct(densities, self.contour, self.layers,
                                          self.centers, self.p)

    def _b_block(self, betas):
        if self.use_nufft:
            return self._b_plan.apply(betas)
        return multipole_to_sommerfeld_direct(betas, self.centers,
                                              self.contour, self.layers)

    def incident_locals(self):
        """C A^{-1} b: locals of the transmitted incident field."""
        dens0 = self.interface.solve()
        return self._c_block(dens0)

    def rhs(self):
        return np.einsum("mln,mn->ml", self.S,
                         self.incident_locals()).ravel()

    def interaction_locals(self, betas):
        """T beta + C A^{-1} B beta: incoming locals from all other
        particles, both directly and via the interfaces."""
        upd = self._b_block(betas)
        dens = self.interface.solve(extra_rhs=upd.rhs(self.contour, self.layers),
                                    include_source=False)
        locs = self._c_block(dens)
        if self.pair is not None:
            locs = locs + self.pair.apply_m2l(betas)
        return locs

    def apply(self, betas_flat):
        """(D - C A^{-1} B) beta with D = I - S T, all S-preconditioned."""
        betas = betas_flat.reshape(self.M, 2 * self.p + 1)
        locs = self.interaction_locals(betas)
        return (betas - np.einsum("mln,mn->ml", self.S, locs)).ravel()

    def recover_densities(self, betas):
        """One final A-block solve with the full right-hand side b + B beta."""
        if self.M == 0:
            return self.interface.solve()
        upd = self._b_block(betas)
        return self.interface.solve(extra_rhs=upd.rhs(self.contour, self.layers))


def apply_schur(operator, betas):
    """Spec-level entry point: one application of the Schur operator to a
    stacked (M, 2p+1) coefficient array."""
    return operator.apply(np.asarray(betas, dtype=complex).ravel()).reshape(
        operator.M, 2 * operator.p + 1)


@dataclass
class Solution:
    """Converged solve state: spectral densities, multipole coefficients,
    total incoming locals, and the GMRES residual history."""
    densities: object
    betas: np.ndarray          # (M, 2p+1)
    alphas: np.ndarray         # (M, 2p+1) total incoming locals
    history: list
    operator: SchurOperator
    fingerprint: bytes = b""
    boundary: object = None            # prototype BoundaryDiscretization
    mode_densities: object = None      # PrecomputedDensities per mode


def solve_layered_scene(operator, config=None, boundary=None,
                        mode_densities=None, fingerprint=b""):
    """GMRES on the Schur system, then density recovery.

    ``operator`` is a prepared SchurOperator (the scene module builds it
    from a SceneConfig).  Optional prototype boundary data enables interior
    field reconstruction in eval_total_field.
    """
    config = config or GmresConfig()
    M, p = operator.M, operator.p
    if M == 0:
        betas = np.zeros((0, 2 * p + 1), dtype=complex)
        alphas = betas
        history = [0.0]
    else:
        rhs = operator.rhs()
        x, history = gmres(operator.apply, rhs, tol=config.tol,
                           maxiter=config.maxiter, restart=config.restart)
        betas = x.reshape(M, 2 * p + 1)
        alphas = operator.incident_locals() + operator.interaction_locals(betas)
    densities = operator.recover_densities(betas)
    return Solution(densities=densities, betas=betas, alphas=alphas,
                    history=list(history), operator=operator,
                    fingerprint=fingerprint, boundary=boundary,
                    mode_densities=mode_densities)


# ---------------------------------------------------------------------------
# Total-field evaluation
# ---------------------------------------------------------------------------

def _layer_potentials(k, nodes, normals, wts, sigma, mu, targets):
    """Plain trapezoidal single + double layer potential at off-boundary
    targets: S[sigma](x) + D[mu](x)."""
    dx = targets[:, 0][:, None] - nodes[:, 0][None, :]
    dy = targets[:, 1][:, None] - nodes[:, 1][None, :]
    r = np.hypot(dx, dy)
    h0 = hankel1(0, k * r)
    h1 = hankel1(1, k * r)
    single = 0.25j * h0 @ (wts * sigma)
    cosn = (dx * normals[:, 0][None, :] + dy * normals[:, 1][None, :]) / r
    double = (0.25j * k) * (h1 * cosn) @ (wts * mu)
    return single + double


def _trig_upsample(f, m):
    """Trigonometric interpolation of periodic samples onto an m-times
    finer grid (zero-padded FFT)."""
    if m == 1:
        return np.asarray(f, dtype=complex)
    N = f.shape[0]
    F = np.fft.fft(f, axis=0)
    shape = (m * N,) + f.shape[1:]
    G = np.zeros(shape, dtype=complex)
    G[:N // 2] = F[:N // 2]
    G[-(N - N // 2):] = F[-(N - N // 2):]
    return np.fft.ifft(G, axis=0) * m


# refinement of the boundary quadrature for near-boundary field evaluation;
# plain trapezoid then holds ~1e-10 down to distances of about 1e-3
UPSAMPLE = 8


def _instance_boundary(solution, idx, upsample=UPSAMPLE):
    """Rotated, upsampled prototype geometry and per-node densities for one
    instance, from the stored per-mode densities and the solved locals."""
    from .particle import shape_curve

    inst = solution.operator.instances[idx]
    bd = solution.boundary
    if bd is None or solution.mode_densities is None:
        raise ValueError("interior evaluation requires stored boundary "
                         "densities (solve with boundary/mode_densities)")
    p = solution.operator.p
    th = inst.rotation
    ns = np.arange(-p, p + 1)
    # locals in the prototype frame: a'_n = a_n e^{i n theta}
    aprot = solution.alphas[idx] * np.exp(1j * ns * th)
    mu = _trig_upsample(solution.mode_densities.mu @ aprot, upsample)
    sigma = _trig_upsample(solution.mode_densities.sigma @ aprot, upsample)
    N2 = upsample * bd.params.N
    t2 = 2 * np.pi * np.arange(N2) / N2
    pos, _, normal, speed = shape_curve(bd.params, t2)
    c, s = np.cos(th), np.sin(th)
    rot = np.array([[c, -s], [s, c]])
    nodes = pos @ rot.T + np.asarray(inst.center)
    normals = normal @ rot.T
    wts = (2 * np.pi / N2) * speed
    return nodes, normals, wts, sigma, mu


def _locals_field(solution, idx, pts):
    """Incoming local expansion of instance idx evaluated at points."""
    inst = solution.operator.instances[idx]
    exp = ExpansionVector(p=solution.operator.p, coeffs=solution.alphas[idx],
                          kind="J", center=tuple(inst.center),
                          k=solution.operator.layers.k2)
    return eval_expansion(exp, pts)


def eval_total_field(solution, points):
    """Total field at one point or an (n, 2) array, classified by region.

    Points exactly on an interface are evaluated from the layer above;
    points on a particle boundary from the exterior side.  Inside an
    enclosing disk the field combines the incoming local expansion with the
    instance's own boundary-potential representation; inside the inclusion
    itself only the interior representation applies.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    op = solution.operator
    layers = op.layers
    dens = solution.densities
    out = np.empty(pts.shape[0], dtype=complex)

    top = pts[:, 1] >= 0
    bot = pts[:, 1] < -layers.d
    mid = ~(top | bot)
    if np.any(top):
        out[top] = (sommerfeld_point_source(op.contour, layers.k1,
                                            layers.source, pts[top])
                    + eval_sommerfeld_field(dens, op.contour, layers,
                                            pts[top], "u1s"))
    if np.any(bot):
        out[bot] = eval_sommerfeld_field(dens, op.contour, layers,
                                         pts[bot], "u3s")
    if np.any(mid):
        idx_mid = np.flatnonzero(mid)
        owner = np.full(idx_mid.size, -1)
        for j, inst in enumerate(op.instances):
            d = np.hypot(pts[idx_mid, 0] - inst.center[0],
                         pts[idx_mid, 1] - inst.center[1])
            owner[(d < inst.R) & (owner < 0)] = j
        free = idx_mid[owner < 0]
        if free.size:
            u = (eval_sommerfeld_field(dens, op.contour, layers, pts[free], "u2t")
                 + eval_sommerfeld_field(dens, op.contour, layers, pts[free], "u2b"))
            if op.M:
                u = u + eval_multipole_field(solution.betas, op.instances,
                                             layers.k2, pts[free])
            out[free] = u
        for j in np.unique(owner[owner >= 0]):
            sel = idx_mid[owner == j]
            nodes, normals, wts, sigma, mu = _instance_boundary(solution, j)
            params = solution.boundary.params
            # classify against the (rotated) inclusion boundary
            inst = op.instances[j]
            dxl = pts[sel, 0] - inst.center[0]
            dyl = pts[sel, 1] - inst.center[1]
            ang = np.arctan2(dyl, dxl) - inst.rotation
            rho = params.a1 + params.a2 * np.cos(params.a3 * ang)
            inside = np.hypot(dxl, dyl) < rho
            if np.any(~inside):
                ann = sel[~inside]
                out[ann] = (_locals_field(solution, j, pts[ann])
                            + _layer_potentials(layers.k2, nodes, normals,
                                                wts, sigma, mu, pts[ann]))
            if np.any(inside):
                inn = sel[inside]
                out[inn] = _layer_potentials(solution.boundary.params.kp,
                                             nodes, normals, wts, sigma, mu,
                                             pts[inn])
    return out[0] if np.asarray(points).ndim == 1 else out
