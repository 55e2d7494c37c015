"""Free-space multiple-scattering algebra: multipole (H) and local (J)
expansions, Graf-theorem translation operators, the block-preconditioned
operator I - S T, and a standalone homogeneous-background solver.
"""

from dataclasses import dataclass

import numpy as np

from .special import bessel_j, hankel1

__all__ = ["ExpansionVector", "ParticleInstance", "m2l", "m2m",
           "point_source_local", "plane_wave_local", "eval_expansion",
           "PairCoupling", "apply_preconditioned_operator",
           "solve_free_space", "eval_multipole_field", "hankel_orders"]


@dataclass
class ExpansionVector:
    """Truncated cylindrical-harmonic expansion about a center.

    kind "H": outgoing multipole series sum_n c_n H_n(k r) e^{i n theta};
    kind "J": incoming local series    sum_n c_n J_n(k r) e^{i n theta}.
    """
    p: int
    coeffs: np.ndarray
    kind: str
    center: tuple
    k: complex

    def __post_init__(self):
        if self.kind not in ("H", "J"):
            raise ValueError("kind must be 'H' or 'J'")
        if self.coeffs.shape != (2 * self.p + 1,):
            raise ValueError("coefficient vector must have length 2p+1")


@dataclass
class ParticleInstance:
    """One placed copy of the prototype inclusion."""
    center: tuple
    rotation: float
    R: float
    fingerprint: bytes


def hankel_orders(z, p):
    """H_n(z) for n = 0..p stacked along a new leading axis, by upward
    recurrence from the n = 0, 1 values (stable for the dominant H)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((p + 1,) + z.shape, dtype=complex)
    out[0] = hankel1(0, z)
    if p >= 1:
        out[1] = hankel1(1, z)
    for n in range(1, p):
        out[n + 1] = (2.0 * n / z) * out[n] - out[n - 1]
    return out


def _translation_row(k, D, orders, kind):
    """C_q(k |D|) e^{i q theta_D} for the listed integer orders q, with C the
    Hankel (kind 'H') or Bessel (kind 'J') function."""
    dist = np.hypot(D[0], D[1])
    if dist <= 0:
        raise ValueError("zero translation distance")
    theta = np.arctan2(D[1], D[0])
    fn = hankel1 if kind == "H" else bessel_j
    return fn(orders, k * dist + 0j) * np.exp(1j * orders * theta)


def m2l(source, target_center, p, source_R=0.0, target_R=0.0):
    """Local (J) expansion about target_center reproducing the multipole
    source field on the target disk (Graf's addition theorem):
    alpha_n = sum_nu beta_nu H_{nu-n}(k |D|) e^{i (nu-n) theta_D},
    with D = target_center - source.center.
    """
    if source.kind != "H":
        raise ValueError("m2l expects a multipole (H) source")
    D = (target_center[0] - source.center[0],
         target_center[1] - source.center[1])
    if np.hypot(*D) <= source_R + target_R:
        raise ValueError("enclosing disks overlap: m2l diverges")
    nu = np.arange(-source.p, source.p + 1)
    n = np.arange(-p, p + 1)
    q = np.subtract.outer(-n, -nu)        # q[i, j] = nu_j - n_i
    mat = _translation_row(source.k, D, q, "H")
    return ExpansionVector(p=p, coeffs=mat @ source.coeffs, kind="J",
                           center=tuple(target_center), k=source.k)


def m2m(source, new_center):
    """Re-center a multipole expansion:
    beta'_n = sum_nu beta_nu J_{nu-n}(k |s|) e^{i (nu-n) theta_s},
    with s = new_center - source.center (valid outside the shifted disk).
    """
    if source.kind != "H":
        raise ValueError("m2m expects a multipole (H) source")
    s = (new_center[0] - source.center[0], new_center[1] - source.center[1])
    if np.hypot(*s) == 0:
        return ExpansionVector(p=source.p, coeffs=source.coeffs.copy(),
                               kind="H", center=tuple(new_center), k=source.k)
    nu = np.arange(-source.p, source.p + 1)
    n = nu
    q = np.subtract.outer(-n, -nu)
    mat = _translation_row(source.k, s, q, "J")
    return ExpansionVector(p=source.p, coeffs=mat @ source.coeffs, kind="H",
                           center=tuple(new_center), k=source.k)


def point_source_local(k, source_point, center, p):
    """Local expansion of the free-space Green's function (i/4) H_0(k |x -
    x0|) about ``center``: a_n = (i/4) H_n(k rho) e^{-i n theta0} with
    (rho, theta0) the polar coordinates of x0 about the center."""
    dx = source_point[0] - center[0]
    dy = source_point[1] - center[1]
    rho = np.hypot(dx, dy)
    th0 = np.arctan2(dy, dx)
    n = np.arange(-p, p + 1)
    coeffs = 0.25j * hankel1(n, k * rho + 0j) * np.exp(-1j * n * th0)
    return ExpansionVector(p=p, coeffs=coeffs, kind="J",
                           center=tuple(center), k=k)


def plane_wave_local(k, direction, center, p):
    """Local expansion of e^{i k x . d} about ``center`` (Jacobi-Anger):
    a_n = e^{i k c . d} i^n e^{-i n phi_d}."""
    phi = np.arctan2(direction[1], direction[0])
    n = np.arange(-p, p + 1)
    amp = np.exp(1j * k * (center[0] * direction[0] + center[1] * direction[1]))
    coeffs = amp * (1j) ** n * np.exp(-1j * n * phi)
    return ExpansionVector(p=p, coeffs=coeffs, kind="J",
                           center=tuple(center), k=k)


def eval_expansion(exp, points):
    """Evaluate an H- or J-expansion at one point or an (n, 2) array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dx = pts[:, 0] - exp.center[0]
    dy = pts[:, 1] - exp.center[1]
    r = np.hypot(dx, dy)
    th = np.arctan2(dy, dx)
    n = np.arange(-exp.p, exp.p + 1)
    fn = hankel1 if exp.kind == "H" else bessel_j
    vals = fn(n[None, :], (exp.k * r + 0j)[:, None]) * np.exp(1j * np.outer(th, n))
    out = vals @ exp.coeffs
    return out[0] if np.asarray(points).ndim == 1 else out


class PairCoupling:
    """All-pairs M2L application for a fixed set of instance centers.

    Stores only O(M^2) geometry; the order-q translation kernels
    W_q = H_q(k |D|) e^{i q theta_D} are regenerated on each apply by the
    three-term Hankel recurrence, fused with the per-order matmuls, so the
    working set stays at a few M x M arrays for any p.
    """

    def __init__(self, centers, k, p):
        centers = np.asarray(centers, dtype=float)
        self.M = centers.shape[0]
        self.p = p
        self.k = k
        dx = centers[:, 0][:, None] - centers[:, 0][None, :]
        dy = centers[:, 1][:, None] - centers[:, 1][None, :]
        dist = np.hypot(dx, dy)
        np.fill_diagonal(dist, 1.0)
        self._offdiag = ~np.eye(self.M, dtype=bool)
        self.z = k * dist                       # kernel argument (diag dummy)
        # theta of D = target - source; row = target, column = source
        self.phase = np.exp(1j * np.arctan2(dy, dx))
        self._h0 = hankel1(0, self.z) * self._offdiag
        self._h1 = hankel1(1, self.z) * self._offdiag

    def apply_m2l(self, betas):
        """Incoming locals alpha[m, n] = sum_{j != m} sum_nu
        W_{nu-n}(m, j) betas[j, nu]; betas shaped (M, 2p+1)."""
        p = self.p
        width = 2 * p + 1
        alphas = np.zeros((self.M, width), dtype=complex)
        hq_prev, hq = self._h0, self._h1
        pq = np.ones_like(self.phase)           # phase^q, q starting at 0
        for q in range(0, 2 * p + 1):
            if q == 0:
                contrib = self._h0 @ betas
                alphas += contrib
            else:
                wplus = hq * pq                 # W_{+q}
                wminus = (-1) ** q * hq * np.conj(pq)
                up = wplus @ betas              # indexed by nu = n + q
                dn = wminus @ betas             # indexed by nu = n - q
                alphas[:, :width - q] += up[:, q:]
                alphas[:, q:] += dn[:, :width - q]
            if q < 2 * p:
                pq = pq * self.phase
                if q >= 1:
                    hq_prev, hq = hq, (2.0 * q / self.z) * hq * self._offdiag - hq_prev
        return alphas


def _stack_smatrices(smats, M):
    """Accept one shared ScatteringMatrix, a list of them, or a raw (M,
    2p+1, 2p+1) array; return the stacked entries array."""
    if hasattr(smats, "entries"):
        return np.broadcast_to(smats.entries, (M,) + smats.entries.shape)
    if isinstance(smats, np.ndarray) and smats.ndim == 3:
        return smats
    return np.stack([s.entries for s in smats])


def apply_preconditioned_operator(betas, coupling, smats):
    """(I - S T) betas for stacked outgoing coefficients (M, 2p+1)."""
    M = betas.shape[0]
    if M == 1:
        return betas.copy()
    alphas = coupling.apply_m2l(betas)
    S = _stack_smatrices(smats, M)
    return betas - np.einsum("mln,mn->ml", S, alphas)


def solve_free_space(instances, smats, k2, incident_locals, p, tol=1e-6,
                     maxiter=1000, restart=100):
    """GMRES solve of (I - S T) beta = S a for a homogeneous background.

    ``incident_locals`` is the stacked (M, 2p+1) array of incoming local
    coefficients of the incident field about each instance center.
    Returns (betas, residual_history).
    """
    from .solver import gmres

    centers = [inst.center for inst in instances]
    M = len(centers)
    S = _stack_smatrices(smats, M)
    rhs = np.einsum("mln,mn->ml", S, incident_locals).ravel()
    if not np.any(rhs):
        return np.zeros((M, 2 * p + 1), dtype=complex), [0.0]
    coupling = PairCoupling(centers, k2, p)

    def op(v):
        return apply_preconditioned_operator(
            v.reshape(M, 2 * p + 1), coupling, S).ravel()

    x, hist = gmres(op, rhs, tol=tol, maxiter=maxiter, restart=restart)
    return x.reshape(M, 2 * p + 1), hist


def eval_multipole_field(betas, instances, k2, points):
    """Sum of all outgoing multipole fields at exterior points.

    betas: (M, 2p+1); points: one point or (n, 2).  Points inside any
    enclosing disk are rejected (interior reconstruction lives in the
    solver module).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    betas = np.asarray(betas)
    p = (betas.shape[1] - 1) // 2
    out = np.zeros(pts.shape[0], dtype=complex)
    for inst, b in zip(instances, betas):
        dx = pts[:, 0] - inst.center[0]
        dy = pts[:, 1] - inst.center[1]
        r = np.hypot(dx, dy)
        if np.any(r < inst.R):
            raise ValueError("point inside an enclosing disk; use the "
                             "solver's interior reconstruction")
        th = np.arctan2(dy, dx)
        hs = hankel_orders(k2 * r, p)           # (p+1, npts)
        ns = np.arange(-p, p + 1)
        hfull = hs[np.abs(ns)] * np.where(ns[:, None] < 0,
                                          (-1.0) ** np.abs(ns)[:, None], 1.0)
        out += (b[:, None] * hfull * np.exp(1j * np.outer(ns, th))).sum(0)
    return out[0] if np.asarray(points).ndim == 1 else out
