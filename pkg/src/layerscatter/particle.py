"""Single-inclusion machinery: boundary parametrization, the Muller
transmission integral equations discretized by a Nystrom method with
high-order corrections for the logarithmic singularity, and scattering
matrices (analytic for disks, numerical for arbitrary smooth shapes).
"""

import hashlib
import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .quadrature import alpert_weights, trig_interp_matrix
from .special import bessel_j, bessel_j_prime, hankel1, hankel1_prime

__all__ = ["ShapeParams", "BoundaryDiscretization", "ScatteringMatrix",
           "PrecomputedDensities", "shape_curve", "discretize_boundary",
           "assemble_muller", "factor_and_solve", "incident_mode_rhs",
           "scattering_matrix_nystrom", "scattering_matrix_disk",
           "scattering_matrix_pec_disk", "rotate_scattering_matrix",
           "shape_fingerprint", "save_scattering_matrix",
           "load_scattering_matrix"]


@dataclass(frozen=True)
class ShapeParams:
    """Star-shaped boundary rho(t) = a1 + a2 cos(a3 t) and its material."""
    a1: float
    a2: float
    a3: int
    kp: complex
    N: int = 300

    def __post_init__(self):
        if not (self.a1 > self.a2 >= 0):
            raise ValueError("need a1 > a2 >= 0 for a simple closed curve")
        if self.a3 != int(self.a3) or self.a3 < 0:
            raise ValueError("a3 must be a nonnegative integer")
        if self.N < 64:
            raise ValueError("need N >= 64 boundary points")


@dataclass
class BoundaryDiscretization:
    """Equispaced-parameter Nystrom grid on a smooth closed curve."""
    params: ShapeParams
    t: np.ndarray          # parameter values, 2 pi i / N
    nodes: np.ndarray      # (N, 2)
    normals: np.ndarray    # (N, 2) unit outward
    speed: np.ndarray      # |dx/dt|
    h: float               # parameter step 2 pi / N


@dataclass
class ScatteringMatrix:
    """Map from incoming J-expansion coefficients to outgoing H-expansion
    coefficients, both ordered n = -p..p."""
    p: int
    entries: np.ndarray    # (2p+1, 2p+1); entries[l, n]: mode n -> mode l
    R: float               # enclosing-disk radius
    k2: complex
    kp: complex
    fingerprint: bytes

    def __post_init__(self):
        m = 2 * self.p + 1
        if self.entries.shape != (m, m):
            raise ValueError("entries must be (2p+1) x (2p+1)")


@dataclass
class PrecomputedDensities:
    """Boundary densities (mu_n, sigma_n) for each incident mode n."""
    p: int
    mu: np.ndarray         # (N, 2p+1)
    sigma: np.ndarray      # (N, 2p+1)


def shape_curve(params, t):
    """Position, unit tangent, unit outward normal and speed at parameter t.

    The curve is x(t) = rho(t) (cos t, sin t) with rho = a1 + a2 cos(a3 t),
    traversed counterclockwise.
    """
    t = np.asarray(t, dtype=float)
    a1, a2, a3 = params.a1, params.a2, params.a3
    rho = a1 + a2 * np.cos(a3 * t)
    drho = -a2 * a3 * np.sin(a3 * t)
    ct, st = np.cos(t), np.sin(t)
    pos = np.stack([rho * ct, rho * st], axis=-1)
    dx = drho * ct - rho * st
    dy = drho * st + rho * ct
    speed = np.hypot(dx, dy)
    if np.any(speed < 1e-12):
        raise ValueError("degenerate parametrization (zero speed)")
    tangent = np.stack([dx, dy], axis=-1) / speed[..., None]
    normal = np.stack([dy, -dx], axis=-1) / speed[..., None]
    return pos, tangent, normal, speed


def discretize_boundary(params):
    """Equispaced-in-parameter boundary grid with analytic geometry."""
    t = 2.0 * np.pi * np.arange(params.N) / params.N
    pos, _, normal, speed = shape_curve(params, t)
    return BoundaryDiscretization(params=params, t=t, nodes=pos,
                                  normals=normal, speed=speed,
                                  h=2.0 * np.pi / params.N)


def _difference_kernels(xt, nt, ys, ns, k2, kp, active=None):
    """The four Muller difference kernels S/D/N/T (background minus
    inclusion wavenumber) for target points xt (with normals nt) against
    source points ys (with normals ns); shapes broadcast.

    ``active`` masks out entries that the quadrature rule will not use
    (e.g. the coincident diagonal), avoiding Hankel evaluation at r = 0.
    """
    d = xt - ys
    r = np.hypot(d[..., 0], d[..., 1])
    if active is None:
        active = np.ones(r.shape, dtype=bool)
    rs = np.where(active, r, 1.0)
    if np.any(rs <= 0):
        raise ValueError("coincident target/source point in active kernel set")
    h0a, h1a = hankel1(0, k2 * rs), hankel1(1, k2 * rs)
    h0b, h1b = hankel1(0, kp * rs), hankel1(1, kp * rs)
    dh1 = k2 * h1a - kp * h1b               # difference of k H1(k r)
    dh0w = k2 ** 2 * h0a - kp ** 2 * h0b    # difference of k^2 H0(k r)
    dnx = (d * nt).sum(-1)
    dny = (d * ns).sum(-1)
    nn = (nt * ns).sum(-1)
    kS = 0.25j * (h0a - h0b)
    kD = 0.25j * dh1 * dny / rs
    kN = -0.25j * dh1 * dnx / rs
    kT = (0.25j * (dh0w / rs - 2.0 * dh1 / rs ** 2) * dnx * dny / rs
          + 0.25j * dh1 / rs * nn)
    z = active.astype(float)
    return kS * z, kD * z, kN * z, kT * z


def assemble_muller(boundary, k2, kp):
    """Dense 2N x 2N Nystrom matrix for the Muller transmission system.

    Unknown ordering (mu, sigma); block rows are the value-continuity
    equation  mu + [S - S] sigma + [D - D] mu  and the derivative-continuity
    equation  -sigma + [N - N] sigma + [T - T] mu.  The difference kernels
    are only logarithmically singular, handled by the hybrid trapezoidal
    rule with order-16 endpoint corrections; density values at the off-grid
    correction nodes come from trigonometric interpolation.
    """
    N = boundary.params.N
    h = boundary.h
    rule = alpert_weights(N)
    x, nx, sp, t = boundary.nodes, boundary.normals, boundary.speed, boundary.t

    # --- regular trapezoidal part: all grid pairs outside the exclusion band
    diff_idx = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
    active = (diff_idx >= rule.offset) & (diff_idx <= N - rule.offset)
    kS, kD, kN, kT = _difference_kernels(
        x[:, None, :], nx[:, None, :], x[None, :, :], nx[None, :, :],
        k2, kp, active)
    wreg = h * sp[None, :] * active
    A11 = kD * wreg
    A12 = kS * wreg
    A21 = kT * wreg
    A22 = kN * wreg

    # --- correction part: off-grid nodes at t_i +- chi_m h
    chi = rule.correction_nodes
    delta = np.concatenate([chi, -chi]) * h              # (2m,)
    wcor = np.tile(rule.correction_weights, 2) * h       # (2m,)
    tc = t[:, None] + delta[None, :]                     # (N, 2m)
    yc, _, nc, spc = shape_curve(boundary.params, tc)
    cS, cD, cN, cT = _difference_kernels(
        x[:, None, :], nx[:, None, :], yc, nc, k2, kp)
    P = trig_interp_matrix(N, np.remainder(delta, 2 * np.pi))   # (2m, N)
    roll = (np.arange(N)[None, :] + np.arange(N)[:, None]) % N  # [i, q] = q+i
    rows = np.arange(N)[:, None]
    for blk, ker in ((A11, cD), (A12, cS), (A21, cT), (A22, cN)):
        base = (ker * (wcor[None, :] * spc)) @ P         # (N, N), columns rel. to i
        blk[rows, roll] += base

    A = np.empty((2 * N, 2 * N), dtype=complex)
    A[:N, :N] = A11 + np.eye(N)
    A[:N, N:] = A12
    A[N:, :N] = A21
    A[N:, N:] = A22 - np.eye(N)
    return A


def incident_mode_rhs(boundary, k2, p):
    """Right-hand sides (-u_inc, -du_inc/dn) for the cylindrical incident
    modes u_inc = J_n(k2 r) e^{i n theta}, n = -p..p, about the origin."""
    x = boundary.nodes
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0])
    ns = np.arange(-p, p + 1)
    jn = bessel_j(ns[None, :], (k2 * r)[:, None])
    jnp = bessel_j_prime(ns[None, :], (k2 * r)[:, None])
    phase = np.exp(1j * np.outer(th, ns))
    u = jn * phase
    rhat = np.stack([np.cos(th), np.sin(th)], axis=-1)
    that = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    nr = (boundary.normals * rhat).sum(-1)
    nt = (boundary.normals * that).sum(-1)
    dudn = (k2 * jnp * nr[:, None]
            + (1j * ns[None, :] / r[:, None]) * jn * nt[:, None]) * phase
    return np.concatenate([-u, -dudn], axis=0)


def factor_and_solve(system, rhs_set):
    """LU-factor the Nystrom system once and solve all incident modes."""
    n2 = system.shape[0]
    if system.shape != (n2, n2) or rhs_set.shape[0] != n2:
        raise ValueError("shape mismatch between system and right-hand sides")
    try:
        lu, piv = scipy.linalg.lu_factor(system)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise RuntimeError(f"Nystrom factorization failed: {exc}") from exc
    if np.min(np.abs(np.diag(lu))) < 1e-13 * np.max(np.abs(np.diag(lu))):
        raise RuntimeError("numerically singular Nystrom system")
    sol = scipy.linalg.lu_solve((lu, piv), rhs_set)
    N = n2 // 2
    p = (rhs_set.shape[1] - 1) // 2
    return PrecomputedDensities(p=p, mu=sol[:N], sigma=sol[N:])


def _multipole_projection(boundary, k2, p):
    """Weights turning boundary densities into outgoing H-expansion
    coefficients: beta_l = (i/4) integral [ J_l(k2 r) e^{-i l th} sigma
    + n . grad(J_l(k2 r) e^{-i l th}) mu ] ds (Graf addition theorem)."""
    x, nrm = boundary.nodes, boundary.normals
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0])
    ls = np.arange(-p, p + 1)
    jl = bessel_j(ls[None, :], (k2 * r)[:, None])
    jlp = bessel_j_prime(ls[None, :], (k2 * r)[:, None])
    phase = np.exp(-1j * np.outer(th, ls))
    rhat = np.stack([np.cos(th), np.sin(th)], axis=-1)
    that = np.stack([-np.sin(th), np.cos(th)], axis=-1)
    nr = (nrm * rhat).sum(-1)[:, None]
    nt = (nrm * that).sum(-1)[:, None]
    w = (boundary.h * boundary.speed)[:, None]
    w_sigma = 0.25j * w * jl * phase
    w_mu = 0.25j * w * (k2 * jlp * nr
                        - (1j * ls[None, :] / r[:, None]) * jl * nt) * phase
    return w_sigma, w_mu    # each (N, 2p+1); beta_l = sum_j over column l


def shape_fingerprint(params):
    """Stable identifier of the discretized geometry (not the material)."""
    blob = repr((float(params.a1), float(params.a2), int(params.a3),
                 int(params.N))).encode()
    return hashlib.sha256(blob).digest()


def scattering_matrix_nystrom(boundary, k2, kp, p, R=None,
                              return_densities=False):
    """Scattering matrix of a smooth inclusion by solving the Muller system
    for each incident cylindrical mode and projecting onto the outgoing
    multipole basis."""
    rmax = np.hypot(boundary.nodes[:, 0], boundary.nodes[:, 1]).max()
    if R is None:
        R = 1.1 * rmax
    if R < rmax:
        raise ValueError(f"enclosing radius {R} smaller than the shape ({rmax:.4g})")
    A = assemble_muller(boundary, k2, kp)
    rhs = incident_mode_rhs(boundary, k2, p)
    dens = factor_and_solve(A, rhs)
    w_sigma, w_mu = _multipole_projection(boundary, k2, p)
    entries = w_sigma.T @ dens.sigma + w_mu.T @ dens.mu
    S = ScatteringMatrix(p=p, entries=entries, R=float(R), k2=k2, kp=kp,
                         fingerprint=shape_fingerprint(boundary.params))
    return (S, dens) if return_densities else S


def _disk_fingerprint(Rdisk):
    return hashlib.sha256(repr(("disk", float(Rdisk))).encode()).digest()


def scattering_matrix_disk(Rdisk, k2, kp, p):
    """Analytic (diagonal) scattering matrix of a dielectric disk, from the
    per-mode 2x2 continuity system solved directly."""
    if not (np.real(k2) > 0 and np.real(kp) > 0):
        raise ValueError("need Re k2 > 0 and Re kp > 0")
    ns = np.arange(-p, p + 1)
    s = np.empty(ns.size, dtype=complex)
    for i, n in enumerate(ns):
        A = np.array([[-hankel1(n, k2 * Rdisk), bessel_j(n, kp * Rdisk)],
                      [-k2 * hankel1_prime(n, k2 * Rdisk),
                       kp * bessel_j_prime(n, kp * Rdisk)]])
        b = np.array([bessel_j(n, k2 * Rdisk),
                      k2 * bessel_j_prime(n, k2 * Rdisk)])
        s[i] = np.linalg.solve(A, b)[0]
    return ScatteringMatrix(p=p, entries=np.diag(s), R=float(Rdisk), k2=k2,
                            kp=kp, fingerprint=_disk_fingerprint(Rdisk))


def scattering_matrix_pec_disk(Rdisk, k2, p):
    """Sound-soft (perfectly conducting) disk: s_n = -J_n / H_n."""
    ns = np.arange(-p, p + 1)
    s = -bessel_j(ns, k2 * Rdisk + 0j) / hankel1(ns, k2 * Rdisk)
    return ScatteringMatrix(p=p, entries=np.diag(s), R=float(Rdisk), k2=k2,
                            kp=np.inf, fingerprint=_disk_fingerprint(Rdisk))


def rotate_scattering_matrix(S, theta):
    """Scattering matrix of the same shape rotated by theta: conjugation by
    the diagonal phases that rotate cylindrical harmonics."""
    ns = np.arange(-S.p, S.p + 1)
    phase = np.exp(1j * np.subtract.outer(-ns, -ns) * theta)  # e^{i(n-l)theta}
    return ScatteringMatrix(p=S.p, entries=S.entries * phase, R=S.R, k2=S.k2,
                            kp=S.kp, fingerprint=S.fingerprint)


_CACHE_MAGIC = b"LSSM"
_CACHE_VERSION = 1


def save_scattering_matrix(path, S):
    """Write the versioned little-endian binary cache format."""
    m = 2 * S.p + 1
    kp = S.kp if np.isfinite(S.kp) else complex(np.inf, 0.0)
    header = struct.pack("<4sIi d dd dd 32s", _CACHE_MAGIC, _CACHE_VERSION,
                         S.p, S.R, np.real(S.k2), np.imag(S.k2),
                         np.real(kp), np.imag(kp), S.fingerprint)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(S.entries,
                                      dtype="<c16").tobytes())
    assert len(S.fingerprint) == 32 and S.entries.shape == (m, m)


def load_scattering_matrix(path):
    with open(path, "rb") as fh:
        head = fh.read(struct.calcsize("<4sIi d dd dd 32s"))
        magic, version, p, R, k2r, k2i, kpr, kpi, fp = struct.unpack(
            "<4sIi d dd dd 32s", head)
        if magic != _CACHE_MAGIC or version != _CACHE_VERSION:
            raise ValueError(f"not a scattering-matrix cache: {path}")
        m = 2 * p + 1
        entries = np.frombuffer(fh.read(m * m * 16), dtype="<c16")
    return ScatteringMatrix(p=p, entries=entries.reshape(m, m).copy(), R=R,
                            k2=complex(k2r, k2i), kp=complex(kpr, kpi),
                            fingerprint=fp)
