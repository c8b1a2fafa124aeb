"""Low-lying eigenpairs of grid operators, gaps, thresholds, localization.

The workhorse is a block Lanczos iteration with full reorthogonalization,
thick restarts, and optional projector deflation (every block is pushed
back into the requested statistics subspace).  A dense LAPACK path serves
as the oracle for small dimensions.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from bogap.model import ExperimentConfig, NuclearConfiguration
from bogap.operators import DENSE_LIMIT, ManyBodyOperator, assemble_full
from bogap.symmetry import (
    StatisticsProjector,
    bosonic_projector,
    fermionic_projector,
    fix_sign,
)

__all__ = [
    "SpectralReport",
    "GapResult",
    "LocalizationFit",
    "SolverError",
    "lowest_eigenpairs",
    "gap",
    "ionization_threshold",
    "localization_rate",
    "save_vectors",
    "load_vectors",
    "projector_for",
]

DEFAULT_EIGEN_COUNT = 4


class SolverError(RuntimeError):
    pass


@dataclass
class SpectralReport:
    """Converged eigenpairs in ascending order plus solve provenance."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray          # (dim, k), unit columns, sign-fixed
    residuals: np.ndarray
    converged: list[bool]
    degeneracy_groups: list[list[int]]
    subspace: str
    h: float
    stencil_order: int
    iterations: int
    notes: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "converged": list(self.converged),
            "degeneracy_groups": self.degeneracy_groups,
            "subspace": self.subspace,
            "h": self.h,
            "stencil_order": self.stencil_order,
            "iterations": self.iterations,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass(frozen=True)
class GapResult:
    gap: float
    ground_degenerate: bool
    degeneracy_tolerance: float
    e0: float
    e1: float


@dataclass
class LocalizationFit:
    alpha: float
    r2: float
    intercept: float
    shell_distances: list[float]
    shell_log_norms: list[float]
    ct_alpha_bound: float | None = None  # sqrt(threshold - E); reported, not asserted


def projector_for(statistics: str, n_particles: int) -> StatisticsProjector | None:
    if statistics == "bosonic":
        return bosonic_projector(n_particles)
    if statistics == "fermionic":
        return fermionic_projector(n_particles)
    if statistics == "distinguishable":
        return None
    raise ValueError(f"unknown statistics '{statistics}'")


def _orthonormalize_rows(
    W: np.ndarray,
    Q: np.ndarray,
    m: int,
    project,
    rng: np.random.Generator,
    drop_tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormalize rows of W against Q[:m] and internally.

    Returns (rows, R) with rows @ rows.T = I and W ~ rows.T @ R up to the
    dropped part.  Rank-deficient directions are refilled with random
    vectors inside the deflation subspace (their R rows are zeroed so they
    never contribute to residual estimates); directions that cannot be
    refilled (subspace exhausted) are dropped, so fewer rows may return.
    """
    W = W.copy()
    for _ in range(2):
        if m > 0:
            W -= (Q[:m] @ W.T).T @ Q[:m]
    qt, r = np.linalg.qr(W.T)
    rows = np.ascontiguousarray(qt.T)
    scale = max(float(np.max(np.abs(np.diag(r)))), 1.0)
    deficient = np.abs(np.diag(r)) < drop_tol * scale
    keep = np.ones(rows.shape[0], dtype=bool)
    if np.any(deficient):
        r[deficient, :] = 0.0
        for i in np.where(deficient)[0]:
            keep[i] = False
            for _ in range(5):
                v = rng.standard_normal(W.shape[1])
                if project is not None:
                    v = project(v)
                if m > 0:
                    v -= (Q[:m] @ v) @ Q[:m]
                v -= (rows[keep] @ v) @ rows[keep]
                nv = float(np.linalg.norm(v))
                if nv > 1e-6:
                    rows[i] = v / nv
                    keep[i] = True
                    break
    return rows[keep], r[keep]


def _lanczos(
    op,
    k: int,
    tol: float,
    seed: int,
    v0: np.ndarray | None,
    projector: StatisticsProjector | None,
    block: int | None,
    max_basis: int | None,
    maxiter: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, bool]:
    """Thick-restart block Lanczos with full reorthogonalization.

    Returns (theta, X, residuals, iterations, converged_all).
    Deterministic for a fixed seed and start block.
    """
    dim = op.dim
    rng = np.random.default_rng(seed)
    proj = (lambda v: projector.apply(v)) if projector is not None else None
    b = block if block is not None else min(max(k + 2, 4), max(dim // 2, 1))
    b = max(1, min(b, dim))
    m_max = max_basis if max_basis is not None else min(dim, max(128, 4 * (k + b)))
    m_max = max(m_max, 2 * b + k)
    m_max = min(m_max, dim)
    nkeep_target = min(max(2 * k + b, 3 * k), m_max - b)

    Q = np.zeros((m_max, dim))
    T = np.zeros((m_max, m_max))

    W = np.zeros((b, dim))
    rows_filled = 0
    if v0 is not None:
        v0 = np.atleast_2d(np.asarray(v0, dtype=float))
        take = min(v0.shape[0], b)
        W[:take] = v0[:take]
        rows_filled = take
    if rows_filled < b:
        W[rows_filled:] = rng.standard_normal((b - rows_filled, dim))
    if proj is not None:
        W = proj(W)
    rows, _ = _orthonormalize_rows(W, Q, 0, proj, rng)
    cur = rows.shape[0]
    Q[:cur] = rows
    m = cur
    lo, hi = 0, cur

    theta = np.zeros(0)
    U = np.zeros((0, 0))
    iterations = 0

    # Exits happen only right after the Rayleigh-Ritz step, so (theta, U)
    # always matches Q[:m]; block placement precedes the next application.
    while True:
        iterations += 1
        AW = op.apply(Q[lo:hi])
        if proj is not None:
            AW = proj(AW)
        H1 = Q[:m] @ AW.T
        AW -= H1.T @ Q[:m]
        H2 = Q[:m] @ AW.T
        AW -= H2.T @ Q[:m]
        Hc = H1 + H2
        T[:m, lo:hi] = Hc
        T[lo:hi, :m] = Hc.T
        T[lo:hi, lo:hi] = 0.5 * (T[lo:hi, lo:hi] + T[lo:hi, lo:hi].T)

        rows, R = _orthonormalize_rows(AW, Q, m, proj, rng)

        theta, U = np.linalg.eigh(T[:m, :m])
        nwant = min(k, m)
        res_est = np.linalg.norm(R @ U[lo:hi, :nwant], axis=0)
        scale = np.maximum(1.0, np.abs(theta[:nwant]))
        if m >= k and np.all(res_est <= 0.5 * tol * scale):
            break
        if m >= dim or rows.shape[0] == 0 or iterations >= maxiter:
            break

        bnew = rows.shape[0]
        if m + bnew > m_max:
            nkeep = min(nkeep_target, m - 1)
            Y = U[:, :nkeep].T @ Q[:m]
            C = R @ U[lo:hi, :nkeep]
            Q[:nkeep] = Y
            T[:, :] = 0.0
            T[:nkeep, :nkeep] = np.diag(theta[:nkeep])
            T[:nkeep, nkeep : nkeep + bnew] = C.T
            T[nkeep : nkeep + bnew, :nkeep] = C
            Q[nkeep : nkeep + bnew] = rows
            lo, hi = nkeep, nkeep + bnew
            m = nkeep + bnew
        else:
            Q[m : m + bnew] = rows
            lo, hi = m, m + bnew
            m += bnew

    nwant = min(k, m)
    X = U[:, :nwant].T @ Q[:m]  # (k, dim) rows
    # exact residuals on the returned pairs
    AX = op.apply(X)
    res = np.linalg.norm(AX - theta[:nwant, None] * X, axis=1)
    converged_all = bool(np.all(res <= tol * np.maximum(1.0, np.abs(theta[:nwant]))))
    return theta[:nwant], X, res, iterations, converged_all


def _dense_solve(
    op, k: int, projector: StatisticsProjector | None
) -> tuple[np.ndarray, np.ndarray]:
    """LAPACK oracle: exact eigenpairs, optionally restricted to a subspace."""
    H = op.dense(DENSE_LIMIT)
    if projector is None:
        w, v = sla.eigh(H)
        return w[:k], v[:, :k].T
    P = projector.apply(np.eye(op.dim))
    pw, pv = sla.eigh(P)
    basis = pv[:, pw > 0.5]
    Hs = basis.T @ H @ basis
    w, v = sla.eigh(Hs)
    kk = min(k, Hs.shape[0])
    return w[:kk], (basis @ v[:, :kk]).T


def _group_degenerate(eigs: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, e in enumerate(eigs):
        if groups and abs(e - eigs[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def lowest_eigenpairs(
    op: ManyBodyOperator,
    k: int = DEFAULT_EIGEN_COUNT,
    subspace: StatisticsProjector | None = None,
    tol: float = 1e-8,
    *,
    seed: int = 0,
    v0: np.ndarray | None = None,
    dense_oracle: bool = False,
    block: int | None = None,
    max_basis: int | None = None,
    maxiter: int = 600,
    degeneracy_tol: float | None = None,
) -> SpectralReport:
    """Compute the k lowest eigenpairs of op within a statistics subspace.

    Deterministic given the seed (and optional start block v0).  With
    dense_oracle=True the operator is materialized and solved by LAPACK,
    which is only permitted up to the dense dimension limit.  Non-converged
    pairs are returned flagged rather than raised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if op.n_particles == 0:
        vec = np.ones((1, 1))
        return SpectralReport(
            eigenvalues=np.array([op.scalar]),
            eigenvectors=vec,
            residuals=np.zeros(1),
            converged=[True],
            degeneracy_groups=[[0]],
            subspace="trivial",
            h=op.grid.spacing,
            stencil_order=op.stencil_order,
            iterations=0,
        )
    notes: list[str] = []
    if dense_oracle:
        theta, X = _dense_solve(op, k, subspace)
        res = np.linalg.norm(op.apply(X) - theta[:, None] * X, axis=1)
        iterations = 0
        converged = [True] * len(theta)
    else:
        theta, X, res, iterations, ok = _lanczos(
            op, k, tol, seed, v0, subspace, block, max_basis, maxiter
        )
        converged = [
            bool(r <= tol * max(1.0, abs(t))) for r, t in zip(res, theta)
        ]
        if not ok:
            notes.append(
                f"non-convergence within iteration budget ({maxiter}); "
                "partial results flagged"
            )
    order = np.argsort(theta)
    theta = theta[order]
    X = X[order]
    res = res[order]
    converged = [converged[i] for i in order]
    X = np.stack([fix_sign(x) for x in X], axis=0)
    dtol = degeneracy_tol if degeneracy_tol is not None else 1e-8 * max(1.0, abs(theta[0]))
    return SpectralReport(
        eigenvalues=theta,
        eigenvectors=X.T.copy(),
        residuals=res,
        converged=converged,
        degeneracy_groups=_group_degenerate(theta, dtol),
        subspace=getattr(subspace, "kind", "full") if subspace else "full",
        h=op.grid.spacing,
        stencil_order=op.stencil_order,
        iterations=iterations,
        notes=notes,
    )


def gap(report: SpectralReport, degeneracy_tol: float) -> GapResult:
    """E1 - E0 where E1 is the lowest level strictly above E0 + tolerance."""
    if report.k < 2:
        raise SolverError("need at least 2 converged eigenvalues for a gap")
    eigs = report.eigenvalues
    e0 = float(eigs[0])
    ground_degenerate = bool(abs(eigs[1] - e0) <= degeneracy_tol)
    above = eigs[eigs > e0 + degeneracy_tol]
    if above.size == 0:
        raise SolverError(
            "no eigenvalue above the ground level within the computed window"
        )
    e1 = float(above[0])
    return GapResult(
        gap=e1 - e0,
        ground_degenerate=ground_degenerate,
        degeneracy_tolerance=degeneracy_tol,
        e0=e0,
        e1=e1,
    )


def ionization_threshold(
    cfg: ExperimentConfig,
    y: NuclearConfiguration | None = None,
    *,
    tol: float | None = None,
    seed: int = 0,
    dense_oracle: bool = False,
) -> float:
    """Ground energy of the same geometry with one electron removed.

    For N = 1 the zero-electron system carries only the nuclear scalar
    (zero when nuclear repulsion is off or there is a single nucleus).
    """
    y = y if y is not None else cfg.nuclei
    n_rest = cfg.particles.electron_count - 1
    if n_rest == 0:
        op0 = assemble_full(cfg, y, n_electrons=1)
        return float(op0.scalar)
    op = assemble_full(cfg, y, n_electrons=n_rest)
    proj = projector_for(cfg.particles.statistics, n_rest) if n_rest > 1 else None
    rep = lowest_eigenpairs(
        op,
        k=1,
        subspace=proj,
        tol=tol if tol is not None else cfg.tolerances.solver,
        seed=seed,
        dense_oracle=dense_oracle,
    )
    return float(rep.eigenvalues[0])


def localization_rate(
    psi: np.ndarray,
    centers,
    grid,
    n_particles: int,
    *,
    interior_fraction: float = 0.8,
    shell_width: float | None = None,
    floor: float = 1e-13,
    min_shells: int = 5,
    ct_alpha_bound: float | None = None,
) -> LocalizationFit:
    """Least-squares exponential decay rate of an eigenvector.

    Configurations are binned by their distance to the cluster centers
    (root-sum-square over electrons of the per-electron distance to the
    nearest center) and -log of the shell norms is fitted linearly over the
    interior region, excluding the outer portion of the box.  Raises
    SolverError when the amplitude hits the floating-point floor too fast.
    """
    centers = np.asarray(list(centers), dtype=float)
    if centers.size == 0:
        raise ValueError("at least one center required")
    x = grid.points
    n = grid.n
    per_axis = np.min(np.abs(x[:, None] - centers[None, :]), axis=1)
    d2 = np.zeros((n,) * n_particles)
    for ax in range(n_particles):
        d2 = d2 + (per_axis**2).reshape(
            (1,) * ax + (n,) + (1,) * (n_particles - ax - 1)
        )
    d = np.sqrt(d2).ravel()
    interior = np.ones(n, dtype=bool)
    interior &= np.abs(x) <= interior_fraction * grid.extent
    mask = np.ones((n,) * n_particles, dtype=bool)
    for ax in range(n_particles):
        mask &= interior.reshape((1,) * ax + (n,) + (1,) * (n_particles - ax - 1))
    mask = mask.ravel()

    psi = np.asarray(psi, dtype=float).ravel()
    width = shell_width if shell_width is not None else 2.0 * grid.spacing
    dmax = d[mask].max()
    edges = np.arange(0.0, dmax + width, width)
    dist_mid, log_norm = [], []
    idx = np.digitize(d, edges) - 1
    for s in range(len(edges) - 1):
        sel = mask & (idx == s)
        if not np.any(sel):
            continue
        norm = float(np.linalg.norm(psi[sel]))
        if norm < floor:
            break
        dist_mid.append(0.5 * (edges[s] + edges[s + 1]))
        log_norm.append(np.log(norm))
    if len(dist_mid) < min_shells:
        raise SolverError(
            "insufficient dynamic range for a localization fit; shrink the window"
        )
    dd = np.asarray(dist_mid)
    ll = np.asarray(log_norm)
    A = np.column_stack([dd, np.ones_like(dd)])
    coef, _, _, _ = np.linalg.lstsq(A, -ll, rcond=None)
    fitted = A @ coef
    ss_res = float(np.sum((-ll - fitted) ** 2))
    ss_tot = float(np.sum((-ll - np.mean(-ll)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return LocalizationFit(
        alpha=float(coef[0]),
        r2=r2,
        intercept=float(coef[1]),
        shell_distances=[float(v) for v in dd],
        shell_log_norms=[float(v) for v in ll],
        ct_alpha_bound=ct_alpha_bound,
    )


def save_vectors(path: str, vectors: np.ndarray) -> None:
    """Binary layout: int64 dim, int64 count, then contiguous little-endian
    float64 vectors (one after another)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    count, dim = vectors.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", dim, count))
        fh.write(vectors.astype("<f8").tobytes(order="C"))


def load_vectors(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        dim, count = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(8 * dim * count), dtype="<f8")
    return data.reshape(count, dim).copy()
