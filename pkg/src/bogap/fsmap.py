"""Finite-rank projection onto symmetrized cluster products and the
Schur-complement (Feshbach-Schur) eigenvalue machinery built on it.

F_P(lam) = P H P - P H Pp (Pp H Pp - lam)^{-1} Pp H P  restricted to Ran P,
with Pp the orthogonal complement.  Fixed points of its ordered eigenvalue
curves nu_i(lam) = lam reproduce eigenvalues of H exactly, so the map gives
an independent route to E_0 and E_1 that only sees the candidate subspace
plus an inner linear solve.

Works both on grid operators (matrix-free, preconditioned CG inner solves)
and on plain dense symmetric matrices (oracle tests).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from bogap.symmetry import StatisticsProjector, normalized_symmetrize

__all__ = [
    "CandidateMember",
    "CandidateFamily",
    "FsProjection",
    "FsOperator",
    "FixedPointResult",
    "FsDiagnostics",
    "FamilyDegenerateError",
    "FsMapUndefinedError",
    "BracketError",
    "InnerSolveError",
    "build_candidate_family",
    "gram_and_inverse",
    "complement_gap",
    "fs_operator",
    "fs_eigenvalues",
    "q_map",
    "solve_fixed_point",
    "fs_diagnostics",
]


class FamilyDegenerateError(RuntimeError):
    pass


class FsMapUndefinedError(RuntimeError):
    pass


class BracketError(RuntimeError):
    pass


class InnerSolveError(RuntimeError):
    pass


def _apply_fn(H):
    """Uniform batched apply for ManyBodyOperator-likes and dense arrays."""
    if hasattr(H, "apply"):
        return H.apply, H.dim
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix or an operator with .apply")

    def apply(v):
        return np.asarray(v) @ H  # symmetric H

    return apply, H.shape[0]


@dataclass
class CandidateMember:
    label: str
    kind: str                     # ground | excited | ionic
    energy: float                 # decomposed-system eigenvalue of the product
    vector: np.ndarray            # unit, symmetrized
    occupations: tuple[int, ...]
    symmetrizer_norm: float       # ||S(product)|| before renormalization

    def describe(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "energy": self.energy,
            "occupations": list(self.occupations),
            "symmetrizer_norm": self.symmetrizer_norm,
        }


@dataclass
class CandidateFamily:
    members: list[CandidateMember]
    n_particles: int
    rejected: list[str] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.members)

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.members]

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.members])

    def matrix(self) -> np.ndarray:
        """Members as columns, (dim, rank)."""
        return np.stack([m.vector for m in self.members], axis=1)

    def describe(self) -> list[dict]:
        return [m.describe() for m in self.members]


def _embed_product(factors: list[np.ndarray]) -> np.ndarray:
    """Tensor product of per-cluster vectors placed in consecutive slots."""
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out.ravel()


def _first_excited_group(report, dtol: float) -> list[int]:
    eigs = report.eigenvalues
    e0 = eigs[0]
    above = [i for i, e in enumerate(eigs) if e > e0 + dtol]
    if not above:
        return []
    e1 = eigs[above[0]]
    return [i for i in above if abs(eigs[i] - e1) <= dtol]


def build_candidate_family(
    cfg,
    decomp,
    neutral_reports: dict,
    ionic=(),
    *,
    norm_tol: float = 1e-8,
    dedup_tol: float = 1e-8,
) -> CandidateFamily:
    """Assemble the symmetrized candidate family spanning Ran P.

    neutral_reports maps occupied cluster index -> SpectralReport of that
    cluster (>= 2 levels for clusters that can be promoted); ionic is an
    iterable of (occupations, reports) pairs, one per ionic minimizer.
    Members are embedded as tensor products over the canonical consecutive
    electron slots, symmetrized, and normalized; which electron partition
    carries the product is immaterial after symmetrization.  Products
    annihilated by the symmetrizer abort (bosonic factors cannot vanish
    unless something upstream is broken); near-duplicates are dropped with
    a note.
    """
    n_elec = cfg.particles.electron_count
    members: list[CandidateMember] = []
    rejected: list[str] = []

    def push(label, kind, energy, factors, occupations):
        product = _embed_product(factors)
        vec, snorm = normalized_symmetrize(product, n_elec, tol=norm_tol)
        for other in members:
            if abs(float(vec @ other.vector)) > 1.0 - dedup_tol:
                rejected.append(f"{label}: duplicate of {other.label}")
                return
        members.append(
            CandidateMember(
                label=label,
                kind=kind,
                energy=float(energy),
                vector=vec,
                occupations=tuple(occupations),
                symmetrizer_norm=snorm,
            )
        )

    occ = tuple(decomp.occupations)
    k = decomp.partition.k
    occupied = [j for j in range(k) if occ[j] > 0]
    missing = [j for j in occupied if j not in neutral_reports]
    if missing:
        raise KeyError(f"missing cluster reports for clusters {missing}")

    ground_factors = [neutral_reports[j].eigenvectors[:, 0] for j in occupied]
    ground_energy = sum(float(neutral_reports[j].eigenvalues[0]) for j in occupied)
    push("neutral-ground", "ground", ground_energy, ground_factors, occ)

    for l in occupied:
        rep = neutral_reports[l]
        dtol = cfg.tolerances.degeneracy_for(float(rep.eigenvalues[0]))
        for p, idx in enumerate(_first_excited_group(rep, dtol)):
            factors = [
                neutral_reports[j].eigenvectors[:, idx if j == l else 0]
                for j in occupied
            ]
            energy = ground_energy - float(rep.eigenvalues[0]) + float(
                rep.eigenvalues[idx]
            )
            push(f"excited[l={l},p={p}]", "excited", energy, factors, occ)

    for ion_occ, reports in ionic:
        ion_occ = tuple(ion_occ)
        factors = []
        energy = 0.0
        for j in range(k):
            if ion_occ[j] == 0:
                # empty factor: a bare scalar (intra-cluster repulsion) is fine
                rep = reports.get(j)
                if isinstance(rep, (int, float)):
                    energy += float(rep)
                elif rep is not None:
                    energy += float(rep.eigenvalues[0])
                continue
            rep = reports[j]
            factors.append(rep.eigenvectors[:, 0])
            energy += float(rep.eigenvalues[0])
        if not factors:
            rejected.append(f"ionic{list(ion_occ)}: no occupied clusters")
            continue
        push(f"ionic{list(ion_occ)}", "ionic", energy, factors, ion_occ)

    return CandidateFamily(members=members, n_particles=n_elec, rejected=rejected)


@dataclass
class FsProjection:
    """Orthogonal projection onto span(family) via the exact Gram inverse."""

    vectors: np.ndarray            # (dim, rank) raw family columns
    gram: np.ndarray               # (rank, rank)
    gram_inverse: np.ndarray
    condition_number: float
    basis: np.ndarray              # (dim, rank), orthonormal columns
    family: CandidateFamily | None = None

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def apply(self, v: np.ndarray) -> np.ndarray:
        """P v for a vector (dim,) or batch rows (b, dim)."""
        if self.rank == 0:
            return np.zeros_like(v)
        return np.asarray(v) @ self.basis @ self.basis.T

    def apply_perp(self, v: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return np.asarray(v).copy()
        v = np.asarray(v)
        return v - v @ self.basis @ self.basis.T

    @classmethod
    def from_vectors(cls, vectors: np.ndarray, floor: float = 1e-8):
        return gram_and_inverse(vectors, floor=floor)


def gram_and_inverse(family, floor: float = 1e-8) -> FsProjection:
    """Build the projection from a family (or a raw (dim, rank) column array).

    The Gram matrix must be symmetric positive definite: its inverse comes
    from a Cholesky factorization, which also supplies the orthonormal basis
    used everywhere downstream.  A smallest eigenvalue below the floor means
    the members have collapsed onto each other.
    """
    fam = None
    if isinstance(family, CandidateFamily):
        fam = family
        vectors = family.matrix() if family.rank else np.zeros((1, 0))
    else:
        vectors = np.asarray(family, dtype=float)
        if vectors.ndim != 2:
            raise ValueError("expected a (dim, rank) array of family columns")
    if vectors.shape[1] == 0:
        return FsProjection(
            vectors=vectors,
            gram=np.zeros((0, 0)),
            gram_inverse=np.zeros((0, 0)),
            condition_number=1.0,
            basis=vectors.copy(),
            family=fam,
        )
    gram = vectors.T @ vectors
    gram = 0.5 * (gram + gram.T)
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] < floor:
        raise FamilyDegenerateError(
            f"family degenerate at this separation (smallest Gram eigenvalue "
            f"{eigs[0]:.3e} < floor {floor:.1e}); increase the separation or "
            "deduplicate"
        )
    chol = np.linalg.cholesky(gram)
    gram_inverse = sla.cho_solve((chol, True), np.eye(gram.shape[0]))
    basis = sla.solve_triangular(chol, vectors.T, lower=True).T
    return FsProjection(
        vectors=vectors,
        gram=gram,
        gram_inverse=gram_inverse,
        condition_number=float(eigs[-1] / eigs[0]),
        basis=basis,
        family=fam,
    )


class _ComplementProjector:
    """Deflation into (Ran P)-perp, optionally inside a statistics subspace."""

    kind = "complement"

    def __init__(self, projection: FsProjection, subspace: StatisticsProjector | None):
        self.projection = projection
        self.subspace = subspace

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.subspace is not None:
            v = self.subspace.apply(v)
        return self.projection.apply_perp(v)


@dataclass
class ComplementGap:
    g_est: float
    complement_bottom: float   # smallest eigenvalue of Pp H Pp on Ran Pp
    lam: float
    converged: bool


def complement_gap(
    H,
    P: FsProjection,
    lam: float,
    *,
    subspace: StatisticsProjector | None = None,
    tol: float = 1e-6,
    seed: int = 0,
    dense_oracle: bool = False,
    maxiter: int = 500,
    v0: np.ndarray | None = None,
) -> ComplementGap:
    """Smallest eigenvalue of Pp H Pp - lam restricted to Ran Pp.

    Positive G_est certifies that the inner resolvent exists with norm at
    most 1/G_est; G_est is affine in lam (the complement bottom is computed
    once), so positivity at the right end of a bracket covers the bracket.
    """
    apply, dim = _apply_fn(H)
    if dense_oracle or not hasattr(H, "apply"):
        Hm = H if isinstance(H, np.ndarray) else H.dense()
        if subspace is not None:
            Pm = subspace.apply(np.eye(dim))
            w, v = np.linalg.eigh(Pm)
            sub = v[:, w > 0.5]
        else:
            sub = np.eye(dim)
        if P.rank > 0:
            inner = sub - P.basis @ (P.basis.T @ sub)
        else:
            inner = sub
        q, r = np.linalg.qr(inner)
        keep = np.abs(np.diag(r)) > 1e-10
        q = q[:, keep]
        mu0 = float(np.linalg.eigvalsh(q.T @ Hm @ q)[0])
        return ComplementGap(
            g_est=mu0 - lam, complement_bottom=mu0, lam=lam, converged=True
        )
    from bogap.spectra import lowest_eigenpairs

    proj = _ComplementProjector(P, subspace)
    rep = lowest_eigenpairs(
        H, k=1, subspace=proj, tol=tol, seed=seed, maxiter=maxiter, v0=v0
    )
    mu0 = float(rep.eigenvalues[0])
    return ComplementGap(
        g_est=mu0 - lam,
        complement_bottom=mu0,
        lam=lam,
        converged=bool(rep.converged[0]),
    )


def _projected_pcg(
    apply_a,
    project,
    b: np.ndarray,
    lam: float,
    tol: float,
    maxiter: int,
    precond=None,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, float]:
    """CG for (project o (A - lam) o project) x = b with b in the subspace.

    The projector is enforced on every iterate; the optional preconditioner
    is projected as well, which keeps the iteration a valid PCG on the
    subspace.
    """
    b = project(b)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    x = project(x0.copy()) if x0 is not None else np.zeros_like(b)
    if x.any():
        r = b - (project(apply_a(x)) - lam * x)
    else:
        r = b.copy()
    z = project(precond(r)) if precond is not None else r.copy()
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxiter + 1):
        ap = project(apply_a(p)) - lam * p
        pap = float(p @ ap)
        if pap <= 0:
            raise InnerSolveError(
                f"inner operator not positive definite at lam={lam:.6g} "
                f"(p'Ap = {pap:.3e}); the FS map is not defined here"
            )
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        rnorm = float(np.linalg.norm(r))
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        z = project(precond(r)) if precond is not None else r.copy()
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    raise InnerSolveError(
        f"inner CG did not reach {tol:.1e} in {maxiter} iterations "
        f"(relative residual {rnorm / bnorm:.3e})"
    )


@dataclass
class FsOperator:
    lam: float
    matrix: np.ndarray             # rank x rank, in the orthonormalized basis
    inner_iterations: list[int]
    inner_residuals: list[float]
    schur_solutions: np.ndarray | None = None  # warm-start storage (rank, dim)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "matrix": self.matrix.tolist(),
            "inner_iterations": self.inner_iterations,
            "inner_residuals": self.inner_residuals,
        }


def fs_operator(
    H,
    P: FsProjection,
    lam: float,
    *,
    subspace: StatisticsProjector | None = None,
    cg_tol: float = 1e-10,
    cg_maxiter: int = 5000,
    warm: np.ndarray | None = None,
) -> FsOperator:
    """Matrix of F_P(lam) in the Gram-orthonormalized family basis.

    The inner inverse is applied by projected (preconditioned) conjugate
    gradients, one solve per family member; the result is symmetrized,
    which it is analytically whenever H is self-adjoint.
    """
    apply, dim = _apply_fn(H)
    if P.rank == 0:
        return FsOperator(lam=lam, matrix=np.zeros((0, 0)), inner_iterations=[], inner_residuals=[])
    B = P.basis
    HB = apply(B.T)                     # (rank, dim) rows = H b_i
    M0 = HB @ B                          # <b_i, H b_j>
    comp = _ComplementProjector(P, subspace)
    Y = comp.apply(HB)                   # rows P-perp H b_i
    precond_factory = getattr(H, "kinetic_preconditioner", None)
    precond = precond_factory(lam) if precond_factory is not None else None
    W = np.zeros_like(Y)
    iters: list[int] = []
    resids: list[float] = []
    for i in range(P.rank):
        x0 = warm[i] if warm is not None and i < warm.shape[0] else None
        W[i], it, rr = _projected_pcg(
            apply, comp.apply, Y[i], lam, cg_tol, cg_maxiter, precond, x0
        )
        iters.append(it)
        resids.append(rr)
    F = M0 - Y @ W.T
    F = 0.5 * (F + F.T)
    return FsOperator(
        lam=lam,
        matrix=F,
        inner_iterations=iters,
        inner_residuals=resids,
        schur_solutions=W,
    )


def fs_eigenvalues(H, P: FsProjection, lam: float, **kw) -> np.ndarray:
    return fs_operator(H, P, lam, **kw).eigenvalues()


def q_map(
    H,
    P: FsProjection,
    lam: float,
    phi: np.ndarray,
    *,
    subspace: StatisticsProjector | None = None,
    cg_tol: float = 1e-10,
    cg_maxiter: int = 5000,
) -> np.ndarray:
    """Reconstruct the full-space eigenvector from its Ran-P component.

    psi = P phi - Pp (Pp H Pp - lam)^{-1} Pp H (P phi); when (lam, phi)
    solves the projected fixed-point problem, psi satisfies H psi = lam psi
    up to the inner-solve tolerance, and P psi = phi exactly.
    """
    apply, dim = _apply_fn(H)
    pphi = P.apply(phi) if phi.shape[0] == dim else P.basis @ phi
    comp = _ComplementProjector(P, subspace)
    y = comp.apply(apply(pphi))
    w, _, _ = _projected_pcg(apply, comp.apply, y, lam, cg_tol, cg_maxiter,
                             getattr(H, "kinetic_preconditioner", lambda _l: None)(lam))
    return pphi - w


@dataclass
class FixedPointResult:
    lam: float
    index: int
    coefficients: np.ndarray       # eigenvector of F_P(lam*) in the basis
    vector: np.ndarray             # in Ran P (full space)
    trace: list[tuple[float, float]]
    n_evaluations: int
    complement_bottom: float

    def trace_csv(self) -> str:
        lines = ["evaluation,lambda,g"]
        for i, (lam, g) in enumerate(self.trace):
            lines.append(f"{i},{lam!r},{g!r}")
        return "\n".join(lines) + "\n"


def solve_fixed_point(
    H,
    P: FsProjection,
    index: int,
    bracket: tuple[float, float],
    *,
    subspace: StatisticsProjector | None = None,
    tol: float = 1e-10,
    cg_tol: float = 1e-10,
    cg_maxiter: int = 5000,
    max_evaluations: int = 60,
    complement: ComplementGap | None = None,
    widen: int = 6,
    seed: int = 0,
) -> FixedPointResult:
    """Solve nu_index(lam) = lam by safeguarded secant/bisection.

    g(lam) = nu_index(lam) - lam is strictly decreasing wherever the map is
    defined, so a sign change brackets exactly one root.  The bracket is
    widened adaptively (never past the complement bottom) when the initial
    one misses the sign change.
    """
    if index >= P.rank:
        raise ValueError(f"index {index} out of range for rank-{P.rank} projection")
    lo, hi = float(bracket[0]), float(bracket[1])
    if lo >= hi:
        raise ValueError("empty bracket")
    if complement is None:
        complement = complement_gap(H, P, max(lo, hi), subspace=subspace, seed=seed)
    mu0 = complement.complement_bottom
    margin = 1e-6 * max(1.0, abs(mu0))
    if hi >= mu0 - margin:
        hi = mu0 - margin
    if lo >= hi:
        raise FsMapUndefinedError(
            f"complement gap closes inside the bracket (bottom {mu0:.6g})"
        )

    trace: list[tuple[float, float]] = []
    warm_store: dict[str, np.ndarray | None] = {"W": None}

    def g(lam: float) -> float:
        op = fs_operator(
            H,
            P,
            lam,
            subspace=subspace,
            cg_tol=cg_tol,
            cg_maxiter=cg_maxiter,
            warm=warm_store["W"],
        )
        warm_store["W"] = op.schur_solutions
        val = float(op.eigenvalues()[index] - lam)
        trace.append((lam, val))
        return val

    glo = g(lo)
    ghi = g(hi)
    for _ in range(widen):
        if glo >= 0.0:
            break
        lo = lo - max(hi - lo, 1.0)
        glo = g(lo)
    for _ in range(widen):
        if ghi <= 0.0:
            break
        new_hi = min(hi + (hi - lo), mu0 - margin)
        if new_hi <= hi:
            break
        hi, ghi = new_hi, g(new_hi)
    if glo < 0.0 or ghi > 0.0:
        raise BracketError(
            f"no sign change on [{lo:.6g}, {hi:.6g}] (g = {glo:.3e}, {ghi:.3e}); "
            "the bracket excludes the eigenvalue"
        )

    # g is strictly decreasing with slope <= -1, so |g(lam)| bounds the
    # distance to the root; secant steps converge in a handful of
    # evaluations, with bisection as the safeguard.
    a, ga, b, gb = lo, glo, hi, ghi
    root = a if abs(ga) <= abs(gb) else b
    groot = min(abs(ga), abs(gb))
    while len(trace) < max_evaluations:
        scale = max(1.0, abs(a), abs(b))
        if groot <= tol * scale or b - a <= tol * scale:
            break
        if gb != ga:
            lam = b - gb * (b - a) / (gb - ga)
        else:
            lam = 0.5 * (a + b)
        if not (a < lam < b):
            lam = 0.5 * (a + b)
        gl = g(lam)
        if abs(gl) < groot:
            root, groot = lam, abs(gl)
        if gl > 0:
            a, ga = lam, gl
        else:
            b, gb = lam, gl
    op = fs_operator(
        H, P, root, subspace=subspace, cg_tol=cg_tol, cg_maxiter=cg_maxiter,
        warm=warm_store["W"],
    )
    w, u = np.linalg.eigh(op.matrix)
    coef = u[:, index]
    return FixedPointResult(
        lam=float(root),
        index=index,
        coefficients=coef,
        vector=P.basis @ coef,
        trace=trace,
        n_evaluations=len(trace),
        complement_bottom=mu0,
    )


@dataclass
class FsDiagnostics:
    """Smallness measures behind the variational estimates.

    The diagonal energy deviation is reported separately: for ionic members
    it carries the physical monopole attraction between charged clusters,
    an O(1/separation) effect, while the off-diagonal couplings decay much
    faster (the monopole and dipole contributions cancel between the e-e
    and e-n crossing terms).
    """

    gram_offdiagonal: float        # max |<phi_i, phi_j>|, i != j
    energy_offdiagonal: float      # max |<phi_i, H phi_j>|, i != j
    energy_diagonal_deviation: float  # max |<phi_i, H phi_i> - lambda_i|
    schur_correction: float        # max |<phi_i, H Pp (H_perp - lam)^-1 Pp H phi_j>|
    lam: float
    gram_matrix: list | None = None
    energy_matrix: list | None = None

    def to_dict(self) -> dict:
        return {
            "gram_offdiagonal": self.gram_offdiagonal,
            "energy_offdiagonal": self.energy_offdiagonal,
            "energy_diagonal_deviation": self.energy_diagonal_deviation,
            "schur_correction": self.schur_correction,
            "lam": self.lam,
            "gram_matrix": self.gram_matrix,
            "energy_matrix": self.energy_matrix,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def fs_diagnostics(
    family: CandidateFamily,
    H,
    lam: float,
    *,
    projection: FsProjection | None = None,
    subspace: StatisticsProjector | None = None,
    cg_tol: float = 1e-10,
    cg_maxiter: int = 5000,
) -> FsDiagnostics:
    """Measure how close the family is to an orthonormal eigenbasis.

    Reports the max off-diagonal Gram entry, the off-diagonal and diagonal
    deviations of <phi_i, H phi_j> from diag(member energies), and the max
    entry of the Schur correction block at the given spectral parameter.
    """
    apply, dim = _apply_fn(H)
    P = projection if projection is not None else gram_and_inverse(family)
    phi = family.matrix()
    r = family.rank
    gram = phi.T @ phi
    offmask = ~np.eye(r, dtype=bool)
    gram_off = float(np.max(np.abs(gram[offmask]))) if r > 1 else 0.0
    hphi = apply(phi.T)                  # rows H phi_i
    M = hphi @ phi
    M = 0.5 * (M + M.T)
    energy_off = float(np.max(np.abs(M[offmask]))) if r > 1 else 0.0
    energy_diag = float(np.max(np.abs(np.diag(M) - family.energies)))
    comp = _ComplementProjector(P, subspace)
    Y = comp.apply(hphi)
    precond_factory = getattr(H, "kinetic_preconditioner", None)
    precond = precond_factory(lam) if precond_factory is not None else None
    W = np.zeros_like(Y)
    for i in range(r):
        W[i], _, _ = _projected_pcg(
            apply, comp.apply, Y[i], lam, cg_tol, cg_maxiter, precond
        )
    schur = float(np.max(np.abs(Y @ W.T))) if r > 0 else 0.0
    return FsDiagnostics(
        gram_offdiagonal=gram_off,
        energy_offdiagonal=energy_off,
        energy_diagonal_deviation=energy_diag,
        schur_correction=schur,
        lam=lam,
        gram_matrix=gram.tolist(),
        energy_matrix=M.tolist(),
    )
