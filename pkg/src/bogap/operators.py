"""Hamiltonian assembly on the N-particle tensor-product grid.

Operators are kept matrix-free: a banded finite-difference stencil per
particle axis plus a multiplicative diagonal and an optional scalar term.
Dense materialization is reserved for oracle-mode cross checks at small
dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.sparse as sparse

from bogap.model import ExperimentConfig, ModelParams, NuclearConfiguration

__all__ = [
    "Grid1D",
    "grid_from",
    "soft_coulomb",
    "ManyBodyOperator",
    "assemble_full",
    "assemble_cluster",
    "assemble_cluster_sum",
    "assemble_interaction",
    "lattice_shift",
    "DimensionBudgetError",
]

DENSE_LIMIT = 4096          # dense materialization allowed only up to here
DEFAULT_MAX_DIM = 20_000_000

# Central second-derivative stencils (symmetric halves, unit spacing) and the
# matching first-derivative halves used for discrete |grad J|^2 terms.
_D2_HALF = {2: (-2.0, 1.0), 4: (-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0)}
_D1_HALF = {2: (0.0, 0.5), 4: (0.0, 2.0 / 3.0, -1.0 / 12.0)}


class DimensionBudgetError(RuntimeError):
    """Tensor dimension n^N exceeds the configured memory budget."""


@dataclass(frozen=True)
class Grid1D:
    extent: float
    n: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.n)


def grid_from(params: ModelParams) -> Grid1D:
    return Grid1D(extent=params.grid_extent, n=params.grid_points)


def soft_coulomb(q1: float, q2: float, a: float, r):
    """Softened Coulomb interaction q1*q2 / sqrt(r^2 + a^2).

    Even in r, bounded by |q1*q2| / a, and asymptotically q1*q2/r.
    """
    if a <= 0:
        raise ValueError("softening must be positive")
    r = np.asarray(r, dtype=float)
    out = q1 * q2 / np.sqrt(r * r + a * a)
    return float(out) if out.ndim == 0 else out


@dataclass
class ManyBodyOperator:
    """Sparse self-adjoint operator on the N-particle grid.

    action(v) = sum_{l in kinetic_axes} -kinetic_scale * D2_l v
                + diagonal * v + scalar * v

    All terms commute with electron relabeling whenever the diagonal does.
    Immutable after assembly; applying to distinct vectors is thread-safe.
    """

    grid: Grid1D
    n_particles: int
    kinetic_scale: float
    kinetic_axes: tuple[int, ...]
    stencil_order: int
    diagonal: np.ndarray | None
    scalar: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.grid.n ** self.n_particles

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def _kin_coeffs(self) -> np.ndarray:
        half = _D2_HALF[self.stencil_order]
        return -self.kinetic_scale / self.grid.spacing ** 2 * np.asarray(half)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply the operator to one vector (dim,) or a batch (b, dim)."""
        v = np.asarray(v, dtype=float)
        single = v.ndim == 1
        batch = v.reshape((-1,) + (self.grid.n,) * self.n_particles)
        if self.diagonal is not None:
            out = batch * self.diagonal.reshape(batch.shape[1:])
        else:
            out = np.zeros_like(batch)
        if self.scalar != 0.0:
            out += self.scalar * batch
        if self.kinetic_axes and self.kinetic_scale != 0.0:
            coeffs = self._kin_coeffs()
            for ax in self.kinetic_axes:
                _add_axis_stencil(batch, out, ax + 1, coeffs)
        return out.reshape((self.dim,) if single else v.shape)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)

    def diagonal_vector(self) -> np.ndarray:
        """Full matrix diagonal (potential + scalar + kinetic center weight)."""
        d = np.zeros(self.dim) if self.diagonal is None else self.diagonal.copy()
        d += self.scalar
        if self.kinetic_axes and self.kinetic_scale != 0.0:
            d += len(self.kinetic_axes) * self._kin_coeffs()[0]
        return d

    def norm_bound(self) -> float:
        """Cheap Gershgorin-style upper bound on the spectral radius."""
        kin = 0.0
        if self.kinetic_axes and self.kinetic_scale != 0.0:
            kin = len(self.kinetic_axes) * float(np.sum(np.abs(self._kin_coeffs())) * 2)
        pot = float(np.max(np.abs(self.diagonal))) if self.diagonal is not None else 0.0
        return kin + pot + abs(self.scalar)

    def sparse(self) -> sparse.csr_matrix:
        """Explicit sparse matrix; intended for small dimensions."""
        n = self.grid.n
        mats: list = []
        if self.kinetic_axes and self.kinetic_scale != 0.0:
            coeffs = self._kin_coeffs()
            offs = list(range(-(len(coeffs) - 1), len(coeffs)))
            bands = [np.full(n - abs(k), coeffs[abs(k)]) for k in offs]
            k1 = sparse.diags(bands, offs)
            eye = sparse.identity(n, format="csr")
            for ax in self.kinetic_axes:
                factors = [k1 if l == ax else eye for l in range(self.n_particles)]
                term = factors[0]
                for f in factors[1:]:
                    term = sparse.kron(term, f, format="csr")
                mats.append(term)
        total = sum(mats) if mats else sparse.csr_matrix((self.dim, self.dim))
        d = np.full(self.dim, self.scalar)
        if self.diagonal is not None:
            d = d + self.diagonal
        return (total + sparse.diags(d)).tocsr()

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise DimensionBudgetError(
                f"dense materialization refused: dim {self.dim} > {limit}"
            )
        return self.sparse().toarray()

    def kinetic_preconditioner(self, lam: float):
        """Approximate inverse of (T - lam) via fast sine transforms.

        The order-2 Dirichlet stencil is diagonal in the DST-I basis; for
        order 4 the same transform is used as an approximation.  Returns
        None when T - lam is not positive definite or there is no kinetic
        term.
        """
        if not self.kinetic_axes or self.kinetic_scale == 0.0:
            return None
        if len(self.kinetic_axes) != self.n_particles:
            return None
        n, h = self.grid.n, self.grid.spacing
        m = np.arange(1, n + 1)
        t1 = self.kinetic_scale * (2.0 - 2.0 * np.cos(m * np.pi / (n + 1))) / h**2
        shape = (n,) * self.n_particles
        tsum = np.zeros(shape)
        for ax in range(self.n_particles):
            tsum += t1.reshape((1,) * ax + (n,) + (1,) * (self.n_particles - ax - 1))
        denom = tsum - lam
        if denom.min() <= 0:
            return None
        axes = tuple(range(1, self.n_particles + 1))

        def precond(r: np.ndarray) -> np.ndarray:
            single = r.ndim == 1
            rb = r.reshape((-1,) + shape)
            coef = scipy.fft.dstn(rb, type=1, axes=axes, norm="ortho")
            coef /= denom
            out = scipy.fft.dstn(coef, type=1, axes=axes, norm="ortho")
            return out.reshape(self.dim) if single else out.reshape(r.shape)

        return precond

    def dump_diagonal(self, path: str) -> None:
        """Write the multiplicative diagonal to CSV (flat index, value)."""
        d = np.zeros(self.dim) if self.diagonal is None else self.diagonal
        idx = np.arange(self.dim)
        np.savetxt(
            path,
            np.column_stack([idx, d + self.scalar]),
            delimiter=",",
            header="flat_index,potential",
            comments="",
        )


def lattice_shift(vectors: np.ndarray, sites: int, n: int, n_particles: int) -> np.ndarray:
    """Translate grid vectors by a whole number of lattice sites per axis.

    Every particle axis shifts by the same offset (a rigid cluster
    translation); content moved past the box edge is dropped and zeros
    enter.  Exact (a pure index gather) whenever the physical shift is a
    lattice multiple.  Accepts (dim,) or batch rows (b, dim).
    """
    v = np.asarray(vectors, dtype=float)
    single = v.ndim == 1
    t = v.reshape((-1,) + (n,) * n_particles)
    if sites != 0:
        for ax in range(1, n_particles + 1):
            out = np.zeros_like(t)
            src = [slice(None)] * t.ndim
            dst = [slice(None)] * t.ndim
            if sites > 0:
                dst[ax] = slice(sites, None)
                src[ax] = slice(None, -sites)
            else:
                dst[ax] = slice(None, sites)
                src[ax] = slice(-sites, None)
            out[tuple(dst)] = t[tuple(src)]
            t = out
    return t.reshape((v.shape[-1],) if single else v.shape).copy()


def _add_axis_stencil(src: np.ndarray, out: np.ndarray, axis: int, coeffs: np.ndarray):
    """out += banded symmetric stencil applied to src along axis (Dirichlet)."""
    ndim = src.ndim
    out += coeffs[0] * src
    for k in range(1, len(coeffs)):
        c = coeffs[k]
        if c == 0.0:
            continue
        lo = [slice(None)] * ndim
        hi = [slice(None)] * ndim
        lo[axis] = slice(None, -k)
        hi[axis] = slice(k, None)
        out[tuple(lo)] += c * src[tuple(hi)]
        out[tuple(hi)] += c * src[tuple(lo)]


def _check_budget(n: int, n_particles: int, max_dim: int):
    dim = n**n_particles
    if dim > max_dim:
        raise DimensionBudgetError(
            f"tensor dimension {n}^{n_particles} = {dim} exceeds budget {max_dim}"
        )


def _potential_diagonal(
    grid: Grid1D,
    n_particles: int,
    per_electron_nuclei,
    pairs,
    a: float,
    e2: float,
) -> np.ndarray | None:
    """Multiplicative diagonal from per-electron attractions and e-e pairs.

    per_electron_nuclei[l] is a list of (position, Z) the l-th electron is
    attracted to; pairs is an iterable of (i, j) electron index pairs with
    i < j carrying a repulsion term.
    """
    x = grid.points
    n = grid.n
    shape = (n,) * n_particles
    total = None
    for l, nucs in enumerate(per_electron_nuclei):
        if not nucs:
            continue
        ob = np.zeros(n)
        for pos, z in nucs:
            ob += soft_coulomb(-e2, float(z), a, x - pos)
        bshape = (1,) * l + (n,) + (1,) * (n_particles - l - 1)
        total = ob.reshape(bshape) if total is None else total + ob.reshape(bshape)
    pairs = list(pairs)
    if pairs:
        vee = soft_coulomb(e2, 1.0, a, x[:, None] - x[None, :])
        for i, j in pairs:
            assert i < j
            bshape = [1] * n_particles
            bshape[i] = n
            bshape[j] = n
            term = vee.reshape(bshape)
            total = term.copy() if total is None else total + term
    if total is None:
        return None
    return np.broadcast_to(total, shape).ravel().copy() if total.shape != shape else total.ravel()


def _nuclear_repulsion(nuclei_list, a: float, e2: float) -> float:
    """Scalar sum of pairwise nucleus-nucleus repulsions."""
    s = 0.0
    for i in range(len(nuclei_list)):
        for j in range(i + 1, len(nuclei_list)):
            (pi, zi), (pj, zj) = nuclei_list[i], nuclei_list[j]
            s += soft_coulomb(e2 * zi, zj, a, pi - pj)
    return s


def assemble_full(
    cfg: ExperimentConfig,
    y: NuclearConfiguration | None = None,
    *,
    kinetic: bool = True,
    electron_repulsion: bool = True,
    nuclear_attraction: bool = True,
    n_electrons: int | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> ManyBodyOperator:
    """Assemble the full Born-Oppenheimer operator at fixed nuclear positions.

    The nucleus-nucleus term enters as an exact scalar when the nuclear
    configuration requests it, so toggling it shifts the whole spectrum and
    leaves every gap untouched.  Term toggles exist for oracle tests (e.g.
    the free Dirichlet particle).
    """
    y = y if y is not None else cfg.nuclei
    n_elec = n_electrons if n_electrons is not None else cfg.particles.electron_count
    if y.nucleus_count < 1:
        raise ValueError("at least one nucleus required")
    grid = grid_from(cfg.model)
    _check_budget(grid.n, n_elec, max_dim)
    a = cfg.model.softening
    e2 = cfg.model.charge_unit**2
    nucs = list(zip(y.positions, y.charges)) if nuclear_attraction else []
    per_electron = [nucs] * n_elec
    pairs = (
        [(i, j) for i in range(n_elec) for j in range(i + 1, n_elec)]
        if electron_repulsion
        else []
    )
    diag = _potential_diagonal(grid, n_elec, per_electron, pairs, a, e2)
    scalar = 0.0
    if y.include_nuclear_repulsion:
        scalar = _nuclear_repulsion(list(zip(y.positions, y.charges)), a, e2)
    return ManyBodyOperator(
        grid=grid,
        n_particles=n_elec,
        kinetic_scale=(0.5 / cfg.model.electron_mass) if kinetic else 0.0,
        kinetic_axes=tuple(range(n_elec)) if kinetic else (),
        stencil_order=cfg.model.stencil_order,
        diagonal=diag,
        scalar=scalar,
        metadata={
            "terms": {
                "kinetic": kinetic,
                "v_e": electron_repulsion and n_elec > 1,
                "v_en": nuclear_attraction,
                "v_n": y.include_nuclear_repulsion,
            },
            "positions": list(y.positions),
            "charges": list(y.charges),
            "softening": a,
            "n_electrons": n_elec,
        },
    )


def assemble_cluster(
    cfg: ExperimentConfig,
    decomp,
    j: int,
    *,
    centered: bool = True,
    max_dim: int = DEFAULT_MAX_DIM,
) -> ManyBodyOperator:
    """Operator of cluster j alone, on the grid of its assigned electrons.

    Contains kinetic terms for the cluster's electrons, intra-cluster e-e
    repulsion, attraction to the cluster's nuclei only, and (when the config
    includes nuclear repulsion) the intra-cluster nucleus-nucleus scalar.
    With centered=True the nuclei sit at their cluster coordinates
    Y_i = y_i - z_j; otherwise at their lab positions.

    A cluster with zero electrons yields the trivial operator on the empty
    tensor factor (dimension 1), contributing only its scalar.
    """
    part = decomp.partition
    if not (0 <= j < part.k):
        raise ValueError(f"cluster index {j} out of range")
    m_j = decomp.occupations[j]
    if m_j > cfg.particles.electron_count:
        raise ValueError("electron occupation of cluster exceeds global N")
    grid = grid_from(cfg.model)
    _check_budget(grid.n, max(m_j, 0), max_dim)
    a = cfg.model.softening
    e2 = cfg.model.charge_unit**2
    z_j = part.centers[j] if centered else 0.0
    nucs = [
        (part.positions[i] - z_j, part.charges[i]) for i in part.blocks[j]
    ]
    scalar = (
        _nuclear_repulsion(nucs, a, e2)
        if cfg.nuclei.include_nuclear_repulsion
        else 0.0
    )
    if m_j == 0:
        return ManyBodyOperator(
            grid=grid,
            n_particles=0,
            kinetic_scale=0.0,
            kinetic_axes=(),
            stencil_order=cfg.model.stencil_order,
            diagonal=None,
            scalar=scalar,
            metadata={"cluster": j, "n_electrons": 0, "softening": a},
        )
    per_electron = [nucs] * m_j
    pairs = [(i, l) for i in range(m_j) for l in range(i + 1, m_j)]
    diag = _potential_diagonal(grid, m_j, per_electron, pairs, a, e2)
    return ManyBodyOperator(
        grid=grid,
        n_particles=m_j,
        kinetic_scale=0.5 / cfg.model.electron_mass,
        kinetic_axes=tuple(range(m_j)),
        stencil_order=cfg.model.stencil_order,
        diagonal=diag,
        scalar=scalar,
        metadata={
            "cluster": j,
            "n_electrons": m_j,
            "positions": [p for p, _ in nucs],
            "charges": [z for _, z in nucs],
            "centered": centered,
            "softening": a,
        },
    )


def assemble_cluster_sum(
    cfg: ExperimentConfig, decomp, *, max_dim: int = DEFAULT_MAX_DIM
) -> ManyBodyOperator:
    """Decomposed operator H_E = sum_j H_j embedded on the full N-electron grid.

    Electrons keep their lab-frame slots and each one interacts only with
    its own cluster; adding assemble_interaction reproduces assemble_full
    entry for entry.
    """
    part = decomp.partition
    n_elec = cfg.particles.electron_count
    grid = grid_from(cfg.model)
    _check_budget(grid.n, n_elec, max_dim)
    a = cfg.model.softening
    e2 = cfg.model.charge_unit**2
    cluster_nucs = [
        [(part.positions[i], part.charges[i]) for i in block] for block in part.blocks
    ]
    owner = decomp.electron_owner()
    per_electron = [cluster_nucs[owner[l]] for l in range(n_elec)]
    pairs = [
        (i, l)
        for i in range(n_elec)
        for l in range(i + 1, n_elec)
        if owner[i] == owner[l]
    ]
    diag = _potential_diagonal(grid, n_elec, per_electron, pairs, a, e2)
    scalar = 0.0
    if cfg.nuclei.include_nuclear_repulsion:
        scalar = sum(_nuclear_repulsion(nucs, a, e2) for nucs in cluster_nucs)
    return ManyBodyOperator(
        grid=grid,
        n_particles=n_elec,
        kinetic_scale=0.5 / cfg.model.electron_mass,
        kinetic_axes=tuple(range(n_elec)),
        stencil_order=cfg.model.stencil_order,
        diagonal=diag,
        scalar=scalar,
        metadata={"decomposition": decomp.describe(), "term": "H_E"},
    )


def assemble_interaction(
    cfg: ExperimentConfig, decomp, *, max_dim: int = DEFAULT_MAX_DIM
) -> ManyBodyOperator:
    """Inter-cluster interaction I_E: every pair term crossing clusters.

    Purely multiplicative (no kinetic part).  The e-e crossing terms enter
    with coefficient one, which is what the exact splitting
    H_full = H_E + I_E on the grid requires.
    """
    part = decomp.partition
    if part.k < 2:
        raise ValueError("interaction requires at least two clusters")
    n_elec = cfg.particles.electron_count
    grid = grid_from(cfg.model)
    _check_budget(grid.n, n_elec, max_dim)
    a = cfg.model.softening
    e2 = cfg.model.charge_unit**2
    cluster_nucs = [
        [(part.positions[i], part.charges[i]) for i in block] for block in part.blocks
    ]
    owner = decomp.electron_owner()
    per_electron = []
    for l in range(n_elec):
        other = []
        for c, nucs in enumerate(cluster_nucs):
            if c != owner[l]:
                other.extend(nucs)
        per_electron.append(other)
    pairs = [
        (i, l)
        for i in range(n_elec)
        for l in range(i + 1, n_elec)
        if owner[i] != owner[l]
    ]
    diag = _potential_diagonal(grid, n_elec, per_electron, pairs, a, e2)
    scalar = 0.0
    if cfg.nuclei.include_nuclear_repulsion:
        all_nucs = [(p, z) for nucs in cluster_nucs for (p, z) in nucs]
        intra = sum(_nuclear_repulsion(nucs, a, e2) for nucs in cluster_nucs)
        scalar = _nuclear_repulsion(all_nucs, a, e2) - intra
    if diag is None:
        diag = np.zeros(grid.n**n_elec)
    return ManyBodyOperator(
        grid=grid,
        n_particles=n_elec,
        kinetic_scale=0.0,
        kinetic_axes=(),
        stencil_order=cfg.model.stencil_order,
        diagonal=diag,
        scalar=scalar,
        metadata={"decomposition": decomp.describe(), "term": "I_E"},
    )
