"""Cluster bookkeeping: nuclear partitions, electron assignments, ion
charges, threshold energies, and the gap constants they induce.

Electron counts (not signed charges) key all stored energies; the signed
ion charge of a cluster holding m electrons over nuclear charge Zt is
delta = m - Zt (delta > 0 anion, delta < 0 cation).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from bogap.model import ExperimentConfig, NuclearConfiguration
from bogap.operators import assemble_cluster, lattice_shift
from bogap.spectra import SpectralReport, lowest_eigenpairs, projector_for

__all__ = [
    "NuclearPartition",
    "ElectronAssignment",
    "IonCharges",
    "ClusterDecomposition",
    "ThresholdTable",
    "detect_partition",
    "suggest_threshold",
    "enumerate_assignments",
    "ion_charges",
    "build_threshold_table",
    "minimizer_has_eigenstate",
    "check_local_neutrality",
]

SINGLETON_RADIUS = 1.0  # C_j floor so single-nucleus clusters keep a finite size


@dataclass(frozen=True)
class NuclearPartition:
    """Partition of the nuclei into spatial clusters.

    blocks are disjoint, covering index sets; centers are block means of the
    source positions; radii C_j satisfy |y_i - z_j| <= C_j / 2 for every
    nucleus i in block j.
    """

    blocks: tuple[tuple[int, ...], ...]
    positions: tuple[float, ...]
    charges: tuple[int, ...]
    centers: tuple[float, ...]
    radii: tuple[float, ...]
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        covered = sorted(i for b in self.blocks for i in b)
        if covered != list(range(len(self.positions))):
            raise ValueError("blocks must be disjoint and cover all nuclei")
        for j, block in enumerate(self.blocks):
            for i in block:
                if abs(self.positions[i] - self.centers[j]) > self.radii[j] / 2 + 1e-12:
                    raise ValueError(f"nucleus {i} outside B(z_{j}, C_{j}/2)")

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def cluster_charges(self) -> tuple[int, ...]:
        return tuple(int(sum(self.charges[i] for i in b)) for b in self.blocks)

    @property
    def offsets(self) -> tuple[tuple[float, ...], ...]:
        """Cluster coordinates Y_i = y_i - z_j per block."""
        return tuple(
            tuple(self.positions[i] - self.centers[j] for i in block)
            for j, block in enumerate(self.blocks)
        )

    def separations(self) -> np.ndarray:
        z = np.asarray(self.centers)
        return np.abs(z[:, None] - z[None, :])

    def describe(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "centers": list(self.centers),
            "radii": list(self.radii),
            "cluster_charges": list(self.cluster_charges),
        }


@dataclass(frozen=True)
class ElectronAssignment:
    """Occupation vector over the k clusters plus an optional far slot."""

    occupations: tuple[int, ...]
    has_free_slot: bool = False
    lieb_feasible: bool = True  # false when some cluster holds >= 2*Zt + |block|

    def __post_init__(self):
        if any(o < 0 for o in self.occupations):
            raise ValueError("occupations must be nonnegative")

    @property
    def total(self) -> int:
        return int(sum(self.occupations))

    @property
    def cluster_occupations(self) -> tuple[int, ...]:
        return self.occupations[:-1] if self.has_free_slot else self.occupations


@dataclass(frozen=True)
class IonCharges:
    """Signed charges delta_j = |E_j| - Zt_j; neutral iff all zero."""

    deltas: tuple[int, ...]

    @property
    def neutral(self) -> bool:
        return all(d == 0 for d in self.deltas)


@dataclass(frozen=True)
class ClusterDecomposition:
    """A nuclear partition together with an electron occupation per cluster."""

    partition: NuclearPartition
    occupations: tuple[int, ...]

    def __post_init__(self):
        if len(self.occupations) != self.partition.k:
            raise ValueError("occupation length must equal the cluster count")
        if any(o < 0 for o in self.occupations):
            raise ValueError("occupations must be nonnegative")

    @property
    def n_electrons(self) -> int:
        return int(sum(self.occupations))

    def electron_blocks(self) -> tuple[tuple[int, ...], ...]:
        """Canonical assignment: consecutive electron index ranges per cluster."""
        blocks, start = [], 0
        for occ in self.occupations:
            blocks.append(tuple(range(start, start + occ)))
            start += occ
        return tuple(blocks)

    def electron_owner(self) -> list[int]:
        owner = []
        for j, occ in enumerate(self.occupations):
            owner.extend([j] * occ)
        return owner

    def ion(self) -> IonCharges:
        return ion_charges(self.occupations, self.partition)

    def describe(self) -> dict:
        d = self.partition.describe()
        d["occupations"] = list(self.occupations)
        d["ion_charges"] = list(self.ion().deltas)
        return d


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _cluster_once(positions, threshold: float) -> list[list[int]]:
    m = len(positions)
    uf = _UnionFind(m)
    for i in range(m):
        for j in range(i + 1, m):
            if abs(positions[i] - positions[j]) <= threshold:
                uf.union(i, j)
    blocks: dict[int, list[int]] = {}
    for i in range(m):
        blocks.setdefault(uf.find(i), []).append(i)
    return [blocks[r] for r in sorted(blocks, key=lambda r: min(blocks[r]))]


def detect_partition(
    configs, threshold: float, *, geometry_tol: float = 1e-9
) -> NuclearPartition:
    """Cluster nuclei by connected components of the distance-<=-threshold graph.

    The final configuration of the sequence defines the partition; block
    centers are position means and C_j = max(2 * spread, singleton floor).
    For a multi-configuration sequence the admissibility pattern is checked
    empirically (intra-block distances bounded by the threshold throughout,
    inter-block center distances increasing, internal geometry fixed) and
    violations are recorded as notes, not errors.  A threshold exceeding
    every internuclear distance yields k=1, flagged 'no breakup'.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if isinstance(configs, NuclearConfiguration):
        configs = [configs]
    configs = list(configs)
    if not configs:
        raise ValueError("at least one configuration required")
    final = configs[-1]
    blocks = _cluster_once(final.positions, threshold)
    notes: list[str] = []
    if len(blocks) == 1 and final.nucleus_count >= 2:
        notes.append("no breakup: threshold exceeds every internuclear distance")

    centers, radii = [], []
    for block in blocks:
        z = float(np.mean([final.positions[i] for i in block]))
        spread = max((abs(final.positions[i] - z) for i in block), default=0.0)
        centers.append(z)
        radii.append(max(2.0 * spread, SINGLETON_RADIUS))

    if len(configs) > 1:
        for t, cfg_t in enumerate(configs):
            for b, block in enumerate(blocks):
                for i, j in itertools.combinations(block, 2):
                    dist = abs(cfg_t.positions[i] - cfg_t.positions[j])
                    if dist > threshold:
                        notes.append(
                            f"intra-block distance |y_{i}-y_{j}| = {dist:.3g} exceeds "
                            f"threshold at sequence index {t}"
                        )
        prev_sep = None
        for t, cfg_t in enumerate(configs):
            cents = [
                float(np.mean([cfg_t.positions[i] for i in block])) for block in blocks
            ]
            seps = sorted(
                abs(cents[a] - cents[b])
                for a in range(len(blocks))
                for b in range(a + 1, len(blocks))
            )
            if prev_sep is not None and seps and any(
                s <= p for s, p in zip(seps, prev_sep)
            ):
                notes.append(f"inter-block separations not increasing at index {t}")
            prev_sep = seps
            for b, block in enumerate(blocks):
                for i in block:
                    off_t = cfg_t.positions[i] - cents[b]
                    off_f = final.positions[i] - centers[b]
                    if abs(off_t - off_f) > geometry_tol:
                        notes.append(
                            f"internal geometry of block {b} varies along the "
                            f"sequence (nucleus {i}, index {t})"
                        )
                        break
    return NuclearPartition(
        blocks=tuple(tuple(b) for b in blocks),
        positions=final.positions,
        charges=final.charges,
        centers=tuple(centers),
        radii=tuple(radii),
        notes=tuple(dict.fromkeys(notes)),
    )


def suggest_threshold(nuclei: NuclearConfiguration) -> float:
    """Distance threshold from the largest gap in sorted neighbor distances."""
    pos = sorted(nuclei.positions)
    if len(pos) < 2:
        return SINGLETON_RADIUS
    gaps = sorted(b - a for a, b in zip(pos, pos[1:]))
    if len(gaps) == 1:
        return gaps[0] / 2.0
    ratios = [(gaps[i + 1] / max(gaps[i], 1e-12), i) for i in range(len(gaps) - 1)]
    best_ratio, best_i = max(ratios)
    if best_ratio < 3.0:
        # no clear scale separation; cut halfway below the largest gap
        return gaps[-1] / 2.0
    return float(np.sqrt(gaps[best_i] * gaps[best_i + 1]))


def enumerate_assignments(
    n_electrons: int, partition: NuclearPartition, allow_free_slot: bool = False
) -> list[ElectronAssignment]:
    """All compositions of N into k (or k+1, with the far slot) parts.

    Occupations where some cluster holds at least 2*Zt_j + |block_j|
    electrons cannot bind and are retained but flagged infeasible.
    """
    if n_electrons < 0:
        raise ValueError("electron count must be nonnegative")
    k = partition.k
    slots = k + 1 if allow_free_slot else k
    charges = partition.cluster_charges
    result = []
    for combo in _compositions(n_electrons, slots):
        occ = tuple(combo)
        feasible = all(
            occ[j] < 2 * charges[j] + len(partition.blocks[j]) for j in range(k)
        )
        result.append(
            ElectronAssignment(
                occupations=occ, has_free_slot=allow_free_slot, lieb_feasible=feasible
            )
        )
    return result


def _compositions(total: int, slots: int):
    if slots == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, slots - 1):
            yield (head,) + rest


def ion_charges(occupations, partition: NuclearPartition) -> IonCharges:
    """delta_j = |E_j| - Zt_j per cluster."""
    occupations = tuple(occupations)
    if len(occupations) != partition.k:
        raise ValueError("assignment incompatible with partition")
    zt = partition.cluster_charges
    return IonCharges(deltas=tuple(int(o - z) for o, z in zip(occupations, zt)))


@dataclass
class ThresholdTable:
    """Per-cluster energies and the derived breakup threshold quantities.

    levels[j][m] holds the lowest eigenvalues of cluster j with m electrons
    (bosonic subspace).  All derived values follow:

      e_inf_0          sum of neutral cluster ground energies
      excited[l]       neutral sum with cluster l promoted to its first
                       excited level
      ionic[occ]       sum of cluster ground energies for an ionic occupation
      e_inf_1          min over the excited family and the bound ionic family
    """

    partition: NuclearPartition
    n_electrons: int
    levels: dict[int, dict[int, list[float]]]
    neutral_occ: tuple[int, ...]
    multiplicities: tuple[int, ...]
    e_inf_0: float
    excited: dict[int, float]
    ionic: dict[tuple[int, ...], float]
    ionic_bound: dict[tuple[int, ...], bool]
    lieb_excluded: list[tuple[int, ...]]
    e_inf_1: float
    e_inf_1_candidate: str
    ionic_minimizers: list[tuple[int, ...]]
    g1: float
    g2: float
    g3: float
    g4: float
    g: float
    notes: list[str] = field(default_factory=list)

    def cluster_energy(self, j: int, m: int, level: int = 0) -> float:
        return self.levels[j][m][level]

    def cluster_ionization_threshold(self, j: int, m: int) -> float:
        """Ground energy of cluster j with one electron removed."""
        return self.levels[j][m - 1][0]

    def to_dict(self) -> dict:
        return {
            "partition": self.partition.describe(),
            "n_electrons": self.n_electrons,
            "levels": {
                str(j): {str(m): vals for m, vals in per.items()}
                for j, per in self.levels.items()
            },
            "neutral_occupation": list(self.neutral_occ),
            "multiplicities": list(self.multiplicities),
            "e_inf_0": self.e_inf_0,
            "excited_thresholds": {str(l): v for l, v in self.excited.items()},
            "ionic_sums": {str(list(k)): v for k, v in self.ionic.items()},
            "ionic_bound": {str(list(k)): v for k, v in self.ionic_bound.items()},
            "lieb_excluded": [list(k) for k in self.lieb_excluded],
            "e_inf_1": self.e_inf_1,
            "e_inf_1_candidate": self.e_inf_1_candidate,
            "ionic_minimizers": [list(k) for k in self.ionic_minimizers],
            "gap_constants": {
                "g1": self.g1,
                "g2": self.g2,
                "g3": self.g3,
                "g4": self.g4,
                "g": self.g,
            },
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        """Human-readable candidate list sorted by energy."""
        lines = [
            f"clusters: {[list(b) for b in self.partition.blocks]}",
            f"E_inf_0 (neutral ground sum) = {self.e_inf_0:+.8f}",
        ]
        cands: list[tuple[float, str]] = []
        for l, v in self.excited.items():
            cands.append((v, f"excite cluster {l}"))
        for occ, v in self.ionic.items():
            tag = "bound" if self.ionic_bound[occ] else "unbound"
            cands.append((v, f"ionic {list(occ)} ({tag})"))
        for v, label in sorted(cands):
            lines.append(f"  {v:+.8f}  {label}")
        lines.append(f"E_inf_1 = {self.e_inf_1:+.8f}  from {self.e_inf_1_candidate}")
        lines.append(
            "G constants: "
            f"G1={self.g1:.6g} G2={self.g2:.6g} G3={self.g3:.6g} G4={self.g4:.6g} "
            f"G={self.g:.6g}"
        )
        return "\n".join(lines)


def _cluster_levels(
    cfg: ExperimentConfig,
    partition: NuclearPartition,
    j: int,
    m: int,
    k_levels: int,
    *,
    centered: bool,
    seed: int,
    dense_oracle: bool,
    cache: dict | None,
    solver_tol: float,
) -> SpectralReport | list[float]:
    """Lowest levels of cluster j with m electrons; m = 0 is the scalar.

    The cache is keyed by the cluster's absolute geometry; a second index
    keyed by its internal shape lets a translated copy of an already solved
    cluster start from its lattice-shifted eigenvectors, which turns the
    repeated ion solves of a separation scan into a few refinement sweeps.
    """
    decomp = ClusterDecomposition(
        partition=partition,
        occupations=tuple(m if jj == j else 0 for jj in range(partition.k)),
    )
    op = assemble_cluster(cfg, decomp, j, centered=centered)
    if m == 0:
        return [float(op.scalar)]
    positions = tuple(np.round(np.asarray(op.metadata["positions"]), 12))
    charges = tuple(op.metadata["charges"])
    key = (positions, charges, m, k_levels)
    shape_key = (
        tuple(np.round(np.asarray(positions) - positions[0], 12)),
        charges,
        m,
        k_levels,
    )
    v0 = None
    if cache is not None:
        if key in cache:
            return cache[key]
        sibling = cache.get(("shape", shape_key))
        if sibling is not None:
            old_anchor, old_rep = sibling
            delta = positions[0] - old_anchor
            sites = round(delta / op.grid.spacing)
            v0 = lattice_shift(old_rep.eigenvectors.T, sites, op.grid.n, m)
    proj = projector_for("bosonic", m) if m > 1 else None
    rep = lowest_eigenpairs(
        op,
        k=min(k_levels, op.dim),
        subspace=proj,
        tol=solver_tol,
        seed=seed,
        v0=v0,
        dense_oracle=dense_oracle,
    )
    if cache is not None:
        cache[key] = rep
        cache[("shape", shape_key)] = (positions[0], rep)
    return rep


def build_threshold_table(
    cfg: ExperimentConfig,
    partition: NuclearPartition,
    *,
    centered: bool = True,
    seed: int = 0,
    dense_oracle: bool = False,
    cache: dict | None = None,
    reports_out: dict | None = None,
) -> ThresholdTable:
    """Solve every feasible cluster/electron-count combination and derive
    the breakup thresholds and gap constants.

    Ionic occupations are enumerated over all compositions of N, skipping
    only those excluded by the bound-state count filter; whether an ionic
    cluster actually binds is discovered from the solves (ground energy
    strictly below the cluster's own ionization threshold) rather than
    assumed.  Ionic minimizers are collected with a configurable slack so
    that box-wall asymmetries of weakly bound ions do not break the exact
    degeneracy the infinite-separation limit would have.
    """
    n_elec = cfg.particles.electron_count
    k = partition.k
    charges = partition.cluster_charges
    tol = cfg.tolerances.solver
    notes: list[str] = []

    if sum(charges) != n_elec:
        raise ValueError("threshold table requires a globally neutral system (N = Z)")
    neutral_occ = tuple(charges)

    assignments = enumerate_assignments(n_elec, partition, allow_free_slot=False)
    lieb_excluded = [a.occupations for a in assignments if not a.lieb_feasible]
    feasible = [a.occupations for a in assignments if a.lieb_feasible]

    needed: dict[int, set[int]] = {j: set() for j in range(k)}
    for occ in list(feasible) + [neutral_occ]:
        for j, m in enumerate(occ):
            needed[j].add(m)
            if m >= 1:
                needed[j].add(m - 1)  # the cluster's own ionization threshold

    levels: dict[int, dict[int, list[float]]] = {j: {} for j in range(k)}
    reports: dict[tuple[int, int], SpectralReport] = {}
    for j in range(k):
        for m in sorted(needed[j]):
            want = 4 if m == neutral_occ[j] else 2
            out = _cluster_levels(
                cfg,
                partition,
                j,
                m,
                want,
                centered=centered,
                seed=seed,
                dense_oracle=dense_oracle,
                cache=cache,
                solver_tol=tol,
            )
            if isinstance(out, SpectralReport):
                levels[j][m] = [float(e) for e in out.eigenvalues]
                reports[(j, m)] = out
            else:
                levels[j][m] = out
    if reports_out is not None:
        reports_out.update(reports)

    def bound(j: int, m: int) -> bool:
        if m == 0:
            return True
        e_m = levels[j][m][0]
        e_thr = levels[j][m - 1][0]
        dtol = cfg.tolerances.degeneracy_for(e_m)
        return e_m < e_thr - dtol

    # neutral family
    e_inf_0 = float(sum(levels[j][neutral_occ[j]][0] for j in range(k)))
    multiplicities = []
    excited: dict[int, float] = {}
    for l in range(k):
        m_l = neutral_occ[l]
        lv = levels[l][m_l]
        if len(lv) < 2:
            multiplicities.append(0)
            continue
        dtol = cfg.tolerances.degeneracy_for(lv[0])
        first_excited = next((e for e in lv[1:] if e > lv[0] + dtol), None)
        if first_excited is None:
            multiplicities.append(0)
            continue
        mult = sum(1 for e in lv if abs(e - first_excited) <= dtol)
        multiplicities.append(mult)
        excited[l] = float(
            sum(levels[j][neutral_occ[j]][0] for j in range(k) if j != l)
            + first_excited
        )

    # ionic family
    ionic: dict[tuple[int, ...], float] = {}
    ionic_bound: dict[tuple[int, ...], bool] = {}
    for occ in feasible:
        if occ == neutral_occ:
            continue
        ionic[occ] = float(sum(levels[j][occ[j]][0] for j in range(k)))
        ionic_bound[occ] = all(bound(j, occ[j]) for j in range(k))

    candidates: list[tuple[float, str]] = [
        (v, f"excited[{l}]") for l, v in excited.items()
    ]
    bound_ionic = {occ: v for occ, v in ionic.items() if ionic_bound[occ]}
    candidates.extend((v, f"ionic[{list(occ)}]") for occ, v in bound_ionic.items())
    if k == 1:
        # degenerate decomposition: thresholds are the direct spectrum
        lv = levels[0][neutral_occ[0]]
        e_inf_1 = float(lv[1]) if len(lv) > 1 else float("inf")
        cand_label = "excited[0]"
    elif candidates:
        e_inf_1, cand_label = min(candidates)
    else:
        e_inf_1, cand_label = float("inf"), "none"
        notes.append("no excited or bound ionic candidates; E_inf_1 undefined")

    minimizers: list[tuple[int, ...]] = []
    if bound_ionic:
        best = min(bound_ionic.values())
        slack = cfg.tolerances.ionic_minimizer
        minimizers = sorted(occ for occ, v in bound_ionic.items() if v <= best + slack)

    # gap constants
    def _min_or_inf(values) -> float:
        values = list(values)
        return float(min(values)) if values else float("inf")

    g1_terms = []
    for j in range(k):
        lv = levels[j][neutral_occ[j]]
        if len(lv) >= 2:
            g1_terms.append(lv[1] - lv[0])
        if len(lv) >= 3:
            g1_terms.append(lv[2] - lv[1])
    g1 = _min_or_inf(g1_terms)

    g2_terms = []
    g3_terms = []
    for occ in minimizers:
        for j in range(k):
            m = occ[j]
            lv = levels[j][m]
            if m >= 1 and len(lv) >= 2:
                g2_terms.append(lv[1] - lv[0])
            if m < charges[j]:  # net-positive cluster: gaining one electron
                g3_terms.append(levels[j][m][0] - levels[j][m + 1][0])
    g2 = _min_or_inf(g2_terms)
    g3 = _min_or_inf(g3_terms)

    g4_terms = [
        v - e_inf_1
        for occ, v in ionic.items()
        if occ not in minimizers and np.isfinite(e_inf_1)
    ]
    g4 = _min_or_inf(g4_terms)
    g = min(g1, g2, g3, g4)
    if not np.isfinite(g):
        notes.append("all gap-constant families empty; G undefined")

    return ThresholdTable(
        partition=partition,
        n_electrons=n_elec,
        levels=levels,
        neutral_occ=neutral_occ,
        multiplicities=tuple(multiplicities),
        e_inf_0=e_inf_0,
        excited=excited,
        ionic=ionic,
        ionic_bound=ionic_bound,
        lieb_excluded=lieb_excluded,
        e_inf_1=e_inf_1,
        e_inf_1_candidate=cand_label,
        ionic_minimizers=minimizers,
        g1=g1,
        g2=g2,
        g3=g3,
        g4=g4,
        g=g,
        notes=notes,
    )


def minimizer_has_eigenstate(
    table: ThresholdTable, occupations, *, margin: float | None = None
) -> tuple[bool, int | None]:
    """Check that every cluster of an ionic occupation binds its electrons.

    A cluster holding m electrons has an eigenstate below its continuum iff
    its ground energy lies strictly below that of the (m-1)-electron system;
    zero-electron clusters pass vacuously.  Returns (ok, witness) with the
    first failing cluster index as witness.
    """
    occ = tuple(occupations)
    for j in range(table.partition.k):
        m = occ[j]
        if m == 0:
            continue
        if m not in table.levels[j] or (m - 1) not in table.levels[j]:
            raise KeyError(f"table is missing cluster {j} entries for m={m} or m-1")
        e_m = table.levels[j][m][0]
        e_thr = table.levels[j][m - 1][0]
        tol = margin if margin is not None else 1e-10 * max(1.0, abs(e_m))
        if not e_m < e_thr - tol:
            return False, j
    return True, None


@dataclass
class LocalNeutralityReport:
    holds: bool
    margin: float
    neutral_sum: float
    best_ionic: float | None
    best_ionic_occ: tuple[int, ...] | None
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "margin": self.margin,
            "neutral_sum": self.neutral_sum,
            "best_ionic": self.best_ionic,
            "best_ionic_occupation": (
                list(self.best_ionic_occ) if self.best_ionic_occ else None
            ),
            "vacuous": self.vacuous,
        }


def check_local_neutrality(table: ThresholdTable) -> LocalNeutralityReport:
    """Per-instance numerical check that the all-neutral assignment minimizes
    the summed cluster ground energies strictly; not a proof."""
    if table.partition.k == 1 or not table.ionic:
        return LocalNeutralityReport(
            holds=True,
            margin=float("inf"),
            neutral_sum=table.e_inf_0,
            best_ionic=None,
            best_ionic_occ=None,
            vacuous=True,
        )
    best_occ, best = min(table.ionic.items(), key=lambda kv: kv[1])
    margin = best - table.e_inf_0
    return LocalNeutralityReport(
        holds=margin > 0,
        margin=float(margin),
        neutral_sum=table.e_inf_0,
        best_ionic=float(best),
        best_ionic_occ=best_occ,
    )
