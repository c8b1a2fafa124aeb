"""Experiment orchestration: gap scans, the symmetrization demo, report
emission, and the command-line front end.

Scan geometry: the base nuclear layout is clustered once, then cluster
centers are scaled away from the first cluster's center by each scan
factor while every cluster keeps its internal geometry.  All stages of a
scan point run under failure isolation; a failed stage flags the point and
the scan continues (the asymptotic claims need the tail points most).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from bogap import clusters, fsmap, ims, spectra
from bogap.model import (
    ConfigError,
    ExperimentConfig,
    NuclearConfiguration,
    emit_config,
    parse_config,
    validate_config,
)
from bogap.operators import DimensionBudgetError, assemble_full
from bogap.spectra import SolverError, lowest_eigenpairs, projector_for
from bogap.symmetry import SymmetrizerAnnihilation, bosonic_projector

__all__ = [
    "ScanPoint",
    "GapScanReport",
    "H2DemoReport",
    "run_scan",
    "run_h2_demo",
    "emit_report",
    "main",
]


# ---------------------------------------------------------------------------
# report containers (JSON-native field types only, so round trips are exact)


@dataclass
class ScanPoint:
    scale: float
    status: str = "ok"
    positions: list = field(default_factory=list)
    min_nuclear_distance: float | None = None
    e0: float | None = None
    e1: float | None = None
    e2: float | None = None
    gap: float | None = None
    ground_degenerate: bool | None = None
    lambda0: float | None = None
    lambda1: float | None = None
    e_inf_0: float | None = None
    e_inf_1: float | None = None
    g_constants: dict | None = None
    g_est: float | None = None
    complement_bottom: float | None = None
    gram_offdiagonal: float | None = None
    energy_offdiagonal: float | None = None
    energy_diagonal_deviation: float | None = None
    schur_correction: float | None = None
    minmax_bound_1: float | None = None
    family: list | None = None
    ionic_minimizers: list | None = None
    local_neutrality: dict | None = None
    localization: list | None = None
    fixed_point_evaluations: list | None = None
    direct_iterations: int | None = None
    elapsed_seconds: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class GapScanReport:
    factors: list
    points: list            # list[ScanPoint-as-dict]
    cluster_threshold: float
    partition: dict
    sequence_notes: list
    min_gap: float | None
    limit_deviation_e0: float | None    # |E0 - E_inf_0| at the largest separation
    limit_deviation_e1: float | None
    deviation_e0_by_point: list
    gap_by_point: list
    statistics: str
    seed: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GapScanReport":
        return cls(**d)


@dataclass
class H2DemoReport:
    separations: list
    rows: list              # per separation: dict of splitting/gap data
    splitting_decrease_factor: float | None
    seed: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# geometry helpers


def _scan_partition(cfg: ExperimentConfig):
    """Cluster the base layout and verify the scaled sequence pattern."""
    if cfg.scan is None:
        raise ConfigError("config has no scan section")
    threshold = cfg.scan.cluster_threshold
    if threshold is None:
        threshold = clusters.suggest_threshold(cfg.nuclei)
    base_part = clusters.detect_partition(cfg.nuclei, threshold)
    seq = [
        _scaled_nuclei(cfg.nuclei, base_part, f) for f in cfg.scan.factors
    ]
    seq_part = clusters.detect_partition(seq, threshold)
    return base_part, threshold, list(seq_part.notes)


def _scaled_nuclei(
    base: NuclearConfiguration, part: clusters.NuclearPartition, factor: float
) -> NuclearConfiguration:
    """Scale cluster centers about the first cluster's center; internal
    geometry is held fixed."""
    anchor = part.centers[0]
    positions = list(base.positions)
    for j, block in enumerate(part.blocks):
        zj = anchor + factor * (part.centers[j] - anchor)
        for i in block:
            positions[i] = zj + (base.positions[i] - part.centers[j])
    return NuclearConfiguration(
        positions=tuple(positions),
        charges=base.charges,
        include_nuclear_repulsion=base.include_nuclear_repulsion,
    )


def _partition_at(
    part: clusters.NuclearPartition, nuclei: NuclearConfiguration
) -> clusters.NuclearPartition:
    """The base partition transported to a scaled geometry."""
    centers = tuple(
        float(np.mean([nuclei.positions[i] for i in block])) for block in part.blocks
    )
    return clusters.NuclearPartition(
        blocks=part.blocks,
        positions=nuclei.positions,
        charges=nuclei.charges,
        centers=centers,
        radii=part.radii,
        notes=part.notes,
    )


def _embed_products(reports: dict, occupations, level_sets) -> np.ndarray:
    """Start-block rows from per-cluster eigenvector products."""
    rows = []
    occupied = [j for j, m in enumerate(occupations) if m > 0]
    for levels in level_sets:
        factors = []
        ok = True
        for j in occupied:
            rep = reports[j]
            idx = levels.get(j, 0)
            if idx >= rep.eigenvectors.shape[1]:
                ok = False
                break
            factors.append(rep.eigenvectors[:, idx])
        if not ok:
            continue
        prod = factors[0]
        for f in factors[1:]:
            prod = np.multiply.outer(prod, f)
        rows.append(prod.ravel())
    return np.asarray(rows)


# ---------------------------------------------------------------------------
# the per-point pipeline


def _scan_point(
    cfg: ExperimentConfig,
    base_part: clusters.NuclearPartition,
    factor: float,
    seed: int,
    cache: dict | None,
    dense_oracle: bool,
) -> ScanPoint:
    t_start = time.time()
    point = ScanPoint(scale=float(factor))
    stage = "geometry"
    try:
        nuclei = _scaled_nuclei(cfg.nuclei, base_part, factor)
        pcfg = dataclasses.replace(cfg, nuclei=nuclei)
        part = _partition_at(base_part, nuclei)
        point.positions = [float(p) for p in nuclei.positions]
        rmin = nuclei.min_separation()
        point.min_nuclear_distance = float(rmin) if rmin is not None else None

        stage = "thresholds"
        reports: dict = {}
        table = clusters.build_threshold_table(
            pcfg,
            part,
            centered=False,
            seed=seed,
            dense_oracle=dense_oracle and pcfg.dimension <= 4096,
            cache=cache,
            reports_out=reports,
        )
        point.e_inf_0 = table.e_inf_0
        point.e_inf_1 = table.e_inf_1
        point.g_constants = {
            "g1": table.g1, "g2": table.g2, "g3": table.g3,
            "g4": table.g4, "g": table.g,
        }
        point.ionic_minimizers = [list(o) for o in table.ionic_minimizers]
        point.local_neutrality = clusters.check_local_neutrality(table).to_dict()

        stage = "family"
        decomp = clusters.ClusterDecomposition(
            partition=part, occupations=table.neutral_occ
        )
        neutral_reports = {
            j: reports[(j, table.neutral_occ[j])]
            for j in range(part.k)
            if table.neutral_occ[j] > 0
        }
        ionic_inputs = []
        for occ in table.ionic_minimizers:
            per = {}
            for j in range(part.k):
                per[j] = (
                    reports[(j, occ[j])] if occ[j] > 0 else table.levels[j][0][0]
                )
            ionic_inputs.append((occ, per))
        family = fsmap.build_candidate_family(
            pcfg, decomp, neutral_reports, ionic_inputs
        )
        projection = fsmap.gram_and_inverse(
            family, floor=pcfg.tolerances.gram_floor
        )
        point.family = family.describe()

        stage = "direct"
        n_elec = pcfg.particles.electron_count
        subspace = projector_for(pcfg.particles.statistics, n_elec)
        op = assemble_full(pcfg)
        direct = lowest_eigenpairs(
            op,
            k=3 if part.k > 1 else 2,
            subspace=subspace,
            tol=pcfg.tolerances.solver,
            seed=seed,
            v0=family.matrix().T,
            dense_oracle=dense_oracle and op.dim <= 4096,
        )
        dtol = pcfg.tolerances.degeneracy_for(float(direct.eigenvalues[0]))
        gp = spectra.gap(direct, dtol)
        point.e0 = float(direct.eigenvalues[0])
        point.e1 = float(direct.eigenvalues[1])
        point.e2 = float(direct.eigenvalues[2]) if direct.k > 2 else None
        point.gap = gp.gap
        point.ground_degenerate = gp.ground_degenerate
        point.direct_iterations = direct.iterations

        stage = "complement"
        aux = _embed_products(
            neutral_reports,
            table.neutral_occ,
            [{j: 2} for j in neutral_reports] + [{j: 3} for j in neutral_reports],
        )
        comp = fsmap.complement_gap(
            op,
            projection,
            table.e_inf_1,
            subspace=subspace,
            tol=1e-5,
            seed=seed,
            v0=aux if len(aux) else None,
        )
        point.complement_bottom = comp.complement_bottom
        point.g_est = comp.complement_bottom - point.e1

        stage = "fsmap"
        gref = table.g if np.isfinite(table.g) else 0.1 * (
            table.e_inf_1 - table.e_inf_0
        )
        brackets = [
            (table.e_inf_0 - 5 * gref, 0.5 * (table.e_inf_0 + table.e_inf_1)),
            (table.e_inf_1 - 5 * gref, table.e_inf_1 + gref),
        ]
        fp_evals = []
        lams = []
        for i, bracket in enumerate(brackets):
            fp = fsmap.solve_fixed_point(
                op,
                projection,
                i,
                bracket,
                subspace=subspace,
                tol=pcfg.tolerances.fixed_point,
                cg_tol=pcfg.tolerances.cg,
                complement=comp,
                seed=seed,
            )
            lams.append(fp.lam)
            fp_evals.append(fp.n_evaluations)
        point.lambda0, point.lambda1 = lams
        point.fixed_point_evaluations = fp_evals

        stage = "diagnostics"
        diag = fsmap.fs_diagnostics(
            family,
            op,
            table.e_inf_1,
            projection=projection,
            subspace=subspace,
            cg_tol=pcfg.tolerances.cg,
        )
        point.gram_offdiagonal = diag.gram_offdiagonal
        point.energy_offdiagonal = diag.energy_offdiagonal
        point.energy_diagonal_deviation = diag.energy_diagonal_deviation
        point.schur_correction = diag.schur_correction
        if family.rank >= 2:
            import scipy.linalg as sla

            vals = sla.eigh(
                np.asarray(diag.energy_matrix),
                np.asarray(diag.gram_matrix),
                eigvals_only=True,
            )
            point.minmax_bound_1 = float(vals[1])

        stage = "localization"
        fits = []
        grid = op.grid
        for j, rep in neutral_reports.items():
            m = table.neutral_occ[j]
            centers = [part.positions[i] for i in part.blocks[j]]
            sigma = table.levels[j][m - 1][0]
            used = {0} | set(fsmap._first_excited_group(rep, dtol))
            for idx in sorted(used):
                e = float(rep.eigenvalues[idx])
                fit = spectra.localization_rate(
                    rep.eigenvectors[:, idx],
                    centers,
                    grid,
                    m,
                    ct_alpha_bound=float(np.sqrt(max(sigma - e, 0.0))),
                )
                fits.append(
                    {
                        "cluster": j,
                        "electrons": m,
                        "level": idx,
                        "energy": e,
                        "alpha": fit.alpha,
                        "r2": fit.r2,
                        "ct_alpha_bound": fit.ct_alpha_bound,
                    }
                )
        for occ in table.ionic_minimizers:
            for j in range(part.k):
                if occ[j] == 0:
                    continue
                rep = reports[(j, occ[j])]
                centers = [part.positions[i] for i in part.blocks[j]]
                sigma = table.levels[j][occ[j] - 1][0]
                e = float(rep.eigenvalues[0])
                fit = spectra.localization_rate(
                    rep.eigenvectors[:, 0],
                    centers,
                    grid,
                    occ[j],
                    ct_alpha_bound=float(np.sqrt(max(sigma - e, 0.0))),
                )
                fits.append(
                    {
                        "cluster": j,
                        "electrons": occ[j],
                        "level": 0,
                        "energy": e,
                        "alpha": fit.alpha,
                        "r2": fit.r2,
                        "ct_alpha_bound": fit.ct_alpha_bound,
                    }
                )
        point.localization = fits
    except Exception as exc:  # noqa: BLE001 - failure isolation by design
        point.status = f"failed:{stage}"
        point.error = f"{type(exc).__name__}: {exc}"
    point.elapsed_seconds = time.time() - t_start
    return point


def _scan_point_task(args):
    cfg_text, base_part, factor, seed, dense_oracle = args
    cfg = parse_config(cfg_text)
    return _scan_point(cfg, base_part, factor, seed, None, dense_oracle)


def run_scan(
    cfg: ExperimentConfig,
    *,
    seed: int = 0,
    dense_oracle: bool = False,
    workers: int = 1,
    log=None,
) -> GapScanReport:
    """Run the full separation scan; deterministic for a fixed seed."""
    base_part, threshold, seq_notes = _scan_partition(cfg)
    factors = list(cfg.scan.factors)
    if workers > 1:
        tasks = [
            (emit_config(cfg), base_part, f, seed, dense_oracle) for f in factors
        ]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_scan_point_task, tasks))
    else:
        cache: dict = {}
        points = []
        for f in factors:
            pt = _scan_point(cfg, base_part, f, seed, cache, dense_oracle)
            if log is not None:
                log(
                    f"scale {f}: {pt.status} "
                    f"(gap={pt.gap if pt.gap is None else round(pt.gap, 6)}, "
                    f"{pt.elapsed_seconds:.1f}s)"
                )
            points.append(pt)

    ok = [p for p in points if p.status == "ok"]
    largest = max(ok, key=lambda p: p.scale) if ok else None
    devs = [
        abs(p.e0 - p.e_inf_0) if p.status == "ok" else None for p in points
    ]
    report = GapScanReport(
        factors=[float(f) for f in factors],
        points=[p.to_dict() for p in points],
        cluster_threshold=float(threshold),
        partition=base_part.describe(),
        sequence_notes=seq_notes,
        min_gap=min((p.gap for p in ok), default=None),
        limit_deviation_e0=(
            abs(largest.e0 - largest.e_inf_0) if largest else None
        ),
        limit_deviation_e1=(
            abs(largest.e1 - largest.e_inf_1) if largest else None
        ),
        deviation_e0_by_point=devs,
        gap_by_point=[p.gap for p in points],
        statistics=cfg.particles.statistics,
        seed=seed,
    )
    return report


# ---------------------------------------------------------------------------
# symmetrization degeneracy demo


def run_h2_demo(
    cfg: ExperimentConfig,
    separations=(6.0, 20.0),
    *,
    seed: int = 0,
) -> H2DemoReport:
    """Distinguishable near-degeneracy versus the bosonic gap.

    For each separation: solve the two lowest levels without statistics
    (their splitting collapses exponentially as the product ground states
    decouple) and in the bosonic subspace (whose gap tends to the atomic
    excitation gap), plus the single-atom reference gap.
    """
    if cfg.particles.electron_count != 2:
        raise ConfigError("the degeneracy demo needs exactly 2 electrons")
    if cfg.nuclei.nucleus_count != 2 or not cfg.neutral:
        raise ConfigError("the degeneracy demo needs a neutral diatomic")
    base_part = clusters.detect_partition(
        cfg.nuclei, clusters.suggest_threshold(cfg.nuclei)
    )
    if base_part.k != 2:
        raise ConfigError("base layout must split into two clusters")
    rows = []
    cache: dict = {}
    S2 = bosonic_projector(2)
    for r in separations:
        nuclei = _scaled_nuclei(cfg.nuclei, base_part, r)
        pcfg = dataclasses.replace(cfg, nuclei=nuclei)
        part = _partition_at(base_part, nuclei)
        reports: dict = {}
        table = clusters.build_threshold_table(
            pcfg, part, centered=False, seed=seed, cache=cache, reports_out=reports
        )
        neutral_reports = {
            j: reports[(j, table.neutral_occ[j])] for j in range(part.k)
        }
        # unsymmetrized products seed the distinguishable near-degenerate pair
        psi_l = neutral_reports[0].eigenvectors[:, 0]
        psi_r = neutral_reports[1].eigenvectors[:, 0]
        prod_lr = np.multiply.outer(psi_l, psi_r).ravel()
        prod_rl = np.multiply.outer(psi_r, psi_l).ravel()
        op = assemble_full(pcfg)
        dist = lowest_eigenpairs(
            op,
            k=2,
            subspace=None,
            tol=pcfg.tolerances.solver,
            seed=seed,
            v0=np.stack([prod_lr, prod_rl]),
        )
        splitting = float(dist.eigenvalues[1] - dist.eigenvalues[0])
        sym = (prod_lr + prod_rl) / np.linalg.norm(prod_lr + prod_rl)
        exc_l = np.multiply.outer(
            neutral_reports[0].eigenvectors[:, 1], psi_r
        ).ravel()
        exc_r = np.multiply.outer(
            psi_l, neutral_reports[1].eigenvectors[:, 1]
        ).ravel()
        bos = lowest_eigenpairs(
            op,
            k=2,
            subspace=S2,
            tol=pcfg.tolerances.solver,
            seed=seed,
            v0=np.stack([sym, S2.apply(exc_l), S2.apply(exc_r)]),
        )
        bos_gap = float(bos.eigenvalues[1] - bos.eigenvalues[0])
        atom = neutral_reports[0]
        atomic_gap = float(atom.eigenvalues[1] - atom.eigenvalues[0])
        rows.append(
            {
                "separation": float(r),
                "distinguishable_splitting": splitting,
                "distinguishable_e0": float(dist.eigenvalues[0]),
                "bosonic_gap": bos_gap,
                "bosonic_e0": float(bos.eigenvalues[0]),
                "atomic_gap": atomic_gap,
                "bosonic_vs_atomic_ratio": bos_gap / atomic_gap,
            }
        )
    factor = None
    if len(rows) >= 2:
        first, last = rows[0], rows[-1]
        if last["distinguishable_splitting"] > 0:
            factor = (
                first["distinguishable_splitting"]
                / last["distinguishable_splitting"]
            )
        else:
            factor = float("inf")
    return H2DemoReport(
        separations=[float(r) for r in separations],
        rows=rows,
        splitting_decrease_factor=factor,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# report emission


_CSV_COLUMNS = [
    "scale",
    "status",
    "min_nuclear_distance",
    "e0",
    "e1",
    "gap",
    "lambda0",
    "lambda1",
    "e_inf_0",
    "e_inf_1",
    "g_est",
    "gram_offdiagonal",
    "energy_offdiagonal",
    "schur_correction",
    "minmax_bound_1",
]

_PLOT_SCRIPT = """\
#!/usr/bin/env python3
# Gap-scan plots: run next to the emitted CSV.
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
rows = [r for r in csv.DictReader(open(path)) if r["status"] == "ok"]
scale = [float(r["scale"]) for r in rows]
e0 = [float(r["e0"]) for r in rows]
e1 = [float(r["e1"]) for r in rows]
gap = [float(r["gap"]) for r in rows]
einf0 = [float(r["e_inf_0"]) for r in rows]
einf1 = [float(r["e_inf_1"]) for r in rows]

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(scale, e0, "o-", label="E0")
ax1.plot(scale, e1, "s-", label="E1")
ax1.plot(scale, einf0, "--", label="E_inf,0")
ax1.plot(scale, einf1, ":", label="E_inf,1")
ax1.set_xlabel("separation scale")
ax1.set_ylabel("energy (a.u.)")
ax1.legend()
ax2.plot(scale, gap, "o-", label="E1 - E0")
ax2.axhline(einf1[-1] - einf0[-1], ls="--", c="gray", label="limit gap")
ax2.set_xlabel("separation scale")
ax2.set_ylabel("gap (a.u.)")
ax2.legend()
fig.tight_layout()
fig.savefig("{stem}.png", dpi=150)
print("wrote {stem}.png")
"""


def config_hash(cfg: ExperimentConfig) -> str:
    doc = json.loads(emit_config(cfg))
    doc.pop("output", None)
    canon = json.dumps(doc, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def emit_report(
    report,
    cfg: ExperimentConfig,
    out_dir,
    formats=None,
    stem: str = "scan",
) -> list[str]:
    """Write JSON (full fidelity), CSV (per-point table), and a plot script.

    Reruns with an identical config produce byte-identical JSON except for
    the timestamp field.
    """
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats = list(formats if formats is not None else cfg.output.formats)
    written: list[str] = []
    envelope = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config_hash": config_hash(cfg),
        "config": json.loads(emit_config(cfg)),
        "report": report.to_dict(),
    }
    if "json" in formats:
        path = out / f"{stem}.json"
        path.write_text(json.dumps(envelope, indent=2, sort_keys=True) + "\n")
        written.append(str(path))
    if "csv" in formats and isinstance(report, GapScanReport):
        lines = [",".join(_CSV_COLUMNS)]
        for pt in report.points:
            row = []
            for col in _CSV_COLUMNS:
                val = pt.get(col)
                row.append("" if val is None else repr(val) if not isinstance(val, str) else val)
            lines.append(",".join(row))
        path = out / f"{stem}.csv"
        path.write_text("\n".join(lines) + "\n")
        written.append(str(path))
    if "plot" in formats and isinstance(report, GapScanReport):
        path = out / f"plot_{stem}.py"
        path.write_text(
            _PLOT_SCRIPT.format(csv_name=f"{stem}.csv", stem=stem)
        )
        written.append(str(path))
    return written


# ---------------------------------------------------------------------------
# command line


def _load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    report = validate_config(cfg)
    for err in report.errors:
        print(f"error: {err}")
    for warn in report.warnings:
        print(f"warning: {warn}")
    if report.ok:
        print("config ok")
        return 0
    return 1


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args.config)
    op = assemble_full(cfg)
    subspace = projector_for(
        cfg.particles.statistics, cfg.particles.electron_count
    )
    rep = lowest_eigenpairs(
        op,
        k=args.k,
        subspace=subspace,
        tol=cfg.tolerances.solver,
        seed=args.seed,
        dense_oracle=args.dense_oracle,
    )
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "spectrum.json").write_text(rep.to_json() + "\n")
    print(f"eigenvalues: {list(map(float, rep.eigenvalues))}")
    if args.dump_vectors:
        spectra.save_vectors(str(out / "eigenvectors.bin"), rep.eigenvectors.T)
        print(f"wrote {out / 'eigenvectors.bin'}")
    print(f"wrote {out / 'spectrum.json'}")
    return 0 if all(rep.converged) else 2


def _cmd_thresholds(args) -> int:
    cfg = _load_config(args.config)
    threshold = args.threshold or clusters.suggest_threshold(cfg.nuclei)
    part = clusters.detect_partition(cfg.nuclei, threshold)
    table = clusters.build_threshold_table(
        cfg, part, seed=args.seed, dense_oracle=args.dense_oracle
    )
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "thresholds.json").write_text(table.to_json() + "\n")
    (out / "thresholds.txt").write_text(table.summary() + "\n")
    print(table.summary())
    lnc = clusters.check_local_neutrality(table)
    print(
        "local neutrality:",
        "holds" if lnc.holds else "violated for this instance",
        f"(margin {lnc.margin:+.6g})",
    )
    return 0


def _cmd_fsmap(args) -> int:
    cfg = _load_config(args.config)
    point = _scan_point(
        cfg,
        clusters.detect_partition(
            cfg.nuclei, args.threshold or clusters.suggest_threshold(cfg.nuclei)
        ),
        1.0,
        args.seed,
        {},
        args.dense_oracle,
    )
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fsmap.json").write_text(
        json.dumps(point.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    print(f"status: {point.status}")
    if point.status != "ok":
        print(point.error)
        return 2
    print(
        f"direct E0={point.e0:.10f} E1={point.e1:.10f} | "
        f"fixed points {point.lambda0:.10f} {point.lambda1:.10f}"
    )
    print(f"wrote {out / 'fsmap.json'}")
    return 0


def _cmd_ims_check(args) -> int:
    cfg = _load_config(args.config)
    part = clusters.detect_partition(
        cfg.nuclei, args.threshold or clusters.suggest_threshold(cfg.nuclei)
    )
    rmax = ims.max_cutoff_scale(part)
    scale = args.scale if args.scale is not None else max(1.0, 0.5 * rmax)
    family = ims.build_cutoffs(cfg, part, scale)
    op = assemble_full(cfg)
    defect = ims.ims_defect(op, family, seed=args.seed)
    pou = float(np.max(np.abs(family.sum_of_squares() - 1.0)))
    payload = {
        "scale": scale,
        "max_scale": rmax,
        "width": family.width,
        "partition_of_unity_error": pou,
        "max_grad_sq": family.max_grad_sq(),
        "gradient_bound_constant": family.gradient_bound_constant(),
        "defect": defect,
        "members": len(family.assignments),
    }
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ims.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    for key, val in payload.items():
        print(f"{key}: {val}")
    return 0


def _cmd_scan(args) -> int:
    cfg = _load_config(args.config)
    report = run_scan(
        cfg,
        seed=args.seed,
        dense_oracle=args.dense_oracle,
        workers=args.workers,
        log=print,
    )
    paths = emit_report(report, cfg, args.out)
    for p in paths:
        print(f"wrote {p}")
    failed = [p for p in report.points if p["status"] != "ok"]
    if failed:
        for p in failed:
            print(f"point {p['scale']}: {p['status']} ({p['error']})")
        return 2
    return 0


def _cmd_h2_demo(args) -> int:
    cfg = _load_config(args.config)
    seps = tuple(float(s) for s in args.separations.split(","))
    report = run_h2_demo(cfg, seps, seed=args.seed)
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "h2_demo.json"
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    for row in report.rows:
        print(
            f"r={row['separation']}: splitting={row['distinguishable_splitting']:.3e} "
            f"bosonic gap={row['bosonic_gap']:.6f} atomic gap={row['atomic_gap']:.6f}"
        )
    print(f"splitting decrease factor: {report.splitting_decrease_factor:.3g}")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bogap",
        description="Spectral-gap laboratory for separating molecular clusters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument(
            "--dense-oracle",
            action="store_true",
            help="force dense solves where tractable",
        )

    common(sub.add_parser("validate", help="check a config"))
    p = sub.add_parser("spectrum", help="lowest eigenpairs of the full operator")
    common(p)
    p.add_argument("--k", type=int, default=spectra.DEFAULT_EIGEN_COUNT)
    p.add_argument("--dump-vectors", action="store_true")
    p = sub.add_parser("thresholds", help="cluster threshold table")
    common(p)
    p.add_argument("--threshold", type=float, default=None)
    p = sub.add_parser("fsmap", help="fixed-point verification at one geometry")
    common(p)
    p.add_argument("--threshold", type=float, default=None)
    p = sub.add_parser("ims-check", help="partition-of-unity diagnostics")
    common(p)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--scale", type=float, default=None)
    common(sub.add_parser("scan", help="separation scan"))
    p = sub.add_parser("h2-demo", help="symmetrization degeneracy demo")
    common(p)
    p.add_argument("--separations", default="6,20")

    args = parser.parse_args(argv)
    handlers = {
        "validate": _cmd_validate,
        "spectrum": _cmd_spectrum,
        "thresholds": _cmd_thresholds,
        "fsmap": _cmd_fsmap,
        "ims-check": _cmd_ims_check,
        "scan": _cmd_scan,
        "h2-demo": _cmd_h2_demo,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (
        SolverError,
        DimensionBudgetError,
        SymmetrizerAnnihilation,
        fsmap.FamilyDegenerateError,
        fsmap.FsMapUndefinedError,
        fsmap.BracketError,
        fsmap.InnerSolveError,
        ims.ScaleConditionError,
    ) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
