"""Domain configuration: particles, nuclei, grid, tolerances, scan schedule.

Configs are plain JSON documents with a fixed schema (see README).  All
physical quantities are in atomic units (hbar = m_e = e = 1 by default).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = [
    "ConfigError",
    "ModelParams",
    "NuclearConfiguration",
    "ParticleSystem",
    "Tolerances",
    "ScanSettings",
    "OutputSettings",
    "ExperimentConfig",
    "ValidationReport",
    "parse_config",
    "emit_config",
    "validate_config",
]

MAX_ELECTRONS = 3  # tensor dimension n^N must stay buildable at desk scale


class ConfigError(ValueError):
    """Raised for malformed or out-of-range configuration documents."""


@dataclass(frozen=True)
class ModelParams:
    """Grid and model parameters; immutable after construction."""

    electron_mass: float = 1.0
    charge_unit: float = 1.0
    softening: float = 1.0       # a in v(r) = q1*q2 / sqrt(r^2 + a^2)
    grid_extent: float = 40.0    # L; domain is [-L, L]
    grid_points: int = 321       # n per axis
    stencil_order: int = 2       # {2, 4}

    def __post_init__(self):
        if self.electron_mass <= 0:
            raise ConfigError("electron_mass must be positive")
        if self.charge_unit <= 0:
            raise ConfigError("charge_unit must be positive")
        if self.softening <= 0:
            raise ConfigError("softening must be positive")
        if self.grid_extent <= 0:
            raise ConfigError("grid_extent must be positive")
        if self.grid_points < 16:
            raise ConfigError("grid_points must be >= 16")
        if self.stencil_order not in (2, 4):
            raise ConfigError("stencil_order must be 2 or 4")

    @property
    def spacing(self) -> float:
        return 2.0 * self.grid_extent / (self.grid_points - 1)


@dataclass(frozen=True)
class NuclearConfiguration:
    positions: tuple[float, ...]
    charges: tuple[int, ...]
    include_nuclear_repulsion: bool = True

    def __post_init__(self):
        if len(self.positions) != len(self.charges):
            raise ConfigError("positions and charges must have equal length")
        if len(self.positions) < 1:
            raise ConfigError("at least one nucleus required")
        if any(int(z) != z or z <= 0 for z in self.charges):
            raise ConfigError("charges must be positive integers")
        m = len(self.positions)
        for i in range(m):
            for j in range(i + 1, m):
                if self.positions[i] == self.positions[j]:
                    raise ConfigError("positions pairwise distinct")

    @property
    def nucleus_count(self) -> int:
        return len(self.positions)

    @property
    def total_charge(self) -> int:
        return int(sum(self.charges))

    def min_separation(self) -> float | None:
        """Least distance between nuclei; None (undefined) for a single nucleus."""
        m = len(self.positions)
        if m < 2:
            return None
        return min(
            abs(self.positions[i] - self.positions[j])
            for i in range(m)
            for j in range(i + 1, m)
        )


@dataclass(frozen=True)
class ParticleSystem:
    electron_count: int
    statistics: str = "bosonic"  # {bosonic, distinguishable, fermionic}

    def __post_init__(self):
        if self.electron_count < 1:
            raise ConfigError("electron_count must be >= 1")
        if self.electron_count > MAX_ELECTRONS:
            raise ConfigError(
                f"electron_count must be <= {MAX_ELECTRONS} at desk scale"
            )
        if self.statistics not in ("bosonic", "distinguishable", "fermionic"):
            raise ConfigError(
                "statistics must be one of bosonic, distinguishable, fermionic"
            )


@dataclass(frozen=True)
class Tolerances:
    solver: float = 1e-8           # eigenpair residual target
    degeneracy: float | None = None  # absolute; None -> 1e-8 * |E0| at use site
    gram_floor: float = 1e-8       # smallest admissible Gram eigenvalue
    cg: float = 1e-10              # relative residual of the inner FS solves
    fixed_point: float = 1e-10     # relative tolerance on FS fixed points
    ionic_minimizer: float = 1e-3  # argmin slack when collecting ionic minimizers

    def __post_init__(self):
        for name in ("solver", "gram_floor", "cg", "fixed_point", "ionic_minimizer"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"tolerance '{name}' must be strictly positive")
        if self.degeneracy is not None and self.degeneracy <= 0:
            raise ConfigError("tolerance 'degeneracy' must be strictly positive")

    def degeneracy_for(self, e0: float) -> float:
        return self.degeneracy if self.degeneracy is not None else 1e-8 * max(abs(e0), 1.0)


@dataclass(frozen=True)
class ScanSettings:
    """Separation schedule: scale factors applied to the base nuclear layout."""

    factors: tuple[float, ...]
    cluster_threshold: float | None = None  # distance threshold D; None -> heuristic

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ConfigError("scan.factors must be nonempty")
        if any(b <= a for a, b in zip(self.factors, self.factors[1:])):
            raise ConfigError("scan factors strictly increasing")
        if self.cluster_threshold is not None and self.cluster_threshold <= 0:
            raise ConfigError("scan.cluster_threshold must be positive")


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"
    formats: tuple[str, ...] = ("json", "csv", "plot")

    def __post_init__(self):
        for f in self.formats:
            if f not in ("json", "csv", "plot"):
                raise ConfigError(f"unknown output format '{f}'")


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    nuclei: NuclearConfiguration
    particles: ParticleSystem
    scan: ScanSettings | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSettings = field(default_factory=OutputSettings)

    @property
    def neutral(self) -> bool:
        return self.particles.electron_count == self.nuclei.total_charge

    @property
    def dimension(self) -> int:
        return self.model.grid_points ** self.particles.electron_count


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


# JSON schema: section -> {key: (required, parser)}.  Unknown keys rejected.

def _num(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"expected a number, got {x!r}")
    return float(x)


def _int(x):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"expected an integer, got {x!r}")
    return x


def _bool(x):
    if not isinstance(x, bool):
        raise ConfigError(f"expected a boolean, got {x!r}")
    return x


def _str(x):
    if not isinstance(x, str):
        raise ConfigError(f"expected a string, got {x!r}")
    return x


def _num_list(x):
    if not isinstance(x, list) or not x:
        raise ConfigError(f"expected a nonempty list of numbers, got {x!r}")
    return tuple(_num(v) for v in x)


def _int_list(x):
    if not isinstance(x, list) or not x:
        raise ConfigError(f"expected a nonempty list of integers, got {x!r}")
    return tuple(_int(v) for v in x)


def _str_list(x):
    if not isinstance(x, list):
        raise ConfigError(f"expected a list of strings, got {x!r}")
    return tuple(_str(v) for v in x)


def _opt(parser):
    return lambda x: None if x is None else parser(x)


_SCHEMA = {
    "model": {
        "electron_mass": _num,
        "charge_unit": _num,
        "softening": _num,
        "grid_extent": _num,
        "grid_points": _int,
        "stencil_order": _int,
    },
    "nuclei": {
        "positions": _num_list,
        "charges": _int_list,
        "include_nuclear_repulsion": _bool,
    },
    "particles": {
        "electron_count": _int,
        "statistics": _str,
    },
    "scan": {
        "factors": _num_list,
        "cluster_threshold": _opt(_num),
    },
    "tolerances": {
        "solver": _num,
        "degeneracy": _opt(_num),
        "gram_floor": _num,
        "cg": _num,
        "fixed_point": _num,
        "ionic_minimizer": _num,
    },
    "output": {
        "directory": _str,
        "formats": _str_list,
    },
}

_REQUIRED = {
    "nuclei": ("positions", "charges"),
    "particles": ("electron_count",),
    "scan": ("factors",),
}

_SECTION_TYPES = {
    "model": ModelParams,
    "nuclei": NuclearConfiguration,
    "particles": ParticleSystem,
    "scan": ScanSettings,
    "tolerances": Tolerances,
    "output": OutputSettings,
}


def _parse_section(name: str, raw: dict):
    schema = _SCHEMA[name]
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be an object")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {sorted(unknown)}")
    for key in _REQUIRED.get(name, ()):
        if key not in raw:
            raise ConfigError(f"missing required field '{name}.{key}'")
    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = schema[key](value)
        except ConfigError as exc:
            raise ConfigError(f"field '{name}.{key}': {exc}") from None
    return _SECTION_TYPES[name](**kwargs)


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON configuration document into an ExperimentConfig.

    Defaults are applied for absent optional fields; unknown keys are
    rejected.  Raises ConfigError with the position for syntax errors and
    with the offending field for schema/invariant violations.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ConfigError("top-level document must be an object")
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level section(s): {sorted(unknown)}")
    for section in ("nuclei", "particles"):
        if section not in raw:
            raise ConfigError(f"missing required section '{section}'")
    sections = {name: _parse_section(name, raw[name]) for name in raw}
    return ExperimentConfig(
        model=sections.get("model", ModelParams()),
        nuclei=sections["nuclei"],
        particles=sections["particles"],
        scan=sections.get("scan"),
        tolerances=sections.get("tolerances", Tolerances()),
        output=sections.get("output", OutputSettings()),
    )


def emit_config(cfg: ExperimentConfig) -> str:
    """Serialize a config back to canonical JSON (inverse of parse_config)."""
    doc: dict = {
        "model": {
            "electron_mass": cfg.model.electron_mass,
            "charge_unit": cfg.model.charge_unit,
            "softening": cfg.model.softening,
            "grid_extent": cfg.model.grid_extent,
            "grid_points": cfg.model.grid_points,
            "stencil_order": cfg.model.stencil_order,
        },
        "nuclei": {
            "positions": list(cfg.nuclei.positions),
            "charges": list(cfg.nuclei.charges),
            "include_nuclear_repulsion": cfg.nuclei.include_nuclear_repulsion,
        },
        "particles": {
            "electron_count": cfg.particles.electron_count,
            "statistics": cfg.particles.statistics,
        },
        "tolerances": {
            "solver": cfg.tolerances.solver,
            "degeneracy": cfg.tolerances.degeneracy,
            "gram_floor": cfg.tolerances.gram_floor,
            "cg": cfg.tolerances.cg,
            "fixed_point": cfg.tolerances.fixed_point,
            "ionic_minimizer": cfg.tolerances.ionic_minimizer,
        },
        "output": {
            "directory": cfg.output.directory,
            "formats": list(cfg.output.formats),
        },
    }
    if cfg.scan is not None:
        doc["scan"] = {
            "factors": list(cfg.scan.factors),
            "cluster_threshold": cfg.scan.cluster_threshold,
        }
    return json.dumps(doc, indent=2, sort_keys=True)


def validate_config(cfg: ExperimentConfig) -> ValidationReport:
    """Pure physical-sanity check; identical configs yield identical reports.

    Hard errors are invariant violations not already rejected at parse time;
    warnings flag configurations whose physics makes the experiment moot
    (no bound state expected, non-neutral runs).
    """
    report = ValidationReport()
    n_elec = cfg.particles.electron_count
    z_total = cfg.nuclei.total_charge
    m = cfg.nuclei.nucleus_count

    r_min = cfg.nuclei.min_separation()
    if r_min is None:
        report.warnings.append("R(y) undefined for a single nucleus (M=1)")
    elif r_min <= 0:
        report.errors.append("positions pairwise distinct")

    if cfg.dimension > 64_000_000:
        report.errors.append(
            f"tensor dimension n^N = {cfg.dimension} exceeds desk-scale budget"
        )

    # Bound-state count filter: a molecule with total nuclear charge Z and M
    # nuclei binds strictly fewer than 2Z + M electrons, so N >= 2Z + M means
    # no bound ground state is expected.  Never fires for N <= Z.
    if n_elec >= 2 * z_total + m:
        report.warnings.append(
            f"N >= 2Z+M ({n_elec} >= {2 * z_total + m}): binding not expected"
        )
    if n_elec < z_total:
        report.warnings.append("non-neutral (cation)")
    elif n_elec > z_total:
        report.warnings.append("non-neutral (anion)")

    if cfg.scan is not None:
        largest = max(cfg.scan.factors)
        span = max(abs(p) for p in cfg.nuclei.positions) if m > 1 else 0.0
        if span * largest >= cfg.model.grid_extent:
            report.warnings.append(
                "largest scan geometry reaches the box boundary; increase grid_extent"
            )
    return report
