"""Run configurations, single-point evaluation and grid sweeps.

A configuration is a flat set of unit-suffixed keys. :func:`evaluate`
turns one configuration into one flat record; :func:`sweep` evaluates a
grid of configurations and returns the records in grid order.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import atmosphere, fisher, qstate, spectral

FIG1_WATER_PA = 0.0313 * atmosphere.STANDARD_ATMOSPHERE_PA

SHAPES = ("gaussian", "sech2", "skewnormal", "moments")
RESULT_COLUMNS = (
    "n_mean",
    "n_var",
    "f_q",
    "sigma_tphi_s",
    "sigma_tg_s",
    "sigma_tgvd_s",
    "sigma_L_m",
    "sigma_ratio",
    "error",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Inputs of one bound evaluation; defaults reproduce the reference scenario."""

    lambda0_m: float = 785e-9
    distance_m: float = 1000.0
    temperature_c: float = 24.0
    pressure_pa: float = atmosphere.STANDARD_ATMOSPHERE_PA
    co2_fraction: float = 0.0004
    water_partial_pa: float = FIG1_WATER_PA
    photons: float = 1e16
    noise_db: float = 0.0
    eta: float = 1.0
    shape: str = "gaussian"
    mu2_rel: float = 0.01
    beta: float = 3.0
    shape_a: float = 0.0
    centering: str = "mean"
    regime: str = "full"

    def __post_init__(self):
        try:
            atmosphere.index_sensitivities(atmosphere.wavenumber_from_omega(self.omega0))
        except ValueError as exc:
            raise ConfigError(f"lambda0_m={self.lambda0_m}: {exc}") from None
        if not 0 < self.mu2_rel <= 0.25:
            raise ConfigError(f"mu2_rel must lie in (0, 0.25], got {self.mu2_rel}")
        if not 0 <= self.eta <= 1:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")
        if not self.photons > 0:
            raise ConfigError(f"photons must be positive, got {self.photons}")
        if self.distance_m < 0:
            raise ConfigError(f"distance_m must be non-negative, got {self.distance_m}")
        if self.shape not in SHAPES:
            raise ConfigError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if self.shape == "moments" and self.beta < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")
        if self.centering not in [c.value for c in spectral.Centering]:
            raise ConfigError(f"centering must be 'mean' or 'mode', got {self.centering!r}")
        if self.regime not in [r.value for r in fisher.Regime]:
            raise ConfigError(f"regime must be 'full' or 'known', got {self.regime!r}")
        try:
            self.conditions
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def omega0(self) -> float:
        return atmosphere.omega_from_wavelength(self.lambda0_m)

    @property
    def conditions(self) -> atmosphere.AmbientConditions:
        return atmosphere.AmbientConditions(
            self.temperature_c, self.pressure_pa, self.co2_fraction, self.water_partial_pa
        )

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(key: str, value):
    types = {f.name: f.type for f in fields(RunConfig)}
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    if types[key] in (float, "float"):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} expects a number, got {value!r}") from None
    return str(value).strip()


def make_config(overrides: dict | None = None, base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    values = {k: _coerce(k, v) for k, v in (overrides or {}).items()}
    try:
        return replace(base, **values)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        values[key] = value
    return values


def shape_moments(config: RunConfig) -> spectral.MomentSet:
    """Spectral moments in rad/s about the carrier."""
    if config.shape == "moments":
        rel = spectral.MomentSet.symmetric(config.mu2_rel, config.beta)
    else:
        shape = spectral.make_shape(config.shape, config.mu2_rel, config.shape_a, config.centering)
        rel = spectral.moments_analytic(shape)
    return rel.rescaled(config.omega0)


def evaluate(config: RunConfig) -> dict:
    """All bounds for one configuration as a flat record (inputs first).

    Raises :class:`fisher.FisherError` when the information matrix cannot
    be inverted, including the zero-information state at ``eta = 0``.
    """
    omega0 = config.omega0
    state = qstate.prepare_state(config.photons, config.noise_db, config.eta)
    stats = qstate.statistics(state)
    if stats.n_mean <= 0:
        raise fisher.FisherError("zero-information state: no photons reach the detector")

    native = fisher.fim_from_moments(shape_moments(config), omega0, stats.n_mean, stats.f_q)
    cond = config.conditions
    jac = atmosphere.jacobian_analytic(
        config.distance_m, atmosphere.parameter_x(cond), cond.water_partial_pa, omega0
    )
    path = fisher.reparametrize(native, jac)
    regime = fisher.Regime(config.regime)

    record = config.as_dict()
    record.update(
        n_mean=stats.n_mean,
        n_var=stats.n_var,
        f_q=stats.f_q,
        sigma_tphi_s=fisher.bound(native, "t_phi", regime).sigma,
        sigma_tg_s=fisher.bound(native, "t_g", regime).sigma,
        sigma_tgvd_s=fisher.bound(native, "t_gvd", regime).sigma,
        sigma_L_m=fisher.bound(path, "L", regime).sigma,
        sigma_ratio=None,
        error=None,
    )
    return record


def evaluate_row(config: RunConfig) -> dict:
    """Like :func:`evaluate` but numerical rejections land in the ``error`` column."""
    try:
        return evaluate(config)
    except (fisher.FisherError, ValueError, ArithmeticError) as exc:
        record = config.as_dict()
        record.update({k: None for k in RESULT_COLUMNS})
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record


def index_report(config: RunConfig) -> dict:
    """Index of air, its dispersion combinations and the Jacobian constants."""
    omega0 = config.omega0
    cond = config.conditions
    x = atmosphere.parameter_x(cond)
    terms = atmosphere.index_spectral_derivatives(
        atmosphere.wavenumber_from_omega(omega0), x, cond.water_partial_pa
    )
    report = {
        "lambda0_m": config.lambda0_m,
        "temperature_c": config.temperature_c,
        "pressure_pa": config.pressure_pa,
        "co2_fraction": config.co2_fraction,
        "water_partial_pa": config.water_partial_pa,
        "X": x,
        "n_phase": terms.n,
        "n_group": terms.n + terms.first,
        "gvd_combination": terms.first + 0.5 * terms.second,
        "omega0_dn_domega": terms.first,
        "omega0sq_d2n_domega2": terms.second,
    }
    report.update({f"{k}_ns_per_m": v for k, v in atmosphere.jacobian_constants(omega0).items()})
    return report


# ---------------------------------------------------------------- sweeps

SWEEP_KINDS = ("shape", "skew", "loss", "custom")
# pseudo-axis mapped onto shape_a = delta / sqrt(1 - delta^2)
DELTA_AXIS = "delta"


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    log: bool = False

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError(f"axis {self.name} needs at least 2 points")
        if self.name != DELTA_AXIS and self.name not in RunConfig.keys():
            raise ConfigError(f"unknown sweep axis {self.name!r}")
        if self.log and (self.start <= 0 or self.stop <= 0):
            raise ConfigError(f"log axis {self.name} needs positive limits")

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name:start:stop:count[:log]``"""
        parts = text.split(":")
        if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] not in ("log", "lin")):
            raise ConfigError(f"axis must look like name:start:stop:count[:log], got {text!r}")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), len(parts) == 5 and parts[4] == "log")
        except ValueError as exc:
            raise ConfigError(f"bad axis {text!r}: {exc}") from None


@dataclass(frozen=True)
class SweepSpec:
    """Up to two grid axes, optionally repeated over a list of series values."""

    kind: str
    axes: tuple[Axis, ...]
    fixed: dict = field(default_factory=dict)
    series: tuple[str, tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep kind must be one of {SWEEP_KINDS}, got {self.kind!r}")
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep has one or two axes")

    def points(self) -> list[dict]:
        """Override dictionaries in grid order (series outermost)."""
        series = [{}] if self.series is None else [{self.series[0]: v} for v in self.series[1]]
        grids = [ax.values() for ax in self.axes]
        out = []
        for extra in series:
            for combo in np.array(np.meshgrid(*grids, indexing="ij")).reshape(len(grids), -1).T:
                point = dict(self.fixed)
                point.update(extra)
                for ax, value in zip(self.axes, combo):
                    value = float(value)
                    if ax.name == DELTA_AXIS:
                        point["shape_a"] = value / math.sqrt(1.0 - value * value)
                    else:
                        point[ax.name] = value
                out.append(point)
        return out


def default_sweep(kind: str) -> SweepSpec:
    """Default grid for a sweep kind; ``custom`` has no default."""
    if kind == "shape":
        return SweepSpec(
            "shape",
            (Axis("mu2_rel", 1e-4, 0.25, 20, log=True), Axis("beta", 1.5, 6.0, 20)),
            {"shape": "moments"},
            ("noise_db", (0.0, 3.0, 5.0, 10.0)),
        )
    if kind == "skew":
        return SweepSpec(
            "skew",
            (Axis("noise_db", 0.0, 10.0, 11), Axis(DELTA_AXIS, -0.95, 0.95, 39)),
            {"shape": "skewnormal", "mu2_rel": 0.01},
        )
    if kind == "loss":
        return SweepSpec(
            "loss",
            (Axis("eta", 0.01, 1.0, 100),),
            {"shape": "gaussian", "mu2_rel": 0.01},
            ("noise_db", (-10.0, -3.0, 0.0, 3.0, 10.0)),
        )
    raise ConfigError(f"sweep kind {kind!r} has no default grid; give --axis")


def _sweep_task(args):
    kind, config = args
    record = evaluate_row(config)
    if kind == "skew" and record["error"] is None:
        reference = evaluate_row(replace(config, shape="gaussian", shape_a=0.0))
        if reference["error"] is None:
            record["sigma_ratio"] = record["sigma_L_m"] / reference["sigma_L_m"]
        else:
            record["error"] = f"reference: {reference['error']}"
    return record


def sweep(spec: SweepSpec, base: RunConfig | None = None, jobs: int = 1) -> list[dict]:
    """Evaluate every grid point; rows come back in grid order whatever ``jobs`` is."""
    configs = [make_config(p, base) for p in spec.points()]
    tasks = [(spec.kind, c) for c in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_sweep_task(t) for t in tasks]


# ---------------------------------------------------------------- output

def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, int, np.floating, np.integer)) and not isinstance(value, bool):
        return format(float(value), ".12g")
    return str(value)


def table_columns() -> tuple[str, ...]:
    return RunConfig.keys() + RESULT_COLUMNS


def to_csv(records: list[dict], columns: tuple[str, ...] | None = None) -> str:
    columns = columns or table_columns()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([format_value(rec.get(c)) for c in columns])
    return buf.getvalue()


def to_json(records: list[dict], columns: tuple[str, ...] | None = None) -> str:
    columns = columns or table_columns()
    rows = [{c: format_value(rec.get(c)) for c in columns} for rec in records]
    return json.dumps(rows, indent=1) + "\n"
