"""Experiment configs and the sweep commands behind the CLI.

Configs are flat ``key = value`` text (``#`` starts a comment, lists are
comma-separated).  Each experiment accepts a fixed key set; anything
else is rejected with a line diagnostic.  ``render_config`` writes the
canonical form back out, and that same canonical block is what lands in
every output file's metadata, so an emitted file doubles as the config
that reproduces it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .hilbert import FockSpace
from .model import (
    BRANCH_MINUS,
    HarmonicityError,
    ModelParams,
    approx_rabi_eigenstate,
    dispersive_spectrum,
    rabi_ground_state,
    rabi_spectrum,
)
from .openquantum import NoiseConfig, run_jitter_ensemble, run_noisy_protocol
from .protocol import (
    DISPERSIVE_NUMERIC,
    NUMERIC_VARIANTS,
    VARIANTS,
    ProtocolConfig,
    run_protocol,
)
from .squeezing import QuadratureVariances, bare_mode_variances, squeezing_db

EXPERIMENTS = (
    "spectrum",
    "ground-squeezing",
    "protocol",
    "noisy-protocol",
    "jitter-ensemble",
)

PROTOCOL_FAMILY = ("protocol", "noisy-protocol", "jitter-ensemble")
PROTOCOL_COLUMNS = ["n_cycle", "s_db", "s_stderr_db", "variant",
                    "gamma_per_dt_plus", "jitter_rel"]


class ConfigError(ValueError):
    """Bad config file, bad override, or bad parameter combination."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's resolved parameters (after file + overrides)."""

    experiment: str
    g_over_omega: tuple[float, ...] = (0.1,)
    delta_over_omega: tuple[float, ...] = (2.0,)
    levels: int = 4
    cycles: int = 10
    fock_dim: int = 60
    steps: int = 200
    gamma: float = 0.01
    jitter_rel: tuple[float, ...] = (0.0,)
    jitter_per_interval: bool = True
    ensemble_size: int = 100
    seed: int = 12345
    variants: tuple[str, ...] = (DISPERSIVE_NUMERIC,)
    out_path: str | None = None
    out_format: str = "csv"


@dataclass(frozen=True)
class _Field:
    parse: Callable[[str], object]
    default: object


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}") from None


def _parse_int(raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"not an integer: {raw!r}") from None


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {raw!r}")


def _parse_floats(raw: str) -> tuple[float, ...]:
    toks = [tok.strip() for tok in raw.split(",") if tok.strip()]
    if not toks:
        raise ConfigError("empty list")
    return tuple(_parse_float(tok) for tok in toks)


def _parse_names(raw: str) -> tuple[str, ...]:
    toks = [tok.strip() for tok in raw.split(",") if tok.strip()]
    if not toks:
        raise ConfigError("empty list")
    return tuple(toks)


_G_SWEEP = tuple(round(0.01 * k, 10) for k in range(1, 11))

_SCHEMAS: dict[str, dict[str, _Field]] = {
    "spectrum": {
        "g_over_omega": _Field(_parse_floats, (0.1,)),
        "delta_over_omega": _Field(
            _parse_floats, (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0)
        ),
        "levels": _Field(_parse_int, 4),
        "fock_dim": _Field(_parse_int, 60),
    },
    "ground-squeezing": {
        "g_over_omega": _Field(_parse_floats, _G_SWEEP),
        "delta_over_omega": _Field(_parse_floats, (2.0, 5.0, 10.0)),
        "fock_dim": _Field(_parse_int, 60),
    },
    "protocol": {
        "g_over_omega": _Field(_parse_floats, (0.1,)),
        "delta_over_omega": _Field(_parse_floats, (2.0,)),
        "cycles": _Field(_parse_int, 10),
        "fock_dim": _Field(_parse_int, 60),
        "variants": _Field(_parse_names, VARIANTS),
    },
    "noisy-protocol": {
        "g_over_omega": _Field(_parse_floats, (0.1,)),
        "delta_over_omega": _Field(_parse_floats, (2.0,)),
        "cycles": _Field(_parse_int, 10),
        "fock_dim": _Field(_parse_int, 60),
        "steps": _Field(_parse_int, 200),
        "gamma": _Field(_parse_float, 0.01),
        "jitter_rel": _Field(_parse_floats, (0.0,)),
        "jitter_per_interval": _Field(_parse_bool, True),
        "seed": _Field(_parse_int, 12345),
        "variants": _Field(_parse_names, (DISPERSIVE_NUMERIC,)),
    },
    "jitter-ensemble": {
        "g_over_omega": _Field(_parse_floats, (0.1,)),
        "delta_over_omega": _Field(_parse_floats, (2.0,)),
        "cycles": _Field(_parse_int, 10),
        "fock_dim": _Field(_parse_int, 30),
        "steps": _Field(_parse_int, 60),
        "gamma": _Field(_parse_float, 0.01),
        "jitter_rel": _Field(_parse_floats, (0.0, 0.01, 0.1)),
        "jitter_per_interval": _Field(_parse_bool, True),
        "ensemble_size": _Field(_parse_int, 100),
        "seed": _Field(_parse_int, 12345),
        "variants": _Field(_parse_names, (DISPERSIVE_NUMERIC,)),
    },
}


def _iter_entries(text: str, source: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        yield lineno, key.strip(), value.strip()


def parse_config_text(text: str, experiment: str,
                      source: str = "<config>") -> dict[str, object]:
    """Typed key/value map from one config file; rejects unknown keys."""
    schema = _schema_for(experiment)
    seen: dict[str, int] = {}
    values: dict[str, object] = {}
    for lineno, key, raw in _iter_entries(text, source):
        if key not in schema:
            raise ConfigError(
                f"{source}:{lineno}: unknown key {key!r} for experiment "
                f"{experiment!r}; allowed: {', '.join(sorted(schema))}"
            )
        if key in seen:
            raise ConfigError(
                f"{source}:{lineno}: duplicate key {key!r} (first set on line "
                f"{seen[key]})"
            )
        seen[key] = lineno
        try:
            values[key] = schema[key].parse(raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    return values


def _schema_for(experiment: str) -> dict[str, _Field]:
    if experiment not in _SCHEMAS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; pick from {', '.join(EXPERIMENTS)}"
        )
    return _SCHEMAS[experiment]


def build_config(experiment: str, config_text: str | None,
                 overrides: Sequence[str] = (),
                 source: str = "<config>") -> ExperimentConfig:
    """Resolve defaults, then the config file, then --set overrides."""
    schema = _schema_for(experiment)
    values = {key: field.default for key, field in schema.items()}
    if config_text is not None:
        values.update(parse_config_text(config_text, experiment, source))
    for i, item in enumerate(overrides, start=1):
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"--set #{i}: expected KEY=VALUE, got {item!r}")
        if key not in schema:
            raise ConfigError(
                f"--set #{i}: unknown key {key!r} for experiment {experiment!r}; "
                f"allowed: {', '.join(sorted(schema))}"
            )
        try:
            values[key] = schema[key].parse(raw.strip())
        except ConfigError as exc:
            raise ConfigError(f"--set #{i}: {key}: {exc}") from None
    cfg = ExperimentConfig(experiment=experiment, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if any(g < 0 for g in cfg.g_over_omega):
        raise ConfigError(f"g_over_omega must be >= 0, got {cfg.g_over_omega}")
    if any(d <= 0 for d in cfg.delta_over_omega):
        raise ConfigError(
            f"delta_over_omega must be > 0, got {cfg.delta_over_omega}"
        )
    if cfg.fock_dim < 2:
        raise ConfigError(f"fock_dim must be >= 2, got {cfg.fock_dim}")
    if cfg.levels < 1:
        raise ConfigError(f"levels must be >= 1, got {cfg.levels}")
    if cfg.cycles < 0:
        raise ConfigError(f"cycles must be >= 0, got {cfg.cycles}")
    if cfg.steps < 1:
        raise ConfigError(f"steps must be >= 1, got {cfg.steps}")
    if cfg.gamma < 0:
        raise ConfigError(f"gamma must be >= 0, got {cfg.gamma}")
    if any(j < 0 for j in cfg.jitter_rel):
        raise ConfigError(f"jitter_rel must be >= 0, got {cfg.jitter_rel}")
    if cfg.ensemble_size < 1:
        raise ConfigError(f"ensemble_size must be >= 1, got {cfg.ensemble_size}")
    if cfg.seed < 0:
        raise ConfigError(f"seed must be >= 0, got {cfg.seed}")
    bad = [v for v in cfg.variants if v not in VARIANTS]
    if bad:
        raise ConfigError(f"unknown variants {bad}; pick from {VARIANTS}")
    if cfg.experiment in ("spectrum", *PROTOCOL_FAMILY):
        if len(cfg.g_over_omega) != 1:
            raise ConfigError(
                f"{cfg.experiment} takes exactly one g_over_omega value, got "
                f"{len(cfg.g_over_omega)}"
            )
    if cfg.experiment in PROTOCOL_FAMILY:
        if len(cfg.delta_over_omega) != 1:
            raise ConfigError(
                f"{cfg.experiment} takes exactly one delta_over_omega value, got "
                f"{len(cfg.delta_over_omega)}"
            )
    if cfg.experiment in ("noisy-protocol", "jitter-ensemble"):
        slow = [v for v in cfg.variants if v not in NUMERIC_VARIANTS]
        if slow:
            raise ConfigError(
                f"{cfg.experiment} needs numeric variants, got {slow}; pick from "
                f"{NUMERIC_VARIANTS}"
            )
    if cfg.experiment == "noisy-protocol" and len(cfg.jitter_rel) != 1:
        raise ConfigError(
            f"noisy-protocol takes exactly one jitter_rel value, got "
            f"{len(cfg.jitter_rel)}; sweep jitter with jitter-ensemble"
        )
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.out_format!r}")


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: ExperimentConfig) -> str:
    """Canonical config text; parsing it back reproduces cfg exactly."""
    schema = _schema_for(cfg.experiment)
    lines = [f"{key} = {_format_value(getattr(cfg, key))}" for key in schema]
    return "\n".join(lines) + "\n"


def config_metadata(cfg: ExperimentConfig, version: str) -> dict[str, str]:
    meta = {"experiment": cfg.experiment, "version": version}
    for key in _schema_for(cfg.experiment):
        meta[key] = _format_value(getattr(cfg, key))
    return meta


@dataclass
class Dataset:
    """Rows plus the metadata block that reproduces them."""

    metadata: dict[str, str]
    columns: list[str]
    rows: list[tuple]


def _dataset(cfg: ExperimentConfig, columns: list[str],
             rows: list[tuple]) -> Dataset:
    from rabisqueeze import __version__

    return Dataset(config_metadata(cfg, __version__), columns, rows)


def cmd_spectrum(cfg: ExperimentConfig) -> Dataset:
    """Lowest Rabi levels vs their closed-form dispersive estimates."""
    space = FockSpace(cfg.fock_dim)
    g = cfg.g_over_omega[0]
    rows: list[tuple] = []
    for delta in cfg.delta_over_omega:
        p = ModelParams.from_ratios(g_over_omega=g, delta_over_omega=delta)
        exact = rabi_spectrum(p, space).values[: cfg.levels]
        estimates = dispersive_spectrum(p, n_max=cfg.levels)[: cfg.levels]
        for level, (e_rabi, est) in enumerate(zip(exact, estimates)):
            err = abs(float(e_rabi) - est.energy)
            rows.append((delta, level, float(e_rabi), est.energy, err))
    return _dataset(
        cfg,
        ["delta_over_omega", "level", "e_rabi_over_omega", "e_disp_over_omega",
         "abs_error_over_omega"],
        rows,
    )


def _branch_squeezing_db(r: float) -> float:
    v = QuadratureVariances(var_x=math.exp(2.0 * r), var_p=math.exp(-2.0 * r))
    return squeezing_db(v).s_db


def cmd_ground_squeezing(cfg: ExperimentConfig) -> Dataset:
    """Squeezing of the four ground-state descriptions over a (g, detuning) grid.

    Points where the lowered branch stops being harmonic are kept as rows
    with empty values and the reason in the status column.
    """
    space = FockSpace(cfg.fock_dim)
    rows: list[tuple] = []
    for delta in cfg.delta_over_omega:
        for g in cfg.g_over_omega:
            try:
                p = ModelParams.from_ratios(g_over_omega=g, delta_over_omega=delta)
            except HarmonicityError as exc:
                rows.append((g, delta, None, None, None, None, f"skipped: {exc}"))
                continue
            s_minus = _branch_squeezing_db(p.r_minus)
            s_plus = _branch_squeezing_db(p.r_plus)
            approx = approx_rabi_eigenstate(p, BRANCH_MINUS, space)
            s_approx = squeezing_db(bare_mode_variances(approx)).s_db
            exact = rabi_ground_state(p, space)
            s_exact = squeezing_db(bare_mode_variances(exact)).s_db
            rows.append((g, delta, s_minus, s_plus, s_approx, s_exact, "ok"))
    return _dataset(
        cfg,
        ["g_over_omega", "delta_over_omega", "s_disp_minus_db", "s_disp_plus_db",
         "s_rabi_approx_db", "s_rabi_exact_db", "status"],
        rows,
    )


def _model_point(cfg: ExperimentConfig) -> ModelParams:
    return ModelParams.from_ratios(
        g_over_omega=cfg.g_over_omega[0],
        delta_over_omega=cfg.delta_over_omega[0],
    )


def cmd_protocol(cfg: ExperimentConfig) -> Dataset:
    """Noiseless squeezing growth per cycle for each requested variant."""
    space = FockSpace(cfg.fock_dim)
    p = _model_point(cfg)
    rows: list[tuple] = []
    for variant in cfg.variants:
        pc = ProtocolConfig(params=p, cycles=cfg.cycles, variant=variant)
        trace = run_protocol(pc, space)
        for n, s in enumerate(trace.s_db_curve()):
            rows.append((n, float(s), 0.0, variant, 0.0, 0.0))
    return _dataset(cfg, PROTOCOL_COLUMNS, rows)


def cmd_noisy_protocol(cfg: ExperimentConfig) -> Dataset:
    """Single density-matrix run per variant with photon loss (and jitter)."""
    space = FockSpace(cfg.fock_dim)
    p = _model_point(cfg)
    jitter = cfg.jitter_rel[0]
    noise = NoiseConfig(
        gamma=cfg.gamma,
        jitter_rel=jitter,
        rng_seed=cfg.seed,
        jitter_per_interval=cfg.jitter_per_interval,
    )
    rows: list[tuple] = []
    for variant in cfg.variants:
        pc = ProtocolConfig(params=p, cycles=cfg.cycles, variant=variant)
        trace = run_noisy_protocol(pc, noise, space, steps=cfg.steps)
        for n, s in enumerate(trace.s_db_curve()):
            rows.append((n, float(s), 0.0, variant, cfg.gamma, jitter))
    return _dataset(cfg, PROTOCOL_COLUMNS, rows)


def cmd_jitter_ensemble(cfg: ExperimentConfig) -> Dataset:
    """Mean and standard error of the squeezing over jittered noisy runs.

    One ensemble per (variant, jitter_rel) pair, all from the same seed;
    jitter_rel = 0 rows are the loss-only reference curve.
    """
    space = FockSpace(cfg.fock_dim)
    p = _model_point(cfg)
    rows: list[tuple] = []
    for variant in cfg.variants:
        pc = ProtocolConfig(params=p, cycles=cfg.cycles, variant=variant)
        for jitter in cfg.jitter_rel:
            noise = NoiseConfig(
                gamma=cfg.gamma,
                jitter_rel=jitter,
                ensemble_size=cfg.ensemble_size,
                rng_seed=cfg.seed,
                jitter_per_interval=cfg.jitter_per_interval,
            )
            report = run_jitter_ensemble(pc, noise, space, steps=cfg.steps)
            for n in range(cfg.cycles + 1):
                rows.append((n, float(report.mean_s_db[n]),
                             float(report.stderr_s_db[n]), variant, cfg.gamma,
                             jitter))
    return _dataset(cfg, PROTOCOL_COLUMNS, rows)


COMMANDS: dict[str, Callable[[ExperimentConfig], Dataset]] = {
    "spectrum": cmd_spectrum,
    "ground-squeezing": cmd_ground_squeezing,
    "protocol": cmd_protocol,
    "noisy-protocol": cmd_noisy_protocol,
    "jitter-ensemble": cmd_jitter_ensemble,
}


def run_experiment(cfg: ExperimentConfig) -> Dataset:
    return COMMANDS[cfg.experiment](cfg)


def with_output(cfg: ExperimentConfig, out_path: str | None,
                out_format: str) -> ExperimentConfig:
    cfg = replace(cfg, out_path=out_path, out_format=out_format)
    _validate(cfg)
    return cfg
