"""Configuration parsing and the run manifest.

Configs are plain text with [section] headers and key = value lines;
'#' starts a comment.  The manifest digest hashes the parsed key/value
pairs, so whitespace and comment edits do not change it.
"""

from __future__ import annotations

import configparser
import hashlib
import importlib.resources
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Tuple

from .basis import PeriodicSignal, signal_from_name
from .noise import ImpulseSource, LevyNoiseSpec
from .risk import ExperimentConfig
from .selection import GridParams

TOOL_VERSION = "0.1.0"


class ConfigError(ValueError):
    """Invalid or inconsistent configuration; maps to exit code 2."""


def bundled_config_path(name: str) -> Path:
    """Path of a configuration shipped with the package (e.g. 'reference.cfg')."""
    res = importlib.resources.files("levyshrink").joinpath("data", name)
    if not res.is_file():
        raise ConfigError(f"no bundled configuration named {name!r}")
    return Path(str(res))


def _parse_sources(text: str) -> Tuple[ImpulseSource, ...]:
    sources = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        fields = part.split()
        if len(fields) != 3:
            raise ConfigError(
                f"noise.sources entry {part!r} must be '<law> <intensity> <scale>'"
            )
        law, intensity, scale = fields
        try:
            sources.append(ImpulseSource(float(intensity), law, float(scale)))
        except ValueError as exc:
            raise ConfigError(f"noise.sources entry {part!r}: {exc}") from exc
    return tuple(sources)


@dataclass
class AppConfig:
    """Parsed and validated configuration for all CLI subcommands."""

    noise: LevyNoiseSpec
    signal: PeriodicSignal
    horizons: Tuple[int, ...]
    replicates: int
    eval_points: int
    dt: float
    seed: int
    sigma_lower: float
    sigma_upper: float
    r_n: Optional[float]          # None: ln(n + 1)
    delta: Optional[float]        # None: (3 + ln n)^-2
    grid: Optional[GridParams]    # None: reference grid per horizon
    n: int                        # horizon for single-path subcommands
    digest: str

    def experiment(self, replicates: Optional[int] = None,
                   seed: Optional[int] = None,
                   track_grid_risks: bool = False) -> ExperimentConfig:
        return ExperimentConfig(
            horizons=self.horizons,
            replicates=replicates if replicates is not None else self.replicates,
            eval_points=self.eval_points,
            dt=self.dt,
            noise=self.noise,
            signal=self.signal,
            sigma_lower=self.sigma_lower,
            sigma_upper=self.sigma_upper,
            r_n=self.r_n,
            delta=self.delta,
            grid=self.grid,
            seed=seed if seed is not None else self.seed,
            track_grid_risks=track_grid_risks,
        )


def _digest(parser: configparser.ConfigParser) -> str:
    items = []
    for section in sorted(parser.sections()):
        for key in sorted(parser[section]):
            value = " ".join(parser[section][key].split())
            items.append(f"{section}.{key}={value}")
    return hashlib.sha256("\n".join(items).encode()).hexdigest()[:16]


def parse_config(path) -> AppConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",),
                                       comment_prefixes=("#",))
    try:
        parser.read_string(path.read_text())
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    def get(section, key, cast, default=None, required=False):
        if not parser.has_option(section, key):
            if required:
                raise ConfigError(f"missing required key {section}.{key}")
            return default
        raw = parser[section][key]
        try:
            return cast(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value for {section}.{key}: {raw!r}") from exc

    if not parser.has_section("noise"):
        raise ConfigError("missing required section [noise]")
    sigma1 = get("noise", "sigma1", float, required=True)
    sigma2 = get("noise", "sigma2", float, required=True)
    sources = _parse_sources(get("noise", "sources", str, default=""))
    try:
        noise = LevyNoiseSpec(sigma1, sigma2, sources)
    except ValueError as exc:
        raise ConfigError(f"invalid [noise] section: {exc}") from exc

    name = get("signal", "name", str, default="reference") if parser.has_section("signal") else "reference"
    try:
        if name.startswith("csv:"):
            import numpy as np
            table = np.loadtxt(path.parent / name.split(":", 1)[1],
                               delimiter=",", comments="#", skiprows=1, ndmin=2)
            signal = PeriodicSignal.from_samples(table[:, 0], table[:, 1], label=name)
        else:
            signal = signal_from_name(name)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"invalid signal.name {name!r}: {exc}") from exc

    if not parser.has_section("grid"):
        raise ConfigError("missing required section [grid]")
    preset = get("grid", "preset", str, default=None)
    if preset == "reference":
        grid = None
    elif preset is None:
        grid = GridParams(
            k_n=get("grid", "k_n", float, required=True),
            rho_n=get("grid", "rho_n", float, required=True),
            sigma_bar=get("grid", "sigma_bar", float, required=True),
            m=get("grid", "m", int, default=None),
        )
    else:
        raise ConfigError(f"unknown grid.preset {preset!r}")

    sigma_lower = get("shrinkage", "sigma_lower", float, default=0.25)
    sigma_upper = get("shrinkage", "sigma_upper", float, default=0.5)
    r_raw = get("shrinkage", "r_n", str, default="log")
    r_n = None if r_raw == "log" else float(r_raw)
    if sigma_lower <= 0 or sigma_upper <= 0:
        raise ConfigError("shrinkage.sigma_lower and shrinkage.sigma_upper must be positive")
    if sigma_lower > noise.sigma1**2 + 1e-12:
        raise ConfigError(
            f"shrinkage.sigma_lower={sigma_lower} exceeds sigma1^2={noise.sigma1**2}"
        )
    if sigma_upper + 1e-12 < noise.sigma:
        raise ConfigError(
            f"shrinkage.sigma_upper={sigma_upper} is below the noise variance "
            f"sigma1^2 + sigma2^2 = {noise.sigma}"
        )

    horizons = tuple(
        int(v) for v in get("experiment", "horizons", str, default="100").split(",")
    )
    delta_raw = get("experiment", "delta", str, default="default")
    delta = None if delta_raw == "default" else float(delta_raw)
    if delta is not None and not (0 < delta < 0.5):
        raise ConfigError(f"experiment.delta must lie in (0, 1/2), got {delta}")
    dt = get("experiment", "dt", float, default=1e-3)
    if abs(round(1.0 / dt) * dt - 1.0) > 1e-9:
        raise ConfigError(f"experiment.dt={dt} does not divide the unit interval")

    return AppConfig(
        noise=noise,
        signal=signal,
        horizons=horizons,
        replicates=get("experiment", "replicates", int, default=200),
        eval_points=get("experiment", "eval_points", int, default=100_001),
        dt=dt,
        seed=get("experiment", "seed", int, default=20240901),
        sigma_lower=sigma_lower,
        sigma_upper=sigma_upper,
        r_n=r_n,
        delta=delta,
        grid=grid,
        n=get("experiment", "n", int, default=None) or horizons[0],
        digest=_digest(parser),
    )


@dataclass
class RunManifest:
    """Provenance stamp written at the top of every emitted CSV."""

    digest: str
    seed: int
    version: str = TOOL_VERSION
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    outputs: List[str] = field(default_factory=list)

    def header_lines(self) -> List[str]:
        return [
            f"# manifest: {self.digest} seed={self.seed} version={self.version}",
            f"# generated: {self.timestamp}",
        ]


def write_csv(target: Path, manifest: RunManifest, header: str, rows) -> None:
    lines = manifest.header_lines() + [header] + list(rows)
    target.write_text("\n".join(lines) + "\n")
    manifest.outputs.append(str(target))
