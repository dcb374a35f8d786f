"""Flat key=value run configuration, with defaults for the standard experiments.

A config file is plain text, one `key = value` per line, '#' comments and
blank lines ignored.  Command-line overrides use the same key=value form.
List-valued keys take comma-separated entries.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError


@dataclass
class RunConfig:
    # spatial / temporal discretization
    domain_lower: float = -math.pi
    domain_upper: float = math.pi
    n_space: int = 420
    t_final: float = 1.0
    n_time: int = 250

    # fixed model coefficients
    drift: float = 0.0
    sigma2: float = 0.02

    # initial density (von Mises bump)
    init_center: float = 0.0
    init_concentration: float = 400.0

    # basis sweep: one fit per entry of n_theta_list
    n_theta_list: tuple = (3, 4, 5, 6, 7)
    centers_mode: str = "band"        # "band" (inside (band_lo, band_hi)) or "full"
    centers_lo: float = -1.0
    centers_hi: float = 1.0

    # optimizer
    alpha0: float = 0.1
    armijo_delta: float = 0.1
    step_init: float = 0.5
    step_shrink: float = 0.3
    max_shrinks: int = 30
    grad_tol: float = 1e-5
    max_iters: int = 500

    # objective / scheme details
    objective_floor: float = 1e-12
    boot_substeps: int = 10
    bdf2_xi: float = 2.0
    force_dt: bool = False
    aic_penalty: str = "log"         # log(n) penalty, or "classic" (n)

    # data source: exactly one of samples_csv / sim_kind
    samples_csv: str = ""
    sim_kind: str = ""                # "compound_poisson" | "bigamma"
    sim_rates: tuple = (3.0, 2.0, 1.0, 0.5, 0.25)
    sim_gamma_shape: float = 0.5
    sim_gamma_rate: float = 1.0
    sample_count: int = 100_000

    # reporting
    hist_bins: int = 40
    seed: int = 0
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        if self.centers_mode not in ("band", "full"):
            raise ConfigError("centers_mode must be 'band' or 'full'")
        if self.aic_penalty not in ("log", "classic"):
            raise ConfigError("aic_penalty must be 'log' or 'classic'")
        if self.sim_kind not in ("", "compound_poisson", "bigamma"):
            raise ConfigError(f"unknown sim_kind {self.sim_kind!r}")
        if not self.n_theta_list:
            raise ConfigError("n_theta_list must not be empty")
        if self.n_space < 4 or self.n_time < 2:
            raise ConfigError("grid too small")
        if self.sigma2 <= 0:
            raise ConfigError("sigma2 must be > 0")
        if self.hist_bins < 1:
            raise ConfigError("hist_bins must be >= 1")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, text: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind == "bool":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "tuple":
            if not text:
                return ()
            items = [t.strip() for t in text.split(",") if t.strip()]
            if key == "n_theta_list":
                return tuple(int(t) for t in items)
            return tuple(float(t) for t in items)
        return text
    except ValueError:
        raise ConfigError(f"bad value {text!r} for key {key!r}") from None


def parse_assignments(lines, source: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{source}: line {lineno} is not 'key = value'")
        key, value = text.split("=", 1)
        out[key.strip()] = _coerce(key.strip(), value)
    return out


def load_config(path=None, overrides=()) -> RunConfig:
    """Defaults, then file assignments, then key=value overrides."""
    values = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            values.update(parse_assignments(fh, source=str(path)))
    values.update(parse_assignments(list(overrides), source="<override>"))
    return RunConfig(**values).validate()


def config_from_dict(data: dict) -> RunConfig:
    """Rebuild a config from a report echo (lists arrive as JSON arrays)."""
    values = {}
    for key, val in data.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = tuple(val) if _FIELD_TYPES[key] == "tuple" else val
    return RunConfig(**values).validate()


def config_to_dict(config: RunConfig) -> dict:
    out = asdict(config)
    for key, val in out.items():
        if isinstance(val, tuple):
            out[key] = list(val)
    return out
