"""Experiment configuration, read from YAML.

Example (all keys except ``body`` optional)::

    config_version: 1
    body: {kind: random, seed: 1, max_harmonic: 8, decay: 2.0, amplitude: 0.2}
    grid: 256
    controller: {safety: 0.5, dt_max: 0.01, area_floor: 1.0e-4}
    record_every: 10
    recenter: true
    monitors: [aff_iso, santalo, area, omega1_normalized, omega2, sigma_ratio, harnack]
    output: {dir: out, trajectory: trajectory.csv, plot: trajectory.dat, summary: summary.json,
             monitors: monitors.json}
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .body import DEFAULT_N, ConvexBody, make_ellipse, make_random_body
from .flow import StepController
from .spectral import resample

CONFIG_VERSION = 1
OUTPUT_ENV = "AFFINEFLOW_OUTPUT_DIR"
MONITORS = ("aff_iso", "santalo", "area", "omega1_normalized", "omega2", "sigma_ratio", "harnack")
BODY_DEFAULTS = {
    "ellipse": {"a": 1.0, "b": 1.0, "rot": 0.0},
    "random": {"seed": 1, "max_harmonic": 8, "decay": 2.0, "amplitude": 0.2},
    "file": {},
}


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    body: dict
    grid: int = DEFAULT_N
    controller: StepController = field(default_factory=StepController)
    record_every: int = 10
    recenter: bool = True
    monitors: tuple = MONITORS
    output_dir: Path = Path("out")
    trajectory_file: str = "trajectory.csv"
    plot_file: str = "trajectory.dat"
    summary_file: str = "summary.json"
    monitors_file: str = "monitors.json"
    config_version: int = CONFIG_VERSION

    @property
    def trajectory_path(self):
        return self.output_dir / self.trajectory_file

    @property
    def plot_path(self):
        return self.output_dir / self.plot_file

    @property
    def summary_path(self):
        return self.output_dir / self.summary_file

    @property
    def monitors_path(self):
        return self.output_dir / self.monitors_file


def _number(errors, where, value, kind=float, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{where}: expected a number, got {value!r}")
        return None
    if kind is int and int(value) != value:
        errors.append(f"{where}: expected an integer, got {value!r}")
        return None
    if positive and not value > 0:
        errors.append(f"{where}: must be positive, got {value!r}")
        return None
    return kind(value)


def parse_body_spec(raw, errors, where="body"):
    if not isinstance(raw, dict):
        errors.append(f"{where}: expected a mapping")
        return None
    kind = raw.get("kind")
    if kind not in BODY_DEFAULTS:
        errors.append(f"{where}.kind: must be one of {sorted(BODY_DEFAULTS)}, got {kind!r}")
        return None
    spec = {"kind": kind, **BODY_DEFAULTS[kind]}
    for key, value in raw.items():
        if key == "kind":
            continue
        if kind == "file" and key == "path":
            spec["path"] = str(value)
            continue
        if key not in BODY_DEFAULTS[kind]:
            errors.append(f"{where}.{key}: unknown key for a {kind} body")
            continue
        if kind == "random" and key in ("seed", "max_harmonic"):
            spec[key] = _number(errors, f"{where}.{key}", value, int)
        else:
            spec[key] = _number(errors, f"{where}.{key}", value, positive=key in ("a", "b"))
    if kind == "file" and "path" not in spec:
        errors.append(f"{where}.path: required for a file body")
    if kind == "random" and spec.get("max_harmonic") is not None and spec["max_harmonic"] < 2:
        errors.append(f"{where}.max_harmonic: must be >= 2")
    return spec


def build_body(spec, n=DEFAULT_N, halve=True):
    kind = spec["kind"]
    if kind == "ellipse":
        return make_ellipse(spec["a"], spec["b"], spec["rot"], n=n)
    if kind == "random":
        return make_random_body(spec["seed"], spec["max_harmonic"], spec["decay"], spec["amplitude"],
                                n=n, halve=halve)
    from .io import load_support

    samples = load_support(spec["path"]).samples
    if samples.size != n:
        samples = resample(samples, n)
    return ConvexBody.from_samples(samples)


def parse_config(raw, base_dir=None):
    """Validate a raw mapping into an :class:`ExperimentConfig`; raises ConfigError listing every bad field.

    Relative body file paths resolve against ``base_dir``; the output
    directory resolves against the working directory unless overridden by
    the AFFINEFLOW_OUTPUT_DIR environment variable.
    """
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError(["config: expected a mapping at top level"])
    known = {"config_version", "body", "grid", "controller", "record_every", "recenter", "monitors", "output"}
    for key in raw:
        if key not in known:
            errors.append(f"{key}: unknown key")
    version = raw.get("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        errors.append(f"config_version: unsupported version {version!r} (expected {CONFIG_VERSION})")
    if "body" not in raw:
        errors.append("body: required")
        body = None
    else:
        body = parse_body_spec(raw["body"], errors)
    grid = _number(errors, "grid", raw.get("grid", DEFAULT_N), int, positive=True)
    if grid is not None and (grid < 64 or grid & (grid - 1)):
        errors.append(f"grid: must be a power of two >= 64, got {grid}")
    ctrl_raw = raw.get("controller", {}) or {}
    ctrl_kw = {}
    if not isinstance(ctrl_raw, dict):
        errors.append("controller: expected a mapping")
    else:
        for key, value in ctrl_raw.items():
            if key not in ("safety", "dt_max", "area_floor"):
                errors.append(f"controller.{key}: unknown key")
                continue
            v = _number(errors, f"controller.{key}", value, positive=True)
            if v is not None:
                ctrl_kw[key] = v
        if ctrl_kw.get("safety", 0.5) > 1:
            errors.append("controller.safety: must lie in (0, 1]")
            ctrl_kw.pop("safety")
    record_every = _number(errors, "record_every", raw.get("record_every", 10), int, positive=True)
    recenter = raw.get("recenter", True)
    if not isinstance(recenter, bool):
        errors.append(f"recenter: expected true/false, got {recenter!r}")
    monitors = raw.get("monitors", list(MONITORS))
    if not isinstance(monitors, list) or any(m not in MONITORS for m in monitors):
        errors.append(f"monitors: expected a list drawn from {list(MONITORS)}")
    out = raw.get("output", {}) or {}
    if not isinstance(out, dict):
        errors.append("output: expected a mapping")
        out = {}
    for key in out:
        if key not in ("dir", "trajectory", "plot", "summary", "monitors"):
            errors.append(f"output.{key}: unknown key")
    if errors:
        raise ConfigError(errors)
    out_dir = Path(os.environ.get(OUTPUT_ENV) or out.get("dir", "out"))
    if body["kind"] == "file" and base_dir is not None and not Path(body["path"]).is_absolute():
        body["path"] = str(Path(base_dir) / body["path"])
    return ExperimentConfig(
        body=body,
        grid=grid,
        controller=StepController(**ctrl_kw),
        record_every=record_every,
        recenter=recenter,
        monitors=tuple(monitors),
        output_dir=out_dir,
        trajectory_file=out.get("trajectory", "trajectory.csv"),
        plot_file=out.get("plot", "trajectory.dat"),
        summary_file=out.get("summary", "summary.json"),
        monitors_file=out.get("monitors", "monitors.json"),
    )


def load_config(path):
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc.strerror}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"config: invalid YAML: {exc}"]) from exc
    return parse_config(raw, base_dir=path.parent)


def as_float_list(text, n_min, n_max, where):
    """Parse 'a,b[,c]' CLI values."""
    parts = [p for p in text.split(",") if p.strip()]
    if not n_min <= len(parts) <= n_max:
        raise ConfigError([f"{where}: expected {n_min}..{n_max} comma-separated numbers, got {text!r}"])
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError([f"{where}: not a number in {text!r}"]) from None

