"""JSON experiment configuration.

Schema (all sections optional except where noted)::

    {
      "dissipation": {
        "lambda": [1, 0, 0],              # ratio; normalized on load
        "omega0": 1.0,
        "temperature": 0.0,
        "spectral": {"kind": "flat", "g0": 0.1, "omega_max": 2.0},
                    # or {"kind": "ohmic", "alpha": .., "omega_c": ..}
                    # or {"kind": "tabulated", "file": "table.txt"} / {"points": [[w, g2], ..]}
        "sharing": "independent",         # "collective" or {"partial": f}
        "coupling_scales": [1, 1]         # numbers or [re, im] pairs
      },
      "bath": {"n_modes": 1, "fock_cutoff": 2},
      "drive": {"enabled": true},         # coefficient defaults to omega0
      "zeno": {"t_total": 1.0, "n_tests": 64, "gamma": 0.0,
               "policy": "track-both", "seed": 1},
      "initial": {"c_plus": 0.7071067811865476, "c_minus": 0.7071067811865476},
      "sweep": [{"param": "zeno.n_tests", "values": [4, 8, 16]}],
      "output": {"json": "report.json", "csv": "sweep.csv"}
    }
"""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .noise import BathDiscretization, DissipationSpec, DriveSpec, SpectralDensity, discretize_bath
from .zeno import ProtocolSetup, ZenoConfig

DEFAULTS = {
    "dissipation": {
        "lambda": [1.0, 0.0, 0.0],
        "omega0": 1.0,
        "temperature": 0.0,
        "spectral": {"kind": "flat", "g0": 0.0, "omega_max": 2.0},
        "sharing": "independent",
        "coupling_scales": [1.0, 1.0],
    },
    "bath": {"n_modes": 1, "fock_cutoff": 2},
    "drive": {"enabled": True},
    "zeno": {"t_total": 1.0, "n_tests": 16, "gamma": 0.0, "policy": "track-both", "seed": 0},
    "initial": {"c_plus": 1.0, "c_minus": 0.0},
    "sweep": [],
    "output": {},
}

ALIASES = {
    "n_tests": "zeno.n_tests",
    "gamma": "zeno.gamma",
    "t_total": "zeno.t_total",
    "seed": "zeno.seed",
    "temperature": "dissipation.temperature",
    "omega0": "dissipation.omega0",
    "g0": "dissipation.spectral.g0",
    "omega_max": "dissipation.spectral.omega_max",
    "alpha": "dissipation.spectral.alpha",
    "omega_c": "dissipation.spectral.omega_c",
    "n_modes": "bath.n_modes",
    "fock_cutoff": "bath.fock_cutoff",
}
MAX_AXES = 2


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "spectral":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def find_line(text: str | None, key: str) -> int | None:
    if not text:
        return None
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for i, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return i
    return None


def parse_complex(value, what: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{what}: cannot read {value!r} as a complex number")


def parse_sharing(value):
    if value in ("independent", "collective"):
        return value
    if isinstance(value, dict) and set(value) == {"partial"}:
        return ("partial", float(value["partial"]))
    if isinstance(value, str) and value.startswith("partial:"):
        return ("partial", float(value.split(":", 1)[1]))
    raise ConfigError(f"unknown sharing {value!r}")


def parse_spectral(d: dict, base_dir: Path | None = None) -> SpectralDensity:
    kind = d.get("kind")
    if kind == "flat":
        return SpectralDensity.flat(float(d["g0"]), float(d["omega_max"]))
    if kind == "ohmic":
        return SpectralDensity.ohmic(float(d["alpha"]), float(d["omega_c"]))
    if kind == "tabulated":
        if "file" in d:
            path = Path(d["file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return SpectralDensity.from_table(path)
        return SpectralDensity.tabulated(d["points"])
    raise ConfigError(f"unknown spectral kind {kind!r}")


def get_path(d: dict, dotted: str):
    cur = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise KeyError(dotted)
        cur = cur[part]
    return cur


def set_path(d: dict, dotted: str, value):
    parts = dotted.split(".")
    cur = d
    for part in parts[:-1]:
        cur = cur[part]
    cur[parts[-1]] = value


@dataclass
class ExperimentConfig:
    raw: dict
    spec: DissipationSpec
    n_modes: int
    fock_cutoff: int
    drive: DriveSpec
    zeno: ZenoConfig
    initial: tuple[complex, complex]
    axes: list[tuple[str, list]]
    output_json: str | None = None
    output_csv: str | None = None
    base_dir: Path | None = None

    def bath(self) -> BathDiscretization:
        return discretize_bath(self.spec, self.n_modes, self.fock_cutoff)

    def setup(self) -> ProtocolSetup:
        return ProtocolSetup(self.spec, self.bath(), self.drive, self.initial, self.zeno)

    def with_values(self, assignments: dict) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        for path, value in assignments.items():
            set_path(raw, path, value)
        raw["sweep"] = []
        return from_dict(raw, base_dir=self.base_dir)


def from_dict(user: dict, text: str | None = None, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(user, dict):
        raise ConfigError("top level of the config must be a JSON object", line=1 if text else None)
    unknown = set(user) - set(DEFAULTS)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown section {key!r}", line=find_line(text, key))
    raw = _merge(DEFAULTS, user)

    def fail(key, msg):
        return ConfigError(f"{key}: {msg}", line=find_line(text, key.split(".")[-1]))

    def fail_in(section, fields, exc):
        # anchor on the field the message names, falling back to the section
        msg = str(exc)
        key = next((f for f in fields if msg.startswith(f) or f" {f} " in msg), None)
        path = f"{section}.{key}" if key and find_line(text, key) else section
        return fail(path, msg)

    dis = raw["dissipation"]
    try:
        lam = [float(x) for x in dis["lambda"]]
        norm = math.sqrt(sum(x * x for x in lam))
        if len(lam) != 3 or norm == 0:
            raise ValueError("need three components, not all zero")
        lam = [x / norm for x in lam]
    except (TypeError, ValueError) as exc:
        raise fail("lambda", str(exc)) from None
    try:
        spectral = parse_spectral(dis["spectral"], base_dir)
    except (KeyError, TypeError, ValueError) as exc:
        raise fail("spectral", f"bad spectral density ({exc})") from None
    try:
        scales = tuple(parse_complex(s, "coupling_scales") for s in dis["coupling_scales"])
        spec = DissipationSpec(
            tuple(lam),
            omega0=float(dis["omega0"]),
            temperature=float(dis["temperature"]),
            spectral=spectral,
            sharing=parse_sharing(dis["sharing"]),
            coupling_scales=scales,
        )
    except (TypeError, ValueError) as exc:
        raise fail_in("dissipation", ("lambda", "temperature", "sharing", "omega0", "coupling_scales"), exc) from None

    bath = raw["bath"]
    try:
        n_modes, cutoff = int(bath["n_modes"]), int(bath["fock_cutoff"])
        if n_modes < 1 or cutoff < 1:
            raise ValueError("n_modes and fock_cutoff must be >= 1")
    except (TypeError, ValueError) as exc:
        raise fail("bath", str(exc)) from None

    drv = raw["drive"]
    enabled = bool(drv.get("enabled", True))
    coeff = float(drv.get("coefficient", spec.omega0 if enabled else 0.0))
    drive = DriveSpec(enabled, coeff)
    try:
        drive.check(spec.omega0)
    except ConfigError as exc:
        raise fail("coefficient", str(exc)) from None

    z = raw["zeno"]
    try:
        zeno = ZenoConfig(float(z["t_total"]), z["n_tests"], float(z["gamma"]), z["policy"], int(z["seed"]))
    except (TypeError, ValueError) as exc:
        raise fail_in("zeno", ("t_total", "n_tests", "gamma", "policy", "seed"), exc) from None

    ini = raw["initial"]
    try:
        cp = parse_complex(ini["c_plus"], "c_plus")
        cm = parse_complex(ini["c_minus"], "c_minus")
        nrm = math.sqrt(abs(cp) ** 2 + abs(cm) ** 2)
        if nrm == 0:
            raise ValueError("amplitudes are both zero")
    except (TypeError, ValueError) as exc:
        raise fail("initial", str(exc)) from None

    sweep = raw["sweep"]
    if not isinstance(sweep, list):
        raise fail("sweep", "must be a list of {param, values}")
    if len(sweep) > MAX_AXES:
        raise fail("sweep", f"at most {MAX_AXES} sweep axes are supported")
    axes = []
    for ax in sweep:
        if not isinstance(ax, dict) or "param" not in ax or "values" not in ax:
            raise fail("sweep", "each axis needs 'param' and 'values'")
        path = ALIASES.get(ax["param"], ax["param"])
        try:
            get_path(raw, path)
        except KeyError:
            raise fail("param", f"unknown sweep parameter {ax['param']!r}") from None
        values = list(ax["values"])
        if not values:
            raise fail("values", f"sweep axis {ax['param']!r} has no values")
        axes.append((path, values))

    out = raw["output"]
    return ExperimentConfig(
        raw=raw,
        spec=spec,
        n_modes=n_modes,
        fock_cutoff=cutoff,
        drive=drive,
        zeno=zeno,
        initial=(cp / nrm, cm / nrm),
        axes=axes,
        output_json=out.get("json"),
        output_csv=out.get("csv"),
        base_dir=base_dir,
    )


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})", line=exc.lineno) from None
    return from_dict(user, text, base_dir=path.parent)
