"""Scenario configuration: defaults, JSON file loading and validation."""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .exceptions import ConfigError
from .fock import DEFAULT_EPSILON
from .hamiltonian import EffectiveForm
from .observables import GridSpec

__all__ = ["ScenarioConfig", "TimeSpec", "SCENARIOS", "parse_number", "parse_list", "parse_complex", "load_config"]

SCENARIOS = (
    "resonant",
    "detuning-sweep",
    "dispersive-cat",
    "fidelity-scan",
    "variance-scan",
    "spectrum-check",
)

TIME_KINDS = ("tau", "gt", "lambda_t")

_PI_EXPR = re.compile(
    r"^\s*(?P<coef>[-+]?((\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?)?)\s*\*?\s*pi\s*(/\s*(?P<den>\d+(\.\d*)?))?\s*$"
)


def parse_number(text) -> float:
    """Float, or a multiple of pi such as ``pi/2``, ``25pi`` or ``0.5*pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text.lower())
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    coef = m.group("coef")
    if coef in ("-", "+"):
        coef = coef + "1"
    value = float(coef) * math.pi if coef else math.pi
    if m.group("den"):
        value /= float(m.group("den"))
    return value


def parse_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [parse_number(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    parts = [p for p in str(text).split(",") if p.strip()]
    if not parts:
        raise ConfigError("empty list")
    return [parse_number(p) for p in parts]


def parse_complex(value) -> complex:
    """``"RE,IM"``, ``[re, im]``, a plain number, or a Python complex literal."""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex value needs two components, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    text = str(value).strip()
    if "," in text:
        re_part, im_part = text.split(",", 1)
        try:
            return complex(float(re_part), float(im_part))
        except ValueError:
            raise ConfigError(f"cannot parse complex {value!r}") from None
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"cannot parse complex {value!r}") from None


@dataclass(frozen=True)
class TimeSpec:
    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in TIME_KINDS:
            raise ConfigError(f"time kind must be one of {TIME_KINDS}, got {self.kind!r}")
        if not self.values:
            raise ConfigError("time list is empty")
        if any(v < 0 for v in self.values):
            raise ConfigError("times must be non-negative")

    def to_gt(self, nbar_a: float, detuning_over_g: float) -> list:
        """Convert to ``g t``: ``tau = g t sqrt(2 nbar_a)``, ``lambda t = g t (g / Delta)``."""
        if self.kind == "gt":
            return list(self.values)
        if self.kind == "tau":
            if nbar_a <= 0:
                raise ConfigError("tau times need nbar_a > 0")
            return [v / math.sqrt(2.0 * nbar_a) for v in self.values]
        if detuning_over_g == 0:
            raise ConfigError("lambda_t times need a non-zero detuning")
        return [v * abs(detuning_over_g) for v in self.values]


_DEFAULTS = {
    "resonant": dict(detuning_over_g=0.0, times=TimeSpec("tau", (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0))),
    "detuning-sweep": dict(detuning_over_g=0.0, times=TimeSpec("tau", (4.0,))),
    "dispersive-cat": dict(detuning_over_g=50.0, times=TimeSpec("lambda_t", (math.pi / 2,))),
    "fidelity-scan": dict(detuning_over_g=50.0, times=None),
    "variance-scan": dict(
        detuning_over_g=50.0,
        beta=1.0 + 0j,
        times=TimeSpec("lambda_t", tuple(0.001 * i for i in range(21))),
    ),
    "spectrum-check": dict(detuning_over_g=50.0, times=None),
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    nbar_a: float = 10.0
    alpha: complex | None = None
    beta: complex = 0j
    detuning_over_g: float = 0.0
    order: int = 2
    times: TimeSpec | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    epsilon: float = DEFAULT_EPSILON
    form: EffectiveForm = EffectiveForm.PERTURBATIVE
    convention: int | None = None
    out: str = "shgcat-out"
    serial: bool = False
    detunings: tuple = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 200.0)
    detuning_ladder: tuple = (50.0, 100.0, 200.0, 400.0)
    spectrum_N_max: int = 20
    samples: int = 600
    cutoff_scale: int = 1

    @classmethod
    def defaults(cls, scenario: str) -> "ScenarioConfig":
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
        return cls(scenario=scenario, **_DEFAULTS[scenario])

    @property
    def alpha_value(self) -> complex:
        if self.alpha is not None:
            return complex(self.alpha)
        return complex(math.sqrt(self.nbar_a))

    @property
    def nbar_value(self) -> float:
        return abs(self.alpha_value) ** 2

    def conventions(self) -> tuple:
        return (1, -1) if self.convention is None else (self.convention,)

    def gt_values(self) -> list:
        if self.times is None:
            raise ConfigError(f"scenario {self.scenario!r} needs a time list")
        return self.times.to_gt(self.nbar_value, self.detuning_over_g)

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.nbar_a < 0:
            raise ConfigError("nbar_a must be >= 0")
        if self.order not in (2, 3):
            raise ConfigError("order must be 2 or 3")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.convention not in (None, 1, -1):
            raise ConfigError("convention must be +1 or -1")
        if self.samples < 3:
            raise ConfigError("samples must be >= 3")
        if self.cutoff_scale < 1:
            raise ConfigError("cutoff_scale must be >= 1")
        if self.scenario in ("dispersive-cat", "fidelity-scan", "variance-scan") and self.detuning_over_g == 0:
            raise ConfigError(f"scenario {self.scenario!r} needs a non-zero detuning")
        if self.scenario == "variance-scan":
            if self.order != 2:
                raise ConfigError("variance-scan is defined for second-harmonic generation only")
            if self.form is EffectiveForm.KERR and self.beta != 0:
                raise ConfigError("the kerr form needs the harmonic mode in vacuum (beta = 0)")
            if abs(self.alpha_value.imag) > 0 or abs(self.beta.imag) > 0:
                raise ConfigError("variance-scan closed form assumes real alpha and beta")
        if self.scenario == "spectrum-check" and any(d == 0 for d in self.detuning_ladder):
            raise ConfigError("spectrum-check detunings must be non-zero")
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        d["alpha"] = None if self.alpha is None else [self.alpha.real, self.alpha.imag]
        d["beta"] = [self.beta.real, self.beta.imag]
        d["form"] = self.form.value
        d["times"] = None if self.times is None else {"kind": self.times.kind, "values": list(self.times.values)}
        d["grid"] = f"{self.grid.lo!r}:{self.grid.hi!r}:{self.grid.n}"
        d["detunings"] = list(self.detunings)
        d["detuning_ladder"] = list(self.detuning_ladder)
        return d


def _time_from_mapping(data: dict):
    present = [k for k in TIME_KINDS if data.get(k) is not None]
    if len(present) > 1:
        raise ConfigError(f"give exactly one of {TIME_KINDS}, got {present}")
    if present:
        kind = present[0]
        return TimeSpec(kind, tuple(parse_list(data[kind])))
    return None


def apply_overrides(cfg: ScenarioConfig, data: dict) -> ScenarioConfig:
    """Overlay a flat mapping (from JSON or CLI flags) onto a config."""
    changes = {}
    try:
        if data.get("nbar") is not None or data.get("nbar_a") is not None:
            changes["nbar_a"] = float(data.get("nbar", data.get("nbar_a")))
            changes["alpha"] = None
        if data.get("alpha") is not None:
            changes["alpha"] = parse_complex(data["alpha"])
            changes["nbar_a"] = abs(changes["alpha"]) ** 2
        if data.get("beta") is not None:
            changes["beta"] = parse_complex(data["beta"])
        for key in ("detuning", "detuning_over_g"):
            if data.get(key) is not None:
                changes["detuning_over_g"] = parse_number(data[key])
        if data.get("order") is not None:
            changes["order"] = int(data["order"])
        if data.get("grid") is not None:
            g = data["grid"]
            changes["grid"] = GridSpec(**g) if isinstance(g, dict) else GridSpec.parse(str(g))
        if data.get("epsilon") is not None:
            changes["epsilon"] = float(data["epsilon"])
        if data.get("form") is not None:
            changes["form"] = EffectiveForm.parse(data["form"])
        if data.get("convention") is not None:
            changes["convention"] = int(parse_number(data["convention"]))
        if data.get("out") is not None:
            changes["out"] = str(data["out"])
        if data.get("serial") is not None:
            changes["serial"] = bool(data["serial"])
        for key in ("detunings", "detuning_ladder"):
            if data.get(key) is not None:
                changes[key] = tuple(parse_list(data[key]))
        for key in ("spectrum_N_max", "samples", "cutoff_scale"):
            if data.get(key) is not None:
                changes[key] = int(data[key])
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    times = _time_from_mapping(data)
    if times is not None:
        changes["times"] = times
    return replace(cfg, **changes)


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    if isinstance(data.get("times"), dict):
        t = data.pop("times")
        if t.get("kind") not in TIME_KINDS:
            raise ConfigError(f"times.kind must be one of {TIME_KINDS}")
        data[t["kind"]] = t.get("values")
    return data
