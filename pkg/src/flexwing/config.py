"""Run configuration: a sectioned key/value text format.

Keys carry units in their names, values are plain scalars or a small
profile syntax:

    constant <v>
    linear <root value> <tip value>
    poly <c0> <c1> ...            coefficients of y^0, y^1, ...
    pwl <y>:<v> <y>:<v> ...       piecewise-linear samples

Unknown sections or keys are rejected so a typo cannot silently fall back
to a default.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass
from typing import Optional

from .model import (ControlLaw, DisturbanceSpec, InitialCondition, WingModel,
                    bent_twisted_initial_condition, persistent_disturbance,
                    vanishing_disturbance, zero_disturbance,
                    zero_initial_condition)
from .profiles import SpatialProfile


class ConfigError(ValueError):
    """Raised with a section/key diagnostic on any configuration problem."""


_MODEL_KEYS = {
    "span_m",
    "rho_kg_per_m", "inertia_kgm2_per_m",
    "bending_stiffness_Nm2", "torsion_stiffness_Nm2",
    "bending_kv_damping_s", "torsion_kv_damping_s",
    "alpha_w_per_s2", "beta_w_per_s", "gamma_w_per_s",
    "alpha_phi_per_s2", "beta_phi_per_s", "gamma_phi_per_s",
    "tip_mass_kg", "tip_inertia_kgm2",
}
_CONTROL_KEYS = {"mode", "k1", "k2", "eps", "eps1", "eps2"}
_DISTURBANCE_KEYS = {"kind", "scale", "decay_rate_per_s"}
_MESH_KEYS = {"elements"}
_TIME_KEYS = {"t_end_s", "dt_s", "output_stride", "integrator", "mild_solution"}
_INITIAL_KEYS = {"kind"}
_SCENARIO_KEYS = {"name"}
_SECTIONS = {
    "scenario": _SCENARIO_KEYS,
    "model": _MODEL_KEYS,
    "control": _CONTROL_KEYS,
    "disturbance": _DISTURBANCE_KEYS,
    "mesh": _MESH_KEYS,
    "time": _TIME_KEYS,
    "initial": _INITIAL_KEYS,
}


@dataclass
class RunConfig:
    scenario: str
    model: WingModel
    mode: str                      # "open-loop" | "closed-loop"
    k1: float
    k2: float
    eps_auto: bool
    law: Optional[ControlLaw]      # None when eps is searched
    disturbance: DisturbanceSpec
    initial: InitialCondition
    elements: int
    t_end: float
    dt: float
    output_stride: int
    integrator: str
    mild_solution: bool
    config_hash: str
    text: str


def _parse_profile(text: str, span: float, section: str, key: str) -> SpatialProfile:
    parts = text.split()
    if not parts:
        raise ConfigError(f"[{section}] {key}: empty profile value")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "constant":
            (v,) = args
            return SpatialProfile.constant(float(v), span)
        if kind == "linear":
            root, tip = args
            return SpatialProfile.linear(float(root), float(tip), span)
        if kind == "poly":
            return SpatialProfile.polynomial([float(a) for a in args], span)
        if kind == "pwl":
            ys, vs = zip(*(a.split(":") for a in args))
            return SpatialProfile.piecewise_linear([float(y) for y in ys],
                                                   [float(v) for v in vs])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse profile {text!r}: {exc}") from exc
    raise ConfigError(f"[{section}] {key}: unknown profile kind {kind!r} "
                      "(use constant/linear/poly/pwl)")


def _get(parser, section, key, default=None, required=False):
    if parser.has_option(section, key):
        return parser.get(section, key)
    if required:
        raise ConfigError(f"[{section}] missing required key {key!r}")
    return default


def _float(parser, section, key, default=None, required=False):
    raw = _get(parser, section, key, None, required)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=(";",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    span = _float(parser, "model", "span_m", required=True)
    if span is None or span <= 0:
        raise ConfigError("[model] span_m must be positive")

    def prof(key, default):
        raw = _get(parser, "model", key)
        if raw is None:
            return SpatialProfile.constant(default, span)
        return _parse_profile(raw, span, "model", key)

    model = WingModel(
        span=span,
        rho=prof("rho_kg_per_m", 1.0),
        Iw=prof("inertia_kgm2_per_m", 1.0),
        EI=prof("bending_stiffness_Nm2", 1.0),
        GJ=prof("torsion_stiffness_Nm2", 1.0),
        eta_w=prof("bending_kv_damping_s", 0.01),
        eta_phi=prof("torsion_kv_damping_s", 0.01),
        alpha_w=prof("alpha_w_per_s2", 0.0),
        beta_w=prof("beta_w_per_s", 0.0),
        gamma_w=prof("gamma_w_per_s", 0.0),
        alpha_phi=prof("alpha_phi_per_s2", 0.0),
        beta_phi=prof("beta_phi_per_s", 0.0),
        gamma_phi=prof("gamma_phi_per_s", 0.0),
        m_s=_float(parser, "model", "tip_mass_kg", 1.0),
        J_s=_float(parser, "model", "tip_inertia_kgm2", 0.1),
    )

    mode = _get(parser, "control", "mode", "closed-loop")
    if mode not in ("open-loop", "closed-loop"):
        raise ConfigError(f"[control] mode must be open-loop or closed-loop, got {mode!r}")
    k1 = _float(parser, "control", "k1", 0.0)
    k2 = _float(parser, "control", "k2", 0.0)
    if k1 < 0 or k2 < 0:
        raise ConfigError("[control] gains k1, k2 must be nonnegative")
    eps_raw = _get(parser, "control", "eps", None)
    eps_auto = eps_raw is not None and eps_raw.strip().lower() == "auto"
    law = None
    if not eps_auto:
        eps1 = _float(parser, "control", "eps1")
        eps2 = _float(parser, "control", "eps2")
        if mode == "closed-loop":
            if eps1 is None or eps2 is None:
                raise ConfigError("[control] closed-loop needs eps = auto or explicit eps1, eps2")
            law = ControlLaw(k1, k2, eps1, eps2)

    kind = _get(parser, "disturbance", "kind", "zero")
    scale = _float(parser, "disturbance", "scale", 1.0)
    if kind == "zero":
        disturbance = zero_disturbance()
    elif kind == "persistent":
        disturbance = persistent_disturbance(scale)
    elif kind == "vanishing":
        rate = _float(parser, "disturbance", "decay_rate_per_s", 0.5)
        disturbance = vanishing_disturbance(rate, scale)
    else:
        raise ConfigError(f"[disturbance] unknown kind {kind!r} "
                          "(use zero/persistent/vanishing)")

    ic_kind = _get(parser, "initial", "kind", "bent-twisted")
    if ic_kind == "zero":
        initial = zero_initial_condition()
    elif ic_kind == "bent-twisted":
        initial = bent_twisted_initial_condition(span)
    else:
        raise ConfigError(f"[initial] unknown kind {ic_kind!r} (use zero/bent-twisted)")

    elements = int(_float(parser, "mesh", "elements", 32))
    if elements < 1:
        raise ConfigError("[mesh] elements must be >= 1")

    t_end = _float(parser, "time", "t_end_s", 10.0)
    dt = _float(parser, "time", "dt_s", 1e-3)
    stride = int(_float(parser, "time", "output_stride", 1))
    integrator = _get(parser, "time", "integrator", "newmark")
    if integrator not in ("newmark", "expm"):
        raise ConfigError(f"[time] integrator must be newmark or expm, got {integrator!r}")
    mild_raw = _get(parser, "time", "mild_solution", "false")
    if mild_raw.strip().lower() not in ("true", "false", "yes", "no", "1", "0"):
        raise ConfigError(f"[time] mild_solution must be boolean, got {mild_raw!r}")
    mild = mild_raw.strip().lower() in ("true", "yes", "1")

    return RunConfig(
        scenario=_get(parser, "scenario", "name", "unnamed"),
        model=model, mode=mode, k1=k1, k2=k2, eps_auto=eps_auto, law=law,
        disturbance=disturbance, initial=initial, elements=elements,
        t_end=t_end, dt=dt, output_stride=stride, integrator=integrator,
        mild_solution=mild,
        config_hash=hashlib.sha256(text.encode()).hexdigest()[:16],
        text=text,
    )


def load_config(path) -> RunConfig:
    try:
        with io.open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


_DEFAULT_MODEL_BLOCK = """\
[model]
span_m = 2.0
rho_kg_per_m = linear 10.0 7.0
inertia_kgm2_per_m = linear 0.5 0.35
bending_stiffness_Nm2 = linear 150.0 75.0
torsion_stiffness_Nm2 = linear 100.0 50.0
bending_kv_damping_s = constant 0.02
torsion_kv_damping_s = constant 0.02
alpha_w_per_s2 = constant 0.05
beta_w_per_s = constant -0.02
gamma_w_per_s = constant 0.01
alpha_phi_per_s2 = constant 0.1
beta_phi_per_s = constant 0.1
gamma_phi_per_s = constant 0.05
tip_mass_kg = 1.0
tip_inertia_kgm2 = 0.1
"""

_SCENARIO_MODEL_BLOCK = """\
[model]
span_m = 2.0
rho_kg_per_m = linear 40.0 28.0
inertia_kgm2_per_m = linear 2.0 1.4
bending_stiffness_Nm2 = linear 600.0 300.0
torsion_stiffness_Nm2 = linear 400.0 200.0
bending_kv_damping_s = constant 0.001
torsion_kv_damping_s = constant 0.001
alpha_w_per_s2 = constant 0.05
beta_w_per_s = constant -0.02
gamma_w_per_s = constant 0.03
alpha_phi_per_s2 = constant 0.1
beta_phi_per_s = constant 0.2
gamma_phi_per_s = constant 0.05
tip_mass_kg = 4.0
tip_inertia_kgm2 = 0.4
"""

SCENARIOS = {
    "default-certify": f"""\
[scenario]
name = default-certify

{_DEFAULT_MODEL_BLOCK}
[control]
mode = closed-loop
k1 = 10.0
k2 = 4.0
eps = auto

[disturbance]
kind = persistent

[mesh]
elements = 32

[time]
t_end_s = 10.0
dt_s = 0.001
output_stride = 10
mild_solution = true
""",
    "demo-open-loop": f"""\
[scenario]
name = demo-open-loop

{_SCENARIO_MODEL_BLOCK}
[control]
mode = open-loop

[disturbance]
kind = zero

[mesh]
elements = 24

[time]
t_end_s = 60.0
dt_s = 0.002
output_stride = 50
mild_solution = true
""",
    "demo-closed-loop-perturbed": f"""\
[scenario]
name = demo-closed-loop-perturbed

{_SCENARIO_MODEL_BLOCK}
[control]
mode = closed-loop
k1 = 10.0
k2 = 4.0
eps1 = 0.02
eps2 = 0.1

[disturbance]
kind = persistent

[mesh]
elements = 24

[time]
t_end_s = 40.0
dt_s = 0.002
output_stride = 25
mild_solution = true
""",
    "zero": f"""\
[scenario]
name = zero

{_DEFAULT_MODEL_BLOCK}
[control]
mode = closed-loop
k1 = 10.0
k2 = 4.0
eps1 = 0.02
eps2 = 0.1

[disturbance]
kind = zero

[initial]
kind = zero

[mesh]
elements = 16

[time]
t_end_s = 2.0
dt_s = 0.001
output_stride = 10
""",
}
