"""Scenario configuration: TOML parsing, validation, defaults and serialisation.

A scenario file is a TOML document::

    name = "cpu"
    variant = "cpu"            # or the shorthand  layout = "cpu"
    policy = "CpuZone"         # defaults by variant
    master_seed = 20240601

    [layout]                   # LayoutSpec fields
    zone_fractions = [0.10, 0.60, 0.30]

    [inbound] / [outbound] / [vehicle] / [plan] / [catalog] / [policy_params]

A bundle holds several scenarios as ``[[scenario]]`` tables; an optional
``[defaults]`` table is merged underneath every one of them.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .engine import ReplicationPlan
from .layout import Layout, LayoutSpec, build_layout
from .model import ConfigError, SkuCatalog, build_catalog
from .processes import InboundConfig, OutboundConfig
from .routing import VehicleProfile
from .slotting import PolicyKind, PolicyParams, Slotter, check_compatible

VARIANTS = ("conventional", "flying_v", "cpu", "current")

DEFAULT_POLICY = {
    "conventional": PolicyKind.RANDOM,
    "current": PolicyKind.RANDOM,
    "flying_v": PolicyKind.FLYING_V_ABC,
    "cpu": PolicyKind.CPU_ZONE,
}

# the existing site: wider legacy aisles, deep cross-aisles, lower racking
CURRENT_SPEC = LayoutSpec(aisle_width=4600.0, cross_aisle_width=6000.0, levels=3, aisles=13, bays=17)

DEFAULT_SPEC = {
    "conventional": LayoutSpec(),
    "flying_v": LayoutSpec(target_slot_count=LayoutSpec().grid_slot_count),
    "cpu": LayoutSpec(),
    "current": CURRENT_SPEC,
}

DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class CatalogConfig:
    n_skus: int = 120
    class_share_of_skus: tuple = (0.20, 0.30, 0.50)
    demand_share_of_volume: tuple = (0.80, 0.15, 0.05)

    def __post_init__(self):
        object.__setattr__(self, "class_share_of_skus", tuple(map(float, self.class_share_of_skus)))
        object.__setattr__(self, "demand_share_of_volume",
                           tuple(map(float, self.demand_share_of_volume)))
        build_catalog(self.n_skus, self.class_share_of_skus, self.demand_share_of_volume)


@dataclass(frozen=True)
class ScenarioContext:
    layout: Layout
    slotter: Slotter
    catalog: SkuCatalog


@dataclass(frozen=True)
class Scenario:
    name: str
    variant: str
    layout: LayoutSpec
    policy: PolicyKind
    policy_params: PolicyParams = field(default_factory=PolicyParams)
    catalog: CatalogConfig = field(default_factory=CatalogConfig)
    inbound: InboundConfig = field(default_factory=InboundConfig)
    outbound: OutboundConfig = field(default_factory=OutboundConfig)
    vehicle: VehicleProfile = field(default_factory=VehicleProfile)
    plan: ReplicationPlan = field(default_factory=ReplicationPlan)
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant: unknown layout variant {self.variant!r}")
        object.__setattr__(self, "policy", PolicyKind(self.policy))
        check_compatible(self.policy, self.variant)
        self.inbound.validate(self.plan.day_length)

    def context(self) -> ScenarioContext:
        return _context(self)

    def build_layout(self) -> Layout:
        return _layout(self.variant, self.layout)


@lru_cache(maxsize=16)
def _layout(variant: str, spec: LayoutSpec) -> Layout:
    return build_layout(variant, spec, name=variant)


@lru_cache(maxsize=32)
def _context(scenario: Scenario) -> ScenarioContext:
    layout = _layout(scenario.variant, scenario.layout)
    c = scenario.catalog
    catalog = build_catalog(c.n_skus, c.class_share_of_skus, c.demand_share_of_volume)
    return ScenarioContext(layout, Slotter(scenario.policy, layout, scenario.policy_params,
                                                   scenario.vehicle), catalog)


def default_scenario(variant: str, **overrides) -> Scenario:
    if variant not in VARIANTS:
        raise ConfigError(f"variant: unknown layout variant {variant!r}")
    base = dict(name=variant, variant=variant, layout=DEFAULT_SPEC[variant],
                policy=DEFAULT_POLICY[variant])
    base.update(overrides)
    return Scenario(**base)


# -- parsing -----------------------------------------------------------------------

SECTIONS = {
    "layout": LayoutSpec,
    "policy_params": PolicyParams,
    "catalog": CatalogConfig,
    "inbound": InboundConfig,
    "outbound": OutboundConfig,
    "vehicle": VehicleProfile,
    "plan": ReplicationPlan,
}
TOP_KEYS = ("name", "variant", "policy", "master_seed")


def _build_section(key: str, cls, values, base):
    if not isinstance(values, dict):
        raise ConfigError(f"{key}: expected a table, got {type(values).__name__}")
    known = {f.name for f in fields(cls) if f.init}
    for k in values:
        if k not in known:
            raise ConfigError(f"{key}.{k}: unknown key")
    kwargs = {}
    for k, v in values.items():
        if isinstance(v, list):
            v = tuple(v)
        kwargs[k] = v
    try:
        return replace(base, **kwargs)
    except (ValueError, TypeError) as exc:
        bad = [k for k in kwargs if k in str(exc)]
        where = f"{key}.{bad[0]}" if bad else key
        raise ConfigError(f"{where}: {exc}") from None


def scenario_from_dict(data: dict, prefix: str = "") -> Scenario:
    """Validate a parsed TOML table into a Scenario; errors carry the key path."""
    data = dict(data)
    layout_val = data.get("layout")
    if isinstance(layout_val, str):
        if "variant" in data and data["variant"] != layout_val:
            raise ConfigError(f"{prefix}layout: conflicts with variant {data['variant']!r}")
        data["variant"] = layout_val
        del data["layout"]
    for k in data:
        if k not in TOP_KEYS and k not in SECTIONS:
            raise ConfigError(f"{prefix}{k}: unknown key")
    variant = data.get("variant", "conventional")
    if variant not in VARIANTS:
        raise ConfigError(f"{prefix}variant: unknown layout variant {variant!r}")
    kwargs = {}
    base = default_scenario(variant)
    for key, cls in SECTIONS.items():
        if key in data:
            kwargs[key] = _build_section(prefix + key, cls, data[key], getattr(base, key))
    try:
        policy = PolicyKind(data.get("policy", DEFAULT_POLICY[variant]))
    except ValueError:
        raise ConfigError(f"{prefix}policy: unknown policy {data.get('policy')!r}") from None
    seed = data.get("master_seed", DEFAULT_SEED)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"{prefix}master_seed: must be a non-negative integer")
    try:
        return replace(base, name=str(data.get("name", variant)), policy=policy,
                       master_seed=seed, **kwargs)
    except ValueError as exc:
        where = "policy" if "policy" in str(exc) else "inbound"
        raise ConfigError(f"{prefix}{where}: {exc}") from None


def _read_toml(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: malformed TOML: {exc}") from None


def parse_scenario(path) -> Scenario:
    """Parse one scenario file."""
    data = _read_toml(path)
    if "scenario" in data:
        raise ConfigError(f"{path}: holds a bundle; use parse_bundle")
    return scenario_from_dict(data)


def _deep_merge(base: dict, top: dict) -> dict:
    out = dict(base)
    for k, v in top.items():
        out[k] = _deep_merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


def parse_bundle(path) -> list:
    """Parse a ``[[scenario]]`` bundle; a single scenario file yields a list of one."""
    data = _read_toml(path)
    if "scenario" not in data:
        return [scenario_from_dict(data)]
    extra = set(data) - {"scenario", "defaults"}
    if extra:
        raise ConfigError(f"{sorted(extra)[0]}: unknown key")
    defaults = data.get("defaults", {})
    out = []
    for i, entry in enumerate(data["scenario"]):
        out.append(scenario_from_dict(_deep_merge(defaults, entry), prefix=f"scenario[{i}]."))
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names in a bundle must be unique")
    return out


def load_scenarios(path) -> list:
    return parse_bundle(path)


def table2_bundle_path() -> Path:
    return Path(__file__).with_name("data") / "table2.toml"


def table2_scenarios(include_extra: bool = False) -> list:
    """The five comparison scenarios; with ``include_extra`` also current and enlarged-P."""
    scen = parse_bundle(table2_bundle_path())
    if include_extra:
        return scen
    return [s for s in scen if s.name not in ("current", "cpu_enlarged_p")]


# -- serialisation -------------------------------------------------------------------

def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if hasattr(v, "value") and not isinstance(v, (int, float)):
        return v.value
    return v


def scenario_to_dict(s: Scenario) -> dict:
    out = {"name": s.name, "variant": s.variant, "policy": s.policy.value,
           "master_seed": s.master_seed}
    for key in SECTIONS:
        obj = getattr(s, key)
        out[key] = {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)
                    if f.init and getattr(obj, f.name) is not None}
    return out


def dump_scenario(s: Scenario) -> str:
    return tomli_w.dumps(scenario_to_dict(s))


def loads_scenario(text: str) -> Scenario:
    try:
        return scenario_from_dict(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from None


def with_overrides(s: Scenario, **changes) -> Scenario:
    """Copy of ``s`` with top-level fields or ``section__field`` values replaced."""
    top = {}
    nested = {}
    for k, v in changes.items():
        if "__" in k:
            sec, f = k.split("__", 1)
            nested.setdefault(sec, {})[f] = v
        else:
            top[k] = v
    for sec, vals in nested.items():
        top[sec] = dataclasses.replace(getattr(s, sec), **vals)
    return dataclasses.replace(s, **top)
