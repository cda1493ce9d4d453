"""Scenario configuration: a small line-oriented ``section.key = value`` format.

Example::

    # small grid, one central link closed for 20 minutes
    network.rows = 3
    network.cols = 4
    demand.vehicles = 600
    demand.seed = 42
    closure.edges = central:1
    closure.start = 1200
    closure.end = 2400

Everything has a documented default, so the empty file is a valid scenario.
Unknown sections or keys are rejected up front, with line numbers, before
any simulation starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .demand import DemandConfig, generate_trips
from .dynamics import IdmParams, KraussParams
from .engine import EngineConfig, Scenario
from .events import ClosureEvent, validate_events
from .metrics import FuelCoeffs, MetricsConfig
from .network import build_grid, central_edges, load_network
from .routing import ReroutePolicy


class ConfigError(ValueError):
    """Invalid configuration; carries the source line when known."""

    def __init__(self, message: str, source: str = "", line: int | None = None):
        self.line = line
        prefix = source or "config"
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}")


_NETWORK_KEYS = {"rows", "cols", "edge_length", "speed_limit", "lanes", "file"}
_DEMAND_KEYS = {"vehicles", "horizon", "penetration", "seed"}
_CLOSURE_KEYS = {"edges", "start", "end"}
_ENGINE_KEYS = {"dt", "end_time", "seed", "insertion_min_gap", "strict"}
_ROUTING_KEYS = {"hdv_response"}
_KRAUSS_KEYS = {"accel", "decel", "tau", "sigma", "v_max", "min_gap", "length"}
_IDM_KEYS = {"accel", "decel", "T", "s0", "delta", "v_max", "length"}
_METRICS_KEYS = {"ttc_hdv", "ttc_cav", "pet_threshold", "co2_per_liter"} | {f"fuel_c{i}" for i in range(6)}


@dataclass(frozen=True)
class ClosureSpec:
    """Raw closure section; ``edges`` may be ``central:<k>`` or id list."""

    edges: str
    start: float
    end: float


@dataclass
class ScenarioConfig:
    """Typed configuration with defaults; :meth:`build` produces a Scenario."""

    source: str = "<config>"
    rows: int = 3
    cols: int = 4
    edge_length: float = 100.0
    speed_limit: float = 13.89
    lanes: int = 1
    network_file: str | None = None
    vehicles: int = 600
    horizon: float = 3600.0
    penetration: float = 0.0
    seed: int = 42
    closures: list[ClosureSpec] = field(default_factory=list)
    dt: float = 1.0
    end_time: float = 5400.0
    engine_seed: int | None = None
    insertion_min_gap: float = 7.5
    strict: bool = False
    hdv_response: str = "sign"
    krauss_overrides: dict[str, float] = field(default_factory=dict)
    idm_overrides: dict[str, float] = field(default_factory=dict)
    metrics_overrides: dict[str, float] = field(default_factory=dict)
    raw: dict[str, str] = field(default_factory=dict)

    def build(
        self,
        penetration: float | None = None,
        seed: int | None = None,
        strict: bool | None = None,
    ) -> Scenario:
        """Construct the runnable scenario, resolving closures on the network."""
        if self.network_file is not None:
            text = Path(self.network_file).read_text()
            network = load_network(text)
        else:
            network = build_grid(self.rows, self.cols, self.edge_length, self.speed_limit, self.lanes)

        events = []
        for spec in self.closures:
            events.append(ClosureEvent(tuple(self._resolve_edges(spec.edges, network)), spec.start, spec.end))
        validate_events(events, network)

        demand_seed = self.seed if seed is None else seed
        demand = DemandConfig(
            total_vehicles=self.vehicles,
            horizon=self.horizon,
            penetration=self.penetration if penetration is None else penetration,
            seed=demand_seed,
        )
        trips = generate_trips(network, demand)

        if self.end_time < self.horizon:
            raise ConfigError(
                f"engine.end_time ({self.end_time}) must be >= demand.horizon ({self.horizon})",
                self.source,
            )
        engine_seed = self.engine_seed
        if engine_seed is None or seed is not None:
            engine_seed = demand_seed
        engine = EngineConfig(
            dt=self.dt,
            end_time=self.end_time,
            seed=engine_seed,
            insertion_min_gap=self.insertion_min_gap,
            strict=self.strict if strict is None else strict,
        )

        fuel_kwargs = {}
        metrics_kwargs = {}
        for key, value in self.metrics_overrides.items():
            if key.startswith("fuel_"):
                fuel_kwargs[key[len("fuel_") :]] = value
            elif key == "ttc_hdv":
                metrics_kwargs["ttc_threshold_hdv"] = value
            elif key == "ttc_cav":
                metrics_kwargs["ttc_threshold_cav"] = value
            else:
                metrics_kwargs[key] = value
        metrics = MetricsConfig(fuel=FuelCoeffs(**fuel_kwargs), **metrics_kwargs)

        return Scenario(
            network=network,
            trips=trips,
            events=events,
            krauss=KraussParams(**self.krauss_overrides),
            idm=IdmParams(**self.idm_overrides),
            engine=engine,
            policy=ReroutePolicy(hdv_immediate=self.hdv_response == "immediate"),
            metrics=metrics,
        )

    def _resolve_edges(self, raw: str, network) -> list[int]:
        if raw.startswith("central:"):
            try:
                k = int(raw.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad central link count in {raw!r}", self.source) from None
            return central_edges(network, k)
        try:
            return [int(part) for part in raw.split(",") if part.strip() != ""]
        except ValueError:
            raise ConfigError(f"bad closure edge list {raw!r}", self.source) from None


def _parse_bool(value: str, source: str, line: int) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}", source, line)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse and validate configuration text; all errors carry line numbers."""
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", source, lineno)
        key_part, value = (part.strip() for part in line.split("=", 1))
        if "." not in key_part:
            raise ConfigError(f"key {key_part!r} is missing its section prefix", source, lineno)
        if key_part in entries:
            raise ConfigError(f"duplicate key {key_part!r}", source, lineno)
        entries[key_part] = (value, lineno)

    config = ScenarioConfig(source=source, raw={k: v for k, (v, _) in entries.items()})

    def take(section_key: str, caster, line: int, value: str):
        try:
            return caster(value)
        except ValueError:
            raise ConfigError(f"bad value {value!r} for {section_key}", source, line) from None

    closures: dict[str, dict[str, tuple[str, int]]] = {}
    for full_key, (value, lineno) in entries.items():
        section, key = full_key.split(".", 1)
        if section == "network":
            if key not in _NETWORK_KEYS:
                raise ConfigError(f"unknown key network.{key}", source, lineno)
            if key == "file":
                config.network_file = value
            elif key in ("rows", "cols", "lanes"):
                setattr(config, key, take(full_key, int, lineno, value))
            else:
                setattr(config, key, take(full_key, float, lineno, value))
        elif section == "demand":
            if key not in _DEMAND_KEYS:
                raise ConfigError(f"unknown key demand.{key}", source, lineno)
            if key in ("vehicles", "seed"):
                setattr(config, "vehicles" if key == "vehicles" else "seed", take(full_key, int, lineno, value))
            else:
                setattr(config, key, take(full_key, float, lineno, value))
        elif section.startswith("closure"):
            if key not in _CLOSURE_KEYS:
                raise ConfigError(f"unknown key {section}.{key}", source, lineno)
            closures.setdefault(section, {})[key] = (value, lineno)
        elif section == "engine":
            if key not in _ENGINE_KEYS:
                raise ConfigError(f"unknown key engine.{key}", source, lineno)
            if key == "seed":
                config.engine_seed = take(full_key, int, lineno, value)
            elif key == "strict":
                config.strict = _parse_bool(value, source, lineno)
            else:
                setattr(config, key, take(full_key, float, lineno, value))
        elif section == "routing":
            if key not in _ROUTING_KEYS:
                raise ConfigError(f"unknown key routing.{key}", source, lineno)
            if value not in ("sign", "immediate"):
                raise ConfigError(f"routing.hdv_response must be 'sign' or 'immediate', got {value!r}", source, lineno)
            config.hdv_response = value
        elif section == "krauss":
            if key not in _KRAUSS_KEYS:
                raise ConfigError(f"unknown key krauss.{key}", source, lineno)
            config.krauss_overrides[key] = take(full_key, float, lineno, value)
        elif section == "idm":
            if key not in _IDM_KEYS:
                raise ConfigError(f"unknown key idm.{key}", source, lineno)
            config.idm_overrides[key] = take(full_key, float, lineno, value)
        elif section == "metrics":
            if key not in _METRICS_KEYS:
                raise ConfigError(f"unknown key metrics.{key}", source, lineno)
            config.metrics_overrides[key] = take(full_key, float, lineno, value)
        else:
            raise ConfigError(f"unknown section {section!r}", source, lineno)

    for section in sorted(closures):
        spec = closures[section]
        for required in ("edges", "start", "end"):
            if required not in spec:
                line = next(iter(spec.values()))[1]
                raise ConfigError(f"section {section!r} is missing key {required!r}", source, line)
        start = take(f"{section}.start", float, spec["start"][1], spec["start"][0])
        end = take(f"{section}.end", float, spec["end"][1], spec["end"][0])
        if not 0 <= start < end:
            raise ConfigError(f"need 0 <= start < end in {section}", source, spec["start"][1])
        config.closures.append(ClosureSpec(spec["edges"][0], start, end))

    try:
        DemandConfig(config.vehicles, config.horizon, config.penetration, config.seed)
    except ValueError as exc:
        raise ConfigError(str(exc), source) from None
    return config


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    return parse_config(text, source=str(path))
