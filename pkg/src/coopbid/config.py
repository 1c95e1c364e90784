"""YAML run configuration.

Canonical document (every key optional; the values shown are defaults)::

    schema: 1
    market:
      n: 10
      k: 5
      ctr: null          # list of k rates; null -> 0.9 * 0.8**(j-1)
      reserve: 0.0
      valuations: null   # list of n values; null -> drawn per seed
    valuations:
      base: 10.0
      spread: 0.1        # uniform on [base*(1-spread), base*(1+spread)]
    bidders:
      gamma: 0.95        # one value or a list of n values, each in (0, 1)
    simulation:
      rounds: 500
      seeds: 200
      master_seed: 0
      mechanisms: [coop-optimizer, gsp-truthful]
      outcome: click-sampled   # or slot-allocated
      dropout: true
    optimizer:
      weighting: true
    game: null           # optional explicit game for `nucleolus` / `game`:
                         #   {additive: [w0, w1, ...]} or
                         #   {players: m, values: {"0,1": 10.0, ...}}
    output:
      out: null
      figures: null
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import yaml

from .bargaining import CharacteristicGame
from .simulation import MECHANISMS, OUTCOMES, SimulationConfig

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GameSpec:
    additive: tuple[float, ...] | None = None
    players: int | None = None
    values: tuple[tuple[tuple[int, ...], float], ...] = ()

    def build(self) -> CharacteristicGame:
        if self.additive is not None:
            return CharacteristicGame.additive(self.additive)
        return CharacteristicGame.from_mapping(self.players, dict(self.values))


@dataclass(frozen=True)
class RunConfig:
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    game: GameSpec | None = None
    out: str | None = None
    figures: str | None = None


_SECTIONS = {
    "schema": None,
    "market": {"n", "k", "ctr", "reserve", "valuations"},
    "valuations": {"base", "spread"},
    "bidders": {"gamma"},
    "simulation": {"rounds", "seeds", "master_seed", "mechanisms", "outcome", "dropout"},
    "optimizer": {"weighting"},
    "game": {"additive", "players", "values"},
    "output": {"out", "figures"},
}


def _typed(key: str, value: Any, kind: type) -> Any:
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    raise TypeError(kind)


def _floats(key: str, value: Any) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(f"{key}: expected a list of numbers")
    return tuple(_typed(f"{key}[{i}]", v, float) for i, v in enumerate(value))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a YAML document; raises ConfigError naming the key."""
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping")
    for key, val in doc.items():
        if key not in _SECTIONS:
            raise ConfigError(f"unknown key {key!r}")
        allowed = _SECTIONS[key]
        if allowed is not None and val is not None:
            if not isinstance(val, dict):
                raise ConfigError(f"{key}: expected a mapping")
            for sub in val:
                if sub not in allowed:
                    raise ConfigError(f"unknown key '{key}.{sub}'")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"schema: unsupported version {schema!r} (expected {SCHEMA_VERSION})")

    def sec(name):
        return doc.get(name) or {}

    kw: dict[str, Any] = {}
    market = sec("market")
    if "n" in market:
        kw["n"] = _typed("market.n", market["n"], int)
    if "k" in market:
        kw["k"] = _typed("market.k", market["k"], int)
    if market.get("ctr") is not None:
        kw["ctr"] = _floats("market.ctr", market["ctr"])
    if "reserve" in market:
        kw["reserve"] = _typed("market.reserve", market["reserve"], float)
    if market.get("valuations") is not None:
        kw["valuations"] = _floats("market.valuations", market["valuations"])
        kw.setdefault("n", len(kw["valuations"]))
    vals = sec("valuations")
    if "base" in vals:
        kw["base_value"] = _typed("valuations.base", vals["base"], float)
    if "spread" in vals:
        kw["spread"] = _typed("valuations.spread", vals["spread"], float)
    bidders = sec("bidders")
    if "gamma" in bidders:
        g = bidders["gamma"]
        kw["gamma"] = _floats("bidders.gamma", g) if isinstance(g, list) else _typed("bidders.gamma", g, float)
    sim = sec("simulation")
    for key in ("rounds", "seeds", "master_seed"):
        if key in sim:
            kw[key] = _typed(f"simulation.{key}", sim[key], int)
    if "mechanisms" in sim:
        mech = sim["mechanisms"]
        if isinstance(mech, str):
            mech = [mech]
        if not isinstance(mech, list) or not mech:
            raise ConfigError("simulation.mechanisms: expected a non-empty list")
        for m in mech:
            if m not in MECHANISMS:
                raise ConfigError(f"simulation.mechanisms: unknown mechanism {m!r}")
        kw["mechanisms"] = tuple(sorted(set(mech)))
    if "outcome" in sim:
        out = _typed("simulation.outcome", sim["outcome"], str)
        if out not in OUTCOMES:
            raise ConfigError(f"simulation.outcome: must be one of {list(OUTCOMES)}")
        kw["outcome"] = out
    if "dropout" in sim:
        kw["dropout"] = _typed("simulation.dropout", sim["dropout"], bool)
    opt = sec("optimizer")
    if "weighting" in opt:
        kw["weighting"] = _typed("optimizer.weighting", opt["weighting"], bool)

    sim_cfg = build_simulation_config(**kw)

    game = None
    gdoc = doc.get("game")
    if gdoc:
        if "additive" in gdoc:
            if set(gdoc) != {"additive"}:
                raise ConfigError("game: use either 'additive' or 'players'/'values'")
            game = GameSpec(additive=_floats("game.additive", gdoc["additive"]))
        else:
            players = _typed("game.players", gdoc.get("players"), int)
            raw = gdoc.get("values") or {}
            if not isinstance(raw, dict):
                raise ConfigError("game.values: expected a mapping of 'i,j,...' to numbers")
            items = []
            for key, v in raw.items():
                try:
                    ids = tuple(sorted(int(p) for p in str(key).split(",") if p.strip()))
                except ValueError:
                    raise ConfigError(f"game.values: bad coalition key {key!r}") from None
                if any(p < 0 or p >= players for p in ids):
                    raise ConfigError(f"game.values: coalition {key!r} out of range")
                items.append((ids, _typed(f"game.values[{key}]", v, float)))
            game = GameSpec(players=players, values=tuple(sorted(items)))
        if game.additive is not None and len(game.additive) < 2 or (
                game.players is not None and game.players < 2):
            raise ConfigError("game: at least two players required")

    outd = sec("output")
    out = outd.get("out")
    figures = outd.get("figures")
    if out is not None:
        out = _typed("output.out", out, str)
    if figures is not None:
        figures = _typed("output.figures", figures, str)
    return RunConfig(sim_cfg, game, out, figures)


def build_simulation_config(**kw) -> SimulationConfig:
    """SimulationConfig with validation errors rephrased as ConfigError."""
    if "k" in kw or "n" in kw:
        n = kw.get("n", SimulationConfig.n)
        k = kw.get("k", SimulationConfig.k)
        if k >= n:
            raise ConfigError(f"market.k: k < n required (k={k}, n={n})")
    try:
        return SimulationConfig(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_to_dict(cfg: RunConfig) -> dict:
    s = cfg.simulation
    gamma = list(s.gamma) if isinstance(s.gamma, tuple) else s.gamma
    doc = {
        "schema": SCHEMA_VERSION,
        "market": {
            "n": s.n, "k": s.k,
            "ctr": list(s.ctr) if s.ctr is not None else None,
            "reserve": s.reserve,
            "valuations": list(s.valuations) if s.valuations is not None else None,
        },
        "valuations": {"base": s.base_value, "spread": s.spread},
        "bidders": {"gamma": gamma},
        "simulation": {
            "rounds": s.rounds, "seeds": s.seeds, "master_seed": s.master_seed,
            "mechanisms": list(s.mechanisms), "outcome": s.outcome, "dropout": s.dropout,
        },
        "optimizer": {"weighting": s.weighting},
        "game": None,
        "output": {"out": cfg.out, "figures": cfg.figures},
    }
    if cfg.game is not None:
        if cfg.game.additive is not None:
            doc["game"] = {"additive": list(cfg.game.additive)}
        else:
            doc["game"] = {"players": cfg.game.players,
                           "values": {",".join(map(str, ids)): v for ids, v in cfg.game.values}}
    return doc


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """Apply CLI overrides (None values are ignored) with full validation."""
    sim_changes = {k: v for k, v in changes.items()
                   if v is not None and k in {f.name for f in dataclasses.fields(SimulationConfig)}}
    top = {k: v for k, v in changes.items() if v is not None and k in ("out", "figures")}
    sim = cfg.simulation
    if sim_changes:
        sim = build_simulation_config(**{**dataclasses.asdict(sim), **sim_changes})
    return dataclasses.replace(cfg, simulation=sim, **top)
