"""Scenario files: YAML documents with network, diversity, attacker,
defender, and run sections.

The defender section may name a single strategy or a list; a list builds a
family of defenders sharing the section's knobs, each strategy taking only
the parameters it supports.

Example::

    network:
      synthetic: {n_layer1: 320, n_layer2: 310, overlap_fraction: 0.55,
                  attachment_degree: 4, seed: 7}
    diversity: {x: 10, q: 1.0, initial_algo: degree_priority}
    attacker: {m3: 5, m4: 10, ini_comp: 10}
    defender: {strategy: [static, proactive, reactive, hybrid],
               tau: 0.333333, eta1: 0.5, eta2: 0.2, fpr: 0.1, fnr: 0.1}
    run: {t_max: 500, runs: 100, seed: 42}
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import yaml

from .defense import DefenderSpec, InitialAlgo, SpecError, Strategy
from .engine import NetworkFiles, Scenario, SyntheticNetwork
from .netmodel import ImplementationPool, NetworkError
from .threat import AttackerSpec, CatalogError

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Scenario file cannot be parsed or violates a validation rule."""


_STRATEGY_ALIASES = {
    "monoculture": Strategy.MONOCULTURE,
    "static": Strategy.STATIC,
    "proactive": Strategy.PROACTIVE,
    "reactive": Strategy.REACTIVE_ADAPTIVE,
    "reactive_adaptive": Strategy.REACTIVE_ADAPTIVE,
    "hybrid": Strategy.HYBRID,
}

# which knobs each strategy consumes from the defender section
_STRATEGY_KNOBS = {
    Strategy.MONOCULTURE: (),
    Strategy.STATIC: (),
    Strategy.PROACTIVE: ("eta1", "eta2"),
    Strategy.REACTIVE_ADAPTIVE: ("fpr", "fnr"),
    Strategy.HYBRID: ("eta2", "fpr", "fnr"),
}


@dataclass(frozen=True)
class LoadedConfig:
    scenario: Scenario
    defenders: tuple[DefenderSpec, ...]
    scale_attacker_with_q: bool
    attacker_q_fraction: float


def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing section {name!r}")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(sec)


def _take(sec: dict, name: str, kind, default=None, required: bool = False):
    if name not in sec:
        if required:
            raise ConfigError(f"missing key {name!r}")
        return default
    value = sec.pop(name)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key {name!r} has invalid value {value!r}") from None


def _reject_unknown(sec: dict, where: str) -> None:
    if sec:
        raise ConfigError(f"unknown key {sorted(sec)[0]!r} in section {where!r}")


def _network(sec: dict):
    syn = sec.pop("synthetic", None)
    files = sec.pop("files", None)
    _reject_unknown(sec, "network")
    if (syn is None) == (files is None):
        raise ConfigError("network needs exactly one of 'synthetic' or 'files'")
    if syn is not None:
        syn = dict(syn)
        net = SyntheticNetwork(
            n_layer1=_take(syn, "n_layer1", int, required=True),
            n_layer2=_take(syn, "n_layer2", int, required=True),
            overlap_fraction=_take(syn, "overlap_fraction", float, required=True),
            attachment_degree=_take(syn, "attachment_degree", int, default=3),
            seed=_take(syn, "seed", int, default=0),
        )
        _reject_unknown(syn, "network.synthetic")
        return net, 3
    files = dict(files)
    layers = files.pop("layers", None)
    if not isinstance(layers, list) or not layers:
        raise ConfigError("network.files.layers must be a non-empty list of paths")
    users = files.pop("users", None)
    _reject_unknown(files, "network.files")
    return NetworkFiles(tuple(str(p) for p in layers), None if users is None else str(users)), len(layers) + 1


def _defender_specs(sec: dict, tau: float, algo: InitialAlgo) -> tuple[DefenderSpec, ...]:
    names = sec.pop("strategy", None)
    if names is None:
        raise ConfigError("defender.strategy is required")
    single = isinstance(names, str)
    if single:
        names = [names]
    if not isinstance(names, list) or not names:
        raise ConfigError("defender.strategy must be a name or a non-empty list")
    hybrid_union = bool(sec.pop("hybrid_union", False))
    knobs = {k: sec.pop(k) for k in ("eta1", "eta2", "fpr", "fnr") if k in sec}
    _reject_unknown(sec, "defender")
    specs = []
    for name in names:
        strategy = _STRATEGY_ALIASES.get(str(name).lower())
        if strategy is None:
            raise ConfigError(f"unknown strategy {name!r}")
        wanted = set(_STRATEGY_KNOBS[strategy])
        if strategy is Strategy.HYBRID and hybrid_union:
            wanted.add("eta1")
        if single:
            extra = set(knobs) - wanted
            if extra:
                raise ConfigError(f"{strategy.value} must leave {sorted(extra)[0]} unset")
        try:
            spec = DefenderSpec(
                strategy=strategy,
                tau=tau,
                initial_algo=algo,
                hybrid_union=hybrid_union and strategy is Strategy.HYBRID,
                **{k: float(v) for k, v in knobs.items() if k in wanted},
            )
        except SpecError as exc:
            raise ConfigError(str(exc)) from None
        specs.append(spec)
    return tuple(specs)


def load_scenario(path: str | Path) -> LoadedConfig:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("scenario file must be a mapping of sections")

    network, hbar = _network(_section(doc, "network"))

    div = _section(doc, "diversity")
    x = _take(div, "x", int, required=True)
    q = _take(div, "q", float, default=1.0)
    declared_hbar = _take(div, "hbar", int)
    if declared_hbar is not None and declared_hbar != hbar:
        raise ConfigError(f"diversity.hbar={declared_hbar} but the network implies {hbar}")
    algo_name = _take(div, "initial_algo", str, default="degree_priority")
    _reject_unknown(div, "diversity")
    try:
        algo = InitialAlgo(algo_name)
    except ValueError:
        raise ConfigError(f"unknown initial_algo {algo_name!r}") from None

    att = _section(doc, "attacker")
    try:
        attacker = AttackerSpec(
            m3=_take(att, "m3", int, required=True),
            m4=_take(att, "m4", int, required=True),
            initial_compromise_size=_take(att, "ini_comp", int, default=0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    scale_q = bool(att.pop("scale_with_q", True))
    fraction = _take(att, "q_fraction", float, default=0.5)
    _reject_unknown(att, "attacker")

    dfn = _section(doc, "defender")
    tau = _take(dfn, "tau", float, default=1.0 / 3.0)
    defenders = _defender_specs(dfn, tau, algo)

    runsec = _section(doc, "run", required=False)
    t_max = _take(runsec, "t_max", int, default=500)
    runs = _take(runsec, "runs", int, default=100)
    seed = _take(runsec, "seed", int, default=0)
    defender_first = bool(runsec.pop("defender_first", True))
    _reject_unknown(runsec, "run")

    try:
        pool = ImplementationPool(hbar, x)
        scenario = Scenario(
            network=network,
            pool=pool,
            q=q,
            attacker=attacker,
            defender=defenders[0],
            t_max=t_max,
            runs=runs,
            seed=seed,
            defender_first=defender_first,
        )
    except (NetworkError, CatalogError, SpecError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(doc) - {"network", "diversity", "attacker", "defender", "run"}
    if unknown:
        raise ConfigError(f"unknown section {sorted(unknown)[0]!r}")
    return LoadedConfig(scenario, defenders, scale_q, fraction)
