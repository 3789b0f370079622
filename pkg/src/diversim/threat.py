"""Attacker model: exploit catalog, per-node agents, and knowledge.

The attacker owns a fixed catalog: ``m3`` privilege-escalation exploits
against OS implementations, ``m4`` lateral-movement exploits against
application implementations, plus four fixed capabilities (remote access,
local and remote discovery, damage) that every attacker has. The catalog is
drawn once at run start; there is no online exploit acquisition.

Every compromised node hosts one agent cycling through attack phases. An
agent first installs, then loops discovery, privilege escalation, lateral
movement, damage. Decisions are deterministic given state and knowledge;
all randomness enters through the catalog draw and the initial compromise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .netmodel import (
    COMPROMISED,
    VULNERABLE,
    CommGraph,
    ImplementationPool,
    VulnerabilityMap,
)

logger = logging.getLogger(__name__)

#: capabilities every attacker carries regardless of catalog draws
FIXED_EXPLOITS = ("remote_access", "local_discovery", "remote_discovery", "damage")


class AttackPhase(IntEnum):
    INSTALL = 0
    DISCOVERY = 1
    PRIVILEGE_ESCALATION = 2
    LATERAL_MOVEMENT = 3
    DAMAGE = 4


# after acting, an agent advances along this table; the loop excludes INSTALL
PHASE_AFTER = np.array(
    [
        AttackPhase.DISCOVERY,
        AttackPhase.PRIVILEGE_ESCALATION,
        AttackPhase.LATERAL_MOVEMENT,
        AttackPhase.DAMAGE,
        AttackPhase.DISCOVERY,
    ],
    dtype=np.int8,
)


class CatalogError(ValueError):
    """Requested more exploits than vulnerable implementations exist."""


@dataclass(frozen=True)
class ExploitCatalog:
    """Targets drawn for one run.

    ``privilege_escalation`` holds OS implementation indices;
    ``lateral`` holds (application program, implementation) pairs.
    """

    privilege_escalation: frozenset[int]
    lateral: frozenset[tuple[int, int]]

    def privesc_mask(self, pool: ImplementationPool) -> np.ndarray:
        mask = np.zeros(pool.x, dtype=bool)
        for i in self.privilege_escalation:
            mask[i] = True
        return mask

    def lateral_mask(self, pool: ImplementationPool) -> np.ndarray:
        mask = np.zeros((pool.hbar, pool.x), dtype=bool)
        for p, i in self.lateral:
            mask[p, i] = True
        return mask


@dataclass(frozen=True)
class AttackerSpec:
    """Attacker parameters for a scenario.

    ``initial_nodes`` overrides the sampled initial compromise with an
    explicit node set; useful for oracle runs and coupled comparisons.
    """

    m3: int
    m4: int
    initial_compromise_size: int
    goal: str = "cumulative-compromise"
    initial_nodes: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.m3 < 0 or self.m4 < 0 or self.initial_compromise_size < 0:
            raise ValueError("attacker sizes must be non-negative")
        if self.goal != "cumulative-compromise":
            raise ValueError(f"unsupported attacker goal {self.goal!r}")


def attack_investment(catalog: ExploitCatalog) -> int:
    """Catalog size: drawn exploits plus the four fixed capabilities."""
    return len(catalog.privilege_escalation) + len(catalog.lateral) + len(FIXED_EXPLOITS)


def max_catalog(pool: ImplementationPool, q: float) -> tuple[int, int]:
    """Largest feasible (m3, m4) for a pool at quality q."""
    k = int(round(q * pool.x))
    return k, k * (pool.hbar - 1)


def build_exploit_catalog(
    pool: ImplementationPool,
    vuln: VulnerabilityMap,
    m3: int,
    m4: int,
    rng: np.random.Generator,
) -> ExploitCatalog:
    """Draw catalog targets uniformly among vulnerable implementations.

    ``m4`` is split as evenly as possible across the application kinds, with
    the remainder going to lower program indices. Draws are permutation
    prefixes, so a larger budget from a shared stream extends a smaller one.
    """
    n_apps = pool.hbar - 1
    os_vul = np.flatnonzero(vuln.vulnerable[pool.os_program])
    if m3 > os_vul.size:
        raise CatalogError(f"m3={m3} exceeds {os_vul.size} vulnerable OS implementations")
    privesc = frozenset(int(i) for i in rng.permutation(os_vul)[:m3])
    base, rem = divmod(m4, n_apps)
    lateral: set[tuple[int, int]] = set()
    for p in range(n_apps):
        share = base + (1 if p < rem else 0)
        app_vul = np.flatnonzero(vuln.vulnerable[p])
        if share > app_vul.size:
            raise CatalogError(
                f"program {p} share {share} exceeds {app_vul.size} vulnerable implementations"
            )
        lateral.update((p, int(i)) for i in rng.permutation(app_vul)[:share])
    return ExploitCatalog(privesc, frozenset(lateral))


@dataclass(eq=False)
class AttackerKnowledge:
    """What the attacker has observed, per node.

    Entries are overwritten by newer observations; a redeployed node keeps
    its stale entry until re-discovered, so attacks against it fail
    harmlessly on the implementation mismatch. Compromised nodes' own
    entries are always current.
    """

    known: np.ndarray
    impl: np.ndarray
    time: np.ndarray

    @classmethod
    def empty(cls, n_nodes: int) -> "AttackerKnowledge":
        return cls(
            known=np.zeros(n_nodes, dtype=bool),
            impl=np.full(n_nodes, -1, dtype=np.int16),
            time=np.full(n_nodes, -1, dtype=np.int32),
        )

    def observe(self, nodes: np.ndarray, installed: np.ndarray, t: int) -> int:
        """Record observations; returns how many entries gained information."""
        fresh = int((~self.known[nodes] | (self.impl[nodes] != installed[nodes])).sum())
        self.known[nodes] = True
        self.impl[nodes] = installed[nodes]
        self.time[nodes] = t
        return fresh

    def matches(self, node: int, installed: np.ndarray) -> bool:
        return bool(self.known[node]) and int(self.impl[node]) == int(installed[node])


@dataclass
class AttackAgent:
    host: int
    phase: AttackPhase
    spawned_at: int


@dataclass(frozen=True)
class AttackAction:
    """One agent's move: ``kind`` is install/observe/compromise/damage;
    ``targets`` lists affected nodes (observed or to-compromise)."""

    kind: str
    targets: tuple[int, ...] = ()


def agent_decide(
    agent: AttackAgent,
    knowledge: AttackerKnowledge,
    catalog: ExploitCatalog,
    graph: CommGraph,
    config_installed: np.ndarray,
    state: np.ndarray,
) -> AttackAction:
    """Deterministic action for the agent's current phase.

    Discovery observes the host and all neighbors. Privilege escalation
    targets the local OS when the host is an application, the OS is
    state-vulnerable, and its implementation is a catalog target. Lateral
    movement targets every known, state-vulnerable neighbor whose recorded
    implementation still matches and is a catalog target. Install and damage
    change no node state.
    """
    host = agent.host
    if agent.phase == AttackPhase.INSTALL:
        return AttackAction("install", (host,))
    if agent.phase == AttackPhase.DISCOVERY:
        nbrs = graph.neighbors(host)
        return AttackAction("observe", (host, *(int(w) for w in nbrs)))
    if agent.phase == AttackPhase.PRIVILEGE_ESCALATION:
        if graph.program[host] == graph.os_program:
            return AttackAction("compromise")
        osn = int(graph.os_node[host])
        if state[osn] == VULNERABLE and int(config_installed[osn]) in catalog.privilege_escalation:
            return AttackAction("compromise", (osn,))
        return AttackAction("compromise")
    if agent.phase == AttackPhase.LATERAL_MOVEMENT:
        hits = []
        for w in graph.neighbors(host):
            w = int(w)
            if state[w] != VULNERABLE:
                continue
            if not knowledge.matches(w, config_installed):
                continue
            if (int(graph.program[w]), int(config_installed[w])) in catalog.lateral:
                hits.append(w)
        return AttackAction("compromise", tuple(hits))
    return AttackAction("damage", (host,))


@dataclass(frozen=True)
class InitialCompromise:
    nodes: np.ndarray
    shortfall: int


def initial_compromise(
    graph: CommGraph,
    config_installed: np.ndarray,
    catalog: ExploitCatalog,
    vuln: VulnerabilityMap,
    size: int,
    rng: np.random.Generator,
) -> InitialCompromise:
    """Sample the attacker's foothold.

    Primary pool: application nodes whose installed implementation is a
    lateral catalog target. If that pool is too small, fall back to any
    vulnerable application nodes; any remaining shortfall is reported, not
    fatal.
    """
    lateral = np.zeros((graph.hbar, vuln.vulnerable.shape[1]), dtype=bool)
    for p, i in catalog.lateral:
        lateral[p, i] = True
    apps = np.flatnonzero(graph.is_app)
    primary = apps[lateral[graph.program[apps], config_installed[apps]]]
    take = min(size, primary.size)
    chosen = rng.permutation(primary)[:take] if take else np.empty(0, dtype=np.int64)
    if take < size:
        vulnerable = apps[vuln.vulnerable[graph.program[apps], config_installed[apps]]]
        extra_pool = np.setdiff1d(vulnerable, chosen, assume_unique=False)
        more = min(size - take, extra_pool.size)
        if more:
            chosen = np.concatenate([chosen, rng.permutation(extra_pool)[:more]])
        shortfall = size - take - more
        if shortfall:
            # an empty attack surface makes the shortfall structural, not odd
            level = logging.INFO if not vuln.vulnerable.any() else logging.WARNING
            logger.log(level, "initial compromise short by %d nodes", shortfall)
    else:
        shortfall = 0
    return InitialCompromise(np.sort(chosen).astype(np.int64), int(shortfall))
