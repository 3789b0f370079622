"""Discrete-time attack-defense loop and Monte Carlo driver.

Each step runs, in order: the defender plans and redeploys; attacker agents
act; OS compromise propagates to the local applications; agents spawn on
newly compromised nodes (they first act next step); the trace records the
computer-level outcome. A documented toggle moves the defender after the
attacker.

Agents act phase-major: all installs, then all discoveries, then privilege
escalations, then lateral movements, then damage, hosts in ascending id
within a pass and effects applied between passes. This is a deterministic
linearization of concurrently acting agents; pass effects are idempotent,
so within a pass the host order cannot change the outcome.

State lives in flat numpy arrays indexed by node id, which keeps a step at
a handful of vectorized operations regardless of how many agents act.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import defense as _defense_mod
from .defense import DefenderSpec, InitialAlgo, Strategy
from .diversity import (
    DiversityConfig,
    color_flipping,
    degree_priority_assignment,
    random_coloring,
)
from .netmodel import (
    COMPROMISED,
    INVULNERABLE,
    VULNERABLE,
    CommGraph,
    ImplementationPool,
    Layer,
    VulnerabilityMap,
    assign_vulnerabilities,
    build_graph,
    gather_neighbors,
    generate_synthetic_network,
    load_network_files,
)
from .rng import Purpose, substream
from .threat import (
    PHASE_AFTER,
    AttackPhase,
    AttackerKnowledge,
    AttackerSpec,
    CatalogError,
    build_exploit_catalog,
    initial_compromise,
)

logger = logging.getLogger(__name__)

# after this many steps without new compromises or fresh attacker knowledge a
# non-acting defender's run has reached a fixed cycle (agent phases cycle with
# period 4) and the remaining trace rows repeat verbatim
_QUIET_LIMIT = 4


# --- network sources ----------------------------------------------------------

@dataclass(frozen=True)
class SyntheticNetwork:
    n_layer1: int
    n_layer2: int
    overlap_fraction: float
    attachment_degree: int
    seed: int


@dataclass(frozen=True)
class NetworkFiles:
    layer_paths: tuple[str, ...]
    users_path: str | None = None


@dataclass(frozen=True, eq=False)
class PrebuiltNetwork:
    graph: CommGraph


def resolve_graph(network) -> CommGraph:
    if isinstance(network, PrebuiltNetwork):
        return network.graph
    if isinstance(network, NetworkFiles):
        layers, users = load_network_files(network.layer_paths, network.users_path)
        return build_graph(layers, users)
    if isinstance(network, SyntheticNetwork):
        layers = generate_synthetic_network(
            network.n_layer1,
            network.n_layer2,
            network.overlap_fraction,
            network.attachment_degree,
            network.seed,
        )
        return build_graph(layers)
    raise TypeError(f"unknown network source {type(network).__name__}")


# --- scenario -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything one simulation needs; immutable and picklable."""

    network: SyntheticNetwork | NetworkFiles | PrebuiltNetwork
    pool: ImplementationPool
    q: float
    attacker: AttackerSpec
    defender: DefenderSpec
    t_max: int = 500
    runs: int = 100
    seed: int = 0
    defender_first: bool = True

    def __post_init__(self) -> None:
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q outside [0, 1]")
        if self.defender.strategy is Strategy.MONOCULTURE and self.pool.x != 1:
            raise _defense_mod.SpecError("monoculture requires a single implementation (x=1)")
        k = int(round(self.q * self.pool.x))
        if self.attacker.m3 > k:
            raise CatalogError(f"m3={self.attacker.m3} exceeds {k} vulnerable OS implementations")
        n_apps = self.pool.hbar - 1
        base, rem = divmod(self.attacker.m4, n_apps)
        if base + (1 if rem else 0) > k:
            raise CatalogError(f"m4={self.attacker.m4} implies a per-application share above {k}")


# --- traces -------------------------------------------------------------------

_TRACE_HEADER = "t,cc,vc,ic,oc,new_compromised"


@dataclass(eq=False)
class Trace:
    """Per-step computer-level outcome of one run.

    Fractions are stored as exact integer counts over ``n_computers``; the
    float properties divide on access.
    """

    n_computers: int
    cc_count: np.ndarray
    vc_count: np.ndarray
    ic_count: np.ndarray
    oc: np.ndarray
    new_compromised: np.ndarray

    @property
    def cc(self) -> np.ndarray:
        return self.cc_count / self.n_computers

    @property
    def vc(self) -> np.ndarray:
        return self.vc_count / self.n_computers

    @property
    def ic(self) -> np.ndarray:
        return self.ic_count / self.n_computers

    def __len__(self) -> int:
        return len(self.oc)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(_TRACE_HEADER + "\n")
            cc, vc, ic = self.cc, self.vc, self.ic
            for t in range(len(self.oc)):
                fh.write(
                    f"{t},{cc[t]:.6f},{vc[t]:.6f},{ic[t]:.6f},"
                    f"{self.oc[t]:.6f},{int(self.new_compromised[t])}\n"
                )


@dataclass(eq=False)
class MeanTrace:
    """Element-wise ensemble mean over runs."""

    cc: np.ndarray
    vc: np.ndarray
    ic: np.ndarray
    oc: np.ndarray
    new_compromised: np.ndarray
    runs: int

    def __len__(self) -> int:
        return len(self.oc)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            fh.write(_TRACE_HEADER + "\n")
            for t in range(len(self.oc)):
                fh.write(
                    f"{t},{self.cc[t]:.6f},{self.vc[t]:.6f},{self.ic[t]:.6f},"
                    f"{self.oc[t]:.6f},{self.new_compromised[t]:.6f}\n"
                )


# --- run state ----------------------------------------------------------------

@dataclass(eq=False)
class RunState:
    scenario: Scenario
    graph: CommGraph
    run_index: int
    vuln: VulnerabilityMap
    installed: np.ndarray
    state: np.ndarray
    privesc_mask: np.ndarray
    lateral_mask: np.ndarray
    knowledge: AttackerKnowledge
    agent_alive: np.ndarray
    agent_phase: np.ndarray
    agent_spawned: np.ndarray
    remote_access: np.ndarray
    rng_detector: np.random.Generator
    rng_redeploy: np.random.Generator
    rng_proactive: np.random.Generator
    ini_shortfall: int = 0
    damage_events: int = 0
    quiet_steps: int = 0
    _cc: list = field(default_factory=list)
    _vc: list = field(default_factory=list)
    _ic: list = field(default_factory=list)
    _oc: list = field(default_factory=list)
    _new: list = field(default_factory=list)

    @property
    def pool(self) -> ImplementationPool:
        return self.scenario.pool


def _initial_config(
    scenario: Scenario, graph: CommGraph, run_index: int, fixed: np.ndarray | None
) -> np.ndarray:
    if fixed is not None:
        return fixed.copy()
    algo = scenario.defender.initial_algo
    rng = substream(scenario.seed, run_index, Purpose.COLORING)
    if algo is InitialAlgo.RANDOM:
        return random_coloring(graph, scenario.pool, rng).installed
    if algo is InitialAlgo.COLOR_FLIP:
        return color_flipping(graph, scenario.pool, rng)[0].installed.copy()
    return degree_priority_assignment(graph, scenario.pool)[0].installed.astype(np.int16)


def init_run(
    scenario: Scenario,
    run_index: int,
    graph: CommGraph | None = None,
    fixed_installed: np.ndarray | None = None,
) -> RunState:
    """Build the run state at t=0, including the t=0 trace row.

    ``fixed_installed`` short-circuits the initial coloring; the Monte Carlo
    driver uses it to share the deterministic degree-priority assignment
    across runs.
    """
    if graph is None:
        graph = resolve_graph(scenario.network)
    if graph.hbar != scenario.pool.hbar:
        raise ValueError(
            f"pool has {scenario.pool.hbar} programs but the network implies {graph.hbar}"
        )
    pool = scenario.pool
    vuln = assign_vulnerabilities(
        pool, scenario.q, substream(scenario.seed, run_index, Purpose.VULNERABILITY)
    )
    installed = _initial_config(scenario, graph, run_index, fixed_installed)
    catalog = build_exploit_catalog(
        pool,
        vuln,
        scenario.attacker.m3,
        scenario.attacker.m4,
        substream(scenario.seed, run_index, Purpose.CATALOG),
    )
    state = np.where(
        vuln.vulnerable[graph.program, installed], VULNERABLE, INVULNERABLE
    ).astype(np.int8)
    if scenario.attacker.initial_nodes is not None:
        ini = np.asarray(sorted(scenario.attacker.initial_nodes), dtype=np.int64)
        shortfall = 0
    else:
        picked = initial_compromise(
            graph,
            installed,
            catalog,
            vuln,
            scenario.attacker.initial_compromise_size,
            substream(scenario.seed, run_index, Purpose.INITIAL_COMPROMISE),
        )
        ini, shortfall = picked.nodes, picked.shortfall
    state[ini] = COMPROMISED

    knowledge = AttackerKnowledge.empty(graph.n_nodes)
    knowledge.observe(ini, installed, 0)
    agent_alive = np.zeros(graph.n_nodes, dtype=bool)
    agent_phase = np.zeros(graph.n_nodes, dtype=np.int8)
    agent_spawned = np.full(graph.n_nodes, -1, dtype=np.int32)
    agent_alive[ini] = True
    agent_phase[ini] = AttackPhase.INSTALL
    agent_spawned[ini] = 0

    rs = RunState(
        scenario=scenario,
        graph=graph,
        run_index=run_index,
        vuln=vuln,
        installed=installed,
        state=state,
        privesc_mask=catalog.privesc_mask(pool),
        lateral_mask=catalog.lateral_mask(pool),
        knowledge=knowledge,
        agent_alive=agent_alive,
        agent_phase=agent_phase,
        agent_spawned=agent_spawned,
        remote_access=np.zeros(graph.n_nodes, dtype=bool),
        rng_detector=substream(scenario.seed, run_index, Purpose.DETECTOR),
        rng_redeploy=substream(scenario.seed, run_index, Purpose.REDEPLOY),
        rng_proactive=substream(scenario.seed, run_index, Purpose.PROACTIVE_SAMPLE),
        ini_shortfall=shortfall,
    )
    rs._oc.append(0.0)
    rs._new.append(int(ini.size))
    _record_frame(rs)
    return rs


def _mark_compromised(rs: RunState, nodes: np.ndarray, t: int) -> None:
    rs.state[nodes] = COMPROMISED
    # the attacker controls these nodes now; its information on them is current
    rs.knowledge.observe(nodes, rs.installed, t)


def _attack_substep(rs: RunState, t: int) -> int:
    g = rs.graph
    newly: list[np.ndarray] = []
    fresh = 0
    hosts = np.flatnonzero(rs.agent_alive)
    if hosts.size:
        ph = rs.agent_phase[hosts]
        installing = hosts[ph == AttackPhase.INSTALL]
        if installing.size:
            rs.remote_access[installing] = True
        discovering = hosts[ph == AttackPhase.DISCOVERY]
        if discovering.size:
            nbrs = gather_neighbors(g.indptr, g.indices, discovering)
            obs = np.concatenate([discovering, nbrs])
            fresh += rs.knowledge.observe(obs, rs.installed, t)
        escalating = hosts[ph == AttackPhase.PRIVILEGE_ESCALATION]
        if escalating.size:
            apps = escalating[g.is_app[escalating]]
            if apps.size:
                os_targets = np.unique(g.os_node[apps])
                hit = os_targets[
                    (rs.state[os_targets] == VULNERABLE)
                    & rs.privesc_mask[rs.installed[os_targets]]
                ]
                if hit.size:
                    _mark_compromised(rs, hit, t)
                    newly.append(hit)
        moving = hosts[ph == AttackPhase.LATERAL_MOVEMENT]
        if moving.size:
            nbrs = gather_neighbors(g.indptr, g.indices, moving)
            know = rs.knowledge
            ok = (
                (rs.state[nbrs] == VULNERABLE)
                & know.known[nbrs]
                & (know.impl[nbrs] == rs.installed[nbrs])
                & rs.lateral_mask[g.program[nbrs], rs.installed[nbrs]]
            )
            hit = np.unique(nbrs[ok])
            if hit.size:
                _mark_compromised(rs, hit, t)
                newly.append(hit)
        rs.damage_events += int((ph == AttackPhase.DAMAGE).sum())
        rs.agent_phase[hosts] = PHASE_AFTER[ph]

    # a compromised OS takes all of its applications down in the same step
    spread = np.flatnonzero(
        g.is_app & (rs.state != COMPROMISED) & (rs.state[g.os_node] == COMPROMISED)
    )
    if spread.size:
        _mark_compromised(rs, spread, t)
        newly.append(spread)

    if newly:
        nodes = np.concatenate(newly)
        rs.agent_alive[nodes] = True
        rs.agent_phase[nodes] = AttackPhase.INSTALL
        rs.agent_spawned[nodes] = t
        rs.quiet_steps = 0
        return int(nodes.size)
    if fresh:
        rs.quiet_steps = 0
    else:
        rs.quiet_steps += 1
    return 0


def _defense_substep(rs: RunState, t: int) -> float:
    spec = rs.scenario.defender
    nodes = _defense_mod.plan(spec, t, rs.state, rs.graph, rs.rng_detector, rs.rng_proactive)
    if nodes.size:
        rs.installed, rs.state, oc = _defense_mod.redeploy(
            rs.graph, rs.pool, rs.vuln, rs.installed, rs.state, nodes, rs.rng_redeploy
        )
        rs.agent_alive[nodes] = False
        rs.quiet_steps = 0
        return oc
    return 0.0


def _record_frame(rs: RunState) -> None:
    starts = rs.graph.comp_start[:-1]
    has_comp = np.logical_or.reduceat(rs.state == COMPROMISED, starts)
    has_vul = np.logical_or.reduceat(rs.state == VULNERABLE, starts)
    cc = int(has_comp.sum())
    vc = int((~has_comp & has_vul).sum())
    rs._cc.append(cc)
    rs._vc.append(vc)
    rs._ic.append(rs.graph.n_computers - cc - vc)


def step(rs: RunState, t: int) -> None:
    """Advance one time step, appending one trace row."""
    if rs.scenario.defender_first:
        oc = _defense_substep(rs, t)
        new = _attack_substep(rs, t)
    else:
        new = _attack_substep(rs, t)
        oc = _defense_substep(rs, t)
    rs._oc.append(oc)
    rs._new.append(new)
    _record_frame(rs)


def _trace_from(rs: RunState) -> Trace:
    return Trace(
        n_computers=rs.graph.n_computers,
        cc_count=np.asarray(rs._cc, dtype=np.int64),
        vc_count=np.asarray(rs._vc, dtype=np.int64),
        ic_count=np.asarray(rs._ic, dtype=np.int64),
        oc=np.asarray(rs._oc, dtype=np.float64),
        new_compromised=np.asarray(rs._new, dtype=np.int64),
    )


def run(
    scenario: Scenario,
    run_index: int,
    graph: CommGraph | None = None,
    step_callback: Callable[[RunState, int], None] | None = None,
    fixed_installed: np.ndarray | None = None,
) -> Trace:
    """Execute one seeded run and return its trace.

    With a non-acting defender the loop stops early once the attack has
    provably saturated (no new compromise or knowledge for a full phase
    cycle) and repeats the final row; a ``step_callback`` disables the
    shortcut so instrumented runs see every step.
    """
    rs = init_run(scenario, run_index, graph=graph, fixed_installed=fixed_installed)
    if step_callback is not None:
        step_callback(rs, 0)
    passive = scenario.defender.strategy in (Strategy.MONOCULTURE, Strategy.STATIC)
    for t in range(1, scenario.t_max + 1):
        step(rs, t)
        if step_callback is not None:
            step_callback(rs, t)
        elif passive and rs.quiet_steps >= _QUIET_LIMIT and t < scenario.t_max:
            remaining = scenario.t_max - t
            rs._cc.extend(rs._cc[-1:] * remaining)
            rs._vc.extend(rs._vc[-1:] * remaining)
            rs._ic.extend(rs._ic[-1:] * remaining)
            rs._oc.extend([0.0] * remaining)
            rs._new.extend([0] * remaining)
            logger.debug("run %d saturated at t=%d", run_index, t)
            break
    return _trace_from(rs)


# --- Monte Carlo --------------------------------------------------------------

def _shared_coloring(scenario: Scenario, graph: CommGraph) -> np.ndarray | None:
    # degree-priority is deterministic given graph and pool: compute once
    if scenario.defender.initial_algo is InitialAlgo.DEGREE_PRIORITY:
        return degree_priority_assignment(graph, scenario.pool)[0].installed.astype(np.int16)
    return None


def _run_chunk(payload) -> list[Trace]:
    scenario, graph, indices, fixed = payload
    return [run(scenario, i, graph=graph, fixed_installed=fixed) for i in indices]


def mean_of(traces: Sequence[Trace]) -> MeanTrace:
    n = traces[0].n_computers
    cc = np.stack([tr.cc_count for tr in traces]) / n
    vc = np.stack([tr.vc_count for tr in traces]) / n
    ic = np.stack([tr.ic_count for tr in traces]) / n
    oc = np.stack([tr.oc for tr in traces])
    new = np.stack([tr.new_compromised for tr in traces]).astype(np.float64)
    return MeanTrace(
        cc=cc.mean(axis=0),
        vc=vc.mean(axis=0),
        ic=ic.mean(axis=0),
        oc=oc.mean(axis=0),
        new_compromised=new.mean(axis=0),
        runs=len(traces),
    )


def monte_carlo(
    scenario: Scenario,
    jobs: int = 1,
    executor: ProcessPoolExecutor | None = None,
    collect: bool = False,
) -> MeanTrace | tuple[MeanTrace, list[Trace]]:
    """Run the ensemble and average it.

    Runs are independent; per-run traces depend only on (scenario, seed,
    run index), and the mean reduces them in run-index order, so the result
    is identical for every ``jobs`` value.
    """
    graph = resolve_graph(scenario.network)
    fixed = _shared_coloring(scenario, graph)
    indices = list(range(scenario.runs))
    if jobs <= 1 and executor is None:
        traces = [run(scenario, i, graph=graph, fixed_installed=fixed) for i in indices]
    else:
        chunks = [c.tolist() for c in np.array_split(np.asarray(indices), max(jobs, 1)) if c.size]
        payloads = [(scenario, graph, chunk, fixed) for chunk in chunks]
        if executor is None:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(_run_chunk, payloads))
        else:
            parts = list(executor.map(_run_chunk, payloads))
        traces = [tr for part in parts for tr in part]
    mean = mean_of(traces)
    return (mean, traces) if collect else mean


def write_snapshot(rs: RunState, path: str | Path) -> None:
    """Per-node debugging snapshot: id, program, installed impl, state."""
    with open(path, "w") as fh:
        fh.write("id,program,impl,state\n")
        for v in range(rs.graph.n_nodes):
            fh.write(f"{v},{rs.graph.program[v]},{rs.installed[v]},{rs.state[v]}\n")


def final_snapshot(scenario: Scenario, run_index: int, path: str | Path) -> None:
    """Re-execute one run and write its final state snapshot."""
    graph = resolve_graph(scenario.network)
    holder: dict[str, RunState] = {}

    def keep(rs: RunState, t: int) -> None:
        holder["rs"] = rs

    run(scenario, run_index, graph=graph, step_callback=keep)
    write_snapshot(holder["rs"], path)
