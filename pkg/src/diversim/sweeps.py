"""Scenario families and parameter sweeps.

A sweep executes a Cartesian grid of independent scenario cells, each a
Monte Carlo ensemble, and reduces the cells to metric rows. Cells share
the master seed: sweeping a knob compares like against like, with all
random substreams coupled across cells.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import metrics
from .defense import DefenderSpec, InitialAlgo, Strategy
from .engine import MeanTrace, Scenario, monte_carlo
from .netmodel import ImplementationPool
from .threat import AttackerSpec

logger = logging.getLogger(__name__)


def variant(base: Scenario, defender: DefenderSpec) -> Scenario:
    """The base scenario under a different defender."""
    if defender.strategy is Strategy.MONOCULTURE:
        return monoculture_baseline(base, defender)
    return replace(base, defender=defender)


def monoculture_baseline(base: Scenario, defender: DefenderSpec | None = None) -> Scenario:
    """The undiversified twin of a scenario: one implementation per program,
    attacker budget clamped to what a single implementation can absorb."""
    pool = ImplementationPool(base.pool.hbar, 1)
    if defender is None:
        defender = DefenderSpec(
            Strategy.MONOCULTURE, tau=base.defender.tau, initial_algo=InitialAlgo.RANDOM
        )
    k = int(round(base.q * 1))
    attacker = replace(
        base.attacker,
        m3=min(base.attacker.m3, k),
        m4=min(base.attacker.m4, (pool.hbar - 1) * k),
    )
    return replace(base, pool=pool, defender=defender, attacker=attacker)


def _clamp_budget(q: float, pool: ImplementationPool, m3: int, m4: int) -> tuple[int, int]:
    # a grid budget beyond the vulnerable supply saturates instead of failing
    k = int(round(q * pool.x))
    n_apps = pool.hbar - 1
    return min(m3, k), min(m4, n_apps * k)


def split_budget(total: int, hbar: int) -> tuple[int, int]:
    """Split a total exploit budget evenly across the programs, remainder to
    lower program indices; returns (m3, m4) with the OS share last."""
    base, rem = divmod(int(total), hbar)
    shares = [base + (1 if p < rem else 0) for p in range(hbar)]
    return shares[-1], sum(shares[:-1])


def budget_cells(scenario: Scenario, budgets: Sequence[int]) -> list[Scenario]:
    cells = []
    for total in budgets:
        m3, m4 = split_budget(total, scenario.pool.hbar)
        m3, m4 = _clamp_budget(scenario.q, scenario.pool, m3, m4)
        cells.append(replace(scenario, attacker=replace(scenario.attacker, m3=m3, m4=m4)))
    return cells


def q_cells(
    scenario: Scenario,
    q_grid: Sequence[float],
    scale_attacker: bool = True,
    fraction: float = 0.5,
) -> list[Scenario]:
    """One cell per software quality; by default the attacker scales along,
    holding round(fraction * x * q) exploits per program."""
    cells = []
    for q in q_grid:
        att = scenario.attacker
        if scale_attacker:
            per = int(round(fraction * scenario.pool.x * q))
            att = replace(att, m3=per, m4=(scenario.pool.hbar - 1) * per)
        else:
            m3, m4 = _clamp_budget(float(q), scenario.pool, att.m3, att.m4)
            att = replace(att, m3=m3, m4=m4)
        cells.append(replace(scenario, q=float(q), attacker=att))
    return cells


def run_cell(
    scenario: Scenario, jobs: int = 1, executor: ProcessPoolExecutor | None = None
) -> MeanTrace:
    return monte_carlo(scenario, jobs=jobs, executor=executor)


# --- CSV output ---------------------------------------------------------------

SWEEP_COLUMNS = (
    "strategy",
    "initial_algo",
    "hbar",
    "x",
    "q",
    "m3",
    "m4",
    "ini_comp",
    "eta1",
    "eta2",
    "fpr",
    "fnr",
    "tau",
    "t_max",
    "runs",
    "seed",
    "swept_key",
    "swept_value",
    "awd",
    "aoc",
    "tts",
    "tts_censored",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def cell_row(scenario: Scenario, swept_key: str, swept_value, trace: MeanTrace, tau: float) -> dict:
    d = scenario.defender
    t = metrics.tts(trace, tau)
    return {
        "strategy": d.strategy.value,
        "initial_algo": d.initial_algo.value,
        "hbar": scenario.pool.hbar,
        "x": scenario.pool.x,
        "q": scenario.q,
        "m3": scenario.attacker.m3,
        "m4": scenario.attacker.m4,
        "ini_comp": scenario.attacker.initial_compromise_size,
        "eta1": d.eta1,
        "eta2": d.eta2,
        "fpr": d.fpr,
        "fnr": d.fnr,
        "tau": tau,
        "t_max": scenario.t_max,
        "runs": scenario.runs,
        "seed": scenario.seed,
        "swept_key": swept_key,
        "swept_value": swept_value,
        "awd": metrics.awd(trace),
        "aoc": metrics.aoc(trace),
        "tts": t,
        "tts_censored": t is None,
    }


def write_sweep_csv(path: str | Path, rows: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in SWEEP_COLUMNS) + "\n")


def write_summary_csv(path: str | Path, rows: Iterable[tuple]) -> None:
    """Rows of (strategy, tau, metric, value, censored)."""
    with open(path, "w") as fh:
        fh.write("strategy,tau,metric,value,censored\n")
        for strategy, tau, metric, value, censored in rows:
            fh.write(
                f"{strategy},{_fmt(float(tau))},{metric},{_fmt(value)},{_fmt(bool(censored))}\n"
            )


def parse_grid(text: str) -> np.ndarray:
    """Parse start:stop:step into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start:
        raise ValueError("grid stop below start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 10)
