"""Security metrics over ensemble-mean traces.

Time-to-succeed (tts), attack-worst-damage (awd), and the per-run
operational cost sum (aoc) reduce a single mean trace. Attack-slowdown
(asd) compares a diversified trace against the monoculture baseline.
Attack-extra-cost (aec), vulnerability tolerance (vt), and the operational
cost extrema reduce families of scenarios swept along a grid; the cells run
through the sweep helpers.

``None`` encodes a metric that was not achieved within the horizon.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AsdResult:
    steps: int
    censored: bool


@dataclass(frozen=True)
class AecResult:
    count: int
    fraction: float


def tts(trace, tau: float) -> int | None:
    """First step whose compromised fraction exceeds tau; None if never."""
    cc = np.asarray(trace.cc)
    hits = np.flatnonzero(cc > tau)
    return int(hits[0]) if hits.size else None


def awd(trace) -> float:
    """Worst compromised fraction over the horizon."""
    return float(np.max(np.asarray(trace.cc)))


def asd(trace_diversified, trace_monoculture, tau: float) -> AsdResult | None:
    """Slowdown of the breach relative to the monoculture baseline.

    Right-censored at the horizon when the diversified network is never
    breached; None when even the baseline is never breached.
    """
    t_base = tts(trace_monoculture, tau)
    if t_base is None:
        return None
    t_div = tts(trace_diversified, tau)
    horizon = len(trace_diversified.cc) - 1
    if t_div is None:
        return AsdResult(horizon - t_base, True)
    return AsdResult(t_div - t_base, False)


def aoc(trace) -> float:
    """Average per-step fraction of nodes redeployed (t >= 1)."""
    oc = np.asarray(trace.oc)
    horizon = len(oc) - 1
    if horizon <= 0:
        return 0.0
    return float(oc[1:].sum() / horizon)


def first_crossing(grid: Sequence[float], values: Sequence[float], tau: float):
    """First grid point whose value exceeds tau; None if none does.

    A non-monotone curve still has a well-defined first crossing; it is
    logged because it usually means the ensemble is too small.
    """
    values = np.asarray(values, dtype=float)
    if np.any(np.diff(values) < 0):
        logger.warning("curve not monotone along grid; first crossing used as-is")
    hits = np.flatnonzero(values > tau)
    return grid[int(hits[0])] if hits.size else None


def aec(base, defenders, tau: float, budgets: Sequence[int], jobs: int = 1) -> dict[str, AecResult | None]:
    """Extra exploit budget each strategy forces on the attacker.

    For every strategy the minimal grid budget whose worst damage exceeds
    tau is compared against the monoculture baseline's. Reported as a count
    and as a fraction of the full catalog (programs times vulnerable
    implementations).
    """
    from . import sweeps

    budgets = list(budgets)
    baseline_awd = [awd(sweeps.run_cell(c, jobs=jobs)) for c in sweeps.budget_cells(sweeps.monoculture_baseline(base), budgets)]
    base_star = first_crossing(budgets, baseline_awd, tau)
    full = base.pool.hbar * int(round(base.q * base.pool.x))
    out: dict[str, AecResult | None] = {}
    for spec in defenders:
        cells = sweeps.budget_cells(sweeps.variant(base, spec), budgets)
        curve = [awd(sweeps.run_cell(c, jobs=jobs)) for c in cells]
        star = first_crossing(budgets, curve, tau)
        if star is None or base_star is None:
            out[spec.strategy.value] = None
        else:
            count = int(star - base_star)
            out[spec.strategy.value] = AecResult(count, count / full if full else 0.0)
    return out


def vt(
    base,
    defenders,
    tau: float,
    q_grid: Sequence[float],
    attacker_fraction: float = 0.5,
    jobs: int = 1,
) -> dict[str, float]:
    """Largest software quality each strategy tolerates.

    The attacker scales with q (per-program exploit count =
    round(attacker_fraction * x * q)). The result is the largest grid q
    whose worst damage stays within tau, or 0.0 if none does.
    """
    from . import sweeps

    out: dict[str, float] = {}
    for spec in defenders:
        cells = sweeps.q_cells(sweeps.variant(base, spec), q_grid, fraction=attacker_fraction)
        tolerated = 0.0
        for q, cell in zip(q_grid, cells):
            if awd(sweeps.run_cell(cell, jobs=jobs)) <= tau:
                tolerated = max(tolerated, float(q))
        out[spec.strategy.value] = tolerated
    return out


def aoc_extrema(cells: Sequence, tau: float, jobs: int = 1) -> tuple[float, float] | None:
    """Min and max operational cost over family members holding awd <= tau.

    None when no member keeps the damage within tolerance.
    """
    from . import sweeps

    costs = []
    for cell in cells:
        trace = sweeps.run_cell(cell, jobs=jobs)
        if awd(trace) <= tau:
            costs.append(aoc(trace))
    if not costs:
        return None
    return min(costs), max(costs)
