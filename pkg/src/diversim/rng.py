"""Seedable random substreams.

Every stochastic mechanism in a run draws from its own generator, derived
from (master seed, run index, purpose). Toggling one mechanism, say the
detector, therefore never shifts the draws seen by another, say the
vulnerability assignment. Purpose values are part of the reproducibility
contract and must never be renumbered.
"""
from __future__ import annotations

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    VULNERABILITY = 0
    COLORING = 1
    CATALOG = 2
    INITIAL_COMPROMISE = 3
    DETECTOR = 4
    REDEPLOY = 5
    PROACTIVE_SAMPLE = 6


def substream(master_seed: int, run_index: int, purpose: Purpose) -> np.random.Generator:
    """Generator for one (run, purpose) pair, independent of all others."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(run_index, int(purpose)))
    return np.random.default_rng(seq)
