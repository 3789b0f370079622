"""Layered user networks and the program-level communication graph.

Users are non-negative integer ids. Each social layer carries the links of
one application; a user owns one computer hosting an application node for
every layer the user participates in, plus a single operating-system node.

Edges of the communication graph:

* intra-computer: every local application pairs with the local OS and with
  every other local application;
* inter-computer: a layer-j link (u, w) connects u's and w's layer-j
  application nodes.

OS nodes never connect across computers, so every inter-computer edge joins
two nodes of the same program. Node ids are computer-major (computers in
ascending user-id order; within a computer, application nodes in program
order, then the OS node). The graph is immutable for the whole simulation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# node states shared by the whole simulator
VULNERABLE = 0
COMPROMISED = 1
INVULNERABLE = 2


class NetworkError(ValueError):
    """Malformed layers, users, or edge-list files."""


@dataclass(frozen=True)
class ImplementationPool:
    """Available diversity: ``hbar`` programs with ``x`` implementations each.

    Programs 0 .. hbar-2 are the applications (one per layer); program
    hbar-1 is the operating system.
    """

    hbar: int
    x: int

    def __post_init__(self) -> None:
        if self.hbar < 2:
            raise NetworkError("pool needs at least one application program plus the OS")
        if self.x < 1:
            raise NetworkError("each program needs at least one implementation")

    @property
    def os_program(self) -> int:
        return self.hbar - 1


@dataclass(frozen=True)
class Layer:
    """One application layer: undirected links over user ids.

    ``participants`` may exceed the ids appearing in ``edges``; a user that
    belongs to the layer but has no links still gets the application node.
    """

    edges: tuple[tuple[int, int], ...]
    participants: frozenset[int]

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]],
        participants: Iterable[int] | None = None,
    ) -> "Layer":
        seen: set[tuple[int, int]] = set()
        for u, w in edges:
            u, w = int(u), int(w)
            if u < 0 or w < 0:
                raise NetworkError(f"negative user id in edge ({u}, {w})")
            if u == w:
                continue  # self links carry no inter-computer information
            seen.add((u, w) if u < w else (w, u))
        canon = tuple(sorted(seen))
        if participants is None:
            members = frozenset(u for e in canon for u in e)
        else:
            members = frozenset(int(u) for u in participants)
            missing = [e for e in canon if e[0] not in members or e[1] not in members]
            if missing:
                raise NetworkError(f"edge {missing[0]} references a user outside the layer")
        return cls(canon, members)


class CommGraph:
    """Program-level communication graph with precomputed index arrays.

    Node attributes are stored as flat arrays indexed by node id:
    ``program`` (program index, OS == hbar-1), ``computer`` (computer
    index), ``os_node`` (the id of the node's computer's OS node).
    ``comp_start`` delimits the contiguous node-id range of each computer.
    Adjacency is CSR (``indptr``/``indices``); ``sp_indptr``/``sp_indices``
    restrict it to same-program neighbors, the only ones that matter for
    defective edges.
    """

    def __init__(self, layers: Sequence[Layer], users: Iterable[int] | None = None):
        layers = tuple(layers)
        if not layers:
            raise NetworkError("need at least one layer")
        if users is None:
            users_arr = sorted(set().union(*(l.participants for l in layers)))
        else:
            users_arr = sorted(int(u) for u in set(users))
        if not users_arr:
            raise NetworkError("empty user set")
        if users_arr[0] < 0:
            raise NetworkError("negative user id")
        self.users = np.asarray(users_arr, dtype=np.int64)
        self.n_computers = len(users_arr)
        self.hbar = len(layers) + 1
        self.os_program = self.hbar - 1
        user_index = {u: i for i, u in enumerate(users_arr)}

        for j, layer in enumerate(layers):
            stray = layer.participants.difference(user_index)
            if stray:
                raise NetworkError(f"layer {j} references unknown user {min(stray)}")

        participates = np.zeros((self.n_computers, len(layers)), dtype=bool)
        for j, layer in enumerate(layers):
            for u in layer.participants:
                participates[user_index[u], j] = True
        appless = np.flatnonzero(~participates.any(axis=1))
        if appless.size:
            raise NetworkError(
                f"user {users_arr[appless[0]]} participates in no layer; "
                "every computer needs at least one application"
            )

        # computer-major node numbering: apps in program order, then the OS
        app_counts = participates.sum(axis=1)
        self.comp_start = np.zeros(self.n_computers + 1, dtype=np.int64)
        np.cumsum(app_counts + 1, out=self.comp_start[1:])
        self.n_nodes = int(self.comp_start[-1])

        self.program = np.empty(self.n_nodes, dtype=np.int16)
        self.computer = np.empty(self.n_nodes, dtype=np.int64)
        # app_node[c, j] = node id of computer c's layer-j application, -1 if absent
        self.app_node = np.full((self.n_computers, len(layers)), -1, dtype=np.int64)
        self.os_of_computer = np.empty(self.n_computers, dtype=np.int64)
        for c in range(self.n_computers):
            nid = int(self.comp_start[c])
            for j in range(len(layers)):
                if participates[c, j]:
                    self.app_node[c, j] = nid
                    self.program[nid] = j
                    self.computer[nid] = c
                    nid += 1
            self.os_of_computer[c] = nid
            self.program[nid] = self.os_program
            self.computer[nid] = c
        self.os_node = self.os_of_computer[self.computer]
        self.is_app = self.program != self.os_program

        edges: list[tuple[int, int]] = []
        for c in range(self.n_computers):
            local = [int(a) for a in self.app_node[c] if a >= 0]
            osn = int(self.os_of_computer[c])
            for i, a in enumerate(local):
                edges.append((a, osn))
                for b in local[i + 1:]:
                    edges.append((a, b))
        for j, layer in enumerate(layers):
            for u, w in layer.edges:
                a = int(self.app_node[user_index[u], j])
                b = int(self.app_node[user_index[w], j])
                edges.append((a, b) if a < b else (b, a))
        self.edges = np.asarray(sorted(set(edges)), dtype=np.int64).reshape(-1, 2)
        self.n_edges = len(self.edges)

        self.indptr, self.indices = _csr(self.n_nodes, self.edges)
        sp = self.edges[self.program[self.edges[:, 0]] == self.program[self.edges[:, 1]]]
        self.sp_edges = sp
        self.sp_indptr, self.sp_indices = _csr(self.n_nodes, sp)
        self.degree = np.diff(self.indptr)
        self.layers = layers

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def same_program_neighbors(self, node: int) -> np.ndarray:
        return self.sp_indices[self.sp_indptr[node]:self.sp_indptr[node + 1]]


def _csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(edges) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst


def build_graph(layers: Sequence[Layer], users: Iterable[int] | None = None) -> CommGraph:
    """Assemble the communication graph for the given layers.

    ``users`` defaults to the union of layer participants. Supplying extra
    users that participate in no layer is an error: such a computer would
    have no application node.
    """
    return CommGraph(layers, users)


def gather_neighbors(indptr: np.ndarray, indices: np.ndarray, hosts: np.ndarray) -> np.ndarray:
    """Concatenated neighbor lists for ``hosts`` without a Python loop."""
    counts = indptr[hosts + 1] - indptr[hosts]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    cum = np.concatenate(([0], np.cumsum(counts)[:-1]))
    pos = np.arange(total, dtype=np.int64) - np.repeat(cum, counts) + np.repeat(indptr[hosts], counts)
    return indices[pos]


# --- vulnerability assignment ------------------------------------------------

@dataclass(frozen=True, eq=False)
class VulnerabilityMap:
    """Which implementations are vulnerable; row per program, column per impl."""

    vulnerable: np.ndarray
    q: float


def assign_vulnerabilities(pool: ImplementationPool, q: float, rng: np.random.Generator) -> VulnerabilityMap:
    """Mark exactly round(q * x) implementations of every program vulnerable.

    The draw is a permutation prefix, so with a shared stream a larger q
    yields a superset of a smaller q's vulnerable set.
    """
    if not 0.0 <= q <= 1.0:
        raise NetworkError(f"software quality q={q} outside [0, 1]")
    k = int(round(q * pool.x))
    vul = np.zeros((pool.hbar, pool.x), dtype=bool)
    for p in range(pool.hbar):
        vul[p, rng.permutation(pool.x)[:k]] = True
    return VulnerabilityMap(vul, q)


# --- synthetic networks -------------------------------------------------------

def _preferential_attachment(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    # classic growth process: each new node links to m distinct targets drawn
    # from a list holding one entry per incident edge
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    targets = list(range(m))
    for v in range(m, n):
        for t in targets:
            edges.append((t, v))
        repeated.extend(targets)
        repeated.extend([v] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        targets = sorted(chosen)
    return edges


def generate_synthetic_network(
    n_layer1: int,
    n_layer2: int,
    overlap_fraction: float,
    attachment_degree: int,
    seed: int,
) -> tuple[Layer, Layer]:
    """Two preferential-attachment layers over a partially shared user set.

    ``overlap_fraction`` of the smaller layer's users also participate in the
    other layer. Deterministic under ``seed``.
    """
    m = int(attachment_degree)
    if m < 1:
        raise NetworkError("attachment degree must be >= 1")
    if min(n_layer1, n_layer2) < m + 1:
        raise NetworkError("layer size must exceed the attachment degree")
    if not 0.0 <= overlap_fraction <= 1.0:
        raise NetworkError("overlap fraction outside [0, 1]")
    rng = np.random.default_rng(seed)
    edges1 = _preferential_attachment(n_layer1, m, rng)
    overlap = int(round(overlap_fraction * min(n_layer1, n_layer2)))
    shared = rng.choice(n_layer1, size=overlap, replace=False)
    fresh = np.arange(n_layer1, n_layer1 + n_layer2 - overlap, dtype=np.int64)
    ids2 = rng.permutation(np.concatenate([shared, fresh]))
    edges2 = [(int(ids2[a]), int(ids2[b])) for a, b in _preferential_attachment(n_layer2, m, rng)]
    layer1 = Layer.from_edges(edges1, participants=range(n_layer1))
    layer2 = Layer.from_edges(edges2, participants=(int(u) for u in ids2))
    return layer1, layer2


# --- edge-list files ----------------------------------------------------------

def read_edge_file(path: str | Path) -> list[tuple[int, int]]:
    """Parse an edge-list file: one edge per line, two whitespace-separated
    non-negative integer user ids; lines starting with '#' are comments."""
    edges = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise NetworkError(f"{path}:{lineno}: expected two ids, got {line!r}")
            try:
                u, w = int(parts[0]), int(parts[1])
            except ValueError:
                raise NetworkError(f"{path}:{lineno}: non-integer id in {line!r}") from None
            if u < 0 or w < 0:
                raise NetworkError(f"{path}:{lineno}: negative user id")
            edges.append((u, w))
    return edges


def write_edge_file(path: str | Path, edges: Iterable[tuple[int, int]], comment: str | None = None) -> None:
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for u, w in edges:
            fh.write(f"{u} {w}\n")


def read_users_file(path: str | Path) -> frozenset[int]:
    """One user id per line; '#' comments allowed."""
    users = set()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                users.add(int(line))
            except ValueError:
                raise NetworkError(f"{path}:{lineno}: non-integer user id {line!r}") from None
    return frozenset(users)


def load_network_files(
    layer_paths: Sequence[str | Path],
    users_path: str | Path | None = None,
) -> tuple[tuple[Layer, ...], frozenset[int]]:
    """Load layers from edge-list files; the user set is the union of all ids
    plus the optional users file."""
    layers = tuple(Layer.from_edges(read_edge_file(p)) for p in layer_paths)
    users = set().union(*(l.participants for l in layers)) if layers else set()
    if users_path is not None:
        users |= read_users_file(users_path)
    return layers, frozenset(users)
