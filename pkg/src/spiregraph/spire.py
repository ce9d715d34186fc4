"""Explicit spired graphs and the obfuscating label oracle (small parameters only).

Vertex ``(v, s)`` with ``s`` a string of length ``l`` over an alphabet of size D
is stored at ``v * S + (D**l - 1) / (D - 1) + int(s, base D)`` where
``S = (D**(L+1) - 1) / (D - 1)`` is the spire size.  The parent of ``(v, s.a)``
is ``(v, s)``, so parents and children are pure index arithmetic.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from os import PathLike
from typing import TextIO

import numpy as np

from .errors import CapacityError
from .graphs import BaseGraph
from .linalg import symmetric_eigh
from .signal import ComplexSeries

SIZE_CAP = 200_000
DENSE_CAP = 5_000
BUILD_STREAM = 0
LABEL_STREAM = 1


def spire_size(D: int, L: int) -> int:
    return L + 1 if D == 1 else (D ** (L + 1) - 1) // (D - 1)


def level_offset(D: int, level: int) -> int:
    return level if D == 1 else (D**level - 1) // (D - 1)


@dataclass(eq=False)
class SpiredGraph:
    """Spired graph with padded neighbour table ``adj`` (``-1`` fills the apex row)."""

    base: BaseGraph
    L: int
    c: int
    adj: np.ndarray
    seed: int

    @property
    def D(self) -> int:
        return self.c * self.base.d

    @property
    def spire(self) -> int:
        return spire_size(self.D, self.L)

    @property
    def num_vertices(self) -> int:
        return self.base.n * self.spire

    @property
    def apex_indices(self) -> list[int]:
        return [v * self.spire for v in range(self.base.n)]

    def vertex(self, v: int, level: int, word: int) -> int:
        return v * self.spire + level_offset(self.D, level) + word

    def locate(self, index: int) -> tuple[int, int, int]:
        """Inverse of ``vertex``: ``(v, level, word)``."""
        v, rest = divmod(index, self.spire)
        level = 0
        while level < self.L and rest >= level_offset(self.D, level + 1):
            level += 1
        return v, level, rest - level_offset(self.D, level)

    def parent(self, index: int) -> int | None:
        v, level, word = self.locate(index)
        return None if level == 0 else self.vertex(v, level - 1, word // self.D)

    def foundation(self, v: int) -> np.ndarray:
        start = self.vertex(v, self.L, 0)
        return np.arange(start, start + self.D**self.L)

    def neighbors(self, index: int) -> np.ndarray:
        row = self.adj[index]
        return row[row >= 0]

    def degrees(self) -> np.ndarray:
        return np.sum(self.adj >= 0, axis=1)

    def degree_census(self) -> dict[int, int]:
        return dict(sorted(Counter(self.degrees().tolist()).items()))

    def adjacency_matrix(self) -> np.ndarray:
        nv = self.num_vertices
        a = np.zeros((nv, nv))
        rows = np.repeat(np.arange(nv), self.adj.shape[1])
        cols = self.adj.ravel()
        keep = cols >= 0
        a[rows[keep], cols[keep]] = 1.0
        return a


def build_spired(g: BaseGraph, L: int, c: int = 2, seed: int = 0,
                 cap: int = SIZE_CAP) -> SpiredGraph:
    """Lift, crown and join: spires over every vertex plus random inter-cluster graphs.

    ``c = 1`` joins adjacent foundations by a uniform random perfect matching;
    ``c = 2`` by a uniform random alternating Hamiltonian cycle.
    """
    if c not in (1, 2):
        raise ValueError(f"thickening c must be 1 or 2, got {c}")
    if L < 1:
        raise ValueError("L must be >= 1")
    D = c * g.d
    spire = spire_size(D, L)
    nv = g.n * spire
    if nv > cap:
        raise CapacityError(f"spired graph would have {nv} vertices (cap {cap})")
    adj = np.full((nv, D + 1), -1, dtype=np.int64)
    fill = np.zeros(nv, dtype=np.int64)

    def link(x: np.ndarray, y: np.ndarray) -> None:
        for a_, b_ in ((x, y), (y, x)):
            adj[a_, fill[a_]] = b_
            fill[a_] += 1

    for v in range(g.n):
        base = v * spire
        for level in range(L):
            parents = np.arange(D**level)
            for alpha in range(D):
                link(base + level_offset(D, level) + parents,
                     base + level_offset(D, level + 1) + parents * D + alpha)

    rng = np.random.default_rng([seed, BUILD_STREAM])
    width = D**L
    for v, w in g.edges():
        fv = v * spire + level_offset(D, L) + np.arange(width)
        fw = w * spire + level_offset(D, L) + np.arange(width)
        if c == 1:
            link(fv, fw[rng.permutation(width)])
        else:
            pi = fv[rng.permutation(width)]
            sigma = fw[rng.permutation(width)]
            link(pi, sigma)
            link(sigma, np.roll(pi, -1))
    return SpiredGraph(base=g, L=L, c=c, adj=adj, seed=seed)


def inter_cluster_cycles(sg: SpiredGraph, v: int, w: int) -> list[int]:
    """Lengths of the cycles formed by the edges between the foundations of v and w."""
    fv, fw = set(sg.foundation(v).tolist()), set(sg.foundation(w).tolist())
    both = fv | fw

    def cross(x: int) -> list[int]:
        other = fw if x in fv else fv
        return [int(y) for y in sg.neighbors(x) if y in other]

    seen: set[int] = set()
    lengths = []
    for start in sorted(both):
        if start in seen:
            continue
        length, prev, cur = 0, None, start
        while True:
            seen.add(cur)
            length += 1
            nxt = [y for y in cross(cur) if y != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == start:
                break
        lengths.append(length)
    return lengths


def spire_return_amplitude(sg: SpiredGraph, times, cap: int = DENSE_CAP) -> ComplexSeries:
    """``<a_u| exp(-i A_spire t / c) |a_u>`` by dense diagonalization."""
    if sg.num_vertices > cap:
        raise CapacityError(f"{sg.num_vertices} vertices exceed the dense cap {cap}")
    w, v = symmetric_eigh(sg.adjacency_matrix() / sg.c)
    apex = sg.apex_indices[sg.base.distinguished]
    weights = v[apex] ** 2
    times = np.asarray(times, dtype=float)
    return ComplexSeries(times, np.exp(-1j * np.multiply.outer(times, w)) @ weights)


@dataclass(eq=False)
class OracleInstance:
    """Neighbour-set oracle over random injective ``label_bits``-bit labels."""

    graph: SpiredGraph
    label_bits: int
    labels: np.ndarray
    inverse: dict[int, int]
    seed_label: int
    rng_seed: int
    query_count: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def hex_width(self) -> int:
        return max(1, math.ceil(self.label_bits / 4))

    def format_label(self, label: int) -> str:
        return f"{label:0{self.hex_width}x}"

    def query(self, label: int) -> frozenset[int] | None:
        return oracle_query(self, label)

    def write_dump(self, out: TextIO | str | PathLike) -> None:
        """JSON header line, then ``label: nbr nbr ...`` per vertex sorted by label."""
        if not hasattr(out, "write"):
            with open(out, "w", newline="\n") as fh:
                self.write_dump(fh)
            return
        sg = self.graph
        header = {
            "family": sg.base.family, "n": sg.base.n, "d": sg.base.d, "m": sg.base.m,
            "distinguished": sg.base.distinguished, "L": sg.L, "c": sg.c, "D": sg.D,
            "vertices": sg.num_vertices, "label_bits": self.label_bits,
            "build_seed": sg.seed, "rng_seed": self.rng_seed,
            "seed_label": self.format_label(self.seed_label),
        }
        out.write(json.dumps(header) + "\n")
        for vertex in np.argsort(self.labels, kind="stable"):
            nbrs = sorted(int(self.labels[y]) for y in sg.neighbors(int(vertex)))
            out.write(self.format_label(int(self.labels[vertex])) + ": "
                      + " ".join(self.format_label(x) for x in nbrs) + "\n")


def obfuscate(sg: SpiredGraph, seed: int = 0) -> OracleInstance:
    """Uniform random injective labelling with ``a = 2 ceil(log2 |V|)`` bits."""
    nv = sg.num_vertices
    bits = 2 * math.ceil(math.log2(nv)) if nv > 1 else 2
    rng = np.random.default_rng([seed, LABEL_STREAM])
    labels = np.empty(nv, dtype=np.int64)
    used: set[int] = set()
    draws, limit = 0, 64 * nv
    for vertex in range(nv):
        while True:
            draws += 1
            if draws > limit:
                raise RuntimeError("label rejection sampling exceeded its iteration cap")
            x = int(rng.integers(0, 1 << bits))
            if x not in used:
                used.add(x)
                labels[vertex] = x
                break
    inverse = {int(x): i for i, x in enumerate(labels)}
    apex = sg.apex_indices[sg.base.distinguished]
    return OracleInstance(graph=sg, label_bits=bits, labels=labels, inverse=inverse,
                          seed_label=int(labels[apex]), rng_seed=seed)


def oracle_query(inst: OracleInstance, label: int) -> frozenset[int] | None:
    """Labels of the neighbours of ``label``'s vertex, or None (bottom) for unused labels."""
    with inst._lock:
        inst.query_count += 1
    vertex = inst.inverse.get(int(label))
    if vertex is None:
        return None
    return frozenset(int(inst.labels[y]) for y in inst.graph.neighbors(vertex))


def neighbourhood_degree_profile(inst: OracleInstance, radius: int = 2) -> list[int]:
    """Sorted oracle response sizes over labels within ``radius`` of the seed label."""
    frontier, seen = {inst.seed_label}, {inst.seed_label}
    sizes = []
    for step in range(radius + 1):
        nxt = set()
        for x in sorted(frontier):
            resp = oracle_query(inst, x)
            sizes.append(len(resp))
            if step < radius:
                nxt |= resp - seen
        seen |= nxt
        frontier = nxt
    return sorted(sizes)
