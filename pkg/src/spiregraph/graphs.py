"""Base graphs: prism / Moebius-ladder families, custom regular graphs, spectra.

Family vertices use pair coordinates ``(k, b)`` with ``0 <= k < m`` and
``b in {0, 1}`` (outer / inner rail), indexed as ``2*k + b``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from os import PathLike
from typing import Iterable, Sequence

import numpy as np

from .linalg import symmetric_eigh

PRISM = "prism"
MOEBIUS = "moebius"
CUSTOM = "custom"
FAMILIES = (PRISM, MOEBIUS)

GROUP_TOL = 1e-9


def pair_index(k: int, b: int) -> int:
    return 2 * k + b


def pair_coords(index: int) -> tuple[int, int]:
    return divmod(index, 2)


@dataclass(frozen=True, eq=False)
class BaseGraph:
    """A connected d-regular simple graph with a distinguished vertex.

    ``m`` is the rail length for the prism / Moebius families and ``None``
    for custom graphs.
    """

    adjacency: np.ndarray
    d: int
    family: str = CUSTOM
    distinguished: int = 0
    m: int | None = None

    def __post_init__(self) -> None:
        a = np.array(self.adjacency, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency is not symmetric")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a) != 0):
            raise ValueError("self-loops are not allowed")
        deg = a.sum(axis=1)
        if not np.all(deg == self.d):
            raise ValueError(f"graph is not {self.d}-regular (degrees {sorted(set(deg.astype(int)))})")
        if not 0 <= self.distinguished < a.shape[0]:
            raise ValueError(f"distinguished vertex {self.distinguished} out of range")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def neighbors(self, v: int) -> list[int]:
        return [int(w) for w in np.flatnonzero(self.adjacency[v])]

    @property
    def half_size(self) -> float:
        """Rail length m for families, n/2 otherwise (used for the m^2 horizon)."""
        return float(self.m) if self.m is not None else self.n / 2


@dataclass(frozen=True)
class SpectralChannel:
    """One distinct base eigenvalue with its multiplicity and vertex mass."""

    mu: float
    multiplicity: int
    p: float


def from_edges(n: int, edges: Iterable[tuple[int, int]], distinguished: int = 0,
               d: int | None = None, family: str = CUSTOM, m: int | None = None) -> BaseGraph:
    a = np.zeros((n, n))
    for v, w in edges:
        if v == w:
            raise ValueError(f"self-loop at vertex {v}")
        if a[v, w]:
            raise ValueError(f"duplicate edge {{{v}, {w}}}")
        a[v, w] = a[w, v] = 1
    if d is None:
        d = int(a[0].sum()) if n else 0
    return BaseGraph(a, d, family=family, distinguished=distinguished, m=m)


def _ladder_edges(m: int) -> list[tuple[int, int]]:
    edges = [(pair_index(k, 0), pair_index(k, 1)) for k in range(m)]
    for b in (0, 1):
        edges += [(pair_index(k, b), pair_index(k + 1, b)) for k in range(m - 1)]
    return edges


def _check_m(m: int) -> None:
    if int(m) != m or m < 3:
        raise ValueError(f"rail length m must be an integer >= 3, got {m}")


def prism(m: int, distinguished: int | None = None) -> BaseGraph:
    """The prism Y_m = C_m x K_2 (parallel closing edges).

    The distinguished vertex defaults to ``(m // 2, 0)``: the symmetric
    placement for odd m, the most symmetric one for even m.
    """
    _check_m(m)
    edges = _ladder_edges(m) + [
        (pair_index(m - 1, 0), pair_index(0, 0)),
        (pair_index(m - 1, 1), pair_index(0, 1)),
    ]
    u = pair_index(m // 2, 0) if distinguished is None else distinguished
    return from_edges(2 * m, edges, u, d=3, family=PRISM, m=m)


def moebius(m: int, distinguished: int | None = None) -> BaseGraph:
    """The Moebius ladder M_m (twisted closing edges)."""
    _check_m(m)
    edges = _ladder_edges(m) + [
        (pair_index(m - 1, 0), pair_index(0, 1)),
        (pair_index(m - 1, 1), pair_index(0, 0)),
    ]
    u = pair_index(m // 2, 0) if distinguished is None else distinguished
    return from_edges(2 * m, edges, u, d=3, family=MOEBIUS, m=m)


def k2() -> BaseGraph:
    """The single edge; its spired graph at c=2 is the welded-trees graph."""
    return from_edges(2, [(0, 1)], 0, d=1, family="k2")


def load_edge_list(path: str | PathLike) -> BaseGraph:
    """Read a custom graph: header ``n d u`` then one ``v w`` pair per line (0-indexed)."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty edge-list file")
    try:
        n, d, u = (int(tok) for tok in lines[0].split())
        edges = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"{path}: malformed edge list ({exc})") from None
    for e in edges:
        if len(e) != 2 or not all(0 <= v < n for v in e):
            raise ValueError(f"{path}: bad edge {e}")
    g = from_edges(n, edges, u, d=d)
    if not is_connected(g):
        raise ValueError(f"{path}: graph is not connected")
    return g


def bfs_distances(g: BaseGraph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=int)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def is_connected(g: BaseGraph) -> bool:
    return bool(np.all(bfs_distances(g, 0) >= 0))


def is_bipartite(g: BaseGraph) -> tuple[bool, np.ndarray | None]:
    """BFS 2-colouring. Returns ``(True, colouring)`` or ``(False, None)``."""
    colour = np.full(g.n, -1, dtype=int)
    for start in range(g.n):
        if colour[start] >= 0:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in g.neighbors(v):
                if colour[w] < 0:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    return False, None
    return True, colour


def symmetric_placement(m: int) -> int:
    """Index of ``((m-1)/2, 0)``; only defined for odd m >= 3."""
    _check_m(m)
    if m % 2 == 0:
        raise ValueError(f"no symmetric placement exists for even m={m}")
    return pair_index((m - 1) // 2, 0)


def branch_eigenvalues(g: BaseGraph, branch: int) -> np.ndarray:
    """The m eigenvalues of the +1 or -1 branch of the unified closed form."""
    if g.family not in FAMILIES:
        raise ValueError("branch eigenvalues are defined for prism/moebius only")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    m = g.m
    theta = 2 * np.pi * np.arange(m) / m
    if branch == 1:
        return 2 * np.cos(theta) + 1
    shift = np.pi / m if g.family == MOEBIUS else 0.0
    return 2 * np.cos(theta + shift) - 1


def closed_form_eigenvalues(g: BaseGraph) -> np.ndarray:
    """All 2m family eigenvalues, ascending."""
    return np.sort(np.concatenate([branch_eigenvalues(g, 1), branch_eigenvalues(g, -1)]))


def group_values(values: Sequence[float], tol: float = GROUP_TOL) -> list[list[int]]:
    """Indices of ascending ``values`` chained into groups by gaps ``<= tol``."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    prev = None
    for i in order:
        if prev is not None and values[i] - prev <= tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
        prev = values[i]
    return groups


def _family_channels(mus: np.ndarray, n: int, tol: float) -> list[SpectralChannel]:
    return [
        SpectralChannel(float(np.mean(mus[idx])), len(idx), len(idx) / n)
        for idx in group_values(mus, tol)
    ]


def base_channels(g: BaseGraph, tol: float = GROUP_TOL) -> list[SpectralChannel]:
    """Distinct base eigenvalues (ascending), multiplicities and masses at the distinguished vertex."""
    if g.family in FAMILIES:
        return _family_channels(closed_form_eigenvalues(g), g.n, tol)
    w, v = symmetric_eigh(g.adjacency)
    mass = v[g.distinguished] ** 2
    return [
        SpectralChannel(float(np.mean(w[idx])), len(idx), float(np.sum(mass[idx])))
        for idx in group_values(w, tol)
    ]


def branch_channels(g: BaseGraph, branch: int, tol: float = GROUP_TOL) -> list[SpectralChannel]:
    """Channels of one branch only; masses are count/n, so they sum to 1/2."""
    return _family_channels(branch_eigenvalues(g, branch), g.n, tol)


def edge_symmetric_difference(ga: BaseGraph, gb: BaseGraph) -> set[tuple[int, int]]:
    return set(ga.edges()) ^ set(gb.edges())


def build(family: str, m: int | None = None, path: str | None = None) -> BaseGraph:
    """Construct a graph by CLI-style family name."""
    if family == PRISM:
        return prism(m)
    if family == MOEBIUS:
        return moebius(m)
    if family == "k2":
        return k2()
    if family == "file":
        if path is None:
            raise ValueError("family 'file' needs an edge-list path")
        return load_edge_list(path)
    raise ValueError(f"unknown family {family!r}")
