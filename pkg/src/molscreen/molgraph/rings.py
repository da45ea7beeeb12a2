"""Smallest-set-of-smallest-rings perception.

Horton-style candidate enumeration followed by a greedy GF(2) independence
pass. Candidates are ordered by (size, sorted atom tuple), which makes the
selected basis deterministic for a fixed atom ordering and minimal in total
ring size. The number of selected rings always equals the cyclomatic number
``bonds - atoms + components``.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque


@dataclass(frozen=True)
class SSSRData:
    rings: tuple[tuple[int, ...], ...]
    ring_membership: tuple[bool, ...]
    ring_edges: frozenset[frozenset[int]]


def find_sssr(n_atoms: int, edges: list[tuple[int, int]]) -> SSSRData:
    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    edge_ids: dict[frozenset[int], int] = {}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
        edge_ids[frozenset((a, b))] = len(edge_ids)
    for nbrs in adj:
        nbrs.sort()

    n_components = _count_components(n_atoms, adj)
    target = len(edges) - n_atoms + n_components
    if target <= 0:
        return SSSRData(
            rings=(),
            ring_membership=tuple(False for _ in range(n_atoms)),
            ring_edges=frozenset(),
        )

    candidates = _horton_candidates(n_atoms, edges, adj)
    candidates.sort(key=lambda cyc: (len(cyc), cyc))

    # Greedy GF(2) Gaussian elimination over edge incidence vectors.
    basis: list[int] = []
    chosen: list[tuple[int, ...]] = []
    for cyc in candidates:
        vec = 0
        for i in range(len(cyc)):
            vec |= 1 << edge_ids[frozenset((cyc[i], cyc[(i + 1) % len(cyc)]))]
        for row in basis:
            low = row & -row
            if vec & low:
                vec ^= row
        if vec:
            basis.append(vec)
            basis.sort(key=lambda r: r & -r)
            chosen.append(cyc)
            if len(chosen) == target:
                break
    if len(chosen) != target:  # pragma: no cover - Horton set always suffices
        raise RuntimeError("SSSR search failed to reach the cyclomatic number")

    chosen.sort(key=lambda cyc: (len(cyc), cyc))
    membership = [False] * n_atoms
    ring_edges: set[frozenset[int]] = set()
    paths: list[tuple[int, ...]] = []
    for cyc in chosen:
        for i in range(len(cyc)):
            membership[cyc[i]] = True
            ring_edges.add(frozenset((cyc[i], cyc[(i + 1) % len(cyc)])))
        paths.append(cyc)
    return SSSRData(
        rings=tuple(paths),
        ring_membership=tuple(membership),
        ring_edges=frozenset(ring_edges),
    )


def _count_components(n_atoms: int, adj: list[list[int]]) -> int:
    seen = [False] * n_atoms
    count = 0
    for start in range(n_atoms):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
    return count


def _bfs(n_atoms: int, adj: list[list[int]], root: int) -> tuple[list[int], list[int]]:
    dist = [-1] * n_atoms
    parent = [-1] * n_atoms
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return dist, parent


def _path_to_root(parent: list[int], node: int) -> list[int]:
    path = [node]
    while parent[path[-1]] >= 0:
        path.append(parent[path[-1]])
    return path


def _horton_candidates(
    n_atoms: int, edges: list[tuple[int, int]], adj: list[list[int]]
) -> list[tuple[int, ...]]:
    """All cycles of the form path(v,x) + edge(x,y) + path(y,v)."""
    seen: set[frozenset[frozenset[int]]] = set()
    out: list[tuple[int, ...]] = []
    for root in range(n_atoms):
        dist, parent = _bfs(n_atoms, adj, root)
        for x, y in edges:
            if dist[x] < 0 or dist[y] < 0:
                continue
            px = _path_to_root(parent, x)
            py = _path_to_root(parent, y)
            if set(px) & set(py) != {root}:
                continue
            cycle = px[::-1] + py[:-1]  # root..x, then y..(just before root)
            if len(cycle) < 3 or len(set(cycle)) != len(cycle):
                continue
            edge_set = frozenset(
                frozenset((cycle[i], cycle[(i + 1) % len(cycle)]))
                for i in range(len(cycle))
            )
            if edge_set in seen:
                continue
            seen.add(edge_set)
            out.append(_normalize_cycle(cycle))
    return out


def _normalize_cycle(cycle: list[int]) -> tuple[int, ...]:
    """Rotate/reflect so the tuple starts at the smallest atom and is
    lexicographically minimal; purely cosmetic but fixes determinism."""
    k = len(cycle)
    start = cycle.index(min(cycle))
    fwd = tuple(cycle[(start + i) % k] for i in range(k))
    rev = tuple(cycle[(start - i) % k] for i in range(k))
    return min(fwd, rev)
