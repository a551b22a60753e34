"""Qubit interaction graphs and k-way assignment by greedy modularity communities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuit import CCX, Circuit, decompose_toffoli


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected weighted graph; ``weights[(a, b)]`` with ``a < b`` counts two-qubit gates."""

    n: int
    weights: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (a, b), w in self.weights.items():
            if not (0 <= a < b < self.n):
                raise PartitionError(f"bad edge ({a}, {b}) for {self.n} nodes")
            if w <= 0:
                raise PartitionError(f"edge ({a}, {b}) has nonpositive weight {w}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> InteractionGraph:
        weights: dict[tuple[int, int], int] = {}
        for a, b in edges:
            if a == b:
                raise PartitionError("self-loop")
            key = (min(a, b), max(a, b))
            weights[key] = weights.get(key, 0) + 1
        return cls(n, weights)

    def weight(self, a: int, b: int) -> int:
        return self.weights.get((min(a, b), max(a, b)), 0)

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for (a, b), w in self.weights.items():
            deg[a] += w
            deg[b] += w
        return deg


@dataclass(frozen=True)
class Assignment:
    """Surjective map qubit -> partition id in ``[0, k)``."""

    k: int
    part_of: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "part_of", tuple(int(p) for p in self.part_of))
        if self.k < 1:
            raise PartitionError("k must be >= 1")
        if any(not 0 <= p < self.k for p in self.part_of):
            raise PartitionError("partition id out of range")
        if set(self.part_of) != set(range(self.k)):
            missing = sorted(set(range(self.k)) - set(self.part_of))
            raise PartitionError(f"partitions {missing} hold no qubit")

    def __getitem__(self, q: int) -> int:
        return self.part_of[q]

    def __len__(self) -> int:
        return len(self.part_of)

    def members(self, p: int) -> list[int]:
        return [q for q, pp in enumerate(self.part_of) if pp == p]

    def sizes(self) -> list[int]:
        out = [0] * self.k
        for p in self.part_of:
            out[p] += 1
        return out


def build_interaction_graph(c: Circuit) -> InteractionGraph:
    if any(g.kind == CCX for g in c.gates):
        raise PartitionError("circuit contains CCX; run decompose_toffoli first")
    return InteractionGraph.from_edges(c.num_qubits, (g.qubits for g in c.gates if g.is_two_qubit))


def modularity(g: InteractionGraph, communities: Sequence[Iterable[int]]) -> float:
    """Q = sum_c [ w_in(c)/W - (deg(c) / 2W)^2 ]."""
    W = g.total_weight
    if W == 0:
        raise PartitionError("modularity is undefined on an edgeless graph")
    comms = [set(c) for c in communities]
    label = {}
    for i, comm in enumerate(comms):
        for v in comm:
            if v in label:
                raise PartitionError(f"node {v} appears in two communities")
            label[v] = i
    if set(label) != set(range(g.n)):
        raise PartitionError("communities must cover every node exactly once")
    w_in = [0] * len(comms)
    deg = [0] * len(comms)
    for (a, b), w in g.weights.items():
        deg[label[a]] += w
        deg[label[b]] += w
        if label[a] == label[b]:
            w_in[label[a]] += w
    return sum(w_in[i] / W - (deg[i] / (2 * W)) ** 2 for i in range(len(comms)))


def greedy_communities(g: InteractionGraph) -> list[list[int]]:
    """Clauset-Newman-Moore agglomeration.

    Merge gain is compared as the integer ``4W*w_ij - 2*d_i*d_j`` (dQ scaled
    by 4W^2) so ties are exact; among equal gains the pair with the
    lexicographically smallest (min node, min node) wins.
    """
    comms: dict[int, set[int]] = {v: {v} for v in range(g.n)}  # keyed by min node id
    W = g.total_weight
    if W == 0:
        return [[v] for v in range(g.n)]
    deg = g.degrees()
    cdeg = {v: deg[v] for v in range(g.n)}
    between: dict[int, dict[int, int]] = {v: {} for v in range(g.n)}
    for (a, b), w in g.weights.items():
        between[a][b] = between[a].get(b, 0) + w
        between[b][a] = between[b].get(a, 0) + w

    while True:
        best: tuple[int, int, int] | None = None  # (gain, i, j)
        for i in sorted(comms):
            for j, w in between[i].items():
                if j <= i:
                    continue
                gain = 4 * W * w - 2 * cdeg[i] * cdeg[j]
                if best is None or gain > best[0] or (gain == best[0] and (i, j) < best[1:]):
                    best = (gain, i, j)
        if best is None or best[0] <= 0:
            break
        _, i, j = best  # i < j, so i stays the min node id of the union
        comms[i] |= comms.pop(j)
        cdeg[i] += cdeg.pop(j)
        for other, w in between.pop(j).items():
            del between[other][j]
            if other == i:
                continue
            between[i][other] = between[i].get(other, 0) + w
            between[other][i] = between[other].get(i, 0) + w
    return [sorted(comms[key]) for key in sorted(comms)]


def adjust_to_k(communities: Sequence[Iterable[int]], k: int) -> list[list[int]]:
    """Merge the two smallest / split the largest community until exactly ``k`` remain."""
    comms = [sorted(c) for c in communities if c]
    total = sum(len(c) for c in comms)
    if not 1 <= k <= total:
        raise PartitionError(f"k={k} outside 1..{total}")
    while len(comms) > k:
        comms.sort(key=lambda c: (len(c), c[0]))
        merged = sorted(comms[0] + comms[1])
        comms = comms[2:] + [merged]
    while len(comms) < k:
        comms.sort(key=lambda c: (-len(c), c[0]))
        big = comms.pop(0)
        half = (len(big) + 1) // 2
        comms += [big[:half], big[half:]]
    return sorted(comms, key=lambda c: c[0])


def assign(communities: Sequence[Iterable[int]]) -> Assignment:
    comms = [sorted(c) for c in communities]
    if any(not c for c in comms):
        raise PartitionError("empty community")
    nodes = [v for c in comms for v in c]
    if len(set(nodes)) != len(nodes) or set(nodes) != set(range(len(nodes))):
        raise PartitionError("communities must be disjoint and cover 0..n-1")
    part_of = [0] * len(nodes)
    for pid, comm in enumerate(sorted(comms, key=lambda c: c[0])):
        for v in comm:
            part_of[v] = pid
    return Assignment(len(comms), tuple(part_of))


def partition(c: Circuit, k: int) -> Assignment:
    """Full pipeline: interaction graph, CNM communities, adjust to ``k``, label."""
    graph = build_interaction_graph(decompose_toffoli(c))
    return assign(adjust_to_k(greedy_communities(graph), k))


def cut_edges(c: Circuit, a: Assignment) -> int:
    if len(a) < c.num_qubits:
        raise PartitionError("assignment does not cover every qubit")
    gates = decompose_toffoli(c).gates
    return sum(1 for g in gates if g.is_two_qubit and a[g.qubits[0]] != a[g.qubits[1]])
