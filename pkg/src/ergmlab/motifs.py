"""Exact homomorphism counting for small motifs.

Counts are homomorphism counts: vertex maps sending every motif edge to an
edge of the host graph, with no injectivity requirement and nothing asked of
non-edges.  Self-images never arise because a host graph has no self-loops.
The brute-force enumerator is the correctness anchor; the wedge and triangle
rooted counts also have closed-form fast paths used by the dynamics.
"""

from itertools import combinations

from .graphs import EdgeId, GraphError, SimpleGraph, codegree

MAX_MOTIF_VERTICES = 8


class MotifGraph:
    """A small fixed pattern graph with cached wedge/triangle statistics.

    Attributes: v (vertex count), edges (normalized pair list), e (edge
    count), degrees, wedge_count (two-stars, sum of C(d,2)), triangle_count.
    """

    def __init__(self, v: int, edges):
        if not 1 <= v <= MAX_MOTIF_VERTICES:
            raise GraphError(f"motif vertex count {v} outside 1..{MAX_MOTIF_VERTICES}")
        norm = []
        for a, b in edges:
            if a == b:
                raise GraphError(f"motif self-loop ({a},{b})")
            if not (0 <= a < v and 0 <= b < v):
                raise GraphError(f"motif edge ({a},{b}) outside 0..{v - 1}")
            norm.append((min(a, b), max(a, b)))
        if len(set(norm)) != len(norm):
            raise GraphError("duplicate motif edge")
        self.v = v
        self.edges = norm
        self.e = len(norm)
        self.degrees = [0] * v
        adjacent = [set() for _ in range(v)]
        for a, b in norm:
            self.degrees[a] += 1
            self.degrees[b] += 1
            adjacent[a].add(b)
            adjacent[b].add(a)
        self.wedge_count = sum(d * (d - 1) // 2 for d in self.degrees)
        self.triangle_count = sum(
            1
            for a, b, c in combinations(range(v), 3)
            if b in adjacent[a] and c in adjacent[a] and c in adjacent[b]
        )
        # earlier-indexed neighbors per vertex, for pruned enumeration
        self._back = [sorted(w for w in adjacent[i] if w < i) for i in range(v)]

    def minus_edge(self, j: int) -> "MotifGraph":
        """Copy with the j-th edge deleted (vertex set kept)."""
        if not 0 <= j < self.e:
            raise GraphError(f"edge index {j} out of range")
        return MotifGraph(self.v, self.edges[:j] + self.edges[j + 1 :])

    def is_single_edge(self) -> bool:
        return self.v == 2 and self.e == 1

    def is_wedge(self) -> bool:
        return self.v == 3 and self.e == 2

    def is_triangle(self) -> bool:
        return self.v == 3 and self.e == 3

    def is_disjoint_union_of_edges(self) -> bool:
        return max(self.degrees, default=0) <= 1

    def canonical_key(self) -> str:
        return f"{self.v}:" + ",".join(f"{a}-{b}" for a, b in sorted(self.edges))


def catalog() -> dict:
    """The fixed motif test catalog (all v <= 4)."""
    return {
        "edge": MotifGraph(2, [(0, 1)]),
        "wedge": MotifGraph(3, [(0, 1), (1, 2)]),
        "path3": MotifGraph(4, [(0, 1), (1, 2), (2, 3)]),
        "triangle": MotifGraph(3, [(0, 1), (1, 2), (0, 2)]),
        "square": MotifGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
        "two_disjoint_edges": MotifGraph(4, [(0, 1), (2, 3)]),
        "k4": MotifGraph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    }


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _adj_plus(x: SimpleGraph, *edges: EdgeId):
    rows = list(x.adj)
    for e in edges:
        rows[e.u] |= 1 << e.v
        rows[e.v] |= 1 << e.u
    return rows


def _count_maps(G: MotifGraph, rows, n: int) -> int:
    """Pruned enumeration of all homomorphisms into the given adjacency rows."""
    full = (1 << n) - 1
    back = G._back
    assign = [0] * G.v
    v = G.v

    def rec(i: int) -> int:
        if i == v:
            return 1
        cand = full
        for j in back[i]:
            cand &= rows[assign[j]]
        total = 0
        for w in _iter_bits(cand):
            assign[i] = w
            total += rec(i + 1)
        return total

    return rec(0)


def hom_count(G: MotifGraph, x: SimpleGraph) -> int:
    """Number of homomorphisms of G into x."""
    return _count_maps(G, x.adj, x.n)


def hom_density(G: MotifGraph, x: SimpleGraph) -> float:
    """hom_count normalized by n^v."""
    return hom_count(G, x) / x.n**G.v


def rooted_count(G: MotifGraph, x: SimpleGraph, e: EdgeId) -> int:
    """Homomorphisms into x with e added that map some motif edge onto e.

    Equals the discrete derivative hom_count(x^{+e}) - hom_count(x^{-e});
    that identity is asserted in tests rather than used as the definition.
    """
    rows = _adj_plus(x, e)
    n = x.n
    full = (1 << n) - 1
    back = G._back
    edges = G.edges
    assign = [0] * G.v
    target = frozenset((e.u, e.v))
    v = G.v

    def rec(i: int, used: bool) -> int:
        if i == v:
            return 1 if used else 0
        cand = full
        for j in back[i]:
            cand &= rows[assign[j]]
        total = 0
        for w in _iter_bits(cand):
            assign[i] = w
            hit = used
            if not hit:
                for j in back[i]:
                    if {assign[j], w} == target:
                        hit = True
                        break
            total += rec(i + 1, hit)
        return total

    return rec(0, False)


def fast_wedge_rooted(x: SimpleGraph, e: EdgeId) -> int:
    """Closed form for the wedge rooted count: 2(deg(u)+deg(v))+2 in x^{-e}."""
    drop = (x.adj[e.u] >> e.v) & 1
    du = x.adj[e.u].bit_count() - drop
    dv = x.adj[e.v].bit_count() - drop
    return 2 * (du + dv) + 2


def fast_triangle_rooted(x: SimpleGraph, e: EdgeId) -> int:
    """Closed form for the triangle rooted count: 6 * codegree."""
    return 6 * codegree(x, e.u, e.v)


def _count_pinned(G: MotifGraph, rows, n: int, pins: dict) -> int:
    """Extensions of a partial vertex assignment to a full homomorphism."""
    full = (1 << n) - 1
    back = G._back
    assign = [-1] * G.v
    v = G.v

    def rec(i: int) -> int:
        if i == v:
            return 1
        pinned = pins.get(i)
        if pinned is not None:
            for j in back[i]:
                if not (rows[assign[j]] >> pinned) & 1:
                    return 0
            assign[i] = pinned
            return rec(i + 1)
        cand = full
        for j in back[i]:
            cand &= rows[assign[j]]
        total = 0
        for w in _iter_bits(cand):
            assign[i] = w
            total += rec(i + 1)
        return total

    return rec(0)


def _require_motif_edge(G: MotifGraph, me) -> tuple:
    key = (min(me), max(me))
    if key not in G.edges:
        raise GraphError(f"{me} is not an edge of the motif")
    return key


def edge_mapped_count(G: MotifGraph, me, x: SimpleGraph, e: EdgeId) -> int:
    """Homomorphisms into x^{+e} sending motif edge me onto e, either way."""
    a, b = _require_motif_edge(G, me)
    rows = _adj_plus(x, e)
    total = 0
    for img_a, img_b in ((e.u, e.v), (e.v, e.u)):
        total += _count_pinned(G, rows, x.n, {a: img_a, b: img_b})
    return total


def pair_mapped_count(
    G: MotifGraph, me1, me2, x: SimpleGraph, e1: EdgeId, e2: EdgeId
) -> int:
    """Homomorphisms into x^{+e1+e2} mapping me1 onto e1 and me2 onto e2.

    When me1 and me2 share a motif vertex the shared vertex must land on a
    shared endpoint, so one orientation choice determines the other; the
    orientation loop below skips the inconsistent combinations.
    """
    a1, b1 = _require_motif_edge(G, me1)
    a2, b2 = _require_motif_edge(G, me2)
    if (a1, b1) == (a2, b2):
        raise GraphError("pair-mapped count needs two distinct motif edges")
    if e1 == e2:
        raise GraphError("pair-mapped count needs two distinct host edges")
    rows = _adj_plus(x, e1, e2)
    total = 0
    for i1 in ((e1.u, e1.v), (e1.v, e1.u)):
        for i2 in ((e2.u, e2.v), (e2.v, e2.u)):
            pins = {a1: i1[0], b1: i1[1]}
            ok = True
            for vert, img in ((a2, i2[0]), (b2, i2[1])):
                if pins.get(vert, img) != img:
                    ok = False
                    break
                pins[vert] = img
            if ok:
                total += _count_pinned(G, rows, x.n, pins)
    return total


def rooted_count_best(G: MotifGraph, x: SimpleGraph, e: EdgeId) -> int:
    """Rooted count through the fastest applicable path."""
    if G.is_single_edge():
        return 2
    if G.is_wedge():
        return fast_wedge_rooted(x, e)
    if G.is_triangle():
        return fast_triangle_rooted(x, e)
    return rooted_count(G, x, e)


def good_set_statistic(G: MotifGraph, x: SimpleGraph, e: EdgeId) -> float:
    """Normalized rooted-count diagnostic (N/(2 e n^{v-2}))^{1/(e-1)}."""
    if G.e < 2:
        raise GraphError("good-set statistic needs a motif with at least 2 edges")
    ratio = rooted_count_best(G, x, e) / (2 * G.e * x.n ** (G.v - 2))
    return ratio ** (1.0 / (G.e - 1))
