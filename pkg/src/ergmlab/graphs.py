"""Dense labeled simple graphs with bitmask adjacency rows.

Vertices are 0-based integers.  Each adjacency row is a Python int whose
bit v flags the edge to vertex v; both triangles of the matrix are kept
mirrored so degree and codegree queries are single bit operations.
"""

from dataclasses import dataclass


class GraphError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class EdgeId:
    """Unordered vertex pair, normalized to u < v at construction."""

    u: int
    v: int

    def __init__(self, u: int, v: int):
        if u == v:
            raise GraphError(f"self-loop edge ({u},{v})")
        if u > v:
            u, v = v, u
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


class SimpleGraph:
    """Simple graph on n vertices; mutated only by flip_edge."""

    def __init__(self, n: int):
        if n < 2:
            raise GraphError(f"need at least 2 vertices, got {n}")
        self.n = n
        self.adj = [0] * n
        self.edge_count = 0

    def has_edge(self, u: int, v: int) -> bool:
        return (self.adj[u] >> v) & 1 == 1

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self):
        """Present edges as (u, v) pairs with u < v, sorted."""
        out = []
        for u in range(self.n):
            row = self.adj[u] >> (u + 1)
            v = u + 1
            while row:
                if row & 1:
                    out.append((u, v))
                row >>= 1
                v += 1
        return out

    def copy(self) -> "SimpleGraph":
        g = SimpleGraph.__new__(SimpleGraph)
        g.n = self.n
        g.adj = list(self.adj)
        g.edge_count = self.edge_count
        return g

    def edge_mask(self) -> int:
        """Upper-triangle occupancy as one int, bit index = edge_index order."""
        mask = 0
        for i, (u, v) in enumerate(all_edges(self.n)):
            if (self.adj[u] >> v) & 1:
                mask |= 1 << i
        return mask


def all_edges(n: int):
    """The C(n,2) vertex pairs in lexicographic order."""
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def _check_vertex(x: SimpleGraph, v: int):
    if not 0 <= v < x.n:
        raise GraphError(f"vertex {v} out of range for n={x.n}")


def erdos_renyi_sample(n: int, p: float, rng) -> SimpleGraph:
    """Independent-edge random graph; rng is a numpy Generator."""
    if n < 2:
        raise GraphError(f"invalid vertex count {n}")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"edge probability {p} outside [0,1]")
    x = SimpleGraph(n)
    pairs = all_edges(n)
    hits = rng.random(len(pairs)) < p
    for (u, v), hit in zip(pairs, hits):
        if hit:
            x.adj[u] |= 1 << v
            x.adj[v] |= 1 << u
            x.edge_count += 1
    return x


def flip_edge(x: SimpleGraph, e: EdgeId) -> SimpleGraph:
    """Toggle edge e in place and return x."""
    _check_vertex(x, e.u)
    _check_vertex(x, e.v)
    bit = (x.adj[e.u] >> e.v) & 1
    x.adj[e.u] ^= 1 << e.v
    x.adj[e.v] ^= 1 << e.u
    x.edge_count += 1 - 2 * bit
    return x


def codegree(x: SimpleGraph, u: int, v: int) -> int:
    """Number of common neighbors of u and v (u, v themselves masked off)."""
    if u == v:
        raise GraphError("codegree needs two distinct vertices")
    _check_vertex(x, u)
    _check_vertex(x, v)
    return (x.adj[u] & x.adj[v] & ~((1 << u) | (1 << v))).bit_count()


def hamming_distance(x: SimpleGraph, y: SimpleGraph) -> int:
    """Number of edges present in exactly one of x, y."""
    if x.n != y.n:
        raise GraphError(f"vertex count mismatch {x.n} != {y.n}")
    total = 0
    for u in range(x.n):
        total += (x.adj[u] ^ y.adj[u]).bit_count()
    return total // 2


def local_hamming(x: SimpleGraph, y: SimpleGraph, e: EdgeId) -> int:
    """Hamming distance restricted to edges sharing a vertex with e (e included)."""
    if x.n != y.n:
        raise GraphError(f"vertex count mismatch {x.n} != {y.n}")
    u, v = e.u, e.v
    du = (x.adj[u] ^ y.adj[u]).bit_count()
    dv = (x.adj[v] ^ y.adj[v]).bit_count()
    # edge {u,v} counted from both rows; every other incident edge once per row
    both = ((x.adj[u] ^ y.adj[u]) >> v) & 1
    return du + dv - both
