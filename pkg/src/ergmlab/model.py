"""Ferromagnetic ERGM specification and Hamiltonian machinery.

A model is a list of motifs with coefficients (beta_0, ..., beta_K); the
leading motif is always a single edge and every later coefficient must be
strictly positive.  The Hamiltonian is the coefficient-weighted sum of
homomorphism densities, and the quantity driving single-edge dynamics is
its scaled discrete derivative n^2 * d_e H.
"""

import math
from dataclasses import dataclass, field

from .graphs import EdgeId, SimpleGraph
from .motifs import (
    MotifGraph,
    fast_triangle_rooted,
    fast_wedge_rooted,
    hom_density,
    rooted_count,
)


class SpecError(ValueError):
    pass


@dataclass
class ErgmSpec:
    """Motif list, coefficient vector, and ambient vertex count."""

    motifs: list
    beta: list
    n: int
    nondegenerate: bool = field(init=False, default=False)

    def __post_init__(self):
        validate_spec(self)


def validate_spec(spec: ErgmSpec) -> ErgmSpec:
    """Enforce the model assumptions and set the nondegeneracy flag."""
    if len(spec.motifs) != len(spec.beta):
        raise SpecError(
            f"{len(spec.motifs)} motifs but {len(spec.beta)} coefficients"
        )
    if not spec.motifs:
        raise SpecError("empty motif list")
    if not spec.motifs[0].is_single_edge():
        raise SpecError("leading motif must be a single edge")
    for j, b in enumerate(spec.beta):
        if j >= 1 and not b > 0:
            raise SpecError(
                f"ferromagnetic assumption violated: coefficient {j} must be"
                f" positive, got {b}"
            )
    if spec.n < 2:
        raise SpecError(f"ambient vertex count {spec.n} < 2")
    spec.nondegenerate = any(
        not g.is_disjoint_union_of_edges() for g in spec.motifs[1:]
    )
    return spec


def motif_paths(spec: ErgmSpec):
    """Per-motif derivative evaluation path; 'general-slow' flags a fallback."""
    out = []
    for g in spec.motifs:
        if g.is_single_edge():
            out.append("edge-constant")
        elif g.is_wedge():
            out.append("wedge-fast")
        elif g.is_triangle():
            out.append("triangle-fast")
        else:
            out.append("general-slow")
    return out


def uses_slow_path(spec: ErgmSpec) -> bool:
    return any(p == "general-slow" for p in motif_paths(spec))


def _check_dims(spec: ErgmSpec, x: SimpleGraph):
    if x.n != spec.n:
        raise SpecError(f"graph has {x.n} vertices, spec expects {spec.n}")


def hamiltonian_value(spec: ErgmSpec, x: SimpleGraph) -> float:
    """H(x) = sum_j beta_j * hom_density(G_j, x)."""
    _check_dims(spec, x)
    return sum(b * hom_density(g, x) for g, b in zip(spec.motifs, spec.beta))


def hamiltonian_poly(spec: ErgmSpec, q: float, order: int = 0) -> float:
    """The density polynomial H(q) = sum_j beta_j q^{e_j}, or its 1st/2nd derivative."""
    if order == 0:
        return sum(b * q**g.e for g, b in zip(spec.motifs, spec.beta))
    if order == 1:
        return sum(b * g.e * q ** (g.e - 1) for g, b in zip(spec.motifs, spec.beta))
    if order == 2:
        return sum(
            b * g.e * (g.e - 1) * q ** (g.e - 2)
            for g, b in zip(spec.motifs, spec.beta)
            if g.e >= 2
        )
    raise SpecError(f"derivative order {order} not in 0..2")


def phi(s: float) -> float:
    """Logistic link e^s/(1+e^s), sign-branched for stability, never clamped."""
    if s >= 0:
        return 1.0 / (1.0 + math.exp(-s))
    z = math.exp(s)
    return z / (1.0 + z)


def _rooted(g: MotifGraph, x: SimpleGraph, e: EdgeId) -> int:
    if g.is_single_edge():
        return 2
    if g.is_wedge():
        return fast_wedge_rooted(x, e)
    if g.is_triangle():
        return fast_triangle_rooted(x, e)
    return rooted_count(g, x, e)


def differential(spec: ErgmSpec, x: SimpleGraph, e: EdgeId) -> float:
    """n^2 * d_e H(x) = sum_j beta_j * rooted_count(G_j, x, e) / n^{v_j - 2}."""
    _check_dims(spec, x)
    n = x.n
    total = 0.0
    for g, b in zip(spec.motifs, spec.beta):
        total += b * _rooted(g, x, e) / n ** (g.v - 2)
    return total


def conditional_probability(spec: ErgmSpec, x: SimpleGraph, e: EdgeId) -> float:
    """Probability that a single-edge resample sets e present."""
    return phi(differential(spec, x, e))


@dataclass
class MotifConstants:
    """Triangle/wedge decomposition constants of the derivative at density p.

    per_edge[j][i] is the (c_tri, c_wedge) pair for edge i of motif j, with
    c_tri one sixth of the count of motif edges that share a vertex with it
    and close a triangle, and c_wedge half the count of those that do not
    close one.  Aggregates fold in the coefficients and powers of p.

    The 1/6 and 1/2 normalisations are forced by exact cancellation: pinning
    one motif edge to a host edge contributes the rooted triangle count once
    per spanned triangle pair and the rooted wedge count once per adjacent
    non-spanning pair (measured directly on large hosts), so summed over the
    wedge motif the aggregate must equal its coefficient, and likewise for
    the triangle.  Doubling either constant makes the subtracted part twice
    the derivative's fluctuating part and the remainder stops concentrating.
    """

    p: float
    per_edge: list
    per_motif_tri: list
    per_motif_wedge: list
    aggregate_tri: float
    aggregate_wedge: float


def _edge_pair_counts(g: MotifGraph, idx: int):
    """Adjacent-edge counts for edge idx: (triangle-spanning, non-spanning)."""
    a, b = g.edges[idx]
    tri = 0
    wedge = 0
    present = set(g.edges)
    for k, (c, d) in enumerate(g.edges):
        if k == idx:
            continue
        shared = {a, b} & {c, d}
        if not shared:
            continue
        span = tuple(sorted({a, b, c, d}))
        if len(span) == 3:
            pairs = [(span[0], span[1]), (span[0], span[2]), (span[1], span[2])]
            if all(pr in present for pr in pairs):
                tri += 1
                continue
        wedge += 1
    return tri, wedge


def motif_constants(spec: ErgmSpec, p: float) -> MotifConstants:
    """Per-edge, per-motif, and aggregate decomposition constants at density p.

    Per-motif sums divide the integer pair totals once, so a motif whose
    channel fully cancels its own derivative term (wedge, triangle) gets an
    exact 1.0 rather than an accumulation of rounded thirds.
    """
    if not 0.0 < p < 1.0:
        raise SpecError(f"density {p} outside (0,1)")
    per_edge = []
    per_motif_tri = []
    per_motif_wedge = []
    agg_tri = 0.0
    agg_wedge = 0.0
    for g, b in zip(spec.motifs, spec.beta):
        counts = [_edge_pair_counts(g, i) for i in range(g.e)]
        per_edge.append([(t / 6.0, w / 2.0) for t, w in counts])
        tri_sum = sum(t for t, _ in counts) / 6.0
        wedge_sum = sum(w for _, w in counts) / 2.0
        per_motif_tri.append(tri_sum)
        per_motif_wedge.append(wedge_sum)
        agg_tri += b * p ** (g.e - 3) * tri_sum
        agg_wedge += b * p ** (g.e - 2) * wedge_sum
    return MotifConstants(p, per_edge, per_motif_tri, per_motif_wedge, agg_tri, agg_wedge)


def hajek_residual(
    spec: ErgmSpec, consts: MotifConstants, x: SimpleGraph, e: EdgeId
) -> float:
    """Derivative minus its triangle/wedge principal part at the well density.

    Folded motif by motif so that a channel which exactly absorbs its own
    derivative term cancels bit for bit; the sum over motifs equals the
    differential minus (agg_tri * N_tri + agg_wedge * N_wedge) / n up to
    rounding in the regrouping.
    """
    _check_dims(spec, x)
    n = x.n
    ft = fast_triangle_rooted(x, e)
    fw = fast_wedge_rooted(x, e)
    p = consts.p
    total = 0.0
    for g, b, tri_sum, wedge_sum in zip(
        spec.motifs, spec.beta, consts.per_motif_tri, consts.per_motif_wedge
    ):
        principal = (
            tri_sum * p ** (g.e - 3) * ft + wedge_sum * p ** (g.e - 2) * fw
        ) / n
        total += b * (_rooted(g, x, e) / n ** (g.v - 2) - principal)
    return total
