"""Specification validation, Hamiltonian identities, and the derivative
decomposition.

The definitional anchor throughout is hamiltonian_value: the fast
differential must equal n^2 times the discrete Hamiltonian increment on
random instances, and the decomposition residual must reassemble the
differential when the principal part is added back.
"""

import math

import numpy as np
import pytest

from ergmlab.graphs import EdgeId, SimpleGraph, all_edges, erdos_renyi_sample, flip_edge
from ergmlab.model import (
    ErgmSpec,
    SpecError,
    conditional_probability,
    differential,
    hajek_residual,
    hamiltonian_poly,
    hamiltonian_value,
    motif_constants,
    motif_paths,
    phi,
    uses_slow_path,
    validate_spec,
)
from ergmlab.motifs import MotifGraph, catalog

CATALOG = catalog()


def rng(seed):
    return np.random.Generator(np.random.Philox(key=[seed, 0]))


def spec_ewt(beta, n):
    return ErgmSpec(
        [CATALOG["edge"], CATALOG["wedge"], CATALOG["triangle"]], list(beta), n
    )


def complete(n):
    x = SimpleGraph(n)
    for u, v in all_edges(n):
        flip_edge(x, EdgeId(u, v))
    return x


# validation

def test_edge_only_negative_beta0_valid_degenerate():
    spec = ErgmSpec([CATALOG["edge"]], [-0.4], 16)
    assert not spec.nondegenerate


def test_calibration_spec_valid_nondegenerate():
    assert spec_ewt((0.0, 0.1, 0.1), 64).nondegenerate


def test_negative_triangle_coefficient_rejected():
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["edge"], CATALOG["triangle"]], [0.0, -1.0], 16)


def test_zero_coefficient_rejected_beyond_leading():
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["edge"], CATALOG["wedge"]], [0.5, 0.0], 16)


def test_leading_motif_must_be_single_edge():
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["wedge"]], [0.1], 16)
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["two_disjoint_edges"]], [0.1], 16)


def test_length_mismatch_and_empty_list_rejected():
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["edge"], CATALOG["wedge"]], [0.0], 16)
    with pytest.raises(SpecError):
        ErgmSpec([], [], 16)


def test_ambient_size_floor():
    with pytest.raises(SpecError):
        ErgmSpec([CATALOG["edge"]], [0.0], 1)


def test_disjoint_union_motifs_leave_spec_degenerate():
    spec = ErgmSpec(
        [CATALOG["edge"], CATALOG["two_disjoint_edges"]], [0.0, 0.3], 16
    )
    assert not spec.nondegenerate


def test_validate_spec_returns_spec():
    spec = ErgmSpec([CATALOG["edge"]], [0.2], 8)
    assert validate_spec(spec) is spec


# hamiltonian_value

def test_hamiltonian_empty_graph_zero():
    spec = spec_ewt((0.7, 0.2, 0.3), 12)
    assert hamiltonian_value(spec, SimpleGraph(12)) == 0.0


def test_hamiltonian_edge_only_complete_graph():
    for n in (3, 5, 9):
        spec = ErgmSpec([CATALOG["edge"]], [1.0], n)
        assert abs(hamiltonian_value(spec, complete(n)) - (n - 1) / n) < 1e-12


def test_hamiltonian_triangle_example():
    spec = spec_ewt((0.0, 0.1, 0.1), 3)
    got = hamiltonian_value(spec, complete(3))
    assert abs(got - (0.1 * 12 / 27 + 0.1 * 6 / 27)) < 1e-12


def test_hamiltonian_dimension_mismatch():
    spec = spec_ewt((0.0, 0.1, 0.1), 8)
    with pytest.raises(SpecError):
        hamiltonian_value(spec, SimpleGraph(9))


# hamiltonian_poly

def test_poly_second_derivative_at_one():
    spec = spec_ewt((0.0, 0.1, 0.1), 64)
    assert abs(hamiltonian_poly(spec, 1.0, 2) - 0.8) < 1e-12


def test_poly_zero_beta_identically_zero():
    spec = ErgmSpec([CATALOG["edge"]], [0.0], 16)
    for order in (0, 1, 2):
        assert hamiltonian_poly(spec, 0.37, order) == 0.0


def test_poly_edge_only_first_derivative_constant():
    spec = ErgmSpec([CATALOG["edge"]], [-0.8], 16)
    for q in (0.0, 0.25, 0.5, 1.0):
        assert hamiltonian_poly(spec, q, 1) == -0.8


def test_poly_matches_finite_difference():
    spec = spec_ewt((0.2, 0.4, 0.7), 32)
    h = 1e-6
    for q in (0.2, 0.5, 0.8):
        fd = (hamiltonian_poly(spec, q + h) - hamiltonian_poly(spec, q - h)) / (2 * h)
        assert abs(fd - hamiltonian_poly(spec, q, 1)) < 1e-7


def test_poly_rejects_higher_order():
    spec = spec_ewt((0.0, 0.1, 0.1), 16)
    with pytest.raises(SpecError):
        hamiltonian_poly(spec, 0.5, 3)


# phi

def test_phi_at_zero():
    assert phi(0.0) == 0.5


def test_phi_reflection_identity():
    for s in np.linspace(-30, 30, 121):
        assert abs(phi(float(s)) + phi(float(-s)) - 1.0) < 1e-15


def test_phi_extreme_arguments_stable():
    assert phi(800.0) == 1.0
    assert phi(-800.0) == 0.0
    assert 0.0 < phi(-35.0) < phi(35.0) < 1.0


def test_phi_strictly_increasing():
    grid = np.linspace(-8, 8, 200)
    vals = [phi(float(s)) for s in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))


# differential

def test_differential_edge_only_constant():
    spec = ErgmSpec([CATALOG["edge"]], [-0.3], 10)
    g = rng(5)
    for _ in range(10):
        x = erdos_renyi_sample(10, 0.5, g)
        assert differential(spec, x, EdgeId(2, 7)) == 2 * -0.3


def test_differential_triangle_example():
    spec = ErgmSpec([CATALOG["edge"], CATALOG["triangle"]], [0.25, 0.4], 3)
    got = differential(spec, complete(3), EdgeId(0, 1))
    assert abs(got - (2 * 0.25 + 2 * 0.4)) < 1e-12


def test_differential_ignores_state_of_target_edge():
    spec = spec_ewt((0.1, 0.2, 0.3), 12)
    g = rng(6)
    for _ in range(20):
        x = erdos_renyi_sample(12, 0.4, g)
        e = EdgeId(int(g.integers(0, 6)), int(g.integers(6, 12)))
        before = differential(spec, x, e)
        flip_edge(x, e)
        assert differential(spec, x, e) == before


def with_state(x, e, present):
    y = x.copy()
    if y.has_edge(e.u, e.v) != present:
        flip_edge(y, e)
    return y


def test_differential_equals_scaled_hamiltonian_increment():
    g = rng(7)
    for n in (5, 12, 32):
        for motifs, beta in (
            ([CATALOG["edge"], CATALOG["wedge"], CATALOG["triangle"]], [0.1, 0.3, 0.2]),
            ([CATALOG["edge"], CATALOG["square"]], [-0.2, 0.5]),
            ([CATALOG["edge"], CATALOG["path3"], CATALOG["k4"]], [0.0, 0.2, 0.1]),
        ):
            spec = ErgmSpec(motifs, beta, n)
            x = erdos_renyi_sample(n, 0.5, g)
            e = EdgeId(0, n - 1)
            plus = with_state(x, e, True)
            minus = with_state(x, e, False)
            exact = (hamiltonian_value(spec, plus) - hamiltonian_value(spec, minus)) * n**2
            got = differential(spec, x, e)
            assert abs(got - exact) <= 1e-9 * max(1.0, abs(exact))


def test_motif_paths_dispatch():
    spec = ErgmSpec(
        [CATALOG["edge"], CATALOG["wedge"], CATALOG["triangle"], CATALOG["square"]],
        [0.0, 0.1, 0.1, 0.1],
        16,
    )
    assert motif_paths(spec) == [
        "edge-constant", "wedge-fast", "triangle-fast", "general-slow"
    ]
    assert uses_slow_path(spec)
    assert not uses_slow_path(spec_ewt((0.0, 0.1, 0.1), 16))


# conditional_probability

def test_conditional_probability_neutral_edge_only():
    spec = ErgmSpec([CATALOG["edge"]], [0.0], 9)
    g = rng(8)
    x = erdos_renyi_sample(9, 0.3, g)
    assert conditional_probability(spec, x, EdgeId(1, 4)) == 0.5


def test_conditional_probability_inverts_logistic():
    spec = ErgmSpec([CATALOG["edge"]], [0.5 * math.log(3 / 7)], 9)
    got = conditional_probability(spec, SimpleGraph(9), EdgeId(0, 1))
    assert abs(got - 0.3) < 1e-12


def test_conditional_probability_monotone_in_edges():
    spec = spec_ewt((0.0, 0.4, 0.6), 8)
    g = rng(9)
    x = SimpleGraph(8)
    e = EdgeId(0, 1)
    last = conditional_probability(spec, x, e)
    for u, v in all_edges(8):
        if (u, v) == (0, 1):
            continue
        flip_edge(x, EdgeId(u, v))
        cur = conditional_probability(spec, x, e)
        assert cur >= last - 1e-15
        last = cur


# motif_constants

def test_constants_triangle_motif():
    spec = ErgmSpec([CATALOG["edge"], CATALOG["triangle"]], [0.0, 1.0], 16)
    consts = motif_constants(spec, 0.5)
    assert consts.per_motif_tri == [0.0, 1.0]
    assert consts.per_motif_wedge == [0.0, 0.0]
    assert consts.per_edge[1] == [(1 / 3, 0.0)] * 3


def test_constants_wedge_motif():
    spec = ErgmSpec([CATALOG["edge"], CATALOG["wedge"]], [0.0, 1.0], 16)
    consts = motif_constants(spec, 0.5)
    assert consts.per_motif_tri == [0.0, 0.0]
    assert consts.per_motif_wedge == [0.0, 1.0]
    assert consts.per_edge[1] == [(0.0, 0.5)] * 2


def test_constants_disjoint_edges_vanish():
    spec = ErgmSpec(
        [CATALOG["edge"], CATALOG["two_disjoint_edges"]], [0.0, 1.0], 16
    )
    consts = motif_constants(spec, 0.5)
    assert consts.aggregate_tri == 0.0
    assert consts.aggregate_wedge == 0.0
    assert not spec.nondegenerate


def test_constants_larger_motifs():
    for name, tri, wedge in (("k4", 4.0, 0.0), ("square", 0.0, 4.0), ("path3", 0.0, 2.0)):
        spec = ErgmSpec([CATALOG["edge"], CATALOG[name]], [0.0, 1.0], 16)
        consts = motif_constants(spec, 0.5)
        assert consts.per_motif_tri[1] == tri
        assert consts.per_motif_wedge[1] == wedge


def test_constants_partition_adjacent_edges():
    # the two channels split the adjacent-edge count exactly
    from ergmlab.model import _edge_pair_counts

    for g in CATALOG.values():
        for i, (a, b) in enumerate(g.edges):
            adjacent = sum(
                1
                for k, (c, d) in enumerate(g.edges)
                if k != i and ({a, b} & {c, d})
            )
            t, w = _edge_pair_counts(g, i)
            assert t + w == adjacent


def test_constants_nonzero_iff_nondegenerate():
    cases = [
        (ErgmSpec([CATALOG["edge"]], [0.3], 16), False),
        (ErgmSpec([CATALOG["edge"], CATALOG["two_disjoint_edges"]], [0.0, 1.0], 16), False),
        (spec_ewt((0.0, 0.1, 0.1), 16), True),
        (ErgmSpec([CATALOG["edge"], CATALOG["square"]], [0.0, 0.2], 16), True),
    ]
    for spec, nondeg in cases:
        consts = motif_constants(spec, 0.4)
        assert spec.nondegenerate == nondeg
        assert ((consts.aggregate_tri, consts.aggregate_wedge) != (0.0, 0.0)) == nondeg


def test_constants_aggregates_linear_in_beta():
    p = 0.37
    base = spec_ewt((0.2, 0.1, 0.3), 16)
    doubled = spec_ewt((0.2, 0.2, 0.6), 16)
    c1 = motif_constants(base, p)
    c2 = motif_constants(doubled, p)
    assert abs(c2.aggregate_tri - 2 * c1.aggregate_tri) < 1e-15
    assert abs(c2.aggregate_wedge - 2 * c1.aggregate_wedge) < 1e-15


def test_constants_aggregate_formula():
    # sum_j beta_j p^{e_j-3} C_tri_j and sum_j beta_j p^{e_j-2} C_wedge_j
    p = 0.61
    spec = ErgmSpec(
        [CATALOG["edge"], CATALOG["wedge"], CATALOG["triangle"], CATALOG["k4"]],
        [0.0, 0.2, 0.3, 0.05],
        16,
    )
    consts = motif_constants(spec, p)
    assert abs(consts.aggregate_tri - (0.3 + 0.05 * p**3 * 4.0)) < 1e-15
    assert abs(consts.aggregate_wedge - 0.2) < 1e-15


def test_constants_reject_boundary_density():
    spec = spec_ewt((0.0, 0.1, 0.1), 16)
    for p in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(SpecError):
            motif_constants(spec, p)


# hajek_residual

def test_residual_edge_only_constant():
    spec = ErgmSpec([CATALOG["edge"]], [-0.45], 12)
    consts = motif_constants(spec, 0.5)
    g = rng(10)
    for _ in range(5):
        x = erdos_renyi_sample(12, 0.5, g)
        assert hajek_residual(spec, consts, x, EdgeId(3, 8)) == 2 * -0.45


def test_residual_edge_wedge_empty_graph():
    # the wedge channel absorbs its own derivative term exactly
    spec = ErgmSpec([CATALOG["edge"], CATALOG["wedge"]], [0.3, 0.2], 16)
    consts = motif_constants(spec, 0.5)
    got = hajek_residual(spec, consts, SimpleGraph(16), EdgeId(0, 1))
    assert got == 2 * 0.3


def test_residual_constant_for_wedge_triangle_specs():
    # derivative is affine in the two channel counts, so the residual
    # collapses to 2*beta_0 identically, independent of x, e, and p
    spec = spec_ewt((0.07, 0.1, 0.1), 24)
    g = rng(11)
    for p in (0.3, 0.5, 0.7):
        consts = motif_constants(spec, p)
        for _ in range(10):
            x = erdos_renyi_sample(24, p, g)
            e = EdgeId(int(g.integers(0, 12)), int(g.integers(12, 24)))
            assert hajek_residual(spec, consts, x, e) == 2 * 0.07


def test_residual_plus_principal_reassembles_differential():
    g = rng(12)
    for motifs, beta in (
        ([CATALOG["edge"], CATALOG["square"]], [0.1, 0.4]),
        ([CATALOG["edge"], CATALOG["wedge"], CATALOG["k4"]], [0.0, 0.2, 0.1]),
    ):
        spec = ErgmSpec(motifs, beta, 16)
        consts = motif_constants(spec, 0.45)
        from ergmlab.motifs import fast_triangle_rooted, fast_wedge_rooted

        for _ in range(10):
            x = erdos_renyi_sample(16, 0.45, g)
            e = EdgeId(int(g.integers(0, 8)), int(g.integers(8, 16)))
            principal = (
                consts.aggregate_tri * fast_triangle_rooted(x, e)
                + consts.aggregate_wedge * fast_wedge_rooted(x, e)
            ) / 16
            resid = hajek_residual(spec, consts, x, e)
            diff = differential(spec, x, e)
            assert abs(resid + principal - diff) <= 1e-9 * max(1.0, abs(diff))


def test_residual_varies_for_four_vertex_motifs():
    # square keeps a genuine remainder: the decomposition is not exact there
    spec = ErgmSpec([CATALOG["edge"], CATALOG["square"]], [0.0, 0.4], 16)
    consts = motif_constants(spec, 0.5)
    g = rng(13)
    seen = set()
    for _ in range(12):
        x = erdos_renyi_sample(16, 0.5, g)
        seen.add(round(hajek_residual(spec, consts, x, EdgeId(0, 15)), 12))
    assert len(seen) > 1


def test_residual_invariant_under_flipping_target():
    spec = spec_ewt((0.1, 0.2, 0.3), 12)
    consts = motif_constants(spec, 0.5)
    g = rng(14)
    x = erdos_renyi_sample(12, 0.5, g)
    e = EdgeId(4, 9)
    before = hajek_residual(spec, consts, x, e)
    flip_edge(x, e)
    assert hajek_residual(spec, consts, x, e) == before
