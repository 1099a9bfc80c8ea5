"""Seeded single-edge resampling dynamics with well guarding and couplings.

One step draws a uniform edge and a uniform variate, then resets the edge to
present with the model's conditional probability.  A guard window around the
selected well density keeps chains inside their metastable well: a proposal
that would leave the window is dropped (the chain does not move) and counted.
Coupled variants feed the identical (edge, variate) decision to both chains,
which makes per-step disagreement of two Bernoulli updates with means a and b
happen with probability exactly |a - b|.

Randomness comes from a counter-based generator; replica r of a run seeded s
draws from the stream keyed (s, r), so replicas are independent and every run
is reproducible bit for bit.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graphs import EdgeId, SimpleGraph, all_edges, erdos_renyi_sample, hamming_distance
from .model import ErgmSpec, SpecError, hamiltonian_value, phi
from .motifs import rooted_count

DEFAULT_ETA = 0.1
_BLOCK = 1 << 15


@dataclass
class ChainConfig:
    """Chain schedule: 1 sweep = C(n,2) single-edge steps; eta=None disables the guard."""

    spec: ErgmSpec
    selected_p: float
    eta: float = DEFAULT_ETA
    seed: int = 0
    burnin_sweeps: int = 50
    sample_sweeps: int = 200
    thinning_sweeps: int = 1
    replicas: int = 4

    def __post_init__(self):
        p = self.selected_p
        if not 0.0 < p < 1.0:
            raise SpecError(f"well density {p} outside (0,1)")
        if self.eta is not None and not 0.0 < self.eta < min(p, 1.0 - p):
            raise SpecError(
                f"guard half-width {self.eta} outside (0, min(p,1-p)) for p={p}"
            )
        if self.burnin_sweeps < 0:
            raise SpecError("negative burn-in")
        if self.sample_sweeps < 1 or self.thinning_sweeps < 1:
            raise SpecError("sample and thinning sweep counts must be positive")
        if self.replicas < 1:
            raise SpecError("need at least one replica")
        if not 0 <= self.seed < 2**64:
            raise SpecError("seed must fit in 64 bits")


@lru_cache(maxsize=32)
def _pairs(n: int):
    return tuple(all_edges(n))


def _philox(seed: int, stream_id: int):
    return np.random.Generator(np.random.Philox(key=[seed, stream_id]))


class DecisionStream:
    """Blocks of (edge index, uniform variate) decisions from one generator."""

    def __init__(self, rng, n_pairs: int):
        self.rng = rng
        self.n_pairs = n_pairs
        self._edges = []
        self._us = []
        self._at = 0

    def block(self, count: int):
        """Freshly drawn decision block of the requested length."""
        return (
            self.rng.integers(0, self.n_pairs, size=count).tolist(),
            self.rng.random(count).tolist(),
        )

    def next(self):
        """Single decision; buffered so repeated calls stay cheap."""
        if self._at >= len(self._edges):
            self._edges, self._us = self.block(_BLOCK)
            self._at = 0
        k = self._edges[self._at]
        u = self._us[self._at]
        self._at += 1
        return k, u


class _StepContext:
    """Precomputed per-spec constants for the inner update loop.

    The conditional log-odds at edge e decompose as
    A + B*(deg(u)+deg(v) excluding e) + C*codegree(u,v) plus slow-path terms
    for motifs other than single edges, wedges and triangles.
    """

    def __init__(self, cfg: ChainConfig):
        spec = cfg.spec
        n = spec.n
        self.n = n
        self.pairs = _pairs(n)
        self.n_pairs = len(self.pairs)
        A = 0.0
        B = 0.0
        C = 0.0
        general = []
        for g, b in zip(spec.motifs, spec.beta):
            if g.is_single_edge():
                A += 2.0 * b
            elif g.is_wedge():
                A += 2.0 * b / n
                B += 2.0 * b / n
            elif g.is_triangle():
                C += 6.0 * b / n
            else:
                general.append((g, b, float(n ** (g.v - 2))))
        self.A = A
        self.B = B
        self.C = C
        self.general = general
        if cfg.eta is None:
            self.lo_m = -math.inf
            self.hi_m = math.inf
        else:
            # edge-count bounds for the density window, slack absorbs float dust
            self.lo_m = (cfg.selected_p - cfg.eta) * self.n_pairs - 1e-9
            self.hi_m = (cfg.selected_p + cfg.eta) * self.n_pairs + 1e-9


def _drive(x: SimpleGraph, steps: int, ctx: _StepContext, stream: DecisionStream,
           counts=None, mask_state=0):
    """Advance x by the given number of steps; returns (guard trips, mask_state)."""
    adj = x.adj
    pairs = ctx.pairs
    A, B, C = ctx.A, ctx.B, ctx.C
    lo, hi = ctx.lo_m, ctx.hi_m
    general = ctx.general
    exp = math.exp
    m = x.edge_count
    trips = 0
    remaining = steps
    while remaining > 0:
        take = min(remaining, _BLOCK)
        eb, ub = stream.block(take)
        remaining -= take
        for i in range(take):
            k = eb[i]
            pu, pv = pairs[k]
            au = adj[pu]
            av = adj[pv]
            xe = (au >> pv) & 1
            d = A + B * (au.bit_count() + av.bit_count() - 2 * xe) \
                + C * (au & av).bit_count()
            if general:
                e = EdgeId(pu, pv)
                for g, b, scale in general:
                    d += b * rooted_count(g, x, e) / scale
            if d >= 0.0:
                pr = 1.0 / (1.0 + exp(-d))
            else:
                z = exp(d)
                pr = z / (1.0 + z)
            b1 = 1 if ub[i] < pr else 0
            if b1 != xe:
                nm = m + 1 - 2 * xe
                if nm < lo or nm > hi:
                    trips += 1
                else:
                    adj[pu] = au ^ (1 << pv)
                    adj[pv] = av ^ (1 << pu)
                    m = nm
                    if counts is not None:
                        mask_state ^= 1 << k
            if counts is not None:
                counts[mask_state] += 1
    x.edge_count = m
    return trips, mask_state


def warm_start(cfg: ChainConfig, replica: int = 0) -> SimpleGraph:
    """Independent-edge start at the well density from the replica's stream."""
    rng = _philox(cfg.seed, replica)
    return erdos_renyi_sample(cfg.spec.n, cfg.selected_p, rng)


def glauber_step(state: SimpleGraph, cfg: ChainConfig, stream: DecisionStream) -> SimpleGraph:
    """One guarded single-edge update; returns the (possibly unchanged) state."""
    ctx = _StepContext(cfg)
    k, u = stream.next()
    _apply_single(state, ctx, k, u)
    return state


def _apply_single(x: SimpleGraph, ctx: _StepContext, k: int, u: float):
    """Shared one-decision update; returns (new bit, tripped)."""
    pu, pv = ctx.pairs[k]
    e = EdgeId(pu, pv)
    au = x.adj[pu]
    xe = (au >> pv) & 1
    d = ctx.A + ctx.B * (au.bit_count() + x.adj[pv].bit_count() - 2 * xe) \
        + ctx.C * (au & x.adj[pv]).bit_count()
    for g, b, scale in ctx.general:
        d += b * rooted_count(g, x, e) / scale
    b1 = 1 if u < phi(d) else 0
    if b1 == xe:
        return xe, False
    nm = x.edge_count + 1 - 2 * xe
    if nm < ctx.lo_m or nm > ctx.hi_m:
        return xe, True
    x.adj[pu] ^= 1 << pv
    x.adj[pv] ^= 1 << pu
    x.edge_count = nm
    return b1, False


@dataclass
class ChainResult:
    """Thinned trajectory rows plus per-replica summaries."""

    rows: list  # (replica, sweep, edge_density, hamiltonian_value or None, guard_trips)
    guard_trips: list
    final_states: list
    snapshots_per_replica: int


def run_chain(cfg: ChainConfig, observer=None, want_hamiltonian: bool = False) -> ChainResult:
    """Warm start, burn in, then emit thinned snapshots for every replica.

    The observer, when given, receives (replica, sweep, snapshot copy) per
    snapshot; trajectory rows record cumulative guard trips.  Deterministic
    for a fixed config.
    """
    spec = cfg.spec
    ctx = _StepContext(cfg)
    n_pairs = ctx.n_pairs
    snapshots = cfg.sample_sweeps // cfg.thinning_sweeps
    if snapshots < 1:
        raise SpecError("thinning coarser than the whole sampling window")
    rows = []
    trips_out = []
    finals = []
    for r in range(cfg.replicas):
        rng = _philox(cfg.seed, r)
        x = erdos_renyi_sample(spec.n, cfg.selected_p, rng)
        stream = DecisionStream(rng, n_pairs)
        trips, _ = _drive(x, cfg.burnin_sweeps * n_pairs, ctx, stream)
        for s in range(snapshots):
            t, _ = _drive(x, cfg.thinning_sweeps * n_pairs, ctx, stream)
            trips += t
            sweep = cfg.burnin_sweeps + (s + 1) * cfg.thinning_sweeps
            ham = hamiltonian_value(spec, x) if want_hamiltonian else None
            rows.append((r, sweep, x.edge_count / n_pairs, ham, trips))
            if observer is not None:
                observer(r, sweep, x.copy())
        trips_out.append(trips)
        finals.append(x)
    return ChainResult(rows, trips_out, finals, snapshots)


def occupancy_run(cfg: ChainConfig, steps: int, burnin_steps: int = 0):
    """Per-step state occupancy over all edge configurations (desk scale only).

    Returns an integer array indexed by the upper-triangle edge mask.  Meant
    for exact-law comparisons, so the state space 2^C(n,2) must stay small.
    """
    ctx = _StepContext(cfg)
    if ctx.n_pairs > 20:
        raise SpecError(f"occupancy tracking infeasible for C(n,2)={ctx.n_pairs}")
    rng = _philox(cfg.seed, 0)
    x = erdos_renyi_sample(cfg.spec.n, cfg.selected_p, rng)
    stream = DecisionStream(rng, ctx.n_pairs)
    mask = x.edge_mask()
    if burnin_steps:
        _, mask = _drive(x, burnin_steps, ctx, stream, counts=None, mask_state=mask)
        mask = x.edge_mask()
    counts = [0] * (1 << ctx.n_pairs)
    _drive(x, steps, ctx, stream, counts=counts, mask_state=mask)
    return counts


def monotone_coupled_step(xa: SimpleGraph, xb: SimpleGraph, cfg: ChainConfig,
                          stream: DecisionStream):
    """Same decision applied to both chains; preserves edge-subset order."""
    if xa.n != xb.n:
        raise SpecError("coupled chains need equal vertex counts")
    ctx = _StepContext(cfg)
    k, u = stream.next()
    _apply_single(xa, ctx, k, u)
    _apply_single(xb, ctx, k, u)
    return xa, xb


def wasserstein_coupled_step(X: SimpleGraph, Y: SimpleGraph, cfg: ChainConfig,
                             stream: DecisionStream):
    """Shared-decision update of the model chain X and an independent-edge chain Y."""
    if X.n != Y.n:
        raise SpecError("coupled chains need equal vertex counts")
    ctx = _StepContext(cfg)
    k, u = stream.next()
    _apply_single(X, ctx, k, u)
    pu, pv = ctx.pairs[k]
    ye = (Y.adj[pu] >> pv) & 1
    by = 1 if u < cfg.selected_p else 0
    if by != ye:
        Y.adj[pu] ^= 1 << pv
        Y.adj[pv] ^= 1 << pu
        Y.edge_count += 1 - 2 * ye
    return X, Y


class CouplingRun:
    """Model chain and independent-edge chain driven by one decision stream.

    Tracks the running edge disagreement count (Hamming distance) and the
    per-step disagreement indicator at the updated edge.  reset_accumulators
    separates burn-in from measurement.
    """

    def __init__(self, cfg: ChainConfig, replica: int = 0):
        self.cfg = cfg
        self.ctx = _StepContext(cfg)
        rng = _philox(cfg.seed, replica)
        n = cfg.spec.n
        self.X = erdos_renyi_sample(n, cfg.selected_p, rng)
        self.Y = erdos_renyi_sample(n, cfg.selected_p, rng)
        self.stream = DecisionStream(rng, self.ctx.n_pairs)
        self.hamming = hamming_distance(self.X, self.Y)
        self.guard_trips = 0
        self.reset_accumulators()

    def reset_accumulators(self):
        self.steps_measured = 0
        self.hamming_sum = 0
        self.disagree_sum = 0

    def advance(self, steps: int):
        ctx = self.ctx
        adjx = self.X.adj
        adjy = self.Y.adj
        pairs = ctx.pairs
        A, B, C = ctx.A, ctx.B, ctx.C
        lo, hi = ctx.lo_m, ctx.hi_m
        general = ctx.general
        p = self.cfg.selected_p
        exp = math.exp
        mx = self.X.edge_count
        my = self.Y.edge_count
        ham = self.hamming
        ham_sum = 0
        dis_sum = 0
        trips = 0
        remaining = steps
        while remaining > 0:
            take = min(remaining, _BLOCK)
            eb, ub = self.stream.block(take)
            remaining -= take
            for i in range(take):
                k = eb[i]
                u = ub[i]
                pu, pv = pairs[k]
                au = adjx[pu]
                av = adjx[pv]
                xe = (au >> pv) & 1
                d = A + B * (au.bit_count() + av.bit_count() - 2 * xe) \
                    + C * (au & av).bit_count()
                if general:
                    e = EdgeId(pu, pv)
                    for g, b, scale in general:
                        d += b * rooted_count(g, self.X, e) / scale
                if d >= 0.0:
                    pr = 1.0 / (1.0 + exp(-d))
                else:
                    z = exp(d)
                    pr = z / (1.0 + z)
                bx = 1 if u < pr else 0
                by = 1 if u < p else 0
                x_after = xe
                if bx != xe:
                    nm = mx + 1 - 2 * xe
                    if nm < lo or nm > hi:
                        trips += 1
                    else:
                        adjx[pu] = au ^ (1 << pv)
                        adjx[pv] = av ^ (1 << pu)
                        mx = nm
                        x_after = bx
                ye = (adjy[pu] >> pv) & 1
                if by != ye:
                    adjy[pu] ^= 1 << pv
                    adjy[pv] ^= 1 << pu
                    my += 1 - 2 * ye
                before = xe ^ ye
                after = x_after ^ by
                ham += after - before
                ham_sum += ham
                dis_sum += after
        self.X.edge_count = mx
        self.Y.edge_count = my
        self.hamming = ham
        self.hamming_sum += ham_sum
        self.disagree_sum += dis_sum
        self.steps_measured += steps
        self.guard_trips += trips

    def mean_hamming(self) -> float:
        if self.steps_measured == 0:
            return float(self.hamming)
        return self.hamming_sum / self.steps_measured

    def disagreement_rate(self) -> float:
        if self.steps_measured == 0:
            return 0.0
        return self.disagree_sum / self.steps_measured
