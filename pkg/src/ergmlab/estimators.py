"""Statistical estimators over chain snapshots.

Every estimator is a pure fold over per-snapshot scalars (or small arrays):
run chains, extract one number per snapshot, then aggregate with a fixed
reduction order so a rerun on the recorded series reproduces the estimate bit
for bit.  Standard errors come from batch means, contiguous within each
replica, which absorbs snapshot autocorrelation without modeling it.

Per-edge statistics are averaged over a fixed random subsample of 64 edges
(all edges when there are fewer), justified by edge exchangeability of the
model; the subsample is drawn from a stream separate from every replica's.
"""

import hashlib
import math
from dataclasses import dataclass, field

from .dynamics import ChainConfig, CouplingRun, _pairs, _philox, run_chain
from .graphs import EdgeId
from .model import ErgmSpec, differential, hamiltonian_poly, motif_constants, phi
from .model import hajek_residual as _residual
from .phase import RefusalError, find_wells, sigma_n_sq

SUBSAMPLE_EDGES = 64
MAX_BATCHES = 16

RESULTS_CSV_HEADER = "method,n,K,beta,point,se,samples,seed"
SCALING_CSV_HEADER = "n,estimate,se"


@dataclass
class EstimateResult:
    point: float
    se: float
    samples: int
    n: int
    fingerprint: str
    method: str
    extras: dict = field(default_factory=dict)


@dataclass
class ScalingFit:
    points: list
    slope: float
    intercept: float
    slope_se: float


def spec_fingerprint(spec: ErgmSpec) -> str:
    """Hash of the model identity, invariant to motif list reordering."""
    entries = sorted(
        f"{g.canonical_key()}@{float(b)!r}" for g, b in zip(spec.motifs, spec.beta)
    )
    text = f"n={spec.n}|" + "|".join(entries)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def batch_slices(length: int, max_batches: int = MAX_BATCHES):
    """Contiguous batch index ranges: min(max_batches, length//2) batches."""
    nb = min(max_batches, length // 2)
    if nb < 1:
        return [(0, length)] if length else []
    base = length // nb
    extra = length % nb
    out = []
    start = 0
    for i in range(nb):
        size = base + (1 if i < extra else 0)
        out.append((start, start + size))
        start += size
    return out


def fold_batch_means(series_list):
    """Pooled mean with batch-means SE over per-replica snapshot series.

    Returns (point, se, samples, batch_means).  Fixed reduction order:
    replicas in order, snapshots in order within each.
    """
    total = 0.0
    count = 0
    batch_means = []
    for series in series_list:
        total += sum(series)
        count += len(series)
        for lo, hi in batch_slices(len(series)):
            if hi > lo:
                batch_means.append(sum(series[lo:hi]) / (hi - lo))
    if count == 0:
        raise RefusalError("no snapshots collected")
    point = total / count
    se = _sd(batch_means) / math.sqrt(len(batch_means)) if len(batch_means) > 1 else 0.0
    return point, se, count, batch_means


def _sd(values) -> float:
    m = sum(values) / len(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


def _lag1_autocorr(series_list) -> float:
    num = 0.0
    den = 0.0
    for series in series_list:
        if len(series) < 3:
            continue
        m = sum(series) / len(series)
        c = [v - m for v in series]
        num += sum(a * b for a, b in zip(c[:-1], c[1:]))
        den += sum(a * a for a in c)
    return num / den if den > 0 else 0.0


def _gate(cfg: ChainConfig, need_nondegenerate: bool = False):
    """Regime checks shared by the estimators; returns the phase report."""
    report = find_wells(cfg.spec)
    if report.regime == "critical-present":
        raise RefusalError("critical maximizer present; estimators undefined there")
    if not report.strict_set or all(
        abs(cfg.selected_p - q) > 1e-6 for q in report.strict_set
    ):
        raise RefusalError(
            f"configured density {cfg.selected_p} is not a strict well"
        )
    if need_nondegenerate and not cfg.spec.nondegenerate:
        raise RefusalError("all motifs are unions of edges; constants vanish")
    return report


def edge_subsample(cfg: ChainConfig):
    """The run's fixed per-edge evaluation set (own stream, off the replica keys)."""
    pairs = _pairs(cfg.spec.n)
    if len(pairs) <= SUBSAMPLE_EDGES:
        return [EdgeId(u, v) for u, v in pairs]
    rng = _philox(cfg.seed, 2**32)
    idx = sorted(rng.choice(len(pairs), size=SUBSAMPLE_EDGES, replace=False).tolist())
    return [EdgeId(*pairs[i]) for i in idx]


def _collect(cfg: ChainConfig, snapshot_fn):
    """Run chains and map each snapshot to snapshot_fn(graph)."""
    series = [[] for _ in range(cfg.replicas)]

    def observer(replica, sweep, graph):
        series[replica].append(snapshot_fn(graph))

    result = run_chain(cfg, observer=observer)
    return series, result


def _base_extras(cfg, report, result, density_series):
    return {
        "regime": report.regime,
        "well_density": cfg.selected_p,
        "guard_trips": sum(result.guard_trips),
        "density_autocorr_lag1": _lag1_autocorr(density_series),
    }


def _density_series(result, replicas):
    series = [[] for _ in range(replicas)]
    for replica, _, density, _, _ in result.rows:
        series[replica].append(density)
    return series


def marginal_correction(cfg: ChainConfig) -> EstimateResult:
    """n * (mean edge density - p), the finite-size marginal shift."""
    report = _gate(cfg)
    p = cfg.selected_p
    n = cfg.spec.n
    series, result = _collect(
        cfg, lambda g: n * (g.edge_count / (n * (n - 1) // 2) - p)
    )
    point, se, count, _ = fold_batch_means(series)
    extras = _base_extras(cfg, report, result, _density_series(result, cfg.replicas))
    extras["cstar"] = report.cstar
    extras["cstar_extrapolated"] = report.cstar_extrapolated
    return EstimateResult(
        point, se, count, n, spec_fingerprint(cfg.spec), "marginal_correction", extras
    )


def differential_fluctuation(cfg: ChainConfig) -> EstimateResult:
    """E |n^2 d_e H(X) - 2 H'(p)| over the fixed edge subsample."""
    report = _gate(cfg)
    spec = cfg.spec
    center = 2.0 * hamiltonian_poly(spec, cfg.selected_p, 1)
    edges = edge_subsample(cfg)

    def stat(g):
        return sum(abs(differential(spec, g, e) - center) for e in edges) / len(edges)

    series, result = _collect(cfg, stat)
    point, se, count, _ = fold_batch_means(series)
    extras = _base_extras(cfg, report, result, _density_series(result, cfg.replicas))
    extras["subsample_edges"] = len(edges)
    return EstimateResult(
        point, se, count, spec.n, spec_fingerprint(spec), "differential_fluctuation",
        extras,
    )


def wasserstein_plugin(cfg: ChainConfig) -> EstimateResult:
    """C(n,2) * E |phi(n^2 d_e H(X)) - p|, the per-edge plug-in distance."""
    report = _gate(cfg)
    spec = cfg.spec
    p = cfg.selected_p
    n_pairs = spec.n * (spec.n - 1) // 2
    edges = edge_subsample(cfg)

    def stat(g):
        acc = sum(abs(phi(differential(spec, g, e)) - p) for e in edges)
        return n_pairs * acc / len(edges)

    series, result = _collect(cfg, stat)
    point, se, count, _ = fold_batch_means(series)
    extras = _base_extras(cfg, report, result, _density_series(result, cfg.replicas))
    extras["subsample_edges"] = len(edges)
    return EstimateResult(
        point, se, count, spec.n, spec_fingerprint(spec), "wasserstein_plugin", extras
    )


def wasserstein_coupled(cfg: ChainConfig) -> EstimateResult:
    """Stationary mean Hamming distance of the shared-decision coupled pair."""
    report = _gate(cfg)
    spec = cfg.spec
    n_pairs = spec.n * (spec.n - 1) // 2
    batch_series = []
    trips = 0
    for replica in range(cfg.replicas):
        run = CouplingRun(cfg, replica=replica)
        run.advance(cfg.burnin_sweeps * n_pairs)
        means = []
        for lo, hi in batch_slices(cfg.sample_sweeps):
            run.reset_accumulators()
            run.advance((hi - lo) * n_pairs)
            means.append(run.mean_hamming())
        batch_series.append(means)
        trips += run.guard_trips
    point, se, count, _ = fold_batch_means(batch_series)
    extras = {
        "regime": report.regime,
        "well_density": cfg.selected_p,
        "guard_trips": trips,
        "batches_per_replica": len(batch_series[0]),
    }
    return EstimateResult(
        point, se, cfg.replicas * cfg.sample_sweeps, spec.n,
        spec_fingerprint(spec), "wasserstein_coupled", extras,
    )


def hajek_ratio(cfg: ChainConfig) -> EstimateResult:
    """SD of the decomposition residual over SD of the derivative itself."""
    report = _gate(cfg, need_nondegenerate=True)
    spec = cfg.spec
    consts = motif_constants(spec, cfg.selected_p)
    edges = edge_subsample(cfg)

    def stat(g):
        diffs = [differential(spec, g, e) for e in edges]
        resid = [_residual(spec, consts, g, e) for e in edges]
        return diffs, resid

    series, result = _collect(cfg, stat)
    pooled_d = []
    pooled_r = []
    batch_ratios = []
    for per_replica in series:
        for lo, hi in batch_slices(len(per_replica)):
            bd = [v for diffs, _ in per_replica[lo:hi] for v in diffs]
            br = [v for _, resid in per_replica[lo:hi] for v in resid]
            if len(bd) > 1 and _sd(bd) > 0:
                batch_ratios.append(_sd(br) / _sd(bd))
        for diffs, resid in per_replica:
            pooled_d.extend(diffs)
            pooled_r.extend(resid)
    sd_d = _sd(pooled_d)
    if sd_d == 0:
        raise RefusalError("derivative has zero variance; ratio undefined")
    point = _sd(pooled_r) / sd_d
    se = (
        _sd(batch_ratios) / math.sqrt(len(batch_ratios))
        if len(batch_ratios) > 1
        else 0.0
    )
    extras = _base_extras(cfg, report, result, _density_series(result, cfg.replicas))
    extras["aggregate_tri"] = consts.aggregate_tri
    extras["aggregate_wedge"] = consts.aggregate_wedge
    extras["sd_differential"] = sd_d
    extras["sd_residual"] = _sd(pooled_r)
    return EstimateResult(
        point, se, sum(len(s) for s in series), spec.n,
        spec_fingerprint(spec), "hajek_ratio", extras,
    )


def degree_variance(cfg: ChainConfig) -> EstimateResult:
    """Empirical Var[deg(vertex 0)] relative to the variance proxy."""
    report = _gate(cfg)
    spec = cfg.spec
    proxy = sigma_n_sq(spec, cfg.selected_p, spec.n)
    series, result = _collect(cfg, lambda g: float(g.degree(0)))
    pooled = [v for s in series for v in s]
    if len(pooled) < 2:
        raise RefusalError("need at least two snapshots for a variance")
    batch_ratios = []
    for per_replica in series:
        for lo, hi in batch_slices(len(per_replica)):
            if hi - lo > 1:
                chunk = per_replica[lo:hi]
                batch_ratios.append(_sd(chunk) ** 2 / proxy)
    point = _sd(pooled) ** 2 / proxy
    se = (
        _sd(batch_ratios) / math.sqrt(len(batch_ratios))
        if len(batch_ratios) > 1
        else 0.0
    )
    extras = _base_extras(cfg, report, result, _density_series(result, cfg.replicas))
    extras["sigma_n_sq"] = proxy
    extras["raw_variance"] = point * proxy
    return EstimateResult(
        point, se, len(pooled), spec.n, spec_fingerprint(spec), "degree_variance",
        extras,
    )


def scaling_fit(points) -> ScalingFit:
    """OLS of log estimate on log n; slope with closed-form standard error."""
    if len(points) < 3:
        raise RefusalError(f"scaling fit needs >= 3 points, got {len(points)}")
    for n, d in points:
        if d <= 0:
            raise RefusalError(f"nonpositive estimate {d} at n={n}")
    xs = [math.log(n) for n, _ in points]
    ys = [math.log(d) for _, d in points]
    m = len(points)
    mx = sum(xs) / m
    my = sum(ys) / m
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    sse = sum((y - intercept - slope * x) ** 2 for x, y in zip(xs, ys))
    slope_se = math.sqrt(sse / (m - 2) / sxx) if m > 2 else 0.0
    return ScalingFit(list(points), slope, intercept, slope_se)


def result_csv_row(res: EstimateResult, cfg: ChainConfig) -> str:
    beta = ";".join(repr(float(b)) for b in cfg.spec.beta)
    return (
        f"{res.method},{res.n},{len(cfg.spec.motifs) - 1},{beta},"
        f"{res.point!r},{res.se!r},{res.samples},{cfg.seed}"
    )
