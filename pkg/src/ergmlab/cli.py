"""Command-line front end: spec ingestion, experiment runs, CSV emission.

Spec files are JSON with three fields: "n", "beta" (array of reals) and
"motifs" (array of {"vertices": int, "edges": [[u, v], ...]}); motif 0 must
be the single edge.  Exit codes: 0 success, 1 invalid spec or configuration,
2 numerical refusal (critical regime, singular formulas).  Every output file
starts with a comment carrying the spec fingerprint and the seed, so results
are traceable to their inputs.
"""

import argparse
import json
import os
import sys

from .dynamics import ChainConfig, run_chain
from .estimators import (
    RESULTS_CSV_HEADER,
    SCALING_CSV_HEADER,
    degree_variance,
    differential_fluctuation,
    hajek_ratio,
    marginal_correction,
    result_csv_row,
    scaling_fit,
    spec_fingerprint,
    wasserstein_coupled,
    wasserstein_plugin,
)
from .graphs import GraphError
from .model import ErgmSpec, SpecError
from .motifs import MotifGraph
from .phase import RefusalError, cstar, find_wells

MIN_SIMULATION_N = 8

_SCALING_METHODS = {
    "wasserstein-plugin": wasserstein_plugin,
    "wasserstein-coupled": wasserstein_coupled,
    "fluct": differential_fluctuation,
}


class _SpecFileError(ValueError):
    """Parse or validation failure, carrying path and line for the message."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")


def _line_of(text: str, token: str, occurrence: int = 0) -> int:
    at = -1
    for _ in range(occurrence + 1):
        at = text.find(token, at + 1)
        if at < 0:
            return 1
    return text.count("\n", 0, at) + 1


def parse_spec_file(path: str) -> ErgmSpec:
    """Load and validate a model spec; failures carry path:line messages."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise _SpecFileError(path, 1, str(err))
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise _SpecFileError(path, err.lineno, err.msg)
    if not isinstance(raw, dict):
        raise _SpecFileError(path, 1, "top level must be an object")
    for key in ("n", "beta", "motifs"):
        if key not in raw:
            raise _SpecFileError(path, 1, f'missing required field "{key}"')
    n = raw["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise _SpecFileError(path, _line_of(text, '"n"'), '"n" must be an integer')
    beta = raw["beta"]
    beta_line = _line_of(text, '"beta"')
    if not isinstance(beta, list) or not all(
        isinstance(b, (int, float)) and not isinstance(b, bool) for b in beta
    ):
        raise _SpecFileError(path, beta_line, '"beta" must be an array of numbers')
    if not isinstance(raw["motifs"], list):
        raise _SpecFileError(
            path, _line_of(text, '"motifs"'), '"motifs" must be an array'
        )
    motifs = []
    for i, entry in enumerate(raw["motifs"]):
        line = _line_of(text, '"vertices"', i)
        if not isinstance(entry, dict) or "vertices" not in entry or "edges" not in entry:
            raise _SpecFileError(
                path, line, f'motif {i} needs "vertices" and "edges" fields'
            )
        edges = entry["edges"]
        if not isinstance(edges, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)
            for e in edges
        ):
            raise _SpecFileError(
                path, line, f'motif {i} "edges" must be an array of [u,v] pairs'
            )
        try:
            motifs.append(MotifGraph(entry["vertices"], [tuple(e) for e in edges]))
        except (GraphError, TypeError) as err:
            raise _SpecFileError(path, line, f"motif {i}: {err}")
    try:
        return ErgmSpec(motifs, [float(b) for b in beta], n)
    except (SpecError, GraphError) as err:
        raise _SpecFileError(path, beta_line, str(err))


def serialize_spec(spec: ErgmSpec) -> str:
    """Inverse of parse_spec_file; reparsing preserves the fingerprint."""
    return json.dumps(
        {
            "n": spec.n,
            "beta": list(spec.beta),
            "motifs": [
                {"vertices": g.v, "edges": [[u, v] for u, v in g.edges]}
                for g in spec.motifs
            ],
        },
        indent=2,
    )


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numerical refusals
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SpecError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ergmlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, helptext in (
        ("phase", "free-energy wells, regime, and per-well constants"),
        ("cstar", "first-order marginal shift constant at the selected well"),
        ("sample", "run chains and write a trajectory log"),
        ("marginal", "estimate n(mean density - p)"),
        ("fluct", "estimate the derivative fluctuation scale"),
        ("hajek", "estimate the residual-to-derivative SD ratio"),
        ("degvar", "estimate degree variance against the proxy"),
        ("wasserstein", "plug-in and coupled distance estimates"),
        ("scaling", "run one estimator over an n grid and fit the exponent"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--spec", required=True, help="model spec file (JSON)")
        p.add_argument("--n", type=int, default=None, help="override vertex count")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sweeps", type=int, default=200, help="sampling sweeps")
        p.add_argument("--burnin", type=int, default=50, help="burn-in sweeps")
        p.add_argument("--thin", type=int, default=1, help="sweeps between snapshots")
        p.add_argument("--replicas", type=int, default=4)
        p.add_argument("--eta", default="0.1",
                       help="guard half-width, or 'none' to disable")
        p.add_argument("--well-index", type=int, default=0,
                       help="index into the ascending strict well list")
        p.add_argument("--out", default=".", help="output directory")
        if name == "scaling":
            p.add_argument("--grid", required=True,
                           help="comma-separated vertex counts")
            p.add_argument("--method", required=True,
                           choices=sorted(_SCALING_METHODS))
    return parser


def _parse_eta(raw):
    if isinstance(raw, str) and raw.lower() in ("none", "off"):
        return None
    try:
        return float(raw)
    except ValueError:
        raise SpecError(f"bad guard width {raw!r}")


def _with_n(spec: ErgmSpec, n: int) -> ErgmSpec:
    return spec if n == spec.n else ErgmSpec(spec.motifs, spec.beta, n)


def _selected_well(spec, well_index):
    report = find_wells(spec, well_index=well_index, n=spec.n)
    if report.selected_p is None:
        raise RefusalError(
            f"regime {report.regime}: no strict well; cannot simulate"
        )
    return report


def _chain_config(spec, args) -> ChainConfig:
    report = _selected_well(spec, args.well_index)
    return ChainConfig(
        spec=spec,
        selected_p=report.selected_p,
        eta=_parse_eta(args.eta),
        seed=args.seed,
        burnin_sweeps=args.burnin,
        sample_sweeps=args.sweeps,
        thinning_sweeps=args.thin,
        replicas=args.replicas,
    )


def _open_out(args, name, spec, fresh_header=None):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    new = not os.path.exists(path)
    fh = open(path, "a")
    if new:
        fh.write(f"# fingerprint={spec_fingerprint(spec)} seed={args.seed}\n")
        if fresh_header:
            fh.write(fresh_header + "\n")
    return fh, path


def _cmd_phase(spec, args):
    report = find_wells(spec, well_index=args.well_index, n=spec.n)
    print(f"regime: {report.regime}")
    print(f"dobrushin: {report.dobrushin}")
    for q, val, d2 in report.maximizers:
        print(f"maximizer: q={q!r} L={val!r} L2={d2!r}")
    print(f"global_set: {' '.join(repr(q) for q in report.global_max_set)}")
    print(f"strict_set: {' '.join(repr(q) for q in report.strict_set)}")
    print(f"selected_p: {report.selected_p!r}")
    print(f"cstar: {report.cstar!r}")
    if report.cstar is not None and report.cstar_extrapolated:
        print("cstar_note: extrapolation outside the subcritical regime")
    print(f"sigma_n_sq: {report.sigma_n_sq!r}")
    for note in report.notes:
        print(f"note: {note}")
    header = "regime,selected_p,dobrushin,cstar,sigma_n_sq,global_set,strict_set"
    fh, path = _open_out(args, "phase.csv", spec, header)
    with fh:
        joined_g = ";".join(repr(q) for q in report.global_max_set)
        joined_s = ";".join(repr(q) for q in report.strict_set)
        fh.write(
            f"{report.regime},{report.selected_p!r},{report.dobrushin},"
            f"{report.cstar!r},{report.sigma_n_sq!r},{joined_g},{joined_s}\n"
        )
    print(f"wrote {path}")
    return 0


def _cmd_cstar(spec, args):
    report = _selected_well(spec, args.well_index)
    value = cstar(spec, report.selected_p)
    label = " (extrapolation: regime is not subcritical)" \
        if report.regime != "subcritical" else ""
    print(f"p: {report.selected_p!r}")
    print(f"cstar: {value:+.9f}{label}")
    return 0


def _cmd_sample(spec, args):
    cfg = _chain_config(spec, args)
    result = run_chain(cfg, want_hamiltonian=True)
    header = "replica,sweep,edge_density,hamiltonian_value,guard_trips"
    fh, path = _open_out(args, "trajectory.csv", spec, header)
    with fh:
        for replica, sweep, density, ham, trips in result.rows:
            fh.write(f"{replica},{sweep},{density!r},{ham!r},{trips}\n")
    print(f"snapshots: {len(result.rows)}")
    print(f"guard_trips: {sum(result.guard_trips)}")
    print(f"wrote {path}")
    return 0


def _run_estimators(spec, args, ops):
    cfg = _chain_config(spec, args)
    fh, path = _open_out(args, "results.csv", spec, RESULTS_CSV_HEADER)
    with fh:
        for op in ops:
            res = op(cfg)
            print(
                f"{res.method}: point={res.point!r} se={res.se!r} "
                f"samples={res.samples}"
            )
            for key in sorted(res.extras):
                print(f"  {key}: {res.extras[key]!r}")
            fh.write(result_csv_row(res, cfg) + "\n")
    print(f"wrote {path}")
    return 0


def _cmd_scaling(spec, args):
    try:
        grid = [int(tok) for tok in args.grid.split(",") if tok]
    except ValueError:
        raise SpecError(f"bad n grid {args.grid!r}")
    if len(grid) < 3:
        raise SpecError("scaling needs at least 3 grid points")
    op = _SCALING_METHODS[args.method]
    points = []
    rows = []
    for n in grid:
        if n < MIN_SIMULATION_N:
            raise SpecError(f"simulation needs n >= {MIN_SIMULATION_N}, got {n}")
        spec_n = _with_n(spec, n)
        cfg = _chain_config(spec_n, args)
        res = op(cfg)
        print(f"n={n}: {res.point!r} (se {res.se!r})")
        points.append((n, res.point))
        rows.append(f"{n},{res.point!r},{res.se!r}")
    fit = scaling_fit(points)
    fh, path = _open_out(args, "scaling.csv", spec, SCALING_CSV_HEADER)
    with fh:
        for row in rows:
            fh.write(row + "\n")
    print(f"slope: {fit.slope!r} +- {fit.slope_se!r}")
    print(f"intercept: {fit.intercept!r}")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        spec = parse_spec_file(args.spec)
        if args.n is not None:
            spec = _with_n(spec, args.n)
        if args.subcommand not in ("phase", "cstar") and spec.n < MIN_SIMULATION_N:
            raise SpecError(
                f"simulation needs n >= {MIN_SIMULATION_N}, got {spec.n}"
            )
        if args.subcommand == "phase":
            return _cmd_phase(spec, args)
        if args.subcommand == "cstar":
            return _cmd_cstar(spec, args)
        if args.subcommand == "sample":
            return _cmd_sample(spec, args)
        if args.subcommand == "marginal":
            return _run_estimators(spec, args, [marginal_correction])
        if args.subcommand == "fluct":
            return _run_estimators(spec, args, [differential_fluctuation])
        if args.subcommand == "hajek":
            return _run_estimators(spec, args, [hajek_ratio])
        if args.subcommand == "degvar":
            return _run_estimators(spec, args, [degree_variance])
        if args.subcommand == "wasserstein":
            return _run_estimators(spec, args, [wasserstein_plugin, wasserstein_coupled])
        return _cmd_scaling(spec, args)
    except RefusalError as err:
        print(f"refused: {err}", file=sys.stderr)
        return 2
    except (_SpecFileError, SpecError, GraphError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
