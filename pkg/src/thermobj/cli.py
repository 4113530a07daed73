"""Command-line entry point: ``thermobj <command> ...``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bounds, channels, oracle, sbs
from .experiments import ExperimentConfig, emit_csv, emit_svg_lineplot, format_csv, run_experiment
from .gibbs import boltzmann_weights
from .operators import DensityOperator, to_bloch
from .textio import float_rows, floats, format_matrix, parse_key_values, parse_sbs, read_matrix


def _load_state(path: str) -> DensityOperator:
    return DensityOperator(read_matrix(path))


def cmd_certify(args) -> int:
    if args.sbs:
        state = sbs.assemble(parse_sbs(Path(args.state).read_text()))
        dims = args.dims or parse_sbs(Path(args.state).read_text()).dims
    else:
        if not args.dims:
            raise SystemExit("--dims is required for interchange-format states")
        state = _load_state(args.state)
        dims = args.dims
    cert = sbs.certify_sbs(state, dims, tol=args.tol)
    if cert:
        s = cert.state
        print("yes")
        print("probs " + " ".join(f"{p:.12g}" for p in s.probs))
    else:
        print("no")
        print(f"witness: {cert.witness}")
    return 0 if cert else 1


def cmd_channel(args) -> int:
    rho = _load_state(args.input)
    if args.kind == "point":
        if not args.target:
            raise SystemExit("--target is required for the point channel")
        ch = channels.point_channel(_load_state(args.target))
    elif args.kind == "cnot":
        ch = channels.cnot_broadcast
    elif args.kind == "gad":
        ch = channels.gad_channel(channels.GADParams(args.p, args.eta))
    else:
        a = np.array(floats(args.A)).reshape(3, 3)
        ch = channels.AffineBlochChannel(a, floats(args.t))
    for _ in range(args.iters):
        rho = ch(rho)
    text = format_matrix(rho)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if rho.dim == 2:
        b = to_bloch(rho)
        print(f"bloch {b.x:.12g} {b.y:.12g} {b.z:.12g}", file=sys.stderr)
    return 0


def _instance(path: str) -> dict[str, str]:
    return parse_key_values(Path(path).read_text())


def _models(kv: dict[str, str]) -> list[bounds.DeviationModel]:
    e = floats(kv["energies"])
    beta = float(kv.get("beta", 1.0))
    shift = float(kv.get("shift", 0.0))
    return [bounds.DeviationModel(e, shift, d, beta) for d in float_rows(kv["deviations"])]


def _greedy_inputs(kv: dict[str, str]):
    beta = float(kv.get("beta", 1.0))
    h = floats(kv["env_energies"])
    if "probs" in kv:
        p = floats(kv["probs"])
    else:
        p = boltzmann_weights(floats(kv["energies"]), beta)
    return p, h, beta


def cmd_bound(args) -> int:
    kv = _instance(args.instance)
    if args.kind == "deviation":
        print(repr(bounds.deviation_bound(_models(kv)[0])))
    elif args.kind == "macrofraction":
        variants = bounds.VARIANTS if args.variant == "all" else (args.variant,)
        for v in variants:
            print(f"{v} {bounds.macrofraction_bound(_models(kv), v)!r}")
    elif args.kind == "greedy":
        p, h, beta = _greedy_inputs(kv)
        res = bounds.greedy_partition(p, h, beta)
        print(repr(res.total))
        for k, group in enumerate(res.assignment.sets):
            print(f"C_{k} " + " ".join(str(j) for j in group))
    else:
        p, h, beta = _greedy_inputs(kv)
        d_S = int(kv.get("d_S", len(p)))
        print(repr(bounds.theorem1_bound(d_S, h, beta)))
    return 0


def cmd_oracle(args) -> int:
    kv = _instance(args.instance)
    if args.kind == "deviation":
        m = _models(kv)[0]
        rep = oracle.OracleReport(
            "deviation_bound vs direct trace distance",
            oracle.deviation_distance(m.base_energies, m.env_energies, m.beta),
            bounds.deviation_bound(m))
    elif args.kind == "macrofraction":
        ms = _models(kv)
        rep = oracle.OracleReport(
            "macrofraction product_form vs direct trace distance",
            oracle.product_distance(ms[0].base_energies, [m.env_energies for m in ms], ms[0].beta),
            bounds.macrofraction_bound(ms, "product_form"))
    elif args.kind == "greedy":
        p, h, beta = _greedy_inputs(kv)
        res = bounds.greedy_partition(p, h, beta)
        groups, best = oracle.brute_force_partition(p, res.weights)
        rep = oracle.OracleReport(f"greedy vs exhaustive partition, optimum {groups}", best, res.total)
    else:
        p, h, beta = _greedy_inputs(kv)
        res = bounds.greedy_partition(p, h, beta)
        _, best = oracle.brute_force_partition(p, res.weights)
        d_S = int(kv.get("d_S", len(p)))
        rep = oracle.OracleReport("exhaustive optimum vs d_S/Z_E", best,
                                  bounds.theorem1_bound(d_S, h, beta))
    print(rep)
    return 0


def cmd_experiments(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = run_experiment(cfg, workers=args.workers)
    emit_csv(table, out / f"{cfg.kind}.csv")
    emit_svg_lineplot(table, out / f"{cfg.kind}.svg")
    (out / f"{cfg.kind}.config.txt").write_text(cfg.to_text())
    sys.stdout.write(format_csv(table))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermobj", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="decide spectrum broadcast structure of a state")
    p.add_argument("state", help="interchange-format state, or SBS file with --sbs")
    p.add_argument("--dims", type=int, nargs="+", help="subsystem dims, system first")
    p.add_argument("--tol", type=float, default=sbs.DEFAULT_TOL)
    p.add_argument("--sbs", action="store_true", help="input is an SBS state file")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("channel", help="apply a channel to a state")
    csub = p.add_subparsers(dest="action", required=True)
    a = csub.add_parser("apply")
    a.add_argument("--kind", choices=["point", "cnot", "gad", "affine"], required=True)
    a.add_argument("--in", dest="input", required=True)
    a.add_argument("--out", dest="output")
    a.add_argument("--target", help="target state for the point channel")
    a.add_argument("--p", type=float, default=0.5)
    a.add_argument("--eta", type=float, default=0.5)
    a.add_argument("--A", default="0 0 0 0 0 0 0 0 0", help="9 entries, row-major")
    a.add_argument("--t", default="0 0 0")
    a.add_argument("--iters", type=int, default=1)
    a.set_defaults(func=cmd_channel)

    for name, func, text in (("bound", cmd_bound, "evaluate a distance bound"),
                             ("oracle", cmd_oracle, "cross-check a bound by brute force")):
        p = sub.add_parser(name, help=text)
        p.add_argument("instance", help="key = value instance file")
        p.add_argument("--kind", choices=["deviation", "macrofraction", "greedy", "theorem1"], required=True)
        p.add_argument("--variant", choices=list(bounds.VARIANTS) + ["all"], default="all")
        p.set_defaults(func=func)

    p = sub.add_parser("experiments", help="Monte Carlo sweeps")
    esub = p.add_subparsers(dest="action", required=True)
    r = esub.add_parser("run")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_experiments)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
