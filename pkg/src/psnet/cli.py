"""Command line driver: ``psnet {matgen,gbs,entangle,compare}``.

Exit codes: 0 success, 2 usage, 3 I/O, 4 numerical validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .core import ModeSpec, Ordering, SeededStream, SubEnsembleLayout, ValidationError
from .counting import GroupedSpec, load_grouped, write_distribution
from .network import (
    BeamSplitterChainSpec,
    MatrixFormatError,
    bs_chain_matrix,
    haar_unitary,
    identity,
    load_matrix,
    save_matrix,
)
from .pipeline import simulate_grouped, simulate_mpartite
from .sampler import InputSpec
from .stats import ReferenceDistribution, chi_square, exact_independent_click_total, exact_thermal_total

log = logging.getLogger("psnet")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

# settings that never change results and so stay out of embedded configs
_VOLATILE = {"output", "config", "threads", "report", "func", "command"}


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def parse_mode_list(text: str) -> list[int]:
    """``"2,10,100"``, ``"2..6"`` or ``"2..500:50"`` (inclusive ranges)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 2:
        raise UsageError(f"mode list {text!r} must name mode counts >= 2")
    return out


def parse_squeezing(text: str, M: int) -> np.ndarray:
    """A single value, ``lo:hi`` (linearly spaced over M modes) or a comma list."""
    text = str(text)
    if ":" in text:
        lo, hi = (float(x) for x in text.split(":"))
        return np.linspace(lo, hi, M)
    vals = [float(x) for x in text.split(",")]
    if len(vals) == 1:
        return np.full(M, vals[0])
    if len(vals) != M:
        raise UsageError(f"got {len(vals)} squeezing values for {M} modes")
    return np.array(vals)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=_positive_int, default=1, help="worker cap")
    p.add_argument("--repeats", type=int, default=120)
    p.add_argument("--chunk", type=_positive_int, default=1000)
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("-o", "--output", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psnet", description="Phase-space simulation of linear bosonic networks")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matgen", help="write a Haar or beam-splitter-chain matrix")
    p.add_argument("--kind", choices=["haar", "bschain"], default="haar")
    p.add_argument("--modes", type=_positive_int, required=True)
    p.add_argument("--reflectivities", help="comma-separated amplitude reflectivities R_1..R_{M-1}")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--config")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_matgen)

    p = sub.add_parser("gbs", help="grouped click-count distribution of a Gaussian boson sampler")
    p.add_argument("--modes", type=_positive_int, required=True)
    p.add_argument("--input", choices=["thermal", "squeezed"], default="squeezed")
    p.add_argument("--n-thermal", type=float, default=1.0)
    p.add_argument("--r", default="1.0", help="squeezing: value, lo:hi or comma list")
    p.add_argument("--epsilon", type=float, default=0.0)
    net = p.add_mutually_exclusive_group()
    net.add_argument("--matrix", help="transmission matrix file")
    net.add_argument("--haar", action="store_true", help="Haar-random unitary drawn from --seed")
    p.add_argument("--groups", default="total", help="'total', sizes like '10+10', or '0-9;10-19'")
    p.add_argument("--reference", help="exact-thermal, exact-independent, or a distribution CSV")
    p.add_argument("--event-count", type=float, help="events behind the reference (default: samples)")
    p.add_argument("--max-chi2-per-k", type=float, help="exit 4 when chi2/k exceeds this")
    p.add_argument("--report", help="write the chi-square report as JSON")
    _common(p)
    p.set_defaults(func=cmd_gbs, chunk=10000)

    p = sub.add_parser("entangle", help="M-partite entanglement witnesses of a beam-splitter chain")
    p.add_argument("--modes", default="2", help="list or range of M, e.g. 2,10,100 or 2..500:50")
    p.add_argument("--r", type=float, default=None, help="squeezing of both inputs")
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--representation", default="wigner", choices=["wigner", "positive-p"])
    _common(p)
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("compare", help="chi-square of a simulated distribution against a reference")
    p.add_argument("--sim", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--event-count", type=float)
    p.add_argument("--config")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def read_config(path) -> dict:
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE and v is not None}


def _layout(args) -> SubEnsembleLayout:
    try:
        return SubEnsembleLayout(args.repeats, args.chunk)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_matgen(args) -> int:
    M = args.modes
    if args.kind == "haar":
        T = haar_unitary(M, SeededStream(args.seed))
    else:
        refl = None
        if args.reflectivities:
            refl = tuple(float(x) for x in args.reflectivities.split(","))
        try:
            T = bs_chain_matrix(BeamSplitterChainSpec(M, refl))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    save_matrix(T, args.output, comments=[f"config: {json.dumps(_config_of(args), sort_keys=True)}",
                                          f"unitarity_deviation: {T.unitarity_deviation:.3e}"])
    print(f"wrote {M}x{M} {args.kind} matrix to {args.output}")
    return EXIT_OK


def _grouping(text: str, M: int) -> GroupedSpec:
    if text == "total":
        return GroupedSpec.total(M)
    if "+" in text:
        return GroupedSpec.split([int(x) for x in text.split("+")])
    return GroupedSpec.from_text(text)


def _input_spec(args) -> InputSpec:
    M = args.modes
    ordering = Ordering.positive_p()
    if args.input == "thermal":
        modes = [ModeSpec.thermal(args.n_thermal)] * M
    else:
        rs = parse_squeezing(args.r, M)
        modes = [ModeSpec.squeezed(float(r), args.epsilon) for r in rs]
    return InputSpec(tuple(modes), ordering)


def _reference(args, spec: InputSpec, samples: int) -> ReferenceDistribution:
    events = args.event_count if args.event_count else samples
    if args.reference == "exact-thermal":
        if args.input != "thermal":
            raise UsageError("exact-thermal reference needs --input thermal")
        return exact_thermal_total(args.modes, args.n_thermal, events)
    if args.reference == "exact-independent":
        return exact_independent_click_total(spec.modes, events)
    ref = load_grouped(args.reference)
    return ReferenceDistribution(ref.probabilities, ref.std_errors,
                                 args.event_count or ref.meta.get("samples", events), ref.meta)


def cmd_gbs(args) -> int:
    layout = _layout(args)
    try:
        spec = _input_spec(args)
        grouping = _grouping(args.groups, args.modes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.matrix:
        T = load_matrix(args.matrix)
    elif args.haar:
        T = haar_unitary(args.modes, SeededStream(args.seed))
    else:
        T = identity(args.modes)
    if not T.physical:
        log.warning("transmission matrix has singular value %.6g > 1", T.max_singular_value)
    ref = _reference(args, spec, layout.samples) if args.reference else None
    dist = simulate_grouped(spec, T, layout, SeededStream(args.seed), grouping, args.threads)
    cfg = _config_of(args)
    write_distribution(dist, args.output, {"config": cfg})
    status = EXIT_OK
    if ref is not None:
        rep = chi_square(dist, ref)
        print(f"chi2 = {rep.chi2:.4f}  k = {rep.k_valid}  chi2/k = {rep.chi2_per_k:.4f}")
        if args.report:
            Path(args.report).write_text(json.dumps(rep.as_dict(), sort_keys=True) + "\n", encoding="utf-8")
        if args.max_chi2_per_k is not None and rep.chi2_per_k > args.max_chi2_per_k:
            log.error("chi2/k %.3f exceeds %.3f", rep.chi2_per_k, args.max_chi2_per_k)
            status = EXIT_NUMERIC
    print(f"wrote {'x'.join(map(str, dist.shape))} distribution to {args.output}")
    return status


def cmd_entangle(args) -> int:
    Ms = parse_mode_list(args.modes)
    r1 = args.r1 if args.r1 is not None else (args.r if args.r is not None else 3.0)
    r2 = args.r2 if args.r2 is not None else (args.r if args.r is not None else 3.0)
    layout = _layout(args)
    ordering = Ordering.from_name(args.representation)
    lines = [json.dumps({"config": _config_of(args)}, sort_keys=True)]
    print(f"{'M':>5} {'product':>12} {'+-':>10} {'thr':>10} {'pass':>5} {'sum':>12} {'+-':>10} {'thr':>10} {'pass':>5}")
    for M in Ms:
        try:
            rep = simulate_mpartite(M, r1, r2, ordering, layout, SeededStream(args.seed), args.threads, args.epsilon)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        e = rep.std_errors
        print(f"{M:>5} {rep.product:12.6g} {e['product']:10.3g} {rep.product_threshold:10.4g} {str(rep.product_pass):>5}"
              f" {rep.sum:12.6g} {e['sum']:10.3g} {rep.sum_threshold:10.4g} {str(rep.sum_pass):>5}")
        lines.append(rep.to_json())
    Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_compare(args) -> int:
    sim = load_grouped(args.sim)
    ref_d = load_grouped(args.ref)
    events = args.event_count or ref_d.meta.get("event_count") or ref_d.meta.get("samples") or np.inf
    ref = ReferenceDistribution(ref_d.probabilities, ref_d.std_errors, float(events), ref_d.meta)
    rep = chi_square(sim, ref)
    Path(args.output).write_text(json.dumps(rep.as_dict(), sort_keys=True) + "\n", encoding="utf-8")
    print(f"chi2 = {rep.chi2:.4f}  k = {rep.k_valid}  chi2/k = {rep.chi2_per_k:.4f}")
    return EXIT_OK


def _apply_config(parser, argv):
    """Parse ``argv`` with values from ``--config`` as subcommand defaults."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in parser._subparsers._group_actions[0].choices), None)
    if known.config and command:
        cfg = read_config(known.config)
        sub = parser._subparsers._group_actions[0].choices[command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for k, v in cfg.items():
            if k not in actions or k in ("config", "help"):
                raise UsageError(f"unknown config key {k!r}")
            act = actions[k]
            if act.nargs == 0:
                defaults[k] = v.lower() in ("1", "true", "yes")
            else:
                defaults[k] = act.type(v) if act.type else v
            act.required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"psnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"psnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"psnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"psnet: validation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, MatrixFormatError) as exc:
        print(f"psnet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"psnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
