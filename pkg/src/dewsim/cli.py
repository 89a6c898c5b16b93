"""Command line: ``dewsim {simulate,verify,gen-trace,compare}``.

Exit status: 0 success, 1 verification mismatch, 2 usage, parse or I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .config import SweepSpec, enumerate_configs, parse_sweep, read_sweep_file
from .errors import DewError
from .estimator import DEWSimulator
from .oracle import cross_check, oracle_sweep
from .report import comparison_reduction, emit_instrumentation, emit_results
from .trace_io import FORMATS, TraceSpec, generate_trace, read_trace, to_address_array, write_trace

log = logging.getLogger("dewsim")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    trace: str
    trace_format: str
    sweep: SweepSpec
    out: Optional[str]
    out_format: str
    instrument: Optional[str]
    shadow_check: bool
    verify: bool
    policy: str


def _add_sweep_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sets", default="2^0..2^14", help="set counts, '2^lo..2^hi' or comma list")
    p.add_argument("--blocks", default="2^0..2^6", help="block sizes in bytes")
    p.add_argument("--assocs", default="2^0..2^4", help="associativities")
    p.add_argument("--config", help="key=value file with sets=, blocks=, assocs= (overrides the flags)")


def _add_run_args(p: argparse.ArgumentParser, with_outputs: bool = True) -> None:
    p.add_argument("--trace", required=True, help="input trace file")
    p.add_argument("--format", default="din", choices=FORMATS, help="trace format")
    _add_sweep_args(p)
    if with_outputs:
        p.add_argument("--out", help="results file (default: stdout)")
        p.add_argument("--out-format", choices=("csv", "json"), help="default: from --out extension, else csv")
        p.add_argument("--instrument", help="write per-forest instrumentation CSV here")
    p.add_argument("--shadow-check", action="store_true", help="revalidate every shortcut (slow)")
    p.add_argument("--jobs", type=int, default=1, help="threads for independent forests")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dewsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate all configurations in one trace pass")
    _add_run_args(p)

    p = sub.add_parser("verify", help="simulate, then check every configuration against the oracle")
    _add_run_args(p)
    p.add_argument("--policy", default="FIFO", choices=("FIFO", "LRU"), help="oracle replacement policy")

    p = sub.add_parser("gen-trace", help="write a synthetic loop/random trace")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--address-bits", type=int, default=16)
    p.add_argument("--loop-fraction", type=float, default=0.5)
    p.add_argument("--loop-body", type=int, default=64)
    p.add_argument("--stride", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="din", choices=FORMATS)
    p.add_argument("--out", help="trace file (default: stdout)")

    p = sub.add_parser("compare", help="tag comparisons and wall time: one pass vs per-config oracle runs")
    _add_run_args(p, with_outputs=False)
    p.add_argument("--policy", default="FIFO", choices=("FIFO", "LRU"))
    return parser


def _manifest(args) -> RunManifest:
    sweep = read_sweep_file(args.config) if args.config else parse_sweep(args.sets, args.blocks, args.assocs)
    out = getattr(args, "out", None)
    out_format = getattr(args, "out_format", None) or ("json" if out and out.endswith(".json") else "csv")
    return RunManifest(trace=args.trace, trace_format=args.format, sweep=sweep, out=out, out_format=out_format,
                       instrument=getattr(args, "instrument", None), shadow_check=args.shadow_check,
                       verify=args.command == "verify", policy=getattr(args, "policy", "FIFO"))


def _simulate(manifest: RunManifest, jobs: int):
    addresses = to_address_array(read_trace(manifest.trace, manifest.trace_format))
    sim = DEWSimulator(sweep=manifest.sweep, shadow_check=manifest.shadow_check, n_jobs=jobs)
    t0 = time.perf_counter()
    sim.fit(addresses)
    elapsed = time.perf_counter() - t0
    log.info("simulated %d accesses over %d forests in %.3fs", len(addresses), len(sim.forests_), elapsed)
    return addresses, sim, elapsed


def _write_outputs(manifest: RunManifest, sim: DEWSimulator) -> None:
    emit_results(sim.results(), manifest.out_format, manifest.out)
    if manifest.instrument:
        emit_instrumentation(sim.instrumentation(), "csv", manifest.instrument)


def cmd_simulate(args) -> int:
    manifest = _manifest(args)
    _, sim, _ = _simulate(manifest, args.jobs)
    _write_outputs(manifest, sim)
    return EXIT_OK


def cmd_verify(args) -> int:
    manifest = _manifest(args)
    addresses, sim, _ = _simulate(manifest, args.jobs)
    _write_outputs(manifest, sim)
    oracle = oracle_sweep(enumerate_configs(manifest.sweep), addresses, manifest.policy)
    report = cross_check(sim.miss_counts(), oracle)
    print(report.format(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_MISMATCH


def cmd_gen_trace(args) -> int:
    spec = TraceSpec(length=args.length, address_bits=args.address_bits, loop_fraction=args.loop_fraction,
                     loop_body=args.loop_body, stride=args.stride, seed=args.seed)
    accesses = generate_trace(spec)
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            write_trace(accesses, fh, args.format)
    else:
        write_trace(accesses, sys.stdout, args.format)
    return EXIT_OK


def _warm_up() -> None:
    # compile both kernels so wall times measure simulation only
    tiny = SweepSpec((0, 1), (0,), (0, 1))
    DEWSimulator(sweep=tiny).fit([0, 1, 0])
    oracle_sweep(enumerate_configs(tiny), [0, 1, 0])


def cmd_compare(args) -> int:
    manifest = _manifest(args)
    _warm_up()
    addresses, sim, dew_time = _simulate(manifest, args.jobs)
    configs = enumerate_configs(manifest.sweep)
    t0 = time.perf_counter()
    oracle = oracle_sweep(configs, addresses, manifest.policy)
    oracle_time = time.perf_counter() - t0
    dew_cmp = sim.total_tag_comparisons()
    oracle_cmp = sum(s.tag_comparisons for s in oracle.values())
    speedup = oracle_time / dew_time if dew_time > 0 else float("inf")
    print(f"configurations:           {len(configs)}")
    print(f"accesses:                 {len(addresses)}")
    print(f"dew tag comparisons:      {dew_cmp}")
    print(f"oracle tag comparisons:   {oracle_cmp}")
    print(f"comparison reduction:     {100 * comparison_reduction(dew_cmp, oracle_cmp):.2f}%")
    print(f"dew wall time (s):        {dew_time:.4f}")
    print(f"oracle wall time (s):     {oracle_time:.4f}")
    print(f"speedup:                  {speedup:.2f}x")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "gen-trace": cmd_gen_trace, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (DewError, OSError) as exc:
        print(f"dewsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
