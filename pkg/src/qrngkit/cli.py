"""Command-line pipeline: simulate -> characterize -> extract -> test.

Each subcommand reads a flat key=value config (the packaged calibration by
default), takes one explicit 64-bit seed where randomness is involved, and
writes its outputs plus a JSON run manifest recording the seed, config
digest, and timestamps.  Diagnostics go to stderr; data goes to files and
stdout.  Exit code 0 means every requested stage succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import entropy, rawblock, simulate, stats
from .bitstream import read_raw, write_raw
from .config import ConfigError, config_digest, default_configs, load_config_file
from .extractor import ToeplitzSeed, active_backend, stream_extract


@dataclass
class RunManifest:
    """Provenance sidecar written next to each subcommand's main output."""

    subcommand: str
    config_path: str | None
    seed: int | None
    outputs: dict[str, str]
    started: str
    finished: str = ""
    config_digest: str | None = None
    inputs: dict[str, str] = field(default_factory=dict)

    def write(self, main_output: str | Path) -> None:
        self.finished = _now()
        path = Path(str(main_output) + ".manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _load_configs(path: str | None):
    if path is None:
        return default_configs(), None
    return load_config_file(path), path


def cmd_simulate(args) -> int:
    (phys, acq, _), config_path = _load_configs(args.config)
    manifest = RunManifest(
        subcommand="simulate",
        config_path=config_path,
        seed=args.seed,
        outputs={"raw": args.out},
        started=_now(),
        config_digest=config_digest(phys, acq).hex(),
    )
    block = simulate.simulate_run(phys, acq, args.n, args.led_on, args.seed)
    nbytes = rawblock.write_block(block, args.out)
    manifest.write(args.out)
    _info(f"simulate: wrote {len(block)} codes ({nbytes} bytes) "
          f"led_{'on' if args.led_on else 'off'} -> {args.out}")
    return 0


def cmd_characterize(args) -> int:
    block_on = rawblock.read_block(args.on_file)
    block_off = rawblock.read_block(args.off_file)
    manifest = RunManifest(
        subcommand="characterize",
        config_path=None,
        seed=None,
        outputs={"report": args.out},
        started=_now(),
        config_digest=block_on.config_digest.hex(),
        inputs={"led_on": args.on_file, "led_off": args.off_file},
    )
    report = entropy.characterize(block_on, block_off, clearance_bits=args.clearance)
    entropy.write_report_csv(args.out, report)
    manifest.write(args.out)
    for name, value, units in report.rows():
        print(f"{name} = {value:.6g} {units}")
    return 0


def cmd_sweep(args) -> int:
    (phys, acq, _), config_path = _load_configs(args.config)
    manifest = RunManifest(
        subcommand="sweep",
        config_path=config_path,
        seed=args.seed,
        outputs={"sweep": args.out},
        started=_now(),
        config_digest=config_digest(phys, acq).hex(),
    )
    run_seeds = simulate.child_seeds(args.seed, args.runs)
    sweeps = []
    for run_index, run_seed in enumerate(run_seeds):
        sweeps.append(simulate.current_sweep(phys, acq, args.steps, args.n, run_seed))
        _info(f"sweep: run {run_index}: {args.steps} steps x {args.n} codes done")
    entropy.write_sweep_csv(args.out, sweeps)
    manifest.write(args.out)
    for run_index, sweep in enumerate(sweeps):
        fit = entropy.linearity_fit(sweep)
        print(
            f"run {run_index}: slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
            f"r_squared={fit.r_squared:.6f} quad_t={fit.quadratic_t_stat:.3f}"
        )
    return 0


def cmd_extract(args) -> int:
    blocks = [rawblock.read_block(p) for p in args.raw_files]
    (_, _, ext), config_path = _load_configs(args.config)
    for path, block in zip(args.raw_files, blocks):
        if block.adc_bits != ext.bits_per_code:
            raise ConfigError(
                f"{path}: adc_bits {block.adc_bits} != extractor bits_per_code "
                f"{ext.bits_per_code}"
            )
    if args.seed_file:
        seed = ToeplitzSeed.from_file(args.seed_file, ext.n, ext.m)
        seed_source = args.seed_file
    else:
        seed = ToeplitzSeed.from_key(bytes.fromhex(args.key_hex), ext.n, ext.m)
        seed_source = "<key-hex>"
    manifest = RunManifest(
        subcommand="extract",
        config_path=config_path,
        seed=None,
        outputs={"bits": args.out},
        started=_now(),
        config_digest=blocks[0].config_digest.hex() if blocks else None,
        inputs={"raw": ",".join(args.raw_files), "toeplitz_seed": seed_source},
    )
    bits = stream_extract(blocks, ext, seed)
    write_raw(bits, args.out)
    manifest.write(args.out)
    total_in = sum(len(b) for b in blocks) * ext.bits_per_code
    _info(f"extract[{active_backend()}]: {total_in} raw bits -> {len(bits)} "
          f"conditioned bits ({bits.byte_count} bytes) -> {args.out}")
    return 0


def cmd_test(args) -> int:
    bits = read_raw(args.bits_file)
    autocorr_out = args.autocorr_out or _derived_path(args.out, ".autocorr.csv")
    manifest = RunManifest(
        subcommand="test",
        config_path=None,
        seed=None,
        outputs={"pvalues": args.out, "autocorr": autocorr_out},
        started=_now(),
        inputs={"bits": args.bits_file},
    )
    pvalues = stats.run_battery(bits)
    stats.write_pvalues_csv(args.out, pvalues)
    max_lag = min(args.max_lag, len(bits) - 1)
    autocorr = stats.autocorrelation(bits, max_lag)
    stats.write_autocorr_csv(autocorr_out, autocorr)
    manifest.write(args.out)

    failures = 0
    for test, values in sorted(pvalues.by_test().items()):
        d, ks_p = stats.ks_uniformity(values)
        verdict = "PASS" if ks_p > 0.01 else "FAIL"
        failures += verdict == "FAIL"
        print(f"{test}: substreams={values.size} min_p={values.min():.3g} "
              f"ks_D={d:.4f} ks_p={ks_p:.3g} {verdict}")
    inside = np.abs(autocorr.coefficients[1:]) <= autocorr.three_sigma_bound
    frac_out = 1.0 - float(inside.mean()) if inside.size else 0.0
    ac_verdict = "PASS" if frac_out <= 0.01 else "FAIL"
    failures += ac_verdict == "FAIL"
    print(f"autocorrelation: lags=1..{max_lag} outside_3sigma={frac_out:.2%} "
          f"bound={autocorr.three_sigma_bound:.2e} {ac_verdict}")
    print(f"summary: {'PASS' if failures == 0 else f'{failures} FAIL'}")
    return 0


def _derived_path(path: str, suffix: str) -> str:
    p = Path(path)
    return str(p.with_suffix(suffix) if p.suffix else Path(str(p) + suffix))


def _seed_int(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrngkit",
        description="Simulate, characterize, extract, and test a balanced-"
                    "detection LED QRNG.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="produce a raw ADC code file")
    p.add_argument("--config", help="config file (default: shipped calibration)")
    p.add_argument("--seed", type=_seed_int, required=True, help="64-bit run seed")
    p.add_argument("--n", type=int, default=1_000_000, help="number of codes")
    led = p.add_mutually_exclusive_group()
    led.add_argument("--led-on", dest="led_on", action="store_true", default=True)
    led.add_argument("--led-off", dest="led_on", action="store_false")
    p.add_argument("--out", required=True, help="output raw block file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("characterize", help="entropy report from on/off files")
    p.add_argument("on_file", help="LED-on raw block file")
    p.add_argument("off_file", help="LED-off raw block file")
    p.add_argument("--clearance", type=float, default=2.0,
                   help="bits subtracted from min-entropy for the ratio")
    p.add_argument("--out", required=True, help="output report CSV")
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("sweep", help="variance vs drive current sweep")
    p.add_argument("--config", help="config file (default: shipped calibration)")
    p.add_argument("--seed", type=_seed_int, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--n", type=int, default=100_000, help="codes per step")
    p.add_argument("--runs", type=int, default=3, help="independent repetitions")
    p.add_argument("--out", required=True, help="output sweep CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("extract", help="condition raw codes into output bits")
    p.add_argument("raw_files", nargs="+", help="raw block file(s), in order")
    p.add_argument("--config", help="config file (default: shipped calibration)")
    seed_src = p.add_mutually_exclusive_group(required=True)
    seed_src.add_argument("--seed-file", help="32-byte Toeplitz key file")
    seed_src.add_argument("--key-hex", help="64 hex chars of Toeplitz key")
    p.add_argument("--out", required=True, help="output packed bit file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("test", help="statistical battery on a bit file")
    p.add_argument("bits_file", help="packed bit file")
    p.add_argument("--max-lag", type=int, default=1000)
    p.add_argument("--out", required=True, help="output p-value CSV")
    p.add_argument("--autocorr-out", help="autocorrelation CSV "
                   "(default: alongside --out)")
    p.set_defaults(func=cmd_test)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"qrngkit {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
