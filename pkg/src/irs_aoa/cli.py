"""Command line entry point: ``irs-aoa spectrum`` and ``irs-aoa montecarlo``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import typing

from .harness import METHODS, ScenarioConfig, calibrate_snr, emit_report, run_montecarlo, run_spectrum

_POSITIONS = {"bs_pos", "irs_pos", "user_center"}


def _config_flags(parser: argparse.ArgumentParser):
    hints = typing.get_type_hints(ScenarioConfig)
    group = parser.add_argument_group("scenario (override --config values)")
    for f in dataclasses.fields(ScenarioConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _POSITIONS:
            group.add_argument(flag, dest=f.name, type=float, nargs=2, metavar=("X", "Y"))
        elif f.name == "pinned_aoas":
            group.add_argument(flag, dest=f.name, type=float, nargs="+", metavar="DEG")
        elif f.name == "path_loss":
            group.add_argument(flag, dest=f.name, choices=("unit", "free_space"))
        else:
            hint = hints[f.name]
            typ = int if hint in (int, "int") else float
            group.add_argument(flag, dest=f.name, type=typ)


def _parse_sweep(items):
    cells = []
    for item in items or []:
        try:
            kv = dict(part.split("=", 1) for part in item.split(","))
            cells.append((int(kv["L"]), int(kv["Q"])))
        except (KeyError, ValueError):
            raise argparse.ArgumentTypeError(f"bad --sweep cell {item!r}, expected L=<int>,Q=<int>")
    return cells


def build_config(args) -> ScenarioConfig:
    base = ScenarioConfig.load(args.config).to_dict() if args.config else {}
    for f in dataclasses.fields(ScenarioConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            base[f.name] = v
    return ScenarioConfig.from_dict(base)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irs-aoa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="normalized spectrum and peaks of one scenario")
    sp.add_argument("--method", choices=METHODS, default="music")

    mc = sub.add_parser("montecarlo", help="error probability over seeded trials")
    mc.add_argument("--methods", default="music,capon",
                    help="comma-separated subset of music,capon")
    mc.add_argument("--sweep", action="append", metavar="L=<int>,Q=<int>",
                    help="one (L, Q) cell; repeat for more. Default: the config's L and Q")
    mc.add_argument("--workers", type=int, default=1)
    mc.add_argument("--calibrate", type=float, metavar="TARGET",
                    help="first search the SNR at which music with the config's (L, Q) "
                         "reaches this error probability, then run the sweep there")

    for p in (sp, mc):
        p.add_argument("--config", help="JSON file with ScenarioConfig keys")
        p.add_argument("--out", default=".", help="output directory")
        _config_flags(p)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "spectrum":
            run = run_spectrum(cfg, args.out, args.method)
            for i, (a, _) in enumerate(run.result.spectrum.peaks):
                print(f"peak {i}: {a:.4f} deg")
            print("truth:", " ".join(f"{a:.4f}" for a in run.truth))
            return 0
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
        cells = _parse_sweep(args.sweep)
        extra = {}
        if args.calibrate is not None:
            snr, p = calibrate_snr(cfg, args.calibrate, L=cfg.L, Q=cfg.Q, workers=args.workers)
            cfg = cfg.replace(snr_db=snr)
            extra["calibration"] = {"target": args.calibrate, "snr_db": snr, "error_probability": p}
        reports = run_montecarlo(cfg, methods, cells, args.workers, keep_outcomes=False)
        csv_path, _ = emit_report(reports, args.out, cfg, extra)
        print(csv_path.read_text(), end="")
        return 0
    except (ValueError, RuntimeError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"irs-aoa: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
