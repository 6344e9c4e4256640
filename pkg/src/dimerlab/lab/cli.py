"""Command-line entry point: ``dimerlab <command> [options]``.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.
"""

import argparse
import json
import os
import sys

from dimerlab.lab.config import ConfigError, load_config, resolve_threads, with_overrides
from dimerlab.lab.experiments import emit_outputs, run_compare, run_extract, run_oracle, run_vqt, timed
from dimerlab.lab.io import write_json

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _common(sp, noise=True, threads=True):
    sp.add_argument("--config", help='JSON config file, a run manifest, or "default"')
    sp.add_argument("--seed", type=int, help="master seed override")
    sp.add_argument("--out", help="output directory override")
    if noise:
        sp.add_argument("--noise", choices=("on", "off"), help="enable the default noise model or disable noise")
    if threads:
        sp.add_argument("--threads", type=int, help="worker processes (default: $DIMERLAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dimerlab", description="Two-qubit dimer battery simulation laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("oracle", help="exact thermodynamic curves"), noise=False, threads=False)
    _common(sub.add_parser("vqt", help="variational thermal-state sweep"))
    ex = sub.add_parser("extract", help="work-extraction protocol sweep")
    _common(ex)
    ex.add_argument("--source", choices=("oracle", "vqt"), help="where the input states come from")
    ex.add_argument("--shots", help='"exact" or a positive shot count for the populations')
    cmp_ = sub.add_parser("compare", help="metrics of a sweep against a reference curve")
    _common(cmp_, noise=False, threads=False)
    cmp_.add_argument("--sim", help="sweep.csv to evaluate (default: <out>/sweep.csv)")
    cmp_.add_argument("--reference", help="reference CSV with header T_K,ergotropy_norm")
    ni = sub.add_parser("noise-info", help="print the resolved noise model")
    ni.add_argument("--config")
    ni.add_argument("--noise", choices=("on", "off"))
    return parser


def _noise_override(value):
    return None if value is None else ("default" if value == "on" else "off")


def _shots(value):
    if value is None or value == "exact":
        return value
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f'--shots must be "exact" or an integer, got {value!r}') from exc


def _execute(args) -> int:
    cfg = load_config(args.config)
    cfg = with_overrides(
        cfg,
        master_seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
        noise=_noise_override(getattr(args, "noise", None)),
        source=getattr(args, "source", None),
        shots=_shots(getattr(args, "shots", None)),
        reference=getattr(args, "reference", None),
    )
    if args.command == "noise-info":
        nm = cfg.noise_model()
        print(json.dumps({"enabled": False} if nm is None else nm.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    if args.command == "compare":
        sim = args.sim or os.path.join(cfg.out, "sweep.csv")
        if not os.path.isfile(sim):
            raise ConfigError(f"simulation CSV not found: {sim}")
        out = run_compare(cfg, sim)
        write_json(os.path.join(cfg.out, "metrics.json"), out.metrics)
        print(json.dumps(out.metrics, indent=2, sort_keys=True))
        return EXIT_OK
    threads = resolve_threads(getattr(args, "threads", None), cfg)
    runner = {"oracle": run_oracle, "vqt": run_vqt, "extract": run_extract}[args.command]
    kwargs = {} if args.command == "oracle" else {"threads": threads}
    output, wall = timed(runner, cfg, **kwargs)
    paths = emit_outputs(cfg.out, args.command, cfg, output, wall, threads)
    print(f"{args.command}: {len(output.records)} temperatures in {wall:.2f} s -> {paths['sweep']}")
    for k, v in output.metrics.items():
        print(f"  {k} = {v}")
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _execute(args)
    except ConfigError as exc:
        print(f"dimerlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"dimerlab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
