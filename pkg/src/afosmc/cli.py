"""Command-line front end.

Subcommands::

    run           --config FILE --case {1,2,3} --out CSV [--reference I] [--figures DIR]
    table         --config FILE [--figures DIR]
    sweep-memory  --config FILE --out CSV
    default-config

Data goes to stdout or the named files; diagnostics go to stderr.
Exit codes: 0 success, 2 config error, 3 divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

from .config import Config, ConfigError, dump_config, load_config
from .harness import (CASE_NAMES, TRACE_COLUMNS, SimulationDivergence, Trace,
                      chattering_energy, compute_metrics, run_many, run_scenario,
                      sweep_memory)

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_DIVERGENCE", "EXIT_IO",
           "format_number", "write_trace_csv"]

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4


def format_number(x: float) -> str:
    """17 significant digits; NaN marks an absent signal and becomes empty."""
    x = float(x)
    return "" if math.isnan(x) else "%.17g" % x


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else format_number(v) for v in r])
    return buf.getvalue()


def trace_csv(trace: Trace) -> str:
    cols = [trace[c] for c in TRACE_COLUMNS]
    return _csv_text(TRACE_COLUMNS, zip(*cols))


def _write(path: str | Path, text: str) -> None:
    # newline="" keeps LF line endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_trace_csv(trace: Trace, path: str | Path) -> None:
    _write(path, trace_csv(trace))


def _figures_dir(args, cfg: Config) -> Path | None:
    d = args.figures or cfg.output.figures
    return Path(d) if d else None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output.trace
    if not out:
        raise ConfigError("no output path: pass --out or set output.trace")
    if not 0 <= args.reference < len(cfg.references):
        raise ConfigError(f"reference index {args.reference} out of range")
    trace = run_scenario(cfg.scenario(args.case, args.reference))
    write_trace_csv(trace, out)
    m = compute_metrics(trace, cfg.skip_for(args.reference))
    chat = chattering_energy(trace, cfg.skip_for(args.reference))
    sys.stdout.write(_csv_text(("case", "reference", "mae_mm", "rmse_mm", "chattering"),
                               [(str(args.case), cfg.references[args.reference].label,
                                 m.mae, m.rmse, chat)]))
    figs = _figures_dir(args, cfg)
    if figs:
        from .plotting import plot_trace
        ref = cfg.references[args.reference]
        plot_trace(trace, figs / f"case{args.case}_{ref.kind}_{ref.frequency:g}Hz.png",
                   f"{CASE_NAMES[args.case]}, {ref.label}")
    return EXIT_OK


def cmd_table(args) -> int:
    cfg = load_config(args.config)
    jobs = [(c, i) for i in range(len(cfg.references)) for c in (1, 2, 3)]
    traces = run_many([cfg.scenario(c, i) for c, i in jobs])
    rows = {c: [] for c in (1, 2, 3)}
    for (c, i), tr in zip(jobs, traces):
        rows[c].append(compute_metrics(tr, cfg.skip_for(i)))
    header = ["case", "controller"]
    for r in cfg.references:
        header += [f"{r.label} MAE (mm)", f"{r.label} RMSE (mm)"]
    body = [[str(c), CASE_NAMES[c], *[v for m in ms for v in (m.mae, m.rmse)]]
            for c, ms in rows.items()]
    sys.stdout.write(_csv_text(header, body))
    figs = _figures_dir(args, cfg)
    if figs:
        from .plotting import plot_table
        plot_table(list(cfg.references), rows, figs / "rmse_table.png")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = args.out or cfg.output.sweep
    if not out:
        raise ConfigError("no output path: pass --out or set output.sweep")
    trace = run_scenario(cfg.scenario(cfg.sweep.case, cfg.sweep.reference))
    rows = sweep_memory(trace.e, cfg.step, cfg.sweep.lengths, cfg.afosmc.alpha)
    header = ("L_s", "capacity", "deviation", "bound", "M", "seconds_per_tick")
    _write(out, _csv_text(header, [(r.length, str(r.capacity), r.deviation, r.bound,
                                    r.bound_M, r.seconds_per_tick) for r in rows]))
    return EXIT_OK


def cmd_default_config(args) -> int:
    sys.stdout.write(dump_config(Config()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afosmc", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one case and write its trace CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--case", type=int, choices=(1, 2, 3), required=True)
    r.add_argument("--out", help="trace CSV path (default: output.trace)")
    r.add_argument("--reference", type=int, default=0,
                   help="index into the config's reference list")
    r.add_argument("--figures", help="also write PNG figures into this directory")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", help="MAE/RMSE of all cases across the references")
    t.add_argument("--config", required=True)
    t.add_argument("--figures", help="also write a PNG bar chart into this directory")
    t.set_defaults(func=cmd_table)

    s = sub.add_parser("sweep-memory", help="short-memory accuracy and cost sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="sweep CSV path (default: output.sweep)")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("default-config", help="print the default config as JSON")
    d.set_defaults(func=cmd_default_config)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationDivergence as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
