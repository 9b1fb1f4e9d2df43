"""kitaev-mi command line.

Exit codes: 0 success, 1 a check failed, 2 usage or input error. Output is
assembled completely before anything is written, so a failed run never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .ed_oracle import (DEFAULT_LINKS, ClusterLinks, all_gating_passed, results_as_dicts,
                        run_oracle_checks, sample_couplings)
from .scan import (QUANTITIES, ScanConfig, ScanSeries, default_workers, peak_heights,
                   phase_diagram_raster, scaling_fit, scan)
from .spectrum import Couplings, classify_phase, energy_gap, ground_energy, line_point

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def coupling(text: str) -> float:
    """Accept decimals and fractions such as ``1/3``."""
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"coupling must be finite: {text!r}")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def fmt(x) -> str:
    """Shortest round-trip representation; stable across runs."""
    return repr(float(x))


def header_lines(command: str, config: dict) -> list[str]:
    lines = [f"# kitaev-mi {__version__}", f"# command: {command}"]
    lines += [f"# {k}: {v}" for k, v in config.items()]
    return lines


def render_csv(command: str, config: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    for line in header_lines(command, config):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def render_json(command: str, config: dict, payload: dict) -> str:
    doc = {"version": __version__, "command": command, "config": config}
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


def emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    tmp = path.with_name(path.name + ".part")
    tmp.write_text(text)
    os.replace(tmp, path)


# -- commands ------------------------------------------------------------------

def _couplings(args) -> Couplings:
    if args.jx is None and args.jy is None:
        if args.jz is None:
            raise UsageError("give --jz (symmetric line) or all of --jx --jy --jz")
        return line_point(args.jz)
    if None in (args.jx, args.jy, args.jz):
        raise UsageError("give all of --jx --jy --jz, or only --jz for the symmetric line")
    return Couplings(args.jx, args.jy, args.jz)


def cmd_spectrum(args) -> int:
    j = _couplings(args)
    report = {"jx": j.jx, "jy": j.jy, "jz": j.jz, "L": args.L,
              "gap": energy_gap(j, args.L), "ground_energy": ground_energy(j, args.L),
              "phase": classify_phase(j).value}
    if args.format == "json":
        text = json.dumps({"version": __version__, "command": "spectrum", **report}, indent=2) + "\n"
    else:
        text = "".join(f"{k}={fmt(v) if isinstance(v, float) else v}\n" for k, v in report.items())
    emit(text, args.output)
    return EXIT_OK


def _scan_config(args, L: int) -> ScanConfig:
    return ScanConfig(args.jz_min, args.jz_max, args.points, L, args.e_floor, args.workers)


def series_rows(series: ScanSeries):
    return [(fmt(z), fmt(v), str(int(f)))
            for z, v, f in zip(series.jz, series.values, series.floored)]


def cmd_scan(args) -> int:
    cfg = _scan_config(args, args.L)
    series = scan(args.quantity, cfg)
    config = {"quantity": args.quantity, **cfg.echo()}
    if args.format == "json":
        text = render_json("scan", config, {
            "columns": ["jz", "value", "floored_points"],
            "jz": [float(z) for z in series.jz],
            "value": [float(v) for v in series.values],
            "floored_points": [int(f) for f in series.floored],
        })
    else:
        text = render_csv("scan", config, ["jz", "value", "floored_points"], series_rows(series))
    emit(text, args.output)
    return EXIT_OK


def read_peak_table(path: str) -> tuple[list[int], list[float]]:
    """CSV with columns L,peak; ``#`` lines are comments."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines()
                 if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or not {"L", "peak"} <= set(reader.fieldnames):
        raise UsageError(f"{path}: expected columns L,peak")
    sizes, peaks = [], []
    for row in reader:
        try:
            sizes.append(int(row["L"]))
            peaks.append(float(row["peak"]))
        except (TypeError, ValueError):
            raise UsageError(f"{path}: bad row {row}") from None
    return sizes, peaks


def cmd_fit(args) -> int:
    if (args.L is None) == (args.data is None):
        raise UsageError("give exactly one of --L (sizes to scan) or --data (L,peak table)")
    config = {"asymptote": args.asymptote}
    peak_jz = None
    if args.data is not None:
        sizes, peaks = read_peak_table(args.data)
        config["data"] = Path(args.data).name
    else:
        if args.quantity is None:
            raise UsageError("--L needs a quantity (dmi2 or mi4)")
        base = _scan_config(args, args.L[0])
        window = tuple(args.window) if args.window else None
        found = peak_heights(args.quantity, args.L, base, window)
        sizes, peaks = list(args.L), [p.value for p in found]
        peak_jz = [p.jz for p in found]
        config.update({"quantity": args.quantity, "sizes": list(args.L), "window": window,
                       **{k: v for k, v in base.echo().items() if k != "L"}})
    fit = scaling_fit(sizes, peaks, asymptote=args.asymptote)
    report = {"asymptote": fit.asymptote, "slope": fit.slope, "intercept": fit.intercept,
              "residual": fit.residual, "r_squared": fit.r_squared, "mode": fit.mode,
              "sizes": fit.sizes, "peaks": fit.peaks, "peak_jz": peak_jz,
              "warnings": fit.warnings}
    if args.format == "json":
        text = render_json("fit", config, report)
    else:
        lines = header_lines("fit", config)
        for k in ("mode", "asymptote", "slope", "intercept", "residual", "r_squared"):
            v = report[k]
            lines.append(f"{k}={fmt(v) if isinstance(v, float) else v}")
        for i, (L, p) in enumerate(zip(fit.sizes, fit.peaks)):
            where = "" if peak_jz is None else f" jz={fmt(peak_jz[i])}"
            lines.append(f"L={L} peak={fmt(p)}{where}")
        lines += [f"warning: {w}" for w in fit.warnings]
        text = "\n".join(lines) + "\n"
    emit(text, args.output)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    links = DEFAULT_LINKS
    if args.links is not None:
        try:
            links = ClusterLinks.from_json(Path(args.links).read_text())
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot load link table {args.links}: {exc}") from None
    results = run_oracle_checks(links, sample_couplings(args.samples, args.seed))
    ok = all_gating_passed(results)
    if args.report == "json":
        text = json.dumps({"version": __version__, "command": "oracle-check", "passed": ok,
                           "samples": args.samples, "seed": args.seed,
                           "checks": results_as_dicts(results)}, indent=2) + "\n"
    else:
        lines = []
        for r in results:
            tag = "PASS" if r.passed else "FAIL"
            kind = "" if r.gating else " (informational)"
            lines.append(f"{tag} {r.name}{kind}: {r.detail}")
        lines.append("overall: " + ("PASS" if ok else "FAIL"))
        text = "\n".join(lines) + "\n"
    emit(text, args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_phase_diagram(args) -> int:
    cells = phase_diagram_raster(args.resolution, args.L)
    config = {"resolution": args.resolution, "L": args.L}
    rows = [(fmt(c.couplings.jx), fmt(c.couplings.jy), fmt(c.couplings.jz), fmt(c.gap),
             c.phase.value) for c in cells]
    columns = ["jx", "jy", "jz", "gap", "phase"]
    if args.format == "json":
        text = render_json("phase-diagram", config,
                           {"columns": columns,
                            "rows": [[float(x) for x in r[:4]] + [r[4]] for r in rows]})
    else:
        text = render_csv("phase-diagram", config, columns, rows)
    emit(text, args.output)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jz-min", type=float, default=0.0)
    p.add_argument("--jz-max", type=float, default=1.0)
    p.add_argument("--points", type=positive_int, default=1001, help="number of jz samples")
    p.add_argument("--e-floor", type=float, default=1e-12,
                   help="momenta with E below this are dropped from correlator sums")
    p.add_argument("--workers", type=positive_int, default=None,
                   help="worker processes (default from KITAEV_MI_WORKERS, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kitaev-mi",
                                     description="Mutual information in the Kitaev honeycomb model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="gap, ground energy and phase")
    p.add_argument("--jx", type=coupling)
    p.add_argument("--jy", type=coupling)
    p.add_argument("--jz", type=coupling)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan", help="sweep along Jx = Jy = (1 - Jz)/2")
    p.add_argument("quantity", choices=QUANTITIES)
    p.add_argument("--L", type=int, default=100)
    _add_grid(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fit", help="finite-size scaling of peak heights")
    p.add_argument("quantity", nargs="?", choices=("dmi2", "mi4"))
    p.add_argument("--L", type=int, nargs="+", help="sizes to scan")
    p.add_argument("--data", help="CSV with columns L,peak instead of scanning")
    p.add_argument("--asymptote", type=float, default=None, help="fix A instead of fitting it")
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                   help="restrict the peak search to LO <= jz <= HI")
    _add_grid(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("oracle-check", help="8-site exact-diagonalization checks")
    p.add_argument("--links", help="JSON file with x_links, y_links, z_links")
    p.add_argument("--samples", type=positive_int, default=25)
    p.add_argument("--seed", type=int, default=20240611)
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("phase-diagram", help="gap and phase on the Jx + Jy + Jz = 1 simplex")
    p.add_argument("--resolution", type=int, default=20)
    p.add_argument("--L", type=int, default=40)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_phase_diagram)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", 0) is None:
            args.workers = default_workers()
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"kitaev-mi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
