"""Command-line interface: ``gaugesets <command> ...``.

Exit codes
    0  success
    1  other errors (unreadable files, failed preconditions)
    2  command-line or gauge/mode specification parse error
    3  input file violates the schema, malformed CSV, or non-cone body for ``cone``
    4  ``--plot`` requested for a model that is not planar
    5  half-space description missing for the conditional core (d >= 3)
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Dict, Optional

import numpy as np

from . import __version__
from .engine import (
    GridSpec,
    RegionRequest,
    cone_gauge_g9,
    cone_gauge_quantile,
    conditional_core,
    conditional_hull,
    resolve_grid,
    run_request,
    selection_expectation,
    vorobev_quantile,
)
from .errors import (
    FormatError,
    GaugeSetsError,
    GaugeSpecError,
    MissingHRepError,
    SchemaError,
)
from .io import (
    AtomRegion,
    RegionDoc,
    format_value,
    load_scenarios,
    model_from_table,
    read_points_csv,
)
from .scalar import GaugeSpec, WeightedSample, eval_gauge

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_SCHEMA, EXIT_PLOT_DIM, EXIT_MISSING_HREP = 0, 1, 2, 3, 4, 5
SEED_ENV = "GAUGESETS_SEED"

log = logging.getLogger("gaugesets")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_gauge(text: str) -> GaugeSpec:
    try:
        return GaugeSpec.parse(text)
    except GaugeSpecError as exc:
        tok = f" (offending token: {exc.token!r})" if exc.token is not None else ""
        raise CliError(EXIT_PARSE, f"cannot parse gauge {text!r}: {exc}{tok}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(EXIT_PARSE, f"{SEED_ENV} must be an integer, got {env!r}") from None


def _emit(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _plot(atoms, path, grid=None):
    from .svg import render

    _emit(render(atoms, grid), path)


def _check_plot_dim(args, d):
    if getattr(args, "plot", None) and d != 2:
        raise CliError(EXIT_PLOT_DIM, f"--plot needs a planar model, this one has dimension {d}")


def _load_model(args):
    if getattr(args, "points", None):
        table = read_points_csv(args.points, args.atom_column,
                                bin_column=getattr(args, "bin_column", None),
                                bins=getattr(args, "bins", 10))
        return model_from_table(table)
    model = load_scenarios(args.scenarios, args.atom_column or "atom")
    return model, model.partition()


def _bodies_doc(bodies: Dict[str, object], meta) -> RegionDoc:
    return RegionDoc([AtomRegion.from_body(k, b) for k, b in bodies.items()], meta)


# ---------------------------------------------------------------------------
# commands


def cmd_scalar(args) -> int:
    gauge = _parse_gauge(args.gauge)
    table = read_points_csv(args.input, args.atom_column,
                            bin_column=args.bin_column, bins=args.bins)
    n = table.data.shape[0]
    w = table.weights
    if w is not None:
        if (w < 0).any() or w.sum() <= 0:
            raise FormatError("weights must be non-negative with a positive sum")
        w = w / w.sum()
    labels = table.atoms if table.atoms is not None else ["all"] * n
    groups: Dict[str, list] = {}
    for i, a in enumerate(labels):
        groups.setdefault(a, []).append(i)
    lines = ["\t".join(["atom"] + table.columns)]
    for a, idx in groups.items():
        idx = np.array(idx)
        ww = None
        if w is not None:
            ww = w[idx] / w[idx].sum()
        row = [a]
        for j in range(table.data.shape[1]):
            row.append(format_value(eval_gauge(gauge, WeightedSample(table.data[idx, j], ww))))
        lines.append("\t".join(row))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _grid_meta(args, d):
    scheme = args.grid_scheme or ("uniform2d" if d == 2 else "fibonacci" if d == 3 else "random")
    n = args.grid if args.grid is not None else (720 if d == 2 else 2048)
    return GridSpec(n, scheme, _seed(args))


def cmd_region(args) -> int:
    gauge = _parse_gauge(args.gauge)
    seed = _seed(args)
    model, partition = _load_model(args)
    _check_plot_dim(args, model.dim)
    grid = _grid_meta(args, model.dim)
    req = RegionRequest(gauge, grid, partition, args.exact_path)
    res = run_request(model, req)
    meta = {"gauge": str(gauge), "grid": {"n": grid.n, "scheme": grid.scheme}, "seed": seed,
            "command": "region"}
    if isinstance(res, dict):
        doc = _bodies_doc(res, meta)
    else:
        meta["directions"] = res.directions
        meta["dropped"] = dict(res.dropped)
        doc = RegionDoc([AtomRegion.from_region(k, r) for k, r in res.regions.items()], meta)
    _emit(doc.dumps(), args.out)
    if args.plot:
        _plot(doc.atoms, args.plot, resolve_grid(2, grid) if args.show_grid else None)
    return EXIT_OK


def _parse_mode(text: str):
    name, _, rest = text.partition(":")
    if name == "g9" and not rest:
        return name, None
    if name in ("quantile", "vorobev") and rest:
        try:
            a = float(rest)
        except ValueError:
            raise CliError(EXIT_PARSE, f"cannot parse mode {text!r}: bad level {rest!r}") from None
        if not 0.0 < a <= 1.0:
            raise CliError(EXIT_PARSE, f"cannot parse mode {text!r}: level {rest!r} not in (0, 1]")
        return name, a
    raise CliError(EXIT_PARSE, f"cannot parse mode {text!r}: expected g9, quantile:A or vorobev:A")


def cmd_cone(args) -> int:
    mode, alpha = _parse_mode(args.mode)
    seed = _seed(args)
    model, partition = _load_model(args)
    for i, b in enumerate(model.bodies):
        if b.vertices is None or np.abs(b.vertices).max(initial=0.0) != 0.0:
            raise CliError(EXIT_SCHEMA, f"scenario {i} is not a cone")
    _check_plot_dim(args, model.dim)
    grid = None
    if model.dim != 2:
        grid = _grid_meta(args, model.dim)
    out = {}
    for label in partition.labels:
        a = partition[label]
        sub = model.restrict(a.indices, a.weights)
        if mode == "g9":
            out[label] = cone_gauge_g9(sub)
        elif mode == "quantile":
            out[label] = cone_gauge_quantile(sub, alpha, grid)
        else:
            out[label] = vorobev_quantile(sub, alpha, grid)
    meta = {"gauge": args.mode, "seed": seed, "command": "cone",
            "grid": None if grid is None else {"n": grid.n, "scheme": grid.scheme}}
    doc = _bodies_doc(out, meta)
    _emit(doc.dumps(), args.out)
    if args.plot:
        _plot(doc.atoms, args.plot)
    return EXIT_OK


def _body_command(fn, name):
    def run(args) -> int:
        seed = _seed(args)
        model, partition = _load_model(args)
        _check_plot_dim(args, model.dim)
        doc = _bodies_doc(fn(model, partition), {"gauge": None, "grid": None, "seed": seed,
                                                 "command": name})
        _emit(doc.dumps(), args.out)
        if args.plot:
            _plot(doc.atoms, args.plot)
        return EXIT_OK

    return run


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARSE, f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaugesets", description="Set-valued gauges of random convex sets.")
    p.add_argument("--version", action="version", version=f"gaugesets {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, plot=True):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=None,
                        help=f"seed for random grids (default: ${SEED_ENV} or 0)")
        if plot:
            sp.add_argument("--plot", metavar="FILE.svg", help="also write an SVG plot (2-D only)")

    s = sub.add_parser("scalar", help="gauge of every column of a CSV file")
    s.add_argument("--gauge", required=True, metavar="SPEC")
    s.add_argument("--input", required=True, metavar="CSV")
    s.add_argument("--atom-column", metavar="NAME")
    s.add_argument("--bin-column", metavar="NAME", help="covariate turned into equal-frequency atoms")
    s.add_argument("--bins", type=int, default=10)
    common(s, plot=False)
    s.set_defaults(func=cmd_scalar)

    r = sub.add_parser("region", help="set-valued gauge on a direction grid")
    r.add_argument("--gauge", required=True, metavar="SPEC")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenarios", metavar="FILE")
    src.add_argument("--points", metavar="CSV")
    r.add_argument("--grid", type=int, metavar="N")
    r.add_argument("--grid-scheme", choices=("uniform2d", "fibonacci", "random"))
    r.add_argument("--atom-column", metavar="NAME")
    r.add_argument("--bin-column", metavar="NAME")
    r.add_argument("--bins", type=int, default=10)
    r.add_argument("--exact-path", choices=("cone", "translated_cone", "gaussian"))
    r.add_argument("--show-grid", action="store_true", help="overlay grid directions on the plot")
    common(r)
    r.set_defaults(func=cmd_region)

    c = sub.add_parser("cone", help="gauge of a random cone")
    c.add_argument("--scenarios", required=True, metavar="FILE")
    c.add_argument("--mode", required=True, metavar="g9|quantile:A|vorobev:A")
    c.add_argument("--atom-column", metavar="NAME")
    c.add_argument("--grid", type=int, metavar="N", help="grid size for d >= 3")
    c.add_argument("--grid-scheme", choices=("fibonacci", "random"))
    common(c)
    c.set_defaults(func=cmd_cone)

    for name, fn, text in (("expectation", selection_expectation, "selection expectation"),
                           ("core", conditional_core, "conditional core"),
                           ("hull", conditional_hull, "conditional convex hull")):
        b = sub.add_parser(name, help=f"per-atom {text}")
        b.add_argument("--scenarios", required=True, metavar="FILE")
        b.add_argument("--atom-column", metavar="NAME")
        common(b)
        b.set_defaults(func=_body_command(fn, name))
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        msg, code = str(exc), exc.code
    except (SchemaError, FormatError) as exc:
        msg, code = str(exc), EXIT_SCHEMA
    except MissingHRepError as exc:
        msg, code = str(exc), EXIT_MISSING_HREP
    except GaugeSpecError as exc:
        msg, code = str(exc), EXIT_PARSE
    except (GaugeSetsError, OSError) as exc:
        msg, code = str(exc), EXIT_ERROR
    print(f"error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
