"""Command-line front end.

    mpca analyze  DATA.csv --scale 0:0.8 --standard -k 2
    mpca sweep    DATA.csv --step 0.1 -k 2 [--reference 1,0,0]
    mpca cluster  DATA.csv --step 0.05 -k 1 [--linkage average]
    mpca generate plane_with_outliers --seed 3 --output plane.csv

Reports go to stdout (or ``--output``); diagnostics go to stderr.
Exit codes: 0 success, 2 usage, 3 parse, 4 empty scale, 5 insufficient points.
"""

from __future__ import annotations

import argparse
import ast
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from mpca import _backend, datagen
from mpca.core import (
    Dataset,
    ScaleInterval,
    covariance_pca,
    mpca,
    pairwise_distances,
)
from mpca.criteria import exempted_percentage, rank_scales, ratio_of_distortion, scale_table
from mpca.errors import (
    DegenerateColumnError,
    EmptyScaleError,
    InsufficientPointsError,
    InvalidInputError,
    ParseError,
)
from mpca.io import EMPTY, dumps, ingest_csv, write_matrix, write_table
from mpca.scalespace import (
    DEFAULT_STEP,
    JUMP_THRESHOLD,
    LINKAGES,
    MEDOID_MODES,
    RESOLUTION,
    build_grid,
    cluster_scales,
    sweep,
)

logger = logging.getLogger("mpca")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_EMPTY_SCALE, EXIT_INSUFFICIENT = 0, 2, 3, 4, 5
FORMAT = "mpca-report/1"


class UsageError(Exception):
    pass


def parse_scale(text: str, standard: bool) -> ScaleInterval:
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"--scale expects l:u, got {text!r}") from None
    try:
        return ScaleInterval(lo, hi, standard=standard)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"--reference expects comma-separated numbers, got {text!r}") from None


def parse_columns(text: str | None) -> list[int | str] | None:
    if text is None:
        return None
    cols: list[int | str] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part and all(p.isdigit() for p in part.split("-", 1)):
            a, b = (int(p) for p in part.split("-", 1))
            cols.extend(range(a, b + 1))
        else:
            cols.append(int(part) if part.isdigit() else part)
    return cols


def _scale_dict(iv: ScaleInterval) -> dict[str, Any]:
    return {"lower": iv.lower, "upper": iv.upper, "standard": iv.standard}


def _metadata(ds: Dataset, args: argparse.Namespace, dist) -> dict[str, Any]:
    return {
        "n": ds.n,
        "m": ds.m,
        "columns": list(ds.column_names) if ds.column_names else None,
        "normalization": args.normalize,
        "d_min": dist.d_min,
        "d_max": dist.d_max,
        "k": args.k,
        "seed": args.seed,
        "angle_unit": "degrees",
        "backend": _backend.BACKEND,
    }


def _load(args: argparse.Namespace) -> Dataset:
    return ingest_csv(args.data, has_header=args.header, normalization=args.normalize,
                      columns=parse_columns(args.columns))


def _check_k(k: int, m: int, strict: bool) -> None:
    top = m - 1 if strict else m
    if not 1 <= k <= top:
        raise UsageError(f"-k must be in [1, {top}] for {m} columns, got {k}")


def cmd_analyze(ds: Dataset, scale: ScaleInterval, k: int, classical: bool = False,
                args: argparse.Namespace | None = None) -> dict[str, Any]:
    """MPCA (or covariance PCA with ``classical``) at one scale."""
    dist = pairwise_distances(ds)
    if classical:
        dec = covariance_pca(ds)
        report_scale = None
        extra: dict[str, Any] = {"mode": "classical"}
    else:
        dec, _, mask = mpca(ds, scale, k, dist=dist)
        lo, hi = scale.resolve(dist.d_max)
        report_scale = dict(_scale_dict(scale), resolved_lower=lo, resolved_upper=hi)
        extra = {
            "mode": "mpca",
            "selected_pairs": mask.selected_pair_count,
            "total_pairs": mask.total_pairs,
            "exempted_percent": exempted_percentage(mask),
        }
    projections = ds.values @ dec.top(k)
    if k < ds.m:
        rep = ratio_of_distortion(ds, dec, k, scale if not classical else ScaleInterval(0, 1, True), dist=dist)
        extra["ratio_of_distortion"] = rep.ratio if rep.ratio is not None else EMPTY
    meta = _metadata(ds, args, dist) if args is not None else {"n": ds.n, "m": ds.m, "k": k}
    meta["scale"] = report_scale
    return {
        "format": FORMAT,
        "command": "analyze",
        "metadata": meta,
        **extra,
        "eigenvalues": dec.eigenvalues,
        "eigenvectors": dec.eigenvectors.T,
        "loadings": dec.top(k).T,
        "projections": projections,
    }


def cmd_sweep(ds: Dataset, step: float, k: int, reference=None, workers: int = 1,
              args: argparse.Namespace | None = None) -> dict[str, Any]:
    dist = pairwise_distances(ds)
    grid = build_grid(dist, step)
    points = sweep(ds, grid, k, workers=workers, dist=dist)
    ref = reference
    if ref is None:
        ref = covariance_pca(ds).eigenvectors[:, 0]
    elif len(ref) != ds.m:
        raise UsageError(f"--reference has {len(ref)} entries, data has {ds.m} columns")
    rows = scale_table(ds, points, k, ref, dist=dist)
    table = [
        {
            "lower": r.interval.lower,
            "upper": r.interval.upper,
            "selected_pairs": r.selected_pairs,
            "exempted_percent": r.exempted_percent,
            "angle": EMPTY if r.angle is None else r.angle,
            "ratio": EMPTY if r.ratio is None else r.ratio,
        }
        for r in rows
    ]
    ranking = [{"lower": r.interval.lower, "upper": r.interval.upper, "ratio": r.ratio,
                "exempted_percent": r.exempted_percent} for r in rank_scales(rows)[:10]]
    meta = _metadata(ds, args, dist) if args is not None else {"n": ds.n, "m": ds.m, "k": k}
    meta.update(step=step, grid_points=len(grid), reference=np.asarray(ref, dtype=float))
    return {"format": FORMAT, "command": "sweep", "metadata": meta, "table": table, "ranking": ranking}


def cmd_cluster(ds: Dataset, step: float, k: int, linkage: str = "average", medoid: str = "distance",
                resolution: float = RESOLUTION, threshold: float = JUMP_THRESHOLD, workers: int = 1,
                args: argparse.Namespace | None = None) -> dict[str, Any]:
    dist = pairwise_distances(ds)
    grid = build_grid(dist, step)
    points = sweep(ds, grid, k, workers=workers, dist=dist)
    result = cluster_scales(points, linkage=linkage, medoid_mode=medoid, data=ds,
                            threshold=threshold, resolution=resolution)
    clusters = [
        {
            "label": c.label,
            "size": c.size,
            "medoid": _scale_dict(c.interval),
            "eigenvectors": c.eigenvectors.T,
            "members": [[points[i].interval.lower, points[i].interval.upper] for i in c.members],
        }
        for c in result.clusters
    ]
    n_live = len(result.point_indices)
    trace = [{"clusters_before": n_live - s, "height": mg.height, "size": mg.size, "pseudo_t2": mg.pseudo_t2}
             for s, mg in enumerate(result.merges)]
    meta = _metadata(ds, args, dist) if args is not None else {"n": ds.n, "m": ds.m, "k": k}
    meta.update(step=step, grid_points=len(grid), linkage=linkage, medoid=medoid,
                resolution=resolution, threshold=threshold)
    return {
        "format": FORMAT,
        "command": "cluster",
        "metadata": meta,
        "chosen_cluster_count": result.chosen_cluster_count,
        "clusters": clusters,
        "empty_points": [[points[i].interval.lower, points[i].interval.upper] for i in result.empty_points],
        "pseudo_t2": trace,
    }


def _parse_param(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise UsageError(f"--param expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        value = raw
    return key.strip(), value


def cmd_generate(kind: str, seed: int, params: dict[str, Any], output: Path) -> dict[str, Any]:
    """Write a generated dataset to ``output`` and its metadata next to it."""
    try:
        spec = datagen.GeneratorSpec(kind, seed, params)
        gen = datagen.generate(spec)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    write_matrix(output, gen.values)
    meta = gen.metadata()
    sidecar = sidecar_path(output)
    sidecar.write_text(dumps(meta), encoding="utf-8")
    return meta


def sidecar_path(output: Path) -> Path:
    return output.with_name(output.name + ".meta.json")


def _write_csv_tables(report: dict[str, Any], directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    cmd = report["command"]
    if cmd == "analyze":
        write_matrix(directory / "projections.csv", report["projections"])
        write_matrix(directory / "eigenvectors.csv", report["eigenvectors"])
    elif cmd == "sweep":
        header = ["lower", "upper", "selected_pairs", "exempted_percent", "angle", "ratio"]
        write_table(directory / "scales.csv", header, [[row[h] for h in header] for row in report["table"]])
    elif cmd == "cluster":
        m = report["metadata"]["m"]
        rows = []
        for c in report["clusters"]:
            for j, vec in enumerate(c["eigenvectors"], start=1):
                rows.append([c["label"], c["size"], c["medoid"]["lower"], c["medoid"]["upper"], j,
                             *[float(x) for x in vec]])
        write_table(directory / "clusters.csv",
                    ["label", "size", "medoid_lower", "medoid_upper", "component", *[f"x{i}" for i in range(m)]], rows)
        write_table(directory / "pseudo_t2.csv", ["clusters_before", "height", "size", "pseudo_t2"],
                    [[t["clusters_before"], t["height"], t["size"], t["pseudo_t2"]] for t in report["pseudo_t2"]])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpca", description="Multiscale principal component analysis")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("data", type=Path, help="input CSV (comma separated, decimal point)")
        p.add_argument("--header", action="store_true", help="first row holds column names")
        p.add_argument("--columns", help="columns to keep: indices, ranges (0-7) or header names")
        p.add_argument("--normalize", choices=("none", "mean", "zscore"), default="none")
        p.add_argument("-k", type=int, default=2, help="number of components (default 2)")
        p.add_argument("--seed", type=int, default=None, help="recorded in the report metadata")
        p.add_argument("--output", type=Path, help="write the report here instead of stdout")
        p.add_argument("--csv-dir", type=Path, help="also export tables as CSV into this directory")

    p = sub.add_parser("analyze", help="MPCA at a single scale")
    data_args(p)
    p.add_argument("--scale", default="0:1", help="interval l:u (default 0:1)")
    p.add_argument("--standard", action="store_true", help="read --scale as fractions of the largest distance")
    p.add_argument("--classical", action="store_true", help="covariance PCA instead of MPCA")

    for name, help_text in (("sweep", "angle / distortion / exempted-pairs tables over the grid of scales"),
                            ("cluster", "cluster the grid of scales by projector distance")):
        p = sub.add_parser(name, help=help_text)
        data_args(p)
        p.add_argument("--step", type=float, default=DEFAULT_STEP, help="standard-scale grid step")
        p.add_argument("--workers", type=int, default=1, help="threads for the sweep")
        if name == "sweep":
            p.add_argument("--reference", help="reference axis x,y,... (default: first classical component)")
        else:
            p.add_argument("--linkage", choices=LINKAGES, default="average")
            p.add_argument("--medoid", choices=MEDOID_MODES, default="distance")
            p.add_argument("--resolution", type=float, default=RESOLUTION,
                           help="projector distance below which merges are ignored when choosing the count")
            p.add_argument("--threshold", type=float, default=JUMP_THRESHOLD,
                           help="minimum pseudo-t2 jump ratio")

    p = sub.add_parser("generate", help="write a synthetic dataset and its metadata sidecar")
    p.add_argument("kind", help=f"one of {', '.join(datagen.KINDS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="generator parameter, repeatable (e.g. n_outliers=5)")
    p.add_argument("--output", type=Path, required=True, help="CSV path; sidecar is OUTPUT.meta.json")
    return parser


def _emit(report: dict[str, Any], args: argparse.Namespace) -> None:
    text = dumps(report)
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if getattr(args, "csv_dir", None) is not None:
        _write_csv_tables(report, args.csv_dir)


def _run(args: argparse.Namespace) -> int:
    if args.command == "generate":
        if args.kind not in datagen.KINDS:
            raise UsageError(f"unknown generator kind {args.kind!r}; expected one of {', '.join(datagen.KINDS)}")
        params = dict(_parse_param(p) for p in args.param)
        cmd_generate(args.kind, args.seed, params, args.output)
        logger.info("wrote %s and %s", args.output, sidecar_path(args.output))
        return EXIT_OK

    ds = _load(args)
    if args.command == "analyze":
        _check_k(args.k, ds.m, strict=False)
        report = cmd_analyze(ds, parse_scale(args.scale, args.standard), args.k, args.classical, args)
    elif not 0 < args.step <= 1 or args.workers < 1:
        raise UsageError("--step must be in (0, 1] and --workers at least 1")
    elif args.command == "sweep":
        _check_k(args.k, ds.m, strict=True)
        ref = parse_vector(args.reference) if args.reference else None
        report = cmd_sweep(ds, args.step, args.k, ref, args.workers, args)
    else:
        _check_k(args.k, ds.m, strict=True)
        report = cmd_cluster(ds, args.step, args.k, args.linkage, args.medoid, args.resolution,
                             args.threshold, args.workers, args)
    _emit(report, args)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _run(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ParseError, DegenerateColumnError, OSError) as exc:
        print(f"mpca: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyScaleError as exc:
        print(f"mpca: empty scale: {exc}", file=sys.stderr)
        return EXIT_EMPTY_SCALE
    except InsufficientPointsError as exc:
        print(f"mpca: insufficient points: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except InvalidInputError as exc:
        print(f"mpca: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
