"""`geometry`: vierbein, Christoffel and spin-connection tables at points of a chart."""

from __future__ import annotations

import argparse
from itertools import product

import numpy as np

from app.cli.common import EXIT_OK, emit, parse_floats, parse_ints, render
from app.core.errors import ConfigError
from app.core.logger import logger
from app.core.models import GeometryRequest, load_geometry_request
from app.geometry.frames import spin_connection_at
from app.geometry.metrics import ChartMetric, metric_from_config


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("geometry", parents=parents, help="frame and connection tables for a metric")
    parser.add_argument("config", help="metric config JSON (or a geometry request with points/grid)")
    parser.add_argument("--point", action="append", default=[], help="x0,x1,... (repeatable)")
    parser.add_argument("--grid", default=None, help="points per axis, e.g. 10,10")
    parser.add_argument("--lo", default=None, help="lower corner of the grid")
    parser.add_argument("--hi", default=None, help="upper corner of the grid")
    parser.set_defaults(handler=cmd_geometry)


def table_header(n: int) -> list[str]:
    header = [f"x{mu}" for mu in range(n)]
    header += [f"e_{a}_{mu}" for a in range(n) for mu in range(n)]
    header += [f"christoffel_{a}_{m}_{k}" for a in range(n) for m in range(n) for k in range(n)]
    header += [f"omega_{a}_{b}_{m}" for a in range(n) for b in range(n) for m in range(n)]
    return header


def table_row(metric: ChartMetric, x: np.ndarray, h: float = 1e-4) -> list[float]:
    conn = spin_connection_at(metric, x, h)
    return (
        [float(v) for v in x]
        + [float(v) for v in conn.vierbein.e.reshape(-1)]
        + [float(v) for v in conn.christoffel.reshape(-1)]
        + [float(v) for v in conn.spin_omega.reshape(-1)]
    )


def _grid_points(shape: list[int], lo: list[float], hi: list[float]) -> list[np.ndarray]:
    axes = [np.linspace(a, b, n) for a, b, n in zip(lo, hi, shape)]
    return [np.array(p) for p in product(*axes)]


def requested_points(request: GeometryRequest, args: argparse.Namespace) -> list[np.ndarray]:
    n = request.metric.dim
    if args.point:
        points = [np.array(parse_floats(text, "--point")) for text in args.point]
    elif args.grid is not None:
        shape = parse_ints(args.grid, "--grid")
        lo = parse_floats(args.lo, "--lo") if args.lo else [0.0] * n
        hi = parse_floats(args.hi, "--hi") if args.hi else [1.0] * n
        if not len(shape) == len(lo) == len(hi) == n:
            raise ConfigError(f"--grid, --lo and --hi need {n} entries each")
        points = _grid_points(shape, lo, hi)
    elif request.points:
        points = [np.array(p, dtype=float) for p in request.points]
    elif request.grid is not None:
        points = _grid_points(request.grid.shape, request.grid.lo, request.grid.hi)
    else:
        raise ConfigError("no points requested: pass --point, --grid or put points/grid in the config")
    for p in points:
        if p.shape != (n,):
            raise ConfigError(f"point {p.tolist()} does not have {n} coordinates")
    return points


def cmd_geometry(args: argparse.Namespace) -> int:
    request = load_geometry_request(args.config)
    metric = metric_from_config(request.metric)
    points = requested_points(request, args)
    header = table_header(metric.n)
    rows = [table_row(metric, x, request.h) for x in points]
    logger.info(f"geometry metric={metric.name} points={len(rows)}")
    payload = {"metric": metric.name, "columns": header, "rows": rows}
    emit(render(payload, header, rows, args.format or "csv"), args.out)
    return EXIT_OK
