from __future__ import annotations

import argparse

from app.algebra.gamma_repr import dirac_gammas, normalize_convention, rep_to_json
from app.cli.common import EXIT_OK, emit, render


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("gamma", help="gamma-matrix utilities")
    actions = parser.add_subparsers(dest="gamma_action", required=True)
    dump = actions.add_parser("dump", parents=parents, help="print a Dirac representation")
    dump.add_argument("--convention", choices=("mm", "mp", "mostly-minus", "mostly-plus"), default="mm")
    dump.add_argument("--dim", type=int, choices=(2, 4), default=4)
    dump.set_defaults(handler=cmd_gamma_dump)


def cmd_gamma_dump(args: argparse.Namespace) -> int:
    rep = dirac_gammas(normalize_convention(args.convention), dim=args.dim)
    payload = rep_to_json(rep)
    payload["relation_residual"] = rep.relation_residual()
    header = ["mu", "row", "col", "re", "im"]
    rows = [
        [mu, i, j, float(rep.gammas[mu, i, j].real), float(rep.gammas[mu, i, j].imag)]
        for mu in range(rep.n)
        for i in range(rep.size)
        for j in range(rep.size)
    ]
    emit(render(payload, header, rows, args.format or "json"), args.out)
    return EXIT_OK
