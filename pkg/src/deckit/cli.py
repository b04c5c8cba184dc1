"""Command line entry point: ``deckit <cavity|darcy|cohomology|sensor|rank> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import apps
from .errors import ConvergenceError, InputError
from .io import load_edges, load_mesh, load_points, write_table

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deckit", description="Exterior calculus example computations.")
    parser.add_argument("command", choices=["cavity", "darcy", "cohomology", "sensor", "rank"])
    parser.add_argument("--vertices", type=Path, help="vertex coordinates, one per line")
    parser.add_argument("--elements", type=Path, help="triangles as 0-based vertex indices, one per line")
    parser.add_argument("--points", type=Path, help="point cloud for the sensor command")
    parser.add_argument("--radius", type=float, help="Rips radius for the sensor command")
    parser.add_argument("--edges", type=Path, help="'i j value' rows for the rank command")
    parser.add_argument("--seed", type=int, default=apps.DEFAULT_SEED)
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--eigs", type=int, default=5, help="nonzero eigenpairs for cavity")
    parser.add_argument("--kappa", type=float, default=1.0, help="permeability for darcy")
    parser.add_argument("--mu", type=float, default=1.0, help="viscosity for darcy")
    parser.add_argument(
        "--velocity", type=float, nargs=2, default=(1.0, 0.0), metavar=("VX", "VY"),
        help="darcy: boundary fluxes are those of this uniform velocity",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _need(args, *names: str) -> None:
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"{args.command} needs {' '.join(missing)}")


def _run(args) -> None:
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    if args.command in ("cavity", "darcy", "cohomology"):
        _need(args, "vertices", "elements")
        mesh = load_mesh(args.vertices, args.elements)
        centers = apps.barycenters(mesh) if mesh.dim == 2 else None

    if args.command == "cavity":
        if args.eigs < 1:
            raise InputError("--eigs must be positive")
        res = apps.cavity(mesh, args.eigs)
        write_table(out / "eigenvalues.txt", res.eigenvalues, ["eigenvalue"])
        for i, vec in enumerate(res.fields):
            write_table(out / f"eigenvector_{i}.txt", np.hstack([centers, vec]), ["x", "y", "vx", "vy"])
        print(f"zero modes: {res.zero_modes}")
        for lam in res.eigenvalues:
            print(f"{lam:.17g}")

    elif args.command == "darcy":
        res = apps.darcy(mesh, apps.uniform_flow(args.velocity), args.kappa, args.mu)
        write_table(out / "flux.txt", res.flux, ["flux"])
        write_table(out / "pressure.txt", np.hstack([res.circumcenters, res.pressure[:, None]]), ["x", "y", "p"])
        write_table(out / "velocity.txt", np.hstack([centers, res.velocity]), ["x", "y", "vx", "vy"])
        print(f"pressure range: {res.pressure.min():.17g} {res.pressure.max():.17g}")

    elif args.command == "cohomology":
        res = apps.cohomology(mesh, seed=args.seed)
        for i in range(res.rank):
            write_table(out / f"harmonic_{i}.txt", res.basis[:, i], ["h"])
            write_table(out / f"harmonic_{i}_field.txt", np.hstack([centers, res.fields[i]]), ["x", "y", "vx", "vy"])
        print(f"harmonic rank: {res.rank} (expected {res.expected})")

    elif args.command == "sensor":
        _need(args, "points", "radius")
        res = apps.sensor(load_points(args.points), args.radius, seed=args.seed)
        edges = res.complex[1].simplices
        write_table(out / "harmonic.txt", np.hstack([edges, res.harmonic[:, None]]), ["i", "j", "h"], 2)
        write_table(out / "edge_magnitude.txt", np.hstack([edges, np.abs(res.harmonic)[:, None]]), ["i", "j", "|h|"], 2)
        print(f"edges: {len(edges)}  harmonic norm ratio: {res.harmonic_ratio:.17g}")

    elif args.command == "rank":
        _need(args, "edges")
        edges, values = load_edges(args.edges)
        res = apps.rank(edges, values)
        order = np.argsort(-res.scores, kind="stable")
        table = np.column_stack([res.labels[order], res.scores[order]])
        write_table(out / "scores.txt", table, ["label", "alpha"], 1)
        for label, score in table:
            print(f"{int(label)} {score:.17g}")
        print(f"residual: {res.residual:.17g}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        _run(args)
    except InputError as exc:
        print(f"deckit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"deckit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
