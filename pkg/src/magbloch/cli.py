"""Command-line interface.

Exit codes: 0 success, 1 not quantizable, 2 parse/config error,
3 model invariant violation, 4 numeric failure (residual above tolerance,
oversized dense solve, non-Hermitian input).

Outputs are deterministic: the same model and flags produce byte-identical
JSON/CSV/SVG.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bloch, bundle
from .complexes import validate
from .homology import character_group, homology
from .model_io import Model, ModelError, load_model
from .operators import NumericError, assemble_fiber, spectrum

EXIT_OK = 0
EXIT_NOT_QUANTIZABLE = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_NUMERIC = 4

DEFAULT_TOLERANCES = {
    "quantizability": 1e-9,
    "unitarity": 1e-12,
    "off_diagonal": 1e-10,
    "fiber_deviation": 1e-10,
    "char_relations": 1e-12,
    "decomposition": 1e-8,
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_sizes(text: str, name: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise CliError(f"--{name} expects comma-separated integers, got {text!r}", EXIT_PARSE)
    if any(n < 1 for n in sizes):
        raise CliError(f"--{name} entries must be >= 1", EXIT_PARSE)
    return sizes


def _parse_fluxes(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_klist(text: str, rank: int) -> np.ndarray:
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            vals = [float(p) for p in chunk.split(",")]
        except ValueError:
            raise CliError(f"--k expects numbers, got {chunk!r}", EXIT_PARSE)
        if len(vals) != rank:
            raise CliError(f"--k points must have {rank} components", EXIT_PARSE)
        points.append(vals)
    if not points:
        raise CliError("--k contained no points", EXIT_PARSE)
    return np.array(points)


def _parse_tols(pairs: list[str] | None) -> dict:
    tols = dict(DEFAULT_TOLERANCES)
    for pair in pairs or []:
        if "=" not in pair:
            raise CliError(f"--tol expects NAME=VALUE, got {pair!r}", EXIT_PARSE)
        name, _, value = pair.partition("=")
        if name not in tols:
            raise CliError(
                f"unknown tolerance {name!r}; known: {', '.join(sorted(tols))}", EXIT_PARSE
            )
        try:
            v = float(value)
        except ValueError:
            raise CliError(f"--tol {name} expects a number, got {value!r}", EXIT_PARSE)
        if v <= 0:
            raise CliError(f"--tol {name} must be positive", EXIT_PARSE)
        tols[name] = v
    return tols


def _load(args) -> Model:
    try:
        return load_model(args.model)
    except ModelError as exc:
        raise CliError(f"model error: {exc}", EXIT_PARSE)


def _require_valid(model: Model) -> None:
    report = validate(model.complex2, model.covering)
    if not report.ok:
        lines = "; ".join(f"{i.check}: {i.detail}" for i in report.issues)
        raise CliError(f"model fails validation: {lines}", EXIT_INVARIANT)


def _emit(args, payload: str) -> None:
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _emit_json(args, data: dict) -> None:
    _emit(args, json.dumps(data, sort_keys=True, indent=2) + "\n")


def _connection_from_model(model: Model, tols: dict) -> np.ndarray:
    summary = homology(model.complex2)
    cert = bundle.is_quantizable(
        model.complex2, model.flux, summary, tol=tols["quantizability"]
    )
    if not cert.verdict:
        raise CliError(
            f"model flux is not quantizable (residues {list(cert.residues)})",
            EXIT_NOT_QUANTIZABLE,
        )
    return bundle.synthesize_connection(model.complex2, model.flux, summary)


def cmd_validate(args) -> int:
    model = _load(args)
    report = validate(model.complex2, model.covering)
    if args.json:
        _emit_json(args, report.to_dict())
    else:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in report.checks.items()]
        for issue in report.issues:
            lines.append(f"  {issue.check}: {issue.detail} (at {list(issue.where)})")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if report.ok else EXIT_INVARIANT


def cmd_homology(args) -> int:
    model = _load(args)
    _require_valid(model)
    summary = homology(model.complex2)
    if args.json:
        _emit_json(args, summary.to_dict())
    else:
        b0, b1, b2 = summary.betti
        lines = [
            f"betti: b0={b0} b1={b1} b2={b2}",
            f"H1 torsion orders: {list(summary.h1_torsion_orders)}",
            f"euler characteristic: {summary.euler_characteristic()}",
        ]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_quantizable(args) -> int:
    model = _load(args)
    _require_valid(model)
    tols = _parse_tols(args.tol)
    summary = homology(model.complex2)
    cert = bundle.is_quantizable(
        model.complex2, model.flux, summary, tol=tols["quantizability"]
    )
    if args.json:
        _emit_json(args, cert.to_dict())
    else:
        lines = [f"verdict: {'quantizable' if cert.verdict else 'NOT quantizable'}"]
        for i, (p, r) in enumerate(zip(cert.pairings, cert.residues)):
            lines.append(f"2-cycle {i}: pairing {p:.12g} residue {r:.3e}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if cert.verdict else EXIT_NOT_QUANTIZABLE


def cmd_classes(args) -> int:
    model = _load(args)
    _require_valid(model)
    group = character_group(homology(model.complex2))
    torsion_chars = [list(c.torsion_indices) for c in group.enumerate_torsion()]
    data = {
        "free_rank": group.free_rank,
        "torsion": list(group.torsion),
        "components": group.num_components,
        "torsion_characters": torsion_chars,
    }
    if args.json:
        _emit_json(args, data)
    else:
        lines = [
            f"character group: torus of dimension {group.free_rank}"
            f" x {group.num_components} component(s)",
            f"torsion orders: {list(group.torsion)}",
        ]
        for idx in torsion_chars:
            lines.append(f"component representative: torsion indices {idx}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_fibers(args) -> int:
    model = _load(args)
    _require_valid(model)
    tols = _parse_tols(args.tol)
    theta = _connection_from_model(model, tols)
    rank = model.covering.rank
    if args.k:
        ks = _parse_klist(args.k, rank)
    elif args.grid:
        grid = _parse_sizes(args.grid, "grid")
        if len(grid) != rank:
            raise CliError(f"--grid must have {rank} entries for this model", EXIT_PARSE)
        band = bloch.spectrum_union(model.complex2, model.covering, theta, grid)
        _emit(args, bloch.band_csv(band))
        return EXIT_OK
    else:
        raise CliError("fibers needs --k or --grid", EXIT_PARSE)
    eigs = np.array(
        [
            spectrum(assemble_fiber(model.complex2, model.covering, theta, k)).eigenvalues
            for k in ks
        ]
    )
    band = bloch.BandData(ks, eigs, (), ())
    _emit(args, bloch.band_csv(band))
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _load(args)
    _require_valid(model)
    tols = _parse_tols(args.tol)
    if not args.supercell:
        raise CliError("verify needs --supercell", EXIT_PARSE)
    sizes = _parse_sizes(args.supercell, "supercell")
    if len(sizes) != model.covering.rank:
        raise CliError(
            f"--supercell must have {model.covering.rank} entries for this model", EXIT_PARSE
        )
    theta = _connection_from_model(model, tols)
    block = bloch.verify_block_diagonalization(model.complex2, model.covering, theta, sizes)
    chars = bloch.character_relations_check(sizes)
    decomp = bloch.decomposition_check(model.complex2, model.covering, theta, sizes)
    results = {
        "unitarity": (block.unitarity_defect, tols["unitarity"]),
        "off_diagonal": (block.off_diagonal, tols["off_diagonal"]),
        "fiber_deviation": (block.fiber_deviation, tols["fiber_deviation"]),
        "char_relations": (chars.max_residual, tols["char_relations"]),
        "decomposition": (decomp.relative_deviation, tols["decomposition"]),
    }
    ok = all(value <= tol for value, tol in results.values())
    if args.json:
        _emit_json(
            args,
            {
                "ok": ok,
                "residuals": {k: v for k, (v, _) in results.items()},
                "tolerances": {k: t for k, (_, t) in results.items()},
                "connection": list(theta),
            },
        )
    else:
        lines = [
            f"{'PASS' if v <= t else 'FAIL'}  {name}: {v:.3e} (tol {t:.1e})"
            for name, (v, t) in results.items()
        ]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_bands(args) -> int:
    model = _load(args)
    _require_valid(model)
    tols = _parse_tols(args.tol)
    if not args.grid:
        raise CliError("bands needs --grid", EXIT_PARSE)
    grid = _parse_sizes(args.grid, "grid")
    if len(grid) != model.covering.rank:
        raise CliError(f"--grid must have {model.covering.rank} entries", EXIT_PARSE)
    theta = _connection_from_model(model, tols)
    band = bloch.spectrum_union(model.complex2, model.covering, theta, grid)
    if args.json:
        _emit_json(
            args,
            {
                "grid": list(band.grid),
                "intervals": [[lo, hi] for lo, hi in band.intervals],
                "num_bands": band.num_bands,
            },
        )
    else:
        _emit(args, bloch.band_csv(band))
    return EXIT_OK


def cmd_butterfly(args) -> int:
    model = _load(args)
    _require_valid(model)
    if not args.flux:
        raise CliError("butterfly needs --flux p/q[,p/q...]", EXIT_PARSE)
    if not args.grid:
        raise CliError("butterfly needs --grid", EXIT_PARSE)
    grid = _parse_sizes(args.grid, "grid")
    if len(grid) != model.covering.rank:
        raise CliError(f"--grid must have {model.covering.rank} entries", EXIT_PARSE)
    fluxes = _parse_fluxes(args.flux)
    rows = bloch.butterfly(model.complex2, model.covering, fluxes, grid)
    for row in rows:
        if row.error is not None:
            print(f"flux {row.p}/{row.q}: {row.error}", file=sys.stderr)
    if args.svg:
        Path(args.svg).write_text(bloch.butterfly_svg(rows))
    _emit(args, bloch.butterfly_csv(rows))
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "homology": cmd_homology,
    "quantizable": cmd_quantizable,
    "classes": cmd_classes,
    "fibers": cmd_fibers,
    "verify": cmd_verify,
    "bands": cmd_bands,
    "butterfly": cmd_butterfly,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magbloch",
        description="Magnetic flux quantization and finite Bloch decomposition "
        "on periodic weighted graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--model", required=True, help="path to a JSON model file")
        p.add_argument("--grid", help="momentum grid sizes N[,N...]")
        p.add_argument("--supercell", help="supercell sizes N[,N...]")
        p.add_argument("--flux", help="rational fluxes p/q[,p/q...]")
        p.add_argument("--k", help="explicit momenta k1,k2;k1,k2;...")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--out", help="write the primary output to a file")
        p.add_argument("--svg", help="also write an SVG scatter (butterfly only)")
        p.add_argument(
            "--tol",
            action="append",
            metavar="NAME=VALUE",
            help="override a tolerance; repeatable",
        )
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (bundle.NotQuantizableError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_QUANTIZABLE
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
