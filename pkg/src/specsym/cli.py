"""Command-line front end.

Exit codes: 0 success, 1 verification failures (``verify``), 2 malformed
input, 3 precondition failure, 4 internal verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys

from . import __version__
from .cellspace import carve, from_masses, new_space
from .decompose import (
    Decomposition, VerificationError, stabilize_decompose, three_symmetric,
    verify_decomposition,
)
from .element import (
    PreconditionError, complement, dimension, identity, is_nonnegative, moment,
    projection, quasitrace, support,
)
from .folding import Superprojection, gamma_folding, local_folding, mediator, validate_folding
from .rational import Rat
from .serialize import (
    FORMAT, FormatError, dumps, element_from_atoms, fmt, parse, read_atoms,
    read_element, read_space, write_distribution, write_element, write_folding,
    write_space,
)
from .spectra import distribution, dist_moment, is_symmetric_distribution, quantile, quantile_moment

EXIT_OK, EXIT_FAILED, EXIT_MALFORMED, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3, 4


class Abort(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise Abort(EXIT_MALFORMED, f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise Abort(EXIT_MALFORMED, f"{path} is not valid JSON: {exc.msg}") from exc


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _atoms_element(path: str):
    try:
        atoms, stabilize = read_atoms(_load_json(path))
    except FormatError as exc:
        raise Abort(EXIT_MALFORMED, str(exc)) from exc
    return atoms, stabilize, element_from_atoms(atoms)


# -- decompose / verify ----------------------------------------------------------

def decomposition_document(atoms, stabilize, d: Decomposition, kmax: int) -> dict:
    names = ("X1", "X2", "X3")
    dists = [distribution(s) for s in d.summands]
    table = []
    for k in range(1, kmax + 1, 2):
        row = {"k": k}
        row.update({n: fmt(dist_moment(dd, k)) for n, dd in zip(names, dists)})
        table.append(row)
    total = d.summands[0] + d.summands[1] + d.summands[2]
    return {
        "format": FORMAT,
        "input": {"atoms": [{"value": fmt(v), "mass": fmt(m)} for v, m in atoms],
                  "stabilize": stabilize},
        "space": write_space(d.space),
        "x": write_element(d.x),
        "summands": [{"name": n, "cells": write_element(s),
                      "distribution": write_distribution(dd),
                      "symmetric": is_symmetric_distribution(dd)}
                     for n, s, dd in zip(names, d.summands, dists)],
        "odd_moments": table,
        "exact_sum": total == d.x,
        "report": list(verify_decomposition(d.x, d)),
    }


def cmd_decompose(args) -> int:
    atoms, stabilize, x = _atoms_element(args.input)
    stabilize = stabilize or args.stabilize
    if quasitrace(x) != 0:
        raise Abort(EXIT_PRECONDITION, f"trace of X is {fmt(quasitrace(x))}, not 0")
    if not stabilize and x.space.mass_of(x.coeffs) >= x.space.total_mass:
        raise Abort(EXIT_PRECONDITION, "X has full support; rerun with stabilize")
    try:
        d = stabilize_decompose(x) if stabilize else three_symmetric(x)
    except VerificationError as exc:
        raise Abort(EXIT_INTERNAL, f"internal verification failed: {exc}") from exc
    except PreconditionError as exc:
        raise Abort(EXIT_PRECONDITION, str(exc)) from exc
    doc = decomposition_document(atoms, stabilize, d, args.K)
    _emit(dumps(doc), args.output)
    return EXIT_INTERNAL if doc["report"] else EXIT_OK


def load_decomposition(doc) -> Decomposition:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise FormatError("not a decomposition file")
    try:
        space, ids = read_space(doc["space"])
        x = read_element(doc["x"], space, ids)
        parts = doc["summands"]
        if not isinstance(parts, list):
            raise FormatError("\"summands\" must be a list")
        summands = tuple(read_element(p["cells"], space, ids) for p in parts)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"missing or malformed field: {exc}") from exc
    if len(summands) != 3:
        raise FormatError("a decomposition has exactly three summands")
    return Decomposition(x, summands)


def cmd_verify(args) -> int:
    doc = _load_json(args.input)
    try:
        d = load_decomposition(doc)
    except FormatError as exc:
        raise Abort(EXIT_MALFORMED, str(exc)) from exc
    report = verify_decomposition(d.x, d)
    _emit(dumps({"ok": not report, "report": report}), args.output)
    return EXIT_FAILED if report else EXIT_OK


# -- moments ---------------------------------------------------------------------

def cmd_moments(args) -> int:
    if args.K < 1:
        raise Abort(EXIT_MALFORMED, "K must be at least 1")
    if args.mediator:
        a = mediator(identity(new_space()))
    elif args.input is None:
        raise Abort(EXIT_MALFORMED, "an input file is required unless --mediator is given")
    else:
        a = _atoms_element(args.input)[2]
    w = quantile(a)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["k", "moment", "quantile_moment"])
    for k in range(1, args.K + 1):
        out.writerow([k, fmt(moment(a, k)), fmt(quantile_moment(w, k))])
    _emit(buf.getvalue(), args.output)
    if args.quantile_csv:
        qbuf = io.StringIO()
        qout = csv.writer(qbuf, lineterminator="\n")
        qout.writerow(["t", "omega"])
        for t, v in w.breakpoints():
            qout.writerow([fmt(t), fmt(v)])
        _emit(qbuf.getvalue(), args.quantile_csv)
    verdict = "symmetric" if is_symmetric_distribution(distribution(a)) else "not symmetric"
    print(f"spectral distribution: {verdict}", file=sys.stderr)
    return EXIT_OK


# -- fold-local ------------------------------------------------------------------

def cmd_fold_local(args) -> int:
    doc = _load_json(args.input)
    try:
        atoms, _ = read_atoms(doc)
        beta = parse(doc.get("beta"), "beta")
    except FormatError as exc:
        raise Abort(EXIT_MALFORMED, str(exc)) from exc
    x = element_from_atoms(atoms)
    p = identity(x.space)
    try:
        if beta <= 0:
            raise PreconditionError("beta must be positive")
        if not is_nonnegative(x):
            raise PreconditionError("X must be positive")
        q_mass = quasitrace(x) / beta
        free = complement(support(x))
        if dimension(free) < q_mass:
            raise PreconditionError("not enough room for Q")
        space, ((qcells,),) = carve(x.space, [(sorted(free.coeffs), [q_mass])])
        q = projection(space, qcells)
        phi = local_folding(x, q, beta, p)
    except PreconditionError as exc:
        raise Abort(EXIT_PRECONDITION, str(exc)) from exc
    space = phi.space
    x, q = x.on(space), q.on(space)
    issues = validate_folding(phi)
    checks = {"A_sum_is_X": phi.x == x, "B_sum_is_beta_Q": phi.y == beta * q}
    doc = {"beta": fmt(beta), "space": write_space(space), "x": write_element(x),
           "q": write_element(q), "folding": write_folding(phi),
           "issues": [i.message for i in issues], "checks": checks}
    _emit(dumps(doc), args.output)
    return EXIT_OK if not issues and all(checks.values()) else EXIT_INTERNAL


# -- demo-gamma ------------------------------------------------------------------

def random_gamma_instance(rng: random.Random):
    """A random alpha|beta superprojection on a fresh unit space."""
    alpha = Rat(rng.randint(1, 9), rng.randint(1, 4))
    beta = Rat(rng.randint(1, 9), rng.randint(1, 4))
    d1 = Rat(rng.randint(1, 20), 100)
    d2 = alpha * d1 / beta
    scale = 2 * (d1 + d2)
    if scale >= 1:
        d1, d2 = d1 / (2 * scale), d2 / (2 * scale)
    space, ids = from_masses([d1, d2, d1, d2, 1 - 2 * d1 - 2 * d2])
    pi = Superprojection(*(projection(space, [c]) for c in ids[:4]))
    return pi, alpha, beta


def gamma_identities(pi, alpha, beta, kmax: int) -> bool:
    phi = gamma_folding(pi, alpha, beta)
    (a, b), (v, w) = phi.a, phi.b
    da, db = dimension(pi.p2), dimension(pi.p1)
    lam = da / alpha
    for k in range(1, kmax + 1):
        top = lam * (alpha + beta) ** (k + 1) / (k + 1)
        bottom = (-1) ** k * (alpha ** k * da + beta ** k * db) / (k + 1)
        if not (moment(a, k) == moment(v, k) == top
                and moment(b, k) == moment(w, k) == bottom):
            return False
    return not validate_folding(phi)


def cmd_demo_gamma(args) -> int:
    rng = random.Random(args.seed)
    rows = []
    for _ in range(args.count):
        pi, alpha, beta = random_gamma_instance(rng)
        rows.append({"alpha": fmt(alpha), "beta": fmt(beta),
                     "D_P1": fmt(dimension(pi.p1)), "D_P2": fmt(dimension(pi.p2)),
                     "ok": gamma_identities(pi, alpha, beta, args.K)})
    ok = all(r["ok"] for r in rows)
    _emit(dumps({"seed": args.seed, "K": args.K, "ok": ok, "instances": rows}), args.output)
    return EXIT_OK if ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsym",
        description="Exact decompositions of trace-zero spectra into symmetric parts.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="split X into three spectrally symmetric summands")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("-K", type=int, default=7, help="largest odd moment to tabulate")
    p.add_argument("--stabilize", action="store_true",
                   help="dilute the support first (needed for full support)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="re-check a decomposition file")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("moments", help="moment and quantile-moment table as CSV")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output")
    p.add_argument("-K", type=int, default=8)
    p.add_argument("--quantile-csv", help="also write quantile breakpoints here")
    p.add_argument("--mediator", action="store_true",
                   help="use the uniform [0, 1] element instead of an input file")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fold-local", help="fold a positive step element as beta*Q")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fold_local)

    p = sub.add_parser("demo-gamma", help="check the explicit 2-folding on random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("-K", type=int, default=12)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_demo_gamma)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(args)
    except Abort as exc:
        print(f"specsym: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
