"""Command-line entry point: spectrum scans, crossing searches, exact states, verification.

Exit codes: 0 success, 2 partial (some grid points failed or did not
converge), 3 verification failure, 4 configuration or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import serialize
from .fock import find_crossings, scan_spectrum
from .judd import GaussPoly, JuddAnsatz, JuddState, build_judd_states, closing_degree, find_judd_roots
from .model import SECTOR_ORDER, ModelParams, Parity
from .states import DExpansion, NullSpaceError, TranscendentalState, build_state, find_kappa_roots, null_vector, null_vector_extended, reduce_to_AdB
from .verify import verify_state

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_VERIFY = 3
EXIT_CONFIG = 4

log = logging.getLogger("twophoton")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="twophoton", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def grid_flags(q):
        q.add_argument("--mu", type=float, required=True)
        q.add_argument("--kappa-min", type=float, default=0.02)
        q.add_argument("--kappa-max", type=float, default=0.65)
        q.add_argument("--kappa-points", type=_positive(int), default=400)
        q.add_argument("--levels", type=_positive(int), default=12)
        q.add_argument("--truncation", type=_positive(int), default=240)

    def out_flags(q, default_format):
        q.add_argument("--out", default="-")
        q.add_argument("--format", choices=("csv", "json"), default=default_format)

    q = sub.add_parser("spectrum", help="lowest levels of every parity sector over a kappa grid")
    grid_flags(q)
    out_flags(q, "csv")

    q = sub.add_parser("crossings", help="level crossings between sectors, classified on the m/4 lattice")
    grid_flags(q)
    q.add_argument("--tol", type=_positive(float), default=1e-10, help="kappa refinement tolerance")
    out_flags(q, "json")

    q = sub.add_parser("exact-state", help="construct and verify the exact degenerate states")
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--family", choices=("transcendental", "judd"), default="transcendental")
    q.add_argument("--ell", type=int)
    q.add_argument("--n", type=int)
    q.add_argument("--tol", type=_positive(float), default=1e-8, help="residual tolerance")
    q.add_argument("--truncation", type=_positive(int), default=240)
    q.add_argument("--precision", choices=("double", "extended"), default="double")
    out_flags(q, "json")

    q = sub.add_parser("verify", help="re-run the verification chain on exact-state output")
    q.add_argument("input")
    q.add_argument("--tol", type=_positive(float), default=1e-8, help="residual tolerance")
    q.add_argument("--truncation", type=_positive(int), default=240)
    q.add_argument("--out", default="-")
    return p


def _grid(args):
    lo, hi, n = args.kappa_min, args.kappa_max, args.kappa_points
    if not (0 < lo < 1 and 0 < hi < 1):
        raise ConfigError("kappa grid must lie inside (0, 1)")
    if n > 1 and not lo < hi:
        raise ConfigError("--kappa-min must be below --kappa-max")
    return np.array([lo]) if n == 1 else np.linspace(lo, hi, n)


def _grid_config(args):
    return {
        "mu": args.mu,
        "kappa_min": args.kappa_min,
        "kappa_max": args.kappa_max,
        "kappa_points": args.kappa_points,
        "levels": args.levels,
        "truncation": args.truncation,
    }


def _emit(text: str, path: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_spectrum(args) -> int:
    cfg = _grid_config(args)
    cfg["format"] = args.format
    t = scan_spectrum(args.mu, _grid(args), k=args.levels, N=args.truncation)
    rows = []
    for i, kappa in enumerate(t.grid):
        for s in SECTOR_ORDER:
            chi = t.chi(s)[i]
            for j in range(t.k):
                rows.append((float(kappa), s.label, j, float(t.energies[s][i, j]), float(chi[j]), t.status[i]))
    columns = ["kappa", "sector", "level_index", "E", "chi", "status"]
    if args.format == "csv":
        meta = {"schema_version": serialize.SCHEMA_VERSION, "command": "spectrum", "config_hash": serialize.config_hash(cfg)}
        text = serialize.write_csv(meta, columns, rows)
    else:
        text = serialize.dumps(serialize.envelope("spectrum", cfg, {"columns": columns, "rows": [list(r) for r in rows]}))
    _emit(text, args.out)
    failed = sum(st != "ok" for st in t.status)
    if failed == len(t.status):
        log.error("every grid point failed")
    return EXIT_PARTIAL if failed else EXIT_OK


def crossing_dict(r) -> dict:
    return {
        "kappa_star": r.kappa_star,
        "E_star": r.E_star,
        "chi_star": r.chi_star,
        "parity_pair": [p.label for p in r.parity_pair],
        "family": r.family.value,
        "index": r.index,
        "levels": list(r.levels),
        "touching": r.touching,
        "refinement_tol": r.refinement_tol,
    }


def cmd_crossings(args) -> int:
    cfg = _grid_config(args)
    cfg.update(tol=args.tol, format=args.format)
    t = scan_spectrum(args.mu, _grid(args), k=args.levels, N=args.truncation)
    recs = sorted(find_crossings(t, refine_tol=args.tol), key=lambda r: (r.kappa_star, r.E_star))
    records = [crossing_dict(r) for r in recs]
    if args.format == "json":
        text = serialize.dumps(serialize.envelope("crossings", cfg, {"records": records}))
    else:
        meta = {"schema_version": serialize.SCHEMA_VERSION, "command": "crossings", "config_hash": serialize.config_hash(cfg)}
        cols = ["kappa_star", "E_star", "chi_star", "parity_a", "parity_b", "family", "index", "touching", "refinement_tol"]
        rows = [
            (d["kappa_star"], d["E_star"], d["chi_star"], *d["parity_pair"], d["family"], d["index"], d["touching"], d["refinement_tol"])
            for d in records
        ]
        text = serialize.write_csv(meta, cols, rows)
    _emit(text, args.out)
    return EXIT_PARTIAL if any(st != "ok" for st in t.status) else EXIT_OK


def _summary_dict(v) -> dict:
    return {
        "passed": v.passed,
        "failures": v.failures,
        "fourth_order_residual": v.fourth_order,
        "system_residual": v.system,
        "parity": v.parity,
        "parity_deviation": v.parity_deviation,
        "norm": v.norm_verdict,
        "type_estimate": v.type_estimate,
        "degeneracy": v.degeneracy,
    }


def _expansion_dict(e: DExpansion) -> dict:
    return {"l_start": e.l_start, "branch": e.branch, "coefficients": [float(c) for c in e.coefficients]}


def _gausspoly_dict(g: GaussPoly) -> list:
    return [{"a": float(a), "coefficients": [serialize.complex_pair(c) for c in p]} for a, p in g.terms]


def _transcendental(args):
    ell = args.ell
    roots = find_kappa_roots(ell, args.mu)
    out = []
    ok = True
    for r in roots:
        m = ModelParams(r.kappa, args.mu)
        nv = null_vector(ell, m)
        if args.precision == "extended" and not nv.extended:
            nv = null_vector_extended(ell, m)
        states = []
        for branch in (1, -1):
            st = build_state(ell, m, branch, nv)
            v = verify_state(st, residual_tol=args.tol, N=args.truncation)
            ok &= v.passed
            rep = reduce_to_AdB(st.psi1, r.kappa, ell)
            states.append({
                "branch": branch,
                "parity": v.parity,
                "psi1": _expansion_dict(st.psi1),
                "psi2": _expansion_dict(st.psi2),
                "adb": {"A": list(rep.A), "B": list(rep.B), "d_branch": rep.d_branch, "flags": rep.flags},
                "verification": _summary_dict(v),
            })
        out.append({
            "kappa": r.kappa,
            "root_order": r.order,
            "at_edge": r.at_edge,
            "chi": (2 * ell + 3) / 4,
            "E": st.energy,
            "null_vector": list(nv.coefficients),
            "null_residual": nv.residual,
            "states": states,
        })
    return out, ok


def _judd(args):
    n = args.n
    closing_degree(n)
    out = []
    ok = True
    for r in find_judd_roots(n, args.mu):
        m = ModelParams(r.kappa, args.mu)
        states = []
        for st in build_judd_states(n, m):
            v = verify_state(st, residual_tol=args.tol, N=args.truncation, expected_parity=st.parity)
            ok &= v.passed
            states.append({
                "parity": st.parity.label,
                "psi1": _gausspoly_dict(st.psi1),
                "psi2": _gausspoly_dict(st.psi2),
                "verification": _summary_dict(v),
            })
        out.append({
            "kappa": r.kappa,
            "root_order": r.order,
            "at_edge": r.at_edge,
            "chi": n / 2,
            "E": st.energy,
            "polynomial": list(st.ansatz.P),
            "gaussian_exponent": st.ansatz.a,
            "states": states,
        })
    return out, ok


def cmd_exact_state(args) -> int:
    if args.family == "transcendental":
        if args.ell is None or args.ell < 1:
            raise ConfigError("--ell >= 1 is required for the transcendental family")
    elif args.n is None or args.n < 2:
        raise ConfigError("--n >= 2 is required for --family judd")
    if not args.mu > 0:
        raise ConfigError("--mu must be positive")
    cfg = {"mu": args.mu, "family": args.family, "ell": args.ell, "n": args.n, "tol": args.tol,
           "truncation": args.truncation, "precision": args.precision}
    try:
        roots, ok = _transcendental(args) if args.family == "transcendental" else _judd(args)
    except NullSpaceError as exc:
        log.error("%s", exc)
        return EXIT_VERIFY
    payload = {"roots": roots}
    if not roots:
        payload["note"] = "no root of the degeneracy condition in (0, 1)"
    _emit(serialize.dumps(serialize.envelope("exact-state", cfg, payload)), args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def _field(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    return d[key]


def states_from_document(doc: dict):
    """Rebuild (label, state, expected parity) from exact-state output, without recomputing coefficients."""
    cfg = _field(doc, "config", "document")
    mu = float(_field(cfg, "mu", "config"))
    family = _field(cfg, "family", "config")
    out = []
    for i, root in enumerate(_field(doc, "roots", "document")):
        where = f"roots[{i}]"
        kappa = float(_field(root, "kappa", where))
        m = ModelParams(kappa, mu)
        scale = math.sqrt(2 * kappa)
        for j, s in enumerate(_field(root, "states", where)):
            w = f"{where}.states[{j}]"
            parity = Parity.from_label(_field(s, "parity", w))
            try:
                if family == "transcendental":
                    ell = int(_field(cfg, "ell", "config"))
                    comps = []
                    for tag in ("psi1", "psi2"):
                        e = _field(s, tag, w)
                        comps.append(DExpansion(int(_field(e, "l_start", f"{w}.{tag}")),
                                                np.array([float(c) for c in _field(e, "coefficients", f"{w}.{tag}")]),
                                                int(_field(e, "branch", f"{w}.{tag}")), scale, tag))
                    st = TranscendentalState(ell, m, comps[0], comps[1])
                else:
                    n = int(_field(cfg, "n", "config"))
                    comps = []
                    for tag in ("psi1", "psi2"):
                        terms = [(float(_field(t, "a", f"{w}.{tag}")), [serialize.from_pair(c) for c in _field(t, "coefficients", f"{w}.{tag}")])
                                 for t in _field(s, tag, w)]
                        comps.append(GaussPoly(terms))
                    st = JuddState(n, m, JuddAnsatz(n, -kappa / 2, ()), parity, comps[0], comps[1])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{w}: {exc}") from exc
            out.append((w, st, parity))
    return out


def cmd_verify(args) -> int:
    try:
        with open(args.input) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    entries = states_from_document(doc)
    report = []
    ok = True
    for where, st, parity in entries:
        v = verify_state(st, residual_tol=args.tol, N=args.truncation, expected_parity=parity)
        ok &= v.passed
        d = _summary_dict(v)
        d["state"] = where
        d["margins"] = {
            "fourth_order": args.tol / max(v.fourth_order, 1e-300),
            "system": args.tol / max(v.system, 1e-300),
            "parity": 1e-9 / max(v.parity_deviation, 1e-300),
        }
        report.append(d)
    cfg = {"input_hash": serialize.config_hash({"text": text}), "tol": args.tol, "truncation": args.truncation}
    _emit(serialize.dumps(serialize.envelope("verify", cfg, {"passed": ok, "states": report})), args.out)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"spectrum": cmd_spectrum, "crossings": cmd_crossings, "exact-state": cmd_exact_state, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        sys.stderr.write(f"twophoton: error: {exc}\n")
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"twophoton: error: {exc}\n")
        return EXIT_CONFIG
    except ValueError as exc:
        sys.stderr.write(f"twophoton: error: {exc}\n")
        return EXIT_CONFIG
