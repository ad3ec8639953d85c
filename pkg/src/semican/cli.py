"""Command-line entry points: orbit tables, separation reports, and the
end-to-end verify pipeline.

Exit codes: 0 all checks pass, 2 a check failed, 1 usage or input error.
All exact values are emitted as rational strings; reports are JSON with a
schema_version field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import ratlin
from .bases import (ConjectureViolation, cc_multiplicities, m_coefficients,
                    monomial_matrix_E, monomial_matrix_Pi, pi_classes,
                    spanning_words)
from .core import (DimVector, Orbit, PiModClass, dual_orbit, enumerate_orbits,
                   orbit_dim, sign_parity)
from .geom import PairPoint, conormal_dimension, hessian_rank_check, \
    w_regularity_sample
from .separation import (NormalFormY, SeparationError, back_substitute,
                         build_and_separate, enumerate_instances,
                         enumerate_matchings, flag_shape, validate_matching)

SCHEMA_VERSION = 1


def _fr(x) -> str:
    return str(Fraction(x))


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# monomial matrix cache

def _cache_dir() -> Path:
    env = os.environ.get("SEMICAN_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "semican"


def _cache_key(dim: DimVector, words) -> str:
    payload = f"{dim.d1},{dim.d2}|" + ";".join(str(w) for w in words)
    return hashlib.sha256(payload.encode()).hexdigest()


def monomial_matrices(dim: DimVector, words, use_cache: bool = True):
    """E-side and pair-side monomial value matrices, disk-cached by content."""
    path = _cache_dir() / f"{_cache_key(dim, words)}.json"
    if use_cache and path.exists():
        data = json.loads(path.read_text())
        mat_e = [[Fraction(v) for v in row] for row in data["mat_e"]]
        mat_pi = [[Fraction(v) for v in row] for row in data["mat_pi"]]
        return mat_e, mat_pi
    mat_e = monomial_matrix_E(dim, words)
    mat_pi = monomial_matrix_Pi(dim, words)
    if use_cache:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "dim": [dim.d1, dim.d2],
            "words": [str(w) for w in words],
            "mat_e": [[_fr(v) for v in row] for row in mat_e],
            "mat_pi": [[_fr(v) for v in row] for row in mat_pi],
        }
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload))
        tmp.replace(path)
    return mat_e, mat_pi


# ---------------------------------------------------------------------------
# verify pipeline

def _section_check(dim, mat_e, mat_pi) -> bool:
    classes = pi_classes(dim)
    section_cols = {r: classes.index(PiModClass(dim, r, 0))
                    for r in range(dim.rank_bound + 1)}
    system = ratlin.transpose(mat_e)
    for i in range(len(mat_e)):
        coeffs = ratlin.solve_pivoted(system, [row[i] for row in system])
        for r, col in section_cols.items():
            lifted = sum(
                (c * mat_pi[w][col] for w, c in enumerate(coeffs)), Fraction(0)
            )
            if lifted != mat_e[i][r]:
                return False
    return True


def _kernel_check(dim, mat_e, mat_pi, seed: int, n_vectors: int = 100) -> bool:
    basis = ratlin.kernel_basis(ratlin.transpose(mat_e))
    if not basis:
        return True
    rng = random.Random(seed)
    n_classes = len(mat_pi[0]) if mat_pi else 0
    for _ in range(n_vectors):
        combo = [rng.randint(-9, 9) for _ in basis]
        vec = [
            sum((c * b[w] for c, b in zip(combo, basis)), Fraction(0))
            for w in range(len(mat_e))
        ]
        for j in range(n_classes):
            if sum((vec[w] * mat_pi[w][j] for w in range(len(vec))),
                   Fraction(0)) != 0:
                return False
    return True


def run_verify(d1: int, d2: int, seed: int = 1, skip_wreg: bool = False,
               sep_samples: int = 500, use_cache: bool = True,
               exhaustive_sep_bound: int = 3) -> dict:
    """Run every check for one dimension vector and assemble the report."""
    dim = DimVector(d1, d2)
    timings: dict[str, float] = {}
    failed: list[str] = []

    def stage(name):
        timings[name] = time.perf_counter()

    def done(name):
        timings[name] = round((time.perf_counter() - timings[name]) * 1000.0, 3)

    stage("monomial_matrices")
    words = spanning_words(dim)
    mat_e, mat_pi = monomial_matrices(dim, words, use_cache)
    done("monomial_matrices")

    stage("m_n_matrices")
    m = m_coefficients(dim, words, mats=(mat_e, mat_pi))
    m_ok = m.is_unitriangular() and m.is_integral()
    if not m_ok:
        failed.append("m_structure")
    try:
        n = cc_multiplicities(dim, words, mats=(mat_e, mat_pi))
        n_entries = n.entries
    except ConjectureViolation as exc:
        failed.append(f"n_structure ({exc})")
        dims = [orbit_dim(Orbit(dim, r)) for r in range(dim.rank_bound + 1)]
        n_entries = tuple(
            tuple(m.entry(rp, r) * (1 if (dims[rp] - dims[r]) % 2 == 0 else -1)
                  for r in range(dim.rank_bound + 1))
            for rp in range(dim.rank_bound + 1)
        )
    done("m_n_matrices")

    stage("section_kernel")
    section_ok = _section_check(dim, mat_e, mat_pi)
    if not section_ok:
        failed.append("section_identity")
    kernel_ok = _kernel_check(dim, mat_e, mat_pi, seed)
    if not kernel_ok:
        failed.append("kernel_invariance")
    done("section_kernel")

    stage("parity")
    parity_ok = all(sign_parity(o) % 2 == 0 for o in enumerate_orbits(dim))
    if not parity_ok:
        failed.append("sign_parity")
    done("parity")

    stage("separation")
    instances = list(enumerate_instances(dim))
    sampled = max(d1, d2) > exhaustive_sep_bound
    if sampled:
        rng = random.Random(seed)
        instances = rng.sample(instances, min(sep_samples, len(instances)))
    sep_bilinear = sep_chi = sep_subst = sep_critical = True
    for a, y0 in instances:
        try:
            rep = build_and_separate(a, y0)
        except SeparationError:
            sep_bilinear = False
            continue
        sep_chi = sep_chi and rep.chi_phi == 1
        sep_critical = sep_critical and rep.critical_ok
        if back_substitute(a, y0, rep.separated) != rep.trace:
            sep_subst = False
    separation = {
        "instances": len(instances),
        "sampled": sampled,
        "bilinear_ok": sep_bilinear,
        "chi_all_one": sep_chi,
        "substitution_ok": sep_subst,
        "critical_ok": sep_critical,
    }
    for key in ("bilinear_ok", "chi_all_one", "substitution_ok", "critical_ok"):
        if not separation[key]:
            failed.append(f"separation_{key}")
    done("separation")

    stage("appendix_b")
    hessian_ok = conormal_ok = True
    for r in range(dim.rank_bound + 1):
        p = PairPoint.from_class(PiModClass(dim, r, dim.rank_bound - r))
        if not hessian_rank_check(p):
            hessian_ok = False
        if conormal_dimension(p) != d1 * d2:
            conormal_ok = False
    if not hessian_ok:
        failed.append("hessian_rank")
    if not conormal_ok:
        failed.append("conormal_dimension")
    done("appendix_b")

    wreg_status = "SKIPPED"
    wreg_reports = []
    if not skip_wreg:
        stage("wreg")
        wreg_pass = True
        for ri in range(dim.rank_bound + 1):
            for rj in range(ri + 1, dim.rank_bound + 1):
                rep = w_regularity_sample(
                    Orbit(dim, ri), Orbit(dim, rj), n_samples=6, seed=seed
                )
                wreg_reports.append(rep.to_dict())
                wreg_pass = wreg_pass and rep.passed
        wreg_status = "PASS" if wreg_pass else "FAIL"
        if not wreg_pass:
            failed.append("w_regularity")
        done("wreg")

    report = {
        "schema_version": SCHEMA_VERSION,
        "dim": [d1, d2],
        "seed": seed,
        "m_matrix": [[_fr(v) for v in row] for row in m.entries],
        "n_matrix": [[_fr(v) for v in row] for row in n_entries],
        "section_ok": section_ok,
        "kernel_ok": kernel_ok,
        "parity_ok": parity_ok,
        "separation": separation,
        "geometry": {
            "hessian_ok": hessian_ok,
            "conormal_ok": conormal_ok,
            "wreg": wreg_status,
            "wreg_reports": wreg_reports,
        },
        "timings": timings,
        "failed_checks": failed,
        "verdict": "PASS" if not failed else "FAIL",
    }
    return report


# ---------------------------------------------------------------------------
# subcommands

def _orbit_rows(dim: DimVector):
    rows = []
    for o in enumerate_orbits(dim):
        rows.append({
            "r": o.r,
            "orbit_dim": orbit_dim(o),
            "dual_rank": dual_orbit(o).r,
            "parity_defect": sign_parity(o),
        })
    return rows


def cmd_orbits(args) -> int:
    dim = DimVector(args.d1, args.d2)
    if dim.total < 1:
        print("error: d1 + d2 must be at least 1", file=sys.stderr)
        return 1
    rows = _orbit_rows(dim)
    if args.format == "json":
        print(json.dumps({"schema_version": SCHEMA_VERSION,
                          "dim": [dim.d1, dim.d2], "orbits": rows}, indent=2))
    elif args.format == "csv":
        cols = ["r", "orbit_dim", "dual_rank", "parity_defect"]
        print(",".join(cols))
        for row in rows:
            print(",".join(str(row[c]) for c in cols))
    else:
        print(f"orbits for dim ({dim.d1}, {dim.d2})")
        print(f"{'r':>3} {'dim':>5} {'dual':>5} {'parity':>7}")
        for row in rows:
            print(f"{row['r']:>3} {row['orbit_dim']:>5} "
                  f"{row['dual_rank']:>5} {row['parity_defect']:>7}")
    return 0


def cmd_verify(args) -> int:
    dim_bound = args.max_dim
    if args.d1 > dim_bound or args.d2 > dim_bound:
        print(f"error: dimensions above {dim_bound} need --max-dim",
              file=sys.stderr)
        return 1
    if args.d1 + args.d2 < 1:
        print("error: d1 + d2 must be at least 1", file=sys.stderr)
        return 1
    report = run_verify(
        args.d1, args.d2, seed=args.seed, skip_wreg=args.skip_wreg,
        sep_samples=args.sep_samples, use_cache=not args.no_cache,
    )
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if report["failed_checks"]:
        print(f"FAILED: {report['failed_checks'][0]}", file=sys.stderr)
        return 2
    return 0


def _parse_y0(spec: str) -> NormalFormY:
    spec = spec.strip()
    if not spec:
        return NormalFormY.of()
    positions = []
    for chunk in spec.split(","):
        i, _, j = chunk.partition(":")
        positions.append((int(i), int(j)))
    return NormalFormY.of(*positions)


def cmd_separate(args) -> int:
    try:
        comp = tuple(int(v) for v in args.comp.split(","))
    except ValueError:
        print(f"error: bad composition {args.comp!r}", file=sys.stderr)
        return 1
    d1 = sum(1 for v in comp if v == 1)
    d2 = sum(1 for v in comp if v == 2)
    if (d1, d2) != (args.d1, args.d2) or len(comp) != d1 + d2:
        print(f"error: composition {args.comp} has content ({d1}, {d2}), "
              f"expected ({args.d1}, {args.d2})", file=sys.stderr)
        return 1
    shape = flag_shape(comp)
    if args.all:
        reports = [build_and_separate(comp, y0).to_dict()
                   for y0 in enumerate_matchings(shape)]
        print(json.dumps({"schema_version": SCHEMA_VERSION,
                          "reports": reports}, indent=2))
        return 0
    try:
        y0 = _parse_y0(args.y0)
        validate_matching(shape, y0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = build_and_separate(comp, y0)
    out = report.to_dict()
    out["schema_version"] = SCHEMA_VERSION
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semican",
                     description="Exact checks of the canonical vs "
                                 "semicanonical multiplicity identity "
                                 "for the two-vertex quiver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbits", parents=[], help="list orbits with invariants")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.add_argument("--format", choices=("table", "json", "csv"),
                   default="table")
    p.set_defaults(func=cmd_orbits)

    p = sub.add_parser("verify", help="run the full verification pipeline")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--skip-wreg", action="store_true",
                   help="skip the floating-point stratification probe")
    p.add_argument("--sep-samples", type=int, default=500,
                   help="instance sample size above the exhaustive bound")
    p.add_argument("--max-dim", type=int, default=4,
                   help="largest vertex dimension accepted")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--out", help="write the JSON report to a file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("separate", help="separation report for one chart")
    p.add_argument("--d1", type=int, required=True)
    p.add_argument("--d2", type=int, required=True)
    p.add_argument("--comp", required=True,
                   help="comma-separated vertex letters, e.g. 1,2,2,1")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--y0", help="matching as i:j pairs, e.g. 1:1,2:3; "
                                    "empty string for the empty matching")
    group.add_argument("--all", action="store_true",
                       help="one report per admissible matching")
    p.set_defaults(func=cmd_separate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValueError, SeparationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
