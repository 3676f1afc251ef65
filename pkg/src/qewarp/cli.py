"""Command-line front end: generate, verify, sweep, oracle.

Exit codes: 0 pass, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from .errors import InadmissibleParametersError, InvalidRequestError, QewarpError, SpecError
from .oracle import run_oracle
from .specio import load_spec, spec_from_dict
from .verifier import TOLERANCE_PROFILES, dumps, verify

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PROFILE_ENV = "QEWARP_DEFAULT_PROFILE"
GRID_AXES = ("n", "m", "k", "r", "branch")
SWEEP_COLUMNS = ("n", "m", "k", "r", "branch", "admissible", "max_residual", "mu_mean", "verdict")
DEFAULT_SWEEP_BASE = {
    "n": 3, "m": 1, "r": 2, "rho": 0, "lambda_F": 0,
    "eps": [1, 1, 1], "alpha": [1, 0, 0],
    "family": {"type": "theorem4", "k": 1, "branch": "plus"},
}


class UsageError(Exception):
    pass


def write_atomic(path: Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise UsageError(f"output directory does not exist: {directory}")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _read_spec(path: Optional[str]):
    if path is None:
        raise UsageError("--spec is required")
    if not Path(path).is_file():
        raise UsageError(f"spec file not found: {path}")
    return load_spec(path)


def _profile(args) -> str:
    profile = args.profile or os.environ.get(PROFILE_ENV) or "analytic"
    if profile not in TOLERANCE_PROFILES:
        raise UsageError(f"unknown tolerance profile {profile!r} (choose from {', '.join(TOLERANCE_PROFILES)})")
    return profile


def _fmt(v) -> str:
    return repr(float(v))


def _json_safe(value):
    """Infinite domain bounds become null so the sidecar stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


# --- generate ---------------------------------------------------------------------


def cmd_generate(args) -> int:
    resolved = _read_spec(args.spec)
    spec = resolved.spec
    xis = spec.sample_xis(args.samples)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi", "f", "fp", "fpp", "phi", "php", "phpp", "h", "hp", "hpp"])
    vals = [p.eval(xis) for p in (spec.f, spec.phi, spec.h)]
    for i, xi in enumerate(xis):
        w.writerow([_fmt(xi)] + [_fmt(col[i]) for triple in vals for col in triple])
    sidecar = {"family": resolved.family_type, "constants": _json_safe(resolved.constants),
               "window": list(spec.sampling_window()), "samples": int(len(xis))}
    out = Path(args.out) if args.out else Path(f"{resolved.family_type}.csv")
    write_atomic(out, buf.getvalue())
    write_atomic(_sibling(out, ".sidecar.json"), dumps(sidecar))
    print(f"wrote {out} and {_sibling(out, '.sidecar.json')}")
    return EXIT_PASS


# --- verify -----------------------------------------------------------------------


def cmd_verify(args) -> int:
    resolved = _read_spec(args.spec)
    report = verify(resolved.spec, samples=args.samples, profile=_profile(args))
    report.extra["family"] = resolved.family_type
    sys.stdout.write(report.to_text())
    if args.out:
        out = Path(args.out)
        write_atomic(out, report.to_json())
        write_atomic(_sibling(out, ".txt"), report.to_text())
        write_atomic(_sibling(out, ".mu.csv"), report.mu_csv())
    return EXIT_PASS if report.verdict else EXIT_FAIL


# --- sweep ------------------------------------------------------------------------


def parse_grid(items: Sequence[str]) -> dict:
    grid: dict = {}
    for item in items or []:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or key not in GRID_AXES:
            raise UsageError(f"bad --grid entry {item!r}; expected KEY=v1,v2 with KEY in {', '.join(GRID_AXES)}")
        raw = [v.strip() for v in values.split(",") if v.strip()]
        if not raw:
            raise InvalidRequestError(f"grid axis {key!r} has no values")
        if key == "branch":
            parsed = raw
        elif key in ("n", "m"):
            parsed = [int(v) for v in raw]
        else:
            parsed = [float(v) for v in raw]
        grid[key] = parsed
    if not grid:
        raise InvalidRequestError("empty grid: give at least one --grid KEY=v1,v2")
    return grid


def _resize(values: list, n: int, fill) -> list:
    return list(values[:n]) + [fill] * max(0, n - len(values))


def sweep_rows(base: dict, grid: dict, samples: int, profile: str) -> list:
    """One row per grid cell, in lexicographic order of the declared axes."""
    axes = [a for a in GRID_AXES if a in grid]
    fam_base = dict(base.get("family", {}))
    rows = []
    for combo in itertools.product(*(grid[a] for a in axes)):
        cell = dict(zip(axes, combo))
        n = int(cell.get("n", base["n"]))
        m = int(cell.get("m", base["m"]))
        k = float(cell.get("k", fam_base.get("k", 1.0)))
        r = float(cell.get("r", base["r"]))
        branch = "-" if r == 1 else str(cell.get("branch", fam_base.get("branch", "plus")))
        family = {key: v for key, v in fam_base.items() if key in ("c", "c1", "c2", "c3")}
        family.update({"type": "theorem5" if r == 1 else "theorem4", "k": k})
        if r != 1:
            family["branch"] = branch
        doc = {
            "n": n, "m": m, "r": r, "rho": base.get("rho", 0.0), "lambda_F": base.get("lambda_F", 0.0),
            "eps": _resize(base["eps"], n, 1), "alpha": _resize(base["alpha"], n, 0.0), "family": family,
        }
        row = {"n": n, "m": m, "k": k, "r": r, "branch": branch}
        try:
            spec = spec_from_dict(doc).spec
        except InadmissibleParametersError:
            row.update(admissible=False, max_residual="", mu_mean="", verdict="inadmissible")
            rows.append(row)
            continue
        report = verify(spec, samples=samples, profile=profile)
        worst = max(s.max_scaled for s in report.sections.values())
        row.update(admissible=True, max_residual=worst, mu_mean=report.mu_mean,
                   verdict="pass" if report.verdict else "fail")
        rows.append(row)
    return rows


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([
            _fmt(row[c]) if isinstance(row[c], float) and c in ("k", "r", "max_residual", "mu_mean")
            else str(row[c]).lower() if isinstance(row[c], bool) else row[c]
            for c in SWEEP_COLUMNS
        ])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    grid = parse_grid(args.grid)
    if args.spec:
        if not Path(args.spec).is_file():
            raise UsageError(f"spec file not found: {args.spec}")
        base = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    else:
        base = DEFAULT_SWEEP_BASE
    rows = sweep_rows(base, grid, args.samples, _profile(args))
    text = rows_to_csv(rows)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if r["verdict"] == "fail"]
    print(f"{len(rows)} cells, {sum(r['admissible'] for r in rows)} admissible, {len(bad)} failing",
          file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_PASS


# --- oracle -----------------------------------------------------------------------


def cmd_oracle(args) -> int:
    report = run_oracle(args.seed, count=args.count, flat_phi=args.flat_phi)
    text = dumps(report)
    if args.out:
        write_atomic(Path(args.out), text)
    print(f"oracle seed={args.seed} count={args.count} max_deviation={report['max_deviation']:.3e} "
          f"-> {report['verdict']}")
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


# --- entry point ------------------------------------------------------------------


def _samples(text: str) -> int:
    v = int(text)
    if v < 3:
        raise argparse.ArgumentTypeError("samples must be at least 3")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qewarp", description="Quasi-Einstein warped-product verifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec_required=False):
        p.add_argument("--spec", required=spec_required, help="WarpedSpec/family JSON")
        p.add_argument("--out", help="output path")
        p.add_argument("--samples", type=_samples, default=101, help="sample count (>= 3)")
        p.add_argument("--profile", choices=sorted(TOLERANCE_PROFILES),
                       help=f"tolerance profile (default from ${PROFILE_ENV}, else analytic)")
        p.add_argument("--seed", type=int, default=0)
        return p

    common(sub.add_parser("generate", help="tabulate a family to CSV with a constants sidecar"), True)
    common(sub.add_parser("verify", help="residual report; exit 0 iff the spec passes"), True)
    sw = common(sub.add_parser("sweep", help="verify a grid of theorem4/theorem5 cells"))
    sw.add_argument("--grid", action="append", default=[], metavar="KEY=v1,v2",
                    help=f"grid axis, repeatable; KEY in {', '.join(GRID_AXES)}")
    orc = common(sub.add_parser("oracle", help="finite-difference oracle on seeded random specs"))
    orc.add_argument("--count", type=int, default=20)
    orc.add_argument("--flat-phi", action="store_true", help="use phi = 1 in every random spec")
    return parser


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidRequestError, InadmissibleParametersError, SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QewarpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if args.command == "generate" else EXIT_FAIL
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
