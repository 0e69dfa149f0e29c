"""Command-line tables: moments, theorem bounds, verification runs, the gap design.

Tables go to stdout (or ``--out``) as CSV with a header row or as JSON
``{schema_version, command, config, rows}``; diagnostics go to stderr.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .ensembles import gap2_design_state, gap_purity_exact, gap_renyi_upper_bound, gap_spectrum
from .moments import (
    ChoiPartitionSpec,
    StatePartition,
    Theorem,
    catalan,
    design_renyi_lower_bound,
    haar_choi_moment,
    haar_state_moment,
    theorem_bound,
)
from .permgroup import verify_cycle_lemma
from .quantum import reduced_density, renyi_entropy
from .sampling import RandomStream, mc_choi_moment, mc_state_moment
from .weingarten import verify_wg_inverse

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    format: str = "csv"
    out: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        return cls(**json.loads(text))


def format_cell(value) -> str:
    """Canonical text form shared by the CSV and JSON writers."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_cell(value):
    if isinstance(value, Fraction):
        return format_cell(value)
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def render(config: RunConfig, rows: list[dict]) -> str:
    if config.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": config.command,
            "config": json.loads(config.to_json()),
            "rows": [{k: _json_cell(v) for k, v in row.items()} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    columns: list[str] = []
    for row in rows:
        columns += [k for k in row if k not in columns]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def parse_alpha(spec: str) -> list[int]:
    """``"3"``, ``"2-5"`` or ``"2,4,6"``."""
    out: list[int] = []
    for part in str(spec).split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = (int(x) for x in part.split("-", 1))
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise UsageError(f"invalid alpha specification {spec!r}")
    return out


def _need_seed(config: RunConfig):
    if config.seed is None:
        raise UsageError(f"{config.command}: --seed is required for Monte Carlo runs")


# ---------------------------------------------------------------- commands


def cmd_moment(config: RunConfig) -> list[dict]:
    p = config.params
    alphas = parse_alpha(p["alpha"])
    n = p.get("mc")
    if n:
        _need_seed(config)
    rows = []
    for alpha in alphas:
        if p.get("choi"):
            d_A, d_B, d_C, d_D = p["choi"]
            part = ChoiPartitionSpec(d_A, d_B, d_C, d_D)
            m = haar_choi_moment(part, alpha)
            row = {"kind": "choi", "d_A": d_A, "d_B": d_B, "d_C": d_C, "d_D": d_D}
        else:
            d_A, d_B = p["state"]
            part = StatePartition(d_A, d_B)
            m = haar_state_moment(part, alpha)
            row = {"kind": "state", "d_A": d_A, "d_B": d_B}
        row.update(
            alpha=alpha,
            exact=m.value,
            value=float(m.value),
            renyi_lower_bound_bits=design_renyi_lower_bound(m) if alpha >= 2 else None,
            max_bits=m.max_bits,
        )
        if n:
            rng = RandomStream(config.seed)
            est = (mc_choi_moment if p.get("choi") else mc_state_moment)(part, alpha, n, rng)
            row.update(mc_mean=est.mean, mc_stderr=est.std_error, z=est.z_score(float(m.value)))
        rows.append(row)
    return rows


def _jensen_for(theorem: Theorem, params: dict):
    alpha = params.get("alpha")
    if alpha is None or alpha < 2:
        return None
    try:
        if theorem in (Theorem.T1, Theorem.T2a, Theorem.T2b):
            d_A = params["d_A"]
            d_B = params.get("d_B") or d_A
            return design_renyi_lower_bound(haar_state_moment(StatePartition(d_A, d_B), alpha))
        if theorem in (Theorem.T4, Theorem.T5):
            d = params["d"]
            d_A = params.get("d_A") or math.isqrt(d)
            d_B = params.get("d_B") or d // d_A
            if d_A * d_B != d:
                return None
            return design_renyi_lower_bound(haar_choi_moment(ChoiPartitionSpec(d_A, d_B, d_A, d_B), alpha))
    except (ValueError, KeyError):
        return None
    return None


def cmd_bounds(config: RunConfig) -> list[dict]:
    p = config.params
    theorems = p.get("theorem") or ["all"]
    every = "all" in theorems
    if every:
        theorems = [t.value for t in Theorem]
    keys = ("d_A", "d_B", "d", "alpha", "a", "c")
    params = {k: p.get(k) for k in keys if p.get(k) is not None}
    if "d_A" in params:
        params.setdefault("d_B", params["d_A"])
    if "d" not in params and "d_A" in params:
        params["d"] = params["d_A"] * params.get("d_B", params["d_A"])
    rows = []
    for name in theorems:
        theorem = Theorem(name)
        try:
            res = theorem_bound(theorem, params)
        except ValueError as exc:
            if not every:
                raise
            # with "all", theorems whose parameters were not supplied are listed, not fatal
            rows.append({"theorem": theorem.value, "bound_bits": None, "valid": False, "constraint_report": str(exc)})
            continue
        rows.append(
            {
                "theorem": theorem.value,
                "bound_bits": res.bound_bits,
                "valid": res.valid,
                "asymptotic": res.asymptotic,
                "jensen_bits": _jensen_for(theorem, params),
                "constraint_report": res.constraint_report,
            }
        )
    return rows


def cmd_verify(config: RunConfig) -> list[dict]:
    _need_seed(config)
    p = config.params
    n = p.get("samples") or 100_000
    quick = p.get("quick", False)
    rows = []

    def mc_row(name, exact, est):
        z = est.z_score(float(exact))
        rows.append(
            {"name": name, "exact": exact, "mc_mean": est.mean, "stderr": est.std_error, "z": z, "pass": abs(z) <= 4}
        )

    for alpha in (2, 3):
        part = StatePartition(2, 2)
        exact = haar_state_moment(part, alpha).value
        mc_row(f"state(2,2) alpha={alpha}", exact, mc_state_moment(part, alpha, n, RandomStream(config.seed)))
    choi = ChoiPartitionSpec(2, 2, 2, 2)
    exact = haar_choi_moment(choi, 2).value
    mc_row("choi(2,2,2,2) alpha=2", exact, mc_choi_moment(choi, 2, n, RandomStream(config.seed)))

    for alpha in range(1, 7 if quick else 9):
        rep = verify_cycle_lemma(alpha)
        ok = rep.holds and rep.saturating_count == catalan(alpha)
        rows.append({"name": f"cycle lemma alpha={alpha}", "exact": rep.saturating_count, "pass": ok})

    pairs = [(4, 3)] if quick else [(d, a) for d in range(1, 7) for a in range(1, min(d, 5) + 1)]
    for d, alpha in pairs:
        rows.append({"name": f"Wg inverse d={d} alpha={alpha}", "exact": None, "pass": verify_wg_inverse(d, alpha)})

    closed_ok = all(
        haar_state_moment(StatePartition(a, b), 2).value == Fraction(a + b, a * b + 1)
        for a in range(1, 17)
        for b in range(1, 17)
    )
    rows.append({"name": "alpha=2 closed form d<=16", "exact": None, "pass": closed_ok})
    return rows


def cmd_gap_design(config: RunConfig) -> list[dict]:
    p = config.params
    alpha_max = p.get("alpha_max") or 4
    rows = []
    for d_A, d_B in p["dims"]:
        try:
            lam = gap_spectrum(d_A, d_B)
            purity = gap_purity_exact(d_A, d_B)
        except ValueError as exc:
            rows.append({"d_A": d_A, "d_B": d_B, "error": str(exc)})
            continue
        rho = reduced_density(gap2_design_state(d_A, d_B), [0])
        r = p.get("r") or max(1.0, d_B / d_A)
        max_bits = math.log2(d_A)
        for alpha in range(2, alpha_max + 1):
            s = renyi_entropy(rho, alpha)
            bound = gap_renyi_upper_bound(d_A, r, alpha) if alpha > 2 else None
            rows.append(
                {
                    "d_A": d_A,
                    "d_B": d_B,
                    "lambda_1": float(lam[0]),
                    "lambda_2": float(lam[1]) if d_A > 1 else None,
                    "purity_exact": purity,
                    "purity_target": Fraction(d_A + d_B, d_A * d_B + 1),
                    "alpha": alpha,
                    "renyi_bits": s,
                    "upper_bound_bits": bound,
                    "max_bits": max_bits,
                    "gap_bits": max_bits - s,
                    "bound_gap_bits": None if bound is None else max_bits - bound,
                }
            )
    return rows


COMMANDS = {
    "moment": cmd_moment,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "gap-design": cmd_gap_design,
}


# ---------------------------------------------------------------- argv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(sub):
    sub.add_argument("--seed", type=int, help="64-bit seed (required for Monte Carlo)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", help="write the table here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="renyidesign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = subs.add_parser("moment", help="exact Haar moments and Jensen bounds")
    g = m.add_mutually_exclusive_group(required=True)
    g.add_argument("--state", type=int, nargs=2, metavar=("D_A", "D_B"))
    g.add_argument("--choi", type=int, nargs=4, metavar=("D_A", "D_B", "D_C", "D_D"))
    m.add_argument("--alpha", required=True, help="order, range a-b, or list a,b,c")
    m.add_argument("--mc", type=int, help="also estimate by Monte Carlo with this many samples")
    _common(m)

    b = subs.add_parser("bounds", help="evaluate theorem lower bounds")
    b.add_argument("--theorem", nargs="+", choices=[t.value for t in Theorem] + ["all"])
    b.add_argument("--d-A", dest="d_A", type=int)
    b.add_argument("--d-B", dest="d_B", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--alpha", type=int)
    b.add_argument("--a", type=float)
    b.add_argument("--c", type=int, default=2)
    _common(b)

    v = subs.add_parser("verify", help="Monte Carlo vs exact and exact property checks")
    v.add_argument("--samples", type=int, default=100_000)
    v.add_argument("--quick", action="store_true", help="smaller exact checks")
    _common(v)

    gd = subs.add_parser("gap-design", help="spectrum and Renyi gaps of the gap 2-design")
    gd.add_argument("--dims", type=int, nargs=2, action="append", required=True, metavar=("D_A", "D_B"))
    gd.add_argument("--alpha-max", dest="alpha_max", type=int, default=4)
    gd.add_argument("--r", type=float)
    _common(gd)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "format", "out")}
    for key in ("state", "choi"):
        if params.get(key) is not None:
            params[key] = list(params[key])
    if params.get("dims") is not None:
        params["dims"] = [list(x) for x in params["dims"]]
    return RunConfig(args.command, params, args.seed, args.format, args.out)


def run(config: RunConfig) -> tuple[list[dict], str, int]:
    rows = COMMANDS[config.command](config)
    status = EXIT_OK
    if config.command == "verify" and not all(r["pass"] for r in rows):
        status = EXIT_FAIL
    if config.command == "gap-design" and any("error" in r for r in rows):
        status = EXIT_USAGE
    return rows, render(config, rows), status


def main(argv: Sequence[str] | None = None) -> int:
    warnings.simplefilter("default")
    try:
        config = config_from_args(build_parser().parse_args(argv))
        rows, text, status = run(config)
    except (UsageError, ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc), "exit_code": EXIT_USAGE}), file=sys.stderr)
        return EXIT_USAGE
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_FAIL:
        print(json.dumps({"failures": [r["name"] for r in rows if not r["pass"]]}), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
