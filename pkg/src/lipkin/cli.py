"""Command-line front end: phase tables, sweeps, exponent campaigns, self-checks.

Numeric output is deterministic: floats are printed with 17 significant
digits, rows carry the full parameter set, and row order follows the input
grids.  Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 fit precondition violated, 5 validation (compare) failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__, bogoliubov, meanfield, scaling, spectrum
from .model import ModelParams, canonicalize, classify_phase

SWEEP_COLUMNS = [
    "gamma_x",
    "N",
    "e_gs_mf",
    "e_gs_trunc",
    "e_gs_exact",
    "ne_mf",
    "ne_trunc",
    "ne_exact",
    "gap_trunc",
    "gap1_exact",
    "gap2_exact",
    # trailing parameter echo so each row is self-contained
    "epsilon",
    "gamma_y",
]


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _parse_range(text: str) -> list[float]:
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError:
        raise SystemExit2(f"bad range {text!r}, expected a:b:steps")
    if steps < 1:
        raise SystemExit2(f"range needs at least 1 step, got {steps}")
    if steps == 1:
        return [a]
    return [float(g) for g in np.linspace(a, b, steps)]


def _parse_n_list(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if "^" in tok:
                base, exp = tok.split("^")
                out.append(int(base) ** int(exp))
            else:
                out.append(int(tok))
        except ValueError:
            raise SystemExit2(f"bad n-list entry {tok!r}")
    if not out:
        raise SystemExit2("empty n-list")
    return out


def _parse_window(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise SystemExit2(f"bad window {text!r}, expected a:b")


class SystemExit2(Exception):
    """Configuration error; converted to exit code 2."""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma-x", type=float, default=None)
    parser.add_argument("--gamma-x-range", type=str, default=None, metavar="A:B:STEPS")
    parser.add_argument("--gamma-y", type=float, default=None)
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--n-list", type=str, default=None, metavar="N1,N2,...")
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--config", type=str, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipkin", description="Lipkin-model solvers and scaling campaigns"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_phase = sub.add_parser("phase", help="phase region and mean-field table")
    _add_common(p_phase)

    p_sweep = sub.add_parser("sweep", help="mean-field / truncated / exact sweep")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--evaluator",
        choices=("meanfield", "truncated", "exact", "all"),
        default=None,
    )
    p_sweep.add_argument("--dump", type=str, default=None, metavar="PATH")

    p_exp = sub.add_parser("exponents", help="susceptibility peak scaling campaign")
    _add_common(p_exp)
    p_exp.add_argument("--special-line", action="store_true", default=None)
    p_exp.add_argument("--window", type=str, default=None, metavar="A:B")
    p_exp.add_argument("--summary-out", type=str, default=None)

    p_cmp = sub.add_parser("compare", help="cross-validate solvers on random draws")
    _add_common(p_cmp)
    p_cmp.add_argument("--draws", type=int, default=None)
    p_cmp.add_argument("--n-dense", type=int, default=None)
    p_cmp.add_argument("--n-chi", type=int, default=None)
    p_cmp.add_argument("--tol-eigs", type=float, default=None)
    p_cmp.add_argument("--tol-chi", type=float, default=None)
    p_cmp.add_argument("--tol-fd", type=float, default=None)
    p_cmp.add_argument("--tol-rho", type=float, default=None)

    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit2(f"cannot read config {args.config!r}: {exc}")
        if not isinstance(cfg, dict):
            raise SystemExit2("config file must hold a JSON object")
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if not hasattr(args, dest):
                raise SystemExit2(f"unknown config key {key!r}")
            if getattr(args, dest) is None:
                setattr(args, dest, value)
    return args


def _setdefaults(args: argparse.Namespace, **defaults) -> None:
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _gamma_grid(args) -> list[float]:
    if args.gamma_x_range is not None:
        return _parse_range(args.gamma_x_range)
    if args.gamma_x is not None:
        return [args.gamma_x]
    raise SystemExit2("need --gamma-x or --gamma-x-range")


def _n_values(args, default: int = 10) -> list[int]:
    if args.n_list is not None:
        values = _parse_n_list(args.n_list)
    elif args.n is not None:
        values = [args.n]
    else:
        values = [default]
    for n in values:
        if n < 1:
            raise SystemExit2(f"n must be >= 1, got {n}")
    return values


def _emit(rows: list[dict], columns: list[str], args) -> None:
    if args.format == "json":
        text = json.dumps(
            [{c: row.get(c) for c in columns} for row in rows], indent=2, sort_keys=True
        )
        text += "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(target, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])
    finally:
        if args.out:
            target.close()


def cmd_phase(args) -> int:
    _setdefaults(args, gamma_y=1.0, epsilon=1.0, format="csv")
    columns = ["epsilon", "gamma_x", "gamma_y", "N", "region", "rho_c", "e_gs_mf", "ne_mf"]
    rows = []
    for n in _n_values(args):
        for gx in _gamma_grid(args):
            p = ModelParams(gamma_x=gx, gamma_y=args.gamma_y, n_atoms=n, epsilon=args.epsilon)
            canon, _ = canonicalize(p)
            obs = meanfield.mf_observables(canon)
            rows.append(
                {
                    "epsilon": p.epsilon,
                    "gamma_x": p.gamma_x,
                    "gamma_y": p.gamma_y,
                    "N": n,
                    "region": classify_phase(p).value,
                    "rho_c": meanfield.critical_point(canon).rho_c,
                    "e_gs_mf": obs.e_gs,
                    "ne_mf": obs.n_e,
                }
            )
    _emit(rows, columns, args)
    return 0


def _sweep_row(task) -> dict:
    gx, gamma_y, n, epsilon, evaluator = task
    p = ModelParams(gamma_x=gx, gamma_y=gamma_y, n_atoms=n, epsilon=epsilon)
    row = {"gamma_x": gx, "N": n, "epsilon": epsilon, "gamma_y": gamma_y}
    if evaluator in ("meanfield", "all"):
        canon, _ = canonicalize(p)
        obs = meanfield.mf_observables(canon)
        row["e_gs_mf"] = obs.e_gs
        row["ne_mf"] = obs.n_e
    if evaluator in ("truncated", "all"):
        canon, _ = canonicalize(p)
        try:
            e_t, ne_t = bogoliubov.truncated_observables(canon)
            row["e_gs_trunc"] = e_t
            row["ne_trunc"] = ne_t
            row["gap_trunc"] = bogoliubov.gap(canon)
        except bogoliubov.SingularPointError:
            pass  # gapless point: truncated columns stay blank
    if evaluator in ("exact", "all"):
        row["e_gs_exact"] = spectrum.ground_state(p).energies[0] / n
        row["ne_exact"] = spectrum.n_e_exact(p)
        gap1, gap2 = spectrum.excitation_gaps(p)
        row["gap1_exact"] = gap1
        row["gap2_exact"] = gap2
    return row


def cmd_sweep(args) -> int:
    _setdefaults(args, gamma_y=1.0, epsilon=1.0, format="csv", evaluator="all", jobs=1)
    grid = _gamma_grid(args)
    tasks = [
        (gx, args.gamma_y, n, args.epsilon, args.evaluator)
        for n in _n_values(args)
        for gx in grid
    ]
    try:
        rows = scaling.parallel_map(_sweep_row, tasks, jobs=args.jobs)
    except (spectrum.SizeCapError, spectrum.IllConditionedError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    _emit(rows, SWEEP_COLUMNS, args)
    if args.dump:
        with open(args.dump, "w") as fh:
            for gx, gamma_y, n, epsilon, _ in tasks:
                spectrum.dump_ground(
                    ModelParams(gamma_x=gx, gamma_y=gamma_y, n_atoms=n, epsilon=epsilon), fh
                )
    return 0


def cmd_exponents(args) -> int:
    _setdefaults(args, epsilon=1.0, format="csv", jobs=1)
    if args.special_line:
        gamma_y = -args.epsilon
        campaign = "special"
    else:
        _setdefaults(args, gamma_y=1.0)
        gamma_y = args.gamma_y
        campaign = "generic"
    if args.n_list is None:
        raise SystemExit2("exponents needs --n-list")
    n_list = _parse_n_list(args.n_list)
    if len(n_list) < 3:
        print(
            f"fit precondition violated: need >= 3 sizes, got {len(n_list)}",
            file=sys.stderr,
        )
        return 4
    window = _parse_window(args.window) if args.window else None
    try:
        peaks = scaling.peak_campaign(
            n_list, gamma_y, epsilon=args.epsilon, window=window, jobs=args.jobs
        )
        fit = scaling.fit_power_law([(n, pk.chi_max) for n, pk in peaks])
    except (spectrum.SizeCapError, spectrum.IllConditionedError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"fit precondition violated: {exc}", file=sys.stderr)
        return 4
    rows = [
        {
            "N": n,
            "gamma_star": pk.gamma_star,
            "chi_f_max": pk.chi_max,
            "epsilon": args.epsilon,
            "gamma_y": gamma_y,
        }
        for n, pk in peaks
    ]
    if args.out:
        _emit(rows, ["N", "gamma_star", "chi_f_max", "epsilon", "gamma_y"], args)
    summary = {
        "campaign": campaign,
        "gamma_y": gamma_y,
        "epsilon": args.epsilon,
        "n_list": n_list,
        "slope": fit.slope,
        "prefactor": fit.prefactor,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
        "warnings": [
            f"maximum for N={n} sits on the window edge at gamma_x={pk.gamma_star:.17g}"
            for n, pk in peaks
            if pk.at_edge
        ],
    }
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.summary_out:
        with open(args.summary_out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    _setdefaults(
        args,
        seed=0,
        draws=50,
        n_dense=12,
        n_chi=200,
        tol_eigs=1e-10,
        tol_chi=1e-8,
        tol_fd=1e-3,
        tol_rho=1e-5,
        epsilon=1.0,
    )
    rng = np.random.default_rng(args.seed)
    checks = {}

    # dense oracle vs merged parity-block spectra
    dev = 0.0
    for _ in range(args.draws):
        n = int(rng.integers(2, args.n_dense + 1))
        p = ModelParams(
            gamma_x=float(rng.uniform(-3.0, 3.0)),
            gamma_y=float(rng.uniform(-3.0, 3.0)),
            n_atoms=n,
            epsilon=args.epsilon,
        )
        blocks = spectrum.build_blocks(p)
        merged = np.sort(
            np.concatenate(
                [
                    np.linalg.eigvalsh(_tridiag_dense(blocks.even_diag, blocks.even_offdiag)),
                    np.linalg.eigvalsh(_tridiag_dense(blocks.odd_diag, blocks.odd_offdiag)),
                ]
            )
        )
        dense = np.linalg.eigvalsh(spectrum.dense_hamiltonian(p))
        dev = max(dev, float(np.max(np.abs(merged - dense))))
    checks["dense_vs_blocks"] = {"max_deviation": dev, "tolerance": args.tol_eigs}

    # susceptibility evaluators against each other
    dev_chi, dev_fd = 0.0, 0.0
    for _ in range(max(args.draws // 4, 3)):
        p = ModelParams(
            gamma_x=float(rng.uniform(-1.8, -0.2)),
            gamma_y=1.0,
            n_atoms=args.n_chi,
            epsilon=args.epsilon,
        )
        if abs(p.gamma_x - p.gamma_c) < 0.05:
            continue
        ref = spectrum.chi_f_resolvent(p)
        dev_chi = max(dev_chi, abs(spectrum.chi_f_sum(p) - ref) / ref)
        # The overlap estimator needs a resolvable ground level: deep in the
        # deformed region the parity doublet is degenerate to rounding, the
        # winning block is numerical noise, and a fidelity across the step is
        # undefined.  The block-internal evaluators above are unaffected.
        if spectrum.excitation_gaps(p)[0] > 1e-9:
            dev_fd = max(dev_fd, abs(spectrum.chi_f_finite_difference(p, 1e-4) - ref) / ref)
    checks["chi_sum_vs_resolvent"] = {"max_deviation": dev_chi, "tolerance": args.tol_chi}
    checks["chi_fd_vs_resolvent"] = {"max_deviation": dev_fd, "tolerance": args.tol_fd}

    # numeric surface minimiser vs analytic critical point
    dev_rho = 0.0
    for _ in range(max(args.draws // 5, 3)):
        n = int(rng.integers(5, 200))
        deformd = bool(rng.integers(0, 2))
        gx = float(rng.uniform(-3.0, -1.2)) if deformd else float(rng.uniform(-0.8, 2.0))
        gy = float(rng.uniform(gx, 2.0)) if deformd else float(rng.uniform(-0.8, 2.0))
        p = ModelParams(gamma_x=gx, gamma_y=gy, n_atoms=n, epsilon=args.epsilon)
        numeric = meanfield.minimize_surface_numeric(p).rho_c
        analytic = meanfield.critical_point(p).rho_c
        dev_rho = max(dev_rho, abs(numeric - analytic) / math.sqrt(n))
    checks["minimizer_vs_analytic"] = {"max_deviation": dev_rho, "tolerance": args.tol_rho}

    all_pass = True
    for entry in checks.values():
        entry["pass"] = bool(entry["max_deviation"] <= entry["tolerance"])
        all_pass = all_pass and entry["pass"]
    report = {"seed": args.seed, "checks": checks, "all_pass": all_pass}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all_pass else 5


def _tridiag_dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    mat = np.diag(diag)
    idx = np.arange(len(off))
    mat[idx, idx + 1] = off
    mat[idx + 1, idx] = off
    return mat


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        if args.command == "phase":
            return cmd_phase(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "exponents":
            return cmd_exponents(args)
        if args.command == "compare":
            return cmd_compare(args)
        raise SystemExit2(f"unknown command {args.command!r}")
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
