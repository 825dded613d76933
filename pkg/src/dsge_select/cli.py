"""Command-line interface: ``dsge-select {solve,map,occbin-zlb,compare,diagnose}``.

Exit codes
----------
0   determinate or minimal-variance selected; command succeeded
1   error (model, solver or IO failure)
2   indeterminate under the stability selector
3   no stable solution
4   ``compare`` difference above ``--tol``
64  usage error
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import (
    CycleDetected,
    DsgeSelectError,
    MaxIterations,
    RankConditionFailed,
    SingularPencil,
    UnitRootDetected,
)
from .model_ir import NKParams, load_model, nk_model, scalar_forward_model
from .qz_core import eigenvalue_table
from .selectors import (
    FiscalParams,
    Grid,
    Status,
    determinacy_map,
    diagnose,
    select_bk,
    select_fa,
    select_mv,
)
from .sim_verify import PathTable, compare_paths, impulse_response, simulate

EXIT_OK, EXIT_ERROR, EXIT_INDET, EXIT_NOSTABLE, EXIT_TOL, EXIT_USAGE = 0, 1, 2, 3, 4, 64

_STATUS_EXIT = {Status.DETERMINATE: EXIT_OK, Status.MV_SELECTED: EXIT_OK,
                Status.INDETERMINATE: EXIT_INDET, Status.NO_STABLE_SOLUTION: EXIT_NOSTABLE}

TERMINAL_MIN = 11  # horizon must exceed the terminal slack window

_FAILED_CONDITION = {SingularPencil: "regular pencil", UnitRootDetected: "no unit roots",
                     RankConditionFailed: "rank condition"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_model_args(p):
    p.add_argument("--model", default="nk", help="builtin name (nk, scalar-forward) or model JSON")
    for flag, dest in (("--phi-pi", "phi_pi"), ("--phi-y", "phi_y"), ("--sigma", "sigma"),
                       ("--beta", "beta"), ("--kappa", "kappa"), ("--rho", "rho")):
        p.add_argument(flag, dest=dest, type=float, default=None)


def _add_out(p):
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dsge-select", description="Equilibrium selection for linear RE models")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a model and write solution, diagnostics and IRFs")
    _add_model_args(s)
    s.add_argument("--selector", choices=("bk", "mv", "fa"), default="bk")
    s.add_argument("--gamma-s", dest="gamma_s", type=float, default=0.0)
    s.add_argument("--horizon", type=int, default=40)
    s.add_argument("--shock", type=float, default=1.0, help="IRF magnitude")
    s.add_argument("--seed", type=int, default=None, help="also write a simulated path")
    _add_out(s)

    m = sub.add_parser("map", help="determinacy map over (phi_pi, phi_y)")
    _add_model_args(m)
    m.add_argument("--grid", default="0:3,0:2", help="PI_LO:PI_HI,Y_LO:Y_HI")
    m.add_argument("--step", default="0.05", help="STEP or PI_STEP,Y_STEP")
    m.add_argument("--selector", choices=("bk", "mv", "both"), default="both")
    m.add_argument("--plot", action="store_true", help="also write map.png")
    _add_out(m)

    z = sub.add_parser("occbin-zlb", help="zero-lower-bound experiment")
    _add_model_args(z)
    z.add_argument("--shock", type=float, default=0.01, help="size of the natural-rate drop")
    z.add_argument("--horizon", type=int, default=200)
    z.add_argument("--max-iter", dest="max_iter", type=int, default=100)
    z.add_argument("--no-constraint", dest="no_constraint", action="store_true")
    z.add_argument("--dynare-compat", dest="dynare_compat", action="store_true")
    z.add_argument("--plot", action="store_true")
    _add_out(z)

    c = sub.add_parser("compare", help="compare two path CSVs")
    c.add_argument("path_a")
    c.add_argument("path_b")
    c.add_argument("--tol", type=float, default=5e-2)
    _add_out(c)

    d = sub.add_parser("diagnose", help="eigenvalue table and determinacy conditions")
    _add_model_args(d)
    _add_out(d)
    return ap


def _nk_params(args) -> NKParams:
    overrides = {k: getattr(args, k) for k in ("sigma", "beta", "kappa", "phi_pi", "phi_y", "rho")
                 if getattr(args, k, None) is not None}
    return NKParams().with_(**overrides)


def _load(args):
    name = args.model
    if name == "nk":
        return nk_model(_nk_params(args))
    if name == "scalar-forward":
        return scalar_forward_model()
    return load_model(name)


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out: Path | None, name: str, text: str):
    if out is not None:
        (out / name).write_text(text, encoding="utf-8")


def cmd_solve(args) -> int:
    model = _load(args)
    if args.selector == "fa":
        model, outcome = select_fa(model, FiscalParams(gamma_s=args.gamma_s))
    else:
        outcome = (select_mv if args.selector == "mv" else select_bk)(model)
    out = _outdir(args)
    diag = outcome.diagnostics.to_dict()
    diag.update(status=outcome.status.value, selector=outcome.selector,
                degree_m=outcome.degree_m, provenance=list(outcome.provenance))
    _write(out, "diagnostics.json", _dump(diag))
    print(outcome.message)
    for note in outcome.provenance:
        print(note)
    if args.verbose:
        print(_dump(diag), end="")
    sol = outcome.solution
    if sol is not None:
        _write(out, "solution.json", _dump(dict(sol.to_dict(), selector=outcome.selector,
                                                status=outcome.status.value)))
        for i, shock in enumerate(sol.shock_names):
            irf = impulse_response(sol, i, args.shock, args.horizon)
            _write(out, f"irf_{shock}.csv", irf.to_csv())
        if args.seed is not None:
            sim = simulate(sol, horizon=args.horizon, seed=args.seed)
            _write(out, "simulation.csv", sim.to_csv())
            _write(out, "simulation_meta.json", _dump({"seed": args.seed, "horizon": args.horizon}))
    return _STATUS_EXIT[outcome.status]


def _parse_grid(grid: str, step: str) -> Grid:
    try:
        pi_part, y_part = grid.split(",")
        pi_lo, pi_hi = (float(v) for v in pi_part.split(":"))
        y_lo, y_hi = (float(v) for v in y_part.split(":"))
        steps = [float(v) for v in step.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse --grid/--step: {exc}") from exc
    if len(steps) == 1:
        steps *= 2
    if len(steps) != 2 or min(steps) <= 0 or not all(np.isfinite(steps)):
        raise UsageError("--step must be positive")
    if pi_hi < pi_lo or y_hi < y_lo:
        raise UsageError("--grid ranges must be non-empty")
    return Grid((pi_lo, pi_hi, steps[0]), (y_lo, y_hi, steps[1]))


def _plot_map(tables, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    codes = {"determinate": 0, "mv-selected": 1, "indeterminate": 2, "no-stable-solution": 3,
             "unit-root": 4}
    fig, axes = plt.subplots(1, len(tables), figsize=(5 * len(tables), 4), squeeze=False)
    for ax, tab in zip(axes[0], tables):
        grid = np.full((len(tab.phi_y_axis), len(tab.phi_pi_axis)), 5.0)
        nx = len(tab.phi_pi_axis)
        for i, cell in enumerate(tab.cells):
            grid[i // nx, i % nx] = codes.get(cell.classification, 5)
        ax.imshow(grid, origin="lower", aspect="auto", vmin=0, vmax=5, cmap="tab10",
                  extent=(tab.phi_pi_axis[0], tab.phi_pi_axis[-1],
                          tab.phi_y_axis[0], tab.phi_y_axis[-1]))
        ax.set_xlabel("phi_pi")
        ax.set_ylabel("phi_y")
        ax.set_title(f"selector: {tab.selector}")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def cmd_map(args) -> int:
    grid = _parse_grid(args.grid, args.step)
    base = _nk_params(args)
    selectors = ("bk", "mv") if args.selector == "both" else (args.selector,)
    out = _outdir(args)
    tables = []
    for sel in selectors:
        tab = determinacy_map(base, grid, sel)
        tables.append(tab)
        _write(out, f"map_{sel}.csv", tab.to_csv())
        counts = {}
        for cell in tab.cells:
            counts[cell.classification] = counts.get(cell.classification, 0) + 1
        print(f"{sel}: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if args.plot and out is not None:
        _plot_map(tables, out / "map.png")
    return EXIT_OK


def cmd_occbin_zlb(args) -> int:
    from .occbin import check_complementarity, path_residuals, zlb_experiment

    if args.horizon < TERMINAL_MIN:
        raise UsageError(f"--horizon must be at least {TERMINAL_MIN}")
    try:
        path, rs = zlb_experiment(_nk_params(args), args.shock, args.horizon,
                                  constraint=not args.no_constraint,
                                  dynare_compat=args.dynare_compat, max_iter=args.max_iter)
    except CycleDetected as exc:
        print(f"error: regime sequence cycles (period {exc.period}); "
              "multiple perfect-foresight equilibria are likely", file=sys.stderr)
        return EXIT_ERROR
    except MaxIterations as exc:
        print(f"error: no fixed point after {len(exc.history)} regime guesses", file=sys.stderr)
        return EXIT_ERROR
    table = path.to_table().select(("y", "pi", "R", "rn"))
    meta = path.metadata()
    meta.update(constraint=not args.no_constraint, shock=args.shock,
                max_residual=float(path_residuals(path, rs).max()),
                max_violation=check_complementarity(path, rs).max_violation,
                min_R=float(table.column("R").min()))
    meta.pop("history", None)
    out = _outdir(args)
    _write(out, "zlb_path.csv", table.to_csv())
    _write(out, "zlb_meta.json", _dump(meta))
    print(f"converged={path.converged} iterations={path.iterations} spells={path.spells()}")
    if args.verbose:
        print(_dump(meta), end="")
    if args.plot and out is not None:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(2, 2, figsize=(8, 6))
        for ax, name in zip(axes.ravel(), table.names):
            ax.plot(table.t[:40], table.column(name)[:40])
            ax.set_title(name)
        fig.tight_layout()
        fig.savefig(out / "zlb_path.png", dpi=100)
        plt.close(fig)
    return EXIT_OK


def cmd_compare(args) -> int:
    a = PathTable.from_csv(args.path_a)
    b = PathTable.from_csv(args.path_b)
    rep = compare_paths(a, b)
    print(rep.to_text(), end="")
    out = _outdir(args)
    _write(out, "compare.json", rep.to_json())
    _write(out, "compare.txt", rep.to_text())
    return EXIT_OK if rep.overall_max <= args.tol else EXIT_TOL


def cmd_diagnose(args) -> int:
    model = _load(args)
    diag, f = diagnose(model)
    rows = eigenvalue_table(f)
    lines = ["index,re,im,modulus,class"]
    lines += [f"{r['index']},{r['re']!r},{r['im']!r},{r['modulus']!r},{r['class']}" for r in rows]
    csv_text = "\n".join(lines) + "\n"
    print(csv_text, end="")
    print(diag.message)
    out = _outdir(args)
    _write(out, "eigenvalues.csv", csv_text)
    _write(out, "diagnostics.json", _dump(diag.to_dict()))
    if args.verbose:
        print(_dump(diag.to_dict()), end="")
    return EXIT_OK


_COMMANDS = {"solve": cmd_solve, "map": cmd_map, "occbin-zlb": cmd_occbin_zlb,
             "compare": cmd_compare, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dsge-select: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DsgeSelectError as exc:
        cond = next((v for k, v in _FAILED_CONDITION.items() if isinstance(exc, k)), None)
        prefix = f"failed condition '{cond}': " if cond else ""
        print(f"error: {prefix}{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
