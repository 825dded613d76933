"""Equilibrium selection on top of the QZ eigenstructure.

Selectors
---------
select_bk
    Stable-manifold projection.  Unique when the number of stable roots
    equals the number of predetermined variables.
select_mv
    Minimal-variance choice: coincides with ``select_bk`` when the latter is
    unique, and otherwise picks the fundamental (zero-sunspot) solution.
select_fa
    Fiscal augmentation: appends a debt-accumulation row and a surplus rule
    and applies ``select_bk`` to the enlarged pencil.

Solutions use contemporaneous shock timing: with ``Gamma = [I; P]``,

    s_{t+1} = R s_t + Q eps_t + k_s
    j_t     = P s_t + G eps_t + k_j

so ``B eps_t`` enters the time-``t`` equations exactly.  For a shock to a
predetermined process (the NK natural rate) the innovation shows up in the
state one period later.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DsgeSelectError,
    InvalidParams,
    MissingVariableRole,
    RankConditionFailed,
    UnitRootDetected,
)
from .model_ir import LinearREModel, NKParams, new_model, nk_model
from .qz_core import (
    EigClass,
    QZFactorization,
    QZOptions,
    eigenvalue_table,
    qz_pencil,
    reorder_select,
)


@dataclass(frozen=True)
class SolveOptions:
    tol_unit: float = 1e-6
    tol_inf: float = 1e-12
    cond_max: float = 1e10
    allow_unit_roots: bool = False
    swap_tol: float = 1e-8

    def qz(self) -> QZOptions:
        return QZOptions(tol_unit=self.tol_unit, tol_inf=self.tol_inf, swap_tol=self.swap_tol)


DEFAULT_SOLVE = SolveOptions()


class Status(enum.Enum):
    DETERMINATE = "determinate"
    INDETERMINATE = "indeterminate"
    NO_STABLE_SOLUTION = "no-stable-solution"
    MV_SELECTED = "mv-selected"


MESSAGES = {
    Status.DETERMINATE: "Unique stable solution",
    Status.INDETERMINATE: "Indeterminacy",
    Status.NO_STABLE_SOLUTION: "No stable solution",
}

CONDITION_NAMES = {
    "regular_pencil": "regular pencil",
    "stable_count": "stable count matches predetermined count",
    "rank_condition": "rank condition on Z11",
    "no_unit_roots": "no unit roots",
}


@dataclass(frozen=True, eq=False)
class StateSpaceSolution:
    """Selected equilibrium as a linear law of motion.

    Attributes
    ----------
    p : (n_j, n_s) policy matrix.
    r : (n_s, n_s) state transition.
    q_imp : (n_s, k) effect of ``eps_t`` on ``s_{t+1}``.
    g_imp : (n_j, k) contemporaneous effect of ``eps_t`` on the jumps.
    kappa_const : (n,) constants ``[k_s; k_j]`` of the law of motion.
    """

    p: np.ndarray
    r: np.ndarray
    q_imp: np.ndarray
    g_imp: np.ndarray
    kappa_const: np.ndarray
    names: tuple
    n_s: int
    shock_names: tuple = ()
    display_order: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def k(self) -> int:
        return self.q_imp.shape[1]

    @property
    def k_s(self) -> np.ndarray:
        return self.kappa_const[: self.n_s]

    @property
    def k_j(self) -> np.ndarray:
        return self.kappa_const[self.n_s:]

    @property
    def gamma(self) -> np.ndarray:
        return np.vstack([np.eye(self.n_s), self.p])

    def spectral_radius(self) -> float:
        if self.n_s == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.r))))

    def steady_state(self) -> np.ndarray:
        s = np.linalg.solve(np.eye(self.n_s) - self.r, self.k_s) if self.n_s else np.zeros(0)
        return np.concatenate([s, self.p @ s + self.k_j])

    def to_dict(self) -> dict:
        return {"names": list(self.names), "n_s": self.n_s,
                "shock_names": list(self.shock_names),
                "P": self.p.tolist(), "R": self.r.tolist(), "Q": self.q_imp.tolist(),
                "G": self.g_imp.tolist(), "kappa_const": self.kappa_const.tolist()}


@dataclass(frozen=True)
class Diagnostics:
    n_stable: int
    n_unstable: int
    n_unit: int
    n_infinite: int
    n_s: int
    cond_z11: float | None
    pencil_regular: bool
    bk_conditions: dict
    message: str
    eigenvalues: tuple = ()

    @property
    def n(self) -> int:
        return self.n_stable + self.n_unstable + self.n_unit + self.n_infinite

    def failed_conditions(self) -> list[str]:
        return [CONDITION_NAMES[k] for k, v in self.bk_conditions.items() if v is False]

    def to_dict(self) -> dict:
        return {"n_stable": self.n_stable, "n_unstable": self.n_unstable,
                "n_unit": self.n_unit, "n_infinite": self.n_infinite, "n_s": self.n_s,
                "cond_z11": self.cond_z11, "pencil_regular": self.pencil_regular,
                "bk_conditions": dict(self.bk_conditions), "message": self.message,
                "eigenvalues": [dict(r) for r in self.eigenvalues]}


@dataclass(frozen=True, eq=False)
class SelectionOutcome:
    """Result of a selector.

    ``solution`` is the selected equilibrium (absent for an unresolved
    indeterminacy or when nothing is stable).  ``fundamental`` and
    ``w_span`` describe the indeterminate family ``z_t = z_t^f + W xi_t``
    with ``E_t xi_{t+1} = sunspot_lambda xi_t``.
    """

    status: Status
    diagnostics: Diagnostics
    solution: StateSpaceSolution | None = None
    fundamental: StateSpaceSolution | None = None
    degree_m: int = 0
    w_span: np.ndarray | None = None
    sunspot_lambda: np.ndarray | None = None
    selector: str = "bk"
    provenance: tuple = ()
    factorization: QZFactorization | None = field(default=None, repr=False)

    @property
    def message(self) -> str:
        return self.diagnostics.message


# ---------------------------------------------------------------------------
# core construction


def _diagnostics(f: QZFactorization, n_s: int, cond_z11=None, rank_ok=None) -> Diagnostics:
    ns = f.count(EigClass.STABLE)
    nu = f.count(EigClass.UNIT_ROOT)
    if ns == n_s:
        msg = MESSAGES[Status.DETERMINATE]
    elif ns > n_s:
        msg = MESSAGES[Status.INDETERMINATE]
    else:
        msg = MESSAGES[Status.NO_STABLE_SOLUTION]
    conds = {"regular_pencil": True, "stable_count": ns == n_s,
             "rank_condition": rank_ok, "no_unit_roots": nu == 0}
    return Diagnostics(ns, f.count(EigClass.UNSTABLE), nu, f.count(EigClass.INFINITE), n_s,
                       cond_z11, True, conds, msg, tuple(eigenvalue_table(f)))


def _cond(z11) -> float:
    if z11.size == 0:
        return 1.0
    c = np.linalg.cond(z11)
    return float(c) if np.isfinite(c) else float("inf")


def policy_matrix(f: QZFactorization, n_s: int, cond_max: float = 1e10) -> tuple[np.ndarray, float]:
    """``P = Z21 Z11^{-1}`` by a linear solve, together with ``cond(Z11)``.

    Raises
    ------
    RankConditionFailed
        ``cond(Z11)`` exceeds ``cond_max``.
    """
    z = f.z
    z11, z21 = z[:n_s, :n_s], z[n_s:, :n_s]
    c = _cond(z11)
    if c > cond_max:
        raise RankConditionFailed(f"cond(Z11)={c:.3e} exceeds {cond_max:.1e}")
    if n_s == 0:
        return np.zeros((z.shape[0], 0)), c
    return np.linalg.solve(z11.T, z21.T).T, c


def _solve(a, b):
    if a.shape[0] == 0:
        return np.zeros((0,) + b.shape[1:])
    return np.linalg.solve(a, b)


def solution_from_factorization(m: LinearREModel, f: QZFactorization,
                                cond_max: float = 1e10) -> tuple[StateSpaceSolution, float]:
    """Law of motion implied by the leading ``n_s`` roots of ``f``.

    Every remaining root is solved forward with its stochastic component set
    to zero, which is the unique bounded choice for unstable roots and the
    fundamental (no-sunspot) choice for surplus stable ones.
    """
    n_s = m.n_s
    p, cond = policy_matrix(f, n_s, cond_max)
    z, s, t = f.z, f.s_mat, f.t_mat
    z11, z12, z22 = z[:n_s, :n_s], z[:n_s, n_s:], z[n_s:, n_s:]
    s11, s12, s22 = s[:n_s, :n_s], s[:n_s, n_s:], s[n_s:, n_s:]
    t11, t12, t22 = t[:n_s, :n_s], t[:n_s, n_s:], t[n_s:, n_s:]
    qb, qc = f.q @ m.b, f.q @ m.c
    try:
        mm = _solve(s22, qb[n_s:])
        m0 = _solve(s22 - t22, qc[n_s:])
        zi_z12 = _solve(z11, z12)
        r = z11 @ _solve(t11, s11)
        r = _solve(z11.T, r.T).T if n_s else r
        q_imp = z11 @ _solve(t11, -s11 @ zi_z12 @ mm + s12 @ mm - qb[:n_s])
        k_s = z11 @ _solve(t11, -s11 @ zi_z12 @ m0 + s12 @ m0 - t12 @ m0 - qc[:n_s]) + z12 @ m0
    except np.linalg.LinAlgError as exc:
        raise RankConditionFailed(f"singular block in the solution construction: {exc}") from exc
    h = z22 - p @ z12
    sol = StateSpaceSolution(p, r, q_imp, h @ mm, np.concatenate([k_s, h @ m0]), m.names, n_s,
                             m.shock_names, m.display_order)
    return sol, cond


def _stable_blocks(f: QZFactorization) -> list[tuple[int, ...]]:
    return [b for b in f.blocks if f.eigs[b[0]].cls is EigClass.STABLE]


def _fundamental_subsets(f: QZFactorization, n_s: int, limit: int = 1 << 16):
    """Conjugate-closed sets of ``n_s`` stable roots, smallest moduli first.

    Blocks are ranked by ascending modulus, then phase; candidate subsets are
    yielded in lexicographic order of their block ranks.
    """
    blocks = sorted(_stable_blocks(f), key=lambda b: (f.eigs[b[0]].modulus,
                                                      f.eigs[b[0]].phase))
    sizes = [len(b) for b in blocks]
    found = []
    for r in range(0, len(blocks) + 1):
        for combo in itertools.combinations(range(len(blocks)), r):
            if sum(sizes[i] for i in combo) == n_s:
                found.append(combo)
                if len(found) >= limit:
                    break
    for combo in sorted(found):
        yield [i for bi in combo for i in blocks[bi]]


def _fundamental(m: LinearREModel, f: QZFactorization, opts: SolveOptions):
    """Fundamental solution plus sunspot span for an indeterminate pencil."""
    n_s, n_stable = m.n_s, f.n_stable
    last_err = None
    for idx in _fundamental_subsets(f, n_s):
        sel = np.zeros(f.n, dtype=bool)
        sel[idx] = True
        g = reorder_select(f, sel)
        try:
            sol, cond = solution_from_factorization(m, g, opts.cond_max)
        except RankConditionFailed as exc:
            last_err = exc
            continue
        excess = np.zeros(f.n, dtype=bool)
        excess[n_s:n_stable] = True
        h = reorder_select(g, excess)
        mdeg = n_stable - n_s
        w = h.z[:, :mdeg].copy()
        lam = np.linalg.solve(h.t_mat[:mdeg, :mdeg], h.s_mat[:mdeg, :mdeg])
        return sol, cond, w, lam, g
    raise last_err or RankConditionFailed("no admissible set of leading stable roots")


def diagnose(m: LinearREModel, options: SolveOptions | None = None) -> tuple[Diagnostics, QZFactorization]:
    """Eigenvalue counts and condition flags without raising on unit roots."""
    opts = options or DEFAULT_SOLVE
    f = qz_pencil(m.a0, m.a1, opts.qz())
    rank_ok, cond = None, None
    if f.n_stable == m.n_s and f.count(EigClass.UNIT_ROOT) == 0:
        cond = _cond(f.z[:m.n_s, :m.n_s])
        rank_ok = cond <= opts.cond_max
    return _diagnostics(f, m.n_s, cond, rank_ok), f


def select_bk(m: LinearREModel, options: SolveOptions | None = None) -> SelectionOutcome:
    """Stable-manifold projection with the determinacy trichotomy.

    Raises
    ------
    SingularPencil, UnitRootDetected, RankConditionFailed
    """
    opts = options or DEFAULT_SOLVE
    f = qz_pencil(m.a0, m.a1, opts.qz())
    n_unit = f.count(EigClass.UNIT_ROOT)
    if n_unit and not opts.allow_unit_roots:
        raise UnitRootDetected(
            f"{n_unit} generalized eigenvalue(s) within {opts.tol_unit:g} of the unit circle")
    n_s = m.n_s
    if f.n_stable == n_s:
        sol, cond = solution_from_factorization(m, f, opts.cond_max)
        return SelectionOutcome(Status.DETERMINATE, _diagnostics(f, n_s, cond, True),
                                solution=sol, factorization=f)
    if f.n_stable > n_s:
        sol, cond, w, lam, g = _fundamental(m, f, opts)
        return SelectionOutcome(Status.INDETERMINATE, _diagnostics(f, n_s, cond, True),
                                fundamental=sol, degree_m=f.n_stable - n_s, w_span=w,
                                sunspot_lambda=lam, factorization=g)
    return SelectionOutcome(Status.NO_STABLE_SOLUTION, _diagnostics(f, n_s), factorization=f)


def select_mv(m: LinearREModel, options: SolveOptions | None = None) -> SelectionOutcome:
    """Minimal-variance selection.

    Under indeterminacy every stable equilibrium is ``z^f + W xi`` with
    ``xi`` independent of the fundamental shocks, so its variance is
    ``Var(z^f) + W Var(xi) W'`` and the minimum is at ``Var(xi) = 0``.
    """
    out = select_bk(m, options)
    if out.status is not Status.INDETERMINATE:
        return SelectionOutcome(out.status, out.diagnostics, solution=out.solution,
                                selector="mv", factorization=out.factorization)
    note = f"sunspot loadings zeroed: indeterminacy of degree {out.degree_m} resolved by minimal variance"
    return SelectionOutcome(Status.MV_SELECTED, out.diagnostics, solution=out.fundamental,
                            fundamental=out.fundamental, degree_m=out.degree_m,
                            w_span=out.w_span, sunspot_lambda=out.sunspot_lambda,
                            selector="mv", provenance=(note,), factorization=out.factorization)


# ---------------------------------------------------------------------------
# fiscal augmentation


@dataclass(frozen=True)
class FiscalParams:
    """Linearized government budget block.

    Debt ``b`` (predetermined) evolves as
    ``b_{t+1} = (b_t - pi_t) / beta - tau_t + i_t`` and the surplus follows
    ``tau_t = gamma_s b_t``.  Debt is stabilized by the surplus rule alone
    (Ricardian, passive fiscal) iff ``gamma_s > 1/beta - 1``.
    """

    gamma_s: float = 0.0
    beta: float | None = None
    inflation: str = "pi"
    output: str = "y"
    policy_rate: str | dict | None = None
    debt_name: str = "b"
    surplus_name: str = "tau"

    def __post_init__(self):
        if not np.isfinite(self.gamma_s) or self.gamma_s < 0:
            raise InvalidParams("gamma_s must be a finite non-negative number")
        if self.beta is not None and not 0.0 < self.beta < 1.0:
            raise InvalidParams("beta must lie in (0, 1)")

    def ricardian_threshold(self, beta: float) -> float:
        return 1.0 / beta - 1.0


def _rate_row(m: LinearREModel, fp: FiscalParams) -> tuple[np.ndarray, float]:
    """Weights ``w`` and constant ``c`` with ``i_t = w . z_t - c`` in deviations."""
    w = np.zeros(m.n)
    rate = fp.policy_rate
    if rate is None and "R" in m.names:
        rate = "R"
    if isinstance(rate, str):
        if rate not in m.names:
            raise MissingVariableRole(f"policy-rate variable {rate!r} not in model")
        w[m.index(rate)] = 1.0
        return w, m.params.get("r_ss", 0.0) if rate == "R" else 0.0
    if rate is None:
        if "phi_pi" not in m.params:
            raise MissingVariableRole("no policy-rate variable or Taylor-rule parameters")
        rate = {fp.inflation: m.params["phi_pi"]}
        if fp.output in m.names:
            rate[fp.output] = m.params.get("phi_y", 0.0)
    for name, coef in rate.items():
        if name not in m.names:
            raise MissingVariableRole(f"policy-rate component {name!r} not in model")
        w[m.index(name)] += float(coef)
    return w, 0.0


def augment_fiscal(m: LinearREModel, fp: FiscalParams) -> LinearREModel:
    """Append debt accumulation and the surplus rule; debt joins the states."""
    if fp.inflation not in m.names:
        raise MissingVariableRole(f"inflation variable {fp.inflation!r} not in model")
    beta = fp.beta if fp.beta is not None else m.params.get("beta")
    if beta is None:
        raise InvalidParams("discount factor unavailable: set FiscalParams.beta")
    w, c_rate = _rate_row(m, fp)
    n, n_s = m.n, m.n_s
    # new ordering: old states, debt, old jumps, surplus
    cols = list(range(n_s)) + [n] + list(range(n_s, n)) + [n + 1]
    a0 = np.zeros((n + 2, n + 2))
    a1 = np.zeros((n + 2, n + 2))
    a0[:n, :n] = m.a0
    a1[:n, :n] = m.a1
    ib, itau, ipi = n, n + 1, m.index(fp.inflation)
    a0[n, :n] = w
    a0[n, ib] += 1.0 / beta
    a0[n, ipi] += -1.0 / beta
    a0[n, itau] = -1.0
    a1[n, ib] = 1.0
    a0[n + 1, ib] = -fp.gamma_s
    a0[n + 1, itau] = 1.0
    b = np.vstack([m.b, np.zeros((2, m.k))])
    c = np.concatenate([m.c, [c_rate, 0.0]])
    names = list(m.names) + [fp.debt_name, fp.surplus_name]
    params = dict(m.params, gamma_s=fp.gamma_s, beta=beta)
    order = m.output_order + (fp.debt_name, fp.surplus_name)
    return new_model(a0[:, cols], a1[:, cols], b, c, n_s=n_s + 1,
                     names=[names[i] for i in cols], shock_names=m.shock_names,
                     params=params, display_order=order)


def select_fa(m: LinearREModel, fp: FiscalParams,
              options: SolveOptions | None = None) -> tuple[LinearREModel, SelectionOutcome]:
    aug = augment_fiscal(m, fp)
    out = select_bk(aug, options)
    return aug, SelectionOutcome(out.status, out.diagnostics, solution=out.solution,
                                 fundamental=out.fundamental, degree_m=out.degree_m,
                                 w_span=out.w_span, sunspot_lambda=out.sunspot_lambda,
                                 selector="fa", factorization=out.factorization)


# ---------------------------------------------------------------------------
# determinacy map


@dataclass(frozen=True)
class Grid:
    phi_pi: tuple = (0.0, 3.0, 0.05)
    phi_y: tuple = (0.0, 2.0, 0.05)

    @staticmethod
    def _axis(lo, hi, step):
        if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(step)):
            raise InvalidParams("grid bounds and steps must be finite")
        if step <= 0:
            raise InvalidParams(f"grid step must be positive, got {step}")
        if hi < lo:
            raise InvalidParams(f"empty grid range [{lo}, {hi}]")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return np.round(lo + step * np.arange(count), 10)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return self._axis(*self.phi_pi), self._axis(*self.phi_y)


@dataclass(frozen=True)
class MapCell:
    phi_pi: float
    phi_y: float
    classification: str
    n_stable: int
    degree_m: int


@dataclass(frozen=True)
class MapTable:
    cells: tuple
    selector: str
    phi_pi_axis: tuple
    phi_y_axis: tuple

    COLUMNS = ("phi_pi", "phi_y", "classification", "n_stable", "degree_m")

    def lookup(self, phi_pi: float, phi_y: float) -> MapCell:
        for c in self.cells:
            if abs(c.phi_pi - phi_pi) < 1e-9 and abs(c.phi_y - phi_y) < 1e-9:
                return c
        raise KeyError((phi_pi, phi_y))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.COLUMNS)
        for c in self.cells:
            wr.writerow([repr(c.phi_pi), repr(c.phi_y), c.classification, c.n_stable, c.degree_m])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _classify_cell(base: NKParams, phi_pi: float, phi_y: float, selector: str,
                   opts: SolveOptions) -> MapCell:
    try:
        m = nk_model(base.with_(phi_pi=float(phi_pi), phi_y=float(phi_y)))
        out = (select_mv if selector == "mv" else select_bk)(m, opts)
        return MapCell(float(phi_pi), float(phi_y), out.status.value,
                       out.diagnostics.n_stable, out.degree_m)
    except UnitRootDetected:
        d, _ = diagnose(m, opts)
        return MapCell(float(phi_pi), float(phi_y), "unit-root", d.n_stable,
                       max(d.n_stable - d.n_s, 0))
    except DsgeSelectError as exc:
        return MapCell(float(phi_pi), float(phi_y), f"error:{type(exc).__name__}", -1, -1)


def _thread_cap() -> int:
    env = os.environ.get("DSGE_SELECT_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            pass
    return cap


def determinacy_map(base: NKParams | None = None, grid: Grid | None = None,
                    selector: str = "bk", options: SolveOptions | None = None,
                    threads: int | None = None) -> MapTable:
    """Classify every (phi_pi, phi_y) cell of ``grid``.

    Cells are ordered by phi_y then phi_pi regardless of scheduling; failures
    are recorded per cell (``unit-root`` or ``error:<Name>``).
    """
    if selector not in ("bk", "mv"):
        raise InvalidParams(f"unknown selector {selector!r}")
    base = base or NKParams()
    grid = grid or Grid()
    opts = options or DEFAULT_SOLVE
    xs, ys = grid.axes()
    pts = [(x, y) for y in ys for x in xs]
    workers = min(threads or _thread_cap(), _thread_cap(), len(pts)) or 1
    if workers == 1:
        cells = [_classify_cell(base, x, y, selector, opts) for x, y in pts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(lambda xy: _classify_cell(base, xy[0], xy[1], selector, opts), pts))
    return MapTable(tuple(cells), selector, tuple(float(x) for x in xs), tuple(float(y) for y in ys))
