"""Simulation, stationary moments, structural residuals and path comparison."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from . import kernels
from .errors import IndexOutOfRange, NoOverlap, NotStationary, ParseError, ShapeMismatch
from .model_ir import LinearREModel
from .selectors import StateSpaceSolution


@dataclass(frozen=True, eq=False)
class PathTable:
    """Rectangular time-indexed table; ``data[i, j]`` is ``names[j]`` at ``t[i]``."""

    t: np.ndarray
    names: tuple
    data: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.t)
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape != (t.shape[0], len(self.names)):
            raise ShapeMismatch(f"data shape {data.shape} does not match "
                                f"{t.shape[0]} periods x {len(self.names)} columns")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] < 0):
            raise ShapeMismatch("time index must be non-negative and strictly increasing")
        object.__setattr__(self, "t", t.astype(int))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "data", data)

    @property
    def horizon(self) -> int:
        return self.t.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def select(self, names) -> "PathTable":
        idx = [self.names.index(n) for n in names]
        return PathTable(self.t, tuple(names), self.data[:, idx], dict(self.meta))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(("t",) + self.names)
        for ti, row in zip(self.t, self.data):
            wr.writerow([int(ti)] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text, *, is_text: bool = False) -> "PathTable":
        text = path_or_text if is_text else open(path_or_text, encoding="utf-8").read()
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r]
        if not rows or not rows[0] or rows[0][0].strip() != "t":
            raise ParseError("CSV header must start with 't'")
        names = tuple(h.strip() for h in rows[0][1:])
        try:
            t = [int(float(r[0])) for r in rows[1:]]
            data = [[float(v) for v in r[1:]] for r in rows[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric CSV entry: {exc}") from exc
        if any(len(r) != len(names) for r in data):
            raise ParseError("ragged CSV rows")
        return cls(np.array(t, dtype=int), names,
                   np.array(data, dtype=float).reshape(len(t), len(names)))


def _solution_table(sol: StateSpaceSolution, z: np.ndarray, meta=None) -> PathTable:
    order = sol.display_order or sol.names
    idx = [sol.names.index(n) for n in order]
    return PathTable(np.arange(z.shape[0]), tuple(order), z[:, idx], meta or {})


def _run(sol: StateSpaceSolution, eps: np.ndarray, s0=None, backend=None) -> np.ndarray:
    s0 = sol.steady_state()[: sol.n_s] if s0 is None else np.asarray(s0, float)
    return kernels.simulate_lss(sol.r, sol.q_imp, sol.p, sol.g_imp, sol.k_s, sol.k_j,
                                eps, s0, impl=backend)


def impulse_response(sol: StateSpaceSolution, shock_index: int, magnitude: float = 1.0,
                     horizon: int = 40) -> PathTable:
    """Response to ``eps_0 = magnitude * e_{shock_index}`` starting at the steady state.

    Columns follow the model's display order and contain levels (steady
    state plus deviation).
    """
    if not 0 <= shock_index < sol.k:
        raise IndexOutOfRange(f"shock_index {shock_index} outside [0, {sol.k})")
    eps = np.zeros((horizon, sol.k))
    if horizon:
        eps[0, shock_index] = magnitude
    label = sol.shock_names[shock_index] if sol.shock_names else shock_index
    return _solution_table(sol, _run(sol, eps),
                           {"shock": label, "magnitude": magnitude, "shocks": eps})


def _cov_factor(cov, k):
    cov = np.eye(k) if cov is None else np.atleast_2d(np.asarray(cov, float))
    if cov.shape != (k, k):
        raise ShapeMismatch(f"shock covariance must be {k}x{k}")
    w, v = np.linalg.eigh((cov + cov.T) / 2)
    return v * np.sqrt(np.clip(w, 0.0, None))


def draw_shocks(k: int, horizon: int, seed=None, shock_cov=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.standard_normal((horizon, k)) @ _cov_factor(shock_cov, k).T


def simulate(sol: StateSpaceSolution, shock_draws=None, horizon: int | None = None,
             seed=None, shock_cov=None, s0=None, backend=None) -> PathTable:
    """Stochastic simulation.

    Either pass ``shock_draws`` of shape ``(T, k)`` or let ``seed`` (a
    ``numpy.random.default_rng`` seed) and ``shock_cov`` generate them.  The
    seed is stored in ``meta``.
    """
    if shock_draws is None:
        if horizon is None:
            raise ShapeMismatch("either shock_draws or horizon is required")
        eps = draw_shocks(sol.k, horizon, seed, shock_cov)
    else:
        eps = np.atleast_2d(np.asarray(shock_draws, float))
        if eps.shape[1] != sol.k or (horizon is not None and eps.shape[0] != horizon):
            raise ShapeMismatch(f"shock draws shape {eps.shape} incompatible with k={sol.k}")
        if not np.all(np.isfinite(eps)):
            raise ShapeMismatch("shock draws must be finite")
    return _solution_table(sol, _run(sol, eps, s0, backend), {"seed": seed, "shocks": eps})


def simulate_batch(sol: StateSpaceSolution, horizon: int, n_paths: int, seed=0,
                   shock_cov=None) -> list[PathTable]:
    """Independent paths; path ``i`` uses child ``i`` of ``SeedSequence(seed).spawn``."""
    children = np.random.SeedSequence(seed).spawn(n_paths)
    return [simulate(sol, horizon=horizon, seed=c, shock_cov=shock_cov) for c in children]


# ---------------------------------------------------------------------------
# moments


def unconditional_variance(sol: StateSpaceSolution, shock_cov=None) -> np.ndarray:
    """Stationary covariance of ``z = [s; j]`` (model ordering).

    ``V_s = R V_s R' + Q S Q'`` and ``Var(z) = Gamma V_s Gamma' + D S D'``
    with ``Gamma = [I; P]`` and ``D = [0; G]``.
    """
    k = sol.k
    sig = np.eye(k) if shock_cov is None else np.atleast_2d(np.asarray(shock_cov, float))
    if sig.shape != (k, k):
        raise ShapeMismatch(f"shock covariance must be {k}x{k}")
    if sol.n_s and sol.spectral_radius() >= 1.0:
        raise NotStationary(f"spectral radius {sol.spectral_radius():.6g} >= 1")
    gam = sol.gamma
    d = np.vstack([np.zeros((sol.n_s, k)), sol.g_imp])
    if sol.n_s:
        vs = solve_discrete_lyapunov(sol.r, sol.q_imp @ sig @ sol.q_imp.T)
        v = gam @ vs @ gam.T
    else:
        v = np.zeros((sol.n, sol.n))
    v = v + d @ sig @ d.T
    return (v + v.T) / 2


def sunspot_state_variance(lam: np.ndarray, sigma_nu) -> np.ndarray:
    lam = np.atleast_2d(lam)
    if np.max(np.abs(np.linalg.eigvals(lam))) >= 1.0:
        raise NotStationary("sunspot transition is not stable")
    return solve_discrete_lyapunov(lam, np.atleast_2d(sigma_nu))


def sunspot_total_variance(fund: StateSpaceSolution, w_span, lam, sigma_nu,
                           shock_cov=None) -> np.ndarray:
    """Covariance of ``z^f + W xi`` from one Lyapunov solve on ``(s, xi)``.

    ``xi_{t+1} = Lambda xi_t + nu_{t+1}`` with ``nu`` independent of the
    fundamental shocks.
    """
    k, n_s = fund.k, fund.n_s
    w_span = np.atleast_2d(w_span)
    mdeg = w_span.shape[1]
    sig = np.eye(k) if shock_cov is None else np.atleast_2d(shock_cov)
    trans = np.zeros((n_s + mdeg, n_s + mdeg))
    trans[:n_s, :n_s] = fund.r
    trans[n_s:, n_s:] = lam
    inn = np.zeros_like(trans)
    inn[:n_s, :n_s] = fund.q_imp @ sig @ fund.q_imp.T
    inn[n_s:, n_s:] = sigma_nu
    vx = solve_discrete_lyapunov(trans, inn)
    obs = np.hstack([fund.gamma, w_span])
    d = np.vstack([np.zeros((n_s, k)), fund.g_imp])
    v = obs @ vx @ obs.T + d @ sig @ d.T
    return (v + v.T) / 2


# ---------------------------------------------------------------------------
# residual oracle


def _path_array(m: LinearREModel, path) -> np.ndarray:
    if isinstance(path, PathTable):
        try:
            return path.select(m.names).data
        except ValueError as exc:
            raise ShapeMismatch(f"path lacks model variables: {exc}") from exc
    z = np.atleast_2d(np.asarray(path, float))
    if z.shape[1] != m.n:
        raise ShapeMismatch(f"path has {z.shape[1]} columns, model has {m.n}")
    return z


def _shock_array(m: LinearREModel, shocks, horizon) -> np.ndarray:
    if shocks is None:
        return np.zeros((horizon, m.k))
    eps = np.atleast_2d(np.asarray(shocks, float))
    if eps.shape != (horizon, m.k):
        raise ShapeMismatch(f"shocks shape {eps.shape}, expected {(horizon, m.k)}")
    return eps


def solution_identity_residual(m: LinearREModel, sol: StateSpaceSolution) -> float:
    """Max-abs residual of the identities that make the law of motion solve the model."""
    if sol.n != m.n or sol.n_s != m.n_s or sol.k != m.k:
        raise ShapeMismatch("solution and model dimensions differ")
    gam, n_s = sol.gamma, sol.n_s
    r1 = m.a0 @ gam - m.a1 @ gam @ sol.r
    r2 = (m.a0 @ np.vstack([np.zeros((n_s, m.k)), sol.g_imp])
          - m.a1 @ gam @ sol.q_imp - m.b)
    ks, kj = sol.k_s, sol.k_j
    r3 = (m.a0 @ np.concatenate([np.zeros(n_s), kj])
          - m.a1 @ np.concatenate([ks, sol.p @ ks + kj]) - m.c)
    return float(max(np.abs(a).max(initial=0.0) for a in (r1, r2, r3)))


def period_residuals(models, z: np.ndarray, shocks: np.ndarray,
                     expectations: np.ndarray) -> np.ndarray:
    """Per-period infinity-norm of ``A0 z_t - A1 x_t - B e_t - c``.

    ``models`` is one model or a sequence with one model per period;
    ``expectations[t]`` is the value used for ``E_t z_{t+1}``.
    """
    horizon = z.shape[0]
    seq = models if isinstance(models, (list, tuple)) else [models] * horizon
    out = np.empty(horizon)
    for t in range(horizon):
        mt = seq[t]
        res = mt.a0 @ z[t] - mt.a1 @ expectations[t] - mt.b @ shocks[t] - mt.c
        out[t] = np.abs(res).max(initial=0.0)
    return out


def residual_check(m: LinearREModel, sol: StateSpaceSolution | None = None, *,
                   path=None, shocks=None) -> float:
    """Structural residual ``max_t ||A0 z_t - A1 E_t z_{t+1} - B e_t - c||_inf``.

    Modes
    -----
    ``residual_check(m, sol)``
        matrix identities of the law of motion.
    ``residual_check(m, sol, path=..., shocks=...)``
        along a path, with ``E_t z_{t+1}`` from the law of motion.
    ``residual_check(m, path=..., shocks=...)``
        perfect foresight, ``E_t z_{t+1} = z_{t+1}``, over ``t < T - 1``.
    """
    if path is None:
        if sol is None:
            raise ShapeMismatch("need a solution or a path")
        return solution_identity_residual(m, sol)
    z = _path_array(m, path)
    if shocks is None and isinstance(path, PathTable) and "shocks" in path.meta:
        shocks = path.meta["shocks"]
    eps = _shock_array(m, shocks, z.shape[0])
    if sol is None:
        if z.shape[0] < 2:
            return 0.0
        res = period_residuals(m, z[:-1], eps[:-1], z[1:])
        return float(res.max())
    n_s = m.n_s
    s_next = z[:, :n_s] @ sol.r.T + eps @ sol.q_imp.T + sol.k_s
    expect = np.hstack([s_next, s_next @ sol.p.T + sol.k_j])
    return float(period_residuals(m, z, eps, expect).max(initial=0.0))


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class DiffRow:
    variable: str
    max_abs_diff: float
    rmse: float


@dataclass(frozen=True)
class DiffReport:
    rows: tuple
    n_periods: int

    @property
    def overall_max(self) -> float:
        return max((r.max_abs_diff for r in self.rows), default=0.0)

    @property
    def overall_rmse(self) -> float:
        """RMSE pooled over every compared cell."""
        if not self.rows:
            return 0.0
        return float(np.sqrt(np.mean([r.rmse ** 2 for r in self.rows])))

    def row(self, name: str) -> DiffRow:
        for r in self.rows:
            if r.variable == name:
                return r
        raise KeyError(name)

    def to_text(self) -> str:
        width = max([len("variable")] + [len(r.variable) for r in self.rows])
        lines = [f"{'variable':<{width}}  {'max_abs_diff':>14}  {'rmse':>14}"]
        for r in self.rows:
            lines.append(f"{r.variable:<{width}}  {r.max_abs_diff:>14.6g}  {r.rmse:>14.6g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"n_periods": self.n_periods, "overall_max": self.overall_max,
               "overall_rmse": self.overall_rmse,
               "rows": [{"variable": r.variable, "max_abs_diff": r.max_abs_diff,
                         "rmse": r.rmse} for r in self.rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def compare_paths(a: PathTable, b: PathTable) -> DiffReport:
    """Per-variable max |a - b| and RMSE over shared periods and columns.

    Rows follow ``a``'s column order.
    """
    names = [n for n in a.names if n in b.names]
    ts, ia, ib = np.intersect1d(a.t, b.t, return_indices=True)
    if not names or ts.size == 0:
        raise NoOverlap("paths share no variables or no periods")
    rows = []
    for n in names:
        d = a.column(n)[ia] - b.column(n)[ib]
        mx = float(np.max(np.abs(d)))
        rmse = float(min(np.sqrt(np.mean(d * d)), mx))
        rows.append(DiffRow(n, mx, rmse))
    return DiffReport(tuple(rows), int(ts.size))
