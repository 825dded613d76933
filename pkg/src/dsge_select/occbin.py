"""Two-regime piecewise-linear perfect-foresight solver (OccBin style).

A :class:`RegimeSpec` pairs a reference model (constraint slack) with an
alternative model (constraint binding) and the scalar constraint
``d . z_t + e``: the reference regime applies iff the value is strictly
positive.  :func:`solve_occbin` alternates between solving the
time-varying linear system for a guessed regime sequence and updating the
guess from the resulting path, until the sequence reproduces itself.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    CycleDetected,
    DimensionMismatch,
    MaxIterations,
    ReferenceNotDeterminate,
    ShapeMismatch,
    SingularRecursionStep,
    TerminalNotSlack,
)
from .model_ir import LinearREModel, NKParams, nk_rate_model
from .selectors import SolveOptions, StateSpaceSolution, Status, select_bk, select_mv
from .sim_verify import PathTable, period_residuals

REFERENCE = 0
ALTERNATIVE = 1
TERMINAL_WINDOW = 10


@dataclass(frozen=True, eq=False)
class RegimeSpec:
    reference: LinearREModel
    alternative: LinearREModel
    d: np.ndarray
    e: float = 0.0

    def __post_init__(self):
        r, a = self.reference, self.alternative
        if r.names != a.names or r.n_s != a.n_s or r.shock_names != a.shock_names:
            raise DimensionMismatch("regimes must share names, n_s and shocks")
        d = np.asarray(self.d, dtype=float).reshape(-1)
        if d.shape != (r.n,):
            raise DimensionMismatch(f"constraint weights need length {r.n}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "e", float(self.e))

    def model(self, regime: int) -> LinearREModel:
        return self.alternative if regime == ALTERNATIVE else self.reference

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) @ self.d + self.e

    def reference_solution(self, dynare_compat: bool = False,
                           options: SolveOptions | None = None) -> StateSpaceSolution:
        out = (select_mv if dynare_compat else select_bk)(self.reference, options)
        if out.status in (Status.DETERMINATE, Status.MV_SELECTED):
            return out.solution
        raise ReferenceNotDeterminate(f"reference regime: {out.message}")


def nk_zlb_spec(p: NKParams | None = None) -> RegimeSpec:
    """NK model with ``R_t`` bounded below by zero."""
    ref = nk_rate_model(p)
    alt = nk_rate_model(p, zlb=True)
    d = np.zeros(ref.n)
    d[ref.index("R")] = 1.0
    return RegimeSpec(ref, alt, d, 0.0)


@dataclass(frozen=True, eq=False)
class OccbinPath:
    horizon: int
    z_path: np.ndarray
    regimes: np.ndarray
    iterations: int
    converged: bool
    history: tuple
    names: tuple
    shocks: np.ndarray
    z_terminal: np.ndarray
    display_order: tuple | None = None
    meta: dict = field(default_factory=dict)

    def spells(self) -> list[tuple[int, int]]:
        """Inclusive ``(start, end)`` periods of each binding spell."""
        out, start = [], None
        for t, r in enumerate(self.regimes):
            if r == ALTERNATIVE and start is None:
                start = t
            elif r != ALTERNATIVE and start is not None:
                out.append((start, t - 1))
                start = None
        if start is not None:
            out.append((start, len(self.regimes) - 1))
        return out

    def to_table(self) -> PathTable:
        order = self.display_order or self.names
        idx = [self.names.index(n) for n in order]
        return PathTable(np.arange(self.horizon), tuple(order), self.z_path[:, idx])

    def metadata(self) -> dict:
        return {"iterations": self.iterations, "converged": self.converged,
                "horizon": self.horizon, "spells": [list(s) for s in self.spells()],
                "history": list(self.history), **self.meta}


def regime_update(z_path, rs: RegimeSpec) -> np.ndarray:
    """Reference iff ``d . z_t + e > 0``; the boundary counts as binding."""
    z = np.atleast_2d(np.asarray(z_path, float))
    if z.shape[1] != rs.reference.n:
        raise ShapeMismatch(f"path has {z.shape[1]} columns, expected {rs.reference.n}")
    return np.where(rs.constraint_values(z) > 0.0, REFERENCE, ALTERNATIVE).astype(np.int8)


def _shock_path(rs: RegimeSpec, shock_path, horizon):
    k = rs.reference.k
    if shock_path is None:
        return np.zeros((horizon, k))
    eps = np.atleast_2d(np.asarray(shock_path, float))
    if eps.shape[1] != k or eps.shape[0] > horizon:
        raise ShapeMismatch(f"shock path shape {eps.shape} incompatible with horizon {horizon}")
    out = np.zeros((horizon, k))
    out[: eps.shape[0]] = eps
    return out


def _piecewise(regimes, rs: RegimeSpec, eps, s0, ref: StateSpaceSolution):
    regimes = np.asarray(regimes)
    horizon = regimes.shape[0]
    m = rs.reference
    n, n_s, n_j = m.n, m.n_s, m.n_j
    if horizon == 0:
        return np.zeros((0, n)), np.zeros(n)
    if regimes[-1] != REFERENCE:
        raise TerminalNotSlack("regime sequence must end in the reference regime")
    gam = np.vstack([np.eye(n_s), ref.p])
    gcon = np.concatenate([np.zeros(n_s), ref.k_j])
    f = np.empty((horizon, n, n_s))
    h = np.empty((horizon, n))
    for t in range(horizon - 1, -1, -1):
        mt = rs.model(regimes[t])
        mat = np.hstack([mt.a0[:, n_s:], -mt.a1 @ gam])
        rhs = np.column_stack([-mt.a0[:, :n_s], mt.a1 @ gcon + mt.b @ eps[t] + mt.c])
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularRecursionStep(f"period {t}: coefficient matrix is singular (cond={cond:.2e})")
        sol = np.linalg.solve(mat, rhs)
        f[t], h[t] = sol[:, :n_s], sol[:, n_s]
        gam = np.vstack([np.eye(n_s), f[t, :n_j]])
        gcon = np.concatenate([np.zeros(n_s), h[t, :n_j]])
    z = kernels.forward_affine(f, h, s0)
    s_end = f[-1, n_j:] @ z[-1, :n_s] + h[-1, n_j:]
    z_end = np.concatenate([s_end, ref.p @ s_end + ref.k_j])
    return z, z_end


def _initial_state(rs, s0, ref):
    if s0 is None:
        return ref.steady_state()[: rs.reference.n_s]
    s0 = np.asarray(s0, float).reshape(-1)
    if s0.shape != (rs.reference.n_s,):
        raise ShapeMismatch(f"initial state needs length {rs.reference.n_s}")
    return s0


def piecewise_solve(regimes, rs: RegimeSpec, shock_path=None, horizon: int | None = None,
                    s0=None, dynare_compat: bool = False) -> np.ndarray:
    """Perfect-foresight path for a fixed regime sequence.

    Each period's structural equation, with that period's regime matrices,
    holds exactly given next period's value; after the horizon the path
    follows the reference solution.

    Parameters
    ----------
    regimes : (T,) array of 0 (reference) / 1 (alternative).
    shock_path : (T0, k) array, T0 <= T, zero-padded.
    s0 : initial predetermined state; defaults to the reference steady state.
    """
    regimes = np.asarray(regimes, dtype=np.int8)
    horizon = regimes.shape[0] if horizon is None else horizon
    if regimes.shape != (horizon,):
        raise ShapeMismatch("regime sequence length must equal the horizon")
    ref = rs.reference_solution(dynare_compat)
    eps = _shock_path(rs, shock_path, horizon)
    return _piecewise(regimes, rs, eps, _initial_state(rs, s0, ref), ref)[0]


def _digest(regimes: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(regimes, dtype=np.int8).tobytes()).hexdigest()[:16]


def solve_occbin(rs: RegimeSpec, shock_path=None, horizon: int = 200, s0=None,
                 max_iter: int = 100, guess=None, dynare_compat: bool = False) -> OccbinPath:
    """Iterate regime guess -> path -> regime update to a fixed point.

    Raises
    ------
    TerminalNotSlack
        The constraint binds within the last ``TERMINAL_WINDOW`` periods.
    CycleDetected
        A previously visited regime sequence recurs (period >= 2).
    MaxIterations
        ``max_iter`` updates without convergence.
    """
    ref = rs.reference_solution(dynare_compat)
    eps = _shock_path(rs, shock_path, horizon)
    s0 = _initial_state(rs, s0, ref)
    regimes = (np.zeros(horizon, dtype=np.int8) if guess is None
               else np.asarray(guess, dtype=np.int8).copy())
    if regimes.shape != (horizon,):
        raise ShapeMismatch("guess length must equal the horizon")
    history = [_digest(regimes)]
    for it in range(1, max_iter + 1):
        z, z_end = _piecewise(regimes, rs, eps, s0, ref)
        new = regime_update(z, rs)
        if np.array_equal(new, regimes):
            return OccbinPath(horizon, z, regimes, it, True, tuple(history), rs.reference.names,
                              eps, z_end, rs.reference.display_order)
        if np.any(new[-TERMINAL_WINDOW:] == ALTERNATIVE):
            raise TerminalNotSlack(
                f"constraint binds within the last {TERMINAL_WINDOW} of {horizon} periods; "
                "increase the horizon")
        digest = _digest(new)
        if digest in history:
            period = len(history) - history.index(digest)
            raise CycleDetected(f"regime sequence cycles with period {period}",
                                period, history + [digest])
        history.append(digest)
        regimes = new
    raise MaxIterations(f"no fixed point after {max_iter} iterations", history)


def unconstrained_path(rs: RegimeSpec, shock_path=None, horizon: int = 200, s0=None,
                       dynare_compat: bool = False) -> OccbinPath:
    """Reference-regime path, ignoring the constraint."""
    ref = rs.reference_solution(dynare_compat)
    eps = _shock_path(rs, shock_path, horizon)
    regimes = np.zeros(horizon, dtype=np.int8)
    z, z_end = _piecewise(regimes, rs, eps, _initial_state(rs, s0, ref), ref)
    return OccbinPath(horizon, z, regimes, 1, True, (_digest(regimes),), rs.reference.names,
                      eps, z_end, rs.reference.display_order, {"constraint": False})


def path_residuals(path: OccbinPath, rs: RegimeSpec) -> np.ndarray:
    """Per-period structural residuals under each period's own regime."""
    z = path.z_path
    nxt = np.vstack([z[1:], path.z_terminal[None, :]])
    models = [rs.model(r) for r in path.regimes]
    return period_residuals(models, z, path.shocks, nxt)


@dataclass(frozen=True)
class ComplementarityReport:
    slack: np.ndarray
    violation: np.ndarray
    max_violation: float
    binding_gap: float
    switches: tuple

    @property
    def ok(self) -> bool:
        return self.max_violation <= 1e-8 and self.binding_gap <= 1e-8


def check_complementarity(path: OccbinPath, rs: RegimeSpec) -> ComplementarityReport:
    """Slack ``d . z_t + e`` per period and its violations.

    Reference periods need non-negative slack; binding periods need the
    constraint to hold with equality (``binding_gap`` is the largest
    ``|slack|`` there, and positive slack in a binding period also counts as a
    violation).
    """
    slack = rs.constraint_values(path.z_path)
    alt = path.regimes == ALTERNATIVE
    viol = np.where(alt, np.maximum(slack, 0.0), np.maximum(-slack, 0.0))
    gap = float(np.max(np.abs(slack[alt]))) if alt.any() else 0.0
    switches = tuple(int(t) for t in np.flatnonzero(np.diff(path.regimes.astype(int))) + 1)
    return ComplementarityReport(slack, viol, float(viol.max(initial=0.0)), gap, switches)


def zlb_experiment(p: NKParams | None = None, shock: float = 0.01, horizon: int = 200,
                   constraint: bool = True, dynare_compat: bool = False,
                   max_iter: int = 100) -> tuple[OccbinPath, RegimeSpec]:
    """Natural-rate drop of size ``shock`` under a zero bound on ``R``.

    The natural rate starts at ``-shock`` (a positive ``shock`` lowers it)
    and decays at rate ``rho``; everything else starts at steady state.
    """
    rs = nk_zlb_spec(p)
    s0 = np.array([-shock])
    if not constraint:
        return unconstrained_path(rs, None, horizon, s0, dynare_compat), rs
    path = solve_occbin(rs, None, horizon, s0, max_iter=max_iter, dynare_compat=dynare_compat)
    return path, rs
