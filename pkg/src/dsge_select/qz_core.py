"""Generalized Schur (QZ) factorization of the pencil (A0, A1).

Eigenvalues are transition roots: lambda solves det(A0 - lambda A1) = 0, so an
AR(1) state with persistence rho contributes the root rho, and a static
equation (zero column in A1) contributes an infinite root.

The factorization satisfies ``q @ A0 @ z = s_mat`` and ``q @ A1 @ z = t_mat``
with orthogonal ``q`` and ``z`` and real quasi-triangular ``s_mat`` (2x2
bumps carry complex-conjugate pairs) and triangular ``t_mat``.  The heavy
lifting is LAPACK's ``dgges`` (Hessenberg-triangular reduction + implicit
double-shift QZ, at most 30*n sweeps) and ``dtgsen`` (block swaps).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import linear_sum_assignment

from .errors import DegeneratePair, NoConvergence, SingularPencil, SwapIllConditioned
from .model_ir import LinearREModel


class EigClass(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    UNIT_ROOT = "unit-root"
    INFINITE = "infinite"


@dataclass(frozen=True)
class QZOptions:
    tol_unit: float = 1e-6
    tol_inf: float = 1e-12  # relative to the pencil norm
    swap_tol: float = 1e-8


DEFAULT_OPTIONS = QZOptions()


@dataclass(frozen=True)
class GeneralizedEigenvalue:
    alpha: complex
    beta_coef: float
    modulus: float
    cls: EigClass

    @property
    def value(self) -> complex:
        if self.beta_coef == 0.0:
            return complex(np.inf, 0.0)
        return self.alpha / self.beta_coef

    @property
    def phase(self) -> float:
        """Angle in [0, 2*pi); used for deterministic tie-breaking."""
        return float(np.angle(self.alpha) % (2 * np.pi))


def classify(alpha, beta_coef, tol_unit=1e-6, tol_inf=1e-12) -> EigClass:
    """Classify the generalized eigenvalue ``alpha / beta_coef`` against the unit circle.

    The unit-root band is ``|modulus - 1| <= tol_unit``.  ``beta_coef <= tol_inf``
    marks an infinite root; both inputs below ``tol_inf`` is a degenerate pair
    (the pencil is singular at this position).
    """
    a = abs(complex(alpha))
    bc = abs(float(beta_coef))
    if a <= tol_inf and bc <= tol_inf:
        raise DegeneratePair(f"degenerate pair ({alpha}, {beta_coef})")
    if bc <= tol_inf:
        return EigClass.INFINITE
    mod = a / bc
    if mod < 1.0 - tol_unit:
        return EigClass.STABLE
    if mod > 1.0 + tol_unit:
        return EigClass.UNSTABLE
    return EigClass.UNIT_ROOT


@dataclass(frozen=True, eq=False)
class QZFactorization:
    q: np.ndarray
    z: np.ndarray
    s_mat: np.ndarray
    t_mat: np.ndarray
    eigs: tuple
    n_stable: int
    a0: np.ndarray
    a1: np.ndarray
    options: QZOptions = DEFAULT_OPTIONS

    @property
    def n(self) -> int:
        return self.s_mat.shape[0]

    @property
    def classes(self) -> list:
        return [e.cls for e in self.eigs]

    def count(self, cls: EigClass) -> int:
        return sum(e.cls is cls for e in self.eigs)

    @property
    def blocks(self) -> list[tuple[int, ...]]:
        """Diagonal blocks as index tuples: 1x1 real roots, 2x2 conjugate pairs."""
        out, i, n = [], 0, self.n
        while i < n:
            if i + 1 < n and self.s_mat[i + 1, i] != 0.0:
                out.append((i, i + 1))
                i += 2
            else:
                out.append((i,))
                i += 1
        return out

    def is_stable_first(self) -> bool:
        cls = self.classes
        return all(c is EigClass.STABLE for c in cls[: self.n_stable]) and not any(
            c is EigClass.STABLE for c in cls[self.n_stable:])

    def reconstruction_error(self) -> tuple[float, float]:
        """Relative Frobenius errors of the two reconstructions."""
        e0 = np.linalg.norm(self.q @ self.a0 @ self.z - self.s_mat)
        e1 = np.linalg.norm(self.q @ self.a1 @ self.z - self.t_mat)
        return (e0 / max(np.linalg.norm(self.a0), 1e-300),
                e1 / max(np.linalg.norm(self.a1), 1e-300))

    def unitarity_error(self) -> tuple[float, float]:
        eye = np.eye(self.n)
        return (float(np.linalg.norm(self.q.T @ self.q - eye)),
                float(np.linalg.norm(self.z.T @ self.z - eye)))


def _eigs_from_lapack(alphar, alphai, beta, a0, a1, opts):
    scale0 = max(np.linalg.norm(a0), 1.0)
    scale1 = max(np.linalg.norm(a1), 1.0)
    out = []
    for ar, ai, bt in zip(alphar, alphai, beta):
        alpha = complex(ar, ai)
        if bt < 0:
            alpha, bt = -alpha, -bt
        if abs(alpha) <= opts.tol_inf * scale0 and bt <= opts.tol_inf * scale1:
            raise SingularPencil(
                "pencil is singular: det(A0 - lambda A1) vanishes identically")
        if bt <= opts.tol_inf * scale1:
            out.append(GeneralizedEigenvalue(complex(1.0, 0.0), 0.0, float("inf"),
                                             EigClass.INFINITE))
            continue
        lam = alpha / bt
        cls = classify(lam, 1.0, opts.tol_unit, opts.tol_inf)
        out.append(GeneralizedEigenvalue(lam, 1.0, float(abs(lam)), cls))
    return tuple(out)


def qz_pencil(a0, a1, options: QZOptions | None = None, reorder: bool = True) -> QZFactorization:
    opts = options or DEFAULT_OPTIONS
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    n = a0.shape[0]
    if n == 0:
        empty = np.zeros((0, 0))
        return QZFactorization(empty, empty, empty, empty, (), 0, a0, a1, opts)
    s, t, _sdim, alphar, alphai, beta, vsl, vsr, _work, info = lapack.dgges(
        lambda *_: 0, a0, a1, jobvsl=1, jobvsr=1, sort_t=0)
    if info < 0:
        raise ValueError(f"dgges: illegal argument {-info}")
    if 0 < info <= n:
        raise NoConvergence(f"QZ iteration failed to converge (dgges info={info})")
    if info > n:
        raise NoConvergence(f"dgges failed (info={info})")
    eigs = _eigs_from_lapack(alphar, alphai, beta, a0, a1, opts)
    f = QZFactorization(vsl.T.copy(), vsr, s, t, eigs,
                        sum(e.cls is EigClass.STABLE for e in eigs), a0, a1, opts)
    return reorder_stable_first(f) if reorder else f


def qz_decompose(m: LinearREModel, options: QZOptions | None = None,
                 reorder: bool = True) -> QZFactorization:
    """QZ-factorize the model pencil; by default stable roots lead.

    Raises
    ------
    SingularPencil
        Some diagonal pair is ~(0, 0).
    NoConvergence
        LAPACK exhausted its sweep budget.
    """
    return qz_pencil(m.a0, m.a1, options, reorder=reorder)


def _ray_distance(e1: GeneralizedEigenvalue, e2: GeneralizedEigenvalue) -> float:
    a1, b1, a2, b2 = e1.alpha, e1.beta_coef, e2.alpha, e2.beta_coef
    num = abs(a1 * b2 - a2 * b1)
    den = np.sqrt(abs(a1) ** 2 + b1 ** 2) * np.sqrt(abs(a2) ** 2 + b2 ** 2)
    return float(num / den)


def same_spectrum(e1, e2, tol) -> bool:
    if len(e1) != len(e2):
        return False
    if not e1:
        return True
    cost = np.array([[_ray_distance(x, y) for y in e2] for x in e1])
    r, c = linear_sum_assignment(cost)
    return bool(cost[r, c].max() <= tol)


def reorder_select(f: QZFactorization, select) -> QZFactorization:
    """Move the eigenvalues flagged in ``select`` to the leading positions.

    Relative order inside each group is preserved.  Selecting one member of
    a conjugate pair selects both.
    """
    select = np.asarray(select, dtype=bool)
    if f.n == 0 or select.all() or not select.any() or (
            select[: select.sum()].all()):
        return f
    s, t, alphar, alphai, beta, qs, zs, _m, _pl, _pr, _dif, info = lapack.dtgsen(
        select.astype(np.int32), f.s_mat, f.t_mat, f.q.T, f.z, ijob=0)
    if info != 0:
        raise SwapIllConditioned(f"dtgsen could not swap blocks (info={info})")
    eigs = _eigs_from_lapack(alphar, alphai, beta, f.a0, f.a1, f.options)
    out = QZFactorization(qs.T.copy(), zs, s, t, eigs,
                          sum(e.cls is EigClass.STABLE for e in eigs),
                          f.a0, f.a1, f.options)
    tol = f.options.swap_tol
    if max(out.reconstruction_error()) > 1e2 * tol or not same_spectrum(f.eigs, out.eigs, tol):
        raise SwapIllConditioned("block exchange lost more than the allowed relative accuracy")
    return out


def reorder_stable_first(f: QZFactorization) -> QZFactorization:
    """Reorder so every Stable root precedes every non-Stable one."""
    if f.is_stable_first():
        return f
    out = reorder_select(f, [e.cls is EigClass.STABLE for e in f.eigs])
    if not out.is_stable_first():  # pragma: no cover - defensive
        raise SwapIllConditioned("reordering did not produce a stable-first ordering")
    return out


def eigenvalue_table(f: QZFactorization) -> list[dict]:
    """Rows ``index, re, im, modulus, class`` for CSV/JSON diagnostics."""
    rows = []
    for i, e in enumerate(f.eigs):
        v = e.value
        rows.append({"index": i, "re": float(v.real), "im": float(v.imag) if np.isfinite(v.real) else 0.0,
                     "modulus": e.modulus, "class": e.cls.value})
    return rows
