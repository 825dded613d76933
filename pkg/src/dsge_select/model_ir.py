"""Linear rational-expectations models in canonical form.

A model is the system

    A0 z_t = A1 E_t[z_{t+1}] + B eps_t + c

with z_t = [s_t; j_t]: the first ``n_s`` entries are predetermined, the
remaining ones are jumps.  Models are immutable; the builders below produce
the New Keynesian examples and the scalar forward-looking equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParams,
    NonFiniteEntry,
    ParseError,
    SchemaVersionMismatch,
)

SCHEMA_VERSION = 1


def _frozen(a, ndim, name):
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 1 and ndim == 2:
        arr = arr.reshape(-1, 1) if name == "b" else arr.reshape(1, -1)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LinearREModel:
    """Validated canonical-form model. Build it with :func:`new_model`."""

    names: tuple[str, ...]
    a0: np.ndarray
    a1: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n_s: int
    shock_names: tuple[str, ...]
    params: dict = field(default_factory=dict)
    display_order: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def n_j(self) -> int:
        return self.n - self.n_s

    @property
    def k(self) -> int:
        return self.b.shape[1]

    @property
    def output_order(self) -> tuple[str, ...]:
        return self.display_order or self.names

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __eq__(self, other):
        if not isinstance(other, LinearREModel):
            return NotImplemented
        return (
            self.names == other.names
            and self.n_s == other.n_s
            and self.shock_names == other.shock_names
            and self.params == other.params
            and self.display_order == other.display_order
            and all(
                np.array_equal(x, y)
                for x, y in ((self.a0, other.a0), (self.a1, other.a1),
                             (self.b, other.b), (self.c, other.c))
            )
        )

    __hash__ = None

    def replace(self, **changes) -> "LinearREModel":
        kw = dict(a0=self.a0, a1=self.a1, b=self.b, c=self.c, n_s=self.n_s,
                  names=self.names, shock_names=self.shock_names,
                  params=self.params, display_order=self.display_order)
        kw.update(changes)
        return new_model(**kw)


def new_model(a0, a1, b, c=None, n_s=0, names=None, shock_names=None,
              params=None, display_order=None) -> LinearREModel:
    """Validate shapes and finiteness and return a :class:`LinearREModel`.

    Raises
    ------
    DimensionMismatch
        Non-square or inconsistent matrices, bad ``n_s`` or label lengths.
    NonFiniteEntry
        Any NaN/Inf entry.
    """
    a0 = _frozen(a0, 2, "a0")
    a1 = _frozen(a1, 2, "a1")
    n = a0.shape[0]
    if a0.shape != (n, n) or a1.shape != (n, n):
        raise DimensionMismatch(f"a0 {a0.shape} and a1 {a1.shape} must be square and equal")
    if b is None:
        b = np.zeros((n, 0))
    b = _frozen(b, 2, "b")
    if b.shape[0] != n:
        raise DimensionMismatch(f"b has {b.shape[0]} rows, expected {n}")
    c = _frozen(np.zeros(n) if c is None else c, 1, "c")
    if c.shape != (n,):
        raise DimensionMismatch(f"c has shape {c.shape}, expected ({n},)")
    n_s = int(n_s)
    if not 0 <= n_s <= n:
        raise DimensionMismatch(f"n_s={n_s} outside [0, {n}]")
    names = tuple(names) if names is not None else tuple(f"z{i}" for i in range(n))
    if len(names) != n or len(set(names)) != n:
        raise DimensionMismatch("names must be n distinct identifiers")
    k = b.shape[1]
    shock_names = tuple(shock_names) if shock_names is not None else tuple(f"e{i}" for i in range(k))
    if len(shock_names) != k:
        raise DimensionMismatch(f"{len(shock_names)} shock names for {k} shocks")
    if display_order is not None:
        display_order = tuple(display_order)
        if sorted(display_order) != sorted(names):
            raise DimensionMismatch("display_order must be a permutation of names")
    params = {str(key): float(v) for key, v in (params or {}).items()}
    return LinearREModel(names, a0, a1, b, c, n_s, shock_names, params, display_order)


def model_from_ordering(a0, a1, b, c, names, predetermined, shock_names=None,
                        params=None) -> LinearREModel:
    """Build a model whose columns are given in an arbitrary user order.

    Columns are permuted so the ``predetermined`` variables come first; the
    user ordering is kept as ``display_order`` for output labelling.
    """
    names = list(names)
    missing = [p for p in predetermined if p not in names]
    if missing:
        raise DimensionMismatch(f"unknown predetermined variables {missing}")
    order = [names.index(p) for p in predetermined]
    order += [i for i in range(len(names)) if names[i] not in predetermined]
    a0 = np.asarray(a0, float)[:, order]
    a1 = np.asarray(a1, float)[:, order]
    return new_model(a0, a1, b, c, n_s=len(predetermined),
                     names=[names[i] for i in order], shock_names=shock_names,
                     params=params, display_order=names)


# ---------------------------------------------------------------------------
# New Keynesian builders


@dataclass(frozen=True)
class NKParams:
    sigma: float = 1.0
    beta: float = 0.99
    kappa: float = 0.02
    phi_pi: float = 1.5
    phi_y: float = 0.0
    rho: float = 0.9

    def __post_init__(self):
        vals = (self.sigma, self.beta, self.kappa, self.phi_pi, self.phi_y, self.rho)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParams("NK parameters must be finite")
        if not 0.0 < self.beta < 1.0:
            raise InvalidParams(f"beta={self.beta} must lie in (0, 1)")
        if self.kappa <= 0:
            raise InvalidParams(f"kappa={self.kappa} must be positive")
        if self.sigma <= 0:
            raise InvalidParams(f"sigma={self.sigma} must be positive")
        if self.phi_pi < 0 or self.phi_y < 0:
            raise InvalidParams("policy responses must be non-negative")
        if not 0.0 <= self.rho < 1.0:
            raise InvalidParams(f"rho={self.rho} must lie in [0, 1)")

    def as_dict(self) -> dict:
        return dict(sigma=self.sigma, beta=self.beta, kappa=self.kappa,
                    phi_pi=self.phi_pi, phi_y=self.phi_y, rho=self.rho)

    def with_(self, **kw) -> "NKParams":
        d = self.as_dict()
        d.update(kw)
        return NKParams(**d)


def nk_model(p: NKParams | None = None, literal_paper_matrices: bool = False) -> LinearREModel:
    """Three-equation New Keynesian model (IS, Phillips curve, Taylor rule, AR(1) natural rate).

    The default encoding orders variables ``(rn, y, pi)`` with ``rn``
    predetermined and writes the natural-rate row as the expectational
    identity ``E_t rn_{t+1} = rho rn_t + eps_t``, so the state contributes the
    transition root ``rho``.

    With ``literal_paper_matrices`` the matrices are emitted exactly as
    commonly printed, in the order ``(y, pi, rn)``, where the shock row reads
    ``rn_t = rho E_t rn_{t+1} + eps_t``.  That row is forward-looking, so the
    literal model declares no predetermined variable (``n_s = 0``); it is
    kept for documentation checks, not for dynamics.
    """
    p = p or NKParams()
    s, b_, k, fp, fy, rho = p.sigma, p.beta, p.kappa, p.phi_pi, p.phi_y, p.rho
    if literal_paper_matrices:
        a0 = [[1 + fy / s, fp / s, -1 / s],
              [-k, 1, 0],
              [0, 0, 1]]
        a1 = [[1, 1 / s, 0],
              [0, b_, 0],
              [0, 0, rho]]
        return new_model(a0, a1, [[0], [0], [1]], n_s=0, names=("y", "pi", "rn"),
                         shock_names=("eps_rn",), params=p.as_dict())
    a0 = [[rho, 0, 0],
          [-1 / s, 1 + fy / s, fp / s],
          [0, -k, 1]]
    a1 = [[1, 0, 0],
          [0, 1, 1 / s],
          [0, 0, b_]]
    return new_model(a0, a1, [[-1], [0], [0]], n_s=1, names=("rn", "y", "pi"),
                     shock_names=("eps_rn",), params=p.as_dict(),
                     display_order=("y", "pi", "rn"))


def nk_rate_model(p: NKParams | None = None, zlb: bool = False) -> LinearREModel:
    """NK model with the nominal rate ``R`` (in levels) as an explicit variable.

    Variables ``(rn, y, pi, R)``; ``y``, ``pi``, ``rn`` are deviations while
    ``R`` is the level of the policy rate, so the steady-state rate
    ``1/beta - 1`` enters through the constant ``c``.  With ``zlb`` the Taylor
    row is replaced by ``R_t = 0``.
    """
    p = p or NKParams()
    s, b_, k, fp, fy, rho = p.sigma, p.beta, p.kappa, p.phi_pi, p.phi_y, p.rho
    r_ss = 1.0 / b_ - 1.0
    a0 = np.array([[rho, 0, 0, 0],
                   [-1 / s, 1, 0, 1 / s],
                   [0, -k, 1, 0],
                   [0, -fy, -fp, 1]], dtype=float)
    a1 = np.array([[1, 0, 0, 0],
                   [0, 1, 1 / s, 0],
                   [0, 0, b_, 0],
                   [0, 0, 0, 0]], dtype=float)
    c = np.array([0, r_ss / s, 0, r_ss])
    if zlb:
        a0[3] = [0, 0, 0, 1]
        c[3] = 0.0
    params = dict(p.as_dict(), r_ss=r_ss)
    return new_model(a0, a1, [[-1], [0], [0], [0]], c, n_s=1,
                     names=("rn", "y", "pi", "R"), shock_names=("eps_rn",),
                     params=params, display_order=("y", "pi", "R", "rn"))


def scalar_forward_model(a: float = 0.5) -> LinearREModel:
    """``y_t = a E_t[y_{t+1}] + eps_t`` with no predetermined variable."""
    return new_model([[1.0]], [[a]], [[1.0]], n_s=0, names=("y",),
                     shock_names=("eps",), params={"a": a})


def _threshold_inputs(p, beta, kappa, phi_y):
    beta = p.beta if beta is None else beta
    kappa = p.kappa if kappa is None else kappa
    phi_y = p.phi_y if phi_y is None else phi_y
    if kappa <= 0:
        raise InvalidParams("kappa must be positive")
    return beta, kappa, phi_y


def taylor_threshold(p: NKParams | None = None, *, beta=None, kappa=None, phi_y=None) -> float:
    """``1 + (1 - beta) / kappa * phi_y``: the printed Taylor-principle threshold.

    Keyword overrides allow boundary values outside :class:`NKParams`
    (e.g. ``beta=1``).
    """
    beta, kappa, phi_y = _threshold_inputs(p or NKParams(), beta, kappa, phi_y)
    return 1.0 + (1.0 - beta) / kappa * phi_y


def determinacy_boundary(p: NKParams | None = None, *, beta=None, kappa=None, phi_y=None) -> float:
    """phi_pi at which the NK pencil loses saddle-path determinacy.

    A root crosses the unit circle where kappa (phi_pi - 1) + (1 - beta) phi_y = 0,
    i.e. ``phi_pi = 1 - (1 - beta) / kappa * phi_y``.
    """
    beta, kappa, phi_y = _threshold_inputs(p or NKParams(), beta, kappa, phi_y)
    return 1.0 - (1.0 - beta) / kappa * phi_y


# ---------------------------------------------------------------------------
# JSON IO

_REQUIRED = ("schema_version", "names", "shock_names", "n_s", "a0", "a1", "b", "c", "params")


def model_to_dict(m: LinearREModel) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "names": list(m.names),
        "shock_names": list(m.shock_names),
        "n_s": m.n_s,
        "a0": m.a0.tolist(),
        "a1": m.a1.tolist(),
        "b": m.b.tolist(),
        "c": m.c.tolist(),
        "params": dict(m.params),
    }
    if m.display_order is not None:
        d["display_order"] = list(m.display_order)
    return d


def model_from_dict(d: dict) -> LinearREModel:
    if not isinstance(d, dict):
        raise ParseError("model document must be a JSON object")
    for key in _REQUIRED:
        if key not in d:
            raise ParseError(f"missing field {key!r}")
    if d["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"schema_version {d['schema_version']!r} not supported (expected {SCHEMA_VERSION})")
    n = len(d["names"])
    b = d["b"]
    if isinstance(b, list) and len(b) == n and all(isinstance(r, list) and not r for r in b):
        b = np.zeros((n, 0))
    try:
        return new_model(d["a0"], d["a1"], b, d["c"], n_s=d["n_s"], names=d["names"],
                         shock_names=d["shock_names"], params=d["params"],
                         display_order=d.get("display_order"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (DimensionMismatch, NonFiniteEntry)):
            raise
        raise ParseError(f"malformed model document: {exc}") from exc


def save_model(m: LinearREModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def load_model(path) -> LinearREModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(d)
