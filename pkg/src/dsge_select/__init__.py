"""Equilibrium selection for linear rational-expectations models.

The pipeline is: build a :class:`LinearREModel`, factorize its pencil with
:func:`qz_decompose`, and hand it to a selector (:func:`select_bk`,
:func:`select_mv`, :func:`select_fa`).  :mod:`dsge_select.occbin` adds a
two-regime perfect-foresight solver and :mod:`dsge_select.sim_verify` the
residual oracle, simulation and path comparison.
"""

from . import errors
from .kernels import BACKEND as KERNEL_BACKEND
from .model_ir import (
    LinearREModel,
    NKParams,
    determinacy_boundary,
    load_model,
    model_from_ordering,
    new_model,
    nk_model,
    nk_rate_model,
    save_model,
    scalar_forward_model,
    taylor_threshold,
)
from .occbin import (
    OccbinPath,
    RegimeSpec,
    check_complementarity,
    nk_zlb_spec,
    piecewise_solve,
    regime_update,
    solve_occbin,
    zlb_experiment,
)
from .qz_core import (
    EigClass,
    GeneralizedEigenvalue,
    QZFactorization,
    QZOptions,
    classify,
    qz_decompose,
    qz_pencil,
    reorder_select,
    reorder_stable_first,
)
from .selectors import (
    Diagnostics,
    FiscalParams,
    Grid,
    MapTable,
    SelectionOutcome,
    SolveOptions,
    StateSpaceSolution,
    Status,
    determinacy_map,
    diagnose,
    policy_matrix,
    select_bk,
    select_fa,
    select_mv,
)
from .sim_verify import (
    DiffReport,
    PathTable,
    compare_paths,
    impulse_response,
    residual_check,
    simulate,
    unconditional_variance,
)

__version__ = "0.1.0"
