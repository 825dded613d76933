import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsge_select import NKParams, nk_model, qz_decompose, qz_pencil, reorder_stable_first
from dsge_select.errors import DegeneratePair, SingularPencil
from dsge_select.model_ir import new_model
from dsge_select.qz_core import EigClass, classify, eigenvalue_table, reorder_select
from dsge_select.selectors import augment_fiscal, FiscalParams
from oracles import match_multisets, nk_roots_closed_form, pencil_roots_mp


def moduli(f):
    return [e.modulus for e in f.eigs]


def test_diagonal_pencil():
    f = qz_decompose(new_model(np.diag([0.5, 2.0]), np.eye(2), np.zeros((2, 1)), n_s=1))
    assert moduli(f) == pytest.approx([0.5, 2.0])
    assert f.n_stable == 1


def test_reorder_diagonal():
    f = qz_pencil(np.diag([2.0, 0.5]), np.eye(2), reorder=False)
    assert moduli(f) == pytest.approx([2.0, 0.5])
    g = reorder_stable_first(f)
    assert moduli(g) == pytest.approx([0.5, 2.0])
    assert g.n_stable == 1 and g.is_stable_first()


def test_reorder_idempotent():
    f = qz_pencil(np.diag([0.3, 0.5, 4.0]), np.eye(3))
    assert reorder_stable_first(f) is f


def test_infinite_root():
    f = qz_pencil(np.eye(2), np.diag([1.0, 0.0]))
    assert f.count(EigClass.INFINITE) == 1
    assert f.n_stable == 0


def test_nk_determinate_roots():
    p = NKParams()
    f = qz_decompose(nk_model(p))
    expected = nk_roots_closed_form(p.sigma, p.beta, p.kappa, p.phi_pi, p.phi_y, p.rho)
    assert match_multisets([e.value for e in f.eigs], expected) < 1e-10
    assert f.n_stable == 1
    assert f.eigs[0].value.real == pytest.approx(0.9)
    pair = [e for e in f.eigs if abs(e.value.imag) > 0]
    assert len(pair) == 2 and pair[0].value == pytest.approx(pair[1].value.conjugate())


def test_nk_passive_stable_first():
    p = NKParams(phi_pi=0.8)
    f = qz_decompose(nk_model(p))
    expected = nk_roots_closed_form(p.sigma, p.beta, p.kappa, p.phi_pi, p.phi_y, p.rho)
    n_expected = sum(abs(r) < 1 for r in expected)
    assert f.n_stable == n_expected == 2
    assert all(e.cls is EigClass.STABLE for e in f.eigs[:2])


def test_fiscal_augmented_roots_against_polynomial():
    aug = augment_fiscal(nk_model(NKParams(phi_pi=0.8)), FiscalParams(gamma_s=0.0))
    f = qz_decompose(aug)
    roots, n_inf = pencil_roots_mp(aug.a0, aug.a1)
    assert f.count(EigClass.INFINITE) == n_inf == 1
    finite = [e.value for e in f.eigs if e.cls is not EigClass.INFINITE]
    assert match_multisets(finite, roots) < 1e-9
    assert f.n_stable == 2


def test_classify_examples():
    assert classify(0.9, 1) is EigClass.STABLE
    assert classify(1 + 5e-9, 1, tol_unit=1e-6) is EigClass.UNIT_ROOT
    assert classify(3, 0) is EigClass.INFINITE
    assert classify(1.5, 1) is EigClass.UNSTABLE
    assert classify(0.9j, 1) is EigClass.STABLE
    with pytest.raises(DegeneratePair):
        classify(0.0, 0.0)


@given(st.floats(0, 1e6), st.floats(1e-6, 10))
def test_classify_partitions_modulus_line(a, b):
    cls = classify(a, b)
    mod = a / b
    assert (cls is EigClass.STABLE) == (mod < 1 - 1e-6)
    assert (cls is EigClass.UNSTABLE) == (mod > 1 + 1e-6)
    assert cls is not EigClass.INFINITE


def test_singular_pencil():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(SingularPencil):
        qz_pencil(a, a)


def test_eigenvalue_table_columns():
    rows = eigenvalue_table(qz_decompose(nk_model()))
    assert list(rows[0]) == ["index", "re", "im", "modulus", "class"]
    assert rows[0]["class"] == "stable"


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_reorder_invariants(n, seed):
    rng = np.random.default_rng(seed)
    a0, a1 = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    f = qz_pencil(a0, a1)
    assert f.is_stable_first()
    assert max(f.reconstruction_error()) <= 1e-10
    assert max(f.unitarity_error()) <= 1e-12
    np.testing.assert_allclose(np.tril(f.t_mat, -1), 0, atol=1e-14)


def test_reorder_select_moves_chosen_roots():
    f = qz_pencil(np.diag([0.2, 0.4, 0.6, 3.0]), np.eye(4))
    g = reorder_select(f, [False, False, True, False])
    assert g.eigs[0].modulus == pytest.approx(0.6)
    assert [e.modulus for e in g.eigs[1:3]] == pytest.approx([0.2, 0.4])
