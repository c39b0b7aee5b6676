from fractions import Fraction

import numpy as np
import pytest

from nf_helpers import random_anti_poly, random_reversible_field, span_coefficients
from revbif.linalg import exact_matrix, rank
from revbif.normal_forms import (NormalFormError, ad_matrix, belitskii_normalize,
                                 belitskii_residual, birkhoff_normalize, check_birkhoff_condition,
                                 is_reversible, lie_operator_matrix, parity_basis,
                                 split_kernel_range)
from revbif.patterns import (hamiltonian_cubic_fields_4d, quadratic_fields_6d_four,
                             reversible_cubic_fields_4d)
from revbif.poly import Poly, PolyVector, hamiltonian_vector_field, poisson_bracket, truncation
from revbif.symplectic import canonical_model
from revbif.templates import canonical_h2, canonical_structure, hat_template

RD = {c: [int(hat_template(c)[i, i]) for i in range(hat_template(c).shape[0])]
      for c in ("4:2", "6:2", "6:4")}


@pytest.mark.parametrize("case,d,dim", [("4:2", 3, 0), ("4:2", 4, 3), ("6:2", 3, 10), ("6:4", 3, 2)])
def test_kernel_dimensions(case, d, dim):
    n = 4 if case == "4:2" else 6
    op = ad_matrix(canonical_h2(n), d, "anti", canonical_structure(n), RD[case])
    sp = split_kernel_range(op)
    assert sp.kernel.shape[1] == dim
    assert sp.kernel.shape[1] + sp.range.shape[1] == op.dim


def test_operator_exchanges_parity():
    op = ad_matrix(canonical_h2(4), 3, "anti", canonical_structure(4), RD["4:2"])
    full = ad_matrix(canonical_h2(4), 3, "all", canonical_structure(4))
    assert op.matrix.shape == (len(op.codomain), op.dim)
    assert full.matrix.shape[0] == full.matrix.shape[1] == 20
    # the parity blocks carry the whole rank of the full operator
    inv = ad_matrix(canonical_h2(4), 3, "invariant", canonical_structure(4), RD["4:2"])
    assert rank(op.matrix) + rank(inv.matrix) == rank(full.matrix)


def test_split_decompose_and_solve(rng):
    op = ad_matrix(canonical_h2(4), 4, "anti", canonical_structure(4), RD["4:2"])
    sp = split_kernel_range(op)
    b = random_anti_poly(rng, 4, 4, RD["4:2"])
    k, r = sp.decompose(op.coords(b))
    assert not np.any(op.partner @ op.matrix @ k)
    w = sp.solve(r)
    assert not np.any(op.partner @ w - r)


def test_birkhoff_demo_perturbation(rng):
    m = canonical_model("4:2")
    H = canonical_h2(4) + random_anti_poly(rng, 4, 3, RD["4:2"]) + random_anti_poly(rng, 4, 4, RD["4:2"])
    nf = birkhoff_normalize(H, 4, m)
    K = canonical_structure(4)
    H2 = nf.normalized.grade(2)
    assert poisson_bracket(H2, nf.normalized.grade(3), K).is_zero()
    assert poisson_bracket(H2, nf.normalized.grade(4), K).is_zero()
    assert (nf.normalized.substitute_linear(hat_template("4:2")) + nf.normalized).is_zero()
    X3 = nf.field().grade(3)
    coef = span_coefficients(X3, hamiltonian_cubic_fields_4d())
    assert coef is not None
    assert nf.passed


def test_birkhoff_conjugacy(rng):
    m = canonical_model("4:2")
    H = canonical_h2(4) + random_anti_poly(rng, 4, 3, RD["4:2"]) + random_anti_poly(rng, 4, 4, RD["4:2"])
    nf = birkhoff_normalize(H, 4, m)
    Phi = nf.coordinate_map()
    with truncation(4):
        lhs = H.compose(list(Phi))
    assert (lhs - nf.normalized).truncate(4).is_zero()


def test_birkhoff_float_matches_exact(rng):
    m = canonical_model("6:2")
    H = canonical_h2(6) + random_anti_poly(rng, 6, 3, RD["6:2"])
    ex = birkhoff_normalize(H, 3, m).normalized.to_float()
    fl = birkhoff_normalize(H.to_float(), 3, m).normalized
    assert (ex - fl).max_abs_coefficient() < 1e-12


def test_birkhoff_rejects_invariant_input():
    m = canonical_model("4:2")
    H = canonical_h2(4) + Poly.monomial((0, 3, 0, 0))
    with pytest.raises(NormalFormError):
        birkhoff_normalize(H, 3, m)


def test_belitskii_random_cubic_in_reversible_family(rng):
    m = canonical_model("4:2")
    X = PolyVector.linear(m.A_hat) + random_reversible_field(rng, 4, 2, RD["4:2"]) \
        + random_reversible_field(rng, 4, 3, RD["4:2"])
    assert is_reversible(X, hat_template("4:2"))
    nf = belitskii_normalize(X, 3, m)
    Y = nf.normalized
    assert belitskii_residual(Y, m.A_hat).is_zero()
    assert Y.grade(2).is_zero()
    assert span_coefficients(Y.grade(3), reversible_cubic_fields_4d()) is not None


def test_belitskii_conjugacy(rng):
    m = canonical_model("4:2")
    X = PolyVector.linear(m.A_hat) + random_reversible_field(rng, 4, 2, RD["4:2"])
    nf = belitskii_normalize(X, 3, m)
    Psi = nf.coordinate_map()
    with truncation(3):
        lhs = X.compose(list(Psi))
        # D Psi . X~
        rhs = PolyVector(sum((Psi[i].partial(j) * nf.normalized[j] for j in range(4)), Poly.zero(4))
                         for i in range(4))
    assert (lhs - rhs).truncate(3).is_zero()


def test_reference_families_lie_in_kernels():
    A = canonical_model("4:2").A_hat
    op = lie_operator_matrix(A, 3, "anti", RD["4:2"])
    sp = split_kernel_range(op)
    fams = reversible_cubic_fields_4d()
    assert sp.kernel.shape[1] == 12
    M = exact_matrix(np.array([list(op.coords(F)) for F in fams.values()], dtype=object).T)
    assert rank(M) == 12
    assert not np.any(op.matrix @ M)
    for F in hamiltonian_cubic_fields_4d().values():
        assert belitskii_residual(PolyVector.linear(A) + F, A).is_zero()


def test_quadratic_six_four_family():
    m = canonical_model("6:4")
    for F in quadratic_fields_6d_four(-1).values():
        X = PolyVector.linear(m.A_hat) + F
        assert belitskii_residual(X, m.A_hat).is_zero()
        assert is_reversible(X, hat_template("6:4"))
    # the Hamiltonian fields X_{H2 x1}, X_{H2 y1} are in the family
    K = canonical_structure(6)
    H2 = canonical_h2(6)
    fam = quadratic_fields_6d_four(-1)
    for v in (0, 1):
        X = hamiltonian_vector_field(H2 * Poly.var(6, v), K)
        assert span_coefficients(X, fam) is not None


def test_birkhoff_condition_check():
    m = canonical_model("4:2")
    good = check_birkhoff_condition(canonical_h2(4) * (1 + Poly.monomial((2, 0, 0, 0))
                                                       + Poly.monomial((0, 2, 0, 0))), m, 4)
    assert good["passed"] and good["belitskii"]
    bad = check_birkhoff_condition(canonical_h2(4) + Poly.monomial((3, 0, 0, 0)), m, 3)
    assert not bad["passed"] and bad["failed_degrees"] == [3]
