from math import factorial

import numpy as np
import pytest

from nilfill.quadrature import QuadratureSpec, edgewise_subdivision, grundmann_moeller, refined_rule


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_edgewise_counts(k, m):
    bary, signs = edgewise_subdivision(k, m)
    assert len(bary) == m**k
    assert np.all(bary.sum(axis=2) == m)
    # volumes of the sub-simplices sum to the parent volume and carry its orientation
    total = 0.0
    for b, s in zip(bary, signs):
        E = (b[1:] - b[0]).astype(float)[:, 1:] / m
        total += s * np.linalg.det(E)
    assert total == pytest.approx(1.0)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("q", [0, 1, 2])
def test_gm_exact_degree(k, q):
    pts, w = grundmann_moeller(k, q)
    assert w.sum() == pytest.approx(1.0)
    # integral over the standard simplex of monomial x^a = a! k! / (|a| + k)!  (normalized)
    deg = 2 * q + 1
    a = [deg] + [0] * k
    val = w @ np.prod(pts ** np.array(a), axis=1)
    exact = factorial(deg) * factorial(k) / factorial(deg + k)
    assert val == pytest.approx(exact, rel=1e-12)


def test_refined_rule_weights():
    pts, w = refined_rule(2, 4, 1)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(pts >= -1e-15)


def test_spec_roundtrip():
    q = QuadratureSpec.from_dict({"order": 2, "tolerance": 1e-6, "other": 1})
    assert q.order == 2 and q.richardson_power() == 6
