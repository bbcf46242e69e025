import numpy as np
import pytest

import weylcurve as wc
from weylcurve.symplectic import canonicalize, section_lognorm

from conftest import random_contraction, random_pseudo_unitary, _haar_unitary

rng = np.random.default_rng(20240817)


def test_form_gram_and_eval():
    J = wc.form_gram(2)
    assert np.allclose(J, np.diag([1j, 1j, -1j, -1j]))
    x = np.array([1, 0, 0, 0], dtype=complex)
    assert wc.form_eval(x, x) == pytest.approx(1j)
    y = np.array([0, 0, 1, 0], dtype=complex)
    assert wc.form_eval(y, y) == pytest.approx(-1j)
    # sesquilinearity: [ax, y] = a [x, y],  [x, ay] = conj(a) [x, y]
    a = 0.7 - 0.4j
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    assert wc.form_eval(a * u, v) == pytest.approx(a * wc.form_eval(u, v))
    assert wc.form_eval(u, a * v) == pytest.approx(np.conj(a) * wc.form_eval(u, v))
    # anti-hermitian symmetry [x,y] = -conj([y,x]) (the factor i)
    assert wc.form_eval(u, v) == pytest.approx(-np.conj(wc.form_eval(v, u)))


def test_canonicalize_deterministic_and_span_preserving():
    f = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    q1 = canonicalize(f)
    q2 = canonicalize(f @ np.array([[2.0, 1.0], [0.5, -3.0]]))
    assert np.allclose(q1.conj().T @ q1, np.eye(2), atol=1e-12)
    # same span: projectors equal
    pr1 = q1 @ q1.conj().T
    pr2 = q2 @ q2.conj().T
    assert np.allclose(pr1, pr2, atol=1e-10)


def test_canonicalize_rejects_rank_deficient():
    f = np.zeros((4, 2), dtype=complex)
    f[:, 0] = [1, 0, 0, 0]
    f[:, 1] = [2, 0, 0, 0]
    with pytest.raises(wc.ValidationError):
        canonicalize(f)


def test_classify_graph_of_unitary_is_lagrangian():
    for _ in range(5):
        U = _haar_unitary(rng, 3)
        pt = wc.graph_of(U)
        assert wc.classify_subspace(pt) == "lagrangian"


def test_classify_graph_of_strict_contraction_positive():
    B = random_contraction(rng, 2, rmax=0.8)
    assert wc.classify_subspace(wc.graph_of(B)) == "positive_definite"


def test_classify_negative_definite():
    # span of the minus-factor: frame (0; I)
    pt = wc.GrassPoint.from_frame(np.vstack([np.zeros((2, 2)), np.eye(2)]))
    assert wc.classify_subspace(pt) == "negative_definite"


def test_chart_roundtrip():
    B = random_contraction(rng, 3)
    pt = wc.graph_of(B)
    assert np.allclose(wc.chart_convert(pt), B, atol=1e-10)


def test_chart_convert_outside_chart_raises():
    pt = wc.GrassPoint.from_frame(np.vstack([np.zeros((2, 2)), np.eye(2)]))
    with pytest.raises(wc.ChartError):
        wc.chart_convert(pt)


def test_cayley_roundtrip_and_nevanlinna_direction():
    B = random_contraction(rng, 2, rmax=0.9)
    M = wc.cayley(B, "to_M")
    assert np.allclose(wc.cayley(M, "to_B"), B, atol=1e-10)
    # strict contraction -> M has positive imaginary part
    imag = (M - M.conj().T) / 2j
    assert np.linalg.eigvalsh(imag).min() > 0


def test_mobius_group_action_composition():
    B = random_contraction(rng, 2)
    g1 = random_pseudo_unitary(rng, 2)
    g2 = random_pseudo_unitary(rng, 2)
    lhs = wc.mobius_pu(g2.g @ g1.g, B)
    rhs = wc.mobius_pu(g2, wc.mobius_pu(g1, B))
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_mobius_preserves_contractions():
    for _ in range(10):
        B = random_contraction(rng, 2)
        g = random_pseudo_unitary(rng, 2)
        out = wc.mobius_pu(g, B)
        assert np.linalg.norm(out, 2) < 1.0


def test_pseudo_unitary_validation():
    with pytest.raises(wc.ValidationError):
        wc.PseudoUnitary(np.diag([2.0, 1.0, 1.0, 1.0]))


def test_transversality():
    p = wc.graph_of(np.zeros((2, 2)))
    q = wc.GrassPoint.from_frame(np.vstack([np.zeros((2, 2)), np.eye(2)]))
    t = wc.transversality(p, q)
    assert t["transversal"] and t["dim_intersection"] == 0
    t2 = wc.transversality(p, p)
    assert t2["dim_intersection"] == 2


def test_section_norm_bounded_by_one():
    for _ in range(25):
        v = wc.GrassPoint.from_frame(
            rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3)))
        w = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        assert wc.section_norm(v, w) <= 1.0 + 1e-12


def test_section_zero_iff_intersection():
    v = wc.graph_of(np.eye(2))
    # W sharing a vector with V
    shared = v.frame[:, [0]]
    other = rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1))
    w = np.hstack([shared, other])
    assert abs(wc.schubert_section(v, w)) < 1e-12
    assert wc.section_norm(v, w) < 1e-12


def test_section_lognorm_matches_norm():
    v = wc.GrassPoint.from_frame(
        rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2)))
    w = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    assert np.exp(section_lognorm(v, w)) == pytest.approx(wc.section_norm(v, w))
