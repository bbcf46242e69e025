import numpy as np
import pytest

import weylcurve as wc

from conftest import random_contraction, random_pseudo_unitary

rng = np.random.default_rng(9281)


# -- builtins ---------------------------------------------------------------


def test_constant_curve():
    B0 = random_contraction(rng, 2, rmax=0.7)
    c = wc.constant(B0)
    assert np.allclose(c.B(0.3 + 2j), B0)
    assert np.allclose(c.dB(0.3 + 2j), 0)
    res = wc.curvature(c, 1j)
    assert np.linalg.norm(res.r - np.eye(2), 2) < 1e-12
    # chern of identity curvature: elementary symmetric values (n, n(n-1)/2 ...)
    assert res.chern[0] == pytest.approx(2.0)


def test_constant_rejects_non_contraction():
    with pytest.raises(wc.ValidationError):
        wc.constant(np.eye(2))


def test_shifted_identity_values():
    c = wc.shifted_identity(a=1.0, n=2)
    lam = 0.7 + 1.3j
    expect = (lam + 0j) / (lam + 2j)
    assert np.allclose(c.B(lam), expect * np.eye(2))
    # exact derivative vs stencil of a twin provider without deriv_fn
    twin = wc.CurveProvider(2, "upper_half_plane_pair",
                            eval_fn=lambda z: (z + 0j) / (z + 2j) * np.eye(2))
    assert np.allclose(c.dB(lam), twin.dB(lam), atol=1e-9)


def test_exponential_is_entire_and_unitary_on_reals():
    c = wc.exponential()
    assert abs(abs(c.B(5.0)[0, 0]) - 1.0) < 1e-14
    assert abs(c.B(1j)[0, 0] - np.exp(-1)) < 1e-14


def test_flat_curve_curvature_zero():
    # M = lambda I  <->  B = (lambda - i)/(lambda + i) I : shifted_identity a=0
    c = wc.shifted_identity(a=0.0, n=2)
    for lam in (1j, 0.5 + 0.25j, -2 + 3j):
        res = wc.curvature(c, lam)
        assert np.linalg.norm(res.r, 2) < 1e-8


def test_shifted_identity_curvature_at_i():
    res = wc.curvature(wc.shifted_identity(a=1.0, n=2), 1j)
    assert np.linalg.norm(res.r_sym - 0.75 * np.eye(2), 2) < 1e-8


def test_exponential_curvature_closed_form():
    # at lambda = iv: r = 1 - 4 v^2 e^{-2v} / (1 - e^{-2v})^2
    for v in (0.5, 1.0, 2.0):
        res = wc.curvature(wc.exponential(), 1j * v)
        e = np.exp(-2 * v)
        expect = 1 - 4 * v * v * e / (1 - e) ** 2
        assert res.r[0, 0].real == pytest.approx(expect, abs=1e-8)


def test_curvature_margin_nonnegative_random():
    for _ in range(20):
        lam = complex(rng.uniform(-5, 5), rng.uniform(0.2, 4.0))
        c = wc.shifted_identity(a=rng.uniform(0, 3), n=2)
        assert wc.curvature(c, lam).schwarz_pick_margin >= -1e-8


def test_curvature_rejects_lower_half_plane():
    with pytest.raises(wc.DomainError):
        wc.curvature(wc.exponential(), -1j)


# -- kernels ------------------------------------------------------------------


def test_kernel_hermitian_pair_symmetry(c_qx):
    lam, mu = 0.4 + 1.1j, -0.9 + 0.6j
    for la, mb in [(lam, mu), (lam, np.conj(mu)), (np.conj(lam), mu)]:
        k1 = wc.kernel_block(c_qx, la, mb).value
        k2 = wc.kernel_block(c_qx, mb, la).value
        assert np.allclose(k1.conj().T, k2, atol=1e-9)


def test_kernel_diag_limits(c_qx):
    lam = 1.5 + 0.9j
    near = wc.kernel_block(c_qx, lam, np.conj(lam) + 1e-9).value
    lim = wc.kernel_block(c_qx, lam, np.conj(lam)).value
    assert np.allclose(near, lim, atol=1e-5 * (1 + np.abs(lim).max()))


def test_kernel_positivity_exponential():
    c = wc.exponential()
    pts = [(complex(rng.uniform(-3, 3), rng.uniform(0.2, 2) * rng.choice([-1, 1])),
            rng.standard_normal(1) + 1j * rng.standard_normal(1))
           for _ in range(8)]
    assert wc.gram_min_eig(c, pts) >= -1e-8


def test_reparameterize_translation(c_exp):
    # g: lambda -> lambda + 2  (a=1, b=-2, c=0, d=1 with m(lam)=(d lam - b)/(-c lam + a))
    g = np.array([[1.0, -2.0], [0.0, 1.0]])
    cg = wc.reparameterize(c_exp, g)
    lam = 0.3 + 0.4j
    assert np.allclose(cg.B(lam), c_exp.B(lam + 2.0), atol=1e-14)
    assert np.allclose(cg.dB(lam), c_exp.dB(lam + 2.0), atol=1e-12)


def test_reparameterize_rejects_non_sl2():
    with pytest.raises(wc.ValidationError):
        wc.reparameterize(wc.exponential(), np.array([[2.0, 0.0], [0.0, 2.0]]))


def test_congruence_matches_mobius(c_qx):
    g = random_pseudo_unitary(rng, 2)
    cg = wc.congruence(c_qx, g)
    lam = 0.8 + 1.2j
    assert np.allclose(cg.B(lam), wc.mobius_pu(g, c_qx.B(lam)), atol=1e-12)


def test_congruence_chern_invariance(c_qx):
    lam = 0.5 + 1.5j
    base = wc.curvature(c_qx, lam).chern
    for _ in range(3):
        g = random_pseudo_unitary(rng, 2)
        got = wc.curvature(wc.congruence(c_qx, g), lam).chern
        assert np.allclose(got, base, atol=1e-7 * (1 + np.abs(base).max()))


def test_lower_half_plane_reflection(c_qx):
    lam = 0.4 + 0.9j
    # conjugation symmetry of the entire SL curve: B(conj lam) = (B(lam)*)^{-1}
    assert np.allclose(c_qx.B(np.conj(lam)),
                       np.linalg.inv(c_qx.B(lam).conj().T), atol=1e-8)


def test_stencil_derivative_matches_cauchy_riemann(c_qx):
    lam = 2.0 + 1.0j
    d = c_qx.dB(lam)
    h = 1e-5
    fd = (c_qx.B(lam + h) - c_qx.B(lam - h)) / (2 * h)
    assert np.allclose(d, fd, atol=1e-5)
