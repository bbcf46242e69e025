"""Evaluator interface for contractive Weyl functions B(lambda).

A CurveProvider packages the analytic map lambda -> B(lambda) (an n x n
strict contraction on the upper half-plane), its derivative (exact when
available, otherwise a fourth-order complex stencil), the Cayley-transformed
Weyl function M(lambda), curvature/Chern data, reproducing-kernel blocks,
and the group actions (SL(2,R) reparameterization, U(n,n) congruence).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NumericalError, ValidationError
from .symplectic import PseudoUnitary, cayley, mobius_pu

DEFAULT_H0 = 1e-5
COND_MAX = 1e12


class CurveProvider:
    """Immutable evaluator of a contractive Weyl curve.

    domain:
      - "entire": B extends holomorphically to all of C and is unitary at
        regular real points.
      - "upper_half_plane_pair": B given on the open upper half-plane; the
        lower branch is the reflection (B(conj lambda)*)^{-1}.  Real
        evaluation is allowed only when allow_real is set (boundary values
        of the upper branch, e.g. the constant curve).
    """

    def __init__(self, n, domain, eval_fn, deriv_fn=None, frame_fn=None,
                 provenance=None, h0=DEFAULT_H0, allow_real=False,
                 speed_fn=None):
        if domain not in ("entire", "upper_half_plane_pair"):
            raise ValidationError(f"unknown provider domain {domain!r}")
        self.n = int(n)
        self.domain = domain
        self._eval_fn = eval_fn
        self._deriv_fn = deriv_fn
        self._frame_fn = frame_fn
        self._speed_fn = speed_fn
        self.provenance = provenance or {"kind": "custom", "params": {}}
        self.h0 = float(h0)
        self.allow_real = bool(allow_real)
        self.derivative_kind = "exact" if deriv_fn is not None else "stencil"

    def phase_speed(self, u: float) -> float:
        """d/du arg det B(u) = trace(-i B^{-1} B') at a regular real point."""
        u = float(u)
        if self._speed_fn is not None:
            return float(self._speed_fn(u))
        B = self.B(u)
        return float(np.trace(-1j * np.linalg.solve(B, self.dB(u))).real)

    # -- evaluation ------------------------------------------------------

    def B(self, lam) -> np.ndarray:
        lam = complex(lam)
        if self.domain == "entire":
            return np.asarray(self._eval_fn(lam), dtype=complex)
        if lam.imag > 0:
            return np.asarray(self._eval_fn(lam), dtype=complex)
        if lam.imag == 0:
            if not self.allow_real:
                raise DomainError("real evaluation on a half-plane-only provider")
            return np.asarray(self._eval_fn(lam), dtype=complex)
        up = np.asarray(self._eval_fn(lam.conjugate()), dtype=complex)
        sv = np.linalg.svd(up, compute_uv=False)
        if sv.min() <= 1e-14 * max(sv.max(), 1e-300):
            raise DomainError("branch reflection hit a kernel point of B")
        return np.linalg.inv(up.conj().T)

    def dB(self, lam) -> np.ndarray:
        lam = complex(lam)
        if self._deriv_fn is not None:
            if self.domain == "entire" or lam.imag > 0 or (lam.imag == 0 and self.allow_real):
                return np.asarray(self._deriv_fn(lam), dtype=complex)
            # derivative of the reflected branch G = (B(conj lam)*)^{-1}
            G = self.B(lam)
            dup = np.asarray(self._deriv_fn(lam.conjugate()), dtype=complex)
            return -G @ dup.conj().T @ G
        return self._stencil(lam)

    def _stencil(self, lam: complex) -> np.ndarray:
        # curves of interest oscillate on the sqrt(|lambda|) scale, so the
        # stencil step grows with the square root rather than |lambda|
        h = self.h0 * max(1.0, abs(lam)) ** 0.5
        if self.domain != "entire" and abs(lam.imag) <= 2.05 * h:
            # vertical stencil points would cross the real axis
            warnings.warn("derivative stencil degraded to second order near the real axis")
            return (self.B(lam + h) - self.B(lam - h)) / (2 * h)
        fp, fm = self.B(lam + h), self.B(lam - h)
        gp, gm = self.B(lam + 1j * h), self.B(lam - 1j * h)
        return ((fp - fm) - 1j * (gp - gm)) / (4 * h)

    def M(self, lam) -> np.ndarray:
        return cayley(self.B(lam), "to_M")

    def frame(self, lam) -> np.ndarray:
        """A holomorphic 2n x n frame of the curve at lambda.

        Default is the chart stack (I; B); backends may supply an entire
        frame that stays holomorphic through kernel points of B.
        """
        if self._frame_fn is not None:
            return np.asarray(self._frame_fn(complex(lam)), dtype=complex)
        return np.vstack([np.eye(self.n), self.B(lam)])

    def descriptor(self) -> dict:
        return dict(self.provenance)


# -- built-in curves -----------------------------------------------------


def constant(B0) -> CurveProvider:
    """The constant curve B == B0 (curvature identically I)."""
    B0 = np.asarray(B0, dtype=complex)
    if B0.ndim == 0:
        B0 = B0.reshape(1, 1)
    sv = np.linalg.svd(B0, compute_uv=False)
    if sv.max() >= 1.0:
        raise ValidationError("constant curve needs a strict contraction")
    n = B0.shape[0]
    return CurveProvider(
        n, "upper_half_plane_pair",
        eval_fn=lambda lam: B0.copy(),
        deriv_fn=lambda lam: np.zeros((n, n), dtype=complex),
        provenance={"kind": "builtin", "params": {"name": "constant",
                                                  "B0": _cser(B0)}},
        allow_real=True)


def shifted_identity(a: float = 1.0, n: int = 1) -> CurveProvider:
    """The curve of M(lambda) = (lambda + a i) I, a >= 0 (a = 0 is flat)."""
    if a < 0:
        raise ValidationError("shift a must be nonnegative")

    def ev(lam):
        return (lam + (a - 1) * 1j) / (lam + (a + 1) * 1j) * np.eye(n)

    def dv(lam):
        return 2j / (lam + (a + 1) * 1j) ** 2 * np.eye(n)

    return CurveProvider(
        n, "upper_half_plane_pair", eval_fn=ev, deriv_fn=dv,
        provenance={"kind": "builtin",
                    "params": {"name": "shifted_identity", "a": a, "n": n}})


def exponential() -> CurveProvider:
    """The entire curve B(lambda) = e^{i lambda}, n = 1."""
    prov = CurveProvider(
        1, "entire",
        eval_fn=lambda lam: np.array([[np.exp(1j * lam)]]),
        deriv_fn=lambda lam: np.array([[1j * np.exp(1j * lam)]]),
        provenance={"kind": "builtin", "params": {"name": "exponential"}})

    def lognorm(point, lam):
        # ln |det[V | (1; B)]| - ln vol(1; B) with B = e^{i lam}, computed
        # in the log domain so deep lower-half-plane points (|B| ~ e^{r})
        # do not overflow the frame volume
        lam = complex(lam)
        v1, v2 = complex(point.frame[0, 0]), complex(point.frame[1, 0])
        L = -lam.imag
        if L <= 300.0:
            B = np.exp(1j * lam)
            det = v1 * B - v2
            if det == 0:
                return float("-inf")
            return float(np.log(abs(det)) - 0.5 * np.log1p(abs(B) ** 2))
        ph = np.exp(1j * lam.real)
        det_scaled = v1 * ph - v2 * np.exp(-L)
        if det_scaled == 0:
            return float("-inf")
        num = L + float(np.log(abs(det_scaled)))
        den = L + 0.5 * float(np.log1p(np.exp(-2.0 * L)))
        return num - den

    prov.section_lognorm_fn = lognorm
    return prov


def _cser(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# -- curvature -----------------------------------------------------------


@dataclass(frozen=True)
class CurvatureResult:
    r: np.ndarray
    r_sym: np.ndarray
    chern: np.ndarray
    schwarz_pick_margin: float


def _chern_from_traces(r: np.ndarray) -> np.ndarray:
    """Coefficients c_1..c_n of det(t - r) = t^n - c1 t^{n-1} + c2 ... .

    Newton's identities on traces of powers (Faddeev-LeVerrier recursion).
    """
    n = r.shape[0]
    p = [np.trace(np.linalg.matrix_power(r, k)) for k in range(1, n + 1)]
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        s = sum((-1) ** (j - 1) * e[k - j] * p[j - 1] for j in range(1, k + 1))
        e.append(s / k)
    return np.array([z.real for z in e[1:]])


def curvature(c: CurveProvider, lam) -> CurvatureResult:
    """Curvature r = I - 4 v^2 K^{-1} B'* Kt^{-1} B' at lambda in C_+."""
    lam = complex(lam)
    v = lam.imag
    if v <= 0:
        raise DomainError("curvature is defined on the open upper half-plane")
    B = c.B(lam)
    Bp = c.dB(lam)
    eye = np.eye(c.n)
    K = eye - B.conj().T @ B
    Kt = eye - B @ B.conj().T
    for name, mat in (("K", K), ("Kt", Kt)):
        cond = np.linalg.cond((mat + mat.conj().T) / 2)
        if not np.isfinite(cond) or cond > COND_MAX:
            raise NumericalError(f"{name} numerically singular (cond {cond:.2e}); ||B|| too close to 1")
    core = Bp.conj().T @ np.linalg.solve((Kt + Kt.conj().T) / 2, Bp)
    r = eye - 4 * v * v * np.linalg.solve((K + K.conj().T) / 2, core)
    # Hermitian square root of K for the metric symmetrization
    w, V = np.linalg.eigh((K + K.conj().T) / 2)
    if w.min() <= 0:
        raise NumericalError("K not positive definite; lambda too close to the boundary")
    Ks = (V * np.sqrt(w)) @ V.conj().T
    Ksi = (V / np.sqrt(w)) @ V.conj().T
    r_sym = Ks @ r @ Ksi
    r_sym = (r_sym + r_sym.conj().T) / 2
    margin = float(np.linalg.eigvalsh(r_sym).min())
    return CurvatureResult(r=r, r_sym=r_sym, chern=_chern_from_traces(r_sym),
                           schwarz_pick_margin=margin)


# -- reproducing-kernel blocks -------------------------------------------


@dataclass(frozen=True)
class KernelBlock:
    value: np.ndarray
    branch: str


def kernel_block(c: CurveProvider, lam, mu) -> KernelBlock:
    """Reproducing-kernel block K(lambda, mu), branch by half-plane signs."""
    lam, mu = complex(lam), complex(mu)
    if c.domain != "entire" and (lam.imag == 0 or mu.imag == 0):
        raise DomainError("kernel_block needs points off the real axis")
    diag_tol = 1e-6 * (1 + abs(lam))
    sl = lam.imag >= 0
    sm = mu.imag >= 0
    den = lam - mu.conjugate()
    if sl and sm:
        val = 1j * (np.eye(c.n) - c.B(lam) @ c.B(mu).conj().T) / den
        return KernelBlock(val, "pp")
    if not sl and not sm:
        val = -1j * (np.eye(c.n) - c.B(lam.conjugate()).conj().T
                     @ c.B(mu.conjugate())) / den
        return KernelBlock(val, "mm")
    if not sl and sm:
        if abs(den) < diag_tol:
            return KernelBlock(1j * c.dB(lam.conjugate()).conj().T, "diagonal_limit")
        val = 1j * (c.B(lam.conjugate()).conj().T - c.B(mu).conj().T) / den
        return KernelBlock(val, "pm")
    if abs(den) < diag_tol:
        return KernelBlock(-1j * c.dB(lam), "diagonal_limit")
    val = -1j * (c.B(lam) - c.B(mu.conjugate())) / den
    return KernelBlock(val, "mp")


def gram_min_eig(c: CurveProvider, points) -> float:
    """Smallest eigenvalue of the kernel Gram G_ij = <K(l_i,l_j) v_j, v_i>."""
    pts = [(complex(l), np.asarray(v, dtype=complex).ravel()) for l, v in points]
    m = len(pts)
    G = np.empty((m, m), dtype=complex)
    for i, (li, vi) in enumerate(pts):
        for j, (lj, vj) in enumerate(pts):
            G[i, j] = np.vdot(vi, kernel_block(c, li, lj).value @ vj)
    return float(np.linalg.eigvalsh((G + G.conj().T) / 2).min())


# -- group actions -------------------------------------------------------


def reparameterize(c: CurveProvider, g) -> CurveProvider:
    """Precompose with the inverse SL(2,R) Moebius action on lambda."""
    g = np.asarray(g, dtype=float)
    if g.shape != (2, 2) or abs(np.linalg.det(g) - 1.0) > 1e-10:
        raise ValidationError("reparameterize needs g in SL(2, R)")
    a, b, cc, d = g[0, 0], g[0, 1], g[1, 0], g[1, 1]

    def m(lam):
        den = -cc * lam + a
        if abs(den) < 1e-13 * (1 + abs(lam)):
            raise DomainError("Moebius reparameterization pole at this lambda")
        return (d * lam - b) / den

    def ev(lam):
        return c.B(m(lam))

    def dv(lam):
        den = -cc * lam + a
        return c.dB(m(lam)) / den ** 2

    return CurveProvider(
        c.n, c.domain, eval_fn=ev,
        deriv_fn=dv if c.derivative_kind == "exact" else None,
        provenance={"kind": "transformed",
                    "params": {"base": c.descriptor(), "action": "sl2",
                               "g": [[float(x) for x in row] for row in g]}},
        h0=c.h0, allow_real=c.allow_real)


def congruence(c: CurveProvider, g) -> CurveProvider:
    """Act on chart values by a U(n,n) Moebius transformation."""
    if not isinstance(g, PseudoUnitary):
        g = PseudoUnitary(g)
    if g.n != c.n:
        raise ValidationError("congruence size mismatch")
    g11, g12, g21, g22 = g.blocks()

    def ev(lam):
        return mobius_pu(g, c.B(lam))

    def dv(lam):
        B = c.B(lam)
        Bp = c.dB(lam)
        den_inv = np.linalg.inv(g11 + g12 @ B)
        Bg = (g21 + g22 @ B) @ den_inv
        return (g22 - Bg @ g12) @ Bp @ den_inv

    return CurveProvider(
        c.n, c.domain, eval_fn=ev,
        deriv_fn=dv if c.derivative_kind == "exact" else None,
        provenance={"kind": "transformed",
                    "params": {"base": c.descriptor(), "action": "congruence"}},
        h0=c.h0, allow_real=c.allow_real)
