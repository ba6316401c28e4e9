"""Covariant two-point kernels.

All evaluators are batch-native: point arguments carry the vector index on the
last axis and broadcast over one leading batch axis.  Scalar wrappers return
single matrices/dataclasses.

Conventions: the scalar kernel is D(w) = -c f(m r(w)) with c = m^3/(2 pi^2)
and f(xi) = K_1(xi)/xi; its gradient and Hessian follow from
dr/dw^mu = -w_mu/r.  The sign of D is pinned by the mass-shell quadrature
oracle (D < 0 on imaginary-time arguments).
"""

from dataclasses import dataclass, field

import numpy as np

from .bessel import f_and_derivatives, f_df_d2f_batch
from .conventions import DEFAULT_U, METRIC
from .errors import DomainError
from .minkowski import lower, radius, slash, slash_cov


@dataclass(frozen=True)
class KernelPoint:
    x: np.ndarray
    y: np.ndarray
    epsilon: float = 0.0
    u: np.ndarray = field(default_factory=lambda: DEFAULT_U.copy())

    def __post_init__(self):
        if self.epsilon < 0.0:
            raise DomainError("epsilon must be >= 0")

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.y, dtype=complex) - np.asarray(self.x) \
            + 1j * self.epsilon * np.asarray(self.u)


@dataclass(frozen=True)
class DEval:
    D: complex
    gradD: np.ndarray   # covariant components dD/dw^mu
    hessD: np.ndarray   # 4x4, lower indices, symmetric


def d_eval_batch(w: np.ndarray, m: float):
    """(D, gradD, hessD) for a batch of arguments w of shape (M, 4).

    gradD carries the lower index mu (derivative with respect to w^mu);
    hessD carries two lower indices.
    """
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    r = radius(w)
    f, df, d2f = f_df_d2f_batch(m * r)
    c = m**3 / (2.0 * np.pi**2)
    D = -c * f
    w_low = lower(w)
    gradD = c * m * (w_low / r[:, None]) * df[:, None]
    ww = w_low[:, :, None] * w_low[:, None, :]
    hessD = c * m * (
        METRIC[None, :, :] * (df / r)[:, None, None]
        + ww * (df / r**3)[:, None, None]
        - m * ww * (d2f / r**2)[:, None, None]
    )
    return D, gradD, hessD


def d_eval(w: np.ndarray, m: float) -> DEval:
    """Scalar D(w) with analytic gradient and Hessian (adaptive Bessel path)."""
    w = np.asarray(w, dtype=complex)
    r = complex(radius(w))
    ev = f_and_derivatives(m * r)
    c = m**3 / (2.0 * np.pi**2)
    D = -c * ev.f
    w_low = lower(w)
    gradD = c * m * (w_low / r) * ev.df
    ww = np.outer(w_low, w_low)
    hessD = c * m * (METRIC * ev.df / r + ww * ev.df / r**3 - m * ww * ev.d2f / r**2)
    return DEval(D, gradD, hessD)


def p_minus_batch(w: np.ndarray, m: float) -> np.ndarray:
    """(-i dslash + m) D / (2m) for a batch of w, shape (M, 4, 4)."""
    D, gradD, _ = d_eval_batch(w, m)
    return (-1j * slash_cov(gradD) + m * D[:, None, None] * np.eye(4)) / (2.0 * m)


def p_minus(w: np.ndarray, m: float) -> np.ndarray:
    return p_minus_batch(np.asarray(w, dtype=complex)[None, :], m)[0]


def grad_p_minus_batch(w: np.ndarray, m: float) -> np.ndarray:
    """d/dw^mu of p_minus; shape (M, 4, 4, 4), first index mu (lower)."""
    _, gradD, hessD = d_eval_batch(w, m)
    # (-i gamma^nu hessD_{mu nu} + m gradD_mu) / 2m
    return (-1j * slash_cov(hessD) + m * gradD[:, :, None, None] * np.eye(4)) / (2.0 * m)


def lambda_A(A, x: np.ndarray, y: np.ndarray):
    """Gauge phase (A_mu(x) + A_mu(y)) (x - y)^mu / 2; batched over leading axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    Ax = A.value(x)
    Ay = A.value(y)
    return 0.5 * np.sum((Ax + Ay) * (x - y), axis=-1)


def gauge_chain_lambda(omega_x, lam, omega_y):
    """Phase of the gauge-chained kernel: Omega(x) + lambda - Omega(y)."""
    return omega_x + lam - omega_y


def p_dressed(A, pt: KernelPoint, m: float) -> np.ndarray:
    """exp(-i lambda^A(x, y)) p_minus(y - x + i eps u)."""
    lam = lambda_A(A, pt.x, pt.y)
    return np.exp(-1j * lam) * p_minus(pt.w, m)


def delta_p_kernel(A, pt: KernelPoint, m: float) -> np.ndarray:
    """(exp(-i lambda^A) - 1) p_minus(w): kernel of the dressed-minus-free part."""
    lam = lambda_A(A, pt.x, pt.y)
    return (np.exp(-1j * lam) - 1.0) * p_minus(pt.w, m)


def delta_phase_batch(A, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """exp(-i lambda^A(x,y)) - 1 on batches; separated out for assembly."""
    return np.exp(-1j * lambda_A(A, x, y)) - 1.0


def r2_slash_grad_d_batch(w: np.ndarray, m: float) -> np.ndarray:
    """r(w)^2 gamma^mu d_mu D(w); the tame factor of the counter-kernel."""
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    r2 = -np.sum(lower(w) * w, axis=-1)
    _, gradD, _ = d_eval_batch(w, m)
    return r2[:, None, None] * slash_cov(gradD)


def s_kernel(surface, A, pt: KernelPoint, m: float) -> np.ndarray:
    """Counter-kernel (1/8m) nslash(x) Eslash(x) r(w)^2 dslash D(w), x on surface."""
    return s_kernel_batch(surface, A, pt.x[None, :], pt.y[None, :],
                          pt.epsilon, pt.u, m)[0]


def s_kernel_batch(surface, A, x: np.ndarray, y: np.ndarray,
                   epsilon: float, u: np.ndarray, m: float) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    w = (y - x).astype(complex) + 1j * epsilon * np.asarray(u)
    n = surface.normal_batch(x[:, 1:])
    F = A.field_strength(x)                        # (M,4,4) lower indices
    E = np.einsum("pmn,pn->pm", F, n)              # E_mu = F_{mu nu} n^nu
    nE = slash(n) @ slash_cov(E)
    return nE @ r2_slash_grad_d_batch(w, m) / (8.0 * m)
