"""Minkowski algebra: dot products, complexified radius, slash maps, boosts.

Four-vectors are numpy arrays with the vector index as the *last* axis, so all
operations broadcast over arbitrary leading batch axes.
"""

from dataclasses import dataclass

import numpy as np

from .conventions import GAMMA, GAMMA_LOWER, IDENTITY4, METRIC
from .errors import DomainError

_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def minkowski_dot(a: np.ndarray, b: np.ndarray):
    """a_mu b^mu with signature (+,-,-,-); no complex conjugation."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.sum(_SIGNS * a * b, axis=-1)


def lower(v: np.ndarray) -> np.ndarray:
    """Covariant components v_mu = g_{mu nu} v^nu."""
    return np.asarray(v) * _SIGNS


def radius(w: np.ndarray):
    """Principal-branch sqrt of -w.w.

    Defined for -w.w off the closed negative real axis; boundary arguments
    raise DomainError (never silently continued).
    """
    s = -minkowski_dot(w, w)
    s = np.asarray(s, dtype=complex)
    bad = (s.imag == 0.0) & (s.real <= 0.0)
    if np.any(bad):
        raise DomainError("-w.w lies on the closed negative real axis")
    return np.sqrt(s)


def slash(v: np.ndarray) -> np.ndarray:
    """gamma^mu v_mu for contravariant components v^mu; batched over leading axes."""
    v = np.asarray(v, dtype=complex)
    return np.einsum("...m,mab->...ab", v, GAMMA_LOWER)


def slash_cov(v_cov: np.ndarray) -> np.ndarray:
    """gamma^mu v_mu where the input already carries the lower index."""
    v_cov = np.asarray(v_cov, dtype=complex)
    return np.einsum("...m,mab->...ab", v_cov, GAMMA)


@dataclass(frozen=True)
class LorentzBoost:
    Lambda: np.ndarray  # real 4x4, Lambda^T g Lambda = g, Lambda^0_0 >= 1
    S: np.ndarray       # spinor representation, S gamma^mu S^-1 = (Lambda^-1)^mu_nu gamma^nu
    S_inv: np.ndarray
    rapidity: float
    axis: int


def boost(rapidity: float, axis: int) -> LorentzBoost:
    """Standard boost along a coordinate axis with its spinor matrix.

    Sign convention pinned by the invariant S g^mu S^-1 = (Lambda^-1)^mu_nu g^nu.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    if abs(rapidity) > 5.0:
        raise ValueError("|rapidity| > 5 is outside the supported range")
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    Lam = np.eye(4)
    Lam[0, 0] = Lam[axis, axis] = ch
    Lam[0, axis] = Lam[axis, 0] = -sh
    ch2, sh2 = np.cosh(rapidity / 2.0), np.sinh(rapidity / 2.0)
    S = ch2 * IDENTITY4 - sh2 * (GAMMA[0] @ GAMMA[axis])
    S_inv = ch2 * IDENTITY4 + sh2 * (GAMMA[0] @ GAMMA[axis])
    return LorentzBoost(Lam, S, S_inv, float(rapidity), axis)


def check_metric_preserved(Lam: np.ndarray) -> float:
    return float(np.max(np.abs(Lam.T @ METRIC @ Lam - METRIC)))
