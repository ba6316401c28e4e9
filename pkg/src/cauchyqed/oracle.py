"""Brute-force mass-shell momentum quadrature for the kernels D and p_minus.

The reference integral is taken over the lower mass shell parametrized by the
spatial momentum: p = (-E(k), k), E = sqrt(k^2 + m^2), with signed weight
m^2/p^0 d^3k and phase e^{i p.w}.  For Im w strictly past-directed the
integrand decays like e^{-E |Im w|-ish}, so a truncated radial x spherical
product rule converges absolutely.  This module is deliberately independent of
the Bessel-function route and fixes the kernels' global sign convention.
"""

import importlib.resources
import json
from dataclasses import dataclass

import numpy as np

from .conventions import GAMMA
from .errors import ConvergenceError, DomainError
from .minkowski import minkowski_dot

_TAIL_LOG = 40.0  # e^{-40} < 1e-17 relative tail


@dataclass(frozen=True)
class MassShellQuadrature:
    m: float
    k_max: float
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    n_theta: int
    n_phi: int


def _check_im_past(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    v = w.imag
    if not (v[0] < 0.0 and minkowski_dot(v, v) > 0.0):
        raise DomainError("Im w must be strictly past-directed time-like")
    return w


def build_rule(w: np.ndarray, m: float, radial_factor: int = 1) -> MassShellQuadrature:
    """Size the product rule from the decay and oscillation scales of w."""
    v = -np.asarray(w).imag  # future-directed
    # decay rate of |e^{ipw}| = e^{-p.Im w} along |k| -> inf
    delta = v[0] - np.linalg.norm(v[1:])
    if delta <= 0.0:
        raise DomainError("Im w not strictly past-directed")
    k_max = _TAIL_LOG / delta + 10.0 * m
    wr = np.asarray(w).real
    # angular resolution must track the largest phase k_max * |w_spatial|
    wsp = float(np.linalg.norm(np.abs(np.asarray(w)[1:])))
    n_theta = int(0.55 * k_max * wsp) + 40
    n_phi = 2 * n_theta
    # radial panels resolve oscillation in k of scale |w|
    osc = float(np.linalg.norm(np.abs(np.asarray(w)))) + 0.1
    width = min(2.0 * np.pi / (4.0 * osc), k_max / 16.0)
    n_panels = radial_factor * (int(np.ceil(k_max / width)) + 1)
    xg, wg = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(0.0, k_max, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return MassShellQuadrature(m, k_max, nodes, weights, n_theta, n_phi)


def _moments(w: np.ndarray, m: float, rule: MassShellQuadrature):
    """(M0, M^mu): integrals of e^{ipw} and p^mu e^{ipw} over the shell."""
    w = _check_im_past(w)
    ct, wt = np.polynomial.legendre.leggauss(rule.n_theta)
    st = np.sqrt(1.0 - ct**2)
    phi = 2.0 * np.pi * np.arange(rule.n_phi) / rule.n_phi
    wp = 2.0 * np.pi / rule.n_phi
    # unit directions, shape (T, P, 3)
    nhat = np.stack([
        np.outer(st, np.cos(phi)),
        np.outer(st, np.sin(phi)),
        np.outer(ct, np.ones_like(phi)),
    ], axis=-1)
    ang_w = (wt[:, None] * wp)  # (T,1) broadcast over phi
    M0 = 0.0 + 0.0j
    Mmu = np.zeros(4, dtype=complex)
    wsp = w[1:]
    chunk = max(1, int(2.0e6 / (rule.n_theta * rule.n_phi)))
    for i0 in range(0, rule.radial_nodes.size, chunk):
        k = rule.radial_nodes[i0:i0 + chunk]
        kw = rule.radial_weights[i0:i0 + chunk]
        E = np.sqrt(k * k + m * m)
        # phase e^{i(p^0 w^0 - k nhat.w_spatial)}, p^0 = -E
        ph_t = np.exp(-1j * E * w[0])                     # (K,)
        dots = np.einsum("tpc,c->tp", nhat, wsp)          # (T,P)
        ph_s = np.exp(-1j * k[:, None, None] * dots[None, :, :])  # (K,T,P)
        base = (kw * k * k * (-m * m / E) * ph_t)[:, None, None] * ph_s \
            * ang_w[None, :, :]
        ang_sum = np.sum(base, axis=(1, 2))               # (K,)
        M0 += np.sum(ang_sum)
        Mmu[0] += np.sum(-E * ang_sum)
        Mmu[1:] += np.einsum("ktp,tpc,k->c", base, nhat, k)
    return M0, Mmu


def d_quadrature(w: np.ndarray, m: float, radial_factor: int = 1) -> complex:
    """Reference value of the scalar kernel D(w); fixes the sign convention."""
    rule = build_rule(w, m, radial_factor)
    M0, _ = _moments(w, m, rule)
    return M0 / ((2.0 * np.pi) ** 3 * m)


def pminus_quadrature(w: np.ndarray, m: float, radial_factor: int = 1) -> np.ndarray:
    """Reference value of p_minus(w) via shell moments of 1 and p^mu."""
    rule = build_rule(w, m, radial_factor)
    M0, Mmu = _moments(w, m, rule)
    pslash = GAMMA[0] * Mmu[0] - sum(GAMMA[k] * Mmu[k] for k in (1, 2, 3))
    return (pslash + m * M0 * np.eye(4)) / (2.0 * m) / ((2.0 * np.pi) ** 3 * m)


def self_convergence_check(w: np.ndarray, m: float, tol: float = 1e-9) -> float:
    """Relative change of D under doubling the radial node count."""
    v1 = d_quadrature(w, m, radial_factor=1)
    v2 = d_quadrature(w, m, radial_factor=2)
    rel = abs(v1 - v2) / abs(v2)
    if rel > tol:
        raise ConvergenceError(f"radial doubling changed result by {rel:.2e}")
    return rel


def load_wset() -> list[dict]:
    """The versioned 20-point validation set shipped with the package."""
    text = importlib.resources.files("cauchyqed.data").joinpath(
        "oracle_wset.json").read_text()
    return json.loads(text)["points"]
