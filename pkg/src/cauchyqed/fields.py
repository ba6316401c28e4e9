"""Smooth compactly supported vector potentials and gauge functions.

Fields are finite sums of translated/scaled mollifier bumps
phi(s) = exp(-1/(1-s^2)) for |s| < 1 (else 0), with s = |x - x0|_euclid / R in
R^4.  This gives exact compact support and analytic derivatives up to second
order, which the kernel convergence studies require.

Component convention: amplitudes are the covariant components A_mu, so
contractions like A_mu z^mu are plain component sums.
"""

from dataclasses import dataclass

import numpy as np


def bump(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def bump_d1(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si**2
    out[inside] = np.exp(-1.0 / q) * (-2.0 * si / q**2)
    return out


def bump_d2(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1.0
    si = s[inside]
    q = 1.0 - si**2
    out[inside] = np.exp(-1.0 / q) * (
        4.0 * si**2 / q**4 - 2.0 / q**2 - 8.0 * si**2 / q**3
    )
    return out


@dataclass(frozen=True)
class BumpTerm:
    amplitude: np.ndarray  # covariant c_mu
    center: np.ndarray     # FourVector x0
    radius: float


class ExternalField:
    """A_mu(x) = sum of c_mu phi(|x - x0|/R) terms, with analytic derivatives."""

    def __init__(self, terms: list[BumpTerm]):
        self.terms = [
            BumpTerm(np.asarray(t.amplitude, dtype=float),
                     np.asarray(t.center, dtype=float), float(t.radius))
            for t in terms
        ]

    @classmethod
    def single(cls, amplitude, center=(0.0, 0.0, 0.0, 0.0), radius=1.0):
        return cls([BumpTerm(np.asarray(amplitude, float),
                             np.asarray(center, float), radius)])

    @classmethod
    def zero(cls):
        return cls([])

    @property
    def support_radius(self) -> float:
        """Radius of a ball around the origin containing supp A (spatial bound)."""
        if not self.terms:
            return 0.0
        return max(float(np.linalg.norm(t.center)) + t.radius for t in self.terms)

    def is_zero(self) -> bool:
        return not self.terms or all(
            np.all(t.amplitude == 0.0) for t in self.terms
        )

    def _sdata(self, x: np.ndarray, t: BumpTerm):
        d = x - t.center
        rho = np.sqrt(np.sum(d * d, axis=-1))
        s = rho / t.radius
        return d, rho, s

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for t in self.terms:
            _, _, s = self._sdata(x, t)
            out = out + bump(s)[..., None] * t.amplitude
        return out

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """J[..., mu, nu] = d A_nu / d x^mu (analytic)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[:-1] + (4, 4))
        for t in self.terms:
            d, rho, s = self._sdata(x, t)
            inside = s < 1.0
            if not np.any(inside):
                continue
            # ds/dx^mu = d_mu / (R rho); rho > 0 wherever phi' != 0
            grad_s = np.zeros(x.shape)
            grad_s[inside] = d[inside] / (t.radius * rho[inside, None])
            db = bump_d1(s)
            out = out + db[..., None, None] * grad_s[..., :, None] * t.amplitude
        return out

    def hessian(self, x: np.ndarray) -> np.ndarray:
        """H[..., mu, nu, sig] = d_mu d_nu A_sig (analytic)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[:-1] + (4, 4, 4))
        for t in self.terms:
            d, rho, s = self._sdata(x, t)
            inside = (s < 1.0) & (rho > 0.0)
            if not np.any(inside):
                continue
            di = d[inside]
            rhoi = rho[inside, None]
            gs = di / (t.radius * rhoi)                      # ds/dx^mu
            uhat = di / rhoi
            hess_s = (np.eye(4)[None, :, :] -
                      uhat[:, :, None] * uhat[:, None, :]) / (t.radius * rhoi[:, :, None])
            db1 = bump_d1(s[inside])[:, None, None]
            db2 = bump_d2(s[inside])[:, None, None]
            phi_h = db2 * gs[:, :, None] * gs[:, None, :] + db1 * hess_s
            out[inside] += phi_h[..., None] * t.amplitude
        return out

    def field_strength(self, x: np.ndarray) -> np.ndarray:
        """F[..., mu, nu] = d_mu A_nu - d_nu A_mu (both indices lower)."""
        J = self.jacobian(x)
        return J - np.swapaxes(J, -1, -2)


class GaugeFunction:
    """Scalar bump Omega(x) = a phi(|x - x0|/R) with analytic gradient/Hessian."""

    def __init__(self, amplitude: float, center=(0.0, 0.0, 0.0, 0.0), radius=1.0):
        self.amplitude = float(amplitude)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def _sdata(self, x):
        d = x - self.center
        rho = np.sqrt(np.sum(d * d, axis=-1))
        return d, rho, rho / self.radius

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _, _, s = self._sdata(x)
        return self.amplitude * bump(s)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """d Omega / d x^mu (lower index)."""
        x = np.asarray(x, dtype=float)
        d, rho, s = self._sdata(x)
        out = np.zeros(x.shape)
        inside = s < 1.0
        if np.any(inside):
            gs = np.zeros(x.shape)
            gs[inside] = d[inside] / (self.radius * rho[inside, None])
            out = self.amplitude * bump_d1(s)[..., None] * gs
        return out

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d, rho, s = self._sdata(x)
        out = np.zeros(x.shape[:-1] + (4, 4))
        inside = (s < 1.0) & (rho > 0.0)
        if np.any(inside):
            di = d[inside]
            rhoi = rho[inside, None]
            gs = di / (self.radius * rhoi)
            uhat = di / rhoi
            hess_s = (np.eye(4)[None, :, :] -
                      uhat[:, :, None] * uhat[:, None, :]) / (self.radius * rhoi[:, :, None])
            out[inside] = self.amplitude * (
                bump_d2(s[inside])[:, None, None] * gs[:, :, None] * gs[:, None, :]
                + bump_d1(s[inside])[:, None, None] * hess_s
            )
        return out


class GradientField:
    """The pure-gauge field dOmega; value/jacobian only (no second derivatives)."""

    def __init__(self, omega: GaugeFunction):
        self.omega = omega

    @property
    def support_radius(self) -> float:
        return float(np.linalg.norm(self.omega.center)) + self.omega.radius

    def value(self, x):
        return self.omega.gradient(x)

    def jacobian(self, x):
        return self.omega.hessian(x)

    def field_strength(self, x):
        J = self.jacobian(x)
        return J - np.swapaxes(J, -1, -2)


class SumField:
    """Pointwise sum of field-like objects."""

    def __init__(self, *parts):
        self.parts = parts

    @property
    def support_radius(self) -> float:
        return max(p.support_radius for p in self.parts)

    def is_zero(self) -> bool:
        return all(getattr(p, "is_zero", lambda: False)() for p in self.parts)

    def value(self, x):
        return sum(p.value(x) for p in self.parts)

    def jacobian(self, x):
        return sum(p.jacobian(x) for p in self.parts)

    def hessian(self, x):
        return sum(p.hessian(x) for p in self.parts)

    def field_strength(self, x):
        J = self.jacobian(x)
        return J - np.swapaxes(J, -1, -2)


class NormalBumpField:
    """Perturbation a phi(|x - x0|/R) n_mu(x3) along the conormal of a surface.

    Tangential contractions vanish identically (n is Minkowski-orthogonal to
    every tangent), so adding this field leaves the tangential components of a
    potential untouched.  Only values are provided; the dichotomy experiment
    needs no derivatives of the perturbation.
    """

    def __init__(self, surface, amplitude: float,
                 center=(0.0, 0.0, 0.0, 0.0), radius=1.0):
        self.surface = surface
        self.amplitude = float(amplitude)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    @property
    def support_radius(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = x - self.center
        s = np.sqrt(np.sum(d * d, axis=-1)) / self.radius
        n = self.surface.normal_batch(x[..., 1:])
        n_low = n * np.array([1.0, -1.0, -1.0, -1.0])
        return self.amplitude * bump(s)[..., None] * n_low


def field_strength(A, x: np.ndarray) -> np.ndarray:
    return A.field_strength(np.asarray(x, dtype=float))


def electric_field(A, n: np.ndarray):
    """E_mu(x) = F_{mu nu}(x) n^nu for a fixed unit future-directed normal n."""
    n = np.asarray(n, dtype=float)
    if abs(n[0] ** 2 - np.sum(n[1:] ** 2) - 1.0) > 1e-10 or n[0] <= 0:
        raise ValueError("n must be a future-directed unit time-like vector")

    def E(x):
        F = A.field_strength(x)
        return np.einsum("...mn,n->...m", F, n)

    return E


def gauge_transform(A, omega: GaugeFunction) -> SumField:
    """The gauge-shifted potential A + dOmega."""
    return SumField(A, GradientField(omega))


def tangential_difference(A, B, surface, grid) -> float:
    """max over grid nodes and tangent directions of |(A_mu - B_mu) tau_k^mu|.

    tau_k = (d_k t, e_k) are the coordinate tangents of the graph surface.
    """
    x = grid.points
    dv = np.asarray(A.value(x)) - np.asarray(B.value(x))
    g = surface.grad_batch(grid.nodes)  # (M, 3)
    # contraction dv_mu tau_k^mu = dv_0 d_k t + dv_k
    contr = dv[:, 0][:, None] * g + dv[:, 1:]
    return float(np.max(np.abs(contr)))
