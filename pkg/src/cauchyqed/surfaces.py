"""Graph Cauchy surfaces, their normals and spinor weights, quadrature grids,
and one-parameter families of surfaces.

A surface is the graph t = height(x3) over R^3 with closed-form gradient and
Hessian and a uniform slope bound v_max < 1.  All geometric quantities used by
the kernels (normal, Gamma weight, their spatial derivatives) are analytic.
"""

from dataclasses import dataclass

import numpy as np

from .conventions import GAMMA, GAMMA0
from .errors import ConfigError

_SPACE_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


class CauchySurface:
    """Base class; subclasses provide height/grad/hess (batched) and v_max."""

    v_max: float

    def height(self, xv: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_batch(self, xv: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess_batch(self, xv: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # Derived geometry ------------------------------------------------------

    def embed_batch(self, xv: np.ndarray) -> np.ndarray:
        xv = np.atleast_2d(np.asarray(xv, dtype=float))
        return np.concatenate([self.height(xv)[..., None], xv], axis=-1)

    def normal_batch(self, xv: np.ndarray) -> np.ndarray:
        """Future-directed unit normal n = (1, grad t)/sqrt(1 - |grad t|^2)."""
        xv = np.atleast_2d(np.asarray(xv, dtype=float))
        g = self.grad_batch(xv)
        rho = np.sqrt(1.0 - np.sum(g * g, axis=-1))
        return np.concatenate([np.ones(g.shape[:-1] + (1,)), g], axis=-1) / rho[..., None]

    def dnormal_batch(self, xv: np.ndarray) -> np.ndarray:
        """Spatial derivatives dn^mu/dx^k; shape (M, 3, 4), first index k."""
        xv = np.atleast_2d(np.asarray(xv, dtype=float))
        g = self.grad_batch(xv)            # (M,3)
        H = self.hess_batch(xv)            # (M,3,3), H[m,j,k] = d_j d_k t
        rho = np.sqrt(1.0 - np.sum(g * g, axis=-1))  # (M,)
        gH = np.einsum("mj,mjk->mk", g, H)  # (g . d_k grad t)
        drho_inv = gH / rho[:, None] ** 3   # d_k (1/rho)
        out = np.zeros(xv.shape[:-1] + (3, 4))
        out[..., :, 0] = drho_inv
        out[..., :, 1:] = (np.swapaxes(H, -1, -2) / rho[:, None, None]
                           + drho_inv[:, :, None] * g[:, None, :])
        return out

    def gamma_weight_batch(self, xv: np.ndarray) -> np.ndarray:
        """Gamma(x3) = gamma^0 - sum_k gamma^k d_k t; shape (M, 4, 4)."""
        xv = np.atleast_2d(np.asarray(xv, dtype=float))
        g = self.grad_batch(xv)
        return GAMMA0 - np.einsum("mk,kab->mab", g, GAMMA[1:])


def embed(surface: CauchySurface, xv) -> np.ndarray:
    return surface.embed_batch(np.asarray(xv, float)[None, :])[0]


def normal(surface: CauchySurface, xv) -> np.ndarray:
    return surface.normal_batch(np.asarray(xv, float)[None, :])[0]


def gamma_weight(surface: CauchySurface, xv) -> np.ndarray:
    return surface.gamma_weight_batch(np.asarray(xv, float)[None, :])[0]


class FlatSurface(CauchySurface):
    v_max = 0.0

    def height(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return np.zeros(xv.shape[:-1])

    def grad_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return np.zeros(xv.shape)

    def hess_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return np.zeros(xv.shape[:-1] + (3, 3))


class TiltedSurface(CauchySurface):
    """t = v sigma tanh(x1/sigma): slope v near the origin, flattening far out.

    sup |grad t| = v, attained at x1 = 0.
    """

    def __init__(self, slope: float = 0.3, sigma: float = 2.0):
        if not 0.0 < slope < 1.0:
            raise ConfigError("slope must lie in (0, 1)")
        self.slope = float(slope)
        self.sigma = float(sigma)
        self.v_max = float(slope)

    def height(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return self.slope * self.sigma * np.tanh(xv[..., 0] / self.sigma)

    def grad_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        g = np.zeros(xv.shape)
        g[..., 0] = self.slope / np.cosh(xv[..., 0] / self.sigma) ** 2
        return g

    def hess_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        H = np.zeros(xv.shape[:-1] + (3, 3))
        c = np.cosh(xv[..., 0] / self.sigma)
        H[..., 0, 0] = -2.0 * self.slope * np.tanh(xv[..., 0] / self.sigma) / (
            self.sigma * c * c)
        return H


class GaussianBumpSurface(CauchySurface):
    """t = a exp(-|x3|^2 / (2 sigma^2)); sup |grad t| = a/(sigma sqrt(e))."""

    def __init__(self, amplitude: float = 0.5, sigma: float = 1.5):
        self.amplitude = float(amplitude)
        self.sigma = float(sigma)
        self.v_max = abs(amplitude) / (self.sigma * np.sqrt(np.e))
        if self.v_max >= 1.0:
            raise ConfigError("bump too steep: |grad t| reaches 1")

    def height(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return self.amplitude * np.exp(-np.sum(xv * xv, axis=-1) / (2 * self.sigma**2))

    def grad_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        return -self.height(xv)[..., None] * xv / self.sigma**2

    def hess_batch(self, xv):
        xv = np.atleast_2d(np.asarray(xv, float))
        h = self.height(xv)
        s2 = self.sigma**2
        return (h[..., None, None]
                * (xv[..., :, None] * xv[..., None, :] / s2 - np.eye(3)) / s2)


class ScaledSurface(CauchySurface):
    """s times a base profile chi(x3); used as the slice of a linear family."""

    def __init__(self, base: CauchySurface, s: float):
        self.base = base
        self.s = float(s)
        self.v_max = abs(s) * base.v_max
        if self.v_max >= 1.0:
            raise ConfigError("scaled surface violates the slope bound")

    def height(self, xv):
        return self.s * self.base.height(xv)

    def grad_batch(self, xv):
        return self.s * self.base.grad_batch(xv)

    def hess_batch(self, xv):
        return self.s * self.base.hess_batch(xv)


@dataclass(frozen=True)
class SurfaceGrid:
    surface: CauchySurface
    L: float
    N: int
    rule: str
    nodes: np.ndarray    # (M, 3) spatial nodes
    weights: np.ndarray  # (M,)
    points: np.ndarray   # (M, 4) embedded
    gammas: np.ndarray   # (M, 4, 4)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N


def make_grid(surface: CauchySurface, L: float, N: int, rule: str = "midpoint",
              support_radius: float | None = None,
              margin: float | None = None) -> SurfaceGrid:
    """Tensor-product quadrature grid on [-L, L]^3, embedded in the surface.

    If support_radius is given, L must exceed it by the decay margin (default
    10/m with m=1) so kernel tails beyond the box are negligible.
    """
    if N < 4:
        raise ConfigError("N must be >= 4")
    if L <= 0:
        raise ConfigError("L must be positive")
    if support_radius is not None:
        need = support_radius + (10.0 if margin is None else margin)
        if L < need:
            raise ConfigError(
                f"truncation L={L} smaller than field support + margin = {need}")
    if rule == "midpoint":
        h = 2.0 * L / N
        x1 = -L + h * (np.arange(N) + 0.5)
        w1 = np.full(N, h)
    elif rule == "gauss":
        x1, w1 = np.polynomial.legendre.leggauss(N)
        x1 = L * x1
        w1 = L * w1
    else:
        raise ConfigError(f"unknown rule {rule!r}")
    X = np.stack(np.meshgrid(x1, x1, x1, indexing="ij"), axis=-1).reshape(-1, 3)
    W = (w1[:, None, None] * w1[None, :, None] * w1[None, None, :]).reshape(-1)
    pts = surface.embed_batch(X)
    gam = surface.gamma_weight_batch(X)
    return SurfaceGrid(surface, float(L), int(N), rule, X, W, pts, gam)


class SurfaceFamily:
    """Linear family t(x3, s) = s * chi(x3) interpolating flat -> curved."""

    def __init__(self, base: CauchySurface, s_range=(0.0, 1.0)):
        self.base = base
        self.s_range = (float(s_range[0]), float(s_range[1]))
        for s in self.s_range:
            ScaledSurface(base, s)  # validates the slope bound at the ends

    def slice(self, s: float) -> ScaledSurface:
        return ScaledSurface(self.base, s)

    def dheight_ds(self, xv: np.ndarray, s: float) -> np.ndarray:
        return self.base.height(xv)

    def dgrad_ds(self, xv: np.ndarray, s: float) -> np.ndarray:
        return self.base.grad_batch(xv)

    def dnormal_ds(self, xv: np.ndarray, s: float) -> np.ndarray:
        """d/ds of the slice normal at fixed x3; shape (M, 4)."""
        xv = np.atleast_2d(np.asarray(xv, float))
        surf = self.slice(s)
        g = surf.grad_batch(xv)
        dg = self.dgrad_ds(xv, s)
        rho2 = 1.0 - np.sum(g * g, axis=-1)
        rho = np.sqrt(rho2)
        gdg = np.sum(g * dg, axis=-1)
        # n = (1, g)/rho; d_s n = (0, dg)/rho + (1, g) g.dg / rho^3
        n_unnorm = np.concatenate([np.ones(g.shape[:-1] + (1,)), g], axis=-1)
        dn = np.concatenate([np.zeros(g.shape[:-1] + (1,)), dg], axis=-1) / rho[..., None]
        return dn + n_unnorm * (gdg / rho / rho2)[..., None]


def family_velocity(family: SurfaceFamily, xv: np.ndarray, s: float):
    """Normal velocity v = n^0 d_s t and the slice normal n at x3."""
    xv = np.atleast_2d(np.asarray(xv, float))
    surf = family.slice(s)
    n = surf.normal_batch(xv)
    v = n[..., 0] * family.dheight_ds(xv, s)
    return v, n
