"""Flow derivative of kernels along a family of Cauchy surfaces, the leading
singular term, its cancellation by the counter-kernel, and the Hilbert-Schmidt
remainder per slice.

For a two-point kernel k the flow derivative is

    Dflow k(x,y) = v(x) nslash(x) (i dslash_x - Aslash(x) - m) k(x,y)
                   - [ (-i d_y k) gamma - k (Aslash(y) + m) ] v(y) nslash(y),

with all derivatives analytic: phase derivatives from lambda^A, kernel
derivatives from the D Hessian, geometry derivatives from the closed-form
surface family.  The leading singular part of Dflow p is
-(i/2m) v(x) z^mu E_mu(x) dslash D(w); adding the counter-kernel s cancels it.
"""

from dataclasses import dataclass

import numpy as np

from .conventions import DEFAULT_U, GAMMA, METRIC
from .errors import FitError
from .kernels import d_eval_batch, lambda_A
from .minkowski import lower, slash, slash_cov
from .surfaces import SurfaceFamily, family_velocity

_EYE = np.eye(4, dtype=complex)


@dataclass(frozen=True)
class FlowEval:
    dAp: np.ndarray        # Dflow p^{A,eps u}
    leading: np.ndarray    # -(i/2m) v z.E dslashD
    dApPlusS: np.ndarray   # Dflow (p + s)^{A,eps u}
    sDot: np.ndarray       # d/ds of the counter-kernel at fixed (x, y)
    zNorm: float
    epsilon: float


def _phase_grads(A, x, y):
    """(lambda, d_x lambda, d_y lambda); gradients carry the lower index."""
    lam = lambda_A(A, x, y)
    Ax, Ay = A.value(x), A.value(y)
    Jx, Jy = A.jacobian(x), A.jacobian(y)
    diff = x - y
    gx = 0.5 * np.einsum("pmn,pn->pm", Jx, diff) + 0.5 * (Ax + Ay)
    gy = 0.5 * np.einsum("pmn,pn->pm", Jy, diff) - 0.5 * (Ax + Ay)
    return lam, gx, gy


def _geometry(family: SurfaceFamily, s: float, x):
    """Normal, normal velocity, and their analytic derivatives at slice s."""
    xv = x[:, 1:]
    surf = family.slice(s)
    v, n = family_velocity(family, xv, s)
    dn_dx = surf.dnormal_batch(xv)      # (M, 3, 4)
    dn4 = np.zeros(x.shape[:-1] + (4, 4))
    dn4[:, 1:, :] = dn_dx               # d/dx^mu n^nu, zero for mu = 0
    dn_ds = family.dnormal_ds(xv, s)
    return surf, v, n, dn4, dn_ds


def _electric(A, x, n):
    F = A.field_strength(x)                      # (M,4,4) lower
    E = np.einsum("pmn,pn->pm", F, n)            # E_mu = F_{mu nu} n^nu
    return F, E


def _dE_dx(A, x, n, dn4):
    """d_mu E_nu = (d_mu F_{nu s}) n^s + F_{nu s} d_mu n^s; (M,4,4)."""
    H = A.hessian(x)                             # d_mu d_nu A_s
    dF = H - np.swapaxes(H, 1, 2)                # d_mu F_{nu s}
    F = A.field_strength(x)
    return (np.einsum("pmns,ps->pmn", dF, n)
            + np.einsum("pns,pms->pmn", F, dn4))


def flow_kernel_batch(family: SurfaceFamily, s: float, A,
                      x: np.ndarray, y: np.ndarray,
                      epsilon: float, m: float, u=None):
    """All flow-derivative quantities on batches of slice points (P, 4).

    Returns a dict of (P,4,4) arrays: dAp, leading, dAs, sDot, plus s_kernel.
    """
    if u is None:
        u = DEFAULT_U
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    u = np.asarray(u, dtype=float)
    w = (y - x).astype(complex) + 1j * epsilon * u
    z = y - x

    D, gradD, hessD = d_eval_batch(w, m)
    sD = slash_cov(gradD)                                   # dslashD
    p = (-1j * sD + m * D[:, None, None] * _EYE) / (2.0 * m)
    # dp/dw^mu (lower mu): (P, 4mu, 4, 4)
    dp = (-1j * slash_cov(hessD)
          + m * gradD[:, :, None, None] * _EYE) / (2.0 * m)

    lam, glx, gly = _phase_grads(A, x, y)
    phase = np.exp(-1j * lam)[:, None, None]

    surf, vx, nx, dnx, dn_ds_x = _geometry(family, s, x)
    vy, ny = _geom_y(family, s, y)

    Ax, Ay = A.value(x), A.value(y)

    # left Dirac operator on the dressed kernel:
    # (i g^mu d^x_mu - Aslash(x) - m) [phase p(w)]
    # d^x_mu phase = -i (d_x lambda)_mu phase;  d^x_mu p(w) = -dp_mu
    left_grad = (-1j * glx[:, :, None, None]) * phase[:, None] * p[:, None] \
        - phase[:, None] * dp
    DxK = 1j * np.einsum("mab,pmbc->pac", GAMMA, left_grad) \
        - (slash_cov(Ax) + m * _EYE) @ (phase * p)
    # right operator: k <- (-i d_y) gamma - k (Aslash(y) + m)
    right_grad = (-1j * gly[:, :, None, None]) * phase[:, None] * p[:, None] \
        + phase[:, None] * dp
    KDy = -1j * np.einsum("pmab,mbc->pac", right_grad, GAMMA) \
        - (phase * p) @ (slash_cov(Ay) + m * _EYE)

    nsx = slash(nx)
    nsy = slash(ny)
    dAp = vx[:, None, None] * (nsx @ DxK) - (KDy @ nsy) * vy[:, None, None]

    Fx, Ex = _electric(A, x, nx)
    zE = np.sum(z * Ex, axis=-1)
    leading = (-1j / (2.0 * m)) * (vx * zE)[:, None, None] * sD

    # counter-kernel s = (1/8m) B(x) T(w), B = nslash Eslash, T = r^2 dslashD
    r2 = -np.sum(lower(w) * w, axis=-1)
    T = r2[:, None, None] * sD
    # dT/dw^mu = -2 w_mu dslashD + r^2 g^nu hess_{mu nu}
    dT = (-2.0 * lower(w)[:, :, None, None] * sD[:, None]
          + r2[:, None, None, None] * np.einsum("nab,pmn->pmab", GAMMA, hessD))
    Es = slash_cov(Ex)
    B = nsx @ Es
    s_ker = B @ T / (8.0 * m)
    # d_mu B(x) = (d_mu nslash) Eslash + nslash (d_mu Eslash)
    dEx = _dE_dx(A, x, nx, dnx)
    dB = slash(dnx) @ Es[:, None] + nsx[:, None] @ slash_cov(dEx)
    # d^x_mu s = (1/8m) [dB T - B dT];  d^y_mu s = (1/8m) B dT
    dxs = (dB @ T[:, None] - B[:, None] @ dT) / (8.0 * m)
    dys = (B[:, None] @ dT) / (8.0 * m)
    Dxs = 1j * np.einsum("mab,pmbc->pac", GAMMA, dxs) \
        - (slash_cov(Ax) + m * _EYE) @ s_ker
    sDy = -1j * np.einsum("pmab,mbc->pac", dys, GAMMA) \
        - s_ker @ (slash_cov(Ay) + m * _EYE)
    dAs = vx[:, None, None] * (nsx @ Dxs) - (sDy @ nsy) * vy[:, None, None]

    # d/ds of s at fixed (x, y): only B depends on the slice parameter
    dE_ds = np.einsum("pns,ps->pn", Fx, dn_ds_x)
    dB_ds = slash(dn_ds_x) @ Es + nsx @ slash_cov(dE_ds)
    s_dot = dB_ds @ T / (8.0 * m)

    return {
        "p": phase * p, "s": s_ker, "dAp": dAp, "leading": leading,
        "dAs": dAs, "dApPlusS": dAp + dAs, "sDot": s_dot,
        "zNorm": np.linalg.norm(z[:, 1:], axis=-1),
    }


def _geom_y(family, s, y):
    yv = y[:, 1:]
    v, n = family_velocity(family, yv, s)
    return v, n


def lower_batch(t: np.ndarray) -> np.ndarray:
    """Lower the last index of a (..., 4) tensor stack."""
    return t * np.array([1.0, -1.0, -1.0, -1.0])


def flow_derivative_kernel(family: SurfaceFamily, s: float, A,
                           x: np.ndarray, y: np.ndarray,
                           epsilon: float, m: float) -> FlowEval:
    out = flow_kernel_batch(family, s, A, np.asarray(x, float)[None, :],
                            np.asarray(y, float)[None, :], epsilon, m)
    return FlowEval(out["dAp"][0], out["leading"][0], out["dApPlusS"][0],
                    out["sDot"][0], float(out["zNorm"][0]), float(epsilon))


def s_dot_kernel(family: SurfaceFamily, s: float, A,
                 x: np.ndarray, y: np.ndarray,
                 epsilon: float, m: float) -> np.ndarray:
    out = flow_kernel_batch(family, s, A, np.asarray(x, float)[None, :],
                            np.asarray(y, float)[None, :], epsilon, m)
    return out["sDot"][0]


def residual_scaling(family: SurfaceFamily, s: float, A, epsilon: float,
                     z_samples: np.ndarray, m: float,
                     center=(0.0, 0.0, 0.0)):
    """Log-log slopes of ||Dflow p|| and ||Dflow (p+s)|| versus |z3|.

    z_samples: radii in [0.1, 2]; sample pairs are placed around `center`
    inside the field support on the slice.
    """
    if getattr(A, "is_zero", lambda: False)():
        return {"status": "ZeroField"}
    radii = np.asarray(z_samples, dtype=float)
    if radii.size < 5 or np.ptp(radii) == 0.0:
        raise FitError("need at least 5 distinct |z| samples")
    surf = family.slice(s)
    c = np.asarray(center, dtype=float)
    rng = np.random.default_rng(12345)
    dirs = rng.normal(size=(radii.size, 3))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    xv = np.tile(c, (radii.size, 1))
    yv = c + radii[:, None] * dirs
    x = surf.embed_batch(xv)
    y = surf.embed_batch(yv)
    out = flow_kernel_batch(family, s, A, x, y, epsilon, m)
    n_raw = np.linalg.norm(out["dAp"], axis=(1, 2))
    n_cor = np.linalg.norm(out["dApPlusS"], axis=(1, 2))
    if np.any(n_raw == 0.0) or np.any(n_cor == 0.0):
        raise FitError("kernel vanished at a sample; move samples into supp A")
    lz = np.log(out["zNorm"])
    slope_without = float(np.polyfit(lz, np.log(n_raw), 1)[0])
    slope_with = float(np.polyfit(lz, np.log(n_cor), 1)[0])
    return {"status": "ok", "slopeWithoutS": slope_without,
            "slopeWithS": slope_with}


def epsilon_exponent(family: SurfaceFamily, s: float, A, m: float,
                     z_norm: float = 0.3, eps_list=(1e-2, 1e-3, 1e-4),
                     center=(0.0, 0.0, 0.0), direction=(1.0, 0.0, 0.0)) -> float:
    """Fitted exponent alpha of ||Dflow(p+s)(eps) - Dflow(p+s)(0)|| ~ eps^alpha."""
    surf = family.slice(s)
    c = np.asarray(center, float)
    d = np.asarray(direction, float)
    d /= np.linalg.norm(d)
    x = surf.embed_batch(c[None, :])
    y = surf.embed_batch((c + z_norm * d)[None, :])
    base = flow_kernel_batch(family, s, A, x, y, 0.0, m)["dApPlusS"][0]
    diffs = []
    for eps in eps_list:
        cur = flow_kernel_batch(family, s, A, x, y, float(eps), m)["dApPlusS"][0]
        diffs.append(np.linalg.norm(cur - base))
    diffs = np.asarray(diffs)
    if np.any(diffs == 0.0):
        raise FitError("epsilon residual vanished")
    return float(np.polyfit(np.log(np.asarray(eps_list)), np.log(diffs), 1)[0])


def remainder_kernel_batch(family: SurfaceFamily, s: float, A,
                           x: np.ndarray, y: np.ndarray, m: float) -> np.ndarray:
    """Kernel of the bounded remainder at eps = 0:
    -i Dflow(p + s) + d_s s, off-diagonal on the slice."""
    out = flow_kernel_batch(family, s, A, x, y, 0.0, m)
    return -1j * out["dApPlusS"] + out["sDot"]


def remainder_hs_estimate(family: SurfaceFamily, s_values, A,
                          L: float, N: int, m: float):
    """Per-slice HS norms of the remainder operator; diagonal excluded."""
    from .operators import hs_norm_kernel
    from .surfaces import make_grid

    norms = []
    for s in s_values:
        surf = family.slice(float(s))
        grid = make_grid(surf, L, N, "midpoint")

        def kern(xx, yy, _s=float(s)):
            return remainder_kernel_batch(family, _s, A, xx.real, yy.real, m)

        norms.append(hs_norm_kernel(kern, grid, diagonal="exclude"))
    return {"s": [float(v) for v in s_values], "hsNorm": norms,
            "sup": float(np.max(norms))}
