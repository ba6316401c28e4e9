"""Discretized integral operators on the surface Hilbert space.

Weight convention (uniform across the library): an assembled operator acts as
(K psi)(x_i) = sum_j k(x_i, x_j) Gamma_j psi_j w_j, i.e. the stored matrix has
4x4 blocks k(x_i, x_j) Gamma_j w_j.

The inner product of the discretized space is <phi, psi> = sum_i w_i
phi_i^* (gamma^0 Gamma_i) psi_i with positive-definite blocks
G_i = w_i gamma^0 Gamma_i.  Adjoints, operator norms and Hilbert-Schmidt
norms are all taken with respect to this Gram structure; the HS norm equals
the weighted double-sum of trace[gamma^0 k^* gamma^0 Gamma_i k Gamma_j],
which is checked explicitly in the tests.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .conventions import ALPHA, BETA, GAMMA0
from .errors import ConfigError, GridMismatch, NotSkewAdjoint
from .kernels import delta_phase_batch, p_minus_batch
from .surfaces import FlatSurface, SurfaceGrid

_CHUNK = 200_000  # pair-blocks per assembly chunk


@dataclass
class DiscretizedOperator:
    grid: SurfaceGrid
    matrix: np.ndarray  # (4M, 4M) complex
    approximate: bool = False  # e.g. epsilon-extrapolated curved P^-

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _blocks_to_matrix(blocks: np.ndarray) -> np.ndarray:
    # (M, M, 4, 4) -> (4M, 4M)
    M = blocks.shape[0]
    return blocks.transpose(0, 2, 1, 3).reshape(4 * M, 4 * M)


def _matrix_to_blocks(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0] // 4
    return mat.reshape(n, 4, n, 4).transpose(0, 2, 1, 3)


def gram_blocks(grid: SurfaceGrid):
    """(G_i, G_i^{1/2}, G_i^{-1/2}) for the discretized inner product."""
    G = grid.weights[:, None, None] * (GAMMA0 @ grid.gammas)
    G = 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))  # clean hermiticity
    vals, vecs = np.linalg.eigh(G)
    if np.any(vals <= 0):
        raise ConfigError("Gram blocks not positive definite")
    root = np.einsum("mab,mb,mcb->mac", vecs, np.sqrt(vals), np.conj(vecs))
    inv_root = np.einsum("mab,mb,mcb->mac", vecs, 1.0 / np.sqrt(vals), np.conj(vecs))
    return G, root, inv_root


def _block_diag_apply(blocks: np.ndarray, mat: np.ndarray, side: str) -> np.ndarray:
    """Multiply by the block-diagonal matrix built from (M,4,4) blocks."""
    n = blocks.shape[0]
    m4 = mat.reshape(n, 4, -1) if side == "left" else None
    if side == "left":
        return np.einsum("iab,ibk->iak", blocks, m4).reshape(mat.shape)
    m4 = mat.reshape(-1, n, 4)
    return np.einsum("kja,jab->kjb", m4, blocks).reshape(mat.shape)


def assemble(kernel_fn, grid: SurfaceGrid, diagonal: str = "exclude") -> DiscretizedOperator:
    """Assemble the matrix k(x_i, x_j) Gamma_j w_j from a batched kernel.

    kernel_fn(x, y) takes point arrays of shape (P, 4) and returns (P, 4, 4)
    blocks.  diagonal='exclude' zeroes the i = j blocks (integrable-singular
    kernels); 'include' evaluates them (regularized kernels, finite at x = y).
    """
    if diagonal not in ("exclude", "include"):
        raise ConfigError("diagonal rule must be 'exclude' or 'include'")
    M = grid.size
    blocks = np.zeros((M, M, 4, 4), dtype=complex)
    pts = grid.points
    ii, jj = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    if diagonal == "exclude":
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    for s in range(0, ii.size, _CHUNK):
        i = ii[s:s + _CHUNK]
        j = jj[s:s + _CHUNK]
        blocks[i, j] = kernel_fn(pts[i], pts[j])
    gw = grid.weights[:, None, None] * grid.gammas
    blocks = np.einsum("ijab,jbc->ijac", blocks, gw)
    return DiscretizedOperator(grid, _blocks_to_matrix(blocks))


def hs_norm(op: DiscretizedOperator) -> float:
    """Hilbert-Schmidt norm of the operator in the weighted inner product.

    Equals sqrt(sum_ij w_i w_j trace[gamma^0 k_ij^* gamma^0 Gamma_i k_ij
    Gamma_j]) for the operator's kernel blocks.
    """
    _, root, inv_root = gram_blocks(op.grid)
    tilde = _block_diag_apply(root, op.matrix, "left")
    tilde = _block_diag_apply(inv_root, tilde, "right")
    return float(np.linalg.norm(tilde))


def hs_norm_kernel(kernel_fn, grid: SurfaceGrid, diagonal: str = "exclude") -> float:
    """Streaming HS norm of a kernel: the weighted trace double sum, without
    storing the full matrix.  Used for fine-grid refinement studies."""
    M = grid.size
    pts = grid.points
    g = grid.gammas
    w = grid.weights
    total = 0.0
    ii, jj = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    if diagonal == "exclude":
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
    for s in range(0, ii.size, _CHUNK):
        i = ii[s:s + _CHUNK]
        j = jj[s:s + _CHUNK]
        k = kernel_fn(pts[i], pts[j])
        left = GAMMA0 @ np.conj(np.swapaxes(k, -1, -2)) @ GAMMA0
        tr = np.einsum("pab,pbc,pcd,pda->p", left, g[i], k, g[j])
        total += float(np.sum(tr.real * w[i] * w[j]))
    return float(np.sqrt(max(total, 0.0)))


def adjoint(op: DiscretizedOperator) -> np.ndarray:
    """Adjoint matrix with respect to the weighted inner product."""
    G, _, _ = gram_blocks(op.grid)
    Ginv = np.linalg.inv(G)
    mh = np.conj(op.matrix.T)
    out = _block_diag_apply(Ginv, mh, "left")
    return _block_diag_apply(G, out, "right")


def op_norm(op: DiscretizedOperator) -> float:
    """Operator norm in the weighted inner product (largest singular value)."""
    _, root, inv_root = gram_blocks(op.grid)
    tilde = _block_diag_apply(root, op.matrix, "left")
    tilde = _block_diag_apply(inv_root, tilde, "right")
    if tilde.shape[0] <= 600:
        return float(np.linalg.norm(tilde, 2))
    s = spla.svds(tilde, k=1, return_singular_vectors=False)
    return float(s[0])


def top_singular_values(op: DiscretizedOperator, k: int = 50) -> np.ndarray:
    _, root, inv_root = gram_blocks(op.grid)
    tilde = _block_diag_apply(root, op.matrix, "left")
    tilde = _block_diag_apply(inv_root, tilde, "right")
    if tilde.shape[0] <= 1200:
        s = np.linalg.svd(tilde, compute_uv=False)
        return s[:k]
    s = spla.svds(tilde, k=min(k, tilde.shape[0] - 2),
                  return_singular_vectors=False)
    return np.sort(s)[::-1]


@dataclass
class HSReport:
    hsNorm: float
    opNorm: float
    topSingularValues: np.ndarray
    projectorDefect: float


def projector_defect(op: DiscretizedOperator) -> float:
    d = DiscretizedOperator(op.grid, op.matrix @ op.matrix - op.matrix)
    return op_norm(d)


def hs_report(op: DiscretizedOperator, n_singular: int = 50) -> HSReport:
    return HSReport(
        hsNorm=hs_norm(op),
        opNorm=op_norm(op),
        topSingularValues=top_singular_values(op, n_singular),
        projectorDefect=projector_defect(op),
    )


# Flat-surface spectral oracle ----------------------------------------------

def pminus_flat_oracle(grid: SurfaceGrid, m: float) -> DiscretizedOperator:
    """Negative-energy projector on a flat uniform periodic grid, built by
    discrete Fourier conjugation of (1 - (alpha.p + beta m)/E(p))/2."""
    if not isinstance(grid.surface, FlatSurface):
        raise ConfigError("spectral oracle requires a flat surface")
    if grid.rule != "midpoint":
        raise ConfigError("spectral oracle requires the uniform midpoint rule")
    N = grid.N
    h = grid.h
    M = grid.size
    freqs = 2.0 * np.pi * np.fft.fftfreq(N, d=h)
    P3 = np.stack(np.meshgrid(freqs, freqs, freqs, indexing="ij"),
                  axis=-1).reshape(-1, 3)
    E = np.sqrt(np.sum(P3 * P3, axis=-1) + m * m)
    lam = 0.5 * (np.eye(4)[None, :, :]
                 - (np.einsum("kc,cab->kab", P3, ALPHA)
                    + m * BETA[None, :, :]) / E[:, None, None])
    # unitary plane-wave matrix W[i, k] = e^{i p_k . x_i} / sqrt(M)
    phase = grid.nodes @ P3.T
    W = np.exp(1j * phase) / np.sqrt(M)
    blocks = np.empty((M, M, 4, 4), dtype=complex)
    for a in range(4):
        for b in range(4):
            blocks[:, :, a, b] = (W * lam[:, a, b]) @ np.conj(W.T)
    return DiscretizedOperator(grid, _blocks_to_matrix(blocks))


def pminus_eps_kernel_operator(grid: SurfaceGrid, m: float, epsilon: float,
                               u=None) -> DiscretizedOperator:
    """Nystrom assembly of the regularized free kernel p_minus(z + i eps u)."""
    from .conventions import DEFAULT_U
    if u is None:
        u = DEFAULT_U
    u = np.asarray(u, dtype=float)
    if epsilon <= 0.0:
        raise ConfigError("epsilon must be positive for the regularized kernel")

    def kern(x, y):
        w = (y - x).astype(complex) + 1j * epsilon * u
        return p_minus_batch(w, m)

    return assemble(kern, grid, diagonal="include")


def pminus_curved_extrapolated(grid: SurfaceGrid, m: float, eps0: float = 0.4,
                               u=None) -> DiscretizedOperator:
    """Curved-surface P^- by Richardson extrapolation in epsilon (exponent 1/2,
    per the sqrt(eps) residual scaling); flagged approximate."""
    p1 = pminus_eps_kernel_operator(grid, m, eps0, u)
    p2 = pminus_eps_kernel_operator(grid, m, eps0 / 2.0, u)
    r = np.sqrt(2.0)
    mat = (r * p2.matrix - p1.matrix) / (r - 1.0)
    return DiscretizedOperator(grid, mat, approximate=True)


def delta_p_operator(grid: SurfaceGrid, A, m: float) -> DiscretizedOperator:
    """Assembled difference operator with kernel (e^{-i lambda^A} - 1) p^-."""

    def kern(x, y):
        ph = delta_phase_batch(A, x.real, y.real)
        return ph[:, None, None] * p_minus_batch((y - x).astype(complex), m)

    return assemble(kern, grid, diagonal="exclude")


def p_lambda(grid: SurfaceGrid, A, m: float,
             pminus: DiscretizedOperator | None = None) -> DiscretizedOperator:
    """Dressed projector P^- + Delta P^{lambda^A} on the grid."""
    if pminus is None:
        if isinstance(grid.surface, FlatSurface):
            pminus = pminus_flat_oracle(grid, m)
        else:
            pminus = pminus_curved_extrapolated(grid, m)
    if pminus.grid is not grid:
        raise GridMismatch("pminus built on a different grid")
    dp = delta_p_operator(grid, A, m)
    return DiscretizedOperator(grid, pminus.matrix + dp.matrix,
                               approximate=pminus.approximate)


def q_commutator(p_A: DiscretizedOperator,
                 p_minus_op: DiscretizedOperator) -> DiscretizedOperator:
    if p_A.grid is not p_minus_op.grid:
        raise GridMismatch("operands live on different grids")
    mat = p_A.matrix @ p_minus_op.matrix - p_minus_op.matrix @ p_A.matrix
    return DiscretizedOperator(p_A.grid, mat,
                               approximate=p_A.approximate or p_minus_op.approximate)


def skew_adjoint_defect(op: DiscretizedOperator) -> float:
    return op_norm(DiscretizedOperator(op.grid, op.matrix + adjoint(op)))


def exp_unitary(Q: DiscretizedOperator, defect_tol: float = 1e-8) -> DiscretizedOperator:
    """e^Q for skew-adjoint Q, via eigendecomposition of the hermitian iQ in
    Gram-orthonormal coordinates; exactly unitary up to roundoff."""
    defect = skew_adjoint_defect(Q)
    if defect > defect_tol:
        raise NotSkewAdjoint(f"skew-adjoint defect {defect:.2e} > {defect_tol:.1e}")
    _, root, inv_root = gram_blocks(Q.grid)
    tilde = _block_diag_apply(root, Q.matrix, "left")
    tilde = _block_diag_apply(inv_root, tilde, "right")
    H = 1j * 0.5 * (tilde - np.conj(tilde.T))
    vals, vecs = np.linalg.eigh(H)
    expm = (vecs * np.exp(-1j * vals)) @ np.conj(vecs.T)
    out = _block_diag_apply(inv_root, expm, "left")
    out = _block_diag_apply(root, out, "right")
    return DiscretizedOperator(Q.grid, out, approximate=Q.approximate)


def representative_projector(p_minus_op: DiscretizedOperator,
                             Q: DiscretizedOperator):
    """Pi = e^Q P^- e^{-Q} and its diagnostic report."""
    eQ = exp_unitary(Q)
    eQm = exp_unitary(DiscretizedOperator(Q.grid, -Q.matrix, Q.approximate))
    Pi = DiscretizedOperator(Q.grid, eQ.matrix @ p_minus_op.matrix @ eQm.matrix,
                             approximate=Q.approximate or p_minus_op.approximate)
    return Pi, hs_report(Pi)


def tangential_dichotomy_experiment(A, B, surface, L: float, N_list, m: float):
    """HS norm of Delta P^{lambda^A} - Delta P^{lambda^B} per refinement level.

    Returns rows of (N, h, hsNorm) plus the fitted growth exponent of
    hsNorm^2 with respect to 1/h.
    """
    from .surfaces import make_grid

    rows = []
    for N in N_list:
        grid = make_grid(surface, L, N, "midpoint")

        def kern(x, y):
            phA = delta_phase_batch(A, x.real, y.real)
            phB = delta_phase_batch(B, x.real, y.real)
            return (phA - phB)[:, None, None] * p_minus_batch(
                (y - x).astype(complex), m)

        hs = hs_norm_kernel(kern, grid, diagonal="exclude")
        rows.append({"N": int(N), "h": grid.h, "hsNorm": hs})
    hs_vals = np.array([r["hsNorm"] for r in rows])
    h_vals = np.array([r["h"] for r in rows])
    if np.all(hs_vals > 0):
        slope = np.polyfit(np.log(1.0 / h_vals), np.log(hs_vals**2), 1)[0]
    else:
        slope = 0.0
    return {"rows": rows, "growth_exponent_vs_invh": float(slope)}
