"""Sign and representation conventions, fixed in one place.

Every other module imports these constants instead of restating them.  Each
convention is pinned by at least one test, listed in CONVENTIONS below and
checked by tests/test_conventions.py.
"""

from dataclasses import dataclass

import numpy as np

# Metric signature (+,-,-,-) on R^4.
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
_sigma2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_sigma3 = np.array([[1, 0], [0, -1]], dtype=complex)
_zero2 = np.zeros((2, 2), dtype=complex)
_id2 = np.eye(2, dtype=complex)


def _gamma0() -> np.ndarray:
    return np.block([[_id2, _zero2], [_zero2, -_id2]])


def _gamma_k(sigma: np.ndarray) -> np.ndarray:
    return np.block([[_zero2, sigma], [-sigma, _zero2]])


# Standard (Dirac) representation: gamma^0 = diag(1,1,-1,-1),
# gamma^k = [[0, sigma_k], [-sigma_k, 0]].
GAMMA = np.stack([_gamma0(), _gamma_k(_sigma1), _gamma_k(_sigma2), _gamma_k(_sigma3)])
GAMMA0 = GAMMA[0]
IDENTITY4 = np.eye(4, dtype=complex)

# Covariant gammas gamma_mu = g_{mu nu} gamma^nu.
GAMMA_LOWER = np.stack([GAMMA[0], -GAMMA[1], -GAMMA[2], -GAMMA[3]])

# Dirac alpha/beta for the flat-surface Hamiltonian: alpha_k = gamma^0 gamma^k,
# beta = gamma^0; negative-energy momentum projector is
# (1 - (alpha.p + beta m)/E)/2.
ALPHA = np.stack([GAMMA0 @ GAMMA[1], GAMMA0 @ GAMMA[2], GAMMA0 @ GAMMA[3]])
BETA = GAMMA0

# Mass-shell orientation: the lower shell {p^2 = m^2, p^0 = -E(p)} carries the
# measure (m^2/p^0) d^3p, which is *negative*; this fixes the overall sign of
# the scalar kernel D (D < 0 on imaginary-time arguments).  Pinned by the
# momentum-quadrature oracle.
MASS_SHELL_SIGN_NOTE = "p0 = -E(p), weight m^2/p0 < 0"

# Default regularization direction: past-directed unit time-like vector.
DEFAULT_U = np.array([-1.0, 0.0, 0.0, 0.0])

# Operator weight convention: an assembled operator acts as
# (K psi)(x_i) = sum_j k(x_i, x_j) Gamma_j psi_j w_j, i.e. the kernel block is
# right-multiplied by the surface weight Gamma_j w_j.
WEIGHT_CONVENTION = "right-multiplication by Gamma_j * w_j"


@dataclass(frozen=True)
class Convention:
    name: str
    statement: str
    pinned_by: str  # "tests/<file>.py::<test name>"


CONVENTIONS = (
    Convention(
        "metric-signature",
        "Minkowski metric diag(+1,-1,-1,-1); indices raised/lowered with it.",
        "tests/test_minkowski.py::test_metric_signature",
    ),
    Convention(
        "gamma-representation",
        "Standard Dirac representation; anticommutator {g^mu,g^nu} = 2 g^{mu nu},"
        " hermiticity g^0 (g^mu)^* g^0 = g^mu.",
        "tests/test_minkowski.py::test_gamma_algebra",
    ),
    Convention(
        "mass-shell-orientation",
        "Lower mass shell parametrized by p -> (-E(p), p) with signed weight"
        " m^2/p^0 d^3p; makes the scalar kernel D negative at imaginary-time"
        " arguments.",
        "tests/test_oracle.py::test_imaginary_time_value",
    ),
    Convention(
        "boost-spinor-sign",
        "Boost Lambda has block [[cosh x, -sinh x], [-sinh x, cosh x]] in the"
        " (0, axis) plane; S = cosh(x/2) - sinh(x/2) g^0 g^axis, so that"
        " S g^mu S^-1 = (Lambda^-1)^mu_nu g^nu.",
        "tests/test_minkowski.py::test_boost_spinor_invariant",
    ),
    Convention(
        "surface-weight",
        "Surface measure weight Gamma = g^0 - sum_k g^k d_k t; operators act by"
        " right-multiplication with Gamma_j w_j; g^0 Gamma is positive definite.",
        "tests/test_surfaces.py::test_gamma_weight_positive",
    ),
    Convention(
        "regularization-direction",
        "Default imaginary shift direction u = (-1,0,0,0), past-directed unit"
        " time-like.",
        "tests/test_kernels.py::test_default_u_past_directed",
    ),
    Convention(
        "radius-branch",
        "r(w) = principal sqrt(-w.w), defined off the closed negative real"
        " axis; boundary arguments are hard errors.",
        "tests/test_minkowski.py::test_radius_branch",
    ),
)
