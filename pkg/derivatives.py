"""
Derivative propagation for metric fields.

Two modes are available and selected by name:

- "dual": forward-mode propagation with jax.jacfwd, exact to round-off for
  closed-form metrics and safe to nest.
- "fd":   central differences (step 1e-5) with one Richardson level. Only the
  outermost derivative of a check is ever taken this way; inner derivatives
  stay in forward mode.

Jacobians follow the jax.jacfwd layout: the derivative index is the LAST axis,
so for F: R^n -> R^(a, b) the result has shape (a, b, n).
"""

from typing import Callable

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp
from jaxtyping import Array, Float

from errors import InvalidConfig

DERIVATIVE_MODES = ("dual", "fd")
FD_STEP = 1e-5


def check_mode(mode: str) -> str:
    if mode not in DERIVATIVE_MODES:
        raise InvalidConfig(
            f"Unknown derivative mode: '{mode}'.\n"
            f"Use one of: {', '.join(DERIVATIVE_MODES)}.\n"
            f"Set TWISTOR_DERIV_MODE in your .env file or pass --deriv."
        )
    return mode


def jacobian(fun: Callable, mode: str = "dual", step: float = FD_STEP) -> Callable:
    """
    Jacobian of `fun` with respect to its single array argument.

    Args:
        fun: Function of one 1-d real array, returning any array
        mode: "dual" or "fd"
        step: Finite-difference step (ignored in dual mode)

    Returns:
        Function x -> dfun(x), derivative index last
    """
    check_mode(mode)
    if mode == "dual":
        return jax.jacfwd(fun)

    def richardson(x):
        coarse = _central_difference(fun, x, step)
        fine = _central_difference(fun, x, 0.5 * step)
        return (4.0 * fine - coarse) / 3.0

    return richardson


def _central_difference(fun: Callable, x: Array, h: float) -> Array:
    eye = jnp.eye(x.shape[0], dtype=x.dtype)
    columns = [(fun(x + h * eye[k]) - fun(x - h * eye[k])) / (2.0 * h) for k in range(x.shape[0])]
    return jnp.stack(columns, axis=-1)


def christoffel_symbols(metric: Callable, x: Float[Array, "n"], mode: str = "dual") -> Float[Array, "n n n"]:
    r"""
    Christoffel symbols of the second kind, Gamma[r, m, n] = $\Gamma^r_{mn}$.

    Parameters
    ----------
    metric : callable
        Point -> symmetric (n, n) metric components.
    x : array_like
        Coordinates of the point.
    mode : str
        Derivative mode used for the metric derivative.

    Returns
    -------
    array_like
        Gamma^r_{mn} = 1/2 g^{rs} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})
    """
    g_inv = jnp.linalg.inv(metric(x))
    dg = jacobian(metric, mode)(x)  # dg[s, n, m] = d_m g_{sn}
    lowered = jnp.transpose(dg, (0, 2, 1)) + dg - jnp.transpose(dg, (2, 0, 1))
    return 0.5 * jnp.einsum("rs,smn->rmn", g_inv, lowered)


def riemann_tensor(christoffel: Callable, x: Float[Array, "n"], mode: str = "dual") -> Array:
    r"""
    Coordinate Riemann tensor R[r, s, m, n] = $R^r{}_{smn}$, so that
    $(\nabla_m \nabla_n - \nabla_n \nabla_m) v^r = R^r{}_{smn} v^s$.

    Parameters
    ----------
    christoffel : callable
        Point -> Gamma[r, m, n]; only this function is differentiated here.
    x : array_like
        Coordinates of the point.
    mode : str
        Derivative mode for the outer derivative.
    """
    gamma = christoffel(x)
    d_gamma = jacobian(christoffel, mode)(x)  # d_gamma[r, a, b, m] = d_m Gamma^r_{ab}
    return (
        jnp.einsum("rnsm->rsmn", d_gamma)
        - jnp.einsum("rmsn->rsmn", d_gamma)
        + jnp.einsum("rml,lns->rsmn", gamma, gamma)
        - jnp.einsum("rnl,lms->rsmn", gamma, gamma)
    )


def exterior_derivative_1form(form: Callable, x: Array, mode: str = "dual") -> Array:
    """d of a 1-form field given by its components; returns the antisymmetric matrix (d alpha)_{mn}."""
    jac = jacobian(form, mode)(x)  # jac[n, m] = d_m alpha_n
    return jnp.swapaxes(jac, -1, -2) - jac


def exterior_derivative_2form(form: Callable, x: Array, mode: str = "dual") -> Array:
    """d of a 2-form field (antisymmetric matrix); returns the totally antisymmetric 3-index array."""
    jac = jacobian(form, mode)(x)  # jac[m, n, l] = d_l alpha_{mn}
    return (
        jnp.einsum("mnl->lmn", jac)
        + jnp.einsum("nlm->lmn", jac)
        + jnp.einsum("lmn->lmn", jac)
    )
