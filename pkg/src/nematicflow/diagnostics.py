"""Energy bookkeeping and twin-state functionals.

Single-state side: the total energy

    E = int ( |u|^2 / 2 + |grad d|^2 / 2 + W(d) ),   W(d) = (|d|^2 - 1)^2 / 4,

and the dissipation rate.  For the default coefficient set the dissipation
splits into five squares,

    D = int ( nu |grad u|^2 + |d.Ad|^2 + (3/2)|Ad|^2 + |G|^2 / 2
              + |Ad + G|^2 / 2 ),        G = lap d - (|d|^2 - 1) d,

and for general coefficients it is the quadratic form

    D = int ( mu_1 |d.Ad|^2 + (mu_4/2)|grad u|^2 + (mu_5+mu_6)|Ad|^2
              - lambda_1 |N|^2 - (lambda_2 - mu_2 - mu_3) N.(Ad) ),

with N = -(lambda_2/lambda_1) Ad - (1/lambda_1) G; the two agree at the
default set.

Twin-state side: given two states on one grid, with differences
delta u, delta d, delta A (strain difference), the distance functional

    Phi = ( ||delta u||_{H^{-1/2}}^2 + ||delta d||_{H^{1/2}}^2 ) / 2

and the dissipation-distance functional

    frakD = nu ||grad delta u||_{H^{-1/2}}^2 + ||grad delta d||_{H^{1/2}}^2
            + 2 sum_q 2^{-q} int |Delta_q delta A  S_{q-1} d_1|^2
            +   sum_q 2^{-q} int |Delta_q delta A : S_{q-1}(d_1 x d_1)|^2,

all Sobolev norms in the dyadic-block (lp) form.  The bound function F_hat
is a polynomial in standard norms of the two states (f1 + f2 + f3 + f4
below, every hidden constant set to 1) that multiplies mu(Phi) in the
two-state comparison inequality; the fitted-constant check lives in the
osgood module.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .dyadic import DyadicPartition, hs_norm_vector
from .dynamics import LeslieCoefficients, rhs, strain_and_vorticity
from .grid import (
    TensorField22,
    divergence,
    divergence_residual,
    invert_laplacian,
    jacobian,
    l2_norm,
    laplacian,
    product,
    require_same_grid,
    to_physical,
    vector_hs_norm_fourier,
    vector_l2_norm,
)

AREA = (2.0 * math.pi) ** 2


class EnergyRecord(NamedTuple):
    """One time sample of the energy balance along a run."""

    t: float
    e_total: float
    e_kin: float
    e_elastic: float
    d_total: float
    d_terms: tuple
    div_residual: float


class UniquenessRecord(NamedTuple):
    """One time sample of the twin-state functionals.

    lp_sum_vector and lp_sum_tensor are the bare dyadic sums (no prefactor);
    frak_d = nu * grad_du_norm^2 + grad_dd_norm^2 + 2 lp_sum_vector
    + lp_sum_tensor.
    """

    t: float
    phi: float
    frak_d: float
    du_norm: float
    dd_norm: float
    grad_du_norm: float
    grad_dd_norm: float
    lp_sum_vector: float
    lp_sum_tensor: float
    f_hat: float


def _mean_integral(samples):
    """(2 pi)^2 times the grid mean: the torus integral of a sampled field."""
    return AREA * float(np.mean(samples))


def _physical(field):
    return to_physical(field, oversample=2)


def _vector_physical(vec):
    return _physical(vec.x), _physical(vec.y)


# -- single-state functionals ----------------------------------------------------


def kinetic_energy(state):
    return 0.5 * vector_l2_norm(state.u) ** 2


def elastic_energy(state):
    """int |grad d|^2 / 2 + int W(d); the potential term by 2x quadrature."""
    j = jacobian(state.d)
    grad_sq = sum(l2_norm(f) ** 2 for f in (j.xx, j.xy, j.yx, j.yy))
    d1, d2 = _vector_physical(state.d)
    q = d1 * d1 + d2 * d2 - 1.0
    return 0.5 * grad_sq + _mean_integral(0.25 * q * q)


def total_energy(state):
    """E = kinetic + elastic; the quadratic parts via Parseval."""
    return kinetic_energy(state) + elastic_energy(state)


def _pointwise_strain_fields(state):
    """Physical samples (2x grid) of d, A d, d.Ad, G = lap d - grad W."""
    a, _ = strain_and_vorticity(state.u)
    a11, a12, a22 = _physical(a.xx), _physical(a.xy), _physical(a.yy)
    d1, d2 = _vector_physical(state.d)
    ad1 = a11 * d1 + a12 * d2
    ad2 = a12 * d1 + a22 * d2
    dad = d1 * ad1 + d2 * ad2
    q = d1 * d1 + d2 * d2 - 1.0
    g1 = _physical(laplacian(state.d.x)) - q * d1
    g2 = _physical(laplacian(state.d.y)) - q * d2
    return (d1, d2), (ad1, ad2), dad, (g1, g2)


def total_dissipation(state, coeffs=None):
    """Dissipation rate as (total, per-term tuple).

    Default coefficients: the five-square split (nu |grad u|^2, |d.Ad|^2,
    (3/2)|Ad|^2, |G|^2/2, |Ad+G|^2/2).  Other coefficients: the general
    five-term quadratic form, in the order (mu_1 |d.Ad|^2, (mu_4/2)|grad u|^2,
    (mu_5+mu_6)|Ad|^2, -lambda_1 |N|^2, -(lambda_2-mu_2-mu_3) N.Ad).
    """
    if coeffs is None:
        coeffs = LeslieCoefficients.ansatz()
    j = jacobian(state.u)
    grad_u_sq = sum(l2_norm(f) ** 2 for f in (j.xx, j.xy, j.yx, j.yy))
    _, (ad1, ad2), dad, (g1, g2) = _pointwise_strain_fields(state)
    if coeffs.is_ansatz:
        terms = (
            coeffs.nu * grad_u_sq,
            _mean_integral(dad * dad),
            1.5 * _mean_integral(ad1 * ad1 + ad2 * ad2),
            0.5 * _mean_integral(g1 * g1 + g2 * g2),
            0.5 * _mean_integral((ad1 + g1) ** 2 + (ad2 + g2) ** 2),
        )
    else:
        l1, l2 = coeffs.lambda1, coeffs.lambda2
        n1 = -(l2 / l1) * ad1 - (1.0 / l1) * g1
        n2 = -(l2 / l1) * ad2 - (1.0 / l1) * g2
        terms = (
            coeffs.mu1 * _mean_integral(dad * dad),
            0.5 * coeffs.mu4 * grad_u_sq,
            (coeffs.mu5 + coeffs.mu6) * _mean_integral(ad1 * ad1 + ad2 * ad2),
            -l1 * _mean_integral(n1 * n1 + n2 * n2),
            -(l2 - coeffs.mu2 - coeffs.mu3)
            * _mean_integral(n1 * ad1 + n2 * ad2),
        )
    return float(sum(terms)), tuple(float(x) for x in terms)


def energy_record(state, coeffs=None):
    """Full energy/dissipation snapshot of one state."""
    e_kin = kinetic_energy(state)
    e_ela = elastic_energy(state)
    d_total, terms = total_dissipation(state, coeffs)
    return EnergyRecord(
        t=state.t,
        e_total=e_kin + e_ela,
        e_kin=e_kin,
        e_elastic=e_ela,
        d_total=d_total,
        d_terms=terms,
        div_residual=divergence_residual(state.u),
    )


# -- twin-state functionals --------------------------------------------------------


def _require_shared_grid(state1, state2):
    require_same_grid(state1.u.x, state2.u.x, state1.d.x, state2.d.x)


def phi(state1, state2, partition=None):
    """Phi = (||delta u||_{H^{-1/2},lp}^2 + ||delta d||_{H^{1/2},lp}^2) / 2."""
    _require_shared_grid(state1, state2)
    if partition is None:
        partition = DyadicPartition(state1.grid)
    du = state1.u - state2.u
    dd = state1.d - state2.d
    return 0.5 * (
        hs_norm_vector(du, -0.5, form="lp", partition=partition) ** 2
        + hs_norm_vector(dd, 0.5, form="lp", partition=partition) ** 2
    )


def _tensor_lp_norm_sq(tensor, s, partition):
    """sum over entries of the lp-form H^s norm squared."""
    from .dyadic import hs_norm

    return sum(
        hs_norm(f, s, form="lp", partition=partition) ** 2
        for f in (tensor.xx, tensor.xy, tensor.yx, tensor.yy)
    )


def _strain_difference(state1, state2):
    a1, _ = strain_and_vorticity(state1.u)
    a2, _ = strain_and_vorticity(state2.u)
    return a1 - a2


def frak_d_components(state1, state2, coeffs=None, partition=None):
    """The four addends of frakD plus the bare dyadic sums.

    Returns (grad_du_sq, grad_dd_sq, lp_sum_vector, lp_sum_tensor) where the
    first two are the squared lp-form norms (no nu yet) and the sums carry no
    prefactor; frakD = nu*grad_du_sq + grad_dd_sq + 2*lp_vec + lp_tensor.
    """
    _require_shared_grid(state1, state2)
    if partition is None:
        partition = DyadicPartition(state1.grid)
    gdu = jacobian(state1.u - state2.u)
    gdd = jacobian(state1.d - state2.d)
    grad_du_sq = _tensor_lp_norm_sq(gdu, -0.5, partition)
    grad_dd_sq = _tensor_lp_norm_sq(gdd, 0.5, partition)

    da = _strain_difference(state1, state2)
    d1 = state1.d
    ddt = TensorField22(
        product(d1.x, d1.x), product(d1.x, d1.y),
        product(d1.y, d1.x), product(d1.y, d1.y),
    )
    lp_vec = 0.0
    lp_ten = 0.0
    # S_{q-1} vanishes for q <= 0, so the sums start at q = 1
    for q in range(1, partition.q_max + 1):
        b11 = _physical(partition.delta(da.xx, q))
        b12 = _physical(partition.delta(da.xy, q))
        b22 = _physical(partition.delta(da.yy, q))
        s1 = _physical(partition.low_pass(d1.x, q - 1))
        s2 = _physical(partition.low_pass(d1.y, q - 1))
        v1 = b11 * s1 + b12 * s2
        v2 = b12 * s1 + b22 * s2
        lp_vec += 2.0 ** (-q) * _mean_integral(v1 * v1 + v2 * v2)
        t11 = _physical(partition.low_pass(ddt.xx, q - 1))
        t12 = _physical(partition.low_pass(ddt.xy, q - 1))
        t22 = _physical(partition.low_pass(ddt.yy, q - 1))
        contraction = b11 * t11 + 2.0 * b12 * t12 + b22 * t22
        lp_ten += 2.0 ** (-q) * _mean_integral(contraction * contraction)
    return grad_du_sq, grad_dd_sq, lp_vec, lp_ten


def frak_d(state1, state2, coeffs=None, partition=None):
    """frakD and its four addends (asymmetric: d_1 comes from state1)."""
    if coeffs is None:
        coeffs = LeslieCoefficients.ansatz()
    gdu_sq, gdd_sq, lp_vec, lp_ten = frak_d_components(
        state1, state2, coeffs, partition
    )
    addends = (coeffs.nu * gdu_sq, gdd_sq, 2.0 * lp_vec, lp_ten)
    return float(sum(addends)), tuple(float(x) for x in addends)


# -- bound function ----------------------------------------------------------------


def _state_norms(state):
    u, d = state.u, state.d
    j = jacobian(u)
    return {
        "u_l2": vector_l2_norm(u),
        "u_h1": vector_hs_norm_fourier(u, 1.0),
        "grad_u_l2": math.sqrt(
            sum(l2_norm(f) ** 2 for f in (j.xx, j.xy, j.yx, j.yy))
        ),
        "d_h1": vector_hs_norm_fourier(d, 1.0),
        "d_h2": vector_hs_norm_fourier(d, 2.0),
    }


def _dad_l2(state):
    """||d.(A d)||_{L2} via exact cubic products."""
    a, _ = strain_and_vorticity(state.u)
    d = state.d
    dad = (
        product(a.xx, d.x, d.x)
        + 2.0 * product(a.xy, d.x, d.y)
        + product(a.yy, d.y, d.y)
    )
    return l2_norm(dad)


def f_bound(state1, state2):
    """F_hat = f1 + f2 + f3 + g1 + g2, every hidden constant set to 1.

    A polynomial in L2/H1/H2 norms of the two states; equals 4 when both
    states vanish, and is nondecreasing in each norm.
    """
    _require_shared_grid(state1, state2)
    n1 = _state_norms(state1)
    n2 = _state_norms(state2)
    a2d2 = _dad_l2(state2)

    f1 = (
        (1.0 + n1["u_l2"] + n2["u_l2"]) * (n1["u_h1"] ** 2 + n2["u_h1"] ** 2)
        + (1.0 + n1["d_h1"] + n2["d_h1"]) * (n1["d_h2"] ** 2 + n2["d_h2"] ** 2)
        + n1["d_h1"] ** 6
        + n2["d_h1"] ** 6
        + a2d2 ** 2
        + 1.0
    )
    f2 = (
        1.0
        + n1["d_h1"] ** 3
        + n2["grad_u_l2"] ** 2
        + (1.0 + n1["d_h1"] ** 2) * n1["d_h2"] ** 2
    )
    f3 = (
        (1.0 + n1["u_l2"] ** 2 + n2["u_l2"] ** 2 + n1["d_h1"] ** 6)
        * (n1["d_h2"] ** 2 + n2["d_h2"] ** 2)
        + (n1["u_l2"] ** 2 + n2["u_l2"] ** 2 + n1["d_h1"] ** 2 + n2["d_h1"] ** 2)
        * (n1["grad_u_l2"] ** 2 + n2["grad_u_l2"] ** 2)
        + 1.0
    )
    g1 = (
        a2d2 ** 2 * (n1["d_h1"] ** 2 + n2["d_h1"] ** 2)
        + (n1["u_l2"] + n2["u_l2"])
        * (n1["d_h1"] ** 2 + n2["d_h1"] ** 2)
        * (n1["grad_u_l2"] + n2["grad_u_l2"])
        + (
            n1["d_h1"] ** 2
            + n2["d_h1"] ** 2
            + n1["d_h1"] ** 6
            + n2["d_h1"] ** 6
            + n1["u_l2"] ** 4
            + n2["u_l2"] ** 4
        )
        * (n1["d_h2"] ** 2 + n1["grad_u_l2"] ** 2 + n2["grad_u_l2"] ** 2)
    )
    g2 = (
        n1["d_h1"] ** 2
        + n1["d_h1"] ** 6
        + n1["u_l2"] ** 4
        + n2["u_l2"] ** 4
    ) * (n1["d_h2"] ** 2 + n1["grad_u_l2"] ** 2 + n2["grad_u_l2"] ** 2) + 1.0
    return float(f1 + f2 + f3 + g1 + g2)


def recover_pressure(state, coeffs=None):
    """Pressure field implied by the momentum balance.

    The stepper eliminates the pressure by projection; this diagnostic
    reconstructs it after the fact by solving the Poisson problem
    lap p = div(momentum right side before projection) with zero mean.
    """
    if coeffs is None:
        coeffs = LeslieCoefficients.ansatz()
    mom, _ = rhs(state, coeffs)
    return invert_laplacian(divergence(mom))


def uniqueness_record(state1, state2, coeffs=None, partition=None):
    """Full twin-state snapshot at the states' common time."""
    if coeffs is None:
        coeffs = LeslieCoefficients.ansatz()
    if partition is None:
        partition = DyadicPartition(state1.grid)
    du = state1.u - state2.u
    dd = state1.d - state2.d
    du_norm = hs_norm_vector(du, -0.5, form="lp", partition=partition)
    dd_norm = hs_norm_vector(dd, 0.5, form="lp", partition=partition)
    gdu_sq, gdd_sq, lp_vec, lp_ten = frak_d_components(
        state1, state2, coeffs, partition
    )
    total = coeffs.nu * gdu_sq + gdd_sq + 2.0 * lp_vec + lp_ten
    return UniquenessRecord(
        t=state1.t,
        phi=0.5 * (du_norm ** 2 + dd_norm ** 2),
        frak_d=float(total),
        du_norm=du_norm,
        dd_norm=dd_norm,
        grad_du_norm=math.sqrt(gdu_sq),
        grad_dd_norm=math.sqrt(gdd_sq),
        lp_sum_vector=float(lp_vec),
        lp_sum_tensor=float(lp_ten),
        f_hat=f_bound(state1, state2),
    )
