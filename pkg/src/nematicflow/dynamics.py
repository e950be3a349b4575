"""Coupled velocity/director dynamics on the periodic box.

The system evolved here couples an incompressible velocity u with a director
field d (both 2-component, on the 2-torus):

    dt u + u.grad u - nu lap u + grad p = -div(grad d o. grad d) + div sigma
    dt d + u.grad d - (3/2)(grad u) d - (1/2)(grad u)^T d
         = lap d - (|d|^2 - 1) d

with (grad u)_ij = d_j u_i, (grad d o. grad d)_ij = d_i d . d_j d, the
Ginzburg-Landau potential W(d) = (1/4)(|d|^2 - 1)^2, and for the default
("ansatz") coefficient set the extra stress

    sigma = (d . A d) d x d + d x (A d) + (A d) x d - (lap d - grad_d W) x d,

A the symmetric part of grad u.  Pressure never materializes: the momentum
right side is Leray-projected spectrally each step.

A general coefficient set mu_1..mu_6 (with lambda_1 = mu_2 - mu_3 < 0,
lambda_2 = mu_5 - mu_6, viscosity nu = mu_4 / 2) is also supported; the
director equation becomes

    dt d + u.grad d - omega d + (lambda_2/lambda_1) A d
        = -(1/lambda_1)(lap d - grad_d W)

and the stress sigma = mu_1 (d.Ad)(d x d) + (mu_2 N + mu_5 Ad) x d
+ d x (mu_3 N + mu_6 Ad) with the rotation rate N eliminated through the
director equation: N = -(lambda_2/lambda_1) Ad - (1/lambda_1)(lap d - grad W).
The default set is mu = (1, -1, 0, 2 nu, 3, 1), i.e. lambda_1 = -1,
lambda_2 = 2, for which the general path reduces to the formulas above.

Time stepping is IMEX: the stiff diffusion (nu lap u, kappa lap d with
kappa = -1/lambda_1) is integrated exactly per mode by an integrating factor,
everything else explicitly.  "imex1" is the first-order baseline; "imex2" is
a second-order integrating-factor Heun variant.  The inner loop runs on a
dedicated half-spectrum (real-FFT) engine; the module-level operations
(strain_and_vorticity, gl_gradient, leslie_stress, rhs) form the readable
reference path the engine is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    GridError,
    GridSpec,
    SpectralField,
    TensorField22,
    VectorField2,
    derivative,
    divergence_residual,
    jacobian,
    laplacian,
    leray_project,
    product,
    require_same_grid,
    tensor_divergence,
)


class CoefficientError(ValueError):
    """Raised when a coefficient set violates the dissipativity constraints."""


class DivergenceError(RuntimeError):
    """Raised when the state stops being finite during time stepping."""

    def __init__(self, step_index, t):
        self.step_index = step_index
        self.t = t
        super().__init__(f"non-finite state after step {step_index} (t = {t:.6g})")


@dataclass(frozen=True)
class LeslieCoefficients:
    """Viscous coefficient set mu_1..mu_6 with viscosity nu = mu_4 / 2.

    Validated constraints: lambda_1 = mu_2 - mu_3 < 0, mu_1 >= 0, mu_4 > 0,
    mu_5 + mu_6 >= 0, and dissipativity through either branch:
    the transpose relation mu_2 + mu_3 = mu_6 - mu_5 together with
    lambda_2^2 < -lambda_1 (mu_5 + mu_6) when lambda_2 != 0, or
    |lambda_2 - mu_2 - mu_3| < 2 sqrt(-lambda_1) sqrt(mu_5 + mu_6).
    """

    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float

    def __post_init__(self):
        if self.mu4 <= 0:
            raise CoefficientError(f"mu4 must be positive, got {self.mu4}")
        if self.mu1 < 0:
            raise CoefficientError(f"mu1 must be nonnegative, got {self.mu1}")
        if self.lambda1 >= 0:
            raise CoefficientError(
                f"lambda1 = mu2 - mu3 must be negative, got {self.lambda1}"
            )
        if self.mu5 + self.mu6 < 0:
            raise CoefficientError("mu5 + mu6 must be nonnegative")
        l1, l2 = self.lambda1, self.lambda2
        transpose_ok = math.isclose(self.mu2 + self.mu3, self.mu6 - self.mu5,
                                    rel_tol=0.0, abs_tol=1e-12)
        if transpose_ok and (l2 == 0 or l2 * l2 / (-l1) < self.mu5 + self.mu6):
            return
        if abs(l2 - self.mu2 - self.mu3) < 2.0 * math.sqrt(-l1) * math.sqrt(
            self.mu5 + self.mu6
        ):
            return
        raise CoefficientError("coefficients fail the dissipativity condition")

    @property
    def lambda1(self):
        return self.mu2 - self.mu3

    @property
    def lambda2(self):
        return self.mu5 - self.mu6

    @property
    def nu(self):
        return self.mu4 / 2.0

    @property
    def kappa(self):
        """Director diffusivity -1/lambda_1."""
        return -1.0 / self.lambda1

    @classmethod
    def ansatz(cls, nu=1.0):
        """The default set mu = (1, -1, 0, 2 nu, 3, 1)."""
        return cls(1.0, -1.0, 0.0, 2.0 * nu, 3.0, 1.0)

    @property
    def is_ansatz(self):
        return (self.mu1, self.mu2, self.mu3, self.mu5, self.mu6) == (
            1.0, -1.0, 0.0, 3.0, 1.0)


class State:
    """Simulation state: velocity u, director d, time t, on one grid."""

    __slots__ = ("grid", "u", "d", "t")

    def __init__(self, grid, u, d, t=0.0):
        require_same_grid(u.x, u.y, d.x, d.y)
        if u.grid != grid:
            raise GridError("state fields live on a different grid")
        self.grid = grid
        self.u = u
        self.d = d
        self.t = float(t)

    def copy(self):
        return State(self.grid, self.u.copy(), self.d.copy(), self.t)


@dataclass(frozen=True)
class SolverConfig:
    """Stepping parameters: dt, final time, scheme, and recording cadence."""

    dt: float
    t_end: float
    scheme: str = "imex1"
    record_cadence: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.scheme not in ("imex1", "imex2"):
            raise ValueError(f"scheme must be 'imex1' or 'imex2', got {self.scheme!r}")
        if self.record_cadence < 1:
            raise ValueError("record_cadence must be >= 1")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError("t_end must be an integer multiple of dt")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


# -- reference-path operations ---------------------------------------------------


def strain_and_vorticity(u):
    """Symmetric and antisymmetric parts of grad u (convention d_j u_i)."""
    j = jacobian(u)
    half = 0.5
    a12 = (j.xy + j.yx) * half
    w12 = (j.xy - j.yx) * half
    a = TensorField22(j.xx, a12, a12, j.yy)
    w = TensorField22(SpectralField.zero(u.grid), w12, -1.0 * w12,
                      SpectralField.zero(u.grid))
    return a, w


def gl_gradient(d):
    """grad_d W = (|d|^2 - 1) d, assembled from exact cubic products."""
    gx = product(d.x, d.x, d.x) + product(d.y, d.y, d.x) - d.x
    gy = product(d.x, d.x, d.y) + product(d.y, d.y, d.y) - d.y
    return VectorField2(gx, gy)


def _matvec(t, v):
    """Truncated pointwise product T v for a tensor and a vector field."""
    return VectorField2(
        product(t.xx, v.x) + product(t.xy, v.y),
        product(t.yx, v.x) + product(t.yy, v.y),
    )


def _advection(u, v):
    """u . grad v, componentwise truncated products."""
    return VectorField2(
        product(u.x, derivative(v.x, 0)) + product(u.y, derivative(v.x, 1)),
        product(u.x, derivative(v.y, 0)) + product(u.y, derivative(v.y, 1)),
    )


def _strain_times_director(u, d):
    """A d assembled as one exact cubic-free stage: pointwise A then product."""
    a, _ = strain_and_vorticity(u)
    return _matvec(a, d)


def gl_force(d):
    """lap d - grad_d W, the resolved director force field."""
    g = gl_gradient(d)
    return VectorField2(laplacian(d.x) - g.x, laplacian(d.y) - g.y)


def leslie_stress(u, d, coeffs):
    """Extra stress tensor (viscous mu_4 part excluded; it is the nu lap u term).

    General grouped assembly: mu_1 (d.Ad)(d x d) + (mu_2 N + mu_5 Ad) x d
    + d x (mu_3 N + mu_6 Ad), with N = -(lambda_2/lambda_1) Ad
    - (1/lambda_1)(lap d - grad W).  For the default coefficients this is
    (d.Ad)(d x d) + (Ad) x d + d x (Ad) - (lap d - grad W) x d.
    """
    a, _ = strain_and_vorticity(u)
    ad = _matvec(a, d)
    # d.(A d) as exact single-stage cubics: A11 d1^2 + 2 A12 d1 d2 + A22 d2^2
    dad = (
        product(a.xx, d.x, d.x)
        + 2.0 * product(a.xy, d.x, d.y)
        + product(a.yy, d.y, d.y)
    )
    ddt = TensorField22(product(d.x, d.x), product(d.x, d.y),
                        product(d.y, d.x), product(d.y, d.y))
    g = gl_force(d)
    l1, l2 = coeffs.lambda1, coeffs.lambda2
    nvec = ad * (-l2 / l1) + g * (-1.0 / l1)
    left = nvec * coeffs.mu2 + ad * coeffs.mu5
    right = nvec * coeffs.mu3 + ad * coeffs.mu6
    term1 = TensorField22(
        product(dad, ddt.xx), product(dad, ddt.xy),
        product(dad, ddt.yx), product(dad, ddt.yy),
    ) * coeffs.mu1
    outer_left = TensorField22(
        product(left.x, d.x), product(left.x, d.y),
        product(left.y, d.x), product(left.y, d.y),
    )
    outer_right = TensorField22(
        product(d.x, right.x), product(d.x, right.y),
        product(d.y, right.x), product(d.y, right.y),
    )
    return term1 + outer_left + outer_right


def ericksen_stress(d):
    """(grad d o. grad d)_ij = d_i d . d_j d, truncated products."""
    dx1, dy1 = derivative(d.x, 0), derivative(d.x, 1)
    dx2, dy2 = derivative(d.y, 0), derivative(d.y, 1)
    e11 = product(dx1, dx1) + product(dx2, dx2)
    e12 = product(dx1, dy1) + product(dx2, dy2)
    e22 = product(dy1, dy1) + product(dy2, dy2)
    return TensorField22(e11, e12, e12, e22)


def rhs(state, coeffs):
    """Full right sides (du/dt, dd/dt) before Leray projection.

    Momentum: -u.grad u - div(grad d o. grad d) + div sigma + nu lap u.
    Director (default coefficients): -u.grad d + (3/2)(grad u) d
    + (1/2)(grad u)^T d + lap d - grad_d W; the general-coefficient variant
    uses omega d - (lambda_2/lambda_1) A d - (1/lambda_1)(lap d - grad_d W).
    """
    u, d = state.u, state.d
    adv_u = _advection(u, u)
    sigma = leslie_stress(u, d, coeffs)
    mom = (
        -1.0 * adv_u
        - tensor_divergence(ericksen_stress(d))
        + tensor_divergence(sigma)
        + VectorField2(laplacian(u.x), laplacian(u.y)) * coeffs.nu
    )
    adv_d = _advection(u, d)
    j = jacobian(u)
    if coeffs.is_ansatz:
        stretch = _matvec(j, d) * 1.5 + _matvec(j.transpose(), d) * 0.5
        direc = -1.0 * adv_d + stretch + gl_force(d)
    else:
        a, w = strain_and_vorticity(u)
        stretch = _matvec(w, d) + _matvec(a, d) * (-coeffs.lambda2 / coeffs.lambda1)
        direc = -1.0 * adv_d + stretch + gl_force(d) * coeffs.kappa
    return mom, direc


# -- half-spectrum stepping engine ------------------------------------------------


@lru_cache(maxsize=16)
def _half_tables(n, m):
    h = n // 2
    kx = np.fft.fftfreq(n, 1.0 / n).astype(np.float64)[:, None]
    ky = np.arange(h + 1, dtype=np.float64)[None, :]
    k2 = kx * kx + ky * ky
    k2_safe = k2.copy()
    k2_safe[0, 0] = 1.0
    nyq = (np.abs(kx) == h) | (ky == h)
    return {"kx": kx, "ky": ky, "k2": k2, "k2_safe": k2_safe, "nyq": nyq,
            "h": h, "mh": m // 2}


def _embed_half(batch, n, m):
    h = n // 2
    k, _, _ = batch.shape
    out = np.zeros((k, m, m // 2 + 1), dtype=np.complex128)
    out[:, :h, :h] = batch[:, :h, :h]
    out[:, m - h + 1:, :h] = batch[:, h + 1:, :h]
    return out


def _extract_half(batch, m, n):
    h = n // 2
    k = batch.shape[0]
    out = np.zeros((k, n, n // 2 + 1), dtype=np.complex128)
    out[:, :h, :h] = batch[:, :h, :h]
    out[:, h + 1:, :h] = batch[:, m - h + 1:, :h]
    return out


def half_from_field(field):
    """Half-spectrum view (copy) of a real field's coefficients."""
    n = field.grid.n_modes
    return field.coeffs[:, : n // 2 + 1].copy()


def field_from_half(grid, half):
    """Rebuild a real field's full coefficient array from the half spectrum."""
    n = grid.n_modes
    h = n // 2
    full = np.zeros((n, n), dtype=np.complex128)
    full[:, : h + 1] = half
    rows = np.zeros(n, dtype=np.intp)
    rows[0] = 0
    rows[1:] = np.arange(n - 1, 0, -1)
    # f(-kx, -ky) = conj(f(kx, ky)); columns h+1.. hold ky = -(h-1)..-1
    full[:, h + 1:] = np.conj(full[rows][:, 1:h][:, ::-1])
    return SpectralField(grid, full, True)


class _Engine:
    """Batched real-FFT inner loop for one (grid, coefficients, dt, scheme)."""

    def __init__(self, grid, coeffs, config):
        self.grid = grid
        self.coeffs = coeffs
        self.config = config
        n = grid.n_modes
        m = grid.padded_size
        self.n = n
        self.m = m
        self.t = _half_tables(n, m)
        dt = config.dt
        self.exp_u = np.exp(-coeffs.nu * self.t["k2"] * dt)
        self.exp_d = np.exp(-coeffs.kappa * self.t["k2"] * dt)
        self.area = (2.0 * math.pi) ** 2

    # -- layout helpers ----------------------------------------------------------

    def to_padded_physical(self, batch):
        emb = _embed_half(np.asarray(batch), self.n, self.m)
        return np.fft.irfft2(emb, s=(self.m, self.m), axes=(-2, -1)) * (self.m * self.m)

    def to_truncated_spectrum(self, batch):
        c = np.fft.rfft2(np.asarray(batch), axes=(-2, -1)) / (self.m * self.m)
        return _extract_half(c, self.m, self.n)

    def project(self, uh):
        """Leray projection plus exact zero mean, half layout, in place."""
        t = self.t
        kdot = (t["kx"] * uh[0] + t["ky"] * uh[1]) / t["k2_safe"]
        kdot[0, 0] = 0.0
        uh[0] -= t["kx"] * kdot
        uh[1] -= t["ky"] * kdot
        uh[0][0, 0] = 0.0
        uh[1][0, 0] = 0.0
        return uh

    # -- nonlinear assembly --------------------------------------------------------

    def nonlinear(self, uh, dh, want_diag=False):
        """Explicit right sides (momentum projected) and optional diagnostics.

        The diffusion terms are not included here; the stepper integrates them
        exactly through the per-mode factors.
        """
        co = self.coeffs
        t = self.t
        ikx, iky = 1j * t["kx"], 1j * t["ky"]
        gu = np.stack([ikx * uh[0], iky * uh[0], ikx * uh[1], iky * uh[1]])
        gd = np.stack([ikx * dh[0], iky * dh[0], ikx * dh[1], iky * dh[1]])
        ld = -t["k2"] * dh

        batch1 = np.concatenate([uh, gu, dh, gd, ld])  # 2+4+2+4+2 = 14
        p = self.to_padded_physical(batch1)
        u1, u2 = p[0], p[1]
        gu0, gu1, gu2, gu3 = p[2], p[3], p[4], p[5]
        d1, d2 = p[6], p[7]
        gd0, gd1, gd2, gd3 = p[8], p[9], p[10], p[11]
        ld1, ld2 = p[12], p[13]

        a11, a22 = gu0, gu3
        a12 = 0.5 * (gu1 + gu2)
        w12 = 0.5 * (gu1 - gu2)
        ad1 = a11 * d1 + a12 * d2
        ad2 = a12 * d1 + a22 * d2
        dad = d1 * ad1 + d2 * ad2
        q = d1 * d1 + d2 * d2 - 1.0
        gw1, gw2 = q * d1, q * d2

        adv_u1 = u1 * gu0 + u2 * gu1
        adv_u2 = u1 * gu2 + u2 * gu3
        adv_d1 = u1 * gd0 + u2 * gd1
        adv_d2 = u1 * gd2 + u2 * gd3
        if co.is_ansatz:
            st1 = 1.5 * (gu0 * d1 + gu1 * d2) + 0.5 * (gu0 * d1 + gu2 * d2)
            st2 = 1.5 * (gu2 * d1 + gu3 * d2) + 0.5 * (gu1 * d1 + gu3 * d2)
        else:
            c = -co.lambda2 / co.lambda1
            st1 = w12 * d2 + c * ad1
            st2 = -w12 * d1 + c * ad2
        e11 = gd0 * gd0 + gd2 * gd2
        e12 = gd0 * gd1 + gd2 * gd3
        e22 = gd1 * gd1 + gd3 * gd3

        out1 = np.stack([
            adv_u1, adv_u2, adv_d1, adv_d2, st1, st2,
            e11, e12, e22, ad1, ad2, dad,
            d1 * d1, d1 * d2, d2 * d2, gw1, gw2,
        ])  # 17 fields
        s1 = self.to_truncated_spectrum(out1)
        advu_h, advd_h, st_h = s1[0:2], s1[2:4], s1[4:6]
        e_h = s1[6:9]
        ad_h = s1[9:11]
        dad_h = s1[11:12]
        ddt_h = s1[12:15]
        gw_h = s1[15:17]

        g_h = -t["k2"] * dh - gw_h  # resolved lap d - grad W

        batch2 = np.concatenate([dad_h, ddt_h, ad_h, g_h])  # 1+3+2+2 = 8
        p2 = self.to_padded_physical(batch2)
        dad_n = p2[0]
        ddt11, ddt12, ddt22 = p2[1], p2[2], p2[3]
        adn1, adn2 = p2[4], p2[5]
        gn1, gn2 = p2[6], p2[7]
        l1, l2 = co.lambda1, co.lambda2
        nv1 = -(l2 / l1) * adn1 - (1.0 / l1) * gn1
        nv2 = -(l2 / l1) * adn2 - (1.0 / l1) * gn2
        lf1 = co.mu2 * nv1 + co.mu5 * adn1
        lf2 = co.mu2 * nv2 + co.mu5 * adn2
        rt1 = co.mu3 * nv1 + co.mu6 * adn1
        rt2 = co.mu3 * nv2 + co.mu6 * adn2
        out2 = np.stack([
            dad_n * ddt11, dad_n * ddt12, dad_n * ddt22,       # mu1 part (sym)
            lf1 * d1, lf1 * d2, lf2 * d1, lf2 * d2,            # (mu2 N + mu5 Ad) x d
            d1 * rt1, d1 * rt2, d2 * rt1, d2 * rt2,            # d x (mu3 N + mu6 Ad)
        ])  # 11 fields
        s2 = self.to_truncated_spectrum(out2)
        mu1 = co.mu1
        sig11 = mu1 * s2[0] + s2[3] + s2[7]
        sig12 = mu1 * s2[1] + s2[4] + s2[8]
        sig21 = mu1 * s2[1] + s2[5] + s2[9]
        sig22 = mu1 * s2[2] + s2[6] + s2[10]

        mom = np.empty_like(uh)
        mom[0] = -advu_h[0] + ikx * (sig11 - e_h[0]) + iky * (sig12 - e_h[1])
        mom[1] = -advu_h[1] + ikx * (sig21 - e_h[1]) + iky * (sig22 - e_h[2])
        self.project(mom)

        # the lap d part of g_h duplicates the integrating factor's diffusion,
        # so the explicit side carries only the potential force -kappa grad W
        if co.is_ansatz:
            direc = -advd_h + st_h - gw_h
        else:
            direc = -advd_h + st_h - co.kappa * gw_h

        diag = None
        if want_diag:
            mean = lambda arr: float(np.mean(arr))
            area = self.area
            e_kin = 0.5 * area * mean(u1 * u1 + u2 * u2)
            e_grad = 0.5 * area * mean(
                gd0 * gd0 + gd1 * gd1 + gd2 * gd2 + gd3 * gd3
            )
            e_w = area * mean(0.25 * q * q)
            ge1 = ld1 - gw1
            ge2 = ld2 - gw2
            grad_u_sq = mean(gu0 ** 2 + gu1 ** 2 + gu2 ** 2 + gu3 ** 2)
            if co.is_ansatz:
                terms = (
                    co.nu * area * grad_u_sq,
                    area * mean(dad * dad),
                    1.5 * area * mean(ad1 * ad1 + ad2 * ad2),
                    0.5 * area * mean(ge1 * ge1 + ge2 * ge2),
                    0.5 * area * mean((ad1 + ge1) ** 2 + (ad2 + ge2) ** 2),
                )
            else:
                nvx1 = -(l2 / l1) * ad1 - (1.0 / l1) * ge1
                nvx2 = -(l2 / l1) * ad2 - (1.0 / l1) * ge2
                terms = (
                    co.mu1 * area * mean(dad * dad),
                    0.5 * co.mu4 * area * grad_u_sq,
                    (co.mu5 + co.mu6) * area * mean(ad1 * ad1 + ad2 * ad2),
                    -l1 * area * mean(nvx1 * nvx1 + nvx2 * nvx2),
                    -(l2 - co.mu2 - co.mu3) * area
                    * mean(nvx1 * ad1 + nvx2 * ad2),
                )
            div_res = float(np.max(np.abs(t["kx"] * uh[0] + t["ky"] * uh[1])))
            diag = {
                "e_kin": e_kin,
                "e_elastic": e_grad + e_w,
                "d_terms": terms,
                "div_residual": div_res,
            }
        return mom, direc, diag

    # -- steps ----------------------------------------------------------------------

    def step(self, uh, dh, want_diag=False):
        cfg = self.config
        dt = cfg.dt
        eu, ed = self.exp_u, self.exp_d
        fu, fd, diag = self.nonlinear(uh, dh, want_diag)
        if cfg.scheme == "imex1":
            un = eu * (uh + dt * fu)
            dn = ed * (dh + dt * fd)
        else:
            us = eu * (uh + dt * fu)
            ds = ed * (dh + dt * fd)
            fu2, fd2, _ = self.nonlinear(us, ds)
            un = eu * uh + 0.5 * dt * (eu * fu + fu2)
            dn = ed * dh + 0.5 * dt * (ed * fd + fd2)
        self.project(un)
        return un, dn, diag


# -- public stepping interface -----------------------------------------------------


def state_to_half(state):
    u, d = state.u, state.d
    return (
        np.stack([half_from_field(u.x), half_from_field(u.y)]),
        np.stack([half_from_field(d.x), half_from_field(d.y)]),
    )


def half_to_state(grid, uh, dh, t):
    u = VectorField2(field_from_half(grid, uh[0]), field_from_half(grid, uh[1]))
    d = VectorField2(field_from_half(grid, dh[0]), field_from_half(grid, dh[1]))
    return State(grid, u, d, t)


def step(state, coeffs, config):
    """One IMEX step of the full system; returns the advanced state."""
    engine = _Engine(state.grid, coeffs, config)
    uh, dh = state_to_half(state)
    engine.project(uh)
    un, dn, _ = engine.step(uh, dh)
    if not (np.all(np.isfinite(un)) and np.all(np.isfinite(dn))):
        raise DivergenceError(0, state.t + config.dt)
    return half_to_state(state.grid, un, dn, state.t + config.dt)


def iterate(state, coeffs, config):
    """Yield (step_index, state) snapshots every record_cadence steps.

    The initial state is yielded as (0, state); the final step is always
    yielded.  Raises DivergenceError naming the step if the state stops
    being finite.  Useful for driving two trajectories in lockstep.
    """
    engine = _Engine(state.grid, coeffs, config)
    uh, dh = state_to_half(state)
    engine.project(uh)
    t0 = state.t
    yield 0, half_to_state(state.grid, uh, dh, t0)
    n_steps = config.n_steps
    for m in range(1, n_steps + 1):
        uh, dh, _ = engine.step(uh, dh)
        if not (np.all(np.isfinite(uh)) and np.all(np.isfinite(dh))):
            raise DivergenceError(m - 1, t0 + m * config.dt)
        if m % config.record_cadence == 0 or m == n_steps:
            yield m, half_to_state(state.grid, uh, dh, t0 + m * config.dt)


def run(state, coeffs, config, record=True):
    """March the system from state.t over n_steps = t_end/dt steps.

    Returns (final_state, records): records is a list of per-time energy
    records (time, energy split, the five dissipation integrands, divergence
    residual) taken every record_cadence steps plus the final time; empty when
    record=False.  Raises DivergenceError naming the step if the state stops
    being finite.
    """
    from .diagnostics import EnergyRecord

    engine = _Engine(state.grid, coeffs, config)
    uh, dh = state_to_half(state)
    engine.project(uh)
    records = []
    t0 = state.t

    def snap(step_index, diag):
        t = t0 + step_index * config.dt
        terms = diag["d_terms"]
        records.append(EnergyRecord(
            t=t,
            e_total=diag["e_kin"] + diag["e_elastic"],
            e_kin=diag["e_kin"],
            e_elastic=diag["e_elastic"],
            d_total=float(sum(terms)),
            d_terms=tuple(float(x) for x in terms),
            div_residual=diag["div_residual"],
        ))

    n_steps = config.n_steps
    for m in range(n_steps):
        want = record and (m % config.record_cadence == 0)
        un, dn, diag = engine.step(uh, dh, want_diag=want)
        if want:
            snap(m, diag)
        uh, dh = un, dn
        if not (np.all(np.isfinite(uh)) and np.all(np.isfinite(dh))):
            raise DivergenceError(m, t0 + (m + 1) * config.dt)
    if record:
        _, _, diag = engine.nonlinear(uh, dh, want_diag=True)
        snap(n_steps, diag)
    return half_to_state(state.grid, uh, dh, t0 + n_steps * config.dt), records
