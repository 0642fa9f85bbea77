"""Nonlinear change of coordinates eliminating far-from-resonance modes.

The map U = id + u, with u supported on the far cone of psi, is chosen so
that the pulled-back field (DU)^{-1} X o U has no far-from-resonance
Fourier modes.  Provided |psi . k| > sigma ||k|| on that cone, the
linearised equation is the small-divisor-free division
u_k = g_k / (2 pi i psi . k); Newton sweeps use that division as a
preconditioner for the exact linearisation, so the far residual shrinks
quadratically once inside the contraction region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft2, ifft2, next_fast_len
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import NoConvergence, OutsideBall, SingularJacobian
from .fourier_field import (
    FarResonant,
    FourierVectorField,
    GridFitReport,
    field_from_dict,
    field_to_dict,
    fit_grid,
    mode_l1,
    norm_prime_r,
    norm_r,
    project,
)

TWO_PI = 2.0 * math.pi
SQRT6 = math.sqrt(6.0)


class TorusMap:
    """Torus diffeomorphism U(theta) = theta + u(theta), u periodic and mean-zero."""

    __slots__ = ("displacement",)

    def __init__(self, displacement: FourierVectorField):
        if (0, 0) in displacement.modes:
            raise ValueError("displacement must have zero average")
        object.__setattr__(self, "displacement", displacement)

    def __setattr__(self, *args):
        raise AttributeError("TorusMap is immutable")

    @classmethod
    def identity(cls, width: float = 1.0, truncation: int = 32) -> "TorusMap":
        return cls(FourierVectorField.zero(width, truncation))

    def is_identity(self) -> bool:
        return len(self.displacement) == 0

    @property
    def truncation(self) -> int:
        return self.displacement.truncation

    def du_sup_bound(self) -> float:
        """Certified bound on sup ||Du||: 2 pi sum_k ||k||_1 ||u_k||_1."""
        return float(
            sum(
                TWO_PI * mode_l1(k) * (abs(c[0]) + abs(c[1]))
                for k, c in self.displacement.modes.items()
            )
        )

    def to_dict(self) -> dict:
        return field_to_dict(self.displacement, displacement=True)

    @classmethod
    def from_dict(cls, data: dict) -> "TorusMap":
        return cls(field_from_dict(data))

    def __repr__(self):
        return f"TorusMap({len(self.displacement)} displacement modes)"


def default_grid(x: FourierVectorField, u: TorusMap | None = None) -> int:
    u_trunc = u.truncation if u is not None else x.truncation
    return next_fast_len(2 * (x.truncation + u_trunc) + 1)


@dataclass
class PullbackResult:
    field: FourierVectorField
    fit: GridFitReport
    min_jacobian_det: float
    grid: int


def _pullback_core(v, h, u_grid, grid, with_derivative=False, det_tol=1e-8):
    """Perturbation-form pullback grids for X = v + h (v constant, h oscillatory).

    Uses the identity (DU)^{-1} X o U = v + (DU)^{-1} [h o U - (Du) v], so
    every gridded quantity scales with the perturbation, not with ||v||;
    FFT round-off then stays proportional to the signal being fitted.
    Returns (W, A^{-1}, min |det DU|, Dh o U) with W the bracket term.
    """
    axes = np.arange(grid, dtype=float) / grid
    point1 = axes[:, None] + u_grid[0]
    point2 = axes[None, :] + u_grid[1]

    h_at_u = np.zeros((2, grid, grid), dtype=complex)
    dh_at_u = (
        np.zeros((2, 2, grid, grid), dtype=complex) if with_derivative else None
    )
    h_modes = sorted(h.modes.keys())
    for start in range(0, len(h_modes), 48):
        chunk = h_modes[start : start + 48]
        ks = np.array(chunk, dtype=float)
        cs = np.array([h.modes[k] for k in chunk])
        phases = np.exp(
            (TWO_PI * 1j)
            * (ks[:, 0, None, None] * point1 + ks[:, 1, None, None] * point2)
        )
        h_at_u += np.tensordot(cs.T, phases, axes=(1, 0))
        if with_derivative:
            jacs = (TWO_PI * 1j) * np.einsum("mi,mj->ijm", cs, ks)
            dh_at_u += np.tensordot(jacs, phases, axes=(2, 0))

    # DU = I + Du on the grid; u is band-limited so spectral differentiation
    # of its samples is exact
    u_spec = fft2(u_grid, axes=(1, 2))
    k_axis = np.fft.fftfreq(grid, d=1.0 / grid)
    du_spec = np.zeros((2, 2, grid, grid), dtype=complex)
    du_spec[:, 0] = u_spec * ((TWO_PI * 1j) * k_axis)[None, :, None]
    du_spec[:, 1] = u_spec * ((TWO_PI * 1j) * k_axis)[None, None, :]
    du = ifft2(du_spec, axes=(2, 3))
    a11 = 1.0 + du[0, 0]
    a12 = du[0, 1]
    a21 = du[1, 0]
    a22 = 1.0 + du[1, 1]
    det = a11 * a22 - a12 * a21
    min_det = float(np.min(np.abs(det)))
    if min_det < det_tol:
        raise SingularJacobian(
            f"min |det DU| = {min_det:.3e} on the collocation grid"
        )
    # a real determinant changing sign vanishes between collocation points
    if np.max(np.abs(det.imag)) < 1e-10 * np.max(np.abs(det.real)):
        if np.min(det.real) < 0.0 < np.max(det.real):
            raise SingularJacobian("det DU changes sign on the collocation grid")
    inv = np.empty((2, 2, grid, grid), dtype=complex)
    inv[0, 0] = a22 / det
    inv[0, 1] = -a12 / det
    inv[1, 0] = -a21 / det
    inv[1, 1] = a11 / det

    v = np.asarray(v, dtype=complex)
    bracket = h_at_u - np.einsum("ij...,j->i...", du, v)
    w = np.einsum("ij...,j...->i...", inv, bracket)
    return w, inv, min_det, dh_at_u


def _perturbation_from_fit(fit_w, avg):
    """Sparse field Eg + fitted W (the pullback minus the reference psi)."""
    modes = dict(fit_w.modes)
    z = (0, 0)
    base = modes.get(z, np.zeros(2, dtype=complex))
    total = base + np.asarray(avg, dtype=complex)
    modes[z] = total
    return FourierVectorField(modes, fit_w.width, fit_w.truncation)


def compose_pullback(
    x: FourierVectorField,
    u: TorusMap,
    grid: int | None = None,
    det_tol: float = 1e-8,
) -> PullbackResult:
    """Discrete Fourier fit of (DU)^{-1} X o U on a uniform grid.

    The grid must resolve the product spectrum: at least
    2 * (truncation(X) + truncation(u)) + 1 points per axis.
    """
    required = 2 * (x.truncation + u.truncation) + 1
    if grid is None:
        grid = next_fast_len(required)
    if grid < required:
        raise ValueError(f"grid {grid} below anti-aliasing size {required}")
    u_grid = u.displacement.sample_grid(grid)
    v = x.average()
    w, _, min_det, _ = _pullback_core(v, x.oscillatory(), u_grid, grid,
                                      det_tol=det_tol)
    fit_w, report = fit_grid(w, x.width, x.truncation)
    fitted = _perturbation_from_fit(fit_w, v)
    return PullbackResult(fitted, report, min_det, grid)


# ---------------------------------------------------------------------------
# elimination of far-from-resonance modes


def guaranteed_ball_radius(psi, sigma: float, rho: float, rho_prime: float) -> float:
    """Radius of the ball around psi on which the elimination is guaranteed."""
    norm_psi = float(abs(psi[0]) + abs(psi[1]))
    return (
        (SQRT6 - 2.0)
        / 12.0
        * sigma
        * min((rho - rho_prime) / (4.0 * math.pi), (3.0 - SQRT6) / 6.0 * sigma / norm_psi)
    )


def contraction_constant(psi, sigma: float) -> float:
    """Factor 2 (1 + max{(2/3)(3 - sqrt 6), 6 (sqrt 6 + 2) ||psi||/sigma})."""
    norm_psi = float(abs(psi[0]) + abs(psi[1]))
    return 2.0 * (
        1.0 + max(2.0 / 3.0 * (3.0 - SQRT6), 6.0 * (SQRT6 + 2.0) * norm_psi / sigma)
    )


@dataclass
class EliminationResult:
    map: TorusMap
    field: FourierVectorField
    perturbation: FourierVectorField
    sweeps: int
    residuals: list
    converged: bool
    eps_hat: float
    inside_ball: bool
    contraction_lhs: float
    contraction_rhs: float
    du_sup_bound: float
    grid: int
    fit: GridFitReport | None = None
    at_floor: bool = False

    @property
    def contraction_ok(self) -> bool:
        return self.contraction_lhs <= self.contraction_rhs

    def as_pair(self):
        return self.map, self.field


def _far_modes(psi, sigma, truncation):
    cone = FarResonant((psi[0], psi[1]), sigma)
    out = []
    for k1 in range(-truncation, truncation + 1):
        rest = truncation - abs(k1)
        for k2 in range(-rest, rest + 1):
            if (k1, k2) != (0, 0) and not cone.contains((k1, k2)):
                out.append((k1, k2))
    return out


def _coeff_vector(field_obj, modes):
    vec = np.zeros(2 * len(modes), dtype=complex)
    for i, k in enumerate(modes):
        c = field_obj.modes.get(k)
        if c is not None:
            vec[2 * i : 2 * i + 2] = c
    return vec


def _vector_field(vec, modes, width, truncation):
    entries = {}
    for i, k in enumerate(modes):
        c = vec[2 * i : 2 * i + 2]
        if c[0] != 0 or c[1] != 0:
            entries[k] = c
    return FourierVectorField(entries, width, truncation)


def eliminate_far(
    x: FourierVectorField,
    psi,
    sigma: float,
    tol: float = 1e-12,
    max_iter: int = 12,
    rho: float = 1.0,
    rho_prime: float = 0.9,
    grid: int | None = None,
    enforce_ball: bool = False,
    gmres_maxiter: int = 40,
    stall_accept: float = 1e-6,
) -> EliminationResult:
    """Solve [far cone](DU)^{-1} X o U = 0 for U = id + u, u on the far cone.

    Newton sweeps: the far residual g of the current pullback is divided
    by the safe divisors 2 pi i psi.k (the preconditioner), then the exact
    linearisation is solved by a few GMRES iterations; a full step is
    taken, falling back to step halving (at most 8) if the residual grows.
    Raises OutsideBall only when enforce_ball is set; the guaranteed ball
    is far smaller than the practical Newton basin and is always reported.
    """
    psi = np.asarray(psi, dtype=complex)
    return eliminate_far_perturbation(
        psi, x.minus_constant(psi), sigma, tol=tol, max_iter=max_iter,
        rho=rho, rho_prime=rho_prime, grid=grid, enforce_ball=enforce_ball,
        gmres_maxiter=gmres_maxiter, stall_accept=stall_accept,
    )


def eliminate_far_perturbation(
    psi,
    g0: FourierVectorField,
    sigma: float,
    tol: float = 1e-12,
    max_iter: int = 12,
    rho: float = 1.0,
    rho_prime: float = 0.9,
    grid: int | None = None,
    enforce_ball: bool = False,
    gmres_maxiter: int = 40,
    stall_accept: float = 1e-6,
) -> EliminationResult:
    """eliminate_far with X given as psi + g0; all arithmetic stays at the
    scale of g0 so tiny perturbations are not drowned by round-off on psi."""
    psi = np.asarray(psi, dtype=complex)
    cone = FarResonant((psi[0], psi[1]), sigma)
    truncation = g0.truncation
    width = g0.width
    eps_hat = guaranteed_ball_radius(psi, sigma, rho, rho_prime)
    input_size = norm_prime_r(g0, rho)
    inside_ball = input_size <= eps_hat
    if enforce_ball and not inside_ball:
        raise OutsideBall(
            f"norm'_rho(X - psi) = {input_size:.3e} > eps_hat = {eps_hat:.3e}"
        )
    contraction_rhs = contraction_constant(psi, sigma) * input_size

    if len(project(g0, cone, "outside")) == 0:
        # already resonant-only: U = id, mode-exactly
        ident = TorusMap.identity(width, truncation)
        return EliminationResult(
            ident, _perturbation_from_fit(g0, psi), g0, 0, [0.0], True,
            eps_hat, inside_ball, norm_r(g0, rho_prime), contraction_rhs,
            0.0, grid or next_fast_len(4 * truncation + 1),
        )

    modes = _far_modes(psi, sigma, truncation)
    divisors = np.empty(2 * len(modes), dtype=complex)
    for i, k in enumerate(modes):
        d = (TWO_PI * 1j) * (psi[0] * k[0] + psi[1] * k[1])
        divisors[2 * i : 2 * i + 2] = d

    if grid is None:
        grid = next_fast_len(2 * (truncation + truncation) + 1)
    axes_count = grid * grid

    v = psi + g0.average()
    h = g0.oscillatory()
    g_avg = g0.average()

    def displacement_from(uvec):
        return TorusMap(_vector_field(uvec, modes, width, truncation))

    def evaluate(uvec):
        """Pullback at the displacement uvec, in perturbation form."""
        u_map = displacement_from(uvec)
        u_grid = u_map.displacement.sample_grid(grid)
        w, inv_jac, _, dh_at_u = _pullback_core(
            v, h, u_grid, grid, with_derivative=True
        )
        fit_w, fit_report = fit_grid(w, width, truncation)
        pert = _perturbation_from_fit(fit_w, g_avg)
        far = project(pert, cone, "outside")
        return {
            "uvec": uvec,
            "map": u_map,
            "w": w,
            "inv_jac": inv_jac,
            "dh_at_u": dh_at_u,
            "pert": pert,
            "fit": fit_report,
            "far": far,
            "res": norm_r(far, rho_prime),
        }

    def measured_floor(state):
        """Weighted residual response to the float granularity of u.

        Displacement components spanning many decades share one grid, so
        corrections below eps * sup|u| are absorbed when u is sampled;
        re-evaluating at u (1 + 8 eps) measures the residual resolution
        actually available at this state.
        """
        probe = evaluate(state["uvec"] * (1.0 + 8.0 * np.finfo(float).eps))
        diff = probe["far"] - state["far"]
        return norm_r(diff, rho_prime)

    current = evaluate(np.zeros(2 * len(modes), dtype=complex))
    residuals = [current["res"]]

    idx1 = np.array([k[0] % grid for k in modes])
    idx2 = np.array([k[1] % grid for k in modes])
    kfac = (TWO_PI * 1j) * np.array([[k[0], k[1]] for k in modes], dtype=float)

    def jacobian_matvec(wvec, state):
        # dP = (DU)^{-1} [ (Dh o U) w - (Dw) P(u) ],  P(u) = v + W
        pairs = wvec.reshape(-1, 2).T
        w_spec = np.zeros((2, grid, grid), dtype=complex)
        w_spec[:, idx1, idx2] = pairs
        dw_spec = np.zeros((2, 2, grid, grid), dtype=complex)
        dw_spec[:, 0, idx1, idx2] = pairs * kfac[:, 0]
        dw_spec[:, 1, idx1, idx2] = pairs * kfac[:, 1]
        w_grid = ifft2(w_spec, axes=(1, 2)) * axes_count
        dw_grid = ifft2(dw_spec, axes=(2, 3)) * axes_count
        p_grid = state["w"] + np.asarray(v, dtype=complex)[:, None, None]
        rhs = np.einsum("ij...,j...->i...", state["dh_at_u"], w_grid)
        rhs -= np.einsum("ij...,j...->i...", dw_grid, p_grid)
        dp = np.einsum("ij...,j...->i...", state["inv_jac"], rhs)
        spec = fft2(dp, axes=(1, 2)) / axes_count
        return spec[:, idx1, idx2].T.reshape(-1)

    sweeps = 0
    res = current["res"]
    res0 = res
    converged = res <= tol
    at_floor = False
    stalls = 0
    while not converged and sweeps < max_iter:
        sweeps += 1
        gvec = _coeff_vector(current["far"], modes)
        # right preconditioner: the homological division u_k = g_k/(2 pi i psi.k)
        op = LinearOperator(
            (len(gvec), len(gvec)),
            matvec=lambda z: jacobian_matvec(-z / divisors, current),
            dtype=complex,
        )
        rtol = max(1e-13, min(1e-2, 0.1 * res))
        z, _info = gmres(op, -gvec, rtol=rtol, atol=0.0,
                         maxiter=gmres_maxiter)
        delta = -z / divisors

        step = 1.0
        best = None
        for _halving in range(9):
            trial = evaluate(current["uvec"] + step * delta)
            if best is None or trial["res"] < best["res"]:
                best = trial
            if trial["res"] < res:
                break
            step *= 0.5
        if best["res"] < res:
            current = best
        res = current["res"]
        residuals.append(res)
        if res <= tol:
            converged = True
            break
        # a residual at the granularity floor of the u representation is
        # numerically unresolvable; accept a stall at that level
        stalls = stalls + 1 if res > 0.5 * residuals[-2] else 0
        if stalls >= 1:
            if res <= max(stall_accept * res0, 2.0 * measured_floor(current)):
                converged = True
                at_floor = True
                break

    if not converged and res <= max(
        stall_accept * res0, 2.0 * measured_floor(current)
    ):
        converged = True
        at_floor = True
    if not converged:
        raise NoConvergence(
            f"far residual {res:.3e} > tol {tol:.3e} after {sweeps} sweeps"
        )

    g_final = current["pert"]
    return EliminationResult(
        map=current["map"],
        field=_perturbation_from_fit(g_final, psi),
        perturbation=g_final,
        sweeps=sweeps,
        residuals=residuals,
        converged=True,
        eps_hat=eps_hat,
        inside_ball=inside_ball,
        contraction_lhs=norm_r(g_final, rho_prime),
        contraction_rhs=contraction_rhs,
        du_sup_bound=current["map"].du_sup_bound(),
        grid=grid,
        fit=current["fit"],
        at_floor=at_floor,
    )
