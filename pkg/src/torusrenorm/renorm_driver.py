"""The one-step renormalisation operator and its orbit diagnostics.

One step at frequency omega_n = l (1, alpha_n): rescale the field by the
shift matrix T_{a_n}, eliminate the far-from-resonance modes of the new
frequency by a change of coordinates, and normalise the average along
omega_{n+1}.  The frequency orbit follows the continued-fraction tails
alpha_n exactly; states internally carry the perturbation X_n - omega_n,
so field round-off stays proportional to the perturbation size rather
than to ||omega||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import DomainExceeded, ZeroSlope
from .fourier_field import (
    FarResonant,
    FourierVectorField,
    average,
    mode_l1,
    norm_r,
    project,
)
from .normalization_step import eliminate_far_perturbation
from .number_theory import CFExpansion, GL2Z, S, Slope, V, act_on_slope, cf_expand
from .scaling_step import (
    kappa_from_sigma,
    random_resonant_field,
    resonant_modes,
    scale_step,
)


@dataclass(frozen=True)
class RenormParams:
    """Shared step parameters; one (rho, rho', kappa, sigma) for every step."""

    sigma: float = 0.1
    rho: float = 1.0
    rho_prime: float = 0.9
    kappa: float | None = None
    truncation: int = 32
    tol: float = 1e-12
    max_sweeps: int = 12
    c_prime: float = 1e-2
    grid: int | None = None

    def __post_init__(self):
        if self.kappa is None:
            object.__setattr__(self, "kappa", kappa_from_sigma(self.sigma))

    def zeta(self, alpha: float, alpha_next: float) -> float:
        return self.c_prime / (alpha * alpha_next)


@dataclass
class StepDiagnostics:
    norm_total: float
    norm_osc: float
    const_omega: float
    const_Omega: float
    far_residual: float
    dropped_far_mass: float
    newton_sweeps: int
    normalization: float
    zeta: float


@dataclass(frozen=True)
class RenormState:
    """Snapshot at step n; `perturbation` is X_n - omega_n."""

    n: int
    omega: np.ndarray
    alpha: float
    a: int
    perturbation: FourierVectorField
    cf: CFExpansion
    ell: float = 1.0
    diagnostics: StepDiagnostics | None = None

    @property
    def field(self) -> FourierVectorField:
        return self.perturbation.minus_constant(-self.omega)


def omega_of(cf: CFExpansion, n: int, ell: float = 1.0) -> np.ndarray:
    return ell * np.array([1.0, cf.tail_float(n)])


def cap_omega_of(alpha: float) -> np.ndarray:
    """The orthogonal direction Omega = (1, -1/alpha)."""
    return np.array([1.0, -1.0 / alpha])


def constant_split(f_avg, omega):
    """Decompose a constant vector as p*omega + c*Omega (orthogonal basis)."""
    omega = np.asarray(omega, float)
    alpha = omega[1] / omega[0]
    cap = cap_omega_of(alpha)
    f_avg = np.asarray(f_avg)
    p = (omega @ f_avg) / (omega @ omega)
    c = (cap @ f_avg) / (cap @ cap)
    return complex(p), complex(c)


def initial_state(
    x0: FourierVectorField, cf: CFExpansion, ell: float = 1.0
) -> RenormState:
    omega = omega_of(cf, 0, ell)
    return perturbed_state(x0.minus_constant(omega), cf, ell)


def perturbed_state(
    f0: FourierVectorField, cf: CFExpansion, ell: float = 1.0
) -> RenormState:
    """State at n = 0 from the perturbation f0 = X_0 - omega_0."""
    return RenormState(
        n=0,
        omega=omega_of(cf, 0, ell),
        alpha=cf.tail_float(0),
        a=cf.coefficient(0),
        perturbation=f0,
        cf=cf,
        ell=ell,
    )


# ---------------------------------------------------------------------------
# transient adjustment


def basis_change(x: FourierVectorField, m: GL2Z) -> FourierVectorField:
    """Field transform under a linear change of basis: X -> M^{-1} X o M."""
    m_inv = m.inverse().as_array().astype(float)
    mt = m.transpose()
    out = {}
    for k, c in x.modes.items():
        image = mt.apply(k)
        out[image] = m_inv @ c
    return FourierVectorField(out, x.width, x.truncation)


def transient_step(x0: FourierVectorField, omega0):
    """Apply V (negative slope) and/or S (slope below one) to reach slope > 1.

    Returns (field, omega, applied) where applied lists the matrices used.
    """
    omega = np.asarray(omega0, dtype=float)
    if omega[0] == 0 or omega[1] == 0:
        raise ZeroSlope("transient step needs a finite nonzero slope")
    x = x0
    applied = []
    if omega[1] / omega[0] < 0:
        x = basis_change(x, V)
        omega = V.inverse().as_array() @ omega
        applied.append("V")
    slope = omega[1] / omega[0]
    if 0 < slope < 1:
        x = basis_change(x, S)
        omega = S.inverse().as_array() @ omega
        applied.append("S")
    return x, omega, applied


def transient_slope(slope: Slope):
    """The slope-object counterpart of transient_step's V/S adjustments."""
    applied = []
    if float(slope) < 0:
        slope = act_on_slope(V, slope)
        applied.append("V")
    if 0 < float(slope) < 1:
        slope = act_on_slope(S, slope)
        applied.append("S")
    return slope, applied


# ---------------------------------------------------------------------------
# one step


def one_step(state: RenormState, params: RenormParams) -> RenormState:
    """One renormalisation step: rescale, eliminate far modes, normalise.

    Requires norm_r(X_n - omega_n, rho') < zeta_n = c'/(alpha_n alpha_{n+1});
    raises DomainExceeded otherwise (the expected outcome along the unstable
    constant direction).
    """
    cf, n = state.cf, state.n
    alpha, a = state.alpha, state.a
    alpha_next = cf.tail_float(n + 1)
    omega_next = state.ell * np.array([1.0, alpha_next])
    zeta = params.zeta(alpha, alpha_next)

    f = state.perturbation
    norm_f = norm_r(f, params.rho_prime)
    if norm_f >= zeta:
        raise DomainExceeded(
            f"step {n}: norm {norm_f:.3e} >= zeta {zeta:.3e}",
            step=n, norm=norm_f, bound=zeta,
        )

    g = scale_step(f, a, params.rho, params.rho_prime, params.kappa)

    # T^{-1} omega_n = l (x_n, 1) = omega_{n+1}/alpha_{n+1}; the far cone of
    # omega' at sigma equals that of omega'/alpha' at sigma/alpha'
    psi = state.ell * np.array([cf.remainder_float(n), 1.0])
    sigma_eff = params.sigma / alpha_next
    elim = eliminate_far_perturbation(
        psi, g, sigma_eff,
        tol=params.tol, max_iter=params.max_sweeps,
        rho=params.rho, rho_prime=params.rho_prime, grid=params.grid,
    )
    cone = FarResonant((psi[0], psi[1]), sigma_eff)
    far_mass = norm_r(project(elim.perturbation, cone, "outside"),
                      params.rho_prime)
    g_res = project(elim.perturbation, cone, "inside")

    e_g = average(g_res)
    z_tilde = complex(omega_next @ e_g) / float(omega_next @ omega_next)
    if abs(alpha_next * z_tilde) >= 0.5:
        raise DomainExceeded(
            f"step {n}: normalisation functional {1 + alpha_next * z_tilde:.3f} "
            "left the half-disc around 1",
            step=n, norm=norm_f, bound=zeta,
        )
    z = 1.0 / alpha_next + z_tilde
    f_next = (g_res.minus_constant(z_tilde * omega_next) * (1.0 / z)).with_width(
        params.rho_prime
    )

    p, c = constant_split(average(f_next), omega_next)
    diag = StepDiagnostics(
        norm_total=norm_r(f_next, params.rho_prime),
        norm_osc=norm_r(f_next.oscillatory(), params.rho_prime),
        const_omega=abs(p) * float(np.abs(omega_next).sum()),
        const_Omega=abs(c) * float(np.abs(cap_omega_of(alpha_next)).sum()),
        far_residual=far_mass,
        dropped_far_mass=far_mass,
        newton_sweeps=elim.sweeps,
        normalization=float(abs(1.0 + alpha_next * z_tilde)),
        zeta=zeta,
    )
    return RenormState(
        n=n + 1,
        omega=omega_next,
        alpha=alpha_next,
        a=cf.coefficient(n + 1),
        perturbation=f_next,
        cf=cf,
        ell=state.ell,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# the derivative at the fixed constant field


@dataclass
class ConstantBlock:
    """Action of the step derivative on constant fields at slope alpha.

    The 2x2 matrix has determinant zero; eigenvalue 0 on omega = (1, alpha)
    and nu (the trace) on the next orthogonal direction (1, -1/alpha').
    """

    alpha: float
    matrix: np.ndarray
    nu: float
    eigvec_zero: np.ndarray
    eigvec_nu: np.ndarray


def constant_block(alpha: float) -> ConstantBlock:
    if alpha <= 1:
        raise ValueError("constant block needs slope alpha > 1")
    x = alpha - math.floor(alpha)
    if x == 0:
        raise ValueError("integer slope has no next tail")
    alpha_next = 1.0 / x
    mat = (alpha_next / (1.0 + x * x)) * np.array(
        [[-alpha, 1.0], [x * alpha, -x]]
    )
    nu = float(np.trace(mat))
    return ConstantBlock(
        alpha=alpha,
        matrix=mat,
        nu=nu,
        eigvec_zero=np.array([1.0, alpha]),
        eigvec_nu=cap_omega_of(alpha_next),
    )


def linearized_step(
    f: FourierVectorField, cf: CFExpansion, n: int, params: RenormParams,
    ell: float = 1.0,
) -> FourierVectorField:
    """Derivative of the step at omega_n applied to f: (I - P E) L f."""
    omega_next = omega_of(cf, n + 1, ell)
    scaled = scale_step(f, cf.coefficient(n), params.rho, params.rho_prime,
                        params.kappa)
    alpha_next = cf.tail_float(n + 1)
    resonant = project(
        scaled, FarResonant((omega_next[0], omega_next[1]), params.sigma),
        "inside",
    )
    lf = resonant * alpha_next
    proj = complex(omega_next @ average(lf)) / float(omega_next @ omega_next)
    out = lf.minus_constant(proj * omega_next)
    return out.with_width(params.rho_prime)


@dataclass
class WindingConeCheck:
    passed: bool
    lhs: float
    rhs: float


def winding_cone_check(state: RenormState, params: RenormParams) -> WindingConeCheck:
    """Necessary condition for sharing the winding ratio of omega_n:

    || (I - P_n) E(X_n) || <= norm_r((I - E) X_n, rho').
    """
    avg = average(state.perturbation)
    omega = state.omega
    p = complex(omega @ avg) / float(omega @ omega)
    off = avg - p * omega
    lhs = float(abs(off[0]) + abs(off[1]))
    rhs = norm_r(state.perturbation.oscillatory(), params.rho_prime)
    return WindingConeCheck(lhs <= rhs + 1e-15, lhs, rhs)


# ---------------------------------------------------------------------------
# orbit iteration


@dataclass
class OrbitResult:
    states: list
    norms: np.ndarray
    theta_hat: float | None
    failure: DomainExceeded | None
    failure_step: int | None
    transient_applied: list
    transient_far_cleared: float

    @property
    def completed(self) -> int:
        return len(self.states) - 1

    def monotone_from(self, start: int = 2) -> bool:
        vals = self.norms[start:]
        return bool(np.all(np.diff(vals) < 0)) if len(vals) >= 2 else True

    def theta_hat_running(self, upto: int) -> float | None:
        return fit_theta(self.norms[: upto + 1])


def fit_theta(norms, start: int = 2) -> float | None:
    """Geometric rate of the norm sequence by least squares on the log."""
    vals = np.asarray(norms, dtype=float)[start:]
    ns = np.arange(start, start + len(vals))
    keep = vals > 0
    if keep.sum() < 2:
        return None
    slope = np.polyfit(ns[keep], np.log(vals[keep]), 1)[0]
    return float(math.exp(slope))


def renorm_orbit(
    x0: FourierVectorField,
    slope: Slope,
    n_steps: int,
    params: RenormParams,
    ell: float = 1.0,
    x0_is_perturbation: bool = False,
) -> OrbitResult:
    """Iterate the one-step operator along the expansion of the slope.

    A transient V/S adjustment (and, if needed, one far-mode elimination)
    brings the input into the resonant-restricted space at slope > 1.
    The orbit stops at the first step failure, which is recorded.
    With x0_is_perturbation the input is taken as X_0 - omega_0, which
    preserves components far below the float granularity of ||omega_0||.
    """
    slope_t, applied = transient_slope(slope)
    cf = cf_expand(slope_t, n_steps + 2)
    if len(cf.coefficients) < n_steps + 2:
        raise ValueError(
            f"slope certifies only {len(cf.coefficients)} coefficients; "
            f"{n_steps + 2} needed ({cf.termination})"
        )
    omega0_raw = ell * np.array([1.0, float(slope)])
    if x0_is_perturbation:
        f = x0
        for name in applied:
            f = basis_change(f, V if name == "V" else S)
    else:
        f0 = x0.minus_constant(omega0_raw)
        for name in applied:
            f0 = basis_change(f0, V if name == "V" else S)
        f = f0
    omega = omega_of(cf, 0, ell)

    # adjustment part two: clear any far modes of the input
    cone = FarResonant((omega[0], omega[1]), params.sigma)
    far0 = norm_r(project(f, cone, "outside"), params.rho_prime)
    if far0 > params.tol:
        elim = eliminate_far_perturbation(
            omega, f, params.sigma, tol=params.tol,
            max_iter=params.max_sweeps, rho=params.rho,
            rho_prime=params.rho_prime, grid=params.grid,
        )
        f = project(elim.perturbation, cone, "inside")
    else:
        f = project(f, cone, "inside")

    state = perturbed_state(f, cf, ell)
    states = [state]
    norms = [norm_r(f, params.rho_prime)]
    failure = None
    failure_step = None
    for _ in range(n_steps):
        try:
            state = one_step(state, params)
        except DomainExceeded as exc:
            failure = exc
            failure_step = state.n
            break
        states.append(state)
        norms.append(state.diagnostics.norm_total)
    return OrbitResult(
        states=states,
        norms=np.array(norms),
        theta_hat=fit_theta(norms),
        failure=failure,
        failure_step=failure_step,
        transient_applied=applied,
        transient_far_cleared=far0,
    )


# ---------------------------------------------------------------------------
# perturbation generators (all return X_0 - omega_0)


def unstable_perturbation(
    slope_value: float, amplitude: float, params: RenormParams
) -> FourierVectorField:
    """Constant perturbation along the orthogonal direction Omega_0."""
    cap = cap_omega_of(slope_value)
    return FourierVectorField.constant(
        amplitude * cap, width=params.rho_prime, truncation=params.truncation
    )


def unstable_coordinate(state: RenormState) -> float:
    """Component of E(X_n - omega_n) along Omega_n (orthogonal split)."""
    _, c = constant_split(average(state.perturbation), state.omega)
    return float(np.real(c))


def stabilize_resonant_perturbation(
    f0: FourierVectorField,
    slope: Slope,
    params: RenormParams,
    probe_steps: int = 6,
    rounds: int = 3,
    ell: float = 1.0,
):
    """Cancel the unstable constant component seeded by a perturbation.

    Fields sharing the winding ratio of omega lie on the contracting set,
    which is transverse to the constant direction Omega_0.  A short probe
    orbit measures the unstable coordinate at its last completed step;
    the Omega_0 correction that lands the field on the contracting set is
    found by secant iteration, seeded with the model gain prod nu_i from
    the constant blocks (the V/S transient maps Omega_0 onto a scalar
    multiple of itself, so the secant absorbs the frame factor).
    """
    slope_t, _ = transient_slope(slope)
    cf = cf_expand(slope_t, probe_steps + 3)
    corrections = []
    coords = []
    f = f0
    cap0 = cap_omega_of(float(slope))
    m_prev = None
    for _ in range(rounds):
        orbit = renorm_orbit(f, slope, probe_steps, params, ell,
                             x0_is_perturbation=True)
        m = orbit.completed
        if m == 0:
            raise DomainExceeded("probe orbit failed at the first step")
        c_m = unstable_coordinate(orbit.states[m])
        coords.append(c_m)
        if c_m == 0.0:
            break
        if corrections and m == m_prev and coords[-1] != coords[-2]:
            response = (coords[-1] - coords[-2]) / corrections[-1]
            delta = -c_m / response
        else:
            gain = 1.0
            for i in range(m):
                gain *= constant_block(cf.tail_float(i)).nu
            delta = -c_m / gain
        corrections.append(delta)
        m_prev = m
        f = f + FourierVectorField.constant(
            delta * cap0, width=f.width, truncation=f.truncation
        )
    return f, corrections


def resonant_perturbation(
    slope: Slope,
    amplitude: float,
    params: RenormParams,
    seed: int,
    stabilize: bool = True,
    ell: float = 1.0,
):
    """Reality-symmetric zero-average perturbation on the resonant cone.

    With stabilize=True the perturbation is corrected along Omega_0 so the
    perturbed field keeps the winding ratio of omega_0 (stays on the
    contracting set); the correction sizes are returned alongside.
    """
    rng = np.random.default_rng(seed)
    alpha0 = float(slope)
    omega0 = ell * np.array([1.0, alpha0])
    pert = random_resonant_field(
        omega0, params.sigma, amplitude, params.truncation, rng,
        width=params.rho_prime,
    )
    corrections = []
    if stabilize:
        pert, corrections = stabilize_resonant_perturbation(
            pert, slope, params, ell=ell
        )
    return pert, corrections


def mixed_perturbation(
    slope: Slope, amplitude: float, params: RenormParams, seed: int,
    ell: float = 1.0,
) -> FourierVectorField:
    """Resonant + far + constant perturbation of total size ~ amplitude."""
    rng = np.random.default_rng(seed)
    alpha0 = float(slope)
    omega0 = ell * np.array([1.0, alpha0])
    pert = random_resonant_field(
        omega0, params.sigma, amplitude / 2, params.truncation, rng,
        width=params.rho_prime,
    )
    far = {}
    for k in [(1, 0), (1, 1), (0, 1)]:
        c = (rng.normal(size=2) + 1j * rng.normal(size=2)) * amplitude / 20
        far[k] = c
        far[(-k[0], -k[1])] = np.conj(c)
    return (
        FourierVectorField.constant(
            amplitude / 4 * cap_omega_of(alpha0),
            width=params.rho_prime, truncation=params.truncation,
        )
        + pert
        + FourierVectorField(far, params.rho_prime, params.truncation)
    )


# ---------------------------------------------------------------------------
# Lambda and the stable-decay probe


def lambda_jn(cf: CFExpansion, sigma: float, beta: float, j: int, n: int) -> float:
    """Lambda_{j,n} = [Atilde_{n+1} Atilde_n / (sigma Atilde_{j-1}^{2+beta})]^{1/(2+beta)}."""
    if not 0 <= j <= n or n <= 0:
        raise ValueError("need 0 <= j <= n with n > 0")
    num = cf.a_tilde_float(n + 1) * cf.a_tilde_float(n)
    den = sigma * cf.a_tilde_float(j - 1) ** (2.0 + beta)
    return float((num / den) ** (1.0 / (2.0 + beta)))


def power_iteration_norm(matrix, iters: int = 60, seed: int = 0) -> float:
    """Largest singular value of a sparse operator by power iteration on A*A."""
    rng = np.random.default_rng(seed)
    n = matrix.shape[1]
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = matrix @ v
        v_next = matrix.conj().T @ w
        norm = np.linalg.norm(v_next)
        if norm == 0:
            return 0.0
        sigma = math.sqrt(norm)
        v = v_next / norm
    return float(sigma)


@dataclass
class DecayProbeReport:
    """Norm table of the composed truncated linear steps L_n ... L_j (I - E).

    norm_l1 is the exact operator norm in the weighted-l1 field norm
    (column maximisation: each basis mode transports to a single mode);
    norm_l2 is a power-iteration estimate in weighted-l2 coordinates.
    Zero entries mean that no truncated mode survives all projections.
    """

    n: int
    j_values: np.ndarray
    norm_l1: np.ndarray
    norm_l2: np.ndarray
    lambdas: np.ndarray
    surviving: np.ndarray

    def log_ratios(self):
        """Contraction gained by the extra factor: log(N_{j+1}/N_j), keyed by j.

        Values are positive and, for super-geometric decay, increase as j
        decreases (more composed factors).
        """
        out = {}
        for idx in range(len(self.j_values) - 1):
            n_fewer = self.norm_l1[idx]       # j_values[idx] = j + 1 level
            n_more = self.norm_l1[idx + 1]    # one extra factor
            j = int(self.j_values[idx + 1])
            if n_fewer > 0 and n_more > 0:
                out[j] = math.log(n_fewer / n_more)
        return out


def stable_decay_probe(
    cf: CFExpansion,
    sigma: float,
    truncation: int,
    n: int,
    params: RenormParams | None = None,
    beta: float = 0.0,
    ell: float = 1.0,
) -> DecayProbeReport:
    """Estimate ||L_n o ... o L_j (I - E)|| on the truncated mode set.

    Each factor L_i = alpha_{i+1} [resonant projection at omega_{i+1}] o
    [mode transport by T_{a_i}]; a basis mode either dies at some
    projection or transports to a single mode, so the weighted-l1 norm is
    an exact column maximum.  A sparse matrix of the survivors feeds the
    power-iteration l2 estimate.
    """
    if params is None:
        params = RenormParams(sigma=sigma, truncation=truncation)
    rho_prime = params.rho_prime
    omegas = [ell * np.array([1.0, cf.tail_float(i)]) for i in range(n + 2)]
    j_values = np.arange(n, -1, -1)
    norms_l1, norms_l2, lambdas, surviving = [], [], [], []
    universe = sorted(
        (k1, k2)
        for k1 in range(-truncation, truncation + 1)
        for k2 in range(-(truncation - abs(k1)), truncation - abs(k1) + 1)
        if (k1, k2) != (0, 0)
    )
    mode_index = {k: i for i, k in enumerate(universe)}
    for j in j_values:
        best = 0.0
        alive = 0
        rows, cols, vals = [], [], []
        for k in resonant_modes(omegas[j], sigma, truncation):
            kk = k
            block = np.eye(2)
            dead = False
            for i in range(j, n + 1):
                a_i = cf.coefficient(i)
                kk = (kk[1], kk[0] + a_i * kk[1])
                t_inv = np.array([[-float(a_i), 1.0], [1.0, 0.0]])
                block = cf.tail_float(i + 1) * (t_inv @ block)
                w = omegas[i + 1]
                if mode_l1(kk) > truncation or abs(
                    w[0] * kk[0] + w[1] * kk[1]
                ) > sigma * mode_l1(kk):
                    dead = True
                    break
            if dead:
                continue
            alive += 1
            weight = math.exp(rho_prime * (mode_l1(kk) - mode_l1(k)))
            # weighted-l1 operator norm is an exact column maximum
            best = max(best, max(np.abs(block).sum(axis=0)) * weight)
            src, dst = mode_index[k], mode_index[kk]
            for r in range(2):
                for c in range(2):
                    rows.append(2 * dst + r)
                    cols.append(2 * src + c)
                    vals.append(block[r, c] * weight)
        if vals:
            size = 2 * len(universe)
            mat = scipy.sparse.coo_matrix(
                (vals, (rows, cols)), shape=(size, size)
            ).tocsr()
            l2 = power_iteration_norm(mat)
        else:
            l2 = 0.0
        norms_l1.append(best)
        norms_l2.append(l2)
        lambdas.append(lambda_jn(cf, sigma, beta, int(j), n) if n > 0 else np.nan)
        surviving.append(alive)
    return DecayProbeReport(
        n=n,
        j_values=j_values,
        norm_l1=np.array(norms_l1),
        norm_l2=np.array(norms_l2),
        lambdas=np.array(lambdas),
        surviving=np.array(surviving),
    )


# ---------------------------------------------------------------------------
# quadratic remainder of the step at the fixed constant field


@dataclass
class RemainderProbe:
    norms: np.ndarray
    remainders: np.ndarray
    bounds: np.ndarray
    exponent: float


def quadratic_remainder_probe(
    slope: Slope,
    params: RenormParams,
    seed: int = 0,
    fractions=(0.1, 0.01),
) -> RemainderProbe:
    """Taylor remainder ||R(omega + f) - omega' - DR(omega) f|| at two sizes.

    Samples f at norms zeta/10 and zeta/100 and fits the scaling exponent,
    which should be 2 for an analytic map with bounded second derivative.
    """
    cf = cf_expand(slope, 4)
    alpha0 = cf.tail_float(0)
    alpha1 = cf.tail_float(1)
    zeta = params.zeta(alpha0, alpha1)

    rng = np.random.default_rng(seed)
    omega0 = np.array([1.0, alpha0])
    direction = random_resonant_field(
        omega0, params.sigma, 1.0, params.truncation, rng,
        width=params.rho_prime, n_modes=4,
    )
    # add a constant component so the remainder sees the normalisation too
    direction = direction + FourierVectorField.constant(
        np.array([0.2, -0.1]), width=params.rho_prime,
        truncation=params.truncation,
    )
    direction = direction * (1.0 / norm_r(direction, params.rho_prime))

    sizes, rems, bounds = [], [], []
    for frac in fractions:
        t = frac * zeta
        f = direction * t
        state = perturbed_state(f, cf)
        out = one_step(state, params)
        linear = linearized_step(f, cf, 0, params)
        rem = norm_r(out.perturbation - linear, params.rho_prime)
        sizes.append(t)
        rems.append(rem)
        bounds.append(t * t / (zeta * (zeta - t)))
    exponent = math.log(rems[0] / rems[1]) / math.log(sizes[0] / sizes[1])
    return RemainderProbe(
        norms=np.array(sizes),
        remainders=np.array(rems),
        bounds=np.array(bounds),
        exponent=float(exponent),
    )
