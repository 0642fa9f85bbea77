"""Truncated Fourier representation of analytic vector fields on the 2-torus.

A field X(theta) = sum_k f_k exp(2*pi*i k.theta) is stored as a sparse map
from integer modes k to coefficients in C^2, with a nominal analyticity
width and a truncation radius in the l1 mode norm.  The module provides
the two weighted coefficient norms, resonant/contracting cone projections,
grid sampling and fitting, JSON serialisation and a numerical winding
ratio via flow integration on the lift.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import fft2, ifft2
from scipy.integrate import solve_ivp

TWO_PI = 2.0 * math.pi


def _l1(v) -> float:
    return float(abs(v[0]) + abs(v[1]))


def mode_l1(k) -> int:
    return abs(k[0]) + abs(k[1])


class FourierVectorField:
    """Immutable sparse Fourier series of a vector field on T^2."""

    __slots__ = ("modes", "width", "truncation")

    def __init__(self, modes, width: float, truncation: int):
        if width <= 0:
            raise ValueError("width must be positive")
        clean = {}
        for k, c in modes.items():
            k = (int(k[0]), int(k[1]))
            if mode_l1(k) > truncation:
                raise ValueError(f"mode {k} outside truncation {truncation}")
            c = np.asarray(c, dtype=complex)
            if c.shape != (2,):
                raise ValueError("coefficients must be 2-vectors")
            if c[0] != 0 or c[1] != 0:
                clean[k] = c.copy()
        object.__setattr__(self, "modes", clean)
        object.__setattr__(self, "width", float(width))
        object.__setattr__(self, "truncation", int(truncation))

    def __setattr__(self, *args):
        raise AttributeError("FourierVectorField is immutable")

    # constructors ----------------------------------------------------------

    @classmethod
    def constant(cls, vec, width: float = 1.0, truncation: int = 32):
        return cls({(0, 0): np.asarray(vec, dtype=complex)}, width, truncation)

    @classmethod
    def zero(cls, width: float = 1.0, truncation: int = 32):
        return cls({}, width, truncation)

    # basic queries ---------------------------------------------------------

    def coefficient(self, k) -> np.ndarray:
        return self.modes.get((int(k[0]), int(k[1])), np.zeros(2, dtype=complex))

    def average(self) -> np.ndarray:
        return self.coefficient((0, 0))

    def sorted_modes(self):
        return sorted(self.modes.keys())

    def __len__(self):
        return len(self.modes)

    def is_real_symmetric(self, tol: float = 1e-10) -> bool:
        for k, c in self.modes.items():
            c_neg = self.coefficient((-k[0], -k[1]))
            if _l1(c_neg - np.conj(c)) > tol * max(1.0, _l1(c)):
                return False
        return True

    def max_abs_coefficient(self) -> float:
        if not self.modes:
            return 0.0
        return max(float(np.max(np.abs(c))) for c in self.modes.values())

    # algebra ---------------------------------------------------------------

    def _merged(self, other, sign):
        out = {k: c.copy() for k, c in self.modes.items()}
        for k, c in other.modes.items():
            out[k] = out.get(k, np.zeros(2, dtype=complex)) + sign * c
        return out

    def __add__(self, other):
        trunc = max(self.truncation, other.truncation)
        return FourierVectorField(self._merged(other, 1), self.width, trunc)

    def __sub__(self, other):
        trunc = max(self.truncation, other.truncation)
        return FourierVectorField(self._merged(other, -1), self.width, trunc)

    def __mul__(self, scalar):
        return FourierVectorField(
            {k: c * scalar for k, c in self.modes.items()},
            self.width,
            self.truncation,
        )

    __rmul__ = __mul__

    def matrix_apply(self, m) -> "FourierVectorField":
        """Apply a 2x2 matrix to every coefficient."""
        m = np.asarray(m)
        return FourierVectorField(
            {k: m @ c for k, c in self.modes.items()}, self.width, self.truncation
        )

    def minus_constant(self, vec) -> "FourierVectorField":
        out = {k: c.copy() for k, c in self.modes.items()}
        z = (0, 0)
        out[z] = out.get(z, np.zeros(2, dtype=complex)) - np.asarray(vec, dtype=complex)
        return FourierVectorField(out, self.width, self.truncation)

    def oscillatory(self) -> "FourierVectorField":
        """The field minus its spatial average: (I - E)X."""
        out = {k: c for k, c in self.modes.items() if k != (0, 0)}
        return FourierVectorField(out, self.width, self.truncation)

    def with_width(self, width: float) -> "FourierVectorField":
        return FourierVectorField(self.modes, width, self.truncation)

    def with_truncation(self, truncation: int) -> "FourierVectorField":
        return FourierVectorField(self.modes, self.width, truncation)

    # grids -----------------------------------------------------------------

    def sample_grid(self, grid: int) -> np.ndarray:
        """Values on the uniform grid theta = (j1, j2)/grid, shape (2, G, G)."""
        spec = np.zeros((2, grid, grid), dtype=complex)
        for k, c in self.modes.items():
            spec[:, k[0] % grid, k[1] % grid] += c
        return ifft2(spec, axes=(1, 2)) * grid * grid

    def derivative_grid(self, grid: int) -> np.ndarray:
        """Jacobian D X on the grid: shape (2, 2, G, G), [i, j] = dX_i/dtheta_j."""
        spec = np.zeros((2, 2, grid, grid), dtype=complex)
        for k, c in self.modes.items():
            fac = TWO_PI * 1j
            spec[:, 0, k[0] % grid, k[1] % grid] += c * (fac * k[0])
            spec[:, 1, k[0] % grid, k[1] % grid] += c * (fac * k[1])
        return ifft2(spec, axes=(2, 3)) * grid * grid

    def __repr__(self):
        return (
            f"FourierVectorField({len(self.modes)} modes, width={self.width}, "
            f"truncation={self.truncation})"
        )


@dataclass
class GridFitReport:
    dropped_mass: float
    alias_residual: float
    floor: float


def fit_grid(values: np.ndarray, width: float, truncation: int,
             floor_rel: float = 64.0 * np.finfo(float).eps):
    """Fit grid values (2, G, G) into a truncated sparse field.

    Coefficients below floor_rel * max|values| are treated as grid noise
    and dropped; that floor keeps the exponentially weighted norms from
    amplifying FFT round-off.  Mass outside the truncation disc is
    reported as the aliasing residual, dropped noise as dropped_mass.
    """
    grid = values.shape[-1]
    spec = fft2(values, axes=(1, 2)) / (grid * grid)
    floor = floor_rel * max(np.max(np.abs(values)), 1e-300)
    idx = np.fft.fftfreq(grid, d=1.0 / grid).astype(int)
    l1_grid = np.abs(idx)[:, None] + np.abs(idx)[None, :]
    mass = np.abs(spec[0]) + np.abs(spec[1])
    outside = l1_grid > truncation
    alias = float(np.max(mass[outside])) if outside.any() else 0.0
    keep = (~outside) & (mass >= floor)
    dropped = float(np.sum(mass[(~outside) & (mass > 0) & (mass < floor)]))
    modes = {}
    for i1, i2 in np.argwhere(keep):
        modes[(int(idx[i1]), int(idx[i2]))] = spec[:, i1, i2]
    field = FourierVectorField(modes, width, truncation)
    return field, GridFitReport(dropped_mass=dropped, alias_residual=alias,
                                floor=floor)


# ---------------------------------------------------------------------------
# norms


def norm_r(x: FourierVectorField, r: float) -> float:
    """sum_k ||f_k||_1 exp(r ||k||_1)."""
    if r <= 0:
        raise ValueError("width must be positive")
    return float(
        sum(_l1(c) * math.exp(r * mode_l1(k)) for k, c in x.modes.items())
    )


def norm_prime_r(x: FourierVectorField, r: float) -> float:
    """sum_k (1 + 2 pi ||k||_1) ||f_k||_1 exp(r ||k||_1)."""
    if r <= 0:
        raise ValueError("width must be positive")
    return float(
        sum(
            (1.0 + TWO_PI * mode_l1(k)) * _l1(c) * math.exp(r * mode_l1(k))
            for k, c in x.modes.items()
        )
    )


def average(x: FourierVectorField) -> np.ndarray:
    """Spatial average E(X), the k = 0 coefficient."""
    return x.average()


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class FarResonant:
    """Resonance cone for psi: inside = {k : |psi . k| <= sigma ||k||_1}."""

    psi: tuple
    sigma: float

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        object.__setattr__(self, "psi", (complex(psi[0]), complex(psi[1])))
        if not 0 < self.sigma < _l1(psi):
            raise ValueError("need 0 < sigma < ||psi||")

    def contains(self, k) -> bool:
        dot = self.psi[0] * k[0] + self.psi[1] * k[1]
        return abs(dot) <= self.sigma * mode_l1(k)


@dataclass(frozen=True)
class Kappa:
    """Contracting cone of the shift matrix: inside = {k: ||T_a* k|| <= kappa ||k||}."""

    a: int
    kappa: float

    def __post_init__(self):
        if self.a < 1:
            raise ValueError("need a >= 1")
        if not 0.5 < self.kappa < 1:
            raise ValueError("need 1/2 < kappa < 1")

    def contains(self, k) -> bool:
        # T_a is symmetric, so T_a* k = (k2, k1 + a k2)
        image = (k[1], k[0] + self.a * k[1])
        return mode_l1(image) <= self.kappa * mode_l1(k)


def project(x: FourierVectorField, cone, side: str) -> FourierVectorField:
    """Keep the modes inside (resonant/contracting) or outside the cone."""
    if side not in ("inside", "outside"):
        raise ValueError("side must be 'inside' or 'outside'")
    keep_inside = side == "inside"
    out = {
        k: c for k, c in x.modes.items() if cone.contains(k) == keep_inside
    }
    return FourierVectorField(out, x.width, x.truncation)


# ---------------------------------------------------------------------------
# serialisation


def field_to_dict(x: FourierVectorField, displacement: bool = False) -> dict:
    entries = []
    for k in x.sorted_modes():
        c = x.modes[k]
        entries.append(
            {
                "k": [k[0], k[1]],
                "re": [float(c[0].real), float(c[1].real)],
                "im": [float(c[0].imag), float(c[1].imag)],
            }
        )
    out = {"width": x.width, "truncation": x.truncation, "modes": entries}
    if displacement:
        out["displacement"] = True
    return out


def field_from_dict(data: dict) -> FourierVectorField:
    modes = {}
    for entry in data["modes"]:
        k = (int(entry["k"][0]), int(entry["k"][1]))
        modes[k] = np.array(
            [
                entry["re"][0] + 1j * entry["im"][0],
                entry["re"][1] + 1j * entry["im"][1],
            ]
        )
    return FourierVectorField(modes, data["width"], data["truncation"])


def save_field(x: FourierVectorField, path, displacement: bool = False):
    with open(path, "w") as fh:
        json.dump(field_to_dict(x, displacement), fh, indent=1)


def load_field(path) -> FourierVectorField:
    with open(path) as fh:
        return field_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# winding ratio


@dataclass
class WindingReport:
    """Outcome of the flow-integration winding estimate.

    status 'ok' carries the l1-normalised direction and its slope;
    'bounded' means the lift stayed bounded (winding 0); 'inconclusive'
    means the horizon was too short or the direction did not settle.
    """

    status: str
    direction: np.ndarray | None
    slope: float | None
    growth: float
    spread: float
    details: str = ""


def winding_ratio(
    x: FourierVectorField,
    horizon: float = 4000.0,
    tol: float = 1e-6,
    growth_threshold: float = 1e3,
    initial_points=((0.0, 0.0), (0.31, 0.77), (0.83, 0.19)),
    rtol: float = 1e-10,
) -> WindingReport:
    """Estimate lim Phi_t/||Phi_t||_1 by integrating the lifted flow.

    The direction is only read once the lift has grown past
    growth_threshold and the directions over the last tenth of the
    trajectory (and across initial points) agree within tol.
    """
    if not x.is_real_symmetric(1e-9):
        raise ValueError("winding ratio needs a field that is real on real theta")

    # sufficient no-equilibria condition; advisory, not enforced
    osc_size = norm_prime_r(x.oscillatory(), x.width) if len(x.modes) else 0.0
    no_equilibria = osc_size < _l1(np.real(x.average()))
    note = "" if no_equilibria else "; no-equilibria condition not certified"

    if set(x.modes) <= {(0, 0)}:
        # constant field: the lift is exactly theta0 + t * omega
        w = np.real(x.average())
        n1 = _l1(w)
        if n1 == 0:
            return WindingReport("bounded", None, None, 0.0, 0.0, "zero field")
        direction = w / n1
        slope = math.inf if direction[0] == 0 else direction[1] / direction[0]
        return WindingReport("ok", direction, slope, math.inf, 0.0, "constant field")

    ks = np.array(sorted(x.modes.keys()), dtype=float)
    cs = np.array([x.modes[tuple(int(v) for v in k)] for k in ks])

    def rhs(_t, theta):
        phases = np.exp((TWO_PI * 1j) * (ks @ theta))
        return np.real(phases @ cs)

    def grown(t, theta, theta0):
        return abs(theta[0] - theta0[0]) + abs(theta[1] - theta0[1]) - growth_threshold

    directions = []
    spreads = []
    growth = 0.0
    for theta0 in initial_points:
        theta0 = np.asarray(theta0, dtype=float)
        event = lambda t, y, t0=theta0: grown(t, y, t0)
        event.terminal = True
        sol = solve_ivp(
            rhs,
            (0.0, horizon),
            theta0,
            method="DOP853",
            rtol=rtol,
            atol=1e-12,
            dense_output=True,
            events=event,
        )
        t_end = sol.t[-1]
        phi_end = sol.y[:, -1]
        growth = max(growth, _l1(phi_end - theta0))
        if _l1(phi_end - theta0) < growth_threshold:
            status = "bounded" if _l1(phi_end - theta0) < 1.0 else "inconclusive"
            return WindingReport(
                status, None, None, growth, 0.0,
                f"lift grew only {_l1(phi_end - theta0):.3g} within the horizon",
            )
        window = np.linspace(0.9 * t_end, t_end, 64)
        dirs = []
        for t in window:
            # normalise the drift from theta0: same limit as Phi/||Phi||,
            # without the O(||theta0||/||Phi||) bias
            phi = sol.sol(t) - theta0
            dirs.append(phi / _l1(phi))
        dirs = np.array(dirs)
        spread = float(np.max(np.abs(dirs - dirs[-1]).sum(axis=1)))
        spreads.append(spread)
        directions.append(dirs[-1])
        if spread > tol:
            return WindingReport(
                "inconclusive", None, None, growth, spread,
                "direction did not settle over the last tenth of the trajectory",
            )

    directions = np.array(directions)
    spread_points = float(
        np.max(np.abs(directions - directions.mean(axis=0)).sum(axis=1))
    )
    if spread_points > tol:
        return WindingReport(
            "inconclusive", None, None, growth, spread_points,
            "initial points disagree on the direction",
        )
    direction = directions.mean(axis=0)
    direction = direction / _l1(direction)
    slope = math.inf if direction[0] == 0 else float(direction[1] / direction[0])
    return WindingReport("ok", direction, float(slope), growth,
                         max(spreads + [spread_points]), note.lstrip("; "))
