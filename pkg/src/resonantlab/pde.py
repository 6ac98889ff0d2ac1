"""Pseudo-spectral splitting integrators for the cubic Wave, Beam and
Hartree equations on the two-torus, plus the diagnostics used to compare a
run against the resonant model: per-mode normalized intensities, energy and
mass, Sobolev and remainder norms, and the odd-subspace violation.

Conventions (recorded here because downstream comparisons depend on them):
  * Fourier series u(x) = sum_j uhat_j e^{i j.x} with the normalized measure
    int dx = 1, so Parseval reads mean(|u|^2) = sum |uhat_j|^2.
  * Normal variable for wave/beam: A_j = (omega^{1/2} uhat_j
    + i omega^{-1/2} vhat_j) / sqrt(2).  Initial data built from seed
    amplitudes a_n places A_n = delta * a_n, which reproduces the
    (delta/sqrt2) |n|^{-kappa/2} physical-space ansatz.
  * Hartree linear substep integrates i u_t = Delta u literally, i.e.
    uhat_j picks up e^{+i |j|^2 dt}; set flip_linear_sign for the other
    convention.
  * The cubic kick is evaluated on a 2x zero-padded grid, which is exactly
    alias-free once the Nyquist row/column of the base grid is kept empty.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .lattice import LambdaSet, ModeVector, frequency_float


class PdeError(ValueError):
    pass


# ------------------------------------------------------------ grids

@functools.lru_cache(maxsize=32)
def _plan(J: int):
    """Static per-truncation data: integer wavenumbers of the 2J grid and
    their embedding indices into the 4J padded grid."""
    N = 2 * J
    k = np.fft.fftfreq(N, d=1.0 / N).astype(int)       # [0..J-1, -J..-1]
    pad_idx = np.mod(k, 4 * J)
    kx = k[:, None]
    ky = k[None, :]
    nyq = (k == -J)
    nyq_mask = nyq[:, None] | nyq[None, :]
    return k, pad_idx, kx, ky, nyq_mask


@functools.lru_cache(maxsize=32)
def _omega_grid(model: str, J: int) -> np.ndarray:
    _, _, kx, ky, _ = _plan(J)
    n2 = (kx ** 2 + ky ** 2).astype(float)
    if model == "wave":
        return np.sqrt(n2)
    if model == "beam":
        return n2
    if model == "hartree":
        return n2
    raise PdeError(f"unknown model {model!r}")


def _mode_index(n: ModeVector, J: int) -> tuple[int, int]:
    if max(abs(n.j1), abs(n.j2)) >= J:
        raise PdeError(f"mode {n.as_tuple()} outside truncation J={J}")
    return n.j1 % (2 * J), n.j2 % (2 * J)


# ------------------------------------------------------------ field

@dataclass
class SpectralField:
    """Spectral state on a 2J x 2J grid (FFT layout, Nyquist kept empty).

    wave/beam carry the real pair (u, v = u_t) as conjugate-symmetric
    spectra uhat, vhat; hartree carries the complex uhat alone."""
    model: str
    J: int
    uhat: np.ndarray
    vhat: Optional[np.ndarray] = None

    def __post_init__(self):
        N = 2 * self.J
        if self.uhat.shape != (N, N):
            raise PdeError("spectral array shape does not match truncation")
        if self.model in ("wave", "beam") and self.vhat is None:
            raise PdeError(f"{self.model} needs the velocity component")

    def copy(self) -> "SpectralField":
        return SpectralField(self.model, self.J, self.uhat.copy(),
                             None if self.vhat is None else self.vhat.copy())

    def physical(self) -> np.ndarray:
        N = 2 * self.J
        u = np.fft.ifft2(self.uhat) * N * N
        return u.real if self.model in ("wave", "beam") else u

    def reality_defect(self) -> float:
        """Max deviation from conjugate symmetry uhat_{-j} = conj(uhat_j)."""
        if self.model == "hartree":
            return 0.0
        d = 0.0
        for arr in (self.uhat, self.vhat):
            flipped = np.conj(np.roll(arr[::-1, ::-1], (1, 1), axis=(0, 1)))
            d = max(d, float(np.max(np.abs(arr - flipped))))
        return d


# ------------------------------------------------------------ potential

@dataclass
class HartreePotential:
    """Real even convolution potential given by Fourier coefficients V_j.

    On the Lambda-difference set V_j = 1 + eps * gamma_j with gamma_j drawn
    uniformly from [-1, 1] (Philox-seeded, symmetrized); coefficients off
    the difference set default to zero."""
    coefficients: dict[tuple[int, int], float]
    eps: float = 0.0
    seed: Optional[int] = None
    _grids: dict = dc_field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, lam: LambdaSet, eps: float = 0.0,
              seed: int = 0) -> "HartreePotential":
        rng = np.random.default_rng(np.random.Philox(seed))
        coeffs = {}
        modes = lam.modes()
        for p in modes:
            for q in modes:
                j = (p - q).as_tuple()
                if j in coeffs or (-j[0], -j[1]) in coeffs:
                    continue
                gamma = float(rng.uniform(-1.0, 1.0))
                coeffs[j] = 1.0 + eps * gamma
        return cls(coeffs, eps, seed)

    def coefficient(self, j) -> float:
        key = j.as_tuple() if isinstance(j, ModeVector) else tuple(j)
        if key in self.coefficients:
            return self.coefficients[key]
        nkey = (-key[0], -key[1])
        return self.coefficients.get(nkey, 0.0)

    def grid(self, J: int) -> np.ndarray:
        if J in self._grids:
            return self._grids[J]
        V = np.zeros((2 * J, 2 * J))
        for (j1, j2), v in self.coefficients.items():
            for (x, y) in {(j1, j2), (-j1, -j2)}:
                if max(abs(x), abs(y)) < J:
                    V[x % (2 * J), y % (2 * J)] = v
        self._grids[J] = V
        return V


# ------------------------------------------------------------ initial data

@dataclass
class InitialDataSpec:
    lam: LambdaSet
    delta: float
    amplitudes: np.ndarray                 # aligned with lam.modes()
    kappa: Optional[int] = None            # 1 wave, 2 beam, None hartree
    background: float = 0.0                # relative off-Lambda noise scale
    seed: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.delta < 0:
            raise PdeError("delta must be non-negative")
        if np.any(np.abs(self.amplitudes) > 1 + 1e-12):
            raise PdeError("seed amplitudes must satisfy |a_n| <= 1")
        want = {"wave": 1, "beam": 2, "hartree": None}[self.lam.model]
        if self.kappa is None:
            self.kappa = want
        elif self.kappa != want:
            raise PdeError(f"kappa={self.kappa} does not match {self.lam.model}")


def default_truncation(lam: LambdaSet) -> int:
    return 4 * max(max(abs(m.j1), abs(m.j2)) for m in lam.modes())


def build_initial_data(spec: InitialDataSpec,
                       J: Optional[int] = None) -> SpectralField:
    lam = spec.lam
    model = lam.model
    J = J or default_truncation(lam)
    N = 2 * J
    uhat = np.zeros((N, N), dtype=complex)
    modes = lam.modes()
    if model == "hartree":
        for m, a in zip(modes, spec.amplitudes):
            uhat[_mode_index(m, J)] += spec.delta * a
        f = SpectralField(model, J, uhat)
    else:
        vhat = np.zeros((N, N), dtype=complex)
        for m, a in zip(modes, spec.amplitudes):
            A = spec.delta * a
            w = frequency_float(m, model)
            i = _mode_index(m, J)
            ni = _mode_index(-m, J)
            uhat[i] += A / (math.sqrt(2) * math.sqrt(w))
            uhat[ni] += np.conj(A) / (math.sqrt(2) * math.sqrt(w))
            vhat[i] += -1j * math.sqrt(w) * A / math.sqrt(2)
            vhat[ni] += np.conj(-1j * math.sqrt(w) * A / math.sqrt(2))
        f = SpectralField(model, J, uhat, vhat)
    if spec.background > 0:
        _add_background(f, spec)
    return f


def _add_background(f: SpectralField, spec: InitialDataSpec) -> None:
    rng = np.random.default_rng(np.random.Philox(spec.seed))
    N = 2 * f.J
    scale = spec.background * spec.delta
    _, _, _, _, nyq = _plan(f.J)
    lam_cells = {_mode_index(m, f.J) for m in spec.lam.modes()}
    lam_cells |= {_mode_index(-m, f.J) for m in spec.lam.modes()}
    noise = scale * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
    if f.model == "hartree":
        noise[nyq] = 0.0
        for c in lam_cells:
            noise[c] = 0.0
        f.uhat += noise
        return
    # symmetrize so u stays real
    flip = np.conj(np.roll(noise[::-1, ::-1], (1, 1), axis=(0, 1)))
    noise = 0.5 * (noise + flip)
    noise[nyq] = 0.0
    for c in lam_cells:
        noise[c] = 0.0
    f.uhat += noise


# ------------------------------------------------------------ stepping

def _cubic_hat(uhat: np.ndarray, J: int) -> np.ndarray:
    """FFT of u^3 via 2x zero-padded pointwise cube (exactly alias-free for
    Nyquist-free input).  The Nyquist row/column of the result is discarded:
    on a 2J grid those wavenumbers have no conjugate partner, so keeping
    them would break the reality of the field."""
    _, pad_idx, _, _, nyq = _plan(J)
    M = 4 * J
    big = np.zeros((M, M), dtype=complex)
    big[np.ix_(pad_idx, pad_idx)] = uhat
    # the field is real; dropping the roundoff imaginary part keeps the
    # spectrum conjugate-symmetric instead of letting the defect accumulate
    u = (np.fft.ifft2(big) * M * M).real
    cube_hat = np.fft.fft2(u * u * u) / (M * M)
    out = cube_hat[np.ix_(pad_idx, pad_idx)]
    out[nyq] = 0.0
    return out


def _half_rotation(model: str, J: int, dt: float):
    w = _omega_grid(model, J)
    c = np.cos(w * dt)
    s = np.sin(w * dt)
    with np.errstate(divide="ignore", invalid="ignore"):
        sw = np.where(w > 0, s / np.where(w > 0, w, 1.0), dt)  # sinc limit
    return c, s, sw, w


def _step_wave_beam(f: SpectralField, dt: float, focusing: bool) -> SpectralField:
    if dt <= 0:
        raise PdeError("dt must be positive")
    c, s, sw, w = _half_rotation(f.model, f.J, dt / 2)
    u, v = f.uhat, f.vhat
    u1 = u * c + v * sw
    v1 = -u * (w * s) + v * c
    sign = -1.0 if focusing else 1.0
    v1 = v1 - sign * dt * _cubic_hat(u1, f.J)
    u2 = u1 * c + v1 * sw
    v2 = -u1 * (w * s) + v1 * c
    return SpectralField(f.model, f.J, u2, v2)


def step_wave(f: SpectralField, dt: float, focusing: bool = False) -> SpectralField:
    if f.model != "wave":
        raise PdeError("field is not a wave state")
    return _step_wave_beam(f, dt, focusing)


def step_beam(f: SpectralField, dt: float, focusing: bool = False) -> SpectralField:
    if f.model != "beam":
        raise PdeError("field is not a beam state")
    return _step_wave_beam(f, dt, focusing)


def step_hartree(f: SpectralField, dt: float, V: HartreePotential,
                 focusing: bool = False,
                 flip_linear_sign: bool = False) -> SpectralField:
    if f.model != "hartree":
        raise PdeError("field is not a hartree state")
    if dt <= 0:
        raise PdeError("dt must be positive")
    N = 2 * f.J
    w = _omega_grid("hartree", f.J)
    lin_sign = -1.0 if flip_linear_sign else 1.0
    half = np.exp(1j * lin_sign * w * dt / 2)
    uhat = f.uhat * half
    u = np.fft.ifft2(uhat) * N * N
    W = _convolved_density(u, V, f.J)
    sign = -1.0 if focusing else 1.0
    u = u * np.exp(-1j * sign * dt * W)
    uhat = np.fft.fft2(u) / (N * N)
    uhat *= half
    return SpectralField("hartree", f.J, uhat)


def _convolved_density(u: np.ndarray, V: HartreePotential, J: int) -> np.ndarray:
    N = 2 * J
    rho_hat = np.fft.fft2(np.abs(u) ** 2) / (N * N)
    W = np.fft.ifft2(V.grid(J) * rho_hat) * N * N
    return W.real


# ------------------------------------------------------------ functionals

def energy(f: SpectralField, V: Optional[HartreePotential] = None,
           focusing: bool = False) -> float:
    """Conserved functional of the model; the defocusing/focusing flag only
    flips the sign of the quartic (or convolution) term."""
    sign = -1.0 if focusing else 1.0
    n2 = _omega_grid("beam", f.J)  # |j|^2 on the grid
    if f.model == "hartree":
        if V is None:
            raise PdeError("hartree energy needs the potential")
        u = f.physical()
        W = _convolved_density(u, V, f.J)
        kinetic = float(np.sum(n2 * np.abs(f.uhat) ** 2))
        return kinetic - sign * 0.5 * float(np.mean(W * np.abs(u) ** 2))
    grad2 = n2 if f.model == "wave" else n2 ** 2
    quad = 0.5 * float(np.sum(np.abs(f.vhat) ** 2)) \
        + 0.5 * float(np.sum(grad2 * np.abs(f.uhat) ** 2))
    # quartic term on the padded grid, where its mean is quadrature-exact
    _, pad_idx, _, _, _ = _plan(f.J)
    M = 4 * f.J
    big = np.zeros((M, M), dtype=complex)
    big[np.ix_(pad_idx, pad_idx)] = f.uhat
    u = (np.fft.ifft2(big) * M * M).real
    return quad + sign * 0.25 * float(np.mean(u ** 4))


def mass(f: SpectralField) -> float:
    if f.model != "hartree":
        raise PdeError("mass is a hartree invariant")
    return float(np.sum(np.abs(f.uhat) ** 2))


def normal_amplitude(f: SpectralField, n: ModeVector) -> complex:
    """Complex normal variable A_n; equals delta * a_n for freshly built data."""
    i = _mode_index(n, f.J)
    if f.model == "hartree":
        return complex(f.uhat[i])
    w = frequency_float(n, f.model)
    return complex((math.sqrt(w) * f.uhat[i] + 1j * f.vhat[i] / math.sqrt(w))
                   / math.sqrt(2))


def mode_intensity(f: SpectralField, n: ModeVector, spec: InitialDataSpec) -> float:
    """Normalized intensity |a_n|^2, inverting the delta scaling."""
    A = normal_amplitude(f, n)
    return abs(A / spec.delta) ** 2


def sobolev_norm(f: SpectralField, s: float) -> float:
    if s < 0:
        raise PdeError("s must be non-negative")
    n2 = _omega_grid("beam", f.J)
    return math.sqrt(float(np.sum((1.0 + n2) ** s * np.abs(f.uhat) ** 2)))


def remainder_norm(f: SpectralField, spec: InitialDataSpec, s: float) -> float:
    """H^s norm of u minus its first-order Lambda part (the Lambda modes with
    their current normal amplitudes)."""
    g = f.copy()
    for m in spec.lam.modes():
        A = normal_amplitude(f, m)
        i = _mode_index(m, f.J)
        if f.model == "hartree":
            g.uhat[i] -= A
            continue
        w = frequency_float(m, f.model)
        ni = _mode_index(-m, f.J)
        g.uhat[i] -= A / (math.sqrt(2) * math.sqrt(w))
        g.uhat[ni] -= np.conj(A) / (math.sqrt(2) * math.sqrt(w))
        g.vhat[i] -= -1j * math.sqrt(w) * A / math.sqrt(2)
        g.vhat[ni] -= np.conj(-1j * math.sqrt(w) * A / math.sqrt(2))
    return sobolev_norm(g, s)


def odd_subspace_violation(f: SpectralField) -> float:
    """Max |uhat_j| over wavevectors outside {j1 odd, j2 even}."""
    if f.model not in ("wave", "beam"):
        raise PdeError("odd subspace is a wave/beam notion")
    k, _, kx, ky, _ = _plan(f.J)
    off = (np.abs(kx) % 2 == 0) | (np.abs(ky) % 2 == 1)
    return float(np.max(np.abs(f.uhat[off]))) if off.any() else 0.0


def default_dt(f_or_lam, model: Optional[str] = None,
               J: Optional[int] = None) -> float:
    """2 pi / (20 omega_max): at least 20 samples of the fastest linear mode."""
    if isinstance(f_or_lam, SpectralField):
        model, J = f_or_lam.model, f_or_lam.J
    else:
        model = model or f_or_lam.model
        J = J or default_truncation(f_or_lam)
    w_max = float(np.max(_omega_grid(model, J)))
    return 2 * math.pi / (20 * w_max)


# ------------------------------------------------------------ runs

@dataclass
class RunSample:
    step: int
    t: float
    tau: float
    intensities: np.ndarray
    energy: float
    mass: Optional[float]
    remainders: dict[float, float]
    odd_violation: Optional[float]


@dataclass
class RunResult:
    samples: list[RunSample]
    final: SpectralField
    dt: float
    n_steps: int
    energy_drift: float = dc_field(init=False)

    def __post_init__(self):
        e = np.array([s.energy for s in self.samples])
        scale = abs(e[0]) if abs(e[0]) > 0 else 1.0
        self.energy_drift = float(np.max(np.abs(e - e[0])) / scale)


def simulate(f: SpectralField, dt: float, n_steps: int,
             spec: InitialDataSpec,
             V: Optional[HartreePotential] = None,
             focusing: bool = False,
             sample_every: int = 100,
             sobolev_orders: tuple[float, ...] = (0.0, 1.0, 2.0)) -> RunResult:
    if f.model == "hartree" and V is None:
        raise PdeError("hartree run needs the potential")
    modes = spec.lam.modes()

    def observe(step, g):
        t = step * dt
        return RunSample(
            step, t, spec.delta ** 2 * t,
            np.array([mode_intensity(g, m, spec) for m in modes]),
            energy(g, V, focusing),
            mass(g) if g.model == "hartree" else None,
            {s: remainder_norm(g, spec, s) for s in sobolev_orders},
            odd_subspace_violation(g) if g.model != "hartree" else None)

    samples = [observe(0, f)]
    g = f
    for k in range(1, n_steps + 1):
        if g.model == "hartree":
            g = step_hartree(g, dt, V, focusing)
        elif g.model == "wave":
            g = step_wave(g, dt, focusing)
        else:
            g = step_beam(g, dt, focusing)
        if k % sample_every == 0 or k == n_steps:
            samples.append(observe(k, g))
    return RunResult(samples, g, dt, n_steps)
