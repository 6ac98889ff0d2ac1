"""Resonant quartic normal-form model on the modes of a validated Lambda set.

The Hamiltonian keeps the quadratic oscillator part plus every quartic
monomial a_p a_q conj(a_r) conj(a_s) whose support satisfies the momentum
relation p + q = r + s and the model's exact frequency resonance.  For the
cubic Wave/Beam nonlinearity the coefficients carry the normal-coordinate
weights prod omega^{-1/2}; for Hartree they carry the convolution-potential
Fourier coefficients.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .lattice import LambdaSet, ModeVector, _freq_exact, frequency_float


class ResonantModelError(ValueError):
    pass


@dataclass
class Monomial:
    """Quartic term coeff * a_p a_q conj(a_r) conj(a_s), indices into the
    mode list, stored with p <= q and r <= s."""
    p: int
    q: int
    r: int
    s: int
    coeff: float


@dataclass
class ResonantHamiltonian:
    modes: list[ModeVector]
    omega: np.ndarray                  # per-mode linear frequency
    monomials: list[Monomial]
    model: str
    rotating_frame: bool = False       # drop the quadratic part (gauge)
    weight_convention: str = "omega_inv_sqrt"

    def __post_init__(self):
        # index arrays so value/gradient evaluate without a Python loop
        self._p = np.array([m.p for m in self.monomials], dtype=np.intp)
        self._q = np.array([m.q for m in self.monomials], dtype=np.intp)
        self._r = np.array([m.r for m in self.monomials], dtype=np.intp)
        self._s = np.array([m.s for m in self.monomials], dtype=np.intp)
        self._c = np.array([m.coeff for m in self.monomials])

    def value(self, a: np.ndarray) -> float:
        h = 0.0 if self.rotating_frame else float(self.omega @ (np.abs(a) ** 2))
        if len(self.monomials):
            terms = a[self._p] * a[self._q] * np.conj(a[self._r] * a[self._s])
            h += float(self._c @ terms.real)
        return h

    def gradient_conj(self, a: np.ndarray) -> np.ndarray:
        """dH/d(conj a), so that i a_dot = gradient_conj(a)."""
        g = np.zeros_like(a)
        if not self.rotating_frame:
            g += self.omega * a
        if len(self.monomials):
            pq = self._c * a[self._p] * a[self._q]
            np.add.at(g, self._r, pq * np.conj(a[self._s]))
            np.add.at(g, self._s, pq * np.conj(a[self._r]))
        return g


def hartree_potential_coefficient(V, j: ModeVector) -> float:
    """Look up V_j from a potential object or mapping; V must be even."""
    if hasattr(V, "coefficient"):
        return float(V.coefficient(j))
    key = j.as_tuple()
    if key in V:
        return float(V[key])
    nkey = (-j.j1, -j.j2)
    if nkey in V:
        return float(V[nkey])
    raise ResonantModelError(f"potential coefficient V_{key} missing")


def build_resonant_hamiltonian(lam: LambdaSet, model: Optional[str] = None,
                               potential=None, focusing: bool = False,
                               rotating_frame: bool = False) -> ResonantHamiltonian:
    """Enumerate the resonant quartic monomials supported entirely on Lambda.

    Wave/Beam: coefficient = (3 / (2 sigma)) * prod omega^{-1/2}, sigma the
    repetition factor of identical factors, from expanding the u^4/4 term in
    complex normal coordinates.  Hartree: coefficient = (1/2) * sum over the
    distinct ordered representations of V_{j1 - j2}.
    """
    model = model or lam.model
    if model != lam.model:
        raise ResonantModelError("model does not match the Lambda set")
    if model == "hartree" and potential is None:
        raise ResonantModelError("hartree requires a convolution potential")

    modes = lam.modes()
    freq_exact = {m: _freq_exact(m, model) for m in modes}
    omega = np.array([frequency_float(m, model) for m in modes])
    sign = -1.0 if focusing else 1.0

    monomials = []
    # unordered pairs with repetition for the holomorphic and antiholomorphic
    # halves of the monomial
    pairs = list(itertools.combinations_with_replacement(range(len(modes)), 2))
    for (pi, qi) in pairs:
        p, q = modes[pi], modes[qi]
        psum = p + q
        pfreq = freq_exact[p] + freq_exact[q]
        for (ri, si) in pairs:
            r, s = modes[ri], modes[si]
            if (r + s) != psum:
                continue
            if not (pfreq - (freq_exact[r] + freq_exact[s])).is_zero():
                continue
            if model == "hartree":
                coeff = 0.0
                a_orders = [(p, q)] if p == q else [(p, q), (q, p)]
                b_orders = [(r, s)] if r == s else [(r, s), (s, r)]
                for (x1, _x3) in a_orders:
                    for (y2, _y4) in b_orders:
                        coeff += hartree_potential_coefficient(potential, x1 - y2)
                coeff *= 0.5
            else:
                rep = (2.0 if pi == qi else 1.0) * (2.0 if ri == si else 1.0)
                coeff = (3.0 / (2.0 * rep)) * float(
                    np.prod(omega[[pi, qi, ri, si]] ** -0.5))
            monomials.append(Monomial(pi, qi, ri, si, sign * coeff))
    return ResonantHamiltonian(modes, omega, monomials, model,
                               rotating_frame=rotating_frame)


@dataclass
class ComplexModeState:
    amplitudes: np.ndarray  # aligned with LambdaSet.modes() order

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @classmethod
    def from_dict(cls, lam: LambdaSet, values: dict) -> "ComplexModeState":
        amps = np.zeros(4 * lam.N, dtype=complex)
        index = {m.as_tuple(): i for i, m in enumerate(lam.modes())}
        for key, v in values.items():
            amps[index[tuple(key)]] = complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
        return cls(amps)


@dataclass
class ModeTrajectory:
    t: np.ndarray
    a: np.ndarray          # (len(t), M) complex amplitudes
    energy_drift: float
    success: bool
    message: str = ""
    rotating_frame: bool = False


def evolve_resonant(s0: ComplexModeState, H: ResonantHamiltonian, t_end: float,
                    tol: float = 1e-10, n_samples: int = 1000) -> ModeTrajectory:
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = len(H.modes)

    def f(t, y):
        a = y[:M] + 1j * y[M:]
        da = -1j * H.gradient_conj(a)
        return np.concatenate([da.real, da.imag])

    y0 = np.concatenate([s0.amplitudes.real, s0.amplitudes.imag])
    rtol = max(tol * 1e-2, 1e-13)
    res = solve_ivp(f, (0.0, t_end), y0, method="DOP853", rtol=rtol,
                    atol=rtol * 1e-2, t_eval=np.linspace(0.0, t_end, n_samples))
    a = (res.y[:M] + 1j * res.y[M:]).T
    H0 = H.value(s0.amplitudes)
    drift = float(np.max(np.abs([H.value(ai) - H0 for ai in a]))
                  / max(1.0, abs(H0)))
    return ModeTrajectory(res.t, a, drift, res.success, res.message,
                          H.rotating_frame)


def first_integrals(s: ComplexModeState, lam: LambdaSet,
                    H: Optional[ResonantHamiltonian] = None) -> np.ndarray:
    """[H, M_1..M_N, P_x, P_y]: energy, per-tuple masses and total momentum
    (H omitted when no Hamiltonian is supplied).  For N = 2 the five
    quantities realize the model's complete involutive set."""
    a2 = np.abs(s.amplitudes) ** 2
    masses = [float(np.sum(a2[4 * r:4 * r + 4])) for r in range(lam.N)]
    modes = lam.modes()
    px = float(sum(m.j1 * w for m, w in zip(modes, a2)))
    py = float(sum(m.j2 * w for m, w in zip(modes, a2)))
    head = [] if H is None else [H.value(s.amplitudes)]
    return np.array(head + masses + [px, py])


@dataclass
class IntensityReport:
    intensities: np.ndarray
    relations_hold: list[bool]
    max_violation: list[float]


def tuple_intensities(s: ComplexModeState, lam: LambdaSet,
                      rel_tol: float = 1e-8) -> IntensityReport:
    """Per-mode intensities |a_n|^2 in tuple order, with flags for the
    intra-tuple relations |a1|^2 = |a3|^2, |a2|^2 = |a4|^2 and
    |a1|^2 + |a2|^2 = M_r / 2."""
    a2 = np.abs(s.amplitudes) ** 2
    holds, viol = [], []
    for r in range(lam.N):
        i1, i2, i3, i4 = a2[4 * r:4 * r + 4]
        mass = i1 + i2 + i3 + i4
        scale = max(mass, 1e-30)
        v = max(abs(i1 - i3), abs(i2 - i4), abs(i1 + i2 - mass / 2)) / scale
        viol.append(float(v))
        holds.append(v <= rel_tol)
    return IntensityReport(a2, holds, viol)


def reduce_to_action_angle(s: ComplexModeState, tuple_index: int,
                           rel_tol: float = 1e-6) -> tuple[float, float]:
    """Per-tuple (psi, K): K = (|a2|^2 + |a4|^2)/M_r, psi = arg(a1 a3
    conj(a2) conj(a4)).  Requires the intra-tuple relations and positive
    tuple mass."""
    a = s.amplitudes[4 * tuple_index:4 * tuple_index + 4]
    a2 = np.abs(a) ** 2
    mass = float(np.sum(a2))
    if mass < 1e-12:
        raise ResonantModelError("tuple mass below threshold, angle undefined")
    v = max(abs(a2[0] - a2[2]), abs(a2[1] - a2[3]),
            abs(a2[0] + a2[1] - mass / 2)) / mass
    if v > rel_tol:
        raise ResonantModelError(
            f"intra-tuple intensity relations violated (relative {v:.2e})")
    K = float((a2[1] + a2[3]) / mass)
    psi = float(np.angle(a[0] * a[2] * np.conj(a[1]) * np.conj(a[3]))) % (2 * math.pi)
    return psi, K
