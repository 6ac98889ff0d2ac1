"""The reduced N-degree-of-freedom Hamiltonian in per-tuple action-angle
coordinates (psi, K), its flow, fixed points, invariant manifolds,
separatrix splitting and return-time symbolics.

H = H0 + eps*H1 with
  H0 = sum_j K_j (1 - K_j) (1 + 2 cos psi_j)
  H1 = sum_j (a_j K_j + b_j K_j^2 + c_j K_j (1-K_j) cos psi_j)
       + sum_{i<j} d_ij K_i K_j

Sign convention: psi_dot = +dH/dK, K_dot = -dH/dpsi ((psi, K) treated as
a canonical angle-action pair).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.random import Generator, Philox
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, root

TWO_PI = 2.0 * math.pi

SADDLE_ANGLE = 2.0 * math.pi / 3.0  # 1 + 2 cos(psi) = 0


class IntegrationError(RuntimeError):
    pass


@dataclass
class ModelCoefficients:
    N: int
    eps: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray  # strictly upper-triangular (N, N)

    def __post_init__(self):
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        self.d = np.asarray(self.d, dtype=float).reshape(self.N, self.N)
        for arr, name in ((self.a, "a"), (self.b, "b"), (self.c, "c")):
            if arr.shape != (self.N,):
                raise ValueError(f"coefficient {name} must have length N={self.N}")
        if np.any(np.tril(self.d) != 0.0):
            raise ValueError("d must be strictly upper-triangular")

    @property
    def d_sym(self) -> np.ndarray:
        return self.d + self.d.T

    @classmethod
    def sample(cls, N: int, eps: float, seed: int) -> "ModelCoefficients":
        """Deterministic generic coefficients from a counter-based PRNG
        (Philox4x64), uniform in [-1, 1]."""
        rng = Generator(Philox(seed))
        d = np.triu(rng.uniform(-1.0, 1.0, size=(N, N)), k=1)
        return cls(N, eps, rng.uniform(-1.0, 1.0, N),
                   rng.uniform(-1.0, 1.0, N), rng.uniform(-1.0, 1.0, N), d)

    @classmethod
    def zero(cls, N: int, eps: float = 0.0) -> "ModelCoefficients":
        return cls(N, eps, np.zeros(N), np.zeros(N), np.zeros(N),
                   np.zeros((N, N)))

    def to_dict(self) -> dict:
        return {"N": self.N, "eps": self.eps, "a": self.a.tolist(),
                "b": self.b.tolist(), "c": self.c.tolist(),
                "d": self.d.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelCoefficients":
        if "seed" in d:
            return cls.sample(d["N"], d["eps"], d["seed"])
        return cls(d["N"], d["eps"], np.asarray(d["a"]), np.asarray(d["b"]),
                   np.asarray(d["c"]), np.asarray(d["d"]))


K_TOL = 1e-12


@dataclass
class ReducedState:
    psi: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        self.psi = np.mod(np.atleast_1d(np.asarray(self.psi, dtype=float)), TWO_PI)
        self.K = np.atleast_1d(np.asarray(self.K, dtype=float))
        if np.any(self.K < -K_TOL) or np.any(self.K > 1.0 + K_TOL):
            raise ValueError(f"action outside [0, 1]: {self.K}")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.psi, self.K])


@dataclass
class SectionSpec:
    index: int
    value: float           # section level, in [0, 2pi) for angle sections
    direction: int = 1     # sign of the section coordinate's velocity
    coordinate: str = "psi"  # "psi" (Poincare maps) or "K" (splitting)

    def __post_init__(self):
        if self.coordinate == "psi":
            self.value = self.value % TWO_PI


def hamiltonian(s: ReducedState, c: ModelCoefficients) -> float:
    psi, K = s.psi, s.K
    h0 = np.sum(K * (1.0 - K) * (1.0 + 2.0 * np.cos(psi)))
    h1 = np.sum(c.a * K + c.b * K ** 2 + c.c * K * (1.0 - K) * np.cos(psi))
    h1 += 0.5 * K @ c.d_sym @ K
    return float(h0 + c.eps * h1)


def _rhs(psi: np.ndarray, K: np.ndarray, c: ModelCoefficients):
    cosp, sinp = np.cos(psi), np.sin(psi)
    psi_dot = (1.0 - 2.0 * K) * (1.0 + 2.0 * cosp) \
        + c.eps * (c.a + 2.0 * c.b * K + c.c * (1.0 - 2.0 * K) * cosp
                   + c.d_sym @ K)
    K_dot = (2.0 + c.eps * c.c) * K * (1.0 - K) * sinp
    return psi_dot, K_dot


def vector_field(s: ReducedState, c: ModelCoefficients) -> np.ndarray:
    psi_dot, K_dot = _rhs(s.psi, s.K, c)
    return np.concatenate([psi_dot, K_dot])


def jacobian(psi: np.ndarray, K: np.ndarray, c: ModelCoefficients) -> np.ndarray:
    """Closed-form Jacobian of the vector field in (psi, K) ordering."""
    N = c.N
    cosp, sinp = np.cos(psi), np.sin(psi)
    J = np.zeros((2 * N, 2 * N))
    g = 2.0 + c.eps * c.c
    # d psi_dot / d psi  (diagonal)
    J[:N, :N] = np.diag(-(1.0 - 2.0 * K) * sinp * g)
    # d psi_dot / d K
    J[:N, N:] = np.diag(-2.0 * (1.0 + 2.0 * cosp)
                        + c.eps * (2.0 * c.b - 2.0 * c.c * cosp)) \
        + c.eps * c.d_sym
    # d K_dot / d psi  (diagonal)
    J[N:, :N] = np.diag(g * K * (1.0 - K) * cosp)
    # d K_dot / d K  (diagonal)
    J[N:, N:] = np.diag(g * (1.0 - 2.0 * K) * sinp)
    return J


def _flat_rhs(c: ModelCoefficients):
    N = c.N

    def f(t, y):
        psi_dot, K_dot = _rhs(y[:N], y[N:], c)
        return np.concatenate([psi_dot, K_dot])

    return f


@dataclass
class Trajectory:
    t: np.ndarray
    psi: np.ndarray   # (len(t), N), reduced mod 2pi
    K: np.ndarray     # (len(t), N)
    H: np.ndarray
    energy_drift: float
    k_excursion: float
    success: bool
    message: str = ""
    sol: object = None          # scipy dense-output solution
    psi_unwrapped: Optional[np.ndarray] = None


def integrate(s0: ReducedState, c: ModelCoefficients, t_end: float,
              tol: float = 1e-10, n_samples: int = 1000) -> Trajectory:
    if tol <= 0:
        raise ValueError("tol must be positive")
    y0 = s0.as_vector()
    t_eval = np.linspace(0.0, t_end, n_samples)
    # tolerances are tightened internally so that the reported energy drift
    # honors the <= 10*tol contract over long horizons
    rtol = max(tol * 1e-2, 1e-13)
    res = solve_ivp(_flat_rhs(c), (0.0, t_end), y0, method="DOP853",
                    rtol=rtol, atol=rtol * 1e-2, dense_output=True,
                    t_eval=t_eval)
    N = c.N
    psi_raw, K = res.y[:N].T, res.y[N:].T
    H = np.array([hamiltonian(ReducedState(p, np.clip(k, 0.0, 1.0)), c)
                  for p, k in zip(psi_raw, K)])
    H0 = hamiltonian(s0, c)
    drift = float(np.max(np.abs(H - H0)) / max(1.0, abs(H0))) if len(H) else 0.0
    exc = float(max(np.max(K) - 1.0, -np.min(K), 0.0))
    return Trajectory(res.t, np.mod(psi_raw, TWO_PI), K, H, drift, exc,
                      res.success, res.message, res.sol, psi_raw)


def _per_dof_equilibria():
    # analytic eps=0 equilibria of a single degree of freedom
    return [
        (0.0, 0.5, "center"),
        (math.pi, 0.5, "center"),
        (SADDLE_ANGLE, 0.0, "saddle"),
        (TWO_PI - SADDLE_ANGLE, 0.0, "saddle"),
        (SADDLE_ANGLE, 1.0, "saddle"),
        (TWO_PI - SADDLE_ANGLE, 1.0, "saddle"),
    ]


@dataclass
class FixedPoint:
    state: ReducedState
    eigenvalues: np.ndarray
    kind: str
    converged: bool = True
    residual: float = 0.0


def fixed_points(c: ModelCoefficients) -> list[FixedPoint]:
    """All equilibria built from per-dof analytic points at eps=0,
    continued by a Newton solve for eps > 0."""
    import itertools as it

    N = c.N
    results = []
    for combo in it.product(_per_dof_equilibria(), repeat=N):
        psi0 = np.array([p[0] for p in combo])
        K0 = np.array([p[1] for p in combo])
        kind = "x".join(p[2] for p in combo)
        if c.eps == 0.0:
            psi, K, converged, resid = psi0, K0, True, 0.0
        else:
            def fun(y):
                pd, kd = _rhs(y[:N], y[N:], c)
                return np.concatenate([pd, kd])

            sol = root(fun, np.concatenate([psi0, K0]),
                       jac=lambda y: jacobian(y[:N], y[N:], c),
                       method="hybr", tol=1e-13)
            psi, K = sol.x[:N], sol.x[N:]
            resid = float(np.linalg.norm(fun(sol.x)))
            converged = sol.success and resid < 1e-10
        J = jacobian(psi, K, c)
        eig = np.linalg.eigvals(J)
        results.append(FixedPoint(
            ReducedState(psi, np.clip(K, 0.0, 1.0)), eig, kind,
            converged, resid))
    return results


BRANCHES = ("unstable+", "unstable-", "stable+", "stable-")


@dataclass
class ManifoldCurve:
    t: np.ndarray
    psi: np.ndarray
    K: np.ndarray
    arclength: np.ndarray
    energy_deviation: np.ndarray
    branch: str


def manifold_trace(saddle: ReducedState, c: ModelCoefficients, branch: str,
                   arc: float, seed_dist: float = 1e-7,
                   t_max: float = 1e4) -> ManifoldCurve:
    """Grow an invariant-manifold branch from a saddle by integration,
    seeded along the corresponding eigenvector of the closed-form Jacobian."""
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}")
    N = c.N
    J = jacobian(saddle.psi, saddle.K, c)
    eig, vecs = np.linalg.eig(J)
    real = np.real(eig)
    want_unstable = branch.startswith("unstable")
    idx = int(np.argmax(real)) if want_unstable else int(np.argmin(real))
    lam = real[idx]
    if (want_unstable and lam <= 1e-8) or (not want_unstable and lam >= -1e-8):
        raise ValueError("saddle lacks the requested hyperbolic direction")
    order = np.argsort(-real) if want_unstable else np.argsort(real)
    if len(real) > 1 and abs(real[order[0]] - real[order[1]]) < 1e-9:
        raise ValueError("seed eigenvector ill-defined: non-simple eigenvalue")
    v = np.real(vecs[:, idx])
    v /= np.linalg.norm(v)
    if branch.endswith("-"):
        v = -v
    y0 = np.concatenate([saddle.psi, saddle.K]) + seed_dist * v

    base_f = _flat_rhs(c)

    sign = 1.0 if want_unstable else -1.0

    def f(t, ya):
        dy = sign * base_f(t, ya[:-1])
        return np.append(dy, np.linalg.norm(dy))

    def reached(t, ya):
        return ya[-1] - arc

    reached.terminal = True
    reached.direction = 1
    res = solve_ivp(f, (0.0, t_max), np.append(y0, 0.0), method="DOP853",
                    rtol=1e-11, atol=1e-13, dense_output=True, events=reached,
                    max_step=1.0)
    y = res.y
    psi, K, s = y[:N].T, y[N:2 * N].T, y[-1]
    E0 = hamiltonian(ReducedState(saddle.psi, saddle.K), c)
    dev = np.array([hamiltonian(ReducedState(p, np.clip(k, 0.0, 1.0)), c) - E0
                    for p, k in zip(psi, K)])
    return ManifoldCurve(res.t, psi, K, s, dev, branch)


def _k0_saddle_angle(c: ModelCoefficients, near: float = SADDLE_ANGLE) -> float:
    """Angle of the saddle on the invariant circle K=0 (single dof)."""
    def g(psi):
        return (1.0 + 2.0 * math.cos(psi)) + c.eps * (c.a[0] + c.c[0] * math.cos(psi))

    return brentq(g, near - 0.5, near + 0.5, xtol=1e-14)


def _k1_saddle_angle(c: ModelCoefficients, near: float = SADDLE_ANGLE) -> float:
    """Angle of the saddle on the invariant circle K=1 (single dof)."""
    def g(psi):
        return (-1.0) * (1.0 + 2.0 * math.cos(psi)) \
            + c.eps * (c.a[0] + 2.0 * c.b[0] - c.c[0] * math.cos(psi))

    return brentq(g, near - 0.5, near + 0.5, xtol=1e-14)


def _first_level_crossing(curve: ManifoldCurve, level: float):
    """First crossing of K = level along a traced curve, refined on the
    polyline (the curve is sampled densely via max_step)."""
    K = curve.K[:, 0]
    psi = curve.psi[:, 0]
    for i in range(len(K) - 1):
        if (K[i] - level) * (K[i + 1] - level) <= 0.0 and K[i] != K[i + 1]:
            w = (level - K[i]) / (K[i + 1] - K[i])
            return psi[i] + w * (psi[i + 1] - psi[i])
    return None


def splitting_distance(c: ModelCoefficients, section: SectionSpec,
                       arc: float = 4.0) -> float:
    """Signed angular gap between W^u of the K=0 saddle and W^s of the K=1
    saddle at the section level K = section.value (single degree of freedom).

    The unperturbed separatrix is the fixed-angle line psi = 2pi/3, so the
    transverse section is a K-level and the splitting is measured in psi.
    """
    if c.N != 1:
        raise ValueError("splitting is measured on the single-dof reduction")
    if section.coordinate != "K":
        raise ValueError("splitting section must be a K-level")
    level = section.value

    psi_b = _k0_saddle_angle(c)
    psi_t = _k1_saddle_angle(c)
    bottom = ReducedState(np.array([psi_b]), np.array([0.0]))
    top = ReducedState(np.array([psi_t]), np.array([1.0]))

    # pick the branch signs that move into 0 < K < 1
    def crossing(saddle, branch):
        for suffix in ("+", "-"):
            curve = manifold_trace(saddle, c, branch + suffix, arc)
            hit = _first_level_crossing(curve, level)
            if hit is not None:
                return hit
        raise IntegrationError("manifold fails to reach the section")

    psi_u = crossing(bottom, "unstable")
    psi_s = crossing(top, "stable")
    gap = (psi_u - psi_s + math.pi) % TWO_PI - math.pi
    return float(gap)


def poincare_map(s0: ReducedState, c: ModelCoefficients, section: SectionSpec,
                 max_crossings: int, t_max: float = 1e3,
                 tol: float = 1e-12) -> list[tuple[ReducedState, float]]:
    """Successive directional crossings of the angle section psi_i = psi*."""
    if section.coordinate != "psi":
        raise ValueError("Poincare sections are angle sections")
    N = c.N
    i = section.index
    psi_star = section.value
    y0 = s0.as_vector()
    if abs(math.sin(y0[i] - psi_star)) < 1e-12 and math.cos(y0[i] - psi_star) > 0:
        raise ValueError("initial state lies on the section")

    def ev(t, y):
        return math.sin(y[i] - psi_star)

    ev.direction = section.direction
    res = solve_ivp(_flat_rhs(c), (0.0, t_max), y0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2, events=ev, dense_output=True)
    crossings = []
    for t_ev, y_ev in zip(res.t_events[0], res.y_events[0]):
        if math.cos(y_ev[i] - psi_star) <= 0.0:
            continue  # the antipodal zero of sin
        state = ReducedState(y_ev[:N], np.clip(y_ev[N:], 0.0, 1.0))
        crossings.append((state, float(t_ev)))
        if len(crossings) >= max_crossings:
            break
    return crossings


def return_time_symbols(crossings: list, T_quantum: float) -> list[int]:
    """Quantized return times m_k = floor(dt_k / T_quantum), the itinerary
    in the infinite horseshoe alphabet."""
    if T_quantum <= 0:
        raise ValueError("T_quantum must be positive")
    times = [t for _, t in crossings]
    if len(times) < 2:
        raise ValueError("need at least two crossings")
    return [int(math.floor((t1 - t0) / T_quantum))
            for t0, t1 in zip(times, times[1:])]


@dataclass
class ChainResult:
    success: bool
    visit_times: list[float]
    trajectory: Optional[Trajectory]
    parameter: Optional[float]
    diagnostics: dict = field(default_factory=dict)


def chain_shadowing_run(c: ModelCoefficients, itinerary: list[int],
                        nbhd: float, t_budget: float = 200.0,
                        scan: Optional[np.ndarray] = None,
                        tol: float = 1e-10) -> ChainResult:
    """Search for an orbit visiting the per-dof half-exchange regimes
    (|K_i - 1/2| < nbhd) in itinerary order.

    Shooting over a one-parameter family of initial conditions seeded near
    the saddle circles: the first itinerary dof starts at K = 1e-3 along
    its unstable direction, the scanned parameter is the seed action of the
    next dof in line.  Distance to the i-th target regime is |K_i - 1/2|,
    the desk-scale surrogate for closeness to the i-th beating torus.
    """
    if not all(1 <= i <= c.N for i in itinerary):
        raise ValueError("itinerary entries must be dof indices in 1..N")
    if len(itinerary) == 1:
        i = itinerary[0] - 1
        psi0 = np.full(c.N, SADDLE_ANGLE)
        K0 = np.full(c.N, 1e-6)
        K0[i] = 0.5  # start inside the neighborhood
        s0 = ReducedState(psi0, K0)
        traj = integrate(s0, c, 1.0, tol=tol, n_samples=10)
        return ChainResult(True, [0.0], traj, None)

    if scan is None:
        scan = np.logspace(-8, -3, 11)

    first = itinerary[0] - 1
    second = itinerary[1] - 1

    def attempt(lam):
        psi0 = np.full(c.N, SADDLE_ANGLE)
        K0 = np.full(c.N, min(lam, 1e-6))
        K0[first] = 1e-3
        K0[second] = lam
        s0 = ReducedState(psi0, K0)
        traj = integrate(s0, c, t_budget, tol=tol, n_samples=20000)
        times = []
        t_prev = -np.inf
        for dof in itinerary:
            dist = np.abs(traj.K[:, dof - 1] - 0.5)
            ok = np.where((dist < nbhd) & (traj.t > t_prev))[0]
            if len(ok) == 0:
                return None, traj
            t_prev = traj.t[ok[0]]
            times.append(float(t_prev))
        return times, traj

    tried = []
    for lam in scan:
        times, traj = attempt(float(lam))
        tried.append(float(lam))
        if times is not None:
            return ChainResult(True, times, traj, float(lam),
                               {"scanned": tried})
    return ChainResult(False, [], None, None,
                       {"scanned": tried,
                        "detail": "no scanned parameter realized the itinerary"})
