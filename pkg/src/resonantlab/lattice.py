"""Exact enumeration and validation of resonant mode sets on the integer lattice.

Resonant 4-tuples (n1, n2, n3, n4) satisfy the momentum relation
n1 - n2 + n3 - n4 = 0 together with a frequency relation that depends on
the model: |n|^2 sums for beam/hartree (rectangles), |n| sums for wave
(parallelograms inscribed on an ellipse).  Wave frequencies are irrational,
so equality is decided exactly through squarefree decompositions rather
than floating tolerances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from sympy import factorint

MODELS = ("wave", "beam", "hartree")


class LatticeError(ValueError):
    pass


def squarefree_decompose(m: int) -> tuple[int, int]:
    """Return (k, s) with sqrt(m) = k*sqrt(s) and s squarefree, for m >= 0."""
    if m < 0:
        raise LatticeError(f"cannot decompose sqrt of negative integer {m}")
    if m == 0:
        return 0, 1
    k, s = 1, 1
    for p, e in factorint(m).items():
        k *= p ** (e // 2)
        if e % 2:
            s *= p
    return k, s


class SqrtSum:
    """Canonical integer combination sum_i k_i * sqrt(s_i), s_i squarefree.

    Square roots of distinct squarefree integers are linearly independent
    over Q, so two values are equal iff their canonical maps coincide.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict[int, int]] = None):
        self.terms: dict[int, int] = {}
        if terms:
            for s, k in terms.items():
                if s <= 0:
                    raise LatticeError(f"squarefree part must be positive, got {s}")
                if k:
                    self.terms[s] = self.terms.get(s, 0) + k
            self.terms = {s: k for s, k in sorted(self.terms.items()) if k}

    @classmethod
    def sqrt_of(cls, m: int) -> "SqrtSum":
        k, s = squarefree_decompose(m)
        return cls({s: k} if k else None)

    @classmethod
    def integer(cls, n: int) -> "SqrtSum":
        return cls({1: n} if n else None)

    def __add__(self, other: "SqrtSum") -> "SqrtSum":
        merged = dict(self.terms)
        for s, k in other.terms.items():
            merged[s] = merged.get(s, 0) + k
        return SqrtSum(merged)

    def __neg__(self) -> "SqrtSum":
        return SqrtSum({s: -k for s, k in self.terms.items()})

    def __sub__(self, other: "SqrtSum") -> "SqrtSum":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, SqrtSum) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __float__(self) -> float:
        return float(sum(k * s ** 0.5 for s, k in self.terms.items()))

    def key(self) -> tuple:
        return tuple(self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "SqrtSum(0)"
        return "SqrtSum(" + " + ".join(f"{k}*sqrt({s})" for s, k in self.terms.items()) + ")"


def sqrt_sum_equal(lhs: SqrtSum, rhs: SqrtSum) -> bool:
    """Exact equality of the represented real numbers."""
    return lhs == rhs


@dataclass(frozen=True, order=True)
class ModeVector:
    j1: int
    j2: int

    @property
    def norm_sq(self) -> int:
        return self.j1 * self.j1 + self.j2 * self.j2

    def is_odd(self) -> bool:
        """Membership in Z^2_odd: first component odd, second even."""
        return self.j1 % 2 == 1 and self.j2 % 2 == 0

    def __add__(self, other: "ModeVector") -> "ModeVector":
        return ModeVector(self.j1 + other.j1, self.j2 + other.j2)

    def __sub__(self, other: "ModeVector") -> "ModeVector":
        return ModeVector(self.j1 - other.j1, self.j2 - other.j2)

    def __neg__(self) -> "ModeVector":
        return ModeVector(-self.j1, -self.j2)

    def as_tuple(self) -> tuple[int, int]:
        return (self.j1, self.j2)


def frequency(j: ModeVector, model: str):
    """Linear frequency of mode j: |j| for wave (exact SqrtSum), |j|^2 otherwise."""
    if model not in MODELS:
        raise LatticeError(f"unknown model {model!r}")
    if model == "wave":
        if j.norm_sq == 0:
            raise LatticeError("wave frequency undefined at the zero mode")
        return SqrtSum.sqrt_of(j.norm_sq)
    return j.norm_sq


def frequency_float(j: ModeVector, model: str) -> float:
    f = frequency(j, model)
    return float(f) if isinstance(f, SqrtSum) else float(f)


def _freq_exact(j: ModeVector, model: str):
    # uniform exact representation for resonance sums
    if model == "wave":
        return frequency(j, model)
    return SqrtSum.integer(j.norm_sq)


def _collinear(modes: tuple[ModeVector, ...]) -> bool:
    a, b = modes[0], modes[1]
    v = b - a
    for c in modes[2:]:
        w = c - a
        if v.j1 * w.j2 - v.j2 * w.j1 != 0:
            return False
    return True


_DIHEDRAL = [
    (0, 1, 2, 3), (1, 2, 3, 0), (2, 3, 0, 1), (3, 0, 1, 2),
    (3, 2, 1, 0), (2, 1, 0, 3), (1, 0, 3, 2), (0, 3, 2, 1),
]


def canonical_order(modes: tuple[ModeVector, ...]) -> tuple[ModeVector, ...]:
    """Lexicographically smallest dihedral relabeling of (n1,n2,n3,n4).

    The dihedral group of the 4-cycle preserves the alternating sign
    structure of the momentum and frequency relations.
    """
    return min((tuple(modes[i] for i in perm) for perm in _DIHEDRAL),
               key=lambda ms: tuple(m.as_tuple() for m in ms))


@dataclass(frozen=True)
class ResonantTuple:
    modes: tuple[ModeVector, ModeVector, ModeVector, ModeVector]
    model: str
    degenerate: bool = False

    @classmethod
    def create(cls, modes: Iterable[ModeVector], model: str) -> "ResonantTuple":
        modes = tuple(modes)
        if len(modes) != 4:
            raise LatticeError("a resonant tuple has exactly 4 modes")
        if model not in MODELS:
            raise LatticeError(f"unknown model {model!r}")
        n1, n2, n3, n4 = modes
        if (n1 + n3) != (n2 + n4):
            raise LatticeError(f"momentum violated: {modes}")
        fsum = _freq_exact(n1, model) - _freq_exact(n2, model) \
            + _freq_exact(n3, model) - _freq_exact(n4, model)
        if not fsum.is_zero():
            raise LatticeError(f"frequency resonance violated: {modes}")
        if len(set(modes)) != 4:
            raise LatticeError(f"modes not pairwise distinct: {modes}")
        if model in ("wave", "beam") and not all(m.is_odd() for m in modes):
            raise LatticeError(f"modes outside Z^2_odd: {modes}")
        degen = _collinear(modes) or sorted([n1, n3]) == sorted([n2, n4])
        return cls(canonical_order(modes), model, degen)

    def frequencies(self):
        return [frequency(m, self.model) for m in self.modes]

    def ellipse(self) -> Optional[dict]:
        """Ellipse through a wave tuple: foci 0 and n1+n3, semi-major (|n1|+|n3|)/2."""
        if self.model != "wave":
            return None
        n1, _, n3, _ = self.modes
        major2 = SqrtSum.sqrt_of(n1.norm_sq) + SqrtSum.sqrt_of(n3.norm_sq)
        return {
            "focus1": (0, 0),
            "focus2": (n1 + n3).as_tuple(),
            "semi_major_twice": major2,          # exact: 2a = |n1| + |n3|
            "semi_major": float(major2) / 2.0,
        }

    def in_annulus(self, R: float, eps: float) -> bool:
        lo, hi = R * (1.0 - eps), R * (1.0 + eps)
        return all(lo * lo <= m.norm_sq <= hi * hi for m in self.modes)

    def to_dict(self) -> dict:
        d = {
            "modes": [m.as_tuple() for m in self.modes],
            "model": self.model,
            "degenerate": self.degenerate,
        }
        if self.model == "wave":
            d["frequencies"] = [{"sqrt_terms": f.key(), "value": float(f)}
                                for f in self.frequencies()]
            ell = self.ellipse()
            d["ellipse"] = {
                "focus1": ell["focus1"],
                "focus2": ell["focus2"],
                "semi_major_twice_sqrt_terms": ell["semi_major_twice"].key(),
                "semi_major": ell["semi_major"],
            }
        else:
            d["frequencies"] = [int(f) for f in self.frequencies()]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResonantTuple":
        return cls.create([ModeVector(*m) for m in d["modes"]], d["model"])


def modes_in_box(box: int, parity: bool) -> list[ModeVector]:
    out = []
    for j1 in range(-box, box + 1):
        for j2 in range(-box, box + 1):
            m = ModeVector(j1, j2)
            if m == ModeVector(0, 0):
                continue
            if parity and not m.is_odd():
                continue
            out.append(m)
    return out


def _enumerate_tuples(box: int, model: str, annulus=None) -> list[ResonantTuple]:
    """Bucket unordered diagonal pairs by (midpoint sum, exact frequency sum).

    A tuple (n1, n2, n3, n4) with n1 + n3 = n2 + n4 and matching frequency
    sums is assembled from two disjoint pairs in the same bucket.
    """
    if box < 1:
        raise LatticeError("box must be >= 1")
    parity = model in ("wave", "beam")
    modes = modes_in_box(box, parity)
    freqs = {m: _freq_exact(m, model) for m in modes}

    buckets: dict[tuple, list[tuple[ModeVector, ModeVector]]] = {}
    for p, q in itertools.combinations(modes, 2):
        key = ((p + q).as_tuple(), (freqs[p] + freqs[q]).key())
        buckets.setdefault(key, []).append((p, q))

    seen = set()
    result = []
    for pairs in buckets.values():
        if len(pairs) < 2:
            continue
        for (p, q), (r, s) in itertools.combinations(pairs, 2):
            if len({p, q, r, s}) != 4:
                continue
            try:
                tup = ResonantTuple.create((p, r, q, s), model)
            except LatticeError:
                continue
            if tup.degenerate:
                continue
            if annulus is not None and not tup.in_annulus(*annulus):
                continue
            if tup.modes not in seen:
                seen.add(tup.modes)
                result.append(tup)
    result.sort(key=lambda t: tuple(m.as_tuple() for m in t.modes))
    return result


def enumerate_beam_tuples(box: int, annulus=None) -> list[ResonantTuple]:
    return _enumerate_tuples(box, "beam", annulus)


def enumerate_wave_tuples(box: int, annulus=None) -> list[ResonantTuple]:
    return _enumerate_tuples(box, "wave", annulus)


def enumerate_hartree_tuples(box: int, annulus=None) -> list[ResonantTuple]:
    # hartree rectangles live in all of Z^2, no parity restriction
    return _enumerate_tuples(box, "hartree", annulus)


@dataclass
class LambdaSet:
    tuples: list[ResonantTuple]
    annulus: Optional[tuple[float, float]] = None
    certificate: list[dict] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.tuples)

    @property
    def model(self) -> str:
        return self.tuples[0].model

    def modes(self) -> list[ModeVector]:
        return [m for t in self.tuples for m in t.modes]

    def passed(self) -> bool:
        return all(c["passed"] for c in self.certificate)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "N": self.N,
            "annulus": list(self.annulus) if self.annulus else None,
            "tuples": [t.to_dict() for t in self.tuples],
            "certificate": self.certificate,
        }

    @classmethod
    def from_dict(cls, d: dict):
        tuples = [ResonantTuple.from_dict(t) for t in d["tuples"]]
        annulus = tuple(d["annulus"]) if d.get("annulus") else None
        return validate_lambda(tuples, annulus)


def check_h41(lam: LambdaSet, model: str, extra_predicates=None) -> list[dict]:
    """Scan for resonant quartic monomials with exactly one mode outside Lambda.

    For every (j1, j2, j3) in Lambda with repetition and sign vector sigma,
    the momentum relation forces j4.  A violation is reported when j4 lies
    in the ambient mode set but not in Lambda and the frequency sum also
    vanishes exactly.  An empty list certifies that this resonance class
    is absent for the chosen set.
    """
    lam_modes = set(lam.modes())
    ambient_parity = model in ("wave", "beam")
    freq_cache: dict[ModeVector, SqrtSum] = {}

    def fq(m):
        if m not in freq_cache:
            freq_cache[m] = _freq_exact(m, model)
        return freq_cache[m]

    violations = []
    mode_list = sorted(lam_modes)
    for j1, j2, j3 in itertools.product(mode_list, repeat=3):
        for sigma in itertools.product((1, -1), repeat=4):
            sx = sigma[0] * j1.j1 + sigma[1] * j2.j1 + sigma[2] * j3.j1
            sy = sigma[0] * j1.j2 + sigma[1] * j2.j2 + sigma[2] * j3.j2
            j4 = ModeVector(-sigma[3] * sx, -sigma[3] * sy)
            if j4 in lam_modes:
                continue
            if ambient_parity and not j4.is_odd():
                continue
            if model == "wave" and j4.norm_sq == 0:
                continue
            total = SqrtSum.integer(0)
            for s, j in zip(sigma, (j1, j2, j3, j4)):
                term = fq(j)
                total = total + (term if s == 1 else -term)
            if not total.is_zero():
                continue
            if extra_predicates and not all(p(j1, j2, j3, j4, sigma)
                                            for p in extra_predicates):
                continue
            violations.append({
                "modes": [j.as_tuple() for j in (j1, j2, j3, j4)],
                "sigma": list(sigma),
            })
    return violations


def validate_lambda(tuples: list[ResonantTuple], annulus=None,
                    extra_predicates=None) -> LambdaSet:
    """Assemble a LambdaSet, hard-failing on type invariants and recording
    soft checks (disjointness, parity, annulus, degeneracy, H41) in the
    certificate."""
    if not tuples:
        raise LatticeError("need at least one tuple")
    model = tuples[0].model
    if any(t.model != model for t in tuples):
        raise LatticeError("mixed models in Lambda set")
    # re-verify exact resonance (hard failure path for hand-built tuples)
    for t in tuples:
        ResonantTuple.create(t.modes, t.model)

    lam = LambdaSet(list(tuples), annulus)
    all_modes = lam.modes()
    disjoint = len(set(all_modes)) == len(all_modes)
    lam.certificate.append({"name": "pairwise_disjoint", "passed": disjoint})
    parity_ok = model == "hartree" or all(m.is_odd() for m in all_modes)
    lam.certificate.append({"name": "parity", "passed": parity_ok})
    if annulus is not None:
        ann_ok = all(t.in_annulus(*annulus) for t in tuples)
        lam.certificate.append({"name": "annulus", "passed": ann_ok,
                                "R": annulus[0], "eps": annulus[1]})
    degenerate = [i for i, t in enumerate(tuples) if t.degenerate]
    lam.certificate.append({"name": "non_degenerate", "passed": not degenerate,
                            "degenerate_tuples": degenerate})
    if disjoint:
        h41 = check_h41(lam, model, extra_predicates)
        lam.certificate.append({"name": "h41_empty", "passed": not h41,
                                "violations": h41})
    else:
        lam.certificate.append({"name": "h41_empty", "passed": False,
                                "violations": None,
                                "detail": "skipped: modes not disjoint"})
    return lam
