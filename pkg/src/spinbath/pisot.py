"""Pisot classification and exact power-sum machinery for monic integer polynomials.

Polynomials are integer coefficient lists with the constant term first:
``[-1, -1, 1]`` is x^2 - x - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import sympy

from .errors import (
    InvalidParameterError,
    NoDominantRootError,
    NonMonicError,
    PrecisionExceededError,
    RepeatedRootError,
    VerdictWithheldError,
)

CERT_MARGIN = 1e-10
ROOT_DPS = 50
MAX_POWER = 10_000


def _check_poly(coeffs) -> tuple[int, ...]:
    cs = tuple(coeffs)
    if len(cs) < 2:
        raise InvalidParameterError("polynomial must have degree >= 1")
    for c in cs:
        if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
            if isinstance(c, float) and c.is_integer():
                continue
            raise InvalidParameterError(f"coefficients must be integers, got {c!r}")
    cs = tuple(int(c) for c in cs)
    if cs[-1] != 1:
        raise NonMonicError(f"leading coefficient is {cs[-1]}, not 1")
    return cs


def poly_text(coeffs) -> str:
    x = sympy.Symbol("x")
    return str(sympy.Poly(list(reversed(coeffs)), x).as_expr())


def _roots_with_radii(cs):
    """All complex roots with inclusion radii.

    Each disk D(z_i, d |W_i|), W_i = p(z_i) / prod_{j != i}(z_i - z_j), is a
    Weierstrass inclusion disk: the union holds every root and an isolated
    disk holds exactly one.
    """
    d = len(cs) - 1
    with mpmath.workdps(ROOT_DPS):
        desc = [mpmath.mpf(c) for c in reversed(cs)]
        if d == 1:
            return [mpmath.mpc(-cs[0])], [mpmath.mpf(0)]
        roots = mpmath.polyroots(desc, maxsteps=500, extraprec=4 * ROOT_DPS)
        roots = [mpmath.mpc(r) for r in roots]
        radii = []
        for i, z in enumerate(roots):
            den = mpmath.mpf(1)
            for j, w in enumerate(roots):
                if j != i:
                    den *= z - w
            w_i = mpmath.polyval(desc, z) / den if den != 0 else mpmath.inf
            radii.append(d * abs(w_i) + mpmath.mpf(10) ** (-ROOT_DPS + 5))
    return roots, radii


@dataclass(frozen=True)
class AlgebraicInteger:
    """Monic integer polynomial with a selected real root > 1."""

    coeffs: tuple
    root: float
    root_tolerance: float
    roots: tuple = field(repr=False, compare=False, default=())
    radii: tuple = field(repr=False, compare=False, default=())
    index: int = field(repr=False, compare=False, default=0)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def conjugates(self) -> list:
        return [r for i, r in enumerate(self.roots) if i != self.index]

    def root_mp(self, prec_bits: int):
        """The selected root refined by Newton's method to ``prec_bits`` bits."""
        desc = [int(c) for c in reversed(self.coeffs)]
        with mpmath.workprec(prec_bits + 32):
            x = mpmath.mpf(self.roots[self.index].real)
            dp = [c * (self.degree - i) for i, c in enumerate(desc[:-1])]
            for _ in range(int(math.log2(prec_bits + 32)) + 8):
                step = mpmath.polyval(desc, x) / mpmath.polyval(dp, x)
                x -= step
                if step == 0 or abs(step) < mpmath.mpf(2) ** (-(prec_bits + 16)) * abs(x):
                    break
            return +x


def isolate_dominant_root(coeffs) -> AlgebraicInteger:
    """Largest real root > 1 of a monic integer polynomial, with an inclusion radius."""
    cs = _check_poly(coeffs)
    # a multiple root has no finite inclusion radius
    if has_repeated_root(cs):
        raise RepeatedRootError(f"{poly_text(cs)} has a repeated root")
    roots, radii = _roots_with_radii(cs)
    best = None
    for i, (z, rad) in enumerate(zip(roots, radii)):
        if abs(z.imag) <= rad and z.real - rad > 1:
            if best is None or z.real > roots[best].real:
                best = i
    if best is None:
        raise NoDominantRootError(f"{poly_text(cs)} has no certified real root above 1")
    return AlgebraicInteger(
        coeffs=cs,
        root=float(roots[best].real),
        root_tolerance=max(float(radii[best]), math.ulp(float(roots[best].real))),
        roots=tuple(complex(r) for r in roots),
        radii=tuple(float(r) for r in radii),
        index=best,
    )


@dataclass(frozen=True)
class PisotVerdict:
    is_pisot: bool
    conjugate_moduli: tuple
    margin: float
    error_bound: float


def has_repeated_root(coeffs) -> bool:
    x = sympy.Symbol("x")
    p = sympy.Poly(list(reversed(coeffs)), x)
    return p.degree() > 0 and sympy.gcd(p, p.diff(x)).degree() > 0


def classify_pisot(alg: AlgebraicInteger) -> PisotVerdict:
    """Pisot verdict relative to the given polynomial (assumed irreducible).

    Raises :class:`VerdictWithheldError` when the largest conjugate modulus is
    within the certification bound of 1.
    """
    if has_repeated_root(alg.coeffs):
        raise RepeatedRootError(f"{poly_text(alg.coeffs)} has a repeated root")
    others = [i for i in range(len(alg.roots)) if i != alg.index]
    moduli = tuple(abs(alg.roots[i]) for i in others)
    bound = max([CERT_MARGIN] + [alg.radii[i] for i in others])
    margin = 1.0 - max(moduli, default=0.0)
    if abs(margin) <= bound:
        raise VerdictWithheldError(margin, bound)
    return PisotVerdict(alg.root > 1 and margin > bound, moduli, margin, bound)


def power_sums(coeffs, n_max: int) -> list[int]:
    """s_n = sum of n-th powers of all roots, n = 0..n_max, by Newton's identities."""
    cs = _check_poly(coeffs)
    if not 0 <= n_max <= MAX_POWER:
        raise InvalidParameterError(f"n_max must be in [0, {MAX_POWER}]")
    d = len(cs) - 1

    def c(j):
        return cs[j] if j >= 0 else 0

    s = [d]
    for n in range(1, n_max + 1):
        acc = sum(c(d - i) * s[n - i] for i in range(1, min(n - 1, d) + 1))
        if n <= d:
            acc += n * c(d - n)
        s.append(-acc)
    return s


@dataclass
class DistanceReport:
    """Distances ||theta^n|| for n = 1..n_max plus decay diagnostics."""

    distances: list
    sum_squares: float
    decay_ratio: float | None
    exact: bool

    def __iter__(self):
        return iter(self.distances)

    def __len__(self):
        return len(self.distances)

    def __getitem__(self, i):
        return self.distances[i]


def geometric_fit(values, n0: int = 1) -> float | None:
    """exp of the least-squares slope of log(values) against n (zeros skipped)."""
    pts = [(n0 + i, math.log(v)) for i, v in enumerate(values) if v > 0]
    if len(pts) < 2:
        return None
    n, y = np.array(pts).T
    return float(math.exp(np.polyfit(n, y, 1)[0]))


def _pisot_distances(alg: AlgebraicInteger, n_max: int) -> list[float]:
    # theta^n + sum conj^n = s_n, so ||theta^n|| = |sum conj^n| while that is < 1/2
    s = power_sums(alg.coeffs, n_max)
    with mpmath.workdps(ROOT_DPS):
        conj = [mpmath.mpc(c) for c in alg.conjugates]
        out = []
        for n in range(1, n_max + 1):
            tail = sum((z**n for z in conj), mpmath.mpc(0)).real
            if abs(tail) < 0.5:
                out.append(float(abs(tail)))
            else:
                # conjugate sum too large to name the nearest integer; round theta^n
                x = s[n] - tail
                out.append(float(abs(x - mpmath.nint(x))))
    return out


def _high_precision_distances(alg: AlgebraicInteger, n_max: int, guard_bits: int) -> list[float]:
    def run(extra):
        bits = int(n_max * math.log2(max(alg.root, 2.0))) + guard_bits + extra
        theta = alg.root_mp(bits)
        with mpmath.workprec(bits):
            out, x = [], mpmath.mpf(1)
            for _ in range(n_max):
                x *= theta
                out.append(abs(x - mpmath.nint(x)))
        return out

    a, b = run(0), run(64)
    tol = mpmath.mpf(2) ** (-guard_bits + 8)
    if any(abs(u - v) > tol for u, v in zip(a, b)):
        raise PrecisionExceededError("nearest-integer distances not stable under +64 bits")
    return [float(v) for v in b]


def distance_to_integers(theta, n_max: int, guard_bits: int = 64) -> DistanceReport:
    """||theta^n|| = distance from theta^n to the nearest integer, n = 1..n_max.

    ``theta`` is an :class:`AlgebraicInteger`, an ``int`` or a ``Fraction``.
    Pisot inputs use the exact power sums; others use arbitrary precision
    with n log2(theta) + guard_bits working bits, checked against a rerun at
    64 more bits.
    """
    if n_max < 1:
        raise InvalidParameterError("n_max must be >= 1")
    if isinstance(theta, (int, Fraction)) and not isinstance(theta, bool):
        th = Fraction(theta)
        dist = []
        x = Fraction(1)
        for _ in range(n_max):
            x *= th
            f = x - math.floor(x)
            dist.append(float(min(f, 1 - f)))
        exact = True
    else:
        alg = theta
        try:
            pisot = classify_pisot(alg).is_pisot
        except VerdictWithheldError:
            pisot = False
        if pisot:
            dist = _pisot_distances(alg, n_max)
        else:
            dist = _high_precision_distances(alg, n_max, guard_bits)
        exact = pisot
    ratio = geometric_fit(dist[4:30], n0=5) if n_max >= 6 else geometric_fit(dist)
    return DistanceReport(dist, math.fsum(d * d for d in dist), ratio, exact)
