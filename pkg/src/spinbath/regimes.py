"""Experiments that probe each decoherence regime, and regime classification.

Every experiment returns an :class:`ExperimentReport` whose ``rows`` follow
the CSV schema named in ``columns``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .couplings import CouplingScheme, coupling_values, energy_norm_limit, partial_energy_norm, weyl_growth_check
from .decoherence import decoherence_factor, limit_abs_many, limit_with_depth, log_decoherence_factor
from .errors import (
    InvalidParameterError,
    PrecisionExceededError,
    RegimeMismatchError,
    VerdictWithheldError,
)
from .pisot import AlgebraicInteger, classify_pisot, distance_to_integers

CONFIRMED, REFUTED, INCONCLUSIVE = "confirmed", "refuted", "inconclusive"
LOG2 = math.log(2.0)

GAUSSIAN = "gaussian_decoherence"
CONSERVING = "coherence_conserving_candidate"
SLOW = "slow_decoherence_candidate"
FROZEN = "frozen_candidate"
UNKNOWN = "unknown"


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict
    scalars: dict
    verdict: str
    labels: dict = field(default_factory=dict)
    columns: tuple = ()
    rows: list = field(default_factory=list)
    table: str | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "scalars": self.scalars,
            "labels": self.labels,
            "verdict": self.verdict,
            "table": self.table,
        }


def _ols_slope(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    if y.size < 2:
        return 0.0
    x = np.arange(y.size, dtype=np.float64)
    return float(np.polyfit(x, y, 1)[0])


# -- Gaussian regime ------------------------------------------------------------


def clt_rescaling_experiment(scheme: CouplingScheme, N_list, t_grid, tol: float = 1e-4) -> ExperimentReport:
    """Compare r_N(t / D_N) with exp(-t^2/2) for growing N.

    The unrescaled comparison r_N(t) against exp(-D_N^2 t^2 / 2) on the same
    grid is reported alongside; it shows where the Gaussian picture breaks
    (revivals of |r_N| at large t).
    """
    if math.isfinite(energy_norm_limit(scheme)):
        raise RegimeMismatchError(f"{scheme} has convergent D_N; no Gaussian regime")
    if not scheme.is_bounded:
        raise RegimeMismatchError(f"{scheme} has unbounded couplings")
    N_list = [int(n) for n in N_list]
    t_grid = [float(t) for t in t_grid]
    rows, devs, env_devs = [], [], []
    for N in N_list:
        D = partial_energy_norm(scheme, N)
        worst = env_worst = 0.0
        for t in t_grid:
            r = decoherence_factor(scheme, N, t / D)
            g = math.exp(-t * t / 2)
            dev = abs(r - g)
            r_raw = decoherence_factor(scheme, N, t)
            env = math.exp(-D * D * t * t / 2)
            worst = max(worst, dev)
            env_worst = max(env_worst, abs(r_raw - env))
            rows.append((N, t, r, g, dev, r_raw, env))
        devs.append(worst)
        env_devs.append(env_worst)
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    final = devs[-1] if devs else math.inf
    verdict = CONFIRMED if devs and decreasing and final <= tol else REFUTED
    scalars = {"max_deviation": final, "tolerance": tol}
    for N, d, ed in zip(N_list, devs, env_devs):
        scalars[f"max_deviation_N{N}"] = d
        scalars[f"envelope_max_deviation_N{N}"] = ed
    return ExperimentReport(
        "clt",
        {"scheme": scheme.to_text(), "N_list": N_list, "t_grid": t_grid, "tolerance": tol},
        scalars,
        verdict,
        {"deviations_decreasing": str(decreasing).lower()},
        ("N", "t", "r_scaled", "gaussian", "abs_deviation", "r_unscaled", "gaussian_envelope"),
        rows,
    )


# -- Pisot probe ----------------------------------------------------------------


def _probe_scheme(theta):
    if isinstance(theta, AlgebraicInteger):
        return CouplingScheme.geometric_decaying(theta.root), theta.root
    th = Fraction(theta)
    if th.denominator == 1:
        return CouplingScheme.geometric_decaying(th.numerator), float(th)
    return CouplingScheme.rational_decaying(th.numerator, th.denominator), float(th)


def _is_pisot(theta) -> bool | None:
    if isinstance(theta, AlgebraicInteger):
        try:
            return classify_pisot(theta).is_pisot
        except VerdictWithheldError:
            return None
    return Fraction(theta).denominator == 1


def probe_values(theta, n_max: int, eps: float = 1e-12):
    """|r(pi theta^n)| for n = 0..n_max via r(pi theta^n) = r(pi) prod_{j<n} cos(pi theta^j).

    |cos(pi theta^j)| = sin(pi (1/2 - ||theta^j||)) with ||.|| the distance to
    the nearest integer, so the leading factors come straight from the
    exact (or certified) distance sequence.
    """
    scheme, _ = _probe_scheme(theta)
    r_pi = limit_with_depth(scheme, math.pi, eps)
    dist = [0.0] + (distance_to_integers(theta, n_max).distances if n_max >= 1 else [])
    values, acc = [], abs(r_pi.value)
    for n in range(n_max + 1):
        if n > 0:
            acc *= math.sin(math.pi * (0.5 - dist[n - 1]))
        values.append(acc)
    return values, r_pi


def pisot_probe(theta, n_max: int = 8, eps: float = 1e-12, floor: float = 1e-3) -> ExperimentReport:
    """Track |r(t_n)| at t_n = pi theta^n to separate Pisot from non-Pisot theta > 2."""
    scheme, th = _probe_scheme(theta)
    if not th > 2:
        raise RegimeMismatchError(f"probe needs theta > 2, got {th}")
    values, r_pi = probe_values(theta, n_max, eps)
    # independent cross-check by direct evaluation where pi theta^n is representable
    direct_dev = 0.0
    for n, v in enumerate(values):
        t = math.pi * th**n
        if t > 1e12:
            break
        direct_dev = max(direct_dev, abs(abs(limit_with_depth(scheme, t, eps).value) - v))
    slope = _ols_slope(values)
    low = min(values)
    if low >= floor:
        outcome = "coherence_conserving"
    elif slope < 0 and values[-1] < values[0]:
        outcome = "decoherence_compatible"
    else:
        outcome = "undetermined"
    pisot = _is_pisot(theta)
    if pisot is None or outcome == "undetermined":
        verdict = INCONCLUSIVE
    elif (outcome == "coherence_conserving") == pisot:
        verdict = CONFIRMED
    else:
        verdict = REFUTED
    rows = [(n, math.pi * th**n, v) for n, v in enumerate(values)]
    return ExperimentReport(
        "probe",
        {"theta": _theta_param(theta), "n_max": n_max, "eps": eps, "floor": floor},
        {
            "r_pi": r_pi.value,
            "min_abs_r": low,
            "max_identity_deviation": max(abs(v - values[0]) for v in values),
            "direct_max_deviation": direct_dev,
            "trend_slope": slope,
        },
        verdict,
        {"outcome": outcome, "is_pisot": "unknown" if pisot is None else str(pisot).lower()},
        ("n", "t", "abs_r"),
        rows,
    )


def _theta_param(theta):
    if isinstance(theta, AlgebraicInteger):
        return {"poly": list(theta.coeffs), "root": theta.root}
    th = Fraction(theta)
    return th.numerator if th.denominator == 1 else f"{th.numerator}/{th.denominator}"


# -- rational ratios ------------------------------------------------------------


@dataclass(frozen=True)
class DecayExponent:
    """Exponent of the log-slow decay bound, as printed and with log p, log q swapped."""

    gamma: float
    gamma_alt: float

    @property
    def positive(self) -> bool:
        return self.gamma > 0

    def __float__(self):
        return self.gamma


def rational_decay_exponent(p: int, q: int) -> DecayExponent:
    """gamma = -log cos(pi/(2p)) / log(2 log q / log p), evaluated literally.

    The literal formula is negative whenever q^2 < p; ``gamma_alt`` uses the
    denominator log(2 log p / log q) instead. Neither is preferred here.
    """
    if p == 1:
        raise InvalidParameterError("p must not be 1")
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise InvalidParameterError(f"need coprime positive p, q; got {p}, {q}")
    num = -math.log(math.cos(math.pi / (2 * p)))
    if q == 1:
        # log q = 0: the denominators diverge
        return DecayExponent(0.0, 0.0)
    lp, lq = math.log(p), math.log(q)
    return DecayExponent(num / math.log(2 * lq / lp), num / math.log(2 * lp / lq))


def _kronecker(n: int) -> np.ndarray:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    return np.mod(np.arange(1, n + 1) * g, 1.0)


def window_maximum(scheme: CouplingScheme, lo: float, hi: float, samples: int, eps: float, refine: int = 8) -> float:
    """max |r(t)| on [lo, hi]: low-discrepancy sampling, then local refinement of the best points."""
    t = lo + (hi - lo) * _kronecker(samples)
    vals = limit_abs_many(scheme, t, eps)
    best = float(vals.max())
    h = (hi - lo) / samples
    for i in np.argsort(-vals, kind="stable")[:refine]:
        a, b = max(lo, t[i] - h), min(hi, t[i] + h)
        res = minimize_scalar(
            lambda s: -float(limit_abs_many(scheme, [s], eps)[0]),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-6 * max(1.0, abs(t[i]))},
        )
        best = max(best, -float(res.fun))
    return best


def rational_decay_experiment(
    p: int,
    q: int,
    window_exponents,
    samples_per_window: int = 2048,
    eps: float = 1e-9,
) -> ExperimentReport:
    """Per-window maxima of |r(t)| over t in [2^j, 2^(j+1)] for theta = p/q.

    Trend is "non-increasing" when the least-squares slope of M_j over the
    windows is <= 0 and the last maximum is at most 1.1 times the first.
    """
    if math.gcd(p, q) != 1 or q < 1:
        raise InvalidParameterError(f"need coprime p, q; got {p}, {q}")
    if not p > 2 * q:
        raise RegimeMismatchError(f"theta = {p}/{q} <= 2")
    scheme = CouplingScheme.rational_decaying(p, q)
    gam = rational_decay_exponent(p, q)
    windows = [int(j) for j in window_exponents]
    params = {
        "p": p,
        "q": q,
        "window_exponents": windows,
        "samples_per_window": samples_per_window,
        "eps": eps,
    }
    columns = ("window_lo", "window_hi", "max_abs_r", "normalized_envelope")
    scalars = {"gamma": gam.gamma, "gamma_alt": gam.gamma_alt}
    if not windows:
        return ExperimentReport("decay", params, scalars, INCONCLUSIVE, {"reason": "no windows"}, columns, [])

    maxima, rows = [], []
    for j in windows:
        lo, hi = 2.0**j, 2.0 ** (j + 1)
        m = window_maximum(scheme, lo, hi, samples_per_window, eps)
        L = j * LOG2
        norm = m * L**gam.gamma if L > 0 else math.nan
        maxima.append(m)
        rows.append((lo, hi, m, norm))
    slope = _ols_slope(maxima)
    trend = slope <= 0 and maxima[-1] <= 1.1 * maxima[0]
    norms = np.array([r[3] for r in rows])
    med = float(np.median(norms))
    ratio = float(norms.max() / med) if med > 0 else math.inf
    alt = np.array([m * (j * LOG2) ** gam.gamma_alt for m, j in zip(maxima, windows)])
    scalars.update(
        {
            "trend_slope": slope,
            "trend_nonincreasing": float(trend),
            "envelope_ratio": ratio,
            "envelope_ratio_alt": float(alt.max() / np.median(alt)),
            "max_abs_r_first": maxima[0],
            "max_abs_r_last": maxima[-1],
        }
    )
    labels = {}
    if q == 1:
        labels["regime"] = "coherence_conservation"
        verdict = INCONCLUSIVE
    elif not gam.positive:
        labels["reason"] = "gamma_nonpositive"
        verdict = INCONCLUSIVE
    else:
        verdict = CONFIRMED if trend and ratio <= 3 else REFUTED
    return ExperimentReport("decay", params, scalars, verdict, labels, columns, rows)


# -- growing couplings ----------------------------------------------------------


def _fixed_point(x0, bits: int) -> int:
    if isinstance(x0, mpmath.mpf):
        return int(mpmath.floor(mpmath.ldexp(x0, bits)))
    fx = Fraction(x0)
    return math.floor(fx * (1 << bits))


def required_bits(theta: float, n: int, guard_bits: int) -> int:
    return math.ceil(n * math.log2(theta)) + guard_bits


def high_precision_fractional_orbit(theta: int, x0, n: int, guard_bits: int = 64, precision_bits: int | None = None) -> list[float]:
    """x_0..x_{n-1} of x_{k+1} = frac(theta x_k), iterated in exact fixed point.

    ``x0`` may be a float, Fraction or mpf; it is truncated to the working
    precision once, after which every step is exact integer arithmetic.
    """
    if isinstance(theta, bool) or int(theta) != theta or theta < 2:
        raise InvalidParameterError(f"theta must be an integer >= 2, got {theta}")
    theta = int(theta)
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not 0 <= x0 < 1:
        raise InvalidParameterError(f"x0 must lie in [0, 1), got {x0}")
    need = required_bits(theta, n, guard_bits)
    bits = need if precision_bits is None else precision_bits
    if bits < need:
        raise PrecisionExceededError(f"{bits} working bits < required {need}")
    one = 1 << bits
    X = _fixed_point(x0, bits)
    out = []
    for _ in range(n):
        out.append(X / one)
        X = X * theta % one
    return out


def scaled_orbit(scheme: CouplingScheme, t: float, n: int, guard_bits: int = 64) -> np.ndarray:
    """frac(e_k t / pi) for k = 1..n, with certified precision for geometric growth."""
    if scheme.kind != "geometric_growing":
        return np.mod(coupling_values(scheme, n) * t / math.pi, 1.0)

    def run(gb):
        theta = scheme.params[0]
        bits = required_bits(float(theta), n, gb) + 16
        with mpmath.workprec(bits):
            c = mpmath.mpf(t) / mpmath.pi
            if float(theta).is_integer():
                y = mpmath.frac(c * int(theta))
                return high_precision_fractional_orbit(int(theta), y, n, gb)
            th = mpmath.mpf(theta)
            out, x = [], c
            for _ in range(n):
                x *= th
                out.append(float(mpmath.frac(x)))
            return out

    a, b = run(guard_bits), run(guard_bits + 64)
    if a != b:
        raise PrecisionExceededError("orbit not reproducible with 64 more guard bits")
    return np.array(a)


def lyapunov_terms(scheme: CouplingScheme, n: int, t: float, guard_bits: int = 64) -> np.ndarray:
    """log|cos(e_k t)| for k = 1..n (-inf for an exact zero factor)."""
    if scheme.kind == "geometric_growing":
        x = scaled_orbit(scheme, t, n, guard_bits)
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(np.cos(np.pi * x)))
        out[x == 0.5] = -np.inf
        return out
    args = coupling_values(scheme, n) * t
    c = np.cos(args)
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(c))
    out[np.abs(c) <= np.spacing(np.abs(args))] = -np.inf
    return out


def lyapunov_average(scheme: CouplingScheme, n: int, t: float, guard_bits: int = 64) -> float:
    """(1/n) log|r_n(t)|; tends to -log 2 for couplings with Weyl growth."""
    if t == 0:
        raise InvalidParameterError("t must be nonzero")
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if scheme.kind != "geometric_growing":
        return log_decoherence_factor(scheme, n, t)[0] / n
    terms = lyapunov_terms(scheme, n, t, guard_bits)
    if np.isneginf(terms).any():
        return -math.inf
    return math.fsum(terms) / n


def _checkpoints(n: int, count: int = 200) -> list[int]:
    pts = np.unique(np.round(np.geomspace(1, n, count)).astype(int))
    return [int(k) for k in pts]


def lyapunov_experiment(scheme: CouplingScheme, n: int, t: float, tolerance: float = 0.05, guard_bits: int = 64) -> ExperimentReport:
    avg = lyapunov_average(scheme, n, t, guard_bits)
    terms = lyapunov_terms(scheme, n, t, guard_bits)
    cum = np.cumsum(terms)
    rows = [(k, float(cum[k - 1] / k)) for k in _checkpoints(n)]
    dev = abs(avg + LOG2)
    return ExperimentReport(
        "lyapunov",
        {"scheme": scheme.to_text(), "n": n, "t": t, "tolerance": tolerance, "guard_bits": guard_bits},
        {"average": avg, "target": -LOG2, "abs_deviation": dev},
        CONFIRMED if dev <= tolerance else REFUTED,
        {},
        ("n", "running_average"),
        rows,
    )


def star_discrepancy(x) -> float:
    """D*_n of points in [0, 1) by the sorted-sample formula."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise InvalidParameterError("need at least one point")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - xs), np.max(xs - (i - 1) / n)))


def equidistribution_discrepancy(scheme: CouplingScheme, t: float, n: int, guard_bits: int = 64) -> float:
    """Star discrepancy of {e_k t / pi mod 1}, k = 1..n."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return star_discrepancy(scaled_orbit(scheme, t, n, guard_bits))


def discrepancy_experiment(scheme: CouplingScheme, t: float, n: int, tolerance: float = 0.05, guard_bits: int = 64) -> ExperimentReport:
    x = scaled_orbit(scheme, t, n, guard_bits)
    rows = [(k, star_discrepancy(x[:k])) for k in _checkpoints(n, 100)]
    d = rows[-1][1]
    return ExperimentReport(
        "discrepancy",
        {"scheme": scheme.to_text(), "t": t, "n": n, "tolerance": tolerance, "guard_bits": guard_bits},
        {"d_star": d},
        CONFIRMED if d <= tolerance else REFUTED,
        {},
        ("n", "d_star"),
        rows,
    )


# -- dispatch -------------------------------------------------------------------


def _weyl_prefix_passes(scheme: CouplingScheme) -> bool:
    e1 = coupling_values(scheme, 1)[0]
    if scheme.kind == "geometric_growing":
        N = min(200, int(700 / math.log(scheme.theta)))
    else:
        N = 200
    if N < 3:
        return False
    return weyl_growth_check(scheme, N, eps=0.1, delta=e1 / 2).passes


def classify_regime(scheme: CouplingScheme, certificate: AlgebraicInteger | None = None) -> str:
    """Which decoherence regime the scheme is a candidate for.

    ``certificate`` may carry the minimal polynomial of a non-integer
    geometric ratio so that a Pisot verdict can be used.
    """
    divergent = math.isinf(energy_norm_limit(scheme))
    if divergent and scheme.is_bounded:
        return GAUSSIAN
    if scheme.kind in ("geometric_decaying", "rational_decaying"):
        theta = scheme.theta
        if not theta > 2:
            return UNKNOWN
        if scheme.kind == "rational_decaying" and scheme.params[1] > 1:
            return SLOW
        if float(theta).is_integer():
            return CONSERVING
        if certificate is not None and abs(certificate.root - theta) <= 1e-12 * theta:
            try:
                if classify_pisot(certificate).is_pisot:
                    return CONSERVING
            except VerdictWithheldError:
                pass
        return UNKNOWN
    if scheme.kind in ("linear", "geometric_growing") and _weyl_prefix_passes(scheme):
        return FROZEN
    return UNKNOWN
