"""Decoherence factor r_N(t) = prod_k cos(e_k t) and derived quantities.

Products are carried as (log|r|, sign) so that N ~ 1e6 factors do not
underflow. A factor is treated as an exact zero when cos(e_k t) is within
one ulp of the argument e_k t, i.e. e_k t is an odd multiple of pi/2 to
floating precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .couplings import CouplingScheme, coupling_value, coupling_values, energy_norm_limit
from .errors import InvalidParameterError, SizeLimitError, UnsupportedSchemeError

LIMIT = "limit"
MAX_ORACLE_N = 24
# x <= this keeps -log cos x <= x^2/2 + x^4
TAIL_ARG_MAX = 1.2


def _log_cos_terms(args: np.ndarray):
    c = np.cos(args)
    zero = np.abs(c) <= np.spacing(np.abs(args))
    return c, zero


def _log_product(c: np.ndarray, zero: np.ndarray) -> tuple[float, int]:
    if zero.any():
        return -math.inf, 0
    sign = -1 if np.count_nonzero(c < 0) % 2 else 1
    return math.fsum(np.log(np.abs(c))), sign


def log_decoherence_factor(scheme: CouplingScheme, N: int, t: float) -> tuple[float, int]:
    """Return ``(log|r_N(t)|, sign r_N(t))``; the zero sentinel is ``(-inf, 0)``."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if not math.isfinite(t):
        raise InvalidParameterError("t must be finite")
    if t == 0:
        return 0.0, 1
    c, zero = _log_cos_terms(coupling_values(scheme, N) * t)
    return _log_product(c, zero)


def _to_value(log_abs: float, sign: int) -> float:
    if sign == 0:
        return 0.0
    return sign * math.exp(log_abs)


def decoherence_factor(scheme: CouplingScheme, N: int, t: float) -> float:
    """r_N(t) as a float; exactly 0 on the zero sentinel."""
    return _to_value(*log_decoherence_factor(scheme, N, t))


def _decaying_tail_bound(scheme: CouplingScheme, N: int, t: float) -> float:
    """Upper bound on sum_{k>N} -log cos(e_k t), valid once e_{N+1}|t| <= 1.2."""
    x = abs(t)
    if scheme.kind == "explicit":
        return 0.0
    theta = scheme.theta
    # sum_{k>N} (x theta^-k)^2 / 2 + (x theta^-k)^4
    s2 = x * x * theta ** (-2 * N) / (theta * theta - 1)
    s4 = x**4 * theta ** (-4 * N) / (theta**4 - 1)
    return s2 / 2 + s4


def _first_safe_depth(scheme: CouplingScheme, t: float) -> int:
    """Minimal N0 with e_k |t| <= 1.2 for every k > N0."""
    x = abs(t)
    if x == 0:
        return 0
    if scheme.kind == "explicit":
        return len(scheme.params)
    n0 = max(0, math.ceil(math.log(x / TAIL_ARG_MAX) / math.log(scheme.theta)))
    # guard against rounding in the logarithms
    while n0 > 0 and coupling_value(scheme, n0) * x <= TAIL_ARG_MAX:
        n0 -= 1
    while coupling_value(scheme, n0 + 1) * x > TAIL_ARG_MAX:
        n0 += 1
    return n0


@dataclass(frozen=True)
class LimitValue:
    value: float
    log_abs: float
    sign: int
    depth: int
    tail_bound: float


def limit_with_depth(scheme: CouplingScheme, t: float, eps: float) -> LimitValue:
    """Infinite-bath r(t) with the truncation depth that certifies ``eps``.

    Past N0 every factor is positive and -log cos x <= x^2/2 + x^4, so with
    T_N the analytic tail sum, r = r_N exp(-s) for some 0 <= s <= T_N and
    |r - r_N| <= |r_N| T_N. The depth is the first N >= N0 with
    |r_N| T_N <= eps.
    """
    if eps <= 0:
        raise InvalidParameterError("eps must be positive")
    if not math.isfinite(t):
        raise InvalidParameterError("t must be finite")
    if scheme.kind != "explicit" and math.isinf(energy_norm_limit(scheme)):
        raise UnsupportedSchemeError(f"{scheme} has divergent D_N; r(t) has no infinite-bath limit")
    if t == 0:
        return LimitValue(1.0, 0.0, 1, 0, 0.0)
    if scheme.kind == "explicit":
        n = len(scheme.params)
        la, sg = log_decoherence_factor(scheme, n, t)
        return LimitValue(_to_value(la, sg), la, sg, n, 0.0)

    N = max(1, _first_safe_depth(scheme, t))
    e = coupling_values(scheme, N)
    c, zero = _log_cos_terms(e * t)
    if zero.any():
        return LimitValue(0.0, -math.inf, 0, N, 0.0)
    log_abs = math.fsum(np.log(np.abs(c)))
    while True:
        tail = _decaying_tail_bound(scheme, N, t)
        if math.exp(log_abs) * tail <= eps:
            break
        N += 1
        # factors past N0 are in (0, 1]
        log_abs = math.fsum([log_abs, math.log(math.cos(coupling_value(scheme, N) * t))])
    la, sg = log_decoherence_factor(scheme, N, t)
    return LimitValue(_to_value(la, sg), la, sg, N, tail)


def decoherence_factor_limit(scheme: CouplingScheme, t: float, eps: float = 1e-12) -> float:
    """r(t) = lim_N r_N(t) to absolute accuracy ``eps``."""
    return limit_with_depth(scheme, t, eps).value


def limit_abs_many(scheme: CouplingScheme, times, eps: float) -> np.ndarray:
    """|r(t)| for an array of times with one shared, worst-case depth.

    The depth satisfies T_N <= eps at max|t|, which bounds the error
    independently of |r_N|.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return np.empty(0)
    if scheme.kind != "explicit" and not scheme.is_decaying:
        raise UnsupportedSchemeError(f"{scheme} has divergent D_N; r(t) has no infinite-bath limit")
    tmax = float(np.max(np.abs(times)))
    if scheme.kind == "explicit":
        N = len(scheme.params)
    else:
        N = max(1, _first_safe_depth(scheme, tmax))
        while _decaying_tail_bound(scheme, N, tmax) > eps:
            N += 1
    e = coupling_values(scheme, N)
    out = np.ones_like(times)
    for ek in e:
        out *= np.abs(np.cos(ek * times))
    return out


def eigenvalue_sum_factor(scheme: CouplingScheme, N: int, t: float) -> float:
    """Brute-force r_N(t) = 2^-N sum_alpha exp(-i E_alpha t) over all 2^N energies."""
    if N > MAX_ORACLE_N:
        raise SizeLimitError(f"N={N} exceeds the 2^{MAX_ORACLE_N} enumeration limit")
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    energies = bath_energies(coupling_values(scheme, N))
    phase = energies * t
    re = float(np.mean(np.cos(phase)))
    im = -float(np.mean(np.sin(phase)))
    if abs(im) > 1e-10:
        raise ArithmeticError(f"imaginary part {im:.3e} of the eigenvalue sum did not cancel")
    return re


def bath_energies(e: np.ndarray) -> np.ndarray:
    """All 2^N values sum_k x_k e_k, x in {-1, +1}^N (unsorted, exactly sign-symmetric)."""
    energies = np.zeros(1)
    for ek in e:
        energies = np.concatenate((energies + ek, energies - ek))
    return energies


@dataclass(frozen=True)
class ReducedState:
    """Central-qubit state (1/2)[[1, r], [r, 1]]."""

    r: float
    matrix: np.ndarray = field(compare=False, repr=False)
    coherence: float
    purity: float

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return (1 - self.r) / 2, (1 + self.r) / 2


def reduced_state(r: float) -> ReducedState:
    m = np.array([[0.5, r / 2], [r / 2, 0.5]])
    return ReducedState(r=r, matrix=m, coherence=abs(r) / 2, purity=(1 + r * r) / 2)


def reduced_density_matrix(scheme: CouplingScheme, N: int, t: float) -> ReducedState:
    return reduced_state(decoherence_factor(scheme, N, t))


@dataclass
class DecoherenceTrace:
    times: list
    signs: list
    log_magnitudes: list
    values: list
    scheme: CouplingScheme
    N: int | str

    def rows(self):
        return zip(self.times, self.values, self.log_magnitudes, self.signs)


def sample_trace(scheme: CouplingScheme, N, times, eps: float = 1e-12) -> DecoherenceTrace:
    """Evaluate r_N (or r when ``N == "limit"``) at each grid point independently."""
    signs, logs, values = [], [], []
    for t in times:
        t = float(t)
        if N == LIMIT:
            lv = limit_with_depth(scheme, t, eps)
            la, sg, v = lv.log_abs, lv.sign, lv.value
        else:
            la, sg = log_decoherence_factor(scheme, N, t)
            v = _to_value(la, sg)
        signs.append(sg)
        logs.append(la)
        values.append(v)
    return DecoherenceTrace([float(t) for t in times], signs, logs, values, scheme, N)
