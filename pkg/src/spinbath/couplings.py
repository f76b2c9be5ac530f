"""Coupling sequences e_k, energy norms D_N and the Weyl growth check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EnergyOverflowError, InvalidParameterError

KINDS = (
    "constant",
    "geometric_decaying",
    "rational_decaying",
    "geometric_growing",
    "linear",
    "explicit",
)

# grammar prefix used by the CLI and config files
_SHORT = {
    "constant": "constant",
    "geometric_decaying": "geomdec",
    "rational_decaying": "ratdec",
    "geometric_growing": "geomgrow",
    "linear": "linear",
    "explicit": "explicit",
}
_LONG = {v: k for k, v in _SHORT.items()}


@dataclass(frozen=True)
class CouplingScheme:
    """Immutable description of a coupling sequence.

    ``params`` holds the kind-specific parameters:

    * ``constant``           -> (c,)
    * ``geometric_decaying`` -> (theta,),  e_k = theta**-k
    * ``rational_decaying``  -> (p, q),    e_k = (q/p)**k
    * ``geometric_growing``  -> (theta,),  e_k = theta**k
    * ``linear``             -> (a,),      e_k = a*k
    * ``explicit``           -> (e_1, ..., e_L)
    """

    kind: str
    params: tuple

    def __post_init__(self):
        _validate(self.kind, self.params)

    @classmethod
    def constant(cls, c: float = 1.0) -> CouplingScheme:
        return cls("constant", (c,))

    @classmethod
    def geometric_decaying(cls, theta: float) -> CouplingScheme:
        return cls("geometric_decaying", (theta,))

    @classmethod
    def rational_decaying(cls, p: int, q: int) -> CouplingScheme:
        return cls("rational_decaying", (p, q))

    @classmethod
    def geometric_growing(cls, theta: float) -> CouplingScheme:
        return cls("geometric_growing", (theta,))

    @classmethod
    def linear(cls, a: float = 1.0) -> CouplingScheme:
        return cls("linear", (a,))

    @classmethod
    def explicit(cls, values) -> CouplingScheme:
        return cls("explicit", tuple(values))

    @classmethod
    def parse(cls, text: str) -> CouplingScheme:
        """Parse the ``kind:args`` grammar, e.g. ``geomdec:3`` or ``ratdec:5/2``."""
        kind, sep, arg = text.strip().partition(":")
        if not sep or kind not in _LONG:
            raise InvalidParameterError(f"cannot parse scheme {text!r}")
        kind = _LONG[kind]
        try:
            if kind == "rational_decaying":
                p, slash, q = arg.partition("/")
                if not slash:
                    raise ValueError(arg)
                return cls(kind, (int(p), int(q)))
            if kind == "explicit":
                return cls(kind, tuple(_number(v) for v in arg.split(",")))
            return cls(kind, (_number(arg),))
        except ValueError as exc:
            if isinstance(exc, InvalidParameterError):
                raise
            raise InvalidParameterError(f"cannot parse scheme {text!r}") from None

    def to_text(self) -> str:
        """Inverse of :meth:`parse`."""
        if self.kind == "rational_decaying":
            arg = f"{self.params[0]}/{self.params[1]}"
        else:
            arg = ",".join(_render(v) for v in self.params)
        return f"{_SHORT[self.kind]}:{arg}"

    @property
    def theta(self) -> float | None:
        """Ratio of consecutive couplings for the geometric kinds."""
        if self.kind in ("geometric_decaying", "geometric_growing"):
            return float(self.params[0])
        if self.kind == "rational_decaying":
            return self.params[0] / self.params[1]
        return None

    @property
    def length(self) -> int | None:
        """Number of couplings for explicit schemes, ``None`` for infinite ones."""
        return len(self.params) if self.kind == "explicit" else None

    @property
    def is_decaying(self) -> bool:
        return self.kind in ("geometric_decaying", "rational_decaying")

    @property
    def is_bounded(self) -> bool:
        return self.kind in ("constant", "geometric_decaying", "rational_decaying", "explicit")

    def __str__(self):
        return self.to_text()


def _number(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return float(text)


def _render(v) -> str:
    if isinstance(v, int):
        return str(v)
    if float(v).is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(float(v))


def _positive_real(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float, Fraction, np.floating, np.integer)):
        raise InvalidParameterError(f"{name} must be a real number, got {v!r}")
    if not math.isfinite(v) or v <= 0:
        raise InvalidParameterError(f"{name} must be finite and positive, got {v!r}")


def _validate(kind, params):
    if kind not in KINDS:
        raise InvalidParameterError(f"unknown scheme kind {kind!r}")
    if kind == "explicit":
        if len(params) == 0:
            raise InvalidParameterError("explicit scheme needs at least one coupling")
        for i, v in enumerate(params, 1):
            _positive_real(v, f"e_{i}")
        return
    if kind == "rational_decaying":
        if len(params) != 2:
            raise InvalidParameterError("rational_decaying takes (p, q)")
        p, q = params
        if not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in (p, q)):
            raise InvalidParameterError("rational_decaying needs integer p and q")
        if not p > q >= 1:
            raise InvalidParameterError(f"rational_decaying needs p > q >= 1, got p={p}, q={q}")
        if math.gcd(p, q) != 1:
            raise InvalidParameterError(f"p={p} and q={q} are not coprime")
        return
    if len(params) != 1:
        raise InvalidParameterError(f"{kind} takes exactly one parameter")
    _positive_real(params[0], "parameter")
    if kind in ("geometric_decaying", "geometric_growing") and not params[0] > 1:
        raise InvalidParameterError(f"{kind} needs theta > 1, got {params[0]}")


def coupling_value(scheme: CouplingScheme, k: int) -> float:
    """Return e_k (1-based)."""
    if k < 1:
        raise InvalidParameterError(f"coupling index must be >= 1, got {k}")
    kind, par = scheme.kind, scheme.params
    if kind == "constant":
        return float(par[0])
    if kind == "geometric_decaying":
        return float(par[0]) ** -k
    if kind == "rational_decaying":
        p, q = par
        # one rounding from the exact rational
        return float(Fraction(q**k, p**k))
    if kind == "geometric_growing":
        try:
            return float(par[0]) ** k
        except OverflowError:
            raise EnergyOverflowError(f"e_{k} = {par[0]}**{k} overflows") from None
    if kind == "linear":
        return float(par[0]) * k
    if k > len(par):
        raise IndexError(f"explicit scheme has {len(par)} couplings, asked for e_{k}")
    return float(par[k - 1])


def coupling_values(scheme: CouplingScheme, n: int) -> np.ndarray:
    """Vector of e_1..e_n as float64 (same values as :func:`coupling_value`)."""
    if n < 0:
        raise InvalidParameterError("n must be nonnegative")
    k = np.arange(1, n + 1, dtype=np.float64)
    kind, par = scheme.kind, scheme.params
    if kind == "constant":
        return np.full(n, float(par[0]))
    if kind == "linear":
        return float(par[0]) * k
    if kind == "explicit":
        if n > len(par):
            raise IndexError(f"explicit scheme has {len(par)} couplings, asked for {n}")
        return np.asarray(par[:n], dtype=np.float64)
    if kind == "geometric_growing":
        with np.errstate(over="raise"):
            try:
                return np.array([float(par[0]) ** j for j in range(1, n + 1)])
            except OverflowError:
                raise EnergyOverflowError(f"{scheme} overflows before k={n}") from None
    return np.array([coupling_value(scheme, j) for j in range(1, n + 1)])


def partial_energy_norm(scheme: CouplingScheme, N: int) -> float:
    """D_N = sqrt(sum_{k<=N} e_k^2), summed in ascending magnitude."""
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    if scheme.kind == "constant":
        return abs(float(scheme.params[0])) * math.sqrt(N)
    e = coupling_values(scheme, N)
    with np.errstate(over="ignore"):
        sq = np.sort(e * e)
    total = math.fsum(sq)
    if not math.isfinite(total):
        raise EnergyOverflowError(f"sum of e_k^2 overflows for {scheme} at N={N}")
    return math.sqrt(total)


def energy_norm_limit(scheme: CouplingScheme, tol: float = 1e-12) -> float:
    """Limit D of D_N, or ``math.inf`` when the series diverges."""
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    if scheme.kind == "explicit":
        return partial_energy_norm(scheme, len(scheme.params))
    if not scheme.is_decaying:
        return math.inf
    theta = scheme.theta
    # D^2 = D_N^2 + theta^{-2N}/(theta^2-1); stop once the tail is below tol^2
    t2 = theta * theta
    N = 1
    while theta ** (-2 * N) / (t2 - 1) > tol * tol and N < 2000:
        N += 1
    tail = theta ** (-2 * N) / (t2 - 1)
    head = partial_energy_norm(scheme, N)
    return math.sqrt(head * head + tail)


@dataclass(frozen=True)
class WeylCheck:
    """Outcome of :func:`weyl_growth_check`; ``witness`` is the first failing (m, n)."""

    passes: bool
    N: int
    eps: float
    delta: float
    witness: tuple[int, int] | None = None

    def __bool__(self):
        return self.passes


def weyl_gap_threshold(n: int, eps: float) -> float:
    """n / (log n)^(1+eps), natural log."""
    return n / math.log(n) ** (1.0 + eps)


def weyl_growth_check(scheme: CouplingScheme, N: int, eps: float, delta: float) -> WeylCheck:
    """Check |e_n - e_m| > delta for every 1 <= m < n <= N with n - m > n/(log n)^(1+eps).

    This is a finite-prefix verifier; ``passes`` means "passes up to N".
    Pairs are scanned with n ascending, then m ascending.
    """
    if N < 3:
        raise InvalidParameterError("N must be >= 3")
    if eps <= 0 or delta <= 0:
        raise InvalidParameterError("eps and delta must be positive")
    e = coupling_values(scheme, N)
    for n in range(2, N + 1):
        thr = weyl_gap_threshold(n, eps)
        # m < n - thr
        m_max = math.ceil(n - thr) - 1
        if m_max < 1:
            continue
        bad = np.flatnonzero(np.abs(e[n - 1] - e[:m_max]) <= delta)
        if bad.size:
            return WeylCheck(False, N, eps, delta, (int(bad[0]) + 1, n))
    return WeylCheck(True, N, eps, delta)
