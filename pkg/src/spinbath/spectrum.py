"""Finite bath spectra, the centered Cantor model and box-counting dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .couplings import CouplingScheme, coupling_values
from .decoherence import MAX_ORACLE_N, bath_energies
from .errors import DegenerateFitError, InvalidParameterError, SizeLimitError, UnsupportedSchemeError

MERGE_RTOL = 1e-12
MAX_CANTOR_DEPTH = 30


@dataclass
class SpectrumSample:
    energies: np.ndarray
    multiplicities: np.ndarray
    N: int

    def __len__(self):
        return len(self.energies)


def enumerate_spectrum(scheme: CouplingScheme, N: int) -> SpectrumSample:
    """Distinct eigenvalues sum_k +-e_k of the N-spin bath with their multiplicities.

    Values closer than 1e-12 relative to the spectral radius are merged;
    the representative of a cluster is the midpoint of its extremes, which
    keeps the merged set exactly symmetric about 0.
    """
    if N > MAX_ORACLE_N:
        raise SizeLimitError(f"N={N} exceeds the 2^{MAX_ORACLE_N} enumeration limit")
    if N < 1:
        raise InvalidParameterError(f"N must be >= 1, got {N}")
    e = coupling_values(scheme, N)
    E = np.sort(bath_energies(e))
    tol = MERGE_RTOL * float(np.max(np.abs(E)))
    breaks = np.flatnonzero(np.diff(E) > tol) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [E.size]))
    reps = (E[starts] + E[ends - 1]) / 2
    return SpectrumSample(reps, (ends - starts).astype(np.int64), N)


def tail_sum(scheme: CouplingScheme, n: int) -> float:
    """sum_{k>n} e_k for a convergent scheme (remaining entries for explicit ones)."""
    if scheme.kind == "explicit":
        return math.fsum(scheme.params[n:])
    if not scheme.is_decaying:
        return math.inf
    theta = scheme.theta
    return theta ** (-n) / (theta - 1)


@dataclass(frozen=True)
class EnergyInterval:
    center: float
    radius: float

    @property
    def lo(self):
        return self.center - self.radius

    @property
    def hi(self):
        return self.center + self.radius

    def __contains__(self, x):
        return self.lo <= x <= self.hi


def bath_energy(sign_prefix, scheme: CouplingScheme, infinite: bool = True) -> EnergyInterval:
    """F(x) = sum_k e_k x_k from a finite sign prefix, as a certified interval.

    With ``infinite`` the unknown signs beyond the prefix contribute
    [-tail, +tail]; otherwise the prefix is taken as the whole configuration.
    """
    x = np.asarray(sign_prefix, dtype=np.float64)
    if x.size and not np.all(np.abs(x) == 1):
        raise InvalidParameterError("signs must be +1 or -1")
    n = x.size
    if scheme.length is not None and n > scheme.length:
        raise InvalidParameterError(f"prefix of length {n} exceeds the {scheme.length} couplings")
    if infinite and scheme.kind != "explicit" and not scheme.is_decaying:
        raise UnsupportedSchemeError(f"{scheme} has a divergent energy series")
    center = math.fsum(coupling_values(scheme, n) * x)
    return EnergyInterval(center, tail_sum(scheme, n) if infinite else 0.0)


@dataclass
class CantorModel:
    theta: float
    depth: int
    lo: np.ndarray
    hi: np.ndarray

    @property
    def intervals(self):
        return list(zip(self.lo.tolist(), self.hi.tolist()))

    @property
    def hull(self):
        h = 1.0 / (self.theta - 1.0)
        return -h, h

    @property
    def interval_length(self):
        return 2.0 / (self.theta - 1.0) * self.theta ** (-self.depth)

    def midpoints(self):
        return (self.lo + self.hi) / 2


def _check_theta(theta):
    if not theta > 2:
        raise InvalidParameterError(f"centered Cantor spectrum needs theta > 2, got {theta}")


def cantor_intervals(theta: float, depth: int) -> CantorModel:
    """Level-``depth`` intervals of the (1 - 2/theta)-centered Cantor set."""
    _check_theta(theta)
    if not 0 <= depth <= MAX_CANTOR_DEPTH:
        raise InvalidParameterError(f"depth must be in [0, {MAX_CANTOR_DEPTH}], got {depth}")
    h = 1.0 / (theta - 1.0)
    lo, hi = np.array([-h]), np.array([h])
    for _ in range(depth):
        child = (hi - lo) / theta
        lo, hi = (
            np.stack((lo, hi - child), axis=1).ravel(),
            np.stack((lo + child, hi), axis=1).ravel(),
        )
    return CantorModel(float(theta), depth, lo, hi)


@dataclass(frozen=True)
class CantorCheck:
    contained: bool
    violation: float | None = None

    def __bool__(self):
        return self.contained


def spectrum_in_cantor_check(theta: float, N: int, depth: int) -> CantorCheck:
    """Every level-N energy, fattened by the tail radius, lies in a depth-``depth`` interval."""
    _check_theta(theta)
    if not 1 <= N <= 20:
        raise InvalidParameterError(f"N must be in [1, 20], got {N}")
    if not 0 <= depth <= N:
        raise InvalidParameterError(f"depth must be in [0, N], got {depth}")
    scheme = CouplingScheme.geometric_decaying(theta)
    E = enumerate_spectrum(scheme, N).energies
    radius = tail_sum(scheme, N)
    model = cantor_intervals(theta, depth)
    # fattened level-N energies coincide with level-N intervals; allow rounding slack
    slack = 1e-12 / (theta - 1)
    i = np.searchsorted(model.lo, E - radius + slack, side="right") - 1
    i = np.clip(i, 0, model.lo.size - 1)
    ok = (model.lo[i] - slack <= E - radius) & (E + radius <= model.hi[i] + slack)
    if ok.all():
        return CantorCheck(True)
    return CantorCheck(False, float(E[np.flatnonzero(~ok)[0]]))


def natural_scales(theta: float, j_min: int, j_max: int, span: float | None = None) -> np.ndarray:
    """Box sides span * theta^-j for j = j_min..j_max (span defaults to the hull width)."""
    if span is None:
        span = 2.0 / (theta - 1.0)
    return span * float(theta) ** -np.arange(j_min, j_max + 1, dtype=np.float64)


@dataclass(frozen=True)
class BoxCountFit:
    estimate: float
    counts: tuple
    residual: float

    def __iter__(self):
        return iter((self.estimate, list(self.counts), self.residual))


BOX_SNAP = 1e-9


def box_count(points: np.ndarray, delta: float, anchor: float, span: float | None = None) -> int:
    """Occupied boxes [anchor + i delta, anchor + (i+1) delta).

    Coordinates within BOX_SNAP box widths of an edge are snapped onto it,
    and the last box is closed so the hull maximum does not open a new box.
    """
    u = (points - anchor) / delta
    near = np.rint(u)
    u = np.where(np.abs(u - near) <= BOX_SNAP, near, u)
    idx = np.floor(u)
    if span is not None:
        n_boxes = max(1, math.ceil(span / delta - BOX_SNAP))
        idx = np.clip(idx, 0, n_boxes - 1)
    return int(np.unique(idx).size)


def box_counting_dimension(points, scales, anchor: float | None = None, hull_max: float | None = None) -> BoxCountFit:
    """Least-squares slope of log N(delta) against log(1/delta).

    Boxes tile the hull [anchor, hull_max], by default [min(points), max(points)].
    Returns (estimate, counts, residual) where residual is the root of the
    summed squared fit residuals.
    """
    pts = np.asarray(points, dtype=np.float64)
    sc = np.asarray(scales, dtype=np.float64)
    if pts.size == 0:
        raise InvalidParameterError("points must be nonempty")
    if sc.size < 2 or np.any(sc <= 0):
        raise InvalidParameterError("need at least two positive scales")
    if anchor is None:
        anchor = float(pts.min())
    if hull_max is None:
        hull_max = float(pts.max())
    counts = [box_count(pts, d, anchor, hull_max - anchor) for d in sc]
    if len(set(counts)) == 1:
        raise DegenerateFitError(f"all box counts equal ({counts[0]}); slope undefined")
    x = np.log(1.0 / sc)
    y = np.log(np.asarray(counts, dtype=np.float64))
    A = np.vstack((x, np.ones_like(x))).T
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    resid = y - A @ coef
    slope = coef[0]
    return BoxCountFit(float(slope), tuple(counts), float(math.sqrt(np.sum(resid**2))))
