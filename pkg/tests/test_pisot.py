import math
from fractions import Fraction

import mpmath
import pytest
import sympy

from spinbath.errors import (
    NoDominantRootError,
    NonMonicError,
    RepeatedRootError,
    VerdictWithheldError,
)
from spinbath.pisot import (
    CERT_MARGIN,
    classify_pisot,
    distance_to_integers,
    has_repeated_root,
    isolate_dominant_root,
    power_sums,
)

# coefficient lists, constant term first
GOLDEN = [-1, -1, 1]
SILVER = [-1, -2, 1]
PLASTIC = [-1, -1, 0, 1]
SQRT2 = [-2, 0, 1]
THREE = [-3, 1]
LEHMER = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]


def companion_traces(coeffs, n_max):
    """tr(C^n) for the companion matrix, in exact integer arithmetic."""
    d = len(coeffs) - 1
    Cm = sympy.zeros(d, d)
    for i in range(1, d):
        Cm[i, i - 1] = 1
    for i in range(d):
        Cm[i, d - 1] = -coeffs[i]
    out, P = [], sympy.eye(d)
    for _ in range(n_max + 1):
        out.append(int(P.trace()))
        P = P * Cm
    return out


def lucas(n_max):
    L = [2, 1]
    while len(L) <= n_max:
        L.append(L[-1] + L[-2])
    return L[: n_max + 1]


@pytest.mark.parametrize(
    "coeffs, expected",
    [(GOLDEN, True), (SILVER, True), (PLASTIC, True), (SQRT2, False), (THREE, True)],
)
def test_verdict_table(coeffs, expected):
    assert classify_pisot(isolate_dominant_root(coeffs)).is_pisot is expected


def test_dominant_roots():
    assert isolate_dominant_root(GOLDEN).root == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    assert isolate_dominant_root(SILVER).root == pytest.approx(1 + math.sqrt(2), abs=1e-15)
    assert isolate_dominant_root(SQRT2).root == pytest.approx(math.sqrt(2), abs=1e-15)
    plastic = isolate_dominant_root(PLASTIC)
    assert plastic.root == pytest.approx(1.324717957244746, abs=1e-14)
    assert max(abs(z) for z in plastic.conjugates) == pytest.approx(0.8688369618327, abs=1e-10)


def test_margin_reported():
    v = classify_pisot(isolate_dominant_root(GOLDEN))
    assert v.margin == pytest.approx(1 - (math.sqrt(5) - 1) / 2, abs=1e-14)
    assert v.error_bound <= 1e-20 or v.error_bound == CERT_MARGIN
    v = classify_pisot(isolate_dominant_root(SQRT2))
    assert v.margin == pytest.approx(1 - math.sqrt(2), abs=1e-14)


def test_salem_boundary_is_withheld():
    alg = isolate_dominant_root(LEHMER)
    assert alg.root == pytest.approx(1.17628081825991750, abs=1e-14)
    with pytest.raises(VerdictWithheldError) as info:
        classify_pisot(alg)
    assert abs(info.value.margin) < CERT_MARGIN


def test_polynomial_preconditions():
    with pytest.raises(NonMonicError):
        isolate_dominant_root([-1, -1, 2])
    with pytest.raises(NoDominantRootError):
        isolate_dominant_root([1, 0, 1])
    assert has_repeated_root([1, -2, 1])
    assert not has_repeated_root(GOLDEN)
    with pytest.raises(RepeatedRootError):
        isolate_dominant_root([9, -6, 1])


def test_power_sums_lucas():
    assert power_sums(GOLDEN, 50) == lucas(50)


@pytest.mark.parametrize("coeffs", [GOLDEN, SILVER, PLASTIC, SQRT2, THREE, LEHMER, [5, -3, 0, 2, 1]])
def test_power_sums_match_companion_trace(coeffs):
    assert power_sums(coeffs, 40) == companion_traces(coeffs, 40)


def test_silver_distances_decay_at_conjugate_rate():
    rep = distance_to_integers(isolate_dominant_root(SILVER), 30)
    assert rep.exact
    assert rep.decay_ratio == pytest.approx(math.sqrt(2) - 1, abs=1e-3)
    for n, d in enumerate(rep, start=1):
        assert d == pytest.approx((math.sqrt(2) - 1) ** n, rel=1e-12)


def test_non_pisot_distances_match_mpmath_oracle():
    alg = isolate_dominant_root(SQRT2)
    rep = distance_to_integers(alg, 20)
    assert not rep.exact
    with mpmath.workdps(60):
        r = mpmath.sqrt(2)
        want = [float(abs(r**n - mpmath.nint(r**n))) for n in range(1, 21)]
    assert rep.distances == pytest.approx(want, abs=1e-15)


def test_rational_and_integer_distances():
    assert list(distance_to_integers(3, 10)) == [0.0] * 10
    rep = distance_to_integers(Fraction(5, 2), 4)
    assert rep.distances == [0.5, 0.25, 0.375, 0.0625]
    assert rep.exact
