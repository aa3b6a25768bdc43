import json

import numpy as np
import pytest
from hypothesis import given, settings

import strategies as strat
from prefatt.attachment import (
    Affine,
    AffineTail,
    Constant,
    SublinearPower,
    TableRule,
    classify,
    rule_from_json,
    rule_to_json,
    validate,
)
from prefatt.errors import ParamOutOfRangeError


def test_eval_examples():
    assert Affine(0.5, 0.5)(3) == 2.0
    assert Constant(1.0)(10) == 1.0
    assert SublinearPower(0.8, 0.5, 0.8)(4) == pytest.approx(1.6)


def test_table_extensions():
    affine_ext = TableRule((0.3, 0.6), tail=AffineTail(gamma=0.5, beta=0.5))
    assert affine_ext(1) == 0.6
    assert affine_ext(4) == 0.5 * 4 + 0.5
    repeat = TableRule((0.3, 0.6))
    assert repeat(17) == 0.6
    assert np.allclose(repeat.values(4), [0.3, 0.6, 0.6, 0.6])


def test_positivity_enforced_at_construction():
    with pytest.raises(ParamOutOfRangeError):
        Constant(0.0)
    with pytest.raises(ParamOutOfRangeError):
        Affine(0.5, 0.0)
    with pytest.raises(ParamOutOfRangeError):
        SublinearPower(0.8, 0.5, 0.0)
    with pytest.raises(ParamOutOfRangeError):
        TableRule((0.5, -1.0))


def test_validate_examples():
    assert validate(Affine(0.5, 0.5), 1000).ok
    report = validate(Constant(1.5), 10)
    assert not report.ok and report.first_violation == 0
    # the boundary rule f(k) = k + 1 is admissible
    assert validate(Affine(1.0, 1.0), 100).ok


def test_validate_respects_d0():
    # f(2) = 1.5 > max(2 + 1 - 2, 1) = 1
    report = validate(Affine(0.5, 0.5, d0=2), 10)
    assert not report.ok and report.first_violation == 2
    assert validate(Constant(0.9, d0=3), 100).ok


def test_classify_examples():
    cls = classify(Affine(0.5, 0.5), 1000)
    assert cls.crossing_k == 1 and cls.eventually_below
    assert cls.band_gamma is None

    cls = classify(Affine(1.0, 0.3), 1000)
    assert cls.band_gamma == pytest.approx(0.3)
    assert cls.crossing_k is None

    cls = classify(Constant(0.9), 1000)
    assert cls.crossing_k == 1 and cls.eventually_below


def test_majorant_slopes():
    assert classify(Affine(0.3, 0.7), 100).majorant_slope == pytest.approx(0.3)
    assert classify(Constant(0.9), 100).majorant_slope == 0.0
    # peak of (0.8 sqrt(k) - 1)/k over the integers sits at k = 6
    slope = classify(SublinearPower(0.8, 0.5, 0.8), 100).majorant_slope
    assert slope == pytest.approx((0.8 * 6**0.5 - 1.0) / 6)
    # slope-1 rules admit no sub-unit majorant
    assert classify(Affine(1.0, 0.5), 100).majorant_slope is None


def _scan_classify(rule, horizon):
    """Brute-force oracle for the sign-pattern flags."""
    diffs = [rule(k) - k for k in range(horizon + 1)]
    crossing = None
    for k, d in enumerate(diffs):
        if d <= 0:
            crossing = k
            break
    if crossing is not None and any(d > 0 for d in diffs[crossing:]):
        crossing = None
    band = max(diffs) if min(diffs) >= 0 and 0 < max(diffs) < 1 else None
    return crossing, band


@settings(max_examples=60, deadline=None)
@given(rule=strat.rules())
def test_classify_matches_brute_force(rule):
    horizon = 60
    cls = classify(rule, horizon)
    crossing, band = _scan_classify(rule, horizon)
    assert cls.crossing_k == crossing
    if cls.whole_domain and cls.band_gamma is None:
        pass  # closed form may rule out a band the finite scan cannot
    elif band is None:
        assert cls.band_gamma is None
    else:
        assert cls.band_gamma == pytest.approx(band)
    # the two band/crossing hypotheses exclude each other
    assert not (cls.band_gamma is not None and (cls.crossing_k or 0) >= 1)


@settings(max_examples=60, deadline=None)
@given(rule=strat.rules())
def test_valid_rules_respect_envelope(rule):
    horizon = 50
    assert validate(rule, horizon).ok
    for k in range(horizon + 1):
        assert 0.0 < rule(k) <= max(k + 1 - rule.d0, 1)


@settings(max_examples=40, deadline=None)
@given(rule=strat.rules())
def test_json_round_trip(rule):
    descriptor = rule_to_json(rule)
    clone = rule_from_json(json.dumps(descriptor))
    assert clone == rule


def test_json_rejects_malformed():
    with pytest.raises(ParamOutOfRangeError):
        rule_from_json({"kind": "affine", "gamma": 0.5})  # beta missing
    with pytest.raises(ParamOutOfRangeError):
        rule_from_json({"kind": "mystery"})
