import numpy as np
import pytest
from pydantic import ValidationError

from underlay.exceptions import InvalidParameterError
from underlay.radio import (
    Assignment,
    PowerVector,
    check_feasible,
    rates,
    sinr_cue,
    sinr_d2d,
    sinr_vectors,
    sum_rate,
)


def powers(p_c, p_d=()):
    return PowerVector(p_c=list(p_c), p_d=list(p_d))


@pytest.mark.parametrize(
    "p_c,p_d,per_rb,expected",
    [
        # Interference-free ratio
        (1.0, (), ((),), 10.0),
        # One D2D sharer at 0.5 W with h_DB = 0.2
        (1.0, (0.5,), ((0,),), 5.0),
        # Silent CUE
        (0.0, (0.5,), ((0,),), 0.0),
    ],
)
def test_sinr_cue(make_scenario, p_c, p_d, per_rb, expected):
    scn = make_scenario(1, len(p_d), h_db=0.2, sigma2=0.1)
    asg = Assignment.from_groups(per_rb, len(p_d))

    assert sinr_cue(scn, asg, powers([p_c], p_d), 0) == pytest.approx(expected)


def test_sinr_d2d(make_scenario):
    scn = make_scenario(1, 2, h_cd=0.1, sigma2=0.1)
    asg = Assignment.from_groups([(0,)], 2)
    pw = powers([1.0], [1.0, 1.0])

    assert sinr_d2d(scn, asg, pw, 0) == pytest.approx(5.0)
    # Denied
    assert sinr_d2d(scn, asg, pw, 1) == 0.0


def test_sinr_d2d_symmetric_pairs(make_scenario):
    scn = make_scenario(1, 2, h_cd=0.1, h_dd=0.05, sigma2=0.1)
    asg = Assignment.from_groups([(0, 1)], 2)
    _, gamma_d = sinr_vectors(scn, asg, powers([1.0], [1.0, 1.0]))

    assert gamma_d[0] == pytest.approx(gamma_d[1])
    assert gamma_d[0] == pytest.approx(1.0 / (0.1 + 0.05 + 0.1))


def test_sum_rate(make_scenario):
    scn = make_scenario(1, 1, sigma2=0.1)

    # Single CUE at SINR 1
    assert sum_rate(scn, Assignment.empty(1, 1), powers([0.1], [0.0])) == pytest.approx(1.0)
    # All powers 0
    assert sum_rate(scn, Assignment.empty(1, 1), powers([0.0], [0.0])) == 0.0
    # CUE at SINR 3 and a pair at SINR 1
    admitted = Assignment.from_groups([(0,)], 1)
    assert sum_rate(scn, admitted, powers([0.3], [0.1])) == pytest.approx(3.0)


@pytest.mark.parametrize("factor", [1e-3, 7.0, 1e4])
def test_sinr_scale_invariance(make_scenario, factor):
    coupling = dict(
        g_cb=[0.7, 1.3],
        g_d=[1.0, 0.5, 2.0],
        h_db=[0.1, 0.2, 0.05],
        h_cd=[[0.3, 0.01, 0.2], [0.05, 0.4, 0.1]],
        h_dd=[[0.0, 0.02, 0.3], [0.1, 0.0, 0.05], [0.2, 0.07, 0.0]],
    )
    asg = Assignment.from_groups([(0, 2), (1,)], 3)
    p_c, p_d = [0.4, 0.9], [0.2, 0.6, 0.05]

    base = sinr_vectors(make_scenario(2, 3, sigma2=0.1, **coupling), asg, powers(p_c, p_d))
    scaled = sinr_vectors(
        make_scenario(2, 3, sigma2=0.1 * factor, **coupling),
        asg,
        powers(np.multiply(p_c, factor), np.multiply(p_d, factor)),
    )

    for expected, value in zip(base, scaled):
        assert value == pytest.approx(expected, rel=1e-12)


def test_sum_rate_increases_with_own_sinr(make_scenario):
    # Decoupled links: raising one power only raises that user's SINR
    scn = make_scenario(1, 2, sigma2=0.1)
    asg = Assignment.from_groups([(0, 1)], 2)
    values = [sum_rate(scn, asg, powers([0.5], [p, 0.5])) for p in np.linspace(0.0, 1.0, 11)]

    assert np.all(np.diff(values) > 0)


def test_denied_pair_has_zero_rate(make_scenario):
    scn = make_scenario(1, 2)
    rate_c, rate_d = rates(scn, Assignment.from_groups([(1,)], 2), powers([1.0], [0.0, 1.0]))

    assert rate_d[0] == 0.0
    assert rate_d[1] > 0.0
    assert rate_c[0] > 0.0


def test_shape_mismatch(make_scenario):
    scn = make_scenario(2, 1)

    with pytest.raises(InvalidParameterError):
        rates(scn, Assignment.empty(1, 1), powers([1.0], [0.0]))

    with pytest.raises(InvalidParameterError):
        rates(scn, Assignment.empty(2, 1), powers([1.0], [0.0]))


def test_feasible_without_d2d(make_scenario):
    scn = make_scenario(2, 1, gamma_c=5.0, sigma2=0.1)
    report = check_feasible(scn, Assignment.empty(2, 1), powers([1.0, 1.0], [0.0]))

    assert report
    assert report.violations == ()
    assert np.allclose(report.cue_slack, 1.0)
    assert np.isnan(report.d2d_slack[0])


@pytest.mark.parametrize(
    "p_c,p_d,per_rb,expected",
    [
        # Power cap exceeded by 1 mW
        ([1.001], [0.0], [()], "cap:cue:0"),
        ([1.0], [-0.5], [(0,)], "floor:d2d:0"),
        # A denied pair must be silent
        ([1.0], [0.1], [()], "idle:d2d:0"),
        # QoS of the CUE broken by its sharer
        ([0.1], [1.0], [(0,)], "qos:cue:0"),
    ],
)
def test_violations(make_scenario, p_c, p_d, per_rb, expected):
    scn = make_scenario(1, 1, h_db=0.5, gamma_c=1.0, gamma_d=0.1, sigma2=0.1)
    report = check_feasible(scn, Assignment.from_groups(per_rb, 1), powers(p_c, p_d))

    assert not report
    assert expected in [violation.constraint for violation in report.violations]


@pytest.mark.parametrize(
    "per_rb,denied",
    [
        # Pair in two RBs
        (((0,), (0,)), frozenset()),
        # Duplicate within one RB
        (((0, 0), ()), frozenset()),
        # Admitted and denied at once
        (((0,), ()), frozenset({0})),
        # Missing index 1
        (((0,), ()), frozenset({2})),
    ],
)
def test_invalid_assignment(per_rb, denied):
    with pytest.raises(ValidationError):
        Assignment(per_rb=per_rb, denied=denied)


def test_assignment_helpers():
    asg = Assignment.from_groups([(2, 0), ()], 4)

    assert asg.n_cues == 2
    assert asg.n_d2d == 4
    assert asg.admitted_count == 2
    assert asg.denied == frozenset({1, 3})
    assert asg.rb_of == {2: 0, 0: 0}
