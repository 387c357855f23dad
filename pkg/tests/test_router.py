import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from voiceroute.metrics import SystemMetrics
from voiceroute.router import Mode, Rule, RoutingThresholds, decide


@pytest.mark.parametrize(
    "cpu, temp, lat, mode, rules",
    [
        (85, 55, 100, Mode.OFFLINE, {Rule.CPU_AND_TEMP_HIGH}),
        (10, 30, 200, Mode.OFFLINE, {Rule.LATENCY_HIGH}),
        (85, 40, 100, Mode.ONLINE, set()),
        (80, 50, 150, Mode.ONLINE, set()),
        (10, 30, math.inf, Mode.OFFLINE, {Rule.LATENCY_HIGH}),
        (95, 60, 300, Mode.OFFLINE, {Rule.CPU_AND_TEMP_HIGH, Rule.LATENCY_HIGH}),
    ],
)
def test_examples(cpu, temp, lat, mode, rules):
    d = decide(SystemMetrics(cpu, temp, lat))
    assert d.mode is mode
    assert d.fired_rules == rules


def test_truth_table():
    below, above = (50.0, 40.0, 100.0), (90.0, 60.0, 200.0)
    for bits in itertools.product([False, True], repeat=3):
        vals = [above[i] if b else below[i] for i, b in enumerate(bits)]
        expected_offline = (bits[0] and bits[1]) or bits[2]
        assert (decide(SystemMetrics(*vals)).mode is Mode.OFFLINE) == expected_offline, bits


def test_custom_thresholds():
    t = RoutingThresholds(cpu_pct=50, temp_c=40, latency_ms=60)
    assert decide(SystemMetrics(51, 41, 10), t).mode is Mode.OFFLINE
    assert decide(SystemMetrics(10, 10, 61), t).mode is Mode.OFFLINE
    assert decide(SystemMetrics(50, 41, 60), t).mode is Mode.ONLINE


@pytest.mark.parametrize("field", ["cpu_pct", "temp_c", "latency_ms"])
@pytest.mark.parametrize("bad", [0, -5, math.inf, math.nan])
def test_thresholds_must_be_finite_positive(field, bad):
    with pytest.raises(ValueError):
        RoutingThresholds(**{field: bad})


metrics_st = st.builds(
    SystemMetrics,
    cpu_pct=st.floats(0, 100),
    temp_c=st.floats(-20, 120),
    latency_ms=st.one_of(st.floats(0, 1000), st.just(math.inf)),
)


@given(metrics_st)
def test_offline_iff_rules_fired(m):
    d = decide(m)
    assert (d.mode is Mode.OFFLINE) == bool(d.fired_rules)
    assert d == decide(m)


@given(metrics_st, st.floats(0, 1000))
def test_monotone_in_latency(m, extra):
    d = decide(m)
    if Rule.LATENCY_HIGH in d.fired_rules:
        worse = SystemMetrics(m.cpu_pct, m.temp_c, m.latency_ms + extra)
        assert decide(worse).mode is Mode.OFFLINE


@given(metrics_st, st.floats(0, 100), st.floats(0, 100))
def test_monotone_in_cpu_and_temp(m, dcpu, dtemp):
    hotter = SystemMetrics(min(100.0, m.cpu_pct + dcpu), m.temp_c + dtemp, m.latency_ms)
    if decide(m).mode is Mode.OFFLINE:
        assert decide(hotter).mode is Mode.OFFLINE


@given(st.floats(0, 80), st.floats(-50, 200), st.floats(0, 150))
def test_safe_range_is_online_regardless_of_temperature(cpu, temp, lat):
    assert decide(SystemMetrics(cpu, temp, lat)).mode is Mode.ONLINE


@given(metrics_st)
def test_decision_round_trip(m):
    from voiceroute.router import RoutingDecision

    d = decide(m)
    assert RoutingDecision.from_dict(d.to_dict()) == d
