"""Test mfs.capture."""
import math

import numpy as np
import pytest

from mfs import capture
from mfs.capture import MMPPCapture, PoissonCapture
from mfs.mmpp import TwoStateMmpp, mean_rate, superpose
from mfs.traffic import OnOffSource, Trace, merge_traces, simulate_modulated, simulate_onoff


@pytest.fixture(scope="module")
def onoff_trace():
    """A bursty two-sensor trace with 30 and 50 minute phases."""
    sources = [OnOffSource(tau=1800, rate=1 / 15, sensor_id=1), OnOffSource(3000, 0.1, 2)]
    rng = np.random.default_rng(0)
    return merge_traces([simulate_onoff(source, 6e5, seed=rng) for source in sources])


@pytest.fixture(scope="module")
def onoff_model():
    """Superposed model of the bursty trace."""
    return superpose([TwoStateMmpp.from_onoff(1800, 1 / 15), TwoStateMmpp.from_onoff(3000, 0.1)])


def test_budget():
    """Budgets round the expected count up."""
    model = PoissonCapture(mean_rate=0.5, slot_width=5.0, budget_factor=2.0)
    assert model.budget() == 5
    model = PoissonCapture(mean_rate=0.3, slot_width=5.0, budget_factor=2.0)
    assert model.budget() == 3
    assert PoissonCapture(mean_rate=0.0).budget() == 0


def test_min_budget():
    """Budgets never fall below the floor, and predicted bursts still raise them."""
    assert PoissonCapture(mean_rate=0.0, min_budget=4).budget() == 4
    assert PoissonCapture(0.5, slot_width=5.0, budget_factor=2.0, min_budget=3).budget() == 5

    bursty = superpose([TwoStateMmpp(0.1, 0.1, 0.1, 5.0)])
    model = MMPPCapture(bursty, slot_width=1.0, budget_factor=1.0, min_budget=3)
    budgets, _ = capture.allocate_budgets([0, 0, 12, 12, 0], model)
    assert np.array_equal(budgets, [3, 3, 3, 5, 5])


def test_parameter_validation(onoff_model):
    """Check capture model parameter checks."""
    with pytest.raises(ValueError):
        PoissonCapture(mean_rate=1.0, slot_width=0)
    with pytest.raises(ValueError):
        PoissonCapture(mean_rate=1.0, budget_factor=0)
    with pytest.raises(ValueError):
        PoissonCapture(mean_rate=1.0, min_budget=-1)
    with pytest.raises(ValueError):
        MMPPCapture(TwoStateMmpp(1, 1, 0, 1))
    with pytest.raises(ValueError):
        MMPPCapture(onoff_model).filter_update(-1)


def test_filter_concentrates_on_high_rate():
    """A large count moves the belief onto the highest-rate state."""
    model = MMPPCapture(superpose([TwoStateMmpp(0.1, 0.1, 0.1, 5.0)]), slot_width=1.0)
    model.filter_update(12)
    assert np.argmax(model.belief_) == 1
    assert model.top_state() == 2

    # Direct Bayes computation on the two states.
    predicted = np.array([0.5, 0.5]) @ model.transition_
    likelihood = np.array([np.exp(-0.1) * 0.1**12, np.exp(-5.0) * 5.0**12])
    expected = predicted * likelihood / np.sum(predicted * likelihood)
    assert np.allclose(model.belief_, expected)


def test_filter_uniform_rates():
    """Counts carry no information when every state has the same rate."""
    model = MMPPCapture(superpose([TwoStateMmpp(1, 3, 2.0, 2.0)]), slot_width=0.5)
    model.belief_ = np.array([0.9, 0.1])
    model.predicted_ = model.belief_ @ model.transition_
    predicted = model.predicted_.copy()
    model.filter_update(7)
    assert np.allclose(model.belief_, predicted)


def test_filter_short_slot():
    """With a tiny slot and no events, the belief only moves by prediction."""
    model = MMPPCapture(superpose([TwoStateMmpp(1, 1, 1.0, 2.0)]), slot_width=1e-9)
    predicted = model.predicted_.copy()
    model.filter_update(0)
    assert np.allclose(model.belief_, predicted, atol=1e-8)


def test_filter_impossible_count_resets(caplog):
    """A count no state can produce resets the belief to the steady state."""
    model = MMPPCapture(superpose([TwoStateMmpp(1, 1, 0.0, 0.0)]), slot_width=1.0)
    model.filter_update(3)
    assert np.allclose(model.belief_, model.prior_)
    assert "Resetting the belief" in caplog.text


def test_belief_stays_distribution(onoff_trace, onoff_model):
    """The belief is a probability vector after every update."""
    model = MMPPCapture(onoff_model, slot_width=300.0)
    for count in capture.bin_trace(onoff_trace, 300.0).counts:
        model.filter_update(count)
        assert math.isclose(model.belief_.sum(), 1, abs_tol=1e-9)
        assert np.all(model.belief_ >= 0)


def test_capture_mask():
    """The earliest events of each slot are captured up to the budget."""
    times = np.array([0.1, 0.2, 0.3, 1.5, 2.1, 2.2])
    mask = capture.capture_mask(times, 1.0, [2, 0, 5])
    assert np.array_equal(mask, [True, True, False, False, True, True])


def test_capture_mask_last_slot_rounding():
    """An event just below the horizon uses the last slot's budget."""
    times = np.array([0.1, 0.2, np.nextafter(0.9, 0)])
    mask = capture.capture_mask(times, 0.3, [1, 0, 1])
    assert np.array_equal(mask, [True, False, True])


def test_run_capture_partition(onoff_trace, onoff_model):
    """Captured and missed events partition the trace."""
    model = MMPPCapture(onoff_model, slot_width=300.0, budget_factor=1.0)
    captured, missed, ratio = capture.run_capture(onoff_trace, model)
    assert len(captured) + len(missed) == len(onoff_trace)
    assert math.isclose(ratio, len(captured) / len(onoff_trace))
    merged = merge_traces([captured, missed])
    assert np.array_equal(merged.times, onoff_trace.times)


def test_run_capture_edge_cases():
    """Check ample budgets, zero budgets and empty traces."""
    trace = Trace([0.5, 1.5, 1.6], [1, 1, 2], [0, 1, 1], horizon=3.0)
    _, _, ratio = capture.run_capture(trace, PoissonCapture(10.0, slot_width=1.0))
    assert ratio == 1.0

    _, missed, ratio = capture.run_capture(trace, PoissonCapture(0.0, slot_width=1.0))
    assert ratio == 0.0
    assert len(missed) == 3

    _, _, ratio = capture.run_capture(Trace(horizon=3.0), PoissonCapture(1.0, slot_width=1.0))
    assert ratio == 1.0


@pytest.mark.parametrize("kind", ["poisson", "mmpp"])
def test_ratio_monotone_in_budget_factor(onoff_trace, onoff_model, kind):
    """Larger budget factors never capture less."""
    ratios = []
    for factor in [0.5, 1.0, 1.5, 2.0, 3.0]:
        if kind == "mmpp":
            model = MMPPCapture(onoff_model, slot_width=300.0, budget_factor=factor)
        else:
            model = PoissonCapture(mean_rate(onoff_model), 300.0, budget_factor=factor)
        ratios.append(capture.run_capture(onoff_trace, model)[2])
    assert np.all(np.diff(ratios) >= 0)


def test_mmpp_beats_poisson(onoff_trace, onoff_model):
    """Tracking bursts captures more than a constant budget of the same average size."""
    mmpp_model = MMPPCapture(onoff_model, slot_width=300.0, budget_factor=2.0)
    report = capture.capture_report(onoff_trace, mmpp_model)
    mmpp_ratio = report["captured"].sum() / report["arrivals"].sum()

    budget = math.ceil(report["budget"].mean())
    rate = mean_rate(onoff_model)
    baseline = PoissonCapture(rate, 300.0, budget_factor=budget / (rate * 300.0))
    assert baseline.budget() == budget
    _, _, poisson_ratio = capture.run_capture(onoff_trace, baseline)
    assert mmpp_ratio > poisson_ratio
    assert mmpp_ratio > 0.97


def test_single_poisson_source_degenerates():
    """With constant traffic the mmpp filter budgets like the mean rate."""
    component = TwoStateMmpp(1, 1, 2.0, 2.0)
    trace = simulate_modulated(component, [1], 2000.0, seed=4)
    mmpp_model = MMPPCapture(superpose([component]), slot_width=5.0, budget_factor=1.2)
    poisson_model = PoissonCapture(2.0, slot_width=5.0, budget_factor=1.2)
    budgets, _ = capture.allocate_budgets(np.zeros(5, dtype=int), mmpp_model)
    assert np.all(budgets == poisson_model.budget())
    assert math.isclose(
        capture.run_capture(trace, mmpp_model)[2], capture.run_capture(trace, poisson_model)[2]
    )


def test_capture_report(onoff_trace, onoff_model):
    """Check the per-slot report of both kinds."""
    report = capture.capture_report(onoff_trace, MMPPCapture(onoff_model, slot_width=300.0))
    assert list(report.columns) == capture.REPORT_COLUMNS
    assert report["arrivals"].sum() == len(onoff_trace)
    assert np.all(report["captured"] <= report["budget"])
    assert np.all(report["captured"] <= report["arrivals"])
    assert report["belief_top_state"].between(1, 4).all()

    rate = mean_rate(onoff_model)
    report = capture.capture_report(onoff_trace, PoissonCapture(rate, slot_width=300.0))
    assert report["belief_top_state"].isna().all()
    assert report["budget"].nunique() == 1
