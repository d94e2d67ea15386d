import numpy as np
import pytest

from costboost.boosting import train
from costboost.cascade import (
    CascadeThresholds,
    calibrate,
    detection_score,
    predict_pruned,
    score_from_costs,
    score_trace,
    thresholds_from_traces,
    trace_matrix,
)
from costboost.costs import make_detection_cost
from costboost.dataset import Dataset
from costboost.errors import ValidationError

from conftest import gaussian_blobs


@pytest.fixture(scope="module")
def detector():
    """Background blob at the origin, two positive views off-axis."""
    rng = np.random.default_rng(50)
    data = gaussian_blobs(
        rng, 900, [(0.0, 0.0), (3.0, 0.5), (0.5, 3.0)], scale=0.8
    )
    cost = make_detection_cost(2, 2.0)
    ensemble, _ = train(data, cost, rounds=25, depth_limit=2, seed=1)
    positives = gaussian_blobs(
        np.random.default_rng(51), 300, [(0.0, 0.0), (3.0, 0.5), (0.5, 3.0)], scale=0.8
    )
    keep = positives.labels != 1
    return ensemble, positives.subset(np.nonzero(keep)[0])


# -------------------------------------------------------------------- scoring


def test_score_from_costs_example():
    assert score_from_costs([0.5, -1.0, 2.0]) == pytest.approx(1.5, abs=1e-15)


def test_score_zero_margin_is_zero():
    from costboost.boosting import Ensemble

    ens = Ensemble(cost=make_detection_cost(2, 1.5), members=[], shrinkage=1.0, n_features=2)
    assert detection_score(ens, [0.0, 0.0]) == 0.0


def test_score_sign_agrees_with_prediction(detector):
    ensemble, _ = detector
    rng = np.random.default_rng(52)
    x = rng.normal(loc=1.0, scale=2.0, size=(1000, 2))
    preds = ensemble.predict_batch(x)
    scores = trace_matrix(ensemble, x)[:, -1]
    assert np.all((scores > 0) == (preds != 1))


def test_score_trace_matches_prefix_ensembles(detector):
    from costboost.boosting import Ensemble

    ensemble, positives = detector
    x = positives.features[0]
    trace = score_trace(ensemble, x)
    assert trace.shape == (len(ensemble.members),)
    for m in (1, len(ensemble.members) // 2, len(ensemble.members)):
        prefix = Ensemble(
            cost=ensemble.cost,
            members=ensemble.members[:m],
            shrinkage=ensemble.shrinkage,
            n_features=ensemble.n_features,
        )
        assert trace[m - 1] == pytest.approx(detection_score(prefix, x), rel=1e-10)


def test_nonstandard_background_label(detector):
    ensemble, _ = detector
    rng = np.random.default_rng(53)
    x = rng.normal(size=(50, 2))
    t2 = trace_matrix(ensemble, x, background_label=2)
    costs_last = []
    table = ensemble.extended.c_star @ ensemble.codes.codes.T
    for i in range(50):
        c = np.zeros(3)
        for beta, tree in ensemble.members:
            c += beta * table[:, tree.predict(x[i]) - 1]
        costs_last.append(c[1] - min(c[0], c[2]))
    assert np.allclose(t2[:, -1], costs_last, rtol=1e-12)


# ---------------------------------------------------------------- calibration


def test_thresholds_from_traces_single_example():
    t = thresholds_from_traces(np.array([[-1.0, 0.5, 2.0]]), "single")
    assert t.values.tolist() == [-1.0]


def test_thresholds_from_traces_per_stage_example():
    traces = np.array([[0.0, 1.0, 2.0], [-1.0, 1.0, 3.0]])
    t = thresholds_from_traces(traces, "per_stage")
    assert t.values.tolist() == [-1.0, 1.0, 2.0]


def test_single_threshold_floors_all_traces():
    # a positive that dips below the lowest-final trace must stay safe
    traces = np.array([[0.0, 1.0, 2.0], [-1.0, 1.0, 3.0]])
    t = thresholds_from_traces(traces, "single")
    assert t.values.tolist() == [-1.0]


def test_calibrate_excludes_nonpositive_and_background(detector):
    ensemble, positives = detector
    scores = trace_matrix(ensemble, positives.features)[:, -1]
    n_bad = int(np.count_nonzero(scores <= 0))
    t = calibrate(ensemble, positives, mode="per_stage")
    assert t.n_excluded == n_bad
    assert t.n_calibration == positives.n_samples - n_bad
    assert t.n_members == len(ensemble.members)


def test_calibrate_soundness_both_modes(detector):
    ensemble, positives = detector
    full = ensemble.predict_batch(positives.features)
    scores = trace_matrix(ensemble, positives.features)[:, -1]
    retained = scores > 0
    for mode in ("single", "per_stage"):
        t = calibrate(ensemble, positives, mode=mode)
        for i in np.nonzero(retained)[0]:
            label, used = predict_pruned(ensemble, t, positives.features[i])
            assert label == full[i]
            assert used == len(ensemble.members)


def test_pruning_only_produces_background(detector):
    ensemble, positives = detector
    t = calibrate(ensemble, positives, mode="per_stage")
    rng = np.random.default_rng(54)
    x = rng.normal(loc=0.5, scale=2.0, size=(800, 2))
    full = ensemble.predict_batch(x)
    changed = early = 0
    for i in range(x.shape[0]):
        label, used = predict_pruned(ensemble, t, x[i])
        if used < len(ensemble.members):
            early += 1
            assert label == 1
        else:
            assert label == full[i]
        changed += label != full[i]
    assert early > 0  # negatives do exit early on this mixture


def test_negatives_exit_early_on_average(detector):
    ensemble, positives = detector
    t = calibrate(ensemble, positives, mode="per_stage")
    rng = np.random.default_rng(55)
    negatives = rng.normal(loc=0.0, scale=0.8, size=(600, 2))
    used = np.array(
        [predict_pruned(ensemble, t, negatives[i])[1] for i in range(600)]
    )
    assert used.mean() < len(ensemble.members)


def test_raising_thresholds_monotone_in_members_evaluated(detector):
    ensemble, positives = detector
    t = calibrate(ensemble, positives, mode="per_stage")
    raised_values = t.values.copy()
    raised_values[len(raised_values) // 2] += 1.0
    raised = CascadeThresholds(
        mode="per_stage",
        values=raised_values,
        n_members=t.n_members,
        background_label=t.background_label,
    )
    rng = np.random.default_rng(56)
    x = rng.normal(loc=1.0, scale=1.5, size=(300, 2))
    for i in range(x.shape[0]):
        _, used_lo = predict_pruned(ensemble, t, x[i])
        _, used_hi = predict_pruned(ensemble, raised, x[i])
        assert used_hi <= used_lo


def test_calibrate_errors(detector):
    ensemble, positives = detector
    with pytest.raises(ValidationError):
        calibrate(ensemble, positives, mode="weird")
    # all samples labeled background: nothing retained
    bg = Dataset(
        feature_names=positives.feature_names,
        features=positives.features[:5],
        labels=np.ones(5, dtype=np.int64),
        k=positives.k,
    )
    with pytest.raises(ValidationError):
        calibrate(ensemble, bg)


def test_threshold_size_mismatch(detector):
    ensemble, positives = detector
    t = calibrate(ensemble, positives, mode="per_stage")
    wrong = CascadeThresholds(
        mode="per_stage",
        values=t.values[:-1],
        n_members=t.n_members - 1,
        background_label=1,
    )
    with pytest.raises(ValidationError):
        predict_pruned(ensemble, wrong, positives.features[0])
