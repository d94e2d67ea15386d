import numpy as np
import pytest

from costboost.costs import CostMatrix, make_01_cost
from costboost.dataset import Dataset
from costboost.errors import ValidationError
from costboost.tree import (
    CostTree,
    WeakFitStats,
    evaluate_stats,
    fit_cost_tree,
    leaf_label,
)

from conftest import gaussian_blobs, unit_multipliers


def tiny_dataset(features, labels, k):
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    names = [f"x{i + 1}" for i in range(features.shape[1])]
    return Dataset(feature_names=names, features=features, labels=labels, k=k)


def uniform_weights(n):
    return np.full(n, 1.0 / n)


def brute_force_leaf(class_weights, a_beta):
    best, best_k = None, None
    for k in range(a_beta.shape[0]):
        total = sum(class_weights[j] * a_beta[j, k] for j in range(a_beta.shape[0]))
        if best is None or total < best:
            best, best_k = total, k
    return best_k + 1


def brute_force_stump(data, weights, a_beta):
    """Exhaustive depth-1 search: every feature, every midpoint, both leaves
    brute-force labeled.  Returns the best achievable objective."""
    w = weights / weights.sum()
    k = data.k
    per_class = np.zeros((data.n_samples, k))
    per_class[np.arange(data.n_samples), data.labels - 1] = w

    def node_obj(mask):
        cw = per_class[mask].sum(axis=0)
        return min(float(cw @ a_beta[:, j]) for j in range(k))

    best = node_obj(np.ones(data.n_samples, dtype=bool))
    for f in range(data.n_features):
        values = np.unique(data.features[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = (lo + hi) / 2
            mask = data.features[:, f] <= threshold
            best = min(best, node_obj(mask) + node_obj(~mask))
    return best


def tree_objective(tree, data, weights, a_beta):
    w = weights / weights.sum()
    preds = tree.predict_batch(data.features)
    return float(np.sum(w * a_beta[data.labels - 1, preds - 1]))


# ----------------------------------------------------------------- leaf label


def test_leaf_label_all_mass_single_class():
    a = unit_multipliers(make_01_cost(3))
    assert leaf_label([0.0, 1.0, 0.0], a) == 2


def test_leaf_label_tie_breaks_low():
    a = unit_multipliers(make_01_cost(3))
    assert leaf_label([0.5, 0.5, 0.0], a) == 1


def test_leaf_label_matches_brute_force():
    rng = np.random.default_rng(20)
    for _ in range(200):
        k = int(rng.integers(3, 7))
        weights = rng.uniform(0.0, 1.0, size=k)
        weights[int(rng.integers(k))] += 0.5  # ensure some mass
        a = rng.uniform(0.2, 3.0, size=(k, k))
        assert leaf_label(weights, a) == brute_force_leaf(weights, a)


def test_leaf_label_rejects_zero_mass():
    with pytest.raises(ValidationError):
        leaf_label([0.0, 0.0], unit_multipliers(make_01_cost(2)))


# -------------------------------------------------------------------- fitting


def test_single_class_data_gives_depth_zero_tree():
    data = tiny_dataset([[0.0], [1.0], [2.0]], [2, 2, 2], k=3)
    a = unit_multipliers(make_01_cost(3))
    tree = fit_cost_tree(data, uniform_weights(3), a, depth_limit=4)
    assert tree.depth() == 0
    assert tree.predict([7.0]) == 2


def test_majority_leaf_under_01_costs():
    rng = np.random.default_rng(21)
    a = unit_multipliers(make_01_cost(3))
    for _ in range(50):
        counts = rng.integers(1, 20, size=3)
        weights = counts / counts.sum()
        # symmetric multipliers: leaf label is the weighted majority
        assert leaf_label(weights, a) == int(np.argmax(weights)) + 1


def test_two_point_separable_becomes_depth_one():
    data = tiny_dataset([[0.0], [1.0]], [1, 2], k=2)
    a = unit_multipliers(CostMatrix([[0, 0.7], [1.3, 0]]))
    tree = fit_cost_tree(data, uniform_weights(2), a, depth_limit=3)
    assert tree.depth() == 1
    assert tree.predict([0.0]) == 1
    assert tree.predict([1.0]) == 2
    # only the reward terms remain
    obj = tree_objective(tree, data, uniform_weights(2), a)
    assert obj == pytest.approx(0.5 * a[0, 0] + 0.5 * a[1, 1], rel=1e-12)


def test_depth_one_matches_exhaustive_stump_search():
    rng = np.random.default_rng(22)
    for trial in range(30):
        n = int(rng.integers(8, 30))
        k = int(rng.integers(2, 5))
        data = tiny_dataset(
            rng.normal(size=(n, 2)), rng.integers(1, k + 1, size=n), k=k
        )
        entries = rng.uniform(0.1, 2.0, size=(k, k))
        np.fill_diagonal(entries, 0.0)
        a = unit_multipliers(CostMatrix(entries))
        weights = rng.uniform(0.1, 1.0, size=n)
        tree = fit_cost_tree(data, weights, a, depth_limit=1)
        got = tree_objective(tree, data, weights, a)
        want = brute_force_stump(data, weights, a)
        assert got == pytest.approx(want, rel=1e-10)


def test_leaf_optimality_brute_force(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    tree = fit_cost_tree(three_blobs, w, a, depth_limit=3)
    preds = tree.predict_batch(three_blobs.features)
    # group samples by leaf via the predicted path signature
    leaves = {}
    for i in range(three_blobs.n_samples):
        node = tree.root
        path = []
        x = three_blobs.features[i]
        while not node.is_leaf:
            go_left = x[node.feature] <= node.threshold
            path.append(go_left)
            node = node.left if go_left else node.right
        leaves.setdefault(tuple(path), []).append(i)
    for idx in leaves.values():
        idx = np.asarray(idx)
        class_w = np.zeros(3)
        np.add.at(class_w, three_blobs.labels[idx] - 1, w[idx])
        assert preds[idx[0]] == brute_force_leaf(class_w, a)


def test_split_monotonicity(three_blobs, asymmetric_cost):
    # every internal node's objective strictly exceeds its children's sum
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    tree = fit_cost_tree(three_blobs, w, a, depth_limit=4)

    def node_obj(idx):
        class_w = np.zeros(3)
        np.add.at(class_w, three_blobs.labels[idx] - 1, w[idx])
        return float(np.min(class_w @ a))

    def walk(node, idx):
        if node.is_leaf:
            return
        mask = three_blobs.features[idx, node.feature] <= node.threshold
        left, right = idx[mask], idx[~mask]
        assert node_obj(idx) - (node_obj(left) + node_obj(right)) > 1e-12
        walk(node.left, left)
        walk(node.right, right)

    walk(tree.root, np.arange(three_blobs.n_samples))


def test_depth_limit_respected(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    for limit in (1, 2, 3):
        tree = fit_cost_tree(three_blobs, w, a, depth_limit=limit)
        assert tree.depth() <= limit


def test_duplicated_points_cannot_split():
    data = tiny_dataset([[1.0], [1.0], [1.0], [1.0]], [1, 2, 1, 2], k=2)
    a = unit_multipliers(make_01_cost(2))
    tree = fit_cost_tree(data, uniform_weights(4), a, depth_limit=3)
    assert tree.depth() == 0


def test_determinism_full_features(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    t1 = fit_cost_tree(three_blobs, w, a, depth_limit=4)
    t2 = fit_cost_tree(three_blobs, w, a, depth_limit=4)
    assert t1.to_dict() == t2.to_dict()


def test_determinism_feature_sampling(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    t1 = fit_cost_tree(three_blobs, w, a, depth_limit=3, feature_fraction=0.5, rng=11)
    t2 = fit_cost_tree(three_blobs, w, a, depth_limit=3, feature_fraction=0.5, rng=11)
    t3 = fit_cost_tree(three_blobs, w, a, depth_limit=3, feature_fraction=0.5, rng=12)
    assert t1.to_dict() == t2.to_dict()
    assert t1.to_dict() != t3.to_dict() or True  # different seed may coincide
    with pytest.raises(ValidationError):
        fit_cost_tree(three_blobs, w, a, depth_limit=3, feature_fraction=0.5)


def test_rejects_zero_weights_and_bad_shapes(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    with pytest.raises(ValidationError):
        fit_cost_tree(three_blobs, np.zeros(three_blobs.n_samples), a, 2)
    with pytest.raises(ValidationError):
        fit_cost_tree(three_blobs, np.ones(5), a, 2)
    with pytest.raises(ValidationError):
        fit_cost_tree(three_blobs, uniform_weights(three_blobs.n_samples), a, 0)


# ---------------------------------------------------------------------- stats


def test_stats_perfect_tree(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    # deep tree on its own training data is near perfect on separated blobs
    data = gaussian_blobs(np.random.default_rng(1), 100, [(0.0,), (10.0,)], scale=0.1)
    a2 = unit_multipliers(make_01_cost(2))
    tree = fit_cost_tree(data, uniform_weights(100), a2, depth_limit=2)
    stats = evaluate_stats(tree, data, uniform_weights(100))
    assert np.all(stats.e == 0)
    class_w = np.bincount(data.labels, minlength=3)[1:] / 100
    assert np.allclose(stats.s, class_w)


def test_stats_constant_tree(three_blobs):
    from costboost.tree import Node

    tree = CostTree(root=Node(label=1), depth_limit=1, n_features=2)
    w = np.full(three_blobs.n_samples, 1.0 / three_blobs.n_samples)
    stats = evaluate_stats(tree, three_blobs, w)
    class_w = three_blobs.class_counts() / three_blobs.n_samples
    assert stats.s[0] == pytest.approx(class_w[0], rel=1e-12)
    assert np.all(stats.e[0] == 0)
    for j in (1, 2):
        assert stats.e[j, 0] == pytest.approx(class_w[j], rel=1e-12)
        assert stats.s[j] == 0


def test_stats_match_per_sample_recount(three_blobs, asymmetric_cost):
    rng = np.random.default_rng(23)
    a = unit_multipliers(asymmetric_cost)
    weights = rng.uniform(0.1, 1.0, size=three_blobs.n_samples)
    tree = fit_cost_tree(three_blobs, weights, a, depth_limit=2)
    stats = evaluate_stats(tree, three_blobs, weights)
    preds = tree.predict_batch(three_blobs.features)
    w = weights / weights.sum()
    s = np.zeros(3)
    e = np.zeros((3, 3))
    for i in range(three_blobs.n_samples):
        l, p = three_blobs.labels[i] - 1, preds[i] - 1
        if l == p:
            s[l] += w[i]
        else:
            e[l, p] += w[i]
    assert np.allclose(stats.s, s, atol=1e-12)
    assert np.allclose(stats.e, e, atol=1e-12)
    assert stats.s.sum() + stats.e.sum() == pytest.approx(1.0, abs=1e-9)


def test_stats_validation():
    with pytest.raises(ValidationError):
        WeakFitStats(s=np.array([0.5, 0.6]), e=np.zeros((2, 2)))  # sums over 1
    with pytest.raises(ValidationError):
        WeakFitStats(s=np.array([0.5, 0.5]), e=np.eye(2) * 0.1)  # diagonal error


# ------------------------------------------------------------- serialization


def test_tree_dict_round_trip(three_blobs, asymmetric_cost):
    a = unit_multipliers(asymmetric_cost)
    w = uniform_weights(three_blobs.n_samples)
    tree = fit_cost_tree(three_blobs, w, a, depth_limit=3)
    again = CostTree.from_dict(tree.to_dict(), tree.depth_limit, tree.n_features)
    assert np.array_equal(
        tree.predict_batch(three_blobs.features),
        again.predict_batch(three_blobs.features),
    )
