import numpy as np
import pytest
from sklearn.base import clone

from gwmds import GWMDS, MeanGWMDS, MultiGWMDS, MultiIsomap, generate_manifold, make_views
from gwmds.estimators import check_views
from gwmds.relational import pairwise_euclidean


@pytest.fixture(scope="module")
def views():
    data = make_views(generate_manifold("s_curve", 60, seed=0))
    return [v.values for v in data.views]


def test_params_round_trip():
    est = MultiGWMDS(n_components=3, selection="min_rho", random_state=4)
    params = est.get_params()
    assert params["n_components"] == 3 and params["selection"] == "min_rho"
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(n_restarts=1)
    assert est.n_restarts == 1


def test_gwmds_single_view(views):
    est = GWMDS(n_restarts=1)
    Y = est.fit_transform(views[0])
    assert Y.shape == (60, 2)
    assert est.coupling_.shape == (60, 60)
    assert est.gw_sq_ >= 0


def test_mean_and_multi(views):
    Y = MeanGWMDS(n_restarts=1).fit_transform(views)
    assert Y.shape == (60, 2)
    m = MultiGWMDS(n_restarts=1).fit(views)
    assert m.embedding_.shape == (60, 2)
    assert len(m.aligned_embeddings_) == 2 and m.selected_view_ == int(np.argmax(m.scores_))
    np.testing.assert_array_equal(m.embedding_, m.aligned_embeddings_[m.selected_view_])


def test_precomputed_matches_features(views):
    Ds = [pairwise_euclidean(v).values for v in views]
    a = MeanGWMDS(n_restarts=1).fit_transform(views)
    b = MeanGWMDS(n_restarts=1, dissimilarity="precomputed").fit_transform(Ds)
    np.testing.assert_array_equal(a, b)


def test_multi_isomap(views):
    Y = MultiIsomap(n_neighbors=8).fit_transform(views)
    assert Y.shape == (60, 2)


def test_input_validation(views):
    with pytest.raises(ValueError):
        check_views(views, "cosine")
    with pytest.raises(ValueError, match="view 1"):
        check_views([views[0], views[1][:10]])
    with pytest.raises(ValueError):
        check_views([np.full((5, 2), np.nan)])
    with pytest.raises(ValueError, match="square"):
        check_views([np.zeros((5, 2))], "precomputed")
    with pytest.raises(ValueError):
        check_views([])
