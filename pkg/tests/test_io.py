import json
import xml.etree.ElementTree as ET

import numpy as np

from gwmds.geometry import Embedding
from gwmds.gw import GwConfig, MdsConfig, gwmds_embed
from gwmds.io import read_embedding_csv, scatter_svg, write_embedding, write_multi_result
from gwmds.multiview import multi_gwmds
from gwmds.ot import Coupling
from gwmds.relational import RelationalMatrix

from conftest import random_distance_matrix


def test_embedding_csv_and_sidecar(tmp_path, rng):
    D = random_distance_matrix(rng, 12)
    emb = gwmds_embed(D, MdsConfig(seed=5), GwConfig(n_restarts=1))
    write_embedding(tmp_path / "e.csv", emb)
    header = (tmp_path / "e.csv").read_text().splitlines()[0]
    assert header == "id,y1,y2"
    ids, Y = read_embedding_csv(tmp_path / "e.csv")
    np.testing.assert_array_equal(Y, emb.coords)
    assert ids == [str(i) for i in range(12)]
    side = json.loads((tmp_path / "e.json").read_text())
    for key in ("method", "seed", "gw_sq", "iterations", "config"):
        assert key in side
    assert side["seed"] == 5 and side["config"]["mds"]["embed_dim"] == 2


def test_multi_result_directory(tmp_path, rng):
    D = RelationalMatrix(random_distance_matrix(rng, 10))
    res = multi_gwmds([D, D], None, MdsConfig(), GwConfig(n_restarts=1))
    write_multi_result(tmp_path / "m", res)
    scores = json.loads((tmp_path / "m" / "scores.json").read_text())
    assert scores["selected"] == res.selected_view and scores["criterion"] == "max_corr"
    assert len(scores["scores"]) == 2
    couplings = json.loads((tmp_path / "m" / "couplings.json").read_text())
    back = Coupling.from_json(json.dumps(couplings[1]))
    np.testing.assert_array_equal(back.plan, res.couplings[1].plan)
    assert (tmp_path / "m" / "aligned_view2.csv").exists()


def test_svg_is_well_formed(tmp_path, rng):
    Y = rng.normal(size=(30, 2))
    scatter_svg(tmp_path / "a.svg", Y, color=Y[:, 0], title="demo")
    root = ET.parse(tmp_path / "a.svg").getroot()
    circles = [el for el in root.iter() if el.tag.endswith("circle")]
    assert len(circles) == 30
    scatter_svg(tmp_path / "b.svg", rng.normal(size=(5, 1)))
    scatter_svg(tmp_path / "c.svg", np.zeros((4, 2)), color=np.zeros(4))
    ET.parse(tmp_path / "c.svg")
    assert isinstance(Embedding(Y), Embedding)
