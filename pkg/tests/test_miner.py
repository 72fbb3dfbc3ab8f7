import json

import pytest

from ltgconvex.cli import cmd_check
from ltgconvex.finite import FiniteSpace, pseudocircle, wrap_map
from ltgconvex.miner import TARGETS, MinerConfig, double_covers, mine
from ltgconvex.posets import is_isomorphic


def test_c2_fails_minimal_size_four_pseudocircle_first():
    gal = mine(MinerConfig(max_points=5, target_property="C2-fails"))
    assert gal["minimal_size"] == 4
    first = FiniteSpace.from_dict(gal["gallery"][0]["instance"])
    assert is_isomorphic(first, pseudocircle())
    assert all(e["points"] == 4 for e in gal["gallery"])


def test_filtered_fails_gives_degree_two_wrap():
    gal = mine(MinerConfig(max_points=4, target_property="filtered-fails-for-local-homeo"))
    assert gal["minimal_size"] == 4 and len(gal["gallery"]) == 1
    doc = gal["gallery"][0]["instance"]
    src = FiniteSpace.from_dict(doc["source"])
    assert is_isomorphic(src, wrap_map(2, 4).source)
    assert is_isomorphic(FiniteSpace.from_dict(doc["target"]), pseudocircle())


@pytest.mark.parametrize("target", ["closure-convexity", "punctured-interval", "interval-order"])
def test_true_statements_give_empty_gallery(target):
    gal = mine(MinerConfig(max_points=6, target_property=target))
    assert gal["gallery"] == [] and gal["minimal_size"] is None
    assert gal["examined"] == gal["instances"]


def test_etale_disjointness_minimal_fold():
    gal = mine(MinerConfig(max_points=3, target_property="etale-disjointness"))
    assert gal["minimal_size"] == 3
    assert gal["gallery"][0]["witness"]["overlap"]


def test_double_covers_of_pseudocircle():
    covers = list(double_covers(pseudocircle()))
    assert len(covers) == 1
    assert covers[0].is_local_homeomorphism() and not covers[0].is_filtered()


@pytest.mark.parametrize("cfg", [
    dict(max_points=8), dict(max_points=0), dict(target_property="nope"), dict(seed=-1), dict(budget=-1),
])
def test_bad_config(cfg):
    with pytest.raises(ValueError):
        MinerConfig(**cfg)


def test_budget_sampling_is_seeded():
    a = mine(MinerConfig(max_points=5, target_property="C2-fails", seed=7, budget=20))
    b = mine(MinerConfig(max_points=5, target_property="C2-fails", seed=7, budget=20))
    assert a == b and a["examined"] <= 20


def test_workers_do_not_change_gallery():
    cfg = MinerConfig(max_points=5, target_property="C2-fails")
    assert mine(cfg, max_workers=1) == mine(cfg, max_workers=2)


@pytest.mark.parametrize("target, size", [
    ("C2-fails", 4), ("filtered-fails-for-local-homeo", 4), ("etale-disjointness", 3),
])
def test_gallery_witnesses_recheck(tmp_path, capsys, target, size):
    gal = mine(MinerConfig(max_points=size, target_property=target))
    assert gal["gallery"]
    for k, entry in enumerate(gal["gallery"]):
        path = tmp_path / f"w{k}.json"
        path.write_text(json.dumps(entry["instance"]), encoding="utf-8")
        for chk in entry["checks"]:
            assert cmd_check(path, chk["check"]) == chk["expect"]
    capsys.readouterr()


def test_every_target_registered():
    assert set(TARGETS) == {"C2-fails", "filtered-fails-for-local-homeo", "closure-convexity",
                            "etale-disjointness", "punctured-interval", "interval-order"}
