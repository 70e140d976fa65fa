"""Scenario file validation."""

import json

import pytest

from zrsim import ScenarioError
from zrsim.scenario import load_scenario, parse_scenario

GRID = [round(k / 10, 1) for k in range(11)]


def base_doc() -> dict:
    return {
        "market": {
            "n_cps": 2,
            "n_isps": 2,
            "alpha": 0.5,
            "c": 0.5,
            "q": [0.4, 1.0],
            "delta": [1.0, 1.0],
            "phi": [0.1, 0.4, 0.4, 0.1],
            "psi": [0.2, 0.4, 0.4],
        },
        "price_grid": [GRID, GRID],
        "mode": "fixed-delta",
    }


def test_valid_document_parses():
    scenario = parse_scenario(base_doc())
    assert scenario.config.n_cps == 2
    assert scenario.mode == "fixed-delta"
    assert scenario.price_grid[0][3] == 0.3
    assert scenario.output_names["grid"] == "grid.csv"


def test_unknown_top_level_key_rejected():
    doc = base_doc()
    doc["plots"] = True
    with pytest.raises(ScenarioError, match="plots"):
        parse_scenario(doc)


def test_unknown_market_key_rejected():
    doc = base_doc()
    doc["market"]["gamma"] = 1.0
    with pytest.raises(ScenarioError, match="gamma"):
        parse_scenario(doc)


def test_explicit_price_vector_rejected():
    doc = base_doc()
    doc["market"]["p"] = [0.5, 0.5]
    with pytest.raises(ScenarioError, match="price_grid"):
        parse_scenario(doc)


def test_empty_price_axis_rejected():
    doc = base_doc()
    doc["price_grid"] = [GRID, []]
    with pytest.raises(ScenarioError, match="price_grid"):
        parse_scenario(doc)


def test_share_sum_violation_rejected():
    doc = base_doc()
    doc["market"]["phi"] = [0.1, 0.4, 0.4, 0.2]
    with pytest.raises(ScenarioError, match="phi"):
        parse_scenario(doc)


def test_delta_grid_needs_discount_mode():
    doc = base_doc()
    doc["delta_grid"] = [0.5, 1.0]
    with pytest.raises(ScenarioError, match="delta_grid"):
        parse_scenario(doc)
    doc["mode"] = "discount-game"
    assert parse_scenario(doc).delta_grid == (0.5, 1.0)


def test_expected_no_zre_shape_checked():
    doc = base_doc()
    doc["expected_no_zre"] = [[0.3, 0.3], [0.3]]
    with pytest.raises(ScenarioError, match="expected_no_zre"):
        parse_scenario(doc)
    doc["expected_no_zre"] = [[0.3, 0.3]]
    assert parse_scenario(doc).expected_no_zre == ((0.3, 0.3),)


def test_output_names_override():
    doc = base_doc()
    doc["output"] = {"grid": "cells.csv"}
    scenario = parse_scenario(doc)
    assert scenario.output_names["grid"] == "cells.csv"
    assert scenario.output_names["summary"] == "summary.json"
    doc["output"] = {"plots": "x.png"}
    with pytest.raises(ScenarioError, match="output.plots"):
        parse_scenario(doc)


def test_load_reports_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "market": [,]\n}\n', encoding="utf-8")
    with pytest.raises(ScenarioError, match="line 2"):
        load_scenario(path)


def test_load_reports_key_line(tmp_path):
    doc = base_doc()
    doc["market"]["alpha"] = 3.0
    path = tmp_path / "bad_alpha.json"
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    with pytest.raises(ScenarioError, match=r"alpha.*line \d+"):
        load_scenario(path)


def test_missing_file():
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario("/nonexistent/path.json")


def test_bundled_scenarios_all_valid():
    from importlib import resources

    names = []
    for entry in resources.files("zrsim.scenarios").iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name)
            parse_scenario(json.loads(entry.read_text(encoding="utf-8")))
    assert len(names) == 10
