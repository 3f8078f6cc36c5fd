# tests/test_schemas.py - Input payload validation

import pytest

from upg_kolchin.config.settings import OutputFormat, RunConfig
from upg_kolchin.models.schemas import (AutomorphismInput, GraphInput, KolchinInput,
                                        RunConfigInput, TriangularInput, parse_input)
from upg_kolchin.utils.error_handler import InputValidationError, NotClosed

H_GENERATOR = {"images": ["a", "ba"], "inverse_images": ["a", "bA"]}


def problems_of(model, payload):
    with pytest.raises(InputValidationError) as info:
        parse_input(model, payload)
    return info.value.details["problems"]


@pytest.mark.unit
class TestAutomorphismInput:

    def test_valid(self, h):
        assert parse_input(AutomorphismInput, H_GENERATOR).to_automorphism() == h

    def test_symbol_outside_rank(self):
        problems = problems_of(AutomorphismInput, {"images": ["a", "bc"], "inverse_images": ["a", "bC"]})
        assert any("'c'" in p for p in problems)

    def test_count_mismatch(self):
        problems_of(AutomorphismInput, {"rank": 3, "images": ["a", "b"], "inverse_images": ["a", "b"]})

    def test_extra_key(self):
        problems = problems_of(AutomorphismInput, dict(H_GENERATOR, inverse=["a", "bA"]))
        assert any(p.startswith("inverse") for p in problems)

    def test_empty_word_spellings(self):
        parsed = parse_input(AutomorphismInput, {"images": ["1"], "inverse_images": ["ε"]})
        assert parsed.images == ["1"]


@pytest.mark.unit
class TestRunConfigInput:

    def test_apply(self, run_config):
        config = RunConfigInput(window=30, format="text").apply(run_config)
        assert config.window == 30
        assert config.margin == run_config.margin
        assert config.output_format is OutputFormat.text

    def test_unset_keeps_base(self):
        base = RunConfig(window=12, output_format="text")
        assert RunConfigInput().apply(base) == base

    def test_nonpositive(self):
        problems = problems_of(RunConfigInput, {"window": 0})
        assert problems[0].startswith("window")


@pytest.mark.unit
class TestGraphInput:

    def theta(self, **changes):
        payload = {
            "rank": 2,
            "vertices": [0, 1],
            "edges": [
                {"id": 1, "origin": 0, "terminus": 1},
                {"id": 2, "origin": 0, "terminus": 1, "marking": "a"},
                {"id": 3, "origin": 0, "terminus": 1, "marking": "b", "length": "1/2"},
            ],
            "tree": [1],
        }
        payload.update(changes)
        return payload

    def test_to_graph(self):
        graph = parse_input(GraphInput, self.theta()).to_graph()
        assert sorted(graph.edges) == [1, 2, 3]
        assert graph.tree == frozenset({1})
        assert str(graph.lengths[3]) == "1/2"

    def test_bad_length(self):
        payload = self.theta()
        payload["edges"][2]["length"] = "0"
        problems = problems_of(GraphInput, payload)
        assert any("positive rational" in p for p in problems)

    def test_dangling_edge(self):
        payload = self.theta()
        payload["edges"][0]["terminus"] = 7
        problems_of(GraphInput, payload)

    def test_unknown_tree_edge(self):
        problems_of(GraphInput, self.theta(tree=[9]))


@pytest.mark.unit
class TestTriangularInput:

    def test_rose_default(self, h_map):
        parsed = parse_input(TriangularInput, {"suffixes": {"b": "a"}})
        assert parsed.to_map(2) == h_map

    def test_order_must_be_complete(self):
        parsed = parse_input(TriangularInput, {"order": ["a"]})
        with pytest.raises(InputValidationError):
            parsed.to_map(2)

    def test_unknown_edge_name(self):
        parsed = parse_input(TriangularInput, {"suffixes": {"z": "a"}})
        with pytest.raises(InputValidationError):
            parsed.to_map(2)

    def test_suffix_must_be_closed(self):
        graph = TestGraphInput().theta()
        parsed = parse_input(TriangularInput, {"graph": graph, "suffixes": {"c": "A"}})
        with pytest.raises(NotClosed):
            parsed.to_map(2)


@pytest.mark.unit
class TestKolchinInput:

    def test_full_payload(self, h):
        parsed = parse_input(KolchinInput, {
            "rank": 2,
            "generators": [dict(H_GENERATOR, triangular={"suffixes": {"b": "a"}})],
            "config": {"window": 20},
            "free_factor_system": [["a"]],
        })
        assert parsed.automorphisms() == [h]
        assert set(parsed.supplied_maps()) == {0}
        assert parsed.run_config(RunConfig()).window == 20
        assert parsed.initial_system().complexity().ranks == (1,)

    def test_defaults(self, run_config):
        parsed = parse_input(KolchinInput, {"rank": 2, "generators": [H_GENERATOR]})
        assert parsed.supplied_maps() == {}
        assert parsed.initial_system() is None
        assert parsed.run_config(run_config) is run_config

    def test_generator_rank(self):
        problems = problems_of(KolchinInput, {"rank": 3, "generators": [H_GENERATOR]})
        assert any("generator 1" in p for p in problems)

    def test_factor_symbols(self):
        problems_of(KolchinInput, {"rank": 2, "generators": [H_GENERATOR],
                                   "free_factor_system": [["c"]]})

    def test_no_generators(self):
        problems_of(KolchinInput, {"rank": 2, "generators": []})
