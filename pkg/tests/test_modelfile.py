import json

import numpy as np
import pytest
from hypothesis import given, settings

from treeising import params as P
from treeising.errors import ModelFileError
from treeising.model import MeanParamIsing
from treeising.modelfile import dump_model, dumps_model, load_model, loads_model, parse_model, save_model
from treeising.tree import binary_tree

from .helpers import models


def base():
    return {
        "parameterization": "mean",
        "vertices": ["a", "b", "c"],
        "edges": [["a", "b", 0.5], ["b", "c", 0.2]],
        "q": 0.3,
    }


class TestParse:
    def test_scalar_and_map(self):
        m = parse_model(base())
        assert np.all(m.q == 0.3) and m.alpha.tolist() == [0.5, 0.2]
        doc = base()
        doc["q"] = {"a": 0.1, "b": 0.2, "c": 0.3}
        doc["root"] = "c"
        m = parse_model(doc)
        assert m.q.tolist() == [0.1, 0.2, 0.3] and m.rt.root == 2

    def test_default_kind_is_mean(self):
        doc = base()
        del doc["parameterization"]
        assert P.kind_of(parse_model(doc)) == "mean"

    def test_inadmissible_is_loaded_unchecked(self):
        doc = base()
        doc["edges"][0][2] = -0.9
        m = parse_model(doc)
        from treeising.model import validate

        assert not validate(m).ok

    @pytest.mark.parametrize(
        "mutate, where",
        [
            (lambda d: d.update(extra=1), "extra"),
            (lambda d: d.update(parameterization="polar"), "parameterization"),
            (lambda d: d.update(vertices=[]), "vertices"),
            (lambda d: d["edges"].append(["c", "a", 0.1]), "edges"),
            (lambda d: d["edges"][0].pop(), "edges[0]"),
            (lambda d: d["edges"][1].__setitem__(2, "x"), "edges[1]"),
            (lambda d: d.pop("q"), "q"),
            (lambda d: d.update(q={"a": 0.1, "b": 0.2}), "q"),
            (lambda d: d.update(q={"a": 0.1, "b": 0.2, "c": 0.3, "z": 0.4}), "q.z"),
            (lambda d: d.update(root="z"), "root"),
        ],
    )
    def test_errors_name_the_field(self, mutate, where):
        doc = base()
        mutate(doc)
        with pytest.raises(ModelFileError) as e:
            parse_model(doc)
        assert where in e.value.location

    def test_syntax_error_location(self):
        with pytest.raises(ModelFileError) as e:
            loads_model('{\n  "q": 0.1,\n  oops\n}')
        assert e.value.location.startswith("line 3")

    def test_centered_domain(self):
        doc = base()
        doc["parameterization"] = "centered"
        doc.pop("q")
        doc["kappa"] = 1.5
        with pytest.raises(ModelFileError):
            parse_model(doc)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError):
            load_model(tmp_path / "missing.json")


class TestRoundTrip:
    @settings(max_examples=25)
    @given(models(1, 9))
    def test_mean(self, m):
        back = loads_model(dumps_model(m))
        assert np.array_equal(back.q, m.q) and np.array_equal(back.alpha, m.alpha)
        assert back.rt.root == m.rt.root
        assert back.tree.edges == m.tree.edges

    @pytest.mark.parametrize("kind", ["natural", "canonical", "centered"])
    def test_exponential(self, kind, tmp_path):
        m = MeanParamIsing.on(binary_tree(), 0.2, 0.5)
        x = P.convert(m, kind)
        path = tmp_path / "x.json"
        save_model(x, path)
        y = load_model(path)
        assert P.kind_of(y) == kind
        assert y.table().max_abs_diff(x.table()) == 0
        assert json.loads(path.read_text())["log_normalizer"] == pytest.approx(P.log_normalizer(x))

    def test_labels_preserved(self):
        doc = dump_model(MeanParamIsing.on(binary_tree(), 0.2, 0.5))
        assert doc["vertices"] == [str(i) for i in range(1, 8)]
        assert doc["edges"][0][:2] == ["1", "2"]
