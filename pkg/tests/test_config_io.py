import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oscgate.config import load_config, parse_config
from oscgate.errors import ConfigError, InvalidInputError
from oscgate.io import atomic_write, csv_text, read_matrix, write_curve, write_json, write_matrix

keys = st.from_regex(r"[a-z_][a-z0-9_]{0,6}(\.[a-z_][a-z0-9_]{0,6}){0,2}", fullmatch=True)
values = st.from_regex(r"[A-Za-z0-9_.,+\-]{1,12}", fullmatch=True)


def test_parse_basic():
    cfg = parse_config("# comment\n\ngrid.T = 1.5\nsweep.T = 0.5, 1, 2\nname=frac\n")
    assert cfg.get_float("grid.T") == 1.5
    assert cfg.get_list("sweep.T", increasing=True) == [0.5, 1.0, 2.0]
    assert cfg.get_str("name", choices=["frac"]) == "frac"
    assert cfg.get_int("missing", 7) == 7
    assert cfg.lines["sweep.T"] == 4
    assert cfg.section("grid") == {"T": "1.5"}


@pytest.mark.parametrize(
    "text, line, field",
    [
        ("a = 1\nnot a pair\n", 2, None),
        ("a = 1\na = 2\n", 2, "a"),
        ("9x = 1\n", 1, "9x"),
        ("a =\n", 1, "a"),
    ],
)
def test_parse_errors_name_line_and_field(text, line, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.field == field


def test_typed_access_errors():
    cfg = parse_config("x = abc\ny = -1\nz = 1, 1\nw = inf\nn = 1.5\n")
    with pytest.raises(ConfigError, match="x"):
        cfg.get_float("x")
    with pytest.raises(ConfigError) as info:
        cfg.get_float("y", positive=True)
    assert info.value.line == 2 and info.value.field == "y"
    with pytest.raises(ConfigError):
        cfg.get_float("y", nonneg=True)
    with pytest.raises(ConfigError):
        cfg.get_list("z", increasing=True)
    with pytest.raises(ConfigError):
        cfg.get_float("w")
    with pytest.raises(ConfigError):
        cfg.get_int("n")
    with pytest.raises(ConfigError):
        cfg.get_str("x", choices=["a"])


@given(st.dictionaries(keys, values, max_size=8))
def test_render_roundtrip(d):
    cfg = parse_config("".join(f"{k} = {v}\n" for k, v in d.items()))
    again = parse_config(cfg.render())
    assert again.values == cfg.values == d


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_atomic_write_leaves_no_temporaries(tmp_path):
    p = atomic_write(tmp_path / "sub" / "f.txt", "a\nb\n")
    assert p.read_bytes() == b"a\nb\n"
    atomic_write(p, "c\n")
    assert p.read_text() == "c\n"
    assert sorted(x.name for x in p.parent.iterdir()) == ["f.txt"]


def test_csv_text_formatting():
    txt = csv_text(["a", "b", "c"], [[1, 0.1, True], [np.int64(2), np.float64(1e-20), "x"]])
    assert txt == "a,b,c\n1,0.1,true\n2,1e-20,x\n"
    with pytest.raises(InvalidInputError):
        csv_text(["a"], [[1, 2]])


def test_curve_json(tmp_path):
    p = write_curve(tmp_path / "c.csv", ["T", "v"], [[1.0, 2.0], [3.0, 4.0]], fmt="json")
    assert p.suffix == ".json"
    assert json.loads(p.read_text()) == {"T": [1.0, 3.0], "v": [2.0, 4.0]}


@given(st.integers(min_value=1, max_value=5), st.integers(min_value=0, max_value=1000))
def test_matrix_roundtrip_is_bit_exact(n, seed):
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    with tempfile.TemporaryDirectory() as d:
        p = write_matrix(Path(d) / "m.csv", M)
        assert p.read_text().splitlines()[0] == "row,col,re,im"
        assert np.array_equal(read_matrix(p), M)


def test_read_matrix_errors(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("a,b\n")
    with pytest.raises(InvalidInputError):
        read_matrix(p)
    p.write_text("row,col,re,im\n0,0,1,0\n1,1,1,0\n")
    with pytest.raises(InvalidInputError, match="missing"):
        read_matrix(p)
    p.write_text("row,col,re,im\n")
    with pytest.raises(InvalidInputError):
        read_matrix(p)
    np.save(tmp_path / "m.npy", np.eye(2))
    assert np.array_equal(read_matrix(tmp_path / "m.npy"), np.eye(2))


def test_write_json_handles_numpy(tmp_path):
    p = write_json(tmp_path / "r.json", {"z": 1 + 2j, "a": np.array([1.0]), "b": np.bool_(True),
                                         "m": np.eye(2) * 1j, "i": np.int32(3)})
    obj = json.loads(p.read_text())
    assert obj["z"] == {"re": 1.0, "im": 2.0}
    assert obj["m"]["im"] == [[1.0, 0.0], [0.0, 1.0]]
    assert obj["b"] is True and obj["i"] == 3
