from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dsom.dataset import Dataset
from dsom.diagnostics import ConvergenceReport, kde_grid, leakage
from dsom.errors import InvalidArgumentError, ParseError, SchemaError, UnsupportedFormatError
from dsom.io import CsvSchema, load_csv, load_ply, save_csv, save_ply
from dsom.sampler import SamplerConfig, sample


def write(tmp_path, name, text, mode="w"):
    p = tmp_path / name
    if mode == "wb":
        p.write_bytes(text)
    else:
        p.write_text(text, encoding="utf-8")
    return p


# CSV reading


def test_header_csv(tmp_path):
    ds = load_csv(write(tmp_path, "a.csv", "x,y\n1.0,2.0\n3.0,4.0"))
    assert ds.labels() == ("x", "y")
    assert ds.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_scientific_notation_without_header(tmp_path):
    ds = load_csv(write(tmp_path, "a.csv", "1e-3,2E+4\n"))
    assert ds.column_labels is None
    assert ds.values.tolist() == [[0.001, 20000.0]]


@pytest.mark.parametrize("cell", ["-0.5", "+3", ".25", "5.", "1.5e-300", " 2 "])
def test_accepted_cells(tmp_path, cell):
    load_csv(write(tmp_path, "a.csv", f"{cell},1\n"))


def test_ragged_row_reports_line(tmp_path):
    with pytest.raises(ParseError, match="line 3"):
        load_csv(write(tmp_path, "a.csv", "a,b\n1,2\n3\n"))


@pytest.mark.parametrize("cell", ["abc", "nan", "inf", "1,5", "0x10", "1e400"])
def test_bad_cell_reports_row_and_column(tmp_path, cell):
    text = f"a,b\n1,2\n3,\"{cell}\"\n"
    with pytest.raises(ParseError, match=r"line 3, column 2"):
        load_csv(write(tmp_path, "a.csv", text))


def test_empty_file(tmp_path):
    with pytest.raises(InvalidArgumentError):
        load_csv(write(tmp_path, "a.csv", ""))


def test_header_only(tmp_path):
    with pytest.raises(InvalidArgumentError):
        load_csv(write(tmp_path, "a.csv", "a,b\n"))


def test_schema_hints(tmp_path):
    p = write(tmp_path, "a.csv", "1;2\n3;4\n")
    assert load_csv(p, CsvSchema(delimiter=";")).shape == (2, 2)
    with pytest.raises(ParseError):
        load_csv(p, CsvSchema(delimiter=";", columns=3))
    with pytest.raises(InvalidArgumentError):
        CsvSchema(delimiter="::")


def test_forced_header_flag(tmp_path):
    p = write(tmp_path, "a.csv", "1,2\n3,4\n")
    ds = load_csv(p, CsvSchema(has_header=True))
    assert ds.labels() == ("1", "2") and ds.shape == (1, 2)


def test_crlf_input(tmp_path):
    p = write(tmp_path, "a.csv", b"x,y\r\n1,2\r\n", mode="wb")
    assert load_csv(p).values.tolist() == [[1.0, 2.0]]


# CSV writing


def test_single_value_file(tmp_path):
    p = tmp_path / "o.csv"
    save_csv(Dataset(np.array([[0.5]])), p)
    assert p.read_bytes() == b"c1\n0.5\n"


def test_report_schema(tmp_path):
    p = tmp_path / "r.csv"
    save_csv(ConvergenceReport([2, 10], [0.5, 0.25], [0.125, 0.0]), p)
    assert p.read_text() == "n,conv1,conv2\n2,0.5,0.125\n10,0.25,0.0\n"


def test_density_grid_long_form(tmp_path):
    g = kde_grid(np.random.default_rng(0).normal(size=(50, 2)), grid=(3, 4))
    p = tmp_path / "k.csv"
    save_csv(g, p)
    back = load_csv(p)
    assert back.labels() == ("x", "y", "density")
    assert back.shape == (12, 3)
    assert np.array_equal(back.values[:, 2].reshape(3, 4), g.density)
    assert np.array_equal(back.values[::4, 0], g.x_edges)
    assert np.array_equal(back.values[:4, 1], g.y_edges)


def test_simulated_set_and_provenance(tmp_path, ring):
    sim = sample(ring, SamplerConfig(k=3, gamma=1, threshold=0, n_samples=20, seed=1), provenance=True)
    save_csv(sim, tmp_path / "s.csv")
    save_csv(sim.provenance, tmp_path / "p.csv")
    assert np.array_equal(load_csv(tmp_path / "s.csv").values, sim.values)
    prov = load_csv(tmp_path / "p.csv")
    assert prov.labels()[:2] == ("pivot", "idx1")
    assert np.array_equal(prov.values[:, 1:4].astype(int), sim.provenance.indices)
    assert np.array_equal(prov.values[:, 4:], sim.provenance.weights)


def test_leakage_report_csv(tmp_path, ring):
    save_csv(leakage(ring, ring.values[:10]), tmp_path / "l.csv")
    assert load_csv(tmp_path / "l.csv").labels() == ("level", "sim_nn_distance", "data_nn_distance")


def test_unsupported_object(tmp_path):
    with pytest.raises(InvalidArgumentError):
        save_csv({"a": 1}, tmp_path / "x.csv")


def test_write_failure_names_path(tmp_path):
    target = tmp_path / "missing_dir" / "x.csv"
    with pytest.raises(OSError, match="missing_dir"):
        save_csv(Dataset(np.zeros((1, 1))), target)


def test_roundtrip_random_matrices(tmp_path):
    rng = np.random.default_rng(123)
    p = tmp_path / "rt.csv"
    for i in range(1000):
        shape = tuple(rng.integers(1, 8, size=2))
        kind = i % 4
        if kind == 0:
            v = rng.normal(size=shape)
        elif kind == 1:
            v = rng.normal(size=shape) * 10.0 ** rng.integers(-300, 300, size=shape)
        elif kind == 2:
            v = rng.integers(-(2**53), 2**53, size=shape).astype(float)
        else:
            v = rng.uniform(size=shape).view(np.uint64)
            v = (v ^ rng.integers(0, 2**62, size=shape, dtype=np.uint64)).view(np.float64)
            v[~np.isfinite(v)] = 1.0
        save_csv(Dataset(v), p)
        assert load_csv(p).values.tobytes() == np.ascontiguousarray(v).tobytes()


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=st.floats(allow_nan=False, allow_infinity=False)))
@settings(max_examples=200, deadline=None)
def test_roundtrip_property(tmp_path_factory, v):
    p = tmp_path_factory.mktemp("rt") / "v.csv"
    save_csv(Dataset(v), p)
    back = load_csv(p).values
    # Signed zeros survive too.
    assert back.tobytes() == np.ascontiguousarray(v).tobytes()


def test_ring_save_load_idempotent(tmp_path, ring):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    save_csv(ring, a)
    save_csv(load_csv(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert load_csv(b).labels() == ("z1", "z2")


# PLY


PLY_HEAD = "ply\nformat ascii 1.0\n"


def test_minimal_ply(tmp_path):
    p = write(tmp_path, "m.ply", PLY_HEAD + "element vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n")
    ds = load_ply(p)
    assert ds.shape == (1, 3) and np.all(ds.values == 0)


def test_ply_with_face_and_extras(tmp_path):
    text = (
        PLY_HEAD
        + "comment test\nelement vertex 3\nproperty double x\nproperty uchar red\nproperty float y\n"
        + "property list uchar int tags\nproperty float z\n"
        + "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
        + "1 255 2 2 7 8 3\n4 0 5 0 6\n7 1 8 1 9 9\n3 0 1 2\n"
    )
    ds = load_ply(write(tmp_path, "f.ply", text))
    assert ds.values.tolist() == [[1, 2, 3], [4, 5, 6], [7, 8, 9]]


def test_ply_element_order_face_first(tmp_path):
    text = (
        PLY_HEAD + "element face 1\nproperty list uchar int vertex_indices\n"
        + "element vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
        + "3 0 1 1\n1 2 3\n4 5 6\n"
    )
    assert load_ply(write(tmp_path, "o.ply", text)).values.tolist() == [[1, 2, 3], [4, 5, 6]]


@pytest.mark.parametrize("fmt", ["binary_little_endian", "binary_big_endian"])
def test_binary_ply_rejected(tmp_path, fmt):
    text = f"ply\nformat {fmt} 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
    with pytest.raises(UnsupportedFormatError, match=fmt):
        load_ply(write(tmp_path, "b.ply", text))


@pytest.mark.parametrize(
    "props",
    [
        "property float x\nproperty float y\n",
        "property float x\nproperty float y\nproperty int z\n",
        "property float x\nproperty float y\nproperty list uchar float z\n",
    ],
)
def test_ply_schema_errors(tmp_path, props):
    text = PLY_HEAD + "element vertex 1\n" + props + "end_header\n0 0 0\n"
    with pytest.raises(SchemaError):
        load_ply(write(tmp_path, "s.ply", text))


@pytest.mark.parametrize("body", ["1 2 3\n", "1 2 3\n4 5 6\n7 8 9\n10 11 12\n"])
def test_ply_count_mismatch(tmp_path, body):
    text = PLY_HEAD + "element vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n" + body
    with pytest.raises(ParseError, match="count mismatch"):
        load_ply(write(tmp_path, "c.ply", text))


def test_ply_bad_value(tmp_path):
    text = PLY_HEAD + "element vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 a 3\n"
    with pytest.raises(ParseError, match="line 8"):
        load_ply(write(tmp_path, "v.ply", text))


def test_ply_not_a_ply(tmp_path):
    with pytest.raises(ParseError):
        load_ply(write(tmp_path, "n.ply", "hello\n"))


def test_ply_roundtrip(tmp_path):
    v = np.random.default_rng(1).normal(size=(30, 3))
    save_ply(v, tmp_path / "r.ply", comment="roundtrip")
    assert np.array_equal(load_ply(tmp_path / "r.ply").values, v)
    with pytest.raises(InvalidArgumentError):
        save_ply(np.zeros((3, 2)), tmp_path / "bad.ply")


def test_spider_fixture(fixtures_dir):
    ds = load_ply(fixtures_dir / "spider.ply")
    assert ds.shape == (5000, 3)
    lines = (fixtures_dir / "spider.ply").read_text().splitlines()
    start = lines.index("end_header") + 1
    first = [float(x) for x in lines[start].split()]
    last = [float(x) for x in lines[start + 4999].split()]
    assert ds.values[0].tolist() == first
    assert ds.values[-1].tolist() == last
