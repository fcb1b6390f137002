from io import StringIO
from pathlib import Path

import numpy as np
import pytest

from gfswe.scheme.cases import ConvergenceRow
from gfswe.scheme.outputs import (
    RunSummary,
    convergence_text,
    equilibrium_cache_path,
    load_equilibrium,
    save_equilibrium,
    snapshot_path,
    snapshot_text,
    write_summary,
)
from gfswe.util.exceptions import NonFiniteError
from gfswe.util.fs import put_file, safe_name
from tests.scheme.test_helpers import TmpDirectory

X = np.array([0.5, 1.5])
H = np.array([1.0, 2.0])
Q = np.array([0.0, 2.0])
B = np.array([0.0, 0.5])


def _table(text: str) -> tuple[list[str], np.ndarray]:
    header, _, _ = text.partition("\n")
    return header.split(), np.loadtxt(StringIO(text), skiprows=1, ndmin=2)


def test_snapshot_without_global_flux() -> None:
    text = snapshot_text(X, H, Q, B, None, np.zeros(2), time=0.0)
    names, table = _table(text)
    assert names == ["x", "h", "q", "u", "b", "eta", "pert"]
    assert table.shape == (2, 7)
    np.testing.assert_array_equal(table[:, 0], X)
    np.testing.assert_array_equal(table[:, 3], [0.0, 1.0])
    np.testing.assert_array_equal(table[:, 5], [1.0, 2.5])
    np.testing.assert_array_equal(table[:, 6], [0.0, 0.0])


def test_snapshot_with_global_flux() -> None:
    k = np.array([0.5, 4.0])
    names, table = _table(snapshot_text(X, H, Q, B, k, np.array([1e-4, -2e-5]), time=0.5))
    assert names == ["x", "h", "q", "u", "b", "eta", "K", "pert"]
    assert table.shape == (2, 8)
    np.testing.assert_array_equal(table[:, 6], k)
    np.testing.assert_array_equal(table[:, 7], [1e-4, -2e-5])


def test_snapshot_refuses_non_finite_values() -> None:
    with pytest.raises(NonFiniteError) as e:
        snapshot_text(X, np.array([1.0, np.nan]), Q, B, None, np.zeros(2), time=2.0)
    assert e.value.cell == 1
    assert e.value.time == 2.0


def test_convergence_text() -> None:
    rows = [
        ConvergenceRow(n_cells=10, l2_h=1e-2, eoa_h=None, l2_q=0.0, eoa_q=None),
        ConvergenceRow(n_cells=20, l2_h=2.5e-3, eoa_h=2.0, l2_q=0.0, eoa_q=None),
    ]
    assert convergence_text(rows).splitlines() == [
        "N_e L2(h) EOA(h) L2(q) EOA(q)",
        "10 1.0000e-02 -- 0.0000e+00 --",
        "20 2.5000e-03 2.00 0.0000e+00 --",
    ]


def test_file_names() -> None:
    assert safe_name("a/b", 1) == "a-b_1"
    path = snapshot_path(Path("out"), "lake_at_rest", "gf_wb", 5, 100, "t0.5000")
    assert path == Path("out/lake_at_rest_gf_wb_p5_N100_t0.5000.dat")
    cache = equilibrium_cache_path(Path("out"), "subcritical", "gf_wb", 3, 50)
    assert cache == Path("out/equilibrium_subcritical_gf_wb_p3_N50.msgpack")


def test_summary_file() -> None:
    summary = RunSummary(
        case="lake_at_rest", scheme="gf_wb", order=5, cells=25, final_time=1.0, steps=11, steady_reached=False
    )
    with TmpDirectory(prefix="/tmp") as tmp_path:
        path = write_summary(tmp_path / "nested" / "summary.json", summary)
        assert RunSummary.model_validate_json(path.read_text()) == summary


def test_equilibrium_cache() -> None:
    meta = {"case": "subcritical", "scheme": "gf_wb", "order": 3, "n_cells": 3}
    h = np.array([2.0, 1.9, 2.0])
    q = np.full(3, 4.42)
    with TmpDirectory(prefix="/tmp") as tmp_path:
        path = tmp_path / "eq.msgpack"
        assert load_equilibrium(path, meta) is None
        assert save_equilibrium(path, meta, h, q)

        cached = load_equilibrium(path, meta)
        assert cached is not None
        np.testing.assert_array_equal(cached[0], h)
        np.testing.assert_array_equal(cached[1], q)

        assert load_equilibrium(path, {**meta, "order": 5}) is None
        assert load_equilibrium(path, {**meta, "n_cells": 4}) is None

        assert put_file(b"\x92\x01", path)
        assert load_equilibrium(path, meta) is None


def test_put_file_replaces_without_leftovers() -> None:
    with TmpDirectory(prefix="/tmp") as tmp_path:
        path = tmp_path / "sub" / "data.txt"
        assert put_file("first", path)
        assert put_file(b"second", path)
        assert path.read_text() == "second"
        assert [p.name for p in path.parent.iterdir()] == ["data.txt"]


def test_put_file_reports_unwritable_paths() -> None:
    with TmpDirectory(prefix="/tmp") as tmp_path:
        blocker = tmp_path / "plain"
        assert put_file("x", blocker)
        assert not put_file("y", blocker / "child.txt")
        assert [p.name for p in tmp_path.iterdir()] == ["plain"]
        assert blocker.read_text() == "x"
