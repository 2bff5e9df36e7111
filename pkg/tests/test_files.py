from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kuramoto_eq.dynamics import integrate_km, propagate_analytical
from kuramoto_eq.files import (
    FormatError,
    atomic_write_text,
    long_form_csv,
    read_matrix,
    read_phases,
    sha256_file,
    trajectory_csv,
    write_manifest,
    write_matrix,
    write_phases,
)
from kuramoto_eq.graphs import AdjacencyMatrix, GraphFlags, build_erdos_renyi, build_ring

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(arrays(np.float64, (4, 4), elements=finite))
@settings(suppress_health_check=[HealthCheck.function_scoped_fixture], max_examples=30)
def test_matrix_round_trip_is_bit_exact(tmp_path, a):
    A = AdjacencyMatrix(a, GraphFlags(zero_diagonal=False))
    path = tmp_path / "m.csv"
    write_matrix(path, A)
    back = read_matrix(path)
    assert back.entries.tobytes() == A.entries.tobytes()
    assert back.flags == A.flags


def test_sidecar_records_provenance(tmp_path):
    A = build_erdos_renyi(8, 0.5, 42)
    write_matrix(tmp_path / "er.csv", A)
    meta = json.loads((tmp_path / "er.json").read_text())
    assert meta["generator"] == "er" and meta["seed"] == 42 and meta["n"] == 8
    assert meta["flags"] == {"symmetric": True, "circulant": False, "zero_diagonal": True}
    assert read_matrix(tmp_path / "er.csv") == A


def test_flags_inferred_without_sidecar(tmp_path):
    (tmp_path / "m.csv").write_text("0,1,1\n1,0,1\n1,1,0\n")
    A = read_matrix(tmp_path / "m.csv")
    assert A.flags == GraphFlags(symmetric=True, circulant=True, zero_diagonal=True)


def test_contradicting_sidecar_is_a_format_error(tmp_path):
    write_matrix(tmp_path / "m.csv", build_ring(5, 1))
    (tmp_path / "m.csv").write_text("0,1,0,0,0\n1,0,1,0,1\n0,1,0,1,0\n0,0,1,0,1\n1,0,0,1,0\n")
    with pytest.raises(FormatError, match="contradict"):
        read_matrix(tmp_path / "m.csv")


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("0,1\n1,x\n", 2, 2),
        ("0,1\n1\n", 2, 1),
        ("0,nan\n1,0\n", 1, 2),
    ],
)
def test_malformed_matrix_reports_position(tmp_path, text, line, col):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(FormatError) as info:
        read_matrix(p)
    assert (info.value.line, info.value.column) == (line, col)
    assert str(info.value).startswith(f"{p}:{line}:{col}:")


def test_phases_row_or_column(tmp_path):
    theta = np.array([0.1, -2.5, 3.0])
    write_phases(tmp_path / "col.csv", theta)
    assert np.array_equal(read_phases(tmp_path / "col.csv"), theta)
    (tmp_path / "row.csv").write_text("0.1,-2.5,3.0\n")
    assert np.array_equal(read_phases(tmp_path / "row.csv"), theta)
    (tmp_path / "grid.csv").write_text("1,2\n3,4\n")
    with pytest.raises(FormatError):
        read_phases(tmp_path / "grid.csv")


def test_atomic_write_leaves_no_temp_files(tmp_path):
    atomic_write_text(tmp_path / "sub" / "f.txt", "hello")
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["f.txt"]


def test_trajectory_csv_columns():
    A = build_ring(5, 1)
    theta0 = np.zeros(5)
    orig = integrate_km(A, theta0, T=0.02, dt=1e-3)
    text = trajectory_csv(orig, with_order_parameter=True)
    header = text.splitlines()[0].split(",")
    assert header == ["t"] + [f"theta_{i}" for i in range(1, 6)] + ["R"]
    ana = propagate_analytical(A, theta0, times=[0.0, 0.01, 0.02])
    header = trajectory_csv(ana).splitlines()[0].split(",")
    assert header[6:] == [f"absx_{i}" for i in range(1, 6)]


def test_display_frequency_only_changes_output():
    A = build_ring(5, 1)
    tr = integrate_km(A, np.zeros(5), T=0.02, dt=1e-3)
    rows = [r.split(",") for r in trajectory_csv(tr, omega=10.0).splitlines()[1:]]
    assert float(rows[-1][1]) == pytest.approx(0.2)
    assert np.all(tr.phases == 0.0)


def test_long_form_layout():
    tr = integrate_km(build_ring(5, 1), np.zeros(5), T=0.01, dt=1e-3)
    lines = long_form_csv({"original": tr}).splitlines()
    assert lines[0] == "model,t,node,phase"
    assert len(lines) == 1 + len(tr.times) * 5
    assert lines[1].startswith("original,0.0,1,")


def test_manifest_hashes_and_determinism(tmp_path):
    out = tmp_path / "x.csv"
    out.write_text("1\n")
    m1 = write_manifest(tmp_path / "m1.json", "cmd", ["a"], {"k": 1}, outputs=[out]).read_bytes()
    m2 = write_manifest(tmp_path / "m2.json", "cmd", ["a"], {"k": 1}, outputs=[out]).read_bytes()
    assert m1 == m2
    assert json.loads(m1)["outputs"][str(out)] == sha256_file(out)
