import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from femagents.fem import (
    MAGIC,
    FieldFormatError,
    IncomparableFieldsError,
    NodalField,
    compare_fields,
    hole_mask,
    read_field,
    solve_step,
    write_field,
)

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=1000, deadline=None)
@given(
    st.integers(1, 2).flatmap(
        lambda k: st.integers(0, 12).flatmap(
            lambda n: st.tuples(arrays(float, (n, 2), elements=finite), arrays(float, (n, k), elements=finite))
        )
    )
)
def test_field_file_round_trip(tmp_path_factory, data):
    pts, vals = data
    f = NodalField(pts, vals)
    path = tmp_path_factory.mktemp("f") / "field.txt"
    write_field(f, path)
    g = read_field(path)
    assert g == f
    assert np.array_equal(np.signbit(g.values), np.signbit(f.values))


def test_file_layout(tmp_path):
    p = tmp_path / "u.txt"
    write_field(NodalField([[0.0, 1.0]], [[0.5, -0.25]]), p)
    assert p.read_bytes() == f"{MAGIC}\n1 2\n0 1 0.5 -0.25\n".encode()


def test_bad_magic(tmp_path):
    p = tmp_path / "u.txt"
    p.write_text("femagents-field v2\n0 2\n")
    with pytest.raises(FieldFormatError) as ei:
        read_field(p)
    assert ei.value.line == 1


def test_row_count_mismatch_names_line(tmp_path):
    p = tmp_path / "u.txt"
    p.write_text(f"{MAGIC}\n3 1\n0 0 1\n1 0 2\n")
    with pytest.raises(FieldFormatError) as ei:
        read_field(p)
    assert ei.value.line == 5 and ":5:" in str(ei.value)


def test_malformed_row(tmp_path):
    p = tmp_path / "u.txt"
    p.write_text(f"{MAGIC}\n2 1\n0 0 1\n1 0\n")
    with pytest.raises(FieldFormatError) as ei:
        read_field(p)
    assert ei.value.line == 4


def test_compare_identical_is_zero():
    u, _ = solve_step(1, 10)
    assert compare_fields(u, u) == 0.0


def test_compare_scaled_is_one():
    u, _ = solve_step(2, 10)
    twice = NodalField(u.points, 2 * u.values)
    assert compare_fields(twice, u) == pytest.approx(1.0, rel=1e-12)


def test_compare_reads_files(tmp_path):
    u, _ = solve_step(1, 8)
    write_field(u, tmp_path / "a.txt")
    assert compare_fields(tmp_path / "a.txt", u) == 0.0


def test_compare_skips_hole():
    u, _ = solve_step(3, 20)
    assert compare_fields(u, u, exclude=hole_mask()) == 0.0


def test_mostly_disjoint_fields_incomparable():
    pts = np.array([[0, 0], [0.2, 0], [0, 0.2]], dtype=float)
    small = NodalField(pts, np.ones((3, 2)))
    with pytest.raises(IncomparableFieldsError):
        compare_fields(small, small)


def test_component_mismatch():
    u, s = solve_step(4, 6)
    with pytest.raises(IncomparableFieldsError):
        compare_fields(u, s)
