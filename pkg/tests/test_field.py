import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballsquare.errors import (BadMagicError, DimensionMismatchError, ParameterError,
                               TruncatedPayloadError)
from ballsquare.field import (Field, GridSpec, lp_norm, make_field, read_field, translate,
                              write_field, write_field_csv)
from ballsquare.testfields import atom_sampler


def test_grid_validation():
    with pytest.raises(ParameterError):
        GridSpec(1, 16)
    with pytest.raises(ParameterError):
        GridSpec(2, 24)
    with pytest.raises(ParameterError):
        GridSpec(2, 4)
    with pytest.raises(ParameterError):
        GridSpec(2, 16, L=0.0)
    g = GridSpec(3, 16, 2.0)
    assert g.spacing == 0.125 and g.shape == (16, 16, 16) and g.size == 4096
    assert g.refined(2) == GridSpec(3, 32, 2.0)


def test_constant_sampler():
    f = make_field(GridSpec(2, 8), lambda x, y: 1.0)
    assert f.values.shape == (8, 8)
    assert np.all(f.values == 1.0)
    assert not f.mean_zero


def test_cosine_sampler_is_mean_zero():
    f = make_field(GridSpec(2, 8), lambda x, y: np.cos(2 * np.pi * x))
    assert f.mean_zero
    assert f.values.max() == 1.0


def test_atom_sampler_mean():
    g = GridSpec(2, 64)
    f = make_field(g, atom_sampler(g.L, (0.3, 0.35), 0.2))
    assert abs(f.mean()) < 1e-12


def test_non_finite_sample_names_index():
    vals = np.zeros((8, 8))
    vals[2, 5] = np.nan
    with pytest.raises(ParameterError, match=r"\(2, 5\)"):
        Field(GridSpec(2, 8), vals)


def test_values_are_read_only():
    f = Field(GridSpec(2, 8), np.zeros((8, 8)))
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_lp_norms():
    g = GridSpec(2, 32)
    assert lp_norm(Field(g, np.ones(g.shape)), 1) == 1.0
    c = make_field(g, lambda x, y: np.cos(2 * np.pi * x))
    assert lp_norm(c, 2) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    z = Field(g, np.zeros(g.shape))
    assert lp_norm(z, 1) == 0.0 and lp_norm(z, 2) == 0.0
    with pytest.raises(ParameterError):
        lp_norm(c, 3)


def test_translate_identities():
    g = GridSpec(2, 16)
    f = Field(g, np.random.default_rng(0).standard_normal(g.shape))
    assert np.array_equal(translate(f, (0, 0)).values, f.values)
    assert np.array_equal(translate(f, (16, 0)).values, f.values)
    back = translate(translate(f, (3, 5)), (13, 11))
    assert np.array_equal(back.values, f.values)
    with pytest.raises(ParameterError):
        translate(f, (17, 0))
    with pytest.raises(ParameterError):
        translate(f, (1,))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 16), st.integers(0, 16))
def test_translation_preserves_norms_exactly(a, b):
    g = GridSpec(2, 16)
    f = Field(g, np.random.default_rng(1).standard_normal(g.shape))
    s = translate(f, (a, b))
    assert lp_norm(s, 1) == lp_norm(f, 1)
    assert lp_norm(s, 2) == lp_norm(f, 2)
    assert s.mean() == f.mean()


def test_roundtrip(tmp_path):
    g = GridSpec(3, 8, 2.5)
    f = Field(g, np.random.default_rng(2).standard_normal(g.shape))
    write_field(f, tmp_path / "f.sqfn")
    back = read_field(tmp_path / "f.sqfn", expected=g)
    assert back.grid == g
    assert np.array_equal(back.values, f.values)


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.sqfn"
    p.write_bytes(b"NOTAFIELD" + bytes(64))
    with pytest.raises(BadMagicError, match="bad magic"):
        read_field(p)


def test_truncated_and_oversized_payload(tmp_path):
    g = GridSpec(2, 8)
    f = Field(g, np.ones(g.shape))
    p = tmp_path / "f.sqfn"
    write_field(f, p)
    data = p.read_bytes()
    p.write_bytes(data[:-8])
    with pytest.raises(TruncatedPayloadError, match="truncated payload"):
        read_field(p)
    p.write_bytes(data + bytes(8))
    with pytest.raises(DimensionMismatchError):
        read_field(p)
    p.write_bytes(data)
    with pytest.raises(DimensionMismatchError):
        read_field(p, expected=GridSpec(2, 16))


def test_errors_are_os_errors(tmp_path):
    p = tmp_path / "bad.sqfn"
    p.write_bytes(b"xx")
    with pytest.raises(OSError):
        read_field(p)


def test_csv_output(tmp_path):
    g = GridSpec(2, 8)
    f = make_field(g, lambda x, y: np.sin(2 * np.pi * x) * 0.1)
    write_field_csv(f, tmp_path / "f.csv")
    rows = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert rows.shape == (64, 3)
    assert np.array_equal(rows[:, 2], f.values.ravel())
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "x1,x2,value"


def test_arithmetic():
    g = GridSpec(2, 8)
    a = Field(g, np.ones(g.shape))
    b = a * 2.0
    assert np.all((b - a).values == 1.0) and np.all((a + a).values == 2.0)
    with pytest.raises(ParameterError):
        a + Field(GridSpec(2, 16), np.ones((16, 16)))
