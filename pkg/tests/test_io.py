import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab.grid import make_grid
from nlslab.io import (
    dumps_json,
    format_number,
    pack_field,
    read_csv,
    read_field,
    sha256_file,
    unpack_field,
    write_csv,
    write_field,
)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_round_trip(x):
    assert float(format_number(x)) == x


def test_csv_layout(tmp_path):
    path = write_csv(tmp_path / "t.csv", [{"a": 0.1, "b": True, "c": 3}], ["a", "b", "c"])
    text = path.read_text()
    assert text == "a,b,c\n0.10000000000000001,true,3\n"
    assert read_csv(path) == [{"a": "0.10000000000000001", "b": "true", "c": "3"}]


def test_json_is_canonical():
    a = dumps_json({"b": np.float64(1.5), "a": [np.int64(2), np.bool_(True)], "c": float("inf")})
    assert a == dumps_json({"a": [2, True], "c": float("inf"), "b": 1.5})
    assert '"inf"' in a


@pytest.mark.parametrize("n,N", [(1, 16), (2, 8)])
def test_field_round_trip(tmp_path, rng, n, N):
    g = make_grid(n, 3.5, N)
    u = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    path = write_field(tmp_path / "f.nlsf", g, u)
    g2, u2 = read_field(path)
    assert g2 == g and np.array_equal(u2, u)


def test_field_header_layout(rng):
    g = make_grid(2, 1.25, 8)
    u = np.arange(64).reshape(8, 8) + 1j
    data = pack_field(g, u)
    assert data[:4] == b"NLSF"
    assert struct.unpack_from("<IIIId", data, 4) == (1, 2, 8, 8, 1.25)
    off = 4 + 4 * 4 + 8
    first = struct.unpack_from("<dd", data, off)
    second = struct.unpack_from("<dd", data, off + 16)
    assert first == (0.0, 1.0) and second == (1.0, 1.0)  # row-major order
    assert len(data) == off + 64 * 16


def test_field_rejects_corruption():
    g = make_grid(1, 1.0, 8)
    data = pack_field(g, np.zeros(8, complex))
    with pytest.raises(ValueError):
        unpack_field(b"XXXX" + data[4:])
    with pytest.raises(ValueError):
        unpack_field(data[:-1])


def test_sha256(tmp_path):
    p = tmp_path / "x"
    p.write_bytes(b"abc")
    assert sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
