import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cdcroots.channels import random_channel, random_kraus_set
from cdcroots.memory import counterexample_channel, jordan_tail_spec
from cdcroots.roots import cb_lower_bound_root
from cdcroots.serialize import (
    dumps,
    forgetful_spec_from_dict,
    load,
    loads,
    read_provenance,
    save,
)

seeds = st.integers(0, 2**32 - 1)


@given(st.integers(2, 4), seeds, st.sampled_from(["gellmann", "matrix-unit"]))
def test_channel_round_trip_bit_exact(d, seed, basis):
    ch = random_channel(d, np.random.default_rng(seed)).in_basis(basis)
    back = loads(dumps(ch))
    assert back.basis.name == basis and back.picture == ch.picture
    assert np.array_equal(back.matrix, ch.matrix)
    assert dumps(back) == dumps(ch)


@given(seeds)
def test_kraus_round_trip(seed):
    k = random_kraus_set(3, 2, np.random.default_rng(seed))
    assert np.array_equal(loads(dumps(k)).operators, k.operators)


def test_memory_round_trip(tmp_path):
    t = counterexample_channel(0.1, 0.13)
    path = tmp_path / "m.json"
    save(t, path, {"construction": "counterexample"})
    back = load(path)
    assert (back.dM, back.dA, back.dB) == (2, 2, 2)
    assert np.array_equal(back.matrix, t.matrix)
    assert read_provenance(path) == {"construction": "counterexample"}
    obj = json.loads(path.read_text())
    assert obj["basis"] == "gellmann" and len(obj["matrix"]) == 256


def test_custom_basis_written_as_gellmann():
    ch = cb_lower_bound_root(2).channel
    obj = json.loads(dumps(ch))
    assert obj["basis"] == "gellmann"
    assert np.allclose(loads(dumps(ch)).matrix, ch.in_basis("gellmann").matrix)


def test_channel_format_keys():
    ch = random_channel(2, np.random.default_rng(0))
    obj = json.loads(dumps(ch))
    assert set(obj) == {"d_in", "d_out", "picture", "basis", "matrix"}
    assert len(obj["matrix"]) == 16 and all(len(p) == 2 for p in obj["matrix"])


def test_forgetful_spec_round_trip():
    spec = jordan_tail_spec(eta=0.1)
    back = forgetful_spec_from_dict(json.loads(json.dumps(spec.to_dict())))
    assert np.array_equal(back.J, spec.J) and back.eta == 0.1


def test_malformed_inputs():
    with pytest.raises(ValueError):
        loads('{"d_in": 2, "d_out": 2, "picture": "heisenberg", "basis": "gellmann", "matrix": [[1, 0]]}')
    with pytest.raises(ValueError):
        loads('{"foo": 1}')
