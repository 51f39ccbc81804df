import numpy as np
import pytest
from hypothesis import given, strategies as st

from synergy.entropy import build_table, mutual_info3
from synergy.errors import DomainTooLargeError, InvalidSpecError
from synergy.synth import (
    SplitMix64,
    SynthSpec,
    brute_force_entropies,
    brute_force_t3,
    dense_joint,
    generate,
    generate_labeled,
    splitmix64_array,
)

from conftest import COPY, XOR

# published reference outputs of SplitMix64 for seed 1234567
REFERENCE = [6457827717110365317, 3203168211198807973, 9817491932198370423,
             4593380528125082431, 16408922859458223821]


def test_splitmix_reference_vector():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == REFERENCE
    assert splitmix64_array(1234567, 5).tolist() == REFERENCE


@given(st.integers(0, 2**64 - 1), st.integers(0, 50), st.integers(0, 20))
def test_array_matches_scalar(seed, start, count):
    rng = SplitMix64(seed)
    for _ in range(start):
        rng.next_u64()
    expected = [rng.next_u64() for _ in range(count)]
    got = splitmix64_array(seed, count, start)
    assert got.dtype == np.uint64 and got.tolist() == expected


def test_scalar_helpers_in_range():
    rng = SplitMix64(7)
    assert all(0 <= rng.below(5) < 5 for _ in range(200))
    assert all(0.0 <= rng.random() < 1.0 for _ in range(200))
    assert rng.choice("abc") in "abc"
    assert rng.weighted([1, 3, 6]) in (0, 1, 2)
    with pytest.raises(ValueError):
        rng.below(0)


def test_xor_and_copy_generation():
    assert sorted(generate(SynthSpec("xor", 4))) == sorted(XOR)
    assert mutual_info3(build_table(generate(SynthSpec("xor", 400)))).bits == -1.0
    assert sorted(generate(SynthSpec("copy", 2))) == sorted(COPY)
    assert mutual_info3(build_table(generate(SynthSpec("copy", 10, (5, 5, 5))))).bits == pytest.approx(np.log2(5), abs=1e-12)
    assert mutual_info3(build_table(generate(SynthSpec("copy", 64)))).bits == 1.0


def test_mixture_per_group():
    spec = SynthSpec("mixture", groups=(("x", SynthSpec("xor", 4)), ("c", SynthSpec("copy", 4))))
    data = generate_labeled(spec)
    assert len(data) == spec.total() == 8
    per = {}
    for g, cell in data:
        per.setdefault(g, []).append(cell)
    assert brute_force_t3(per["x"]) == -1.0 and brute_force_t3(per["c"]) == 1.0


def test_seed_determinism():
    spec = SynthSpec("independent", 500, (3, 4, 5), seed=99)
    assert generate(spec) == generate(spec)
    assert generate(spec) != generate(SynthSpec("independent", 500, (3, 4, 5), seed=100))
    cells = generate(spec)
    assert {c[0] for c in cells} <= {"0", "1", "2"} and {c[2] for c in cells} <= {str(i) for i in range(5)}


@pytest.mark.parametrize("spec", [
    SynthSpec("bogus", 4),
    SynthSpec("xor", 0),
    SynthSpec("xor", 4, (3, 2, 2)),
    SynthSpec("copy", 4, (2, 3, 2)),
    SynthSpec("independent", 4, (0, 2, 2)),
    SynthSpec("mixture"),
    SynthSpec("mixture", 5, groups=(("a", SynthSpec("xor", 4)),)),
    SynthSpec("mixture", groups=(("a", SynthSpec("xor", 4)), ("a", SynthSpec("xor", 4)))),
    SynthSpec("xor", 4, groups=(("a", SynthSpec("xor", 4)),)),
])
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpecError):
        generate_labeled(spec)


def test_oracle_cases():
    assert brute_force_t3(XOR) == -1.0
    assert brute_force_t3(COPY) == 1.0
    assert brute_force_t3([("a", "b", "c")]) == 0.0
    h = brute_force_entropies(XOR)
    assert (h["h_g"], h["h_gt"], h["h_gto"]) == (1.0, 2.0, 2.0)
    assert dense_joint(XOR).shape == (2, 2, 2) and dense_joint(XOR).sum() == 4


def test_oracle_domain_limit():
    big = [(str(i), str(i), str(i)) for i in range(101)]
    with pytest.raises(DomainTooLargeError):
        brute_force_t3(big)
    assert brute_force_t3(big[:100]) == pytest.approx(np.log2(100), abs=1e-10)
    with pytest.raises(DomainTooLargeError):
        brute_force_t3(XOR, max_cells=7)
