import io
import json
from collections import Counter

import pytest

from sicstark.quadfield import QuadRational, make_field
from sicstark.rayclass import GroupError, build_ray_class_group


@pytest.fixture(scope="module")
def G5():
    return build_ray_class_group(make_field(5))


@pytest.mark.parametrize("d,N,structure", [(5, 8, (8,)), (11, 40, (40,)), (17, 96, (96,)),
                                           (23, 176, (2, 176))])
def test_structure(d, N, structure):
    G = build_ray_class_group(make_field(d))
    assert G.N == N
    assert tuple(G.structure) == structure


def test_R_is_class_of_minus_one_positive_at_rho2(G5):
    # 4 = -1 mod 5 and is positive at both places, so it lands in R
    assert G5.class_of_element(QuadRational(4, 0, 3)) == G5.R_index
    # -1 generates the trivial ideal, so its (-1, negative) label is the identity;
    # flipping the rho2 sign is exactly the passage to R
    assert G5.class_of_element(QuadRational(-1, 0, 3)) == 0
    assert G5.R_index == G5.N // 2


def test_fibers_d5(G5):
    assert len(G5.amn_index) == 24
    sizes = Counter(G5.amn_index.values())
    assert sorted(sizes) == list(range(8)) and set(sizes.values()) == {3}
    for mn, k in G5.amn_index.items():
        assert all(G5.amn_index[x] == k for x in G5.fiber(*mn))


def test_minus_pair_is_R_times(G5):
    for (m, n), k in G5.amn_index.items():
        assert G5.amn_class(-m, -n) == (k + G5.R_index) % G5.N


def test_A_dminus1_0_relates_to_R(G5):
    assert G5.amn_class(4, 0) == (G5.amn_class(1, 0) + G5.R_index) % G5.N


def test_galois_permutation_maps_fibers(G5):
    on_k, on_mn = G5.galois_permutation()
    for mn, img in on_mn.items():
        assert G5.amn_index[img] == on_k[G5.amn_index[mn]]


def test_characters_odd_count(G5):
    odd = G5.odd_characters()
    assert len(odd) == G5.N // 2
    assert all(c.value(G5.R_index) == -1 for c in odd)


def test_zero_pair_rejected(G5):
    with pytest.raises(GroupError):
        G5.amn_class(0, 0)
    with pytest.raises(GroupError):
        G5.class_of_element(QuadRational(5, 0, 3))


def test_jsonl_dump(G5):
    buf = io.StringIO()
    G5.dump_jsonl(buf)
    rows = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(rows) == 24 and {r["class"] for r in rows} == set(range(8))
