import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fitraffic.lattice import iterate_open
from fitraffic.preimages import (
    PreimageCount,
    ResourceLimitError,
    admissible_mask,
    admissible_words,
    count_admissible,
    enumerate_preimages_bruteforce,
    index_from_word,
    is_admissible,
    path_count,
    preimage_mask,
    preimage_probability,
    preimages_by_iteration,
    word_from_index,
)

from conftest import all_words


def brute_path_count(n0, n1, m):
    """Walk every arrangement of n0 zeros and n1 ones."""
    total = 0
    for ones in itertools.combinations(range(n0 + n1), n1):
        capital, ok = 0, True
        for k in range(n0 + n1):
            capital += -m if k in ones else 1
            if capital <= 0:
                ok = False
                break
        total += ok
    return total


@pytest.mark.parametrize(
    "word, m, expected", [("000", 2, True), ("001000000", 2, False), ("101110100", 2, False), ("0010", 1, True)]
)
def test_is_admissible(word, m, expected):
    assert is_admissible(word, m) is expected


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30), st.integers(1, 4))
def test_admissible_weight_and_density_forms_agree(word, m):
    density_form = all(sum(word[:k]) < k / (m + 1) for k in range(1, len(word) + 1))
    assert is_admissible(word, m) == density_form


@pytest.mark.parametrize("p, m", [(1, 1), (7, 1), (9, 2), (12, 3)])
def test_admissible_generators_agree(p, m):
    words = list(admissible_words(p, m))
    assert words == sorted(w for w in all_words(p) if is_admissible(w, m))
    mask = admissible_mask(p, m)
    assert {word_from_index(i, p) for i in range(2**p) if mask[i]} == set(words)


def test_word_index_roundtrip():
    assert word_from_index(0b110, 4) == "0110"
    assert index_from_word("0110") == 0b110


@pytest.mark.parametrize(
    "m, n, total, by_ones",
    [(1, 1, 3, {0: 1, 1: 2}), (1, 0, 1, {0: 1}), (2, 0, 1, {0: 1})],
)
def test_bruteforce_examples(m, n, total, by_ones):
    pc = enumerate_preimages_bruteforce(m, n)
    assert pc.total == total and pc.by_ones == by_ones
    assert count_admissible(m, n).by_ones == by_ones


def test_bruteforce_m1_n1_words():
    _, idx = enumerate_preimages_bruteforce(1, 1, return_words=True)
    assert {word_from_index(int(i), 4) for i in idx} == {"0000", "0001", "0010"}


@pytest.mark.parametrize("m, n", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_bitsliced_scan_equals_per_word_iteration(m, n):
    p = (n + 1) * (m + 1)
    mask = preimage_mask(m, n)
    assert {word_from_index(i, p) for i in range(2**p) if mask[i]} == preimages_by_iteration(m, n)


def test_bruteforce_respects_limit():
    with pytest.raises(ResourceLimitError):
        enumerate_preimages_bruteforce(4, 4)
    assert enumerate_preimages_bruteforce(4, 4, limit=25).total == count_admissible(4, 4).total


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_preimage_set_is_admissible_set(m):
    for n in itertools.count():
        p = (n + 1) * (m + 1)
        if p > 20:
            break
        assert (preimage_mask(m, n) == admissible_mask(p, m)).all(), (m, n)


def test_count_m1_n2_against_scan():
    assert count_admissible(1, 2).total == sum(path_count(6 - k, k, 1) for k in range(7))
    assert count_admissible(1, 2).by_ones == enumerate_preimages_bruteforce(1, 2).by_ones


@pytest.mark.parametrize("n0, n1, m, count", [(2, 1, 1, 1), (3, 1, 1, 2), (3, 0, 2, 1), (2, 2, 1, 0)])
def test_path_count_examples(n0, n1, m, count):
    assert path_count(n0, n1, m) == count


@pytest.mark.parametrize("m", [1, 2, 3])
def test_path_count_matches_brute_force(m):
    for n0 in range(0, 13):
        for n1 in range(0, 7):
            if n0 + n1:
                assert path_count(n0, n1, m) == brute_path_count(n0, n1, m), (n0, n1, m)


@given(st.integers(0, 400), st.integers(0, 200), st.integers(1, 6))
def test_path_count_is_integral_and_bounded(n0, n1, m):
    if n0 + n1 == 0:
        return
    c = path_count(n0, n1, m)  # raises on a nonzero remainder
    assert isinstance(c, int) and 0 <= c


def test_path_count_rejects_empty():
    with pytest.raises(ValueError):
        path_count(0, 0, 1)


def test_preimage_probability_examples():
    assert preimage_probability(1, 1, 0.5) == 0.1875
    assert preimage_probability(1, 1, Fraction(1, 2)) == Fraction(3, 16)
    for m, t in [(1, 3), (2, 2), (3, 40)]:
        assert preimage_probability(m, t, 0.0) == 1.0
        assert preimage_probability(m, t, 1.0) == 0.0


@pytest.mark.parametrize("m, t", [(1, 1), (1, 3), (2, 1), (2, 2), (3, 1)])
def test_preimage_probability_equals_weighted_scan(m, t):
    p = (t + 1) * (m + 1)
    rho = Fraction(2, 7)
    target = "0" * (m + 1)
    scan = sum(rho ** w.count("1") * (1 - rho) ** w.count("0")
               for w in all_words(p) if iterate_open(w, m, t) == target)
    assert preimage_probability(m, t, rho) == scan


def test_preimage_probability_log_space_matches_exact():
    # (t+1)(m+1) = 303 takes the log-space branch
    exact = preimage_probability(2, 100, Fraction(1, 3))
    assert preimage_probability(2, 100, 1 / 3) == pytest.approx(float(exact), rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_preimage_probability_bounded_and_non_increasing_in_t(m):
    for k in range(1, 20):
        rho = k / 20
        values = [preimage_probability(m, t, rho) for t in range(0, 30)]
        assert all(0 <= v <= 1 for v in values)
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_admissible_words_stay_admissible_after_one_step(m):
    for p in range(m + 2, 17):
        for w in admissible_words(p, m):
            img = iterate_open(w, m, 1)
            assert len(img) == p - (m + 1)
            assert is_admissible(img, m), (w, img)


def test_swapped_weight_walk_does_not_characterize_preimages():
    # +m per empty site, -1 per car: accepts 01 for m=2, which is no preimage.
    def swapped(word, m):
        capital = 0
        for a in word:
            capital += -1 if a == "1" else m
            if capital <= 0:
                return False
        return True

    m, n = 2, 1
    p = (n + 1) * (m + 1)
    pre = preimages_by_iteration(m, n)
    assert {w for w in all_words(p) if swapped(w, m)} != pre
    assert {w for w in all_words(p) if is_admissible(w, m)} == pre


def test_preimage_count_json_roundtrip():
    pc = count_admissible(3, 30)
    doc = pc.to_dict()
    assert all(isinstance(v, str) for v in doc["by_ones"].values())
    assert doc["total"] == str(pc.total)
    assert PreimageCount.from_json(pc.to_json()) == pc
