"""Oracle checks: the classical routines must stand on their own."""

from fractions import Fraction
from itertools import permutations
from random import Random

import pytest

from tracediagrams import matrices as mx


def naive_det(m):
    """Permutation-expansion determinant, the slow reference."""
    n = len(m)
    total = Fraction(0)
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = Fraction(1)
        for i in range(n):
            prod *= m[i][perm[i]]
        total += sign * prod
    return total


def rand_matrix(rng, n, rational=False):
    if rational:
        return mx.freeze_matrix(
            [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(n)] for _ in range(n)]
        )
    return mx.freeze_matrix([[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)])


def test_bareiss_matches_naive_expansion():
    rng = Random("bareiss")
    for n in (1, 2, 3, 4):
        for _ in range(10):
            m = rand_matrix(rng, n)
            assert mx.bareiss_det(m) == naive_det(m)


def test_bareiss_rational_entries():
    rng = Random("bareiss-q")
    for _ in range(10):
        m = rand_matrix(rng, 3, rational=True)
        assert mx.bareiss_det(m) == naive_det(m)


def test_bareiss_singular_and_empty():
    assert mx.bareiss_det(mx.freeze_matrix([[1, 1], [1, 1]])) == 0
    assert mx.bareiss_det(()) == 1


def test_charpoly_identity_matrix():
    # det(I - x I) = (1 - x)^3
    cs = mx.charpoly_fl(mx.identity(3))
    assert cs == (Fraction(1), Fraction(-3), Fraction(3), Fraction(-1))


def test_charpoly_companion_matrix():
    # companion of x^2 - 5x - 2; det(A - x I) has coefficients (-2, -5, 1)
    comp = mx.freeze_matrix([[0, 2], [1, 5]])
    assert mx.charpoly_fl(comp) == (Fraction(-2), Fraction(-5), Fraction(1))


def test_charpoly_agrees_with_determinant_samples():
    rng = Random("charpoly")
    for _ in range(5):
        a = rand_matrix(rng, 4)
        cs = mx.charpoly_fl(a)
        for lam in (Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(3)):
            shifted = mx.madd(a, mx.mscale(-lam, mx.identity(4)))
            assert sum(c * lam**i for i, c in enumerate(cs)) == mx.bareiss_det(shifted)


def test_charpoly_extreme_coefficients():
    rng = Random("charpoly-ends")
    for n in (2, 3, 4):
        a = rand_matrix(rng, n)
        cs = mx.charpoly_fl(a)
        assert cs[0] == mx.bareiss_det(a)
        assert cs[n] == (-1) ** n


def test_pfaffian_2x2():
    for a in (1, 2, 7):
        m = mx.freeze_matrix([[0, a], [-a, 0]])
        assert mx.pfaffian_matchings(m) == a


def test_pfaffian_4x4_formula():
    rng = Random("pf4")
    for _ in range(10):
        vals = {k: Fraction(rng.randint(-9, 9)) for k in ("ab", "ac", "ad", "bc", "bd", "cd")}
        m = mx.freeze_matrix(
            [
                [0, vals["ab"], vals["ac"], vals["ad"]],
                [-vals["ab"], 0, vals["bc"], vals["bd"]],
                [-vals["ac"], -vals["bc"], 0, vals["cd"]],
                [-vals["ad"], -vals["bd"], -vals["cd"], 0],
            ]
        )
        expected = vals["ab"] * vals["cd"] - vals["ac"] * vals["bd"] + vals["ad"] * vals["bc"]
        assert mx.pfaffian_matchings(m) == expected


@pytest.mark.parametrize("n", [2, 4, 6])
def test_pfaffian_squares_to_determinant(n):
    rng = Random(f"pf-sq-{n}")
    for _ in range(5):
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                x = rng.randint(-5, 5)
                rows[i][j], rows[j][i] = x, -x
        m = mx.freeze_matrix(rows)
        assert mx.pfaffian_matchings(m) ** 2 == mx.bareiss_det(m)


def test_pfaffian_odd_dimension_zero():
    m = mx.freeze_matrix([[0, 1, 2], [-1, 0, 3], [-2, -3, 0]])
    assert mx.pfaffian_matchings(m) == 0


def test_pfaffian_rejects_non_skew():
    with pytest.raises(Exception):
        mx.pfaffian_matchings(mx.freeze_matrix([[1, 2], [3, 4]]))


def test_kron_and_word_product():
    a = mx.freeze_matrix([[1, 2], [3, 4]])
    b = mx.freeze_matrix([[0, 1], [1, 0]])
    k = mx.kron(a, b)
    # block form: k[i][j] = a[i//2][j//2] * b[i%2][j%2]
    assert k[0][1] == 1 and k[0][0] == 0 and k[2][1] == 3 and k[2][3] == 4
    ones = mx.freeze_matrix([[1, 1], [1, 1]])
    assert mx.word_product([ones, ones, ones]) == mx.mscale(4, ones)


def test_vector_helpers():
    u = mx.freeze_vector([1, 0, 0])
    v = mx.freeze_vector([0, 1, 0])
    assert mx.vec_cross(u, v) == (0, 0, 1)
    assert mx.vec_dot(u, v) == 0
    w = mx.freeze_vector([Fraction(1, 2), 2, -1])
    assert mx.vec_dot(w, w) == Fraction(1, 4) + 4 + 1
