import random
from fractions import Fraction

import pytest

from spherefp.ffcore import PrimeField
from spherefp.fpoly import FpMultiPoly, RatMultiPoly
from spherefp.quadform import QuadForm, qf_rank


def random_symmetric(field, d, rng):
    a = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            a[i][j] = a[j][i] = rng.randrange(field.p)
    return a


def random_form(field, d, rng, min_rank=0, pure=False, homogeneous=False, tries=200):
    for _ in range(tries):
        a = random_symmetric(field, d, rng)
        u = [0] * d if (pure or homogeneous) else [rng.randrange(field.p) for _ in range(d)]
        v = 0 if homogeneous else rng.randrange(field.p)
        M = QuadForm(field, a, u, v)
        if qf_rank(M) >= min_rank:
            return M
    raise AssertionError("could not draw a form of the requested rank")


def random_fp_poly(p, d, s, rng, nterms=8):
    terms = {}
    for _ in range(rng.randint(1, nterms)):
        e = [0] * d
        for _ in range(rng.randint(0, s)):
            e[rng.randrange(d)] += 1
        terms[tuple(e)] = rng.randrange(p)
    return FpMultiPoly(p, d, terms)


def random_rat_poly(d, s, rng, denominators=(1, 2, 3), nterms=6):
    terms = {}
    for _ in range(rng.randint(1, nterms)):
        e = [0] * d
        for _ in range(rng.randint(0, s)):
            e[rng.randrange(d)] += 1
        terms[tuple(e)] = Fraction(rng.randint(-6, 6), rng.choice(denominators))
    return RatMultiPoly(d, terms)


def random_int_valued(d, s, rng, nterms=6):
    """Random integer-valued polynomial via integer binomial coefficients."""
    coeffs = {}
    for _ in range(rng.randint(1, nterms)):
        idx = [0] * d
        for _ in range(rng.randint(0, s)):
            idx[rng.randrange(d)] += 1
        coeffs[tuple(idx)] = rng.randint(-9, 9)
    return RatMultiPoly.from_binomial(d, coeffs)


def random_zp_valued(d, s, rng, p, nterms=6):
    """Random Z/p-valued polynomial of degree <= s (p * f integer valued)."""
    f = random_int_valued(d, s, rng, nterms)
    return f.scale(Fraction(1, p))


@pytest.fixture
def rng():
    return random.Random(20260808)


@pytest.fixture
def f5():
    return PrimeField(5)


@pytest.fixture
def f7():
    return PrimeField(7)
