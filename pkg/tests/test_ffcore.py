import random

import pytest

from spherefp.ffcore import FpMatrix, Infeasible, NotPrime, PrimeField, nullspace, rank, rref, solve_linear

from conftest import random_symmetric


def test_prime_validation():
    with pytest.raises(NotPrime):
        PrimeField(9)
    with pytest.raises(ValueError):
        PrimeField(3)
    assert PrimeField(5).p == 5


def test_legendre_examples():
    f5 = PrimeField(5)
    assert f5.legendre(0) == 0
    assert f5.legendre(1) == 1
    # squares mod 5 are {0, 1, 4} by exhaustion
    assert sorted({x * x % 5 for x in range(5)}) == [0, 1, 4]
    assert f5.legendre(2) == -1


def test_legendre_multiplicative():
    rng = random.Random(1)
    for p in (5, 7, 11, 13):
        f = PrimeField(p)
        for _ in range(200):
            a, b = rng.randrange(1, p), rng.randrange(1, p)
            assert f.legendre(a * b) == f.legendre(a) * f.legendre(b)


def test_smallest_nonresidue():
    assert PrimeField(5).smallest_nonresidue() == 2
    assert PrimeField(7).smallest_nonresidue() == 3
    assert PrimeField(13).smallest_nonresidue() == 2


def test_inverse_extended_euclid():
    for p in (5, 7, 11, 13):
        f = PrimeField(p)
        for a in range(1, p):
            assert a * f.inv(a) % p == 1


def test_rref_identity_and_zero():
    f5 = PrimeField(5)
    ident = FpMatrix.identity(f5, 4)
    red, rk, piv = rref(ident)
    assert red == ident and rk == 4 and piv == [0, 1, 2, 3]
    zero = FpMatrix.zero(f5, 3, 3)
    red, rk, piv = rref(zero)
    assert red == zero and rk == 0 and piv == []


def test_rref_rank_one_example():
    f5 = PrimeField(5)
    m = FpMatrix(f5, [[1, 2], [2, 4]])
    _, rk, _ = rref(m)
    assert rk == 1


def test_rref_idempotent_and_rank_transpose():
    rng = random.Random(2)
    for p in (5, 7, 11, 13):
        f = PrimeField(p)
        for _ in range(40):
            nrows, ncols = rng.randint(1, 8), rng.randint(1, 8)
            m = FpMatrix(f, [[rng.randrange(p) for _ in range(ncols)] for _ in range(nrows)])
            red, rk, _ = rref(m)
            red2, rk2, _ = rref(red)
            assert red2 == red and rk2 == rk
            assert rank(m.transpose()) == rk


def test_solve_linear_identity_and_zero():
    f5 = PrimeField(5)
    ident = FpMatrix.identity(f5, 3)
    part, basis = solve_linear(ident, [1, 2, 3])
    assert part == [1, 2, 3] and basis == []
    zero = FpMatrix.zero(f5, 2, 3)
    part, basis = solve_linear(zero, [0, 0])
    assert part == [0, 0, 0] and len(basis) == 3


def test_solve_linear_line_by_exhaustion():
    f5 = PrimeField(5)
    m = FpMatrix(f5, [[1, 2]])
    part, basis = solve_linear(m, [3])
    assert len(basis) == 1
    solutions = {tuple((part[j] + t * basis[0][j]) % 5 for j in range(2)) for t in range(5)}
    brute = {(x, y) for x in range(5) for y in range(5) if (x + 2 * y) % 5 == 3}
    assert solutions == brute


def test_solve_linear_infeasible():
    f5 = PrimeField(5)
    m = FpMatrix(f5, [[1, 0], [1, 0]])
    with pytest.raises(Infeasible):
        solve_linear(m, [1, 2])


def test_solutions_satisfy_system_randomized():
    rng = random.Random(3)
    for _ in range(60):
        p = rng.choice((5, 7, 11))
        f = PrimeField(p)
        nrows, ncols = rng.randint(1, 5), rng.randint(1, 5)
        m = FpMatrix(f, [[rng.randrange(p) for _ in range(ncols)] for _ in range(nrows)])
        x = [rng.randrange(p) for _ in range(ncols)]
        rhs = m.matvec(x)
        part, basis = solve_linear(m, rhs)
        assert m.matvec(part) == rhs
        for b in basis:
            assert m.matvec(b) == [0] * nrows


def test_nullspace_spans_kernel():
    f5 = PrimeField(5)
    a = FpMatrix(f5, random_symmetric(f5, 4, random.Random(4)))
    basis = nullspace(a)
    for b in basis:
        assert a.matvec(b) == [0, 0, 0, 0]
    assert len(basis) == 4 - rank(a)


def test_rref_unique_on_row_equivalent_matrices():
    # row-equivalent matrices share their reduced echelon form, which is
    # what makes representation standardization canonical
    rng = random.Random(8)
    for p in (5, 7):
        f = PrimeField(p)
        for _ in range(40):
            nrows, ncols = rng.randint(2, 5), rng.randint(2, 6)
            m = [[rng.randrange(p) for _ in range(ncols)] for _ in range(nrows)]
            red1, _, _ = rref(FpMatrix(f, m))
            mixed = [row[:] for row in m]
            for _ in range(6):
                op = rng.randrange(3)
                i, j = rng.randrange(nrows), rng.randrange(nrows)
                if op == 0 and i != j:
                    mixed[i], mixed[j] = mixed[j], mixed[i]
                elif op == 1:
                    c = rng.randrange(1, p)
                    mixed[i] = [(c * x) % p for x in mixed[i]]
                elif i != j:
                    c = rng.randrange(p)
                    mixed[i] = [(x + c * y) % p for x, y in zip(mixed[i], mixed[j])]
            red2, _, _ = rref(FpMatrix(f, mixed))
            assert red1 == red2
