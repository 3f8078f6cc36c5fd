# core/automorphisms/unipotent_linalg.py - Unipotent integer matrices

from functools import reduce
from math import gcd
from typing import List

import sympy

from ...utils.error_handler import InputValidationError, NotUnipotent


def _require_square(M: sympy.Matrix):
    if not M.is_square:
        raise InputValidationError(f"matrix must be square, got {M.shape}")


def is_unipotent(M: sympy.Matrix) -> bool:
    """(I − M)^n = 0 with n the dimension"""
    _require_square(M)
    n = M.rows
    N = sympy.eye(n) - M
    return (N ** n) == sympy.zeros(n, n)


def is_unitriangular(M: sympy.Matrix) -> bool:
    n = M.rows
    return all(M[i, i] == 1 for i in range(n)) and all(
        M[i, j] == 0 for i in range(n) for j in range(i))


def trivial_mod3(M: sympy.Matrix) -> bool:
    _require_square(M)
    return all(int(x) % 3 == 0 for x in (M - sympy.eye(M.rows)))


def primitive_integer_vector(v: sympy.Matrix) -> sympy.Matrix:
    """Clear denominators, divide by the gcd, first nonzero entry positive"""
    entries = [sympy.Rational(x) for x in v]
    denominators = [int(x.q) for x in entries]
    lcm = reduce(lambda a, b: a * b // gcd(a, b), denominators, 1)
    ints = [int(x * lcm) for x in entries]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise InputValidationError("zero vector has no primitive submultiple")
    ints = [x // g for x in ints]
    first = next(x for x in ints if x != 0)
    if first < 0:
        ints = [-x for x in ints]
    return sympy.Matrix(ints)


def fixed_lattice(M: sympy.Matrix) -> List[sympy.Matrix]:
    """Primitive integer vectors spanning ker(M − I) over ℚ"""
    _require_square(M)
    return [primitive_integer_vector(v) for v in (M - sympy.eye(M.rows)).nullspace()]


def _unimodular_completion(v: sympy.Matrix) -> sympy.Matrix:
    """Q ∈ GL_n(ℤ) whose first column is the primitive vector v"""
    n = v.rows
    vec = [int(x) for x in v]
    U = sympy.eye(n)
    while sum(1 for x in vec if x != 0) > 1:
        p = min((i for i in range(n) if vec[i] != 0), key=lambda i: abs(vec[i]))
        for i in range(n):
            if i != p and vec[i] != 0:
                q = vec[i] // vec[p]
                vec[i] -= q * vec[p]
                U[i, :] = U[i, :] - q * U[p, :]
    p = next(i for i in range(n) if vec[i] != 0)
    if p != 0:
        vec[0], vec[p] = vec[p], vec[0]
        U.row_swap(0, p)
    if vec[0] < 0:
        vec[0] = -vec[0]
        U[0, :] = -U[0, :]
    # U·v = e1, so U⁻¹ has first column v
    return U.inv()


def unipotent_basis(M: sympy.Matrix) -> sympy.Matrix:
    """P ∈ GL_n(ℤ) with P⁻¹·M·P upper unitriangular"""
    _require_square(M)
    if not is_unipotent(M):
        raise NotUnipotent("matrix is not unipotent", matrix=M.tolist())
    n = M.rows
    if n == 1:
        return sympy.eye(1)
    v = fixed_lattice(M)[0]
    Q = _unimodular_completion(v)
    conjugated = Q.inv() * M * Q
    P_block = unipotent_basis(conjugated[1:, 1:])
    P = Q * sympy.diag(1, P_block)
    return P
