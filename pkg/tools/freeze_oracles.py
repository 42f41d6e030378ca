"""Recompute the frozen reference values used in tests/test_frozen.py.

Every value comes from an independent route: the truncated GNS oracle at a level cap
well past the tail rule, brute-force enumeration, or explicit Kronecker powers.
"""

import itertools
import math

import numpy as np
import scipy.linalg

from poissonkit.algebra import Algebra, expi, weight_eval, weight_from_density
from poissonkit.entropy import poisson_relative_entropy_explicit
from poissonkit.fock import PoissonWord, WordKind, _WordBuilder
from poissonkit.gns import TruncatedGnsSpace, TruncatedGnsVector, apply_gamma

ALG = Algebra((2,))
W = weight_from_density([np.array([[0.6, 0.1 + 0.05j], [0.1 - 0.05j, 0.3]])])
A = ALG.element([np.array([[0.2, 0.5], [-0.1j, 0.4]])])
B = ALG.element([np.array([[0.3, -0.2], [0.6, 0.1j]])])
C = ALG.element([np.array([[0.0, 1.0], [0.0, 0.0]])])
H = ALG.element([np.array([[0.5, 0.2 - 0.3j], [0.2 + 0.3j, -0.4]])])
RHO = weight_from_density([W.density.blocks[0] - 0.1 * np.array([[1.0, 0.0], [0.0, 0.0]])])
M_ORACLE = 40


def gns(kind, left, right):
    b = _WordBuilder(TruncatedGnsSpace(W, M_ORACLE))
    return b.build(PoissonWord(kind, left)).inner(b.build(PoissonWord(kind, right)))


def bernoulli_bruteforce(letters, n):
    # sum over assignments of letters to n tensor legs; each occupied leg contributes w(product)/n
    total = 0j
    for f in itertools.product(range(n), repeat=len(letters)):
        term = 1.0 + 0j
        for leg in set(f):
            prod = None
            for x, j in zip(letters, f):
                if j == leg:
                    prod = x if prod is None else prod @ x
            term *= weight_eval(W, prod) / n
        total += term
    return total


def main():
    print("moment abc", gns(WordKind.LAMBDA, (), (A, B, C)))
    print("gram_empty ab|c", gns(WordKind.EMPTY, (A, B), (C,)))
    print("gram_empty ab|bc", gns(WordKind.EMPTY, (A, B), (B, C)))
    print("gram_fock ab|bc", gns(WordKind.FOCK, (A, B), (B, C)))
    space = TruncatedGnsSpace(W, M_ORACLE)
    xi = space.vacuum()
    print("characteristic h", xi.inner(apply_gamma(expi(H), TruncatedGnsVector(space, xi.levels))))
    print("bernoulli abc n=3", bernoulli_bruteforce((A, B, C), 3))
    print("bernoulli abc n=5", bernoulli_bruteforce((A, B, C), 5))
    r, q = RHO.density.blocks[0], W.density.blocks[0]
    lin = np.trace(r @ (scipy.linalg.logm(r) - scipy.linalg.logm(q))).real + np.trace(q - r).real
    print("lindblad (logm)", lin)
    print("explicit M=4", poisson_relative_entropy_explicit(RHO, W, 4))
    print("scalar KL series", sum(
        math.exp(-0.7) * 0.7 ** k / math.factorial(k) * (k * math.log(0.7 / 1.3) + 1.3 - 0.7) for k in range(80)
    ))


if __name__ == "__main__":
    main()
