"""Bilinear multiplication tensors used to partition the input matrices."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
import itertools
import logging

import galois
import numpy as np

from .const import DEFAULT_SEED, TENSOR_CHECK_TRIALS, TensorKind
from .exceptions import DivisibilityViolation, InvalidParams
from .field import PrimeField, mat_mul
from .graph import make_rng

_LOGGER = logging.getLogger(__name__)

Blocks = list[list[galois.FieldArray]]


@dataclass(frozen=True)
class BilinearTensor:
    """Class to represent a bilinear algorithm for (m x p) by (p x n) block products.

    Product r multiplies sum_{j,l} a[r,j,l] A^{j,l} by sum_{l,k} b[r,l,k] B^{l,k};
    block C^{j,k} is sum_r c[r,j,k] times product r.
    """

    kind: TensorKind
    m: int
    p: int
    n: int
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)

    @property
    def rank(self) -> int:
        return int(self.a.shape[0])

    def verify(
        self, prime_field: PrimeField, trials: int = TENSOR_CHECK_TRIALS, seed: int = DEFAULT_SEED
    ) -> bool:
        """Check the bilinear identity on random non-commuting block matrices."""
        rng = make_rng(seed)
        for _ in range(trials):
            left = prime_field.random_matrix(2 * self.m, 2 * self.p, rng)
            right = prime_field.random_matrix(2 * self.p, 2 * self.n, rng)
            left_parts = bilinear_parts(prime_field, self.a, split_blocks(left, self.m, self.p))
            right_parts = bilinear_parts(prime_field, self.b, split_blocks(right, self.p, self.n))
            products = [mat_mul(x, y) for x, y in zip(left_parts, right_parts)]
            combined = assemble_blocks(recombine(prime_field, self.c, products))
            if not np.array_equal(combined, mat_mul(left, right)):
                return False
        return True


def split_blocks(matrix: galois.FieldArray, rows: int, cols: int) -> Blocks:
    """Split matrix into a rows x cols grid of equal blocks."""
    height, width = matrix.shape
    if height % rows or width % cols:
        raise DivisibilityViolation(f"{matrix.shape} is not divisible into {rows}x{cols} blocks")
    step_r, step_c = height // rows, width // cols
    return [
        [matrix[r * step_r : (r + 1) * step_r, c * step_c : (c + 1) * step_c] for c in range(cols)]
        for r in range(rows)
    ]


def assemble_blocks(blocks: Blocks) -> galois.FieldArray:
    """Inverse of split_blocks."""
    step_r, step_c = blocks[0][0].shape
    gf = type(blocks[0][0])
    out = gf.Zeros((step_r * len(blocks), step_c * len(blocks[0])))
    for r, row in enumerate(blocks):
        for c, block in enumerate(row):
            out[r * step_r : (r + 1) * step_r, c * step_c : (c + 1) * step_c] = block
    return out


def bilinear_parts(
    prime_field: PrimeField, coefficients: np.ndarray, blocks: Blocks
) -> list[galois.FieldArray]:
    """Return sum_{u,v} coefficients[r,u,v] * blocks[u][v] for every r."""
    gf = prime_field.gf
    shape = blocks[0][0].shape
    parts = []
    for slab in coefficients:
        acc = gf.Zeros(shape)
        for u, v in zip(*np.nonzero(slab)):
            acc = acc + prime_field.element(int(slab[u, v])) * blocks[u][v]
        parts.append(acc)
    return parts


def recombine(
    prime_field: PrimeField, coefficients: np.ndarray, products: Sequence[galois.FieldArray]
) -> Blocks:
    """Return the output blocks sum_r coefficients[r,j,k] * products[r]."""
    _, rows, cols = coefficients.shape
    gf = prime_field.gf
    shape = products[0].shape
    blocks: Blocks = [[gf.Zeros(shape) for _ in range(cols)] for _ in range(rows)]
    for r, slab in enumerate(coefficients):
        for j, k in zip(*np.nonzero(slab)):
            blocks[j][k] = blocks[j][k] + prime_field.element(int(slab[j, k])) * products[r]
    return blocks


def _naive(m: int, p: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rank = m * p * n
    a = np.zeros((rank, m, p), dtype=np.int64)
    b = np.zeros((rank, p, n), dtype=np.int64)
    c = np.zeros((rank, m, n), dtype=np.int64)
    for r, (j, l, k) in enumerate(itertools.product(range(m), range(p), range(n))):
        a[r, j, l] = 1
        b[r, l, k] = 1
        c[r, j, k] = 1
    return a, b, c


def _strassen() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = np.zeros((7, 2, 2), dtype=np.int64)
    b = np.zeros((7, 2, 2), dtype=np.int64)
    c = np.zeros((7, 2, 2), dtype=np.int64)
    left_terms = (
        {(0, 0): 1, (1, 1): 1},
        {(1, 0): 1, (1, 1): 1},
        {(0, 0): 1},
        {(1, 1): 1},
        {(0, 0): 1, (0, 1): 1},
        {(1, 0): 1, (0, 0): -1},
        {(0, 1): 1, (1, 1): -1},
    )
    right_terms = (
        {(0, 0): 1, (1, 1): 1},
        {(0, 0): 1},
        {(0, 1): 1, (1, 1): -1},
        {(1, 0): 1, (0, 0): -1},
        {(1, 1): 1},
        {(0, 0): 1, (0, 1): 1},
        {(1, 0): 1, (1, 1): 1},
    )
    output_terms = {
        (0, 0): {0: 1, 3: 1, 4: -1, 6: 1},
        (0, 1): {2: 1, 4: 1},
        (1, 0): {1: 1, 3: 1},
        (1, 1): {0: 1, 1: -1, 2: 1, 5: 1},
    }
    for r, (left, right) in enumerate(zip(left_terms, right_terms)):
        for index, value in left.items():
            a[(r, *index)] = value
        for index, value in right.items():
            b[(r, *index)] = value
    for (j, k), terms in output_terms.items():
        for r, value in terms.items():
            c[r, j, k] = value
    return a, b, c


def builtin_tensor(
    kind: TensorKind | str = TensorKind.NAIVE,
    m: int = 1,
    p: int = 1,
    n: int = 1,
    prime_field: PrimeField | None = None,
) -> BilinearTensor:
    """Return a verified naive or Strassen tensor."""
    kind = TensorKind(kind)
    if min(m, p, n) < 1:
        raise InvalidParams("partition sizes must be positive")
    if kind is TensorKind.STRASSEN:
        if (m, p, n) != (2, 2, 2):
            raise InvalidParams("the Strassen tensor only exists for m=p=n=2")
        a, b, c = _strassen()
    else:
        a, b, c = _naive(m, p, n)
    tensor = BilinearTensor(kind, m, p, n, a, b, c)
    if not tensor.verify(prime_field or PrimeField()):
        raise InvalidParams(f"{kind} tensor failed the bilinear identity check")
    _LOGGER.debug("built %s tensor of rank %s for (%s,%s,%s)", kind, tensor.rank, m, p, n)
    return tensor
