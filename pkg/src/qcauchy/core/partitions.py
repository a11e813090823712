"""
Partition arithmetic and the constrained enumerations behind every sum.

Enumerations yield canonical parts tuples internally and wrap them as
`Partition` at the boundary; all orders are deterministic.
"""

import logging
from typing import Iterator, List, Optional, Tuple

from ..models.partition import Partition
from .errors import ParameterError
from .qseries import QSeries


logger = logging.getLogger(__name__)

Parts = Tuple[int, ...]


def contains(rho: Partition, lam: Partition) -> bool:
    """rho ⊂ lam, i.e. rho_i <= lam_i for every i"""
    return lam.contains(rho)


def _bounded(max_part: int, max_length: int) -> Iterator[Parts]:
    # lexicographically descending, ∅ last
    if max_length > 0:
        for first in range(max_part, 0, -1):
            for rest in _bounded(first, max_length - 1):
                yield (first,) + rest
    yield ()


def enumerate_partitions(max_part: int, max_length: int) -> List[Partition]:
    """All λ with λ1 <= max_part and ℓ(λ) <= max_length, lexicographically descending"""
    if max_part < 0 or max_length < 0:
        raise ParameterError(f"bounds must be >= 0, got ({max_part}, {max_length})")
    return [Partition.trusted(p) for p in _bounded(max_part, max_length)]


def _of_weight(n: int, max_part: int, max_length: int) -> Iterator[Parts]:
    if n == 0:
        yield ()
        return
    if max_length == 0:
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _of_weight(n - first, first, max_length - 1):
            yield (first,) + rest


def partitions_of(n: int, max_part: Optional[int] = None, max_length: Optional[int] = None) -> List[Partition]:
    """Partitions of exactly n under the optional bounds"""
    part_cap = n if max_part is None else max_part
    length_cap = n if max_length is None else max_length
    return [Partition.trusted(p) for p in _of_weight(n, part_cap, length_cap)]


def enumerate_by_weight(
    max_weight: int,
    max_part: Optional[int] = None,
    max_length: Optional[int] = None,
) -> List[Partition]:
    """All λ with |λ| <= max_weight, by increasing weight then lexicographically descending"""
    if max_weight < 0:
        raise ParameterError(f"max_weight must be >= 0, got {max_weight}")
    result: List[Partition] = []
    for n in range(max_weight + 1):
        result.extend(partitions_of(n, max_part, max_length))
    logger.debug(f"Enumerated {len(result)} partitions of weight <= {max_weight}")
    return result


def restricted_weight_series(first_row_cap: int, order: int) -> QSeries:
    """Σ_{ν: ν1 <= cap} q^{|ν|} mod q^{order+1}, counted by enumeration"""
    if order < 0:
        raise ParameterError(f"order must be >= 0, got {order}")
    coeffs = [0] * (order + 1)
    for n in range(order + 1):
        coeffs[n] = sum(1 for _ in _of_weight(n, first_row_cap, n))
    return QSeries(coeffs, order)


def first_row_series(n: int, order: int) -> QSeries:
    """Σ_{λ: λ1 = n} q^{|λ|} mod q^{order+1}"""
    coeffs = [0] * (order + 1)
    for w in range(order + 1):
        if n == 0:
            coeffs[w] = 1 if w == 0 else 0
        elif w >= n:
            coeffs[w] = sum(1 for _ in _of_weight(w - n, n, w))
    return QSeries(coeffs, order)


def interlacing_partitions(mu: Partition, max_length: Optional[int] = None) -> List[Partition]:
    """All κ ≺ μ: μ_{i+1} <= κ_i <= μ_i, optionally with ℓ(κ) <= max_length"""
    parts = mu.parts
    rows = len(parts) if max_length is None else min(len(parts), max_length)
    if max_length is not None and len(parts) > max_length + 1:
        # κ_{max_length+1} >= μ_{max_length+2} > 0 would be forced
        return []

    def rec(i: int) -> Iterator[Parts]:
        if i == rows:
            yield ()
            return
        low = parts[i + 1] if i + 1 < len(parts) else 0
        for value in range(parts[i], low - 1, -1):
            for rest in rec(i + 1):
                yield (value,) + rest

    result = []
    for kappa in rec(0):
        trimmed = list(kappa)
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        if max_length is None or len(trimmed) <= max_length:
            result.append(Partition.trusted(tuple(trimmed)))
    return result


def subpartitions(lam: Partition, max_column: Optional[int] = None) -> List[Partition]:
    """All ρ ⊂ λ; with max_column = c, only those where λ/ρ has columns of height <= c"""
    parts = lam.parts
    c = max_column

    def rec(i: int, cap: int) -> Iterator[Parts]:
        if i == len(parts):
            yield ()
            return
        low = 0
        if c is not None and i + c < len(parts):
            low = parts[i + c]
        for value in range(min(parts[i], cap), low - 1, -1):
            for rest in rec(i + 1, value):
                yield (value,) + rest

    result = []
    for rho in rec(0, parts[0] if parts else 0):
        trimmed = list(rho)
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        result.append(Partition.trusted(tuple(trimmed)))
    return result


def superpartitions(rho: Partition, max_part: int, max_column: int) -> List[Partition]:
    """All λ ⊃ ρ with λ1 <= max_part and columns of λ/ρ of height <= max_column"""
    if rho.first_row > max_part:
        return []
    rows = rho.length + max_column
    parts = rho.parts

    def rec(i: int, cap: int) -> Iterator[Parts]:
        if i == rows:
            yield ()
            return
        low = rho[i]
        high = cap
        if i - max_column >= 0:
            high = min(high, rho[i - max_column])
        if low > high:
            return
        for value in range(high, low - 1, -1):
            for rest in rec(i + 1, value):
                yield (value,) + rest

    result = []
    for lam in rec(0, max_part):
        trimmed = list(lam)
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        result.append(Partition.trusted(tuple(trimmed)))
    logger.debug(f"{len(result)} superpartitions of {rho} (parts <= {max_part}, columns <= {max_column})")
    return result
