"""Canonical partition functions Z_0..Z_Nmax for a weight vector.

Three independent routes to the same numbers:

* :func:`z_bruteforce` -- exhaustive sum over occupation configurations,
  the oracle everything else is tested against;
* :func:`z_powersum` -- the production engine, the power-sum recursion
  N Z_N = sum_{k=1..N} B_k Z_{N-k} with B_k = sum_i x_i^k, all terms
  positive so the log backend never cancels;
* :func:`z_removed_table` -- the recursion re-run on a reduced weight
  set.  Reduced tables are never formed by subtracting full ones; the
  subtraction identity Z_{N,i} = Z_N - x_i Z_{N-1} survives only as an
  exact-mode consistency check (:func:`decomposition_check`).

The free-energy sequence F_N = -ln Z_N is convex in N (equivalently the
Z_N are log-concave); the verify module checks that exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

import numpy as np

from .numerics import LogFloat, Mode, Scalar, format_rational, logsumexp_array, scalar_to_json
from .spectrum import WeightVector

__all__ = [
    "PartitionTable",
    "ResourceCaps",
    "DEFAULT_CAPS",
    "weak_compositions",
    "z_bruteforce",
    "z_powersum",
    "z_removed_table",
    "decomposition_check",
    "DecompositionReport",
    "free_energy_sequence",
    "table_to_csv",
    "table_to_json_dict",
]

#: hard guard on brute-force enumeration size
BRUTEFORCE_MAX_CONFIGS = 10**7


@dataclass(frozen=True)
class ResourceCaps:
    """Size limits for table construction; override per call if needed."""

    max_levels: int
    max_particles: int


DEFAULT_CAPS = {
    Mode.EXACT: ResourceCaps(max_levels=16, max_particles=64),
    Mode.LOGFLOAT: ResourceCaps(max_levels=100_000, max_particles=10_000),
}


@dataclass(frozen=True)
class PartitionTable:
    """Z_0..Z_Nmax for a generating system, minus any removed levels."""

    weights: WeightVector
    removed: frozenset[int]
    values: tuple[Scalar, ...]
    mode: Mode

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("a partition table holds at least Z_0")

    @property
    def nmax(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> Scalar:
        return self.values[n]

    def log_array(self) -> np.ndarray:
        """Table as log-values (both modes; exact entries converted)."""
        if self.mode is Mode.LOGFLOAT:
            return np.array([v.log for v in self.values], dtype=float)
        return np.array([LogFloat.from_value(v).log for v in self.values], dtype=float)


def _check_caps(level_count: int, nmax: int, mode: Mode, caps: Optional[ResourceCaps]):
    if nmax < 0:
        raise ValueError("Nmax must be >= 0")
    caps = caps or DEFAULT_CAPS[mode]
    if level_count > caps.max_levels or nmax > caps.max_particles:
        raise ValueError(
            f"instance-too-large: L={level_count}, Nmax={nmax} exceeds caps "
            f"({caps.max_levels}, {caps.max_particles}); pass caps= to override"
        )


def weak_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All (n_1..n_parts) with n_j >= 0 summing to total, colex order.

    Explicit odometer so the enumeration order is fixed and failures are
    reproducible: repeatedly zero the leftmost nonzero bucket, carry one
    unit right, and refill the first bucket with the remainder.
    """
    if total < 0:
        return
    if parts == 0:
        if total == 0:
            yield ()
        return
    state = [0] * parts
    state[0] = total
    while True:
        yield tuple(state)
        k = 0
        while k < parts - 1 and state[k] == 0:
            k += 1
        if k == parts - 1:
            return
        carry = state[k]
        state[k] = 0
        state[k + 1] += 1
        state[0] = carry - 1


def _one(mode: Mode) -> Scalar:
    return Fraction(1) if mode is Mode.EXACT else LogFloat.from_log(0.0)


def _zero(mode: Mode) -> Scalar:
    return Fraction(0) if mode is Mode.EXACT else LogFloat.from_log(float("-inf"))


def z_bruteforce(w: WeightVector, nmax: int, caps: Optional[ResourceCaps] = None) -> PartitionTable:
    """Z by exhaustive enumeration of occupation configurations.

    This is the definition itself, summed term by term; use it as the
    oracle, not in production.  Rejects instances whose composition count
    C(Nmax+L-1, L-1) exceeds 10^7.
    """
    if nmax < 0:
        raise ValueError("Nmax must be >= 0")
    L = len(w)
    if L >= 1 and math.comb(nmax + L - 1, L - 1) > BRUTEFORCE_MAX_CONFIGS:
        raise ValueError(
            f"instance-too-large: {math.comb(nmax + L - 1, L - 1)} configurations "
            f"exceed the brute-force guard of {BRUTEFORCE_MAX_CONFIGS}"
        )
    values = []
    logx = w.log_values() if w.mode is Mode.LOGFLOAT else None
    for n in range(nmax + 1):
        if w.mode is Mode.EXACT:
            acc = Fraction(0)
            for config in weak_compositions(n, L):
                term = Fraction(1)
                for x, k in zip(w.weights, config):
                    if k:
                        term *= x**k
                acc += term
            values.append(acc)
        else:
            logs = [
                sum(k * lx for k, lx in zip(config, logx))
                for config in weak_compositions(n, L)
            ]
            if logs:
                values.append(LogFloat.from_log(logsumexp_array(np.array(logs))))
            else:
                values.append(_zero(w.mode))
    return PartitionTable(w, frozenset(), tuple(values), w.mode)


def _powersum_exact(weights: tuple[Fraction, ...], nmax: int) -> list[Fraction]:
    b = [Fraction(0)] * (nmax + 1)  # b[k] = sum_i x_i^k
    powers = list(weights)
    for k in range(1, nmax + 1):
        if k > 1:
            powers = [p * x for p, x in zip(powers, weights)]
        b[k] = sum(powers, Fraction(0))
    z = [Fraction(1)]
    for n in range(1, nmax + 1):
        acc = Fraction(0)
        for k in range(1, n + 1):
            acc += b[k] * z[n - k]
        z.append(acc / n)
    return z


def _powersum_log(log_weights: np.ndarray, nmax: int) -> np.ndarray:
    """Log-domain recursion; every addition is a max-shifted log-sum."""
    logb = np.full(nmax + 1, float("-inf"))
    if log_weights.size:
        for k in range(1, nmax + 1):
            logb[k] = logsumexp_array(k * log_weights)
    logz = np.full(nmax + 1, float("-inf"))
    logz[0] = 0.0
    for n in range(1, nmax + 1):
        terms = logb[1 : n + 1] + logz[n - 1 :: -1]
        logz[n] = logsumexp_array(terms) - math.log(n)
    return logz


def z_powersum(w: WeightVector, nmax: int, caps: Optional[ResourceCaps] = None) -> PartitionTable:
    """Z by the power-sum recursion, O(Nmax*L + Nmax^2) scalar operations."""
    _check_caps(len(w), nmax, w.mode, caps)
    if w.mode is Mode.EXACT:
        values = tuple(_powersum_exact(w.weights, nmax))
    else:
        logz = _powersum_log(np.array(w.log_values(), dtype=float), nmax)
        values = tuple(LogFloat.from_log(v) for v in logz)
    return PartitionTable(w, frozenset(), values, w.mode)


def _reduced_vector(w: WeightVector, removed: frozenset[int]) -> WeightVector:
    kept = tuple(x for i, x in enumerate(w.weights) if i not in removed)
    return WeightVector(kept, w.mode)


def z_removed_table(
    w: WeightVector,
    removed: Iterable[int],
    nmax: int,
    caps: Optional[ResourceCaps] = None,
) -> PartitionTable:
    """Z for the system with the given levels deleted.

    Recomputed on the reduced weight set -- never by subtraction, which
    would cancel catastrophically in the log backend.  Removing every
    level is legal and gives Z_0 = 1, Z_N = 0.
    """
    removed = frozenset(removed)
    for i in removed:
        if not 0 <= i < len(w):
            raise IndexError(f"removed level {i} out of range for {len(w)} levels")
    reduced = _reduced_vector(w, removed)
    table = z_powersum(reduced, nmax, caps)
    return PartitionTable(w, removed, table.values, w.mode)


@dataclass(frozen=True)
class DecompositionReport:
    """Both sides of the two level-removal identities at one (i, N)."""

    level: int
    n: int
    z_n: Fraction
    geometric_sum: Fraction  # sum_k x_i^k Z_{N-k,i}
    z_removed: Fraction  # Z_{N,i}
    subtraction_value: Fraction  # Z_N - x_i Z_{N-1}

    @property
    def geometric_ok(self) -> bool:
        return self.z_n == self.geometric_sum

    @property
    def subtraction_ok(self) -> bool:
        return self.z_removed == self.subtraction_value

    @property
    def ok(self) -> bool:
        return self.geometric_ok and self.subtraction_ok


def decomposition_check(w: WeightVector, i: int, n: int) -> DecompositionReport:
    """Exact check of Z_N = sum_k x_i^k Z_{N-k,i} and its rearrangement
    Z_{N,i} = Z_N - x_i Z_{N-1} (peel the k = 0 term and re-sum)."""
    if w.mode is not Mode.EXACT:
        raise ValueError("decomposition_check is an exact-mode verification")
    if not 0 <= i < len(w):
        raise IndexError(f"level index {i} out of range")
    full = z_powersum(w, n)
    reduced = z_removed_table(w, {i}, n)
    x = w.weights[i]
    geo = Fraction(0)
    xk = Fraction(1)
    for k in range(n + 1):
        geo += xk * reduced.values[n - k]
        xk *= x
    z_prev = full.values[n - 1] if n >= 1 else Fraction(0)
    return DecompositionReport(
        level=i,
        n=n,
        z_n=full.values[n],
        geometric_sum=geo,
        z_removed=reduced.values[n],
        subtraction_value=full.values[n] - x * z_prev,
    )


def free_energy_sequence(table: PartitionTable) -> list[float]:
    """F_N = -ln Z_N as doubles (exact entries evaluated via big-int logs)."""
    out = []
    for n, v in enumerate(table.values):
        if isinstance(v, LogFloat):
            if v.is_zero:
                raise ValueError(f"free energy undefined: Z_{n} = 0")
            out.append(-v.log)
        else:
            if v <= 0:
                raise ValueError(f"free energy undefined: Z_{n} = {v}")
            out.append(-(math.log(v.numerator) - math.log(v.denominator)))
    return out


def table_to_csv(table: PartitionTable) -> str:
    """CSV rows (N, Z) -- exact entries as "p/q", log entries as ln Z."""
    buf = io.StringIO()
    if table.mode is Mode.EXACT:
        buf.write("N,Z\n")
        for n, v in enumerate(table.values):
            buf.write(f"{n},{format_rational(v)}\n")
    else:
        buf.write("N,ln_Z\n")
        for n, v in enumerate(table.values):
            buf.write(f"{n},{v.log!r}\n")
    return buf.getvalue()


def table_to_json_dict(table: PartitionTable) -> dict:
    return {
        "mode": table.mode.value,
        "removed": sorted(table.removed),
        "nmax": table.nmax,
        "values": [scalar_to_json(v) for v in table.values],
    }
