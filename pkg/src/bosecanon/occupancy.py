"""Occupation-number statistics of the fixed-N ideal Bose ensemble.

Everything here reduces to level marginals: the probability that level j
holds exactly m of the N particles is

    p_m(x_j) = x_j^m * Z_{N-m,j} / Z_N,    m = 0..N,

with Z_{.,j} the partition table of the system missing level j.  Means,
second moments, pair moments (via the conditional decomposition over a
level's occupation), covariances, the temperature derivative of the
ground-level occupation, added-level means, exact ancestral sampling and
condensate curves are all built from that one object.

Covariances are signed, so they live outside the nonnegative scalar
backends: exact mode returns Fractions, log-float mode plain doubles.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .numerics import LogFloat, Mode, Scalar, logsumexp_array, scalar_to_json
from .partition import _powersum_log, weak_compositions, z_powersum, z_removed_table
from .spectrum import LevelSet, WeightVector, add_level, remove_level, weights_from_spectrum

__all__ = [
    "LevelMarginal",
    "OccupancyStats",
    "level_marginal",
    "mean_occupation",
    "mean_occupation_direct",
    "restricted_mean",
    "restricted_mean_series",
    "pair_moment",
    "second_moment",
    "covariance_matrix",
    "bruteforce_moments",
    "beta_derivative_ground",
    "mean_occupation_plus",
    "ConfigurationSampler",
    "sample_configuration",
    "condensate_curve",
]

Signed = Union[Fraction, float]


@dataclass(frozen=True)
class LevelMarginal:
    """Distribution of one level's occupation at fixed total N."""

    level: int
    n: int
    probs: tuple[Scalar, ...]
    mode: Mode

    def mean(self) -> Scalar:
        if self.mode is Mode.EXACT:
            return sum((m * p for m, p in enumerate(self.probs)), Fraction(0))
        terms = [math.log(m) + p.log for m, p in enumerate(self.probs) if m >= 1]
        if not terms:
            return LogFloat.from_log(float("-inf"))
        return LogFloat.from_log(logsumexp_array(np.array(terms)))

    def second_moment(self) -> Scalar:
        if self.mode is Mode.EXACT:
            return sum((m * m * p for m, p in enumerate(self.probs)), Fraction(0))
        terms = [2 * math.log(m) + p.log for m, p in enumerate(self.probs) if m >= 1]
        if not terms:
            return LogFloat.from_log(float("-inf"))
        return LogFloat.from_log(logsumexp_array(np.array(terms)))


@dataclass(frozen=True)
class OccupancyStats:
    """Means, pair moments and covariances for one (weights, N) pair."""

    weights: WeightVector
    n: int
    means: tuple[Scalar, ...]
    pair_moments: tuple[tuple[Scalar, ...], ...]
    covariance: tuple[tuple[Signed, ...], ...]
    mode: Mode

    def to_json_dict(self) -> dict:
        def signed(v: Signed):
            return scalar_to_json(v) if isinstance(v, Fraction) else float(v)

        return {
            "N": self.n,
            "mode": self.mode.value,
            "means": [scalar_to_json(m) for m in self.means],
            "cov": [[signed(c) for c in row] for row in self.covariance],
        }


def level_marginal(w: WeightVector, n: int, j: int) -> LevelMarginal:
    """p_m(x_j) for m = 0..N; sums to one exactly in exact mode."""
    if n < 0:
        raise ValueError("particle number must be >= 0")
    if not 0 <= j < len(w):
        raise IndexError(f"level index {j} out of range for {len(w)} levels")
    full = z_powersum(w, n)
    red = z_removed_table(w, {j}, n)
    if w.mode is Mode.EXACT:
        x = w.weights[j]
        zn = full.values[n]
        probs, xm = [], Fraction(1)
        for m in range(n + 1):
            probs.append(xm * red.values[n - m] / zn)
            xm *= x
        return LevelMarginal(j, n, tuple(probs), w.mode)
    lx = w.weights[j].log
    logred = red.log_array()
    logzn = full.values[n].log
    probs = tuple(
        LogFloat.from_log(m * lx + logred[n - m] - logzn) for m in range(n + 1)
    )
    return LevelMarginal(j, n, probs, w.mode)


def _mean_series_exact(w: WeightVector, i: int, nmax: int) -> list[Fraction]:
    full = z_powersum(w, nmax)
    red = z_removed_table(w, {i}, nmax)
    x = w.weights[i]
    out = [Fraction(0)]
    for n in range(1, nmax + 1):
        acc, xm = Fraction(0), Fraction(1)
        for m in range(1, n + 1):
            xm *= x
            acc += m * xm * red.values[n - m]
        out.append(acc / full.values[n])
    return out


def _mean_series_log(lx: float, logred: np.ndarray, logfull: np.ndarray, nmax: int) -> np.ndarray:
    """log of the mean occupation for n = 0..nmax (log 0 at n = 0)."""
    out = np.full(nmax + 1, float("-inf"))
    for n in range(1, nmax + 1):
        m = np.arange(1, n + 1, dtype=float)
        terms = np.log(m) + m * lx + logred[n - 1 :: -1]
        out[n] = logsumexp_array(terms) - logfull[n]
    return out


def _mean_series(w: WeightVector, i: int, nmax: int) -> list[Scalar]:
    if w.mode is Mode.EXACT:
        return _mean_series_exact(w, i, nmax)
    full = z_powersum(w, nmax)
    red = z_removed_table(w, {i}, nmax)
    logs = _mean_series_log(w.weights[i].log, red.log_array(), full.log_array(), nmax)
    return [LogFloat.from_log(v) for v in logs]


def mean_occupation(w: WeightVector, n: int, i: int) -> Scalar:
    """Mean occupation of level i at total particle number N."""
    if n < 0:
        raise ValueError("particle number must be >= 0")
    if not 0 <= i < len(w):
        raise IndexError(f"level index {i} out of range for {len(w)} levels")
    return level_marginal(w, n, i).mean()


def mean_occupation_direct(w: WeightVector, n: int, i: int) -> Scalar:
    """The same mean as the standalone sum (1/Z_N) sum_m m x_i^m Z_{N-m,i}.

    Slower route kept as a cross-check of the marginal path.
    """
    if not 0 <= i < len(w):
        raise IndexError(f"level index {i} out of range")
    return _mean_series(w, i, n)[n]


def restricted_mean(w: WeightVector, n: int, i: int, j: int) -> Scalar:
    """Mean of N_i in the n-particle ensemble with level j deleted.

    Identical to the mean on the reduced weight vector (index remapped);
    it is also the conditional mean of N_i given that level j holds
    N - n particles in the full N-particle system.
    """
    if i == j:
        raise ValueError("restricted mean needs two distinct levels")
    if not (0 <= i < len(w) and 0 <= j < len(w)):
        raise IndexError("level index out of range")
    if len(w) < 2:
        raise ValueError("restricted mean needs at least two levels")
    reduced = remove_level(w, j)
    return mean_occupation(reduced, n, i if i < j else i - 1)


def restricted_mean_series(w: WeightVector, i: int, j: int, nmax: int) -> list[Scalar]:
    """Restricted means for every n = 0..nmax at once."""
    if i == j:
        raise ValueError("restricted mean needs two distinct levels")
    reduced = remove_level(w, j)
    return _mean_series(reduced, i if i < j else i - 1, nmax)


def pair_moment(w: WeightVector, n: int, i: int, j: int) -> Scalar:
    """<N_i N_j> via conditioning on level j's occupation:
    sum_m m p_m(x_j) <N_i>_{N-m,j}."""
    if i == j:
        raise ValueError("pair moment needs i != j; use second_moment for the diagonal")
    if not (0 <= i < len(w) and 0 <= j < len(w)):
        raise IndexError("level index out of range")
    marg = level_marginal(w, n, j)
    series = restricted_mean_series(w, i, j, n)
    if w.mode is Mode.EXACT:
        return sum(
            (m * marg.probs[m] * series[n - m] for m in range(1, n + 1)), Fraction(0)
        )
    terms = [
        math.log(m) + marg.probs[m].log + series[n - m].log
        for m in range(1, n + 1)
        if not series[n - m].is_zero
    ]
    if not terms:
        return LogFloat.from_log(float("-inf"))
    return LogFloat.from_log(logsumexp_array(np.array(terms)))


def second_moment(w: WeightVector, n: int, i: int) -> Scalar:
    """<N_i^2> from the level marginal."""
    return level_marginal(w, n, i).second_moment()


def _signed_cov(pm: Scalar, mi: Scalar, mj: Scalar, mode: Mode) -> Signed:
    if mode is Mode.EXACT:
        return pm - mi * mj
    return pm.value - math.exp(mi.log + mj.log) if not (mi.is_zero or mj.is_zero) else pm.value


def covariance_matrix(w: WeightVector, n: int) -> OccupancyStats:
    """Full L x L moment and covariance matrices; rows sum to zero exactly
    in exact mode (the fixed-total constraint)."""
    if len(w) < 1:
        raise ValueError("需 at least one level" if False else "need at least one level")
    if n < 1:
        raise ValueError("covariances need N >= 1")
    L = len(w)
    means: list[Scalar] = []
    seconds: list[Scalar] = []
    for i in range(L):
        marg = level_marginal(w, n, i)
        means.append(marg.mean())
        seconds.append(marg.second_moment())
    pm: list[list[Scalar]] = [[None] * L for _ in range(L)]
    for i in range(L):
        pm[i][i] = seconds[i]
        for j in range(L):
            if i != j:
                pm[i][j] = pair_moment(w, n, i, j)
    cov = tuple(
        tuple(_signed_cov(pm[i][j], means[i], means[j], w.mode) for j in range(L))
        for i in range(L)
    )
    return OccupancyStats(
        weights=w,
        n=n,
        means=tuple(means),
        pair_moments=tuple(tuple(row) for row in pm),
        covariance=cov,
        mode=w.mode,
    )


def bruteforce_moments(w: WeightVector, n: int):
    """(Z_N, means, pair-moment matrix) by exhaustive configuration sum.

    Exact mode only -- this is the enumeration oracle the fast paths are
    checked against, straight from the joint distribution.
    """
    if w.mode is not Mode.EXACT:
        raise ValueError("the enumeration oracle runs in exact mode only")
    L = len(w)
    z = Fraction(0)
    raw_mean = [Fraction(0)] * L
    raw_pair = [[Fraction(0)] * L for _ in range(L)]
    for config in weak_compositions(n, L):
        term = Fraction(1)
        for x, k in zip(w.weights, config):
            if k:
                term *= x**k
        z += term
        for i in range(L):
            if config[i]:
                raw_mean[i] += config[i] * term
                for j in range(L):
                    if config[j]:
                        raw_pair[i][j] += config[i] * config[j] * term
    means = tuple(v / z for v in raw_mean)
    pairs = tuple(tuple(v / z for v in row) for row in raw_pair)
    return z, means, pairs


def _covariance_row(w: WeightVector, n: int, i: int) -> list[Signed]:
    marg_i = level_marginal(w, n, i)
    mi, si = marg_i.mean(), marg_i.second_moment()
    row: list[Signed] = []
    for j in range(len(w)):
        if j == i:
            row.append(_signed_cov(si, mi, mi, w.mode))
        else:
            mj = mean_occupation(w, n, j)
            row.append(_signed_cov(pair_moment(w, n, i, j), mi, mj, w.mode))
    return row


def beta_derivative_ground(
    levels: LevelSet, n: int, mode: Optional[Mode] = None
) -> Signed:
    """d<N_0>/d(beta) in closed form:
    -sum_{j>=1} (e_j - e_0) * cov(N_0, N_j).

    The e_j = e_0 terms drop and every remaining covariance is negative,
    so the result is positive whenever two energies differ.  Exact mode
    (rational energies and weights) returns an exact rational.
    """
    if mode is None:
        mode = Mode.EXACT if levels.log_base is not None else Mode.LOGFLOAT
    energies = levels.expanded_energies()
    if len(energies) < 2:
        raise ValueError("the temperature derivative needs at least two levels")
    w = weights_from_spectrum(levels, mode)
    cov0 = _covariance_row(w, n, 0)
    if mode is Mode.EXACT:
        total = Fraction(0)
        for j in range(1, len(energies)):
            total -= (energies[j] - energies[0]) * cov0[j]
        return total
    total = 0.0
    e0 = float(energies[0])
    for j in range(1, len(energies)):
        total -= (float(energies[j]) - e0) * cov0[j]
    return total


def mean_occupation_plus(
    w: WeightVector, x: Scalar, n: int, i: int
) -> tuple[Scalar, tuple[Scalar, ...]]:
    """Mean of original level i after appending an extra level of weight x.

    Also returns the mixture weights p_m = x^m Z_{N-m} / Z_N^plus (the
    new level's marginal), whose m = 0 entry Z_N / Z_N^plus is < 1 --
    that is what drags the mean strictly down.
    """
    if not 0 <= i < len(w):
        raise IndexError(f"level index {i} out of range")
    w_plus = add_level(w, x)
    mean_plus = mean_occupation(w_plus, n, i)
    marg_new = level_marginal(w_plus, n, len(w))
    return mean_plus, marg_new.probs


class ConfigurationSampler:
    """Exact ancestral sampler over occupation configurations.

    Draws N_0 from its marginal, removes the level, recurses on the
    remainder; the output is distributed exactly as the joint canonical
    law.  Inverse-CDF over double-precision cumulative sums (clamped to
    end at 1), driven by a seeded Mersenne Twister.
    """

    algorithm = "mt19937-inverse-cdf"

    def __init__(self, w: WeightVector, n: int, seed: int):
        if n < 0:
            raise ValueError("particle number must be >= 0")
        if len(w) == 0 and n > 0:
            raise ValueError("no levels to hold particles")
        self.weights = w
        self.n = n
        self.seed = seed
        self._rng = random.Random(seed)
        # stage k holds the partition table of levels k..L-1
        self._suffix = [
            z_powersum(WeightVector(w.weights[k:], w.mode), n).values
            for k in range(len(w) + 1)
        ]
        self._cdfs: dict[tuple[int, int], list[float]] = {}

    def _cdf(self, k: int, n: int) -> list[float]:
        key = (k, n)
        cached = self._cdfs.get(key)
        if cached is not None:
            return cached
        stage, rest = self._suffix[k], self._suffix[k + 1]
        x = self.weights[k]
        if self.weights.mode is Mode.EXACT:
            zn = stage[n]
            probs, xm = [], Fraction(1)
            for m in range(n + 1):
                probs.append(float(xm * rest[n - m] / zn))
                xm *= x
        else:
            lzn = stage[n].log
            probs = [
                math.exp(m * x.log + rest[n - m].log - lzn) if not rest[n - m].is_zero else 0.0
                for m in range(n + 1)
            ]
        cdf, acc = [], 0.0
        for p in probs:
            acc = min(acc + p, 1.0)
            cdf.append(acc)
        cdf[-1] = 1.0
        self._cdfs[key] = cdf
        return cdf

    def sample(self) -> tuple[int, ...]:
        L = len(self.weights)
        if L == 0:
            return ()
        out, remaining = [], self.n
        for k in range(L - 1):
            cdf = self._cdf(k, remaining)
            m = bisect_left(cdf, self._rng.random())
            out.append(m)
            remaining -= m
        out.append(remaining)
        return tuple(out)


def sample_configuration(w: WeightVector, n: int, seed: int) -> tuple[int, ...]:
    """One occupation vector, exactly canonically distributed, per seed."""
    return ConfigurationSampler(w, n, seed).sample()


def condensate_curve(
    levels: LevelSet, n: int, beta_grid: Sequence[float]
) -> list[tuple[float, float]]:
    """(beta, <N_0>/N) along an ascending positive beta grid.

    Evaluated in the log backend; strictly increasing in beta whenever
    the spectrum has two distinct energies.
    """
    if len(beta_grid) == 0:
        raise ValueError("beta grid must be nonempty")
    grid = [float(b) for b in beta_grid]
    if any(b <= 0 for b in grid):
        raise ValueError("beta grid must be strictly positive")
    if any(b1 >= b2 for b1, b2 in zip(grid, grid[1:])):
        raise ValueError("beta grid must be strictly ascending")
    if n < 1:
        raise ValueError("condensate fraction needs N >= 1")
    energies = np.array([float(e) for e in levels.expanded_energies()])
    out = []
    for beta in grid:
        logx = -beta * energies
        logfull = _powersum_log(logx, n)
        logred = _powersum_log(logx[1:], n)
        m = np.arange(1, n + 1, dtype=float)
        terms = np.log(m) + m * logx[0] + logred[n - 1 :: -1]
        log_mean = logsumexp_array(terms) - logfull[n]
        out.append((beta, math.exp(log_mean) / n))
    return out
