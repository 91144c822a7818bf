"""Finite one-body spectra and their Boltzmann weight vectors.

A :class:`LevelSet` is a user-truncated discrete spectrum (energies,
degeneracies, inverse temperature).  Expanding degeneracies gives one
weight x_i = exp(-beta * e_i) per level; the :class:`WeightVector` of
those weights is the sole input every ensemble computation needs.
Truncation is always the caller's job -- nothing here auto-truncates.

Exact mode cannot take a transcendental exponential, so it accepts
either direct rational weights or a rational log-base r in (0, 1) with
exponents beta * e_i that land on integers, making x_i = r^(beta * e_i)
exactly rational (harmonic ladders e_i = i are the typical case).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .numerics import (
    LogFloat,
    Mode,
    Scalar,
    format_rational,
    parse_rational,
    scalar_from_json,
    scalar_to_json,
)

__all__ = [
    "LevelSet",
    "WeightVector",
    "SpectrumInput",
    "InputError",
    "weights_from_spectrum",
    "add_level",
    "remove_level",
    "superset_embedding",
    "load_spectrum",
    "parse_spectrum_dict",
]

#: matching tolerance for log-float superset embedding (relative in linear domain)
EMBED_TOLERANCE = 1e-12


class InputError(ValueError):
    """A spectrum document violates its schema."""


@dataclass(frozen=True)
class LevelSet:
    """Finite spectrum: strictly ascending energies with degeneracies."""

    energies: tuple[Fraction, ...]
    degeneracies: tuple[int, ...]
    beta: Union[Fraction, float]
    log_base: Optional[Fraction] = None

    def __post_init__(self):
        if len(self.energies) == 0:
            raise ValueError("a spectrum needs at least one level")
        if len(self.energies) != len(self.degeneracies):
            raise ValueError("energies and degeneracies differ in length")
        for a, b in zip(self.energies, self.energies[1:]):
            if not a < b:
                raise ValueError("energies must be strictly ascending")
        if any(d < 1 for d in self.degeneracies):
            raise ValueError("degeneracies must be >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.log_base is not None and not (0 < self.log_base < 1):
            raise ValueError("log_base must lie strictly between 0 and 1")

    @property
    def level_count(self) -> int:
        """Expanded level count L (degeneracies summed)."""
        return sum(self.degeneracies)

    @property
    def has_gap(self) -> bool:
        """Whether the expanded spectrum satisfies e_0 < e_1."""
        return self.level_count >= 2 and self.degeneracies[0] == 1

    @property
    def distinct_energy_count(self) -> int:
        return len(self.energies)

    def expanded_energies(self) -> tuple[Fraction, ...]:
        """One energy per expanded level, ascending, degenerate copies repeated."""
        out = []
        for e, d in zip(self.energies, self.degeneracies):
            out.extend([e] * d)
        return tuple(out)

    def with_beta(self, beta: Union[Fraction, float]) -> "LevelSet":
        return LevelSet(self.energies, self.degeneracies, beta, self.log_base)


@dataclass(frozen=True)
class WeightVector:
    """Strictly positive Boltzmann weights, one per expanded level.

    The empty vector is the degenerate "all levels removed" system; it
    never arises from a spectrum, only from repeated level removal.
    """

    weights: tuple[Scalar, ...]
    mode: Mode

    def __post_init__(self):
        for x in self.weights:
            if self.mode is Mode.EXACT:
                if not isinstance(x, Fraction):
                    raise TypeError("exact-mode weights must be Fraction")
                if x <= 0:
                    raise ValueError("weights must be strictly positive")
            else:
                if not isinstance(x, LogFloat):
                    raise TypeError("logfloat-mode weights must be LogFloat")
                if x.is_zero:
                    raise ValueError("weights must be strictly positive")

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> Scalar:
        return self.weights[i]

    @property
    def level_count(self) -> int:
        return len(self.weights)

    def log_values(self):
        """Log of every weight as a float list (both modes)."""
        if self.mode is Mode.LOGFLOAT:
            return [x.log for x in self.weights]
        return [LogFloat.from_value(x).log for x in self.weights]

    def to_json(self) -> list:
        return [scalar_to_json(x) for x in self.weights]

    @classmethod
    def from_rationals(cls, values: Sequence, mode: Mode = Mode.EXACT) -> "WeightVector":
        """Convenience constructor from rationals / "p/q" strings."""
        fracs = [parse_rational(v) if not isinstance(v, Fraction) else v for v in values]
        if mode is Mode.EXACT:
            return cls(tuple(fracs), mode)
        return cls(tuple(LogFloat.from_value(f) for f in fracs), mode)


def weights_from_spectrum(levels: LevelSet, mode: Mode) -> WeightVector:
    """Expand a spectrum into its weight vector x_i = exp(-beta * e_i).

    Log-float mode stores the exponent directly (log x_i = -beta * e_i),
    so no exponential is ever evaluated.  Exact mode requires a rational
    log_base r and integer exponents beta * e_i, yielding the rational
    x_i = r^(beta * e_i); anything else raises, directing the caller to
    supply weights directly.
    """
    energies = levels.expanded_energies()
    if mode is Mode.LOGFLOAT:
        beta = float(levels.beta)
        return WeightVector(
            tuple(LogFloat.from_log(-beta * float(e)) for e in energies), mode
        )

    if levels.log_base is None:
        raise ValueError(
            "exact-weight-unrepresentable: exact mode needs a rational log_base "
            "(or supply weights directly)"
        )
    beta = Fraction(levels.beta)
    xs = []
    for e in energies:
        exponent = beta * e
        if exponent.denominator != 1:
            raise ValueError(
                f"exact-weight-unrepresentable: beta*energy = {exponent} is not an integer"
            )
        xs.append(levels.log_base ** exponent.numerator)
    return WeightVector(tuple(xs), mode)


def add_level(w: WeightVector, x: Scalar) -> WeightVector:
    """Append one extra level with weight x > 0."""
    if w.mode is Mode.EXACT:
        x = Fraction(x) if not isinstance(x, Fraction) else x
        if x <= 0:
            raise ValueError("added level weight must be strictly positive")
    else:
        if not isinstance(x, LogFloat):
            x = LogFloat.from_value(x)
        if x.is_zero:
            raise ValueError("added level weight must be strictly positive")
    return WeightVector(w.weights + (x,), w.mode)


def remove_level(w: WeightVector, i: int, allow_empty: bool = False) -> WeightVector:
    """Delete level i.  Reaching the empty system needs an explicit opt-in
    (doubly-reduced partition tables are the one legitimate use)."""
    if not 0 <= i < len(w):
        raise IndexError(f"level index {i} out of range for {len(w)} levels")
    if len(w) == 1 and not allow_empty:
        raise ValueError("removing the only level leaves an empty system; pass allow_empty=True")
    return WeightVector(w.weights[:i] + w.weights[i + 1 :], w.mode)


def _weights_match(a: Scalar, b: Scalar, mode: Mode) -> bool:
    if mode is Mode.EXACT:
        return a == b
    return abs(a.log - b.log) <= EMBED_TOLERANCE


def superset_embedding(w0: WeightVector, w1: WeightVector) -> tuple[int, ...]:
    """Injective position map of w0 into w1 realizing multiset inclusion.

    Repeated weights are matched with multiplicity; each source weight
    takes the first unused matching target.  Exact mode matches by exact
    equality, log-float mode by relative tolerance 1e-12.
    """
    if w0.mode is not w1.mode:
        raise TypeError("cannot embed across backends")
    used = [False] * len(w1)
    mapping = []
    for i, x in enumerate(w0.weights):
        for j, y in enumerate(w1.weights):
            if not used[j] and _weights_match(x, y, w0.mode):
                used[j] = True
                mapping.append(j)
                break
        else:
            raise ValueError(
                f"not-a-superset: weight #{i} of the smaller system has no unmatched "
                "counterpart in the larger one"
            )
    return tuple(mapping)


@dataclass(frozen=True)
class SpectrumInput:
    """A parsed spectrum document: weights always, energies when given."""

    mode: Mode
    weights: WeightVector
    level_set: Optional[LevelSet] = None

    def require_level_set(self) -> LevelSet:
        if self.level_set is None:
            raise ValueError("energies-required: this spectrum supplies weights only")
        return self.level_set


def parse_spectrum_dict(doc: dict) -> SpectrumInput:
    """Validate and build from the spectrum JSON schema.

    Exactly one of "levels" / "weights" must be present.  Rationals are
    "p/q" strings throughout; log-float weights may also be plain numbers
    (linear values) or {"log": true, "value": ...} objects.
    """
    if not isinstance(doc, dict):
        raise InputError("spectrum document must be a JSON object")
    try:
        mode = Mode.parse(doc["mode"])
    except KeyError:
        raise InputError('spectrum document lacks "mode"') from None
    except ValueError as exc:
        raise InputError(str(exc)) from None

    has_levels = "levels" in doc
    has_weights = "weights" in doc
    if has_levels == has_weights:
        raise InputError('exactly one of "levels" and "weights" must be present')

    if has_weights:
        if "log_base" in doc:
            raise InputError('"log_base" only applies to the "levels" form')
        raw = doc["weights"]
        if not isinstance(raw, list) or not raw:
            raise InputError('"weights" must be a nonempty list')
        try:
            ws = tuple(scalar_from_json(v, mode) for v in raw)
            return SpectrumInput(mode, WeightVector(ws, mode))
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad weight entry: {exc}") from None

    raw_levels = doc["levels"]
    if not isinstance(raw_levels, list) or not raw_levels:
        raise InputError('"levels" must be a nonempty list')
    energies, degs = [], []
    for entry in raw_levels:
        if not isinstance(entry, dict) or "energy" not in entry:
            raise InputError(f"bad level entry: {entry!r}")
        try:
            energies.append(parse_rational(entry["energy"]))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        d = entry.get("degeneracy", 1)
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise InputError(f"bad degeneracy: {d!r}")
        degs.append(d)

    if "beta" not in doc:
        raise InputError('spectrum with "levels" needs "beta"')
    raw_beta = doc["beta"]
    try:
        if mode is Mode.EXACT:
            beta: Union[Fraction, float] = parse_rational(raw_beta)
        else:
            beta = parse_rational(raw_beta) if isinstance(raw_beta, str) else float(raw_beta)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad beta: {raw_beta!r}") from exc

    log_base = None
    if "log_base" in doc:
        if mode is not Mode.EXACT:
            raise InputError('"log_base" only applies to exact mode')
        try:
            log_base = parse_rational(doc["log_base"])
        except ValueError as exc:
            raise InputError(str(exc)) from None

    try:
        levels = LevelSet(tuple(energies), tuple(degs), beta, log_base)
        return SpectrumInput(mode, weights_from_spectrum(levels, mode), levels)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def load_spectrum(path) -> SpectrumInput:
    """Read and parse a spectrum JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read spectrum file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"spectrum file is not valid JSON: {exc}") from exc
    return parse_spectrum_dict(doc)


def levelset_to_json(levels: LevelSet, mode: Mode) -> dict:
    """Inverse of the "levels" document form."""
    doc = {
        "mode": mode.value,
        "beta": format_rational(Fraction(levels.beta)) if isinstance(levels.beta, Fraction) else float(levels.beta),
        "levels": [
            {"energy": format_rational(e), "degeneracy": d}
            for e, d in zip(levels.energies, levels.degeneracies)
        ],
    }
    if levels.log_base is not None:
        doc["log_base"] = format_rational(levels.log_base)
    return doc
