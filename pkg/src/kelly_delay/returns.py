"""Bounded i.i.d. return models, path sampling and path enumeration.

Two model types are provided:

* :class:`BinaryLattice` -- ``X(k)`` equals ``x_max`` with probability ``p``
  and ``x_min`` otherwise.
* :class:`EmpiricalPMF` -- a finite set of atoms with exact rational weights,
  typically built from subsampled tick data (see :mod:`kelly_delay.ticks`).

Both expose ``values``/``probs`` arrays so downstream code can treat them
uniformly.
"""

from __future__ import annotations

import io
import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import numpy as np

DEFAULT_ENUMERATION_CAP = 22


class ModelError(ValueError):
    """Raised when a return model violates its invariants."""


class EnumerationCapError(ValueError):
    """Raised when exhaustive enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class BinaryLattice:
    x_max: float
    x_min: float
    p: float

    def __post_init__(self):
        if not (-1.0 < self.x_min < 0.0 < self.x_max < np.inf):
            raise ModelError(
                f"need -1 < x_min < 0 < x_max < inf, got x_min={self.x_min}, x_max={self.x_max}"
            )
        if not (0.0 <= self.p <= 1.0):
            raise ModelError(f"p must lie in [0, 1], got {self.p}")

    @property
    def values(self) -> np.ndarray:
        return np.array([self.x_max, self.x_min])

    @property
    def probs(self) -> np.ndarray:
        return np.array([self.p, 1.0 - self.p])

    def with_p(self, p: float) -> "BinaryLattice":
        return BinaryLattice(self.x_max, self.x_min, p)


@dataclass(frozen=True)
class EmpiricalPMF:
    """Finite return distribution with exact rational weights.

    ``atoms`` is a tuple of ``(value, weight)`` pairs sorted by value; weights
    are :class:`fractions.Fraction` instances summing to exactly one.
    """

    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise ModelError("an empirical PMF needs at least one atom")
        atoms = tuple(sorted((float(v), Fraction(w)) for v, w in self.atoms))
        total = sum(w for _, w in atoms)
        if total != 1:
            raise ModelError(f"weights must sum to exactly 1, got {total}")
        if any(w < 0 for _, w in atoms):
            raise ModelError("weights must be nonnegative")
        if any(v <= -1.0 for v, _ in atoms):
            raise ModelError("every return must be strictly greater than -1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_returns(cls, returns: Sequence[float]) -> "EmpiricalPMF":
        """One atom of weight ``1/m`` per observation; duplicates aggregate."""
        m = len(returns)
        if m == 0:
            raise ModelError("at least one return is required")
        counts: dict = {}
        for r in returns:
            counts[float(r)] = counts.get(float(r), 0) + 1
        return cls(tuple((v, Fraction(c, m)) for v, c in counts.items()))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms])

    @property
    def probs(self) -> np.ndarray:
        return np.array([float(w) for _, w in self.atoms])

    @property
    def x_min(self) -> float:
        return self.atoms[0][0]

    @property
    def x_max(self) -> float:
        return self.atoms[-1][0]


ReturnModel = Union[BinaryLattice, EmpiricalPMF]


@dataclass(frozen=True)
class ReturnPath:
    returns: np.ndarray
    seed: int | None = None
    path_index: int | None = None

    def __len__(self):
        return len(self.returns)

    def __eq__(self, other):
        if not isinstance(other, ReturnPath):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.path_index == other.path_index
            and np.array_equal(self.returns, other.returns)
        )

    __hash__ = None


def sufficient_attractiveness_margin(model: ReturnModel) -> float:
    """Return ``E[1/(1+X)]``; the model is sufficiently attractive when it is <= 1."""
    return float(np.dot(model.probs, 1.0 / (1.0 + model.values)))


def attractiveness_threshold(lattice: BinaryLattice) -> float:
    """Smallest ``p`` making the lattice sufficiently attractive."""
    return lattice.x_min * (1.0 + lattice.x_max) / (lattice.x_min - lattice.x_max)


# -- sampling ---------------------------------------------------------------


def stream_uniforms(seed: int, position: int, count: int) -> np.ndarray:
    """Uniforms at positions ``position .. position+count-1`` of the keyed stream.

    The stream is Philox-4x64 keyed by ``seed``; each uniform consumes one
    64-bit output and each counter value yields four outputs, so any position
    can be reached directly by setting the counter.
    """
    if position < 0 or count < 0:
        raise ValueError("position and count must be nonnegative")
    block, lane = divmod(position, 4)
    bitgen = np.random.Philox(key=seed, counter=[block & _MASK64, block >> 64, 0, 0])
    return np.random.Generator(bitgen).random(count + lane)[lane:]


_MASK64 = (1 << 64) - 1


def path_uniforms(seed: int, path_index: int, n: int) -> np.ndarray:
    """Uniform draws for stages ``0..n-1`` of one path.

    Stage ``s`` of path ``j`` reads stream position ``j*n + s``, so the draw
    depends only on ``(seed, path_index, stage)`` and the horizon ``n``.
    """
    if path_index < 0:
        raise ValueError("path_index must be nonnegative")
    return stream_uniforms(seed, path_index * n, n)


def _uniforms_to_returns(model: ReturnModel, u: np.ndarray) -> np.ndarray:
    if isinstance(model, BinaryLattice):
        return np.where(u < model.p, model.x_max, model.x_min)
    cdf = np.cumsum(model.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, u, side="right")
    return model.values[np.minimum(idx, len(cdf) - 1)]


def sample_path(model: ReturnModel, n: int, seed: int, path_index: int) -> ReturnPath:
    if n < 1:
        raise ValueError("n must be at least 1")
    x = _uniforms_to_returns(model, path_uniforms(seed, path_index, n))
    return ReturnPath(x, seed=seed, path_index=path_index)


def sample_block(model: ReturnModel, n: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Returns of paths ``start..stop-1`` stacked as a ``(stop-start, n)`` array.

    Row ``j`` equals ``sample_path(model, n, seed, start + j).returns``.
    """
    u = stream_uniforms(seed, start * n, (stop - start) * n).reshape(stop - start, n)
    return _uniforms_to_returns(model, u)


# -- enumeration ------------------------------------------------------------


def _check_cap(n: int, cap: int):
    if n > cap:
        raise EnumerationCapError(
            f"exhaustive enumeration of 2^{n} paths exceeds the enumeration cap n <= {cap}"
        )


def enumerate_paths(
    lattice: BinaryLattice, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[ReturnPath, float]]:
    """Yield every up/down path of length ``n`` with its probability."""
    _check_cap(n, cap)
    for ups in itertools.product((True, False), repeat=n):
        u = sum(ups)
        x = np.where(ups, lattice.x_max, lattice.x_min)
        yield ReturnPath(x), lattice.p**u * (1.0 - lattice.p) ** (n - u)


def enumerate_blocks(
    lattice: BinaryLattice, n: int, cap: int = DEFAULT_ENUMERATION_CAP, block_bits: int = 16
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Vectorised enumeration: yields ``(returns, probs)`` arrays in blocks.

    Path ``i`` has an up-move at stage ``k`` when bit ``n-1-k`` of ``i`` is
    zero, which reproduces the ordering of :func:`enumerate_paths`.
    """
    _check_cap(n, cap)
    total = 1 << n
    step = 1 << min(block_bits, n)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, step):
        idx = np.arange(start, start + step, dtype=np.int64)
        down = ((idx[:, None] >> shifts) & 1).astype(bool)
        ups = n - down.sum(axis=1)
        x = np.where(down, lattice.x_min, lattice.x_max)
        probs = lattice.p**ups * (1.0 - lattice.p) ** (n - ups)
        yield x, probs


# -- model files ------------------------------------------------------------


def dumps_model(model: ReturnModel) -> str:
    if isinstance(model, BinaryLattice):
        return f"x_max = {model.x_max!r}\nx_min = {model.x_min!r}\np = {model.p!r}\n"
    lines = ["return,weight"]
    lines += [f"{v!r},{w.numerator}/{w.denominator}" for v, w in model.atoms]
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> ReturnModel:
    """Parse a lattice (``key = value`` lines) or a ``return,weight`` table.

    Weights may be written as fractions (``2/3``) or decimals; decimals are
    converted exactly, so they must already sum to one.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in io.StringIO(text)]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ModelError("empty model file")
    if "=" in lines[0] or ":" in lines[0]:
        kv = {}
        for ln in lines:
            key, _, val = ln.replace(":", "=", 1).partition("=")
            kv[key.strip()] = float(val)
        try:
            return BinaryLattice(kv["x_max"], kv["x_min"], kv["p"])
        except KeyError as exc:
            raise ModelError(f"lattice file missing key {exc}") from None
    if lines[0].replace(" ", "").lower() == "return,weight":
        lines = lines[1:]
    atoms = []
    for ln in lines:
        v, w = ln.split(",")
        atoms.append((float(v), Fraction(w.strip())))
    return EmpiricalPMF(tuple(atoms))


def load_model(path: str | os.PathLike) -> ReturnModel:
    with open(path) as fh:
        return loads_model(fh.read())


def save_model(model: ReturnModel, path: str | os.PathLike):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))
