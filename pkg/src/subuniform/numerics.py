"""Shared numeric utilities: special functions, RNG streams, empirical samples.

Everything downstream (bounds, simulators, couplings) goes through this module
for chi-square tail work and reproducible random number generation, so the
contracts here are deliberately narrow and heavily tested.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import special as _sp
from scipy.optimize import brentq

__all__ = [
    "RngStream",
    "EmpiricalSample",
    "log_gamma",
    "chi2_sf",
    "chi2_quantile",
    "ks_statistic",
]


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Streams are derived with numpy's SeedSequence: stream (seed, stream_id)
    seeds a PCG64 generator from SeedSequence(seed, spawn_key=(stream_id,)),
    and block b of a blocked computation uses spawn_key=(stream_id, b).
    Identical (seed, stream_id) always yields the identical sequence; distinct
    stream_ids (or block indices) give statistically independent generators.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not (0 <= int(self.stream_id) < 2**64):
            raise ValueError("stream_id must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        """Generator for single-stream use."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def block_generator(self, block: int) -> np.random.Generator:
        """Generator for one block of a statically partitioned computation.

        The partition is independent of worker count, so blocked runs are
        bit-identical no matter how they are scheduled.
        """
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, block))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, offset: int) -> "RngStream":
        """A sibling stream; used when one operation needs several streams."""
        return RngStream(self.seed, self.stream_id + offset)


class EmpiricalSample:
    """A sorted sample of real values with the summaries used by the checks.

    Values are stored sorted ascending; order of generation is not kept.
    """

    __slots__ = ("values", "n")

    def __init__(self, values: np.ndarray | Iterable[float]):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("sample values must be one-dimensional")
        if arr.size == 0:
            raise ValueError("sample must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        arr = np.sort(arr)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "n", int(arr.size))

    def __setattr__(self, name, value):  # immutable once built
        raise AttributeError("EmpiricalSample is immutable")

    def __len__(self) -> int:
        return self.n

    def mean(self) -> float:
        return float(self.values.mean())

    def variance(self) -> float:
        # population variance; callers needing the unbiased one scale by n/(n-1)
        return float(self.values.var())

    def tail_prob(self, alpha: float, atom_tol: float = 1e-9) -> float:
        """Empirical P(X <= alpha).

        Values within atom_tol of alpha count as <= alpha: model p-values that
        are mathematically equal to an atom location carry float rounding of a
        few ulp, and a strict cutoff would split such an atom arbitrarily.
        """
        k = np.searchsorted(self.values, alpha + atom_tol, side="right")
        return float(k) / self.n

    def atom_frequency(self, location: float, window: float = 1e-9) -> float:
        """Fraction of the sample within +-window of location."""
        lo = np.searchsorted(self.values, location - window, side="left")
        hi = np.searchsorted(self.values, location + window, side="right")
        return float(hi - lo) / self.n

    def ecdf(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.values, x, side="right") / self.n


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return float(_sp.gammaln(x))


def chi2_sf(x: float, k: float) -> float:
    """Chi-square survival function P(X >= x) with k degrees of freedom.

    Computed as the regularized upper incomplete gamma Q(k/2, x/2); stable
    for degrees of freedom into the billions.
    """
    if not k > 0:
        raise ValueError(f"chi2_sf requires k > 0, got {k!r}")
    x = float(x)
    if x < 0.0:
        raise ValueError(f"chi2_sf requires x >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    return float(_sp.gammaincc(k / 2.0, x / 2.0))


def chi2_quantile(p: float, k: float) -> float:
    """Upper-tail chi-square quantile: the t with chi2_sf(t, k) = p.

    Bracketed root-finding on chi2_sf; the initial bracket
    [0, k + 40*sqrt(2k) + 100] is widened by doubling in the (extreme-tail)
    cases where it does not contain the root.
    """
    if not k > 0:
        raise ValueError(f"chi2_quantile requires k > 0, got {k!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"chi2_quantile requires 0 < p < 1, got {p!r}")
    hi = k + 40.0 * np.sqrt(2.0 * k) + 100.0
    while chi2_sf(hi, k) > p:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("chi2_quantile bracket expansion failed")
    t = brentq(lambda u: chi2_sf(u, k) - p, 0.0, hi,
               xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=300)
    return float(t)


def ks_statistic(sample: EmpiricalSample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov-Smirnov sup-distance between a sample and a continuous CDF.

    Standard form: max over order statistics v_(i) of
    max(i/n - F(v_i), F(v_i) - (i-1)/n).
    """
    v = sample.values
    n = sample.n
    f = np.asarray(cdf(v), dtype=float)
    if f.shape != v.shape:
        raise ValueError("cdf must evaluate elementwise on the sample")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))
