"""Sub-uniform distributions on [0,1].

A law P on [0,1] is sub-uniform when it precedes the uniform law in the
convex order: equal mean 1/2 and integrated distribution function below
x^2/2.  These are exactly the laws that a posterior predictive p-value can
have, so this family is the reference object for every calibration check in
the package.

Built-in variants:

* uniform01 - the uniform law itself;
* beta22    - Beta(2,2), a smooth strictly sub-uniform example;
* mixture   - point masses plus uniform pieces; covers the extremal family
  p2alpha(a) = (point mass at a with probability 2a) + (uniform on [2a,1]
  with probability 1-2a), which maximizes P(P <= a) among sub-uniform laws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special as _sp

from .idf import IntegratedDF, DominanceResult, dominates_cx, uniform_idf, beta22_idf
from .numerics import EmpiricalSample, RngStream

__all__ = [
    "SubUniformDist",
    "p2alpha",
    "cdf",
    "sample",
    "idf_of",
    "is_sub_uniform",
    "ks_distance",
    "atom_frequencies",
    "continuous_part_ks",
    "discretize",
    "as_p2alpha",
]


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class SubUniformDist:
    """A candidate sub-uniform law on [0,1].

    atoms:  ((location, mass), ...) point masses.
    pieces: ((lo, hi, mass), ...) uniform components on [lo, hi].
    Analytic variants carry empty atoms/pieces.
    """

    variant: str
    atoms: tuple[tuple[float, float], ...] = field(default=())
    pieces: tuple[tuple[float, float, float], ...] = field(default=())

    def __post_init__(self):
        if self.variant in ("uniform01", "beta22"):
            if self.atoms or self.pieces:
                raise ValueError(f"{self.variant} takes no atoms or pieces")
            return
        if self.variant != "mixture":
            raise ValueError(f"unknown distribution variant {self.variant!r}")
        total = 0.0
        for loc, mass in self.atoms:
            if not (0.0 <= loc <= 1.0):
                raise ValueError(f"atom location {loc!r} outside [0,1]")
            if not mass > 0.0:
                raise ValueError(f"atom mass {mass!r} must be positive")
            total += mass
        for lo, hi, mass in self.pieces:
            if not (0.0 <= lo < hi <= 1.0):
                raise ValueError(f"uniform piece ({lo!r}, {hi!r}) must satisfy 0 <= lo < hi <= 1")
            if not mass > 0.0:
                raise ValueError(f"piece mass {mass!r} must be positive")
            total += mass
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture masses must sum to 1, got {total!r}")
        if not (self.atoms or self.pieces):
            raise ValueError("mixture needs at least one component")

    # ---------------------------------------------------------------- queries

    def cdf(self, x) -> np.ndarray | float:
        xq = np.asarray(x, dtype=float)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        if self.variant == "uniform01":
            out = np.clip(xq, 0.0, 1.0)
        elif self.variant == "beta22":
            xc = np.clip(xq, 0.0, 1.0)
            out = 3.0 * xc**2 - 2.0 * xc**3
        else:
            out = np.zeros_like(xq)
            for loc, mass in self.atoms:
                out += mass * (xq >= loc)
            for lo, hi, mass in self.pieces:
                out += mass * np.clip((xq - lo) / (hi - lo), 0.0, 1.0)
        return float(out[0]) if scalar else out

    def mean(self) -> float:
        if self.variant in ("uniform01", "beta22"):
            return 0.5
        m = sum(mass * loc for loc, mass in self.atoms)
        m += sum(mass * (lo + hi) / 2.0 for lo, hi, mass in self.pieces)
        return float(m)

    def atom_mass_at(self, x: float) -> float:
        return float(sum(mass for loc, mass in self.atoms if loc == x))

    def sample(self, rng, n: int) -> EmpiricalSample:
        """n inverse-CDF draws.  Atom draws return the atom location verbatim,
        so equality tests against atom locations are exact."""
        g = _as_generator(rng)
        if n <= 0:
            raise ValueError("n must be positive")
        if self.variant == "uniform01":
            return EmpiricalSample(g.random(n))
        if self.variant == "beta22":
            return EmpiricalSample(_sp.betaincinv(2.0, 2.0, g.random(n)))
        # mixture: pick a component by mass, then sample within it
        comps: list[tuple[float, tuple]] = [(m, ("atom", loc)) for loc, m in self.atoms]
        comps += [(m, ("piece", lo, hi)) for lo, hi, m in self.pieces]
        cum = np.cumsum([m for m, _ in comps])
        cum[-1] = 1.0
        u = g.random(n)
        idx = np.searchsorted(cum, u, side="right")
        out = np.empty(n)
        prev = np.concatenate([[0.0], cum[:-1]])
        for k, (m, spec) in enumerate(comps):
            sel = idx == k
            if not np.any(sel):
                continue
            if spec[0] == "atom":
                out[sel] = spec[1]
            else:
                _, lo, hi = spec
                out[sel] = lo + (u[sel] - prev[k]) / m * (hi - lo)
        return EmpiricalSample(out)

    def idf(self) -> IntegratedDF:
        if self.variant == "uniform01":
            return uniform_idf()
        if self.variant == "beta22":
            return beta22_idf()
        # events: atom locations and piece endpoints; CDF is linear between them
        events = sorted({loc for loc, _ in self.atoms}
                        | {e for lo, hi, _ in self.pieces for e in (lo, hi)})
        bx: list[float] = []
        fv: list[float] = []
        for e in events:
            left = float(self.cdf(e)) - self.atom_mass_at(e)
            right = float(self.cdf(e))
            if not bx or left > fv[-1] + 1e-15 or e > bx[-1]:
                bx.append(e)
                fv.append(left)
            if right > left:
                bx.append(e)
                fv.append(right)
        fv[-1] = 1.0
        return IntegratedDF.piecewise(np.array(bx), np.array(fv))

    def is_sub_uniform(self, tol: float = 1e-9) -> DominanceResult:
        """Convex-order check against the uniform law, with witness."""
        return dominates_cx(self.idf(), uniform_idf(), tol=tol)

    # ---------------------------------------------------------------- serde

    def to_json(self) -> str:
        if self.variant == "mixture":
            payload = {
                "variant": "mixture",
                "atoms": [[float(a), float(m)] for a, m in self.atoms],
                "pieces": [[float(lo), float(hi), float(m)] for lo, hi, m in self.pieces],
            }
        else:
            payload = {"variant": self.variant}
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "SubUniformDist":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed distribution JSON: {exc}") from exc
        if not isinstance(payload, dict) or "variant" not in payload:
            raise ValueError("distribution JSON must be an object with a 'variant' key")
        variant = payload["variant"]
        if variant in ("uniform01", "beta22"):
            return cls(variant)
        if variant == "p2alpha":  # accepted shorthand
            return p2alpha(float(payload["alpha"]))
        if variant == "mixture":
            atoms = tuple((float(a), float(m)) for a, m in payload.get("atoms", []))
            pieces = tuple((float(lo), float(hi), float(m)) for lo, hi, m in payload.get("pieces", []))
            return cls("mixture", atoms, pieces)
        raise ValueError(f"unknown distribution variant {variant!r}")


def p2alpha(alpha: float) -> SubUniformDist:
    """The extremal sub-uniform law: atom at alpha with mass 2*alpha plus a
    uniform remainder on [2*alpha, 1].

    Its CDF at alpha is 2*alpha, which attains the worst-case bound
    P(P <= alpha) <= 2*alpha; at alpha = 1/2 it degenerates to a point mass.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"p2alpha requires alpha in (0, 0.5], got {alpha!r}")
    if alpha == 0.5:
        return SubUniformDist("mixture", atoms=((0.5, 1.0),))
    return SubUniformDist("mixture",
                          atoms=((alpha, 2.0 * alpha),),
                          pieces=((2.0 * alpha, 1.0, 1.0 - 2.0 * alpha),))


def as_p2alpha(dist: SubUniformDist) -> float | None:
    """Return alpha if dist is structurally p2alpha(alpha), else None."""
    if dist.variant != "mixture":
        return None
    if len(dist.atoms) == 1 and not dist.pieces:
        loc, mass = dist.atoms[0]
        return 0.5 if (loc == 0.5 and mass == 1.0) else None
    if len(dist.atoms) == 1 and len(dist.pieces) == 1:
        (loc, mass), (lo, hi, pmass) = dist.atoms[0], dist.pieces[0]
        ok = (abs(mass - 2.0 * loc) < 1e-12 and abs(lo - 2.0 * loc) < 1e-12
              and hi == 1.0 and abs(pmass - (1.0 - 2.0 * loc)) < 1e-12)
        return loc if ok else None
    return None


# ------------------------------------------------------------------ functional API

def cdf(dist: SubUniformDist, x):
    return dist.cdf(x)


def sample(dist: SubUniformDist, rng, n: int) -> EmpiricalSample:
    return dist.sample(rng, n)


def idf_of(dist: SubUniformDist) -> IntegratedDF:
    return dist.idf()


def is_sub_uniform(dist: SubUniformDist, tol: float = 1e-9) -> DominanceResult:
    return dist.is_sub_uniform(tol=tol)


# ------------------------------------------------------------------ sample-vs-law fit

def ks_distance(dist: SubUniformDist, samp: EmpiricalSample,
                atom_window: float = 1e-9) -> float:
    """Exact sup distance between the empirical CDF and dist's CDF.

    Unlike the continuous-only KS formula this takes left limits at atoms, so
    laws with point masses are compared correctly.  Sample values within
    atom_window of an atom are snapped onto it first: simulators that reach an
    atom through float arithmetic land a few ulp off, and without snapping the
    sup distance would report the whole atom mass as missing.
    """
    values = samp.values
    if dist.atoms:
        values = values.copy()
        for loc, _ in dist.atoms:
            values[np.abs(values - loc) <= atom_window] = loc
        values = np.sort(values)
        samp = EmpiricalSample(values)
    cand = np.unique(np.concatenate([
        samp.values,
        np.array([loc for loc, _ in dist.atoms], dtype=float),
        np.array([e for lo, hi, _ in dist.pieces for e in (lo, hi)], dtype=float),
        np.array([0.0, 1.0]),
    ]))
    f = np.atleast_1d(np.asarray(dist.cdf(cand), dtype=float))
    atom_mass = np.zeros_like(f)
    for loc, mass in dist.atoms:
        atom_mass[cand == loc] += mass
    f_left = f - atom_mass
    e_right = samp.ecdf(cand)
    e_left = np.searchsorted(samp.values, cand, side="left") / samp.n
    d = np.maximum(np.abs(e_right - f), np.abs(e_left - f_left))
    return float(d.max())


def atom_frequencies(dist: SubUniformDist, samp: EmpiricalSample,
                     window: float = 1e-9) -> dict[float, float]:
    """Empirical frequency near each atom of dist (window absorbs float jitter)."""
    return {loc: samp.atom_frequency(loc, window=window) for loc, _ in dist.atoms}


def continuous_part_ks(dist: SubUniformDist, samp: EmpiricalSample,
                       window: float = 1e-9) -> float:
    """KS distance of the non-atom part of the sample against the conditional
    continuous part of dist."""
    total_atom = sum(m for _, m in dist.atoms)
    if total_atom >= 1.0 - 1e-12:
        raise ValueError("distribution has no continuous part")
    keep = np.ones(samp.n, dtype=bool)
    for loc, _ in dist.atoms:
        keep &= np.abs(samp.values - loc) > window
    if not np.any(keep):
        raise ValueError("sample has no values outside the atoms")
    sub = EmpiricalSample(samp.values[keep])
    atoms = dist.atoms

    def cond_cdf(x):
        xq = np.atleast_1d(np.asarray(x, dtype=float))
        f = np.asarray(dist.cdf(xq), dtype=float)
        for loc, mass in atoms:
            f -= mass * (xq >= loc)
        return f / (1.0 - total_atom)

    from .numerics import ks_statistic
    return ks_statistic(sub, cond_cdf)


# ------------------------------------------------------------------ discretization

def discretize(dist: SubUniformDist, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapse dist to at most n_cells atoms by conditional means over
    equal-mass quantile cells.

    Replacing cell mass by a point at its conditional mean is a convex-order
    reduction, so the result stays sub-uniform and keeps the exact mean.
    Returns (values, masses) with strictly increasing values.
    """
    if n_cells < 2:
        raise ValueError("n_cells must be at least 2")
    levels = np.linspace(0.0, 1.0, n_cells + 1)
    if dist.variant == "uniform01":
        vals = (levels[:-1] + levels[1:]) / 2.0
        masses = np.full(n_cells, 1.0 / n_cells)
    elif dist.variant == "beta22":
        edges = _sp.betaincinv(2.0, 2.0, levels)
        F = 3.0 * edges**2 - 2.0 * edges**3
        M1 = 2.0 * edges**3 - 1.5 * edges**4  # integral of x dF
        masses = np.diff(F)
        vals = np.diff(M1) / masses
    else:
        vals, masses = _discretize_mixture(dist, levels)
    # merge cells that collapsed onto the same point (atoms spanning cells)
    out_v: list[float] = []
    out_m: list[float] = []
    for v, m in zip(vals, masses):
        if out_v and v - out_v[-1] <= 1e-15:
            tot = out_m[-1] + m
            out_v[-1] = (out_v[-1] * out_m[-1] + v * m) / tot
            out_m[-1] = tot
        else:
            out_v.append(float(v))
            out_m.append(float(m))
    masses = np.array(out_m)
    return np.array(out_v), masses / masses.sum()


def _discretize_mixture(dist: SubUniformDist, levels: np.ndarray):
    """Quantile-cell conditional means via the piecewise-linear quantile function."""
    nodes = dist.idf()
    bx, fv = nodes.breakpoints, nodes.cdf
    # level segments: [fv[i], fv[i+1]] maps linearly to [bx[i], bx[i+1]];
    # an atom is a level span at constant x, a CDF flat is level-measure zero.
    seg_lo_f, seg_hi_f = fv[:-1], fv[1:]
    seg_lo_x, seg_hi_x = bx[:-1], bx[1:]
    keep = seg_hi_f > seg_lo_f
    seg_lo_f, seg_hi_f = seg_lo_f[keep], seg_hi_f[keep]
    seg_lo_x, seg_hi_x = seg_lo_x[keep], seg_hi_x[keep]

    def q_integral(a: float, b: float) -> float:
        """integral of the quantile function over levels [a, b]"""
        lo = np.clip(seg_lo_f, a, b)
        hi = np.clip(seg_hi_f, a, b)
        w = hi - lo
        act = w > 0
        if not np.any(act):
            return 0.0
        t0 = (lo[act] - seg_lo_f[act]) / (seg_hi_f[act] - seg_lo_f[act])
        t1 = (hi[act] - seg_lo_f[act]) / (seg_hi_f[act] - seg_lo_f[act])
        x0 = seg_lo_x[act] + t0 * (seg_hi_x[act] - seg_lo_x[act])
        x1 = seg_lo_x[act] + t1 * (seg_hi_x[act] - seg_lo_x[act])
        return float(np.sum(w[act] * (x0 + x1) / 2.0))

    vals = []
    masses = []
    for a, b in zip(levels[:-1], levels[1:]):
        m = b - a
        vals.append(q_integral(a, b) / m)
        masses.append(m)
    return np.array(vals), np.array(masses)
