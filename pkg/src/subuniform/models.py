"""Worst-case generative models and exact posterior predictive p-values.

Each model is a small Bayesian setup (finite parameter support, closed-form
posterior and conditional survival function) whose posterior predictive
p-value

    P = sum_theta  posterior(theta | D) * P{f(D*, theta) >= f(D, theta) | theta}

is computed exactly, so frequency properties of P can be simulated at scale
without inner Monte Carlo.  The built-ins realize the extreme behaviours:

* lasso_model    - a particle on a looped course; with the uniform travel law
  the p-value law is exactly the extremal point-mass-plus-uniform mixture.
* simplex_model  - two overlapping uniform components; the p-value has an
  atom of twice its own location (same extremal family, reparametrized).
* port_model     - finite record/port setup with a discrete p-value.
* ruschendorf_sample - a direct two-draw averaging construction with the
  extremal law, no model needed.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import EmpiricalSample, RngStream

__all__ = [
    "SurvivalG",
    "uniform_g",
    "power_g",
    "G_FAMILIES",
    "GenerativeModel",
    "exact_ppp",
    "lasso_model",
    "simplex_model",
    "simplex_atom",
    "port_model",
    "load_port_pmfs",
    "ruschendorf_sample",
    "FrequencyRun",
    "frequency_run",
]

_BLOCK = 1 << 16


# ------------------------------------------------------------------ travel laws

@dataclass(frozen=True)
class SurvivalG:
    """A continuous travel-distance law on [0,1) given by its survival function."""

    name: str
    sf: Callable[[np.ndarray], np.ndarray]
    density: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]


def uniform_g() -> SurvivalG:
    """G(t) = 1 - t: uniform travel distance."""
    return SurvivalG(
        name="uniform",
        sf=lambda t: 1.0 - t,
        density=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        sampler=lambda g, n: g.random(n),
    )


def power_g(k: int) -> SurvivalG:
    """G(t) = (1 - t)^k: shorter travels more likely, k in {2, 3}."""
    if k not in (2, 3):
        raise ValueError(f"power_g supports k in {{2, 3}}, got {k!r}")
    return SurvivalG(
        name=f"power{k}",
        sf=lambda t: (1.0 - t) ** k,
        density=lambda t: k * (1.0 - t) ** (k - 1),
        sampler=lambda g, n: 1.0 - g.random(n) ** (1.0 / k),
    )


G_FAMILIES: dict[str, Callable[[], SurvivalG]] = {
    "uniform": uniform_g,
    "power2": lambda: power_g(2),
    "power3": lambda: power_g(3),
}


# ------------------------------------------------------------------ model container

@dataclass(frozen=True)
class GenerativeModel:
    """A finite-parameter Bayesian model with exact p-value ingredients.

    All callables broadcast over numpy arrays:
      sample_data(theta, generator) -> data drawn from the model given theta
      posterior(D)                  -> (k,) or (k, n) posterior over theta_support
      discrepancy(D, theta)         -> f(D, theta)
      conditional_sf(theta, D)      -> P{f(D*, theta) >= f(D, theta) | theta, D}
    """

    model_id: str
    theta_support: np.ndarray
    prior: np.ndarray
    sample_data: Callable
    posterior: Callable
    discrepancy: Callable
    conditional_sf: Callable

    def sample_prior(self, gen: np.random.Generator, n: int) -> np.ndarray:
        cum = np.cumsum(self.prior)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, gen.random(n), side="right")
        return self.theta_support[idx]

    def draw_pvalues(self, gen: np.random.Generator, n: int) -> np.ndarray:
        theta = self.sample_prior(gen, n)
        data = self.sample_data(theta, gen)
        return exact_ppp(self, data)


def exact_ppp(model: GenerativeModel, data) -> np.ndarray | float:
    """Posterior-averaged conditional survival: the exact p-value at the data."""
    arr = np.asarray(data)
    scalar = arr.ndim == 0
    probs = np.asarray(model.posterior(data), dtype=float)
    if scalar:
        sf = np.array([float(model.conditional_sf(th, data)) for th in model.theta_support])
        return float(np.sum(probs * sf))
    if probs.ndim == 1:
        probs = np.broadcast_to(probs[:, None], (probs.size, arr.size))
    sf = np.stack([np.broadcast_to(np.asarray(model.conditional_sf(th, arr), dtype=float), arr.shape)
                   for th in model.theta_support])
    return np.sum(probs * sf, axis=0)


# ------------------------------------------------------------------ lasso model

def lasso_model(alpha: float, g: SurvivalG | None = None) -> GenerativeModel:
    """Particle on a course that closes into a loop.

    The travel direction theta (clockwise = 1, anticlockwise = 0) has prior
    1/2 each; travel distance has survival G on [0,1).  Clockwise position x
    relates to distance via

        f(x, theta) = x                   if x <= 1 - 2*alpha
                      x                   if x  > 1 - 2*alpha and theta = 1
                      2 - 2*alpha - x     if x  > 1 - 2*alpha and theta = 0

    and the discrepancy is the travelled distance itself.  With the uniform
    travel law the p-value equals 1 - x below the fork and exactly alpha on
    the far arc, so its law is the extremal mixture with atom at alpha.
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    if g is None:
        g = uniform_g()
    c = 1.0 - 2.0 * alpha

    def distance(x, theta):
        x = np.asarray(x, dtype=float)
        return np.where((x <= c) | (np.asarray(theta) == 1), x, 2.0 - 2.0 * alpha - x)

    def sample_data(theta, gen):
        dist = g.sampler(gen, np.asarray(theta).size)
        return np.where((np.asarray(theta) == 1) | (dist <= c), dist, 2.0 - 2.0 * alpha - dist)

    def posterior(x):
        x = np.asarray(x, dtype=float)
        w = np.stack([g.density(distance(x, th)) for th in (0, 1)])
        w = np.where(w < 0, 0.0, w)  # guard float dust at f = 1
        return w / np.sum(w, axis=0)

    def conditional_sf(theta, x):
        return g.sf(distance(x, theta))

    return GenerativeModel(
        model_id=f"lasso(alpha={alpha:g},g={g.name})",
        theta_support=np.array([0, 1]),
        prior=np.array([0.5, 0.5]),
        sample_data=sample_data,
        posterior=posterior,
        discrepancy=lambda x, theta: distance(x, theta),
        conditional_sf=conditional_sf,
    )


# ------------------------------------------------------------------ simplex model

def simplex_model(alpha: float) -> GenerativeModel:
    """Two uniform components on overlapping intervals of the unit segment.

    x | theta=0 ~ U[0, 0.5+alpha),  x | theta=1 ~ U(0.5-alpha, 1], prior 1/2
    each, discrepancy f(x, theta) = |x - theta|.  On the overlap the posterior
    is (1/2, 1/2) and the p-value is constant at a = alpha/(0.5+alpha), an
    atom of mass 2a; outside the overlap the p-value is uniform on (2a, 1].
    The realized law is therefore the extremal mixture with parameter a
    (note: a, not alpha itself).
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    w = 0.5 + alpha

    def sample_data(theta, gen):
        u = gen.random(np.asarray(theta).size) * w
        return np.where(np.asarray(theta) == 0, u, 1.0 - u)

    def posterior(x):
        x = np.asarray(x, dtype=float)
        # densities with the half-open conventions [0, w) and (1-w, 1]
        d0 = ((x >= 0.0) & (x < w)).astype(float)
        d1 = ((x > 1.0 - w) & (x <= 1.0)).astype(float)
        tot = d0 + d1
        if np.any(tot == 0.0):
            raise ValueError("data outside the model support")
        return np.stack([d0, d1]) / tot

    def conditional_sf(theta, x):
        d = np.abs(np.asarray(x, dtype=float) - theta)
        return np.clip((w - d) / w, 0.0, 1.0)

    return GenerativeModel(
        model_id=f"simplex(alpha={alpha:g})",
        theta_support=np.array([0, 1]),
        prior=np.array([0.5, 0.5]),
        sample_data=sample_data,
        posterior=posterior,
        discrepancy=lambda x, theta: np.abs(np.asarray(x, dtype=float) - theta),
        conditional_sf=conditional_sf,
    )


def simplex_atom(alpha: float) -> float:
    """Location of the simplex model's p-value atom: alpha / (0.5 + alpha)."""
    return alpha / (0.5 + alpha)


# ------------------------------------------------------------------ port model

def port_model(pmfs: np.ndarray,
               posterior_spec: np.ndarray | Callable | None = None,
               prior: np.ndarray | None = None) -> GenerativeModel:
    """Finite record model: under application theta the record lands in port j
    with probability h(j, theta).

    The conditional p-value given theta at observed port pi is the total mass
    of ports no more likely than pi:

        Q(theta, pi) = sum_j h(j, theta) * 1{h(j, theta) <= h(pi, theta)}

    and the reported p-value averages Q over posterior_spec.  posterior_spec
    may be a fixed vector over applications (the regime where the analyst's
    posterior is insensitive to the port; default = the prior), or a callable
    pi -> weights for a port-informed posterior.
    """
    h = np.asarray(pmfs, dtype=float)
    if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 2:
        raise ValueError("pmfs must be a (n_apps, n_ports) array with >= 2 ports")
    if np.any(h < 0.0):
        raise ValueError("pmf entries must be non-negative")
    if np.any(np.abs(h.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("each pmf row must sum to 1")
    n_apps, n_ports = h.shape
    if prior is None:
        prior = np.full(n_apps, 1.0 / n_apps)
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (n_apps,) or np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise ValueError("prior must be a probability vector over applications")

    # Q[theta, pi]: mass of ports whose pmf value does not exceed that of pi
    q_table = np.empty_like(h)
    for a in range(n_apps):
        q_table[a] = np.array([h[a][h[a] <= h[a, j]].sum() for j in range(n_ports)])

    if posterior_spec is None:
        posterior_spec = prior
    if callable(posterior_spec):
        post_fn = posterior_spec
    else:
        w = np.asarray(posterior_spec, dtype=float)
        if w.shape != (n_apps,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("posterior_spec vector must be a probability vector over applications")

        def post_fn(pi, _w=w):
            return _w

    cum = np.cumsum(h, axis=1)
    cum[:, -1] = 1.0

    def sample_data(theta, gen):
        theta = np.asarray(theta)
        u = gen.random(theta.size)
        out = np.empty(theta.size, dtype=int)
        for a in range(n_apps):
            sel = theta == a
            if np.any(sel):
                out[sel] = np.searchsorted(cum[a], u[sel], side="right")
        return out

    def conditional_sf(theta, pi):
        return q_table[np.asarray(theta, dtype=int), np.asarray(pi, dtype=int)]

    return GenerativeModel(
        model_id=f"port(n_apps={n_apps},n_ports={n_ports})",
        theta_support=np.arange(n_apps),
        prior=prior,
        sample_data=sample_data,
        posterior=post_fn,
        discrepancy=lambda pi, theta: -h[np.asarray(theta, dtype=int), np.asarray(pi, dtype=int)],
        conditional_sf=conditional_sf,
    )


def load_port_pmfs(path: str) -> np.ndarray:
    """Load port pmfs from CSV: one row per application, one column per port."""
    try:
        h = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError:
        raise
    except ValueError as exc:
        raise ValueError(f"malformed pmf CSV {path!r}: {exc}") from exc
    return h


# ------------------------------------------------------------------ direct construction

def ruschendorf_sample(alpha: float, rng: RngStream | np.random.Generator, n: int) -> EmpiricalSample:
    """Average of an antithetic pair of uniforms hitting the extremal law.

    U1 = U0 when U0 >= 2*alpha, else 2*alpha - U0; the average (U0 + U1)/2 is
    alpha exactly on the reflected branch (the atom lands on alpha verbatim)
    and U0 on the other, which is the extremal mixture for this alpha.
    """
    if not 0.0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5], got {alpha!r}")
    if n <= 0:
        raise ValueError("n must be positive")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    u0 = gen.random(n)
    return EmpiricalSample(np.where(u0 < 2.0 * alpha, alpha, u0))


# ------------------------------------------------------------------ frequency runs

@dataclass(frozen=True)
class FrequencyRun:
    """Exact p-values from n independent prior-predictive replicates."""

    model_id: str
    n: int
    seed: int
    stream_id: int
    pvalues: EmpiricalSample

    def summary(self, grid_points: int = 512,
                alphas: Sequence[float] = (0.01, 0.05, 0.1, 0.25)) -> dict:
        grid = np.linspace(0.0, 1.0, grid_points)
        return {
            "model": self.model_id,
            "n": self.n,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "mean": self.pvalues.mean(),
            "variance": self.pvalues.variance(),
            "tail_probs": {f"{a:g}": self.pvalues.tail_prob(a) for a in alphas},
            "ecdf": {
                "x": [float(v) for v in grid],
                "F": [float(v) for v in self.pvalues.ecdf(grid)],
            },
        }

    def summary_json(self, **kwargs) -> str:
        return json.dumps(self.summary(**kwargs))

    def to_csv(self, path: str) -> None:
        np.savetxt(path, self.pvalues.values, fmt="%.17g")


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("PPP_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def frequency_run(model, n: int, rng: RngStream, threads: int | None = None) -> FrequencyRun:
    """n independent replicates of (theta ~ prior, D ~ model, P = exact p-value).

    Work is split into fixed-size blocks, each with its own derived RNG
    stream; the block partition does not depend on the worker count, so the
    result is bit-identical for any PPP_THREADS setting.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    sizes = [_BLOCK] * (n // _BLOCK)
    if n % _BLOCK:
        sizes.append(n % _BLOCK)

    def run_block(b: int) -> np.ndarray:
        return np.asarray(model.draw_pvalues(rng.block_generator(b), sizes[b]))

    workers = _thread_count(threads)
    if workers == 1 or len(sizes) == 1:
        parts = [run_block(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, range(len(sizes))))
    values = np.concatenate(parts)
    return FrequencyRun(
        model_id=getattr(model, "model_id", type(model).__name__),
        n=n, seed=rng.seed, stream_id=rng.stream_id,
        pvalues=EmpiricalSample(values),
    )
