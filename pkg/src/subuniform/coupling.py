"""Constructive martingale couplings and the p-value synthesizer.

Every sub-uniform law nu admits a coupling (P, S) with P ~ nu, S uniform on
[0,1] and E(S | P) = P, where each conditional law S | P=p is either singular
(S = p) or absolutely continuous.  From such a coupling one manufactures a
Bayesian model whose exact posterior predictive p-value has law nu:

* the parameter theta follows any continuous CDF G positive on the line;
* within the row at p, the mod-1 shift
      U_t = Finv[ {F(S) + G(t)} mod 1 ]
  redistributes S without leaving the row, for every t;
* the discrepancy f(D, t) = Fbar_inv(U_t) (standard exponential survival)
  makes the conditional survival probability given theta=t equal U_t, and
  averaging U_theta over theta ~ G returns the row mean, i.e. P itself.

The coupling is explicit for the uniform target and for the extremal
atom-plus-uniform mixtures; any other sub-uniform target is first reduced to
a finite mean-preserving atom list, transported onto a binned uniform law by
a small linear program, and the bins are then spread uniformly so the rows
come out absolutely continuous and the S-marginal exactly uniform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as _sparse
import scipy.special as _sp
from scipy.optimize import linprog

from .distributions import SubUniformDist, as_p2alpha, discretize
from .idf import IntegratedDF, dominates_cx, uniform_idf
from .numerics import EmpiricalSample, RngStream

__all__ = [
    "SingularRow",
    "UniformMixRow",
    "ConditionalLaw",
    "explicit_p2alpha_coupling",
    "uniform_coupling",
    "TransportPlan",
    "TransportInfeasible",
    "martingale_transport",
    "continuize",
    "mod1_family",
    "G_CHOICES",
    "SyntheticPPPModel",
    "synthesize_ppp",
]


# ------------------------------------------------------------------ row laws

@dataclass(frozen=True)
class SingularRow:
    """S | P=p concentrated at p."""

    at: float

    def mean(self) -> float:
        return self.at

    def cdf(self, s) -> np.ndarray:
        return (np.asarray(s, dtype=float) >= self.at).astype(float)

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.at)


@dataclass(frozen=True)
class UniformMixRow:
    """S | P=p as a finite mixture of uniform slabs: an absolutely continuous
    row with a piecewise-constant density.

    intervals: ((lo, hi, weight), ...) with lo < hi, weights > 0 summing to 1,
    sorted and non-overlapping (gaps allowed).
    """

    intervals: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("a uniform-mix row needs at least one slab")
        prev_hi = -np.inf
        total = 0.0
        for lo, hi, w in self.intervals:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"bad slab ({lo}, {hi})")
            if lo < prev_hi - 1e-12:
                raise ValueError("slabs must be sorted and non-overlapping")
            if w <= 0.0:
                raise ValueError("slab weights must be positive")
            prev_hi = hi
            total += w
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"slab weights sum to {total!r}, expected 1")

    def mean(self) -> float:
        return float(sum(w * (lo + hi) / 2.0 for lo, hi, w in self.intervals))

    def support(self) -> tuple[float, float]:
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, s: float) -> bool:
        return any(lo - 1e-12 <= s <= hi + 1e-12 for lo, hi, _ in self.intervals)

    def cdf(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for lo, hi, w in self.intervals:
            out = out + w * np.clip((s - lo) / (hi - lo), 0.0, 1.0)
        return out

    def inverse(self, u) -> np.ndarray:
        """Generalized inverse CDF; u in [0, 1] maps into the support."""
        u = np.asarray(u, dtype=float)
        w = np.array([iv[2] for iv in self.intervals])
        cum = np.concatenate([[0.0], np.cumsum(w)])
        cum[-1] = 1.0
        idx = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(self.intervals) - 1)
        lo = np.array([iv[0] for iv in self.intervals])[idx]
        hi = np.array([iv[1] for iv in self.intervals])[idx]
        frac = (u - cum[idx]) / w[idx]
        return lo + np.clip(frac, 0.0, 1.0) * (hi - lo)

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return self.inverse(gen.random(n))


Row = SingularRow | UniformMixRow


# ------------------------------------------------------------------ conditional law

@dataclass(frozen=True)
class ConditionalLaw:
    """The family of conditional laws S | P=p of a martingale coupling.

    atom_rows: rows attached to atoms of the P-marginal, as (p, mass, row).
    singular_spans: intervals of p where the row is singular at p (used when
    the P-marginal has a continuous part carried through unchanged).
    """

    atom_rows: tuple[tuple[float, float, Row], ...] = ()
    singular_spans: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        for p, mass, _row in self.atom_rows:
            if mass <= 0.0:
                raise ValueError(f"atom mass at {p!r} must be positive")
        for lo, hi in self.singular_spans:
            if not lo < hi:
                raise ValueError(f"bad singular span ({lo}, {hi})")

    def entry(self, p: float, tol: float = 1e-12) -> Row:
        """The row law at P = p."""
        for loc, _mass, row in self.atom_rows:
            if abs(p - loc) <= tol:
                return row
        for lo, hi in self.singular_spans:
            if lo - tol <= p <= hi + tol:
                return SingularRow(float(p))
        raise ValueError(f"p={p!r} is not in the support of the P-marginal")

    def martingale_residual(self) -> float:
        """max over atom rows of |E(S | P=p) - p| (singular rows are exact)."""
        if not self.atom_rows:
            return 0.0
        return max(abs(row.mean() - p) for p, _mass, row in self.atom_rows)

    def to_payload(self) -> dict:
        rows = []
        for p, mass, row in self.atom_rows:
            if isinstance(row, SingularRow):
                rows.append({"p": p, "mass": mass, "row": {"kind": "singular", "at": row.at}})
            else:
                rows.append({"p": p, "mass": mass,
                             "row": {"kind": "uniform_mix",
                                     "intervals": [[lo, hi, w] for lo, hi, w in row.intervals]}})
        return {"atom_rows": rows,
                "singular_spans": [[lo, hi] for lo, hi in self.singular_spans]}

    @classmethod
    def from_payload(cls, payload: dict) -> "ConditionalLaw":
        rows = []
        for item in payload.get("atom_rows", []):
            spec = item["row"]
            if spec["kind"] == "singular":
                row: Row = SingularRow(float(spec["at"]))
            elif spec["kind"] == "uniform_mix":
                row = UniformMixRow(tuple((float(a), float(b), float(w))
                                          for a, b, w in spec["intervals"]))
            else:
                raise ValueError(f"unknown row kind {spec.get('kind')!r}")
            rows.append((float(item["p"]), float(item["mass"]), row))
        spans = tuple((float(a), float(b)) for a, b in payload.get("singular_spans", []))
        return cls(atom_rows=tuple(rows), singular_spans=spans)


def uniform_coupling() -> ConditionalLaw:
    """The trivial coupling for the uniform target: S = P everywhere."""
    return ConditionalLaw(singular_spans=((0.0, 1.0),))


def explicit_p2alpha_coupling(alpha: float) -> ConditionalLaw:
    """Closed-form coupling for the extremal atom-plus-uniform mixture.

    S | P=alpha ~ uniform[0, 2*alpha] (mean alpha); S | P=p singular at p for
    p in [2*alpha, 1].  The atom's mass 2*alpha spreads to density one on
    [0, 2*alpha] and the singular part passes the uniform piece through, so S
    is uniform on [0,1].
    """
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    atom_row = UniformMixRow(((0.0, 2.0 * alpha, 1.0),))
    return ConditionalLaw(atom_rows=((alpha, 2.0 * alpha, atom_row),),
                          singular_spans=((2.0 * alpha, 1.0),))


# ------------------------------------------------------------------ discrete transport

class TransportInfeasible(ValueError):
    """No feasible martingale plan; carries a convex-order witness."""

    def __init__(self, message: str, witness: float | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class TransportPlan:
    """A discrete martingale coupling: joint mass over source x dest atoms."""

    source_values: np.ndarray
    source_masses: np.ndarray
    dest_values: np.ndarray
    dest_masses: np.ndarray
    joint: np.ndarray  # (n_source, n_dest)

    def row_means(self) -> np.ndarray:
        num = self.joint @ self.dest_values
        return num / self.source_masses

    def max_residual(self) -> float:
        row = np.max(np.abs(self.joint.sum(axis=1) - self.source_masses))
        col = np.max(np.abs(self.joint.sum(axis=0) - self.dest_masses))
        mart = np.max(np.abs(self.row_means() - self.source_values))
        return float(max(row, col, mart))


def _idf_from_atoms(values: np.ndarray, masses: np.ndarray) -> IntegratedDF:
    order = np.argsort(values)
    v, m = np.asarray(values, dtype=float)[order], np.asarray(masses, dtype=float)[order]
    uv, inv = np.unique(v, return_inverse=True)
    um = np.zeros_like(uv)
    np.add.at(um, inv, m)
    return IntegratedDF.from_atoms(uv, um)


def martingale_transport(source: tuple[np.ndarray, np.ndarray],
                         dest: tuple[np.ndarray, np.ndarray]) -> TransportPlan:
    """Joint plan with the given marginals and row-conditional means equal to
    the source values (discrete martingale constraint), found by linear
    programming with a transport-cost objective to pin down one plan.
    """
    sv, sm = (np.asarray(a, dtype=float) for a in source)
    dv, dm = (np.asarray(a, dtype=float) for a in dest)
    if sv.shape != sm.shape or dv.shape != dm.shape or sv.ndim != 1 or dv.ndim != 1:
        raise ValueError("source and dest must each be (values, masses) 1-d pairs")
    if np.any(sm <= 0) or np.any(dm <= 0):
        raise ValueError("masses must be positive")
    if abs(sm.sum() - 1.0) > 1e-9 or abs(dm.sum() - 1.0) > 1e-9:
        raise ValueError("masses must sum to 1")
    mean_gap = float(sv @ sm - dv @ dm)
    check = dominates_cx(_idf_from_atoms(sv, sm), _idf_from_atoms(dv, dm))
    if not check:
        raise TransportInfeasible(
            f"source is not below dest in the convex order "
            f"(max violation {check.max_violation:.3g} at x={check.witness!r}, "
            f"mean gap {mean_gap:.3g})",
            witness=check.witness)

    ns, nd = sv.size, dv.size
    n_var = ns * nd

    def var(i: int, b: int) -> int:
        return i * nd + b

    rows_i, cols_i, data = [], [], []
    rhs = []
    r = 0
    for i in range(ns):  # row sums
        for b in range(nd):
            rows_i.append(r); cols_i.append(var(i, b)); data.append(1.0)
        rhs.append(sm[i]); r += 1
    for b in range(nd):  # column sums
        for i in range(ns):
            rows_i.append(r); cols_i.append(var(i, b)); data.append(1.0)
        rhs.append(dm[b]); r += 1
    for i in range(ns):  # row first moments
        for b in range(nd):
            rows_i.append(r); cols_i.append(var(i, b)); data.append(dv[b])
        rhs.append(sm[i] * sv[i]); r += 1
    a_eq = _sparse.csr_matrix((data, (rows_i, cols_i)), shape=(r, n_var))
    cost = np.abs(dv[None, :] - sv[:, None]).ravel()
    res = linprog(cost, A_eq=a_eq, b_eq=np.array(rhs), bounds=(0.0, None), method="highs")
    if res.status != 0:
        raise TransportInfeasible(
            f"linear program reported no feasible martingale plan ({res.message}); "
            f"the convex-order margin is thinner than the solver tolerance",
            witness=None)
    joint = np.maximum(res.x.reshape(ns, nd), 0.0)
    return TransportPlan(source_values=sv, source_masses=sm,
                         dest_values=dv, dest_masses=dm, joint=joint)


# ------------------------------------------------------------------ continuization

def _chord_feasible(x0: float, y0: float, x1: float, y1: float,
                    nu_idf: IntegratedDF, slack: float = 1e-12) -> bool:
    """Is the chord from (x0,y0) to (x1,y1) below nu's IDF on [x0,x1]?

    nu's IDF is convex and the chord is affine, so their difference is convex
    and a ternary search finds its minimum.
    """
    if x1 <= x0:
        return True
    slope = (y1 - y0) / (x1 - x0)

    def gap(x: float) -> float:
        return float(nu_idf.evaluate(x)) - (y0 + slope * (x - x0))

    lo, hi = x0, x1
    for _ in range(200):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if gap(m1) <= gap(m2):
            hi = m2
        else:
            lo = m1
    worst = min(gap(x0), gap(x1), gap((lo + hi) / 2.0))
    return worst >= -slack


def _interp_points(l_n: float, u_n: float, mu_idf: IntegratedDF, nu_idf: IntegratedDF,
                   atom_set: set, beta: float, max_points: int = 10_000) -> list[float]:
    """Recursive interpolation points inside one strict-dominance interval.

    Each step takes the supremum x' of chord-feasible right endpoints, then
    retreats into [x' - beta*(x' - x_j), x'] and picks the largest grid point
    (resolution 2^-20 of the interval length) that is not an atom of mu.
    """
    length = u_n - l_n
    grid_step = length * 2.0 ** -20
    pts = [l_n]
    x_j = l_n
    for _ in range(max_points):
        y_j = float(mu_idf.evaluate(x_j))
        if u_n - x_j <= 1e-9 * length:
            break
        if _chord_feasible(x_j, y_j, u_n, float(mu_idf.evaluate(u_n)), nu_idf):
            pts.append(u_n)
            break
        lo_x, hi_x = x_j, u_n
        for _ in range(80):
            mid = 0.5 * (lo_x + hi_x)
            if _chord_feasible(x_j, y_j, mid, float(mu_idf.evaluate(mid)), nu_idf):
                lo_x = mid
            else:
                hi_x = mid
        x_sup = lo_x
        retreat_lo = x_sup - beta * (x_sup - x_j)
        k_hi = int(np.floor((x_sup - l_n) / grid_step))
        k_lo = int(np.ceil((retreat_lo - l_n) / grid_step))
        choice = None
        for k in range(k_hi, max(k_lo - 1, 0) - 1, -1):
            cand = l_n + k * grid_step
            if cand <= x_j:
                break
            if not any(abs(cand - a) <= grid_step * 0.5 for a in atom_set):
                choice = cand
                break
        if choice is None or choice <= x_j + grid_step * 0.5:
            pts.append(u_n)
            break
        pts.append(choice)
        x_j = choice
    else:
        raise RuntimeError("interpolation did not terminate within the point budget")
    if pts[-1] != u_n:
        pts.append(u_n)
    return pts


def continuize(mu: tuple[np.ndarray, np.ndarray], nu_idf: IntegratedDF,
               beta: float = 0.5):
    """Mean-preserving continuization of a finite discrete law under nu.

    Splits {phi_mu < phi_nu} into maximal open intervals, lays interpolation
    points by the recursive chord construction, and pushes each mu-atom
    strictly inside an interpolation subinterval (l, u) through the uniform
    kernel centered at the atom with half-width min(x - l, u - x).  Returns
    (interpolation points per interval, kernel spread specs, mu_tilde) with
    the sandwich phi_mu <= phi_mu_tilde <= phi_nu.
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    values, masses = (np.asarray(a, dtype=float) for a in mu)
    order = np.argsort(values)
    values, masses = values[order], masses[order]
    mu_idf = _idf_from_atoms(values, masses)
    check = dominates_cx(mu_idf, nu_idf)
    if not check:
        raise ValueError(
            f"mu is not below nu in the convex order "
            f"(max violation {check.max_violation:.3g} at x={check.witness!r})")

    lo = min(values[0], nu_idf.breakpoints[0])
    hi = max(values[-1], nu_idf.breakpoints[-1])
    grid = np.union1d(np.union1d(values, nu_idf.breakpoints), np.linspace(lo, hi, 4097))
    gaps = nu_idf.evaluate(grid) - mu_idf.evaluate(grid)
    strict = gaps > 1e-12

    intervals: list[tuple[float, float]] = []
    i = 0
    while i < grid.size:
        if strict[i]:
            j = i
            while j + 1 < grid.size and strict[j + 1]:
                j += 1
            left = grid[i - 1] if i > 0 else grid[i]
            right = grid[j + 1] if j + 1 < grid.size else grid[j]
            intervals.append((float(left), float(right)))
            i = j + 1
        i += 1

    atom_set = set(float(v) for v in values)
    all_points: list[list[float]] = []
    spreads: list[tuple[float, float, float]] = []  # (atom value, lo, hi)
    new_atoms: list[tuple[float, float]] = []
    new_pieces: list[tuple[float, float, float]] = []

    for l_n, u_n in intervals:
        pts = _interp_points(l_n, u_n, mu_idf, nu_idf, atom_set, beta)
        all_points.append(pts)

    for v, m in zip(values, masses):
        spread = None
        for (l_n, u_n), pts in zip(intervals, all_points):
            if not l_n < v < u_n:
                continue
            k = int(np.searchsorted(pts, v, side="right")) - 1
            k = min(max(k, 0), len(pts) - 2)
            seg_lo, seg_hi = pts[k], pts[k + 1]
            if not seg_lo < v < seg_hi:
                continue
            d = min(v - seg_lo, seg_hi - v)
            if d > 0.0:
                spread = (v - d, v + d)
            break
        if spread is None:
            new_atoms.append((float(v), float(m)))
        else:
            spreads.append((float(v), spread[0], spread[1]))
            new_pieces.append((spread[0], spread[1], float(m)))

    mu_tilde = SubUniformDist("mixture",
                              atoms=tuple(new_atoms),
                              pieces=tuple(sorted(new_pieces)))
    return all_points, spreads, mu_tilde


# ------------------------------------------------------------------ mod-1 family

def mod1_family(row: Row, g_cdf: Callable[[float], float], t: float, s: float) -> float:
    """The within-row redistribution Finv[{F(s) + G(t)} mod 1].

    Singular rows return s unchanged.  The boundary value 1.0 mod 1 maps to
    0.0.  Raises if s lies outside the row's support.
    """
    if isinstance(row, SingularRow):
        return float(s)
    if not row.contains(float(s)):
        raise ValueError(f"s={s!r} lies outside the row support {row.support()}")
    u = (float(row.cdf(s)) + float(g_cdf(t))) % 1.0
    return float(row.inverse(u))


def _logistic_cdf(t):
    return _sp.expit(np.asarray(t, dtype=float))


def _logistic_sample(gen: np.random.Generator, n: int) -> np.ndarray:
    u = gen.random(n)
    return np.log(u) - np.log1p(-u)


def _normal_cdf(t):
    return _sp.ndtr(np.asarray(t, dtype=float))


def _normal_sample(gen: np.random.Generator, n: int) -> np.ndarray:
    return gen.standard_normal(n)


G_CHOICES: dict[str, tuple[Callable, Callable]] = {
    "logistic": (_logistic_cdf, _logistic_sample),
    "normal": (_normal_cdf, _normal_sample),
}


# ------------------------------------------------------------------ synthesizer

@dataclass(frozen=True)
class SyntheticPPPModel:
    """A manufactured model whose exact p-value has the prescribed law.

    Data are pairs D = (S, P): S is the uniform statistic and P tags the row
    of the coupling (rows may overlap for general targets, so S alone need
    not determine the row).  The discrepancy given parameter t is
    -log of the mod-1 shift U_t, whose conditional survival probability is
    U_t itself; averaging over t ~ G yields the row mean, the p-value.
    """

    target: SubUniformDist
    coupling: ConditionalLaw
    g_name: str = "logistic"
    seed: int = 0
    stream_id: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.g_name not in G_CHOICES:
            raise ValueError(f"unknown G {self.g_name!r}; choose from {sorted(G_CHOICES)}")

    @property
    def model_id(self) -> str:
        return f"synthetic({self.target.variant},G={self.g_name})"

    # -- coupling marginals ------------------------------------------------

    def draw_joint(self, gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(pvalues, svalues): P ~ target row labels, S | P from the rows.

        The emitted p-value is the row mean computed from the coupling
        tables, not the label itself, so martingale error is visible.
        """
        atom_rows = self.coupling.atom_rows
        if self.coupling.singular_spans:
            # atoms are emitted verbatim by SubUniformDist.sample, so exact
            # equality identifies the atom rows; sample() sorts, so shuffle
            draws = self.target.sample(gen, n).values
            draws = draws[gen.permutation(n)]
            svals = draws.copy()
            pvals = draws.copy()
            for p, _mass, row in atom_rows:
                sel = draws == p
                k = int(np.count_nonzero(sel))
                if k:
                    svals[sel] = row.sample(gen, k)
                    pvals[sel] = row.mean()
            return pvals, svals
        masses = np.array([mass for _p, mass, _row in atom_rows])
        cum = np.cumsum(masses)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, gen.random(n), side="right")
        means = np.array([row.mean() for _p, _mass, row in atom_rows])
        svals = np.empty(n)
        for k, (_p, _mass, row) in enumerate(atom_rows):
            sel = idx == k
            cnt = int(np.count_nonzero(sel))
            if cnt:
                svals[sel] = row.sample(gen, cnt)
        return means[idx], svals

    def draw_pvalues(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return self.draw_joint(gen, n)[0]

    def draw_svalues(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return self.draw_joint(gen, n)[1]

    # -- pointwise model pieces ---------------------------------------------

    def sample_theta(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return G_CHOICES[self.g_name][1](gen, n)

    def conditional_sf(self, t: float, d: tuple[float, float]) -> float:
        """U_t at data d = (s, p): survival prob of the discrepancy given t."""
        s, p = d
        return mod1_family(self.coupling.entry(p), G_CHOICES[self.g_name][0], t, s)

    def discrepancy(self, d: tuple[float, float], t: float) -> float:
        """f(d, t) = Fbar_inv(U_t) with Fbar the standard exponential survival."""
        u = self.conditional_sf(t, d)
        return float(-np.log(max(u, 1e-300)))

    def exact_ppp(self, d: tuple[float, float]) -> float:
        """Average of U_theta over theta ~ G: exactly the row mean at d."""
        _s, p = d
        return self.coupling.entry(p).mean()

    # -- replay serde --------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "target": json.loads(self.target.to_json()),
            "coupling": self.coupling.to_payload(),
            "g_name": self.g_name,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "meta": self.meta,
        })

    @classmethod
    def from_json(cls, text: str) -> "SyntheticPPPModel":
        payload = json.loads(text)
        return cls(target=SubUniformDist.from_json(json.dumps(payload["target"])),
                   coupling=ConditionalLaw.from_payload(payload["coupling"]),
                   g_name=payload.get("g_name", "logistic"),
                   seed=int(payload.get("seed", 0)),
                   stream_id=int(payload.get("stream_id", 0)),
                   meta=payload.get("meta", {}))


def _binned_uniform(n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, np.full(n_bins, 1.0 / n_bins)


def synthesize_ppp(target: SubUniformDist, g_name: str = "logistic",
                   rng: RngStream | None = None,
                   n_cells: int = 256, n_bins: int = 64) -> SyntheticPPPModel:
    """Build a model whose exact posterior predictive p-value has law target.

    Uniform and extremal atom-plus-uniform targets get closed-form couplings.
    Any other sub-uniform target is discretized to at most n_cells
    conditional-mean atoms, transported onto the n_bins binned uniform law by
    a martingale linear program, and each destination bin is spread uniformly
    over its interval, which makes the S-marginal exactly uniform and every
    row absolutely continuous.  The bin count doubles (up to 1024) if the
    discretized target is too tight against the binned uniform law.
    """
    if rng is None:
        rng = RngStream(seed=0)
    check = target.is_sub_uniform()
    if not check:
        raise ValueError(
            f"target is not sub-uniform (max violation {check.max_violation:.3g} "
            f"at x={check.witness!r})")

    if target.variant == "uniform01":
        return SyntheticPPPModel(target=target, coupling=uniform_coupling(),
                                 g_name=g_name, seed=rng.seed, stream_id=rng.stream_id,
                                 meta={"path": "explicit-uniform"})
    alpha = as_p2alpha(target)
    if alpha is not None and alpha < 0.5:
        return SyntheticPPPModel(target=target, coupling=explicit_p2alpha_coupling(alpha),
                                 g_name=g_name, seed=rng.seed, stream_id=rng.stream_id,
                                 meta={"path": "explicit-p2alpha", "alpha": alpha})

    values, masses = discretize(target, n_cells)
    src_idf = _idf_from_atoms(values, masses)
    bins = n_bins
    while True:
        centers, bin_masses = _binned_uniform(bins)
        if dominates_cx(src_idf, _idf_from_atoms(centers, bin_masses)):
            break
        if bins >= 1024:
            break  # let martingale_transport raise with the witness
        bins *= 2
    plan = martingale_transport((values, masses), _binned_uniform(bins))

    edges = np.linspace(0.0, 1.0, bins + 1)
    rows = []
    for i in range(values.size):
        weights = plan.joint[i] / masses[i]
        keep = weights > 1e-13
        slabs = tuple((float(edges[b]), float(edges[b + 1]), float(w))
                      for b, w in zip(np.nonzero(keep)[0], weights[keep]))
        total = sum(w for _l, _h, w in slabs)
        slabs = tuple((l, h, w / total) for l, h, w in slabs)
        rows.append((float(values[i]), float(masses[i]), UniformMixRow(slabs)))
    coupling = ConditionalLaw(atom_rows=tuple(rows))
    # discretization gap between the coupled atoms and the requested target
    grid = np.linspace(0.0, 1.0, 2049)
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    atom_cdf = cum[np.searchsorted(np.sort(values), grid, side="right")]
    disc_ks = float(np.max(np.abs(atom_cdf - target.cdf(grid))))
    return SyntheticPPPModel(
        target=target, coupling=coupling, g_name=g_name,
        seed=rng.seed, stream_id=rng.stream_id,
        meta={"path": "lp-transport", "n_cells": int(values.size), "n_bins": int(bins),
              "lp_residual": plan.max_residual(), "discretization_ks": disc_ks})
