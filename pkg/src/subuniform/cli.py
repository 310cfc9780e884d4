"""Command-line surface.

Subcommands cover calibration of a single p-value, Fisher combination,
min-p combination, frequency simulation of the built-in models and
estimators, synthesis of a p-value with a prescribed law, and curve-data
export.  Payload goes to stdout as JSON (or CSV with --format csv);
diagnostics go to stderr.  Exit codes: 0 success, 1 domain or validation
error, 2 I/O error.  Identical flags and seed give byte-identical stdout;
PPP_THREADS changes speed only.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from .bounds import (FisherReport, conservative_single, fisher_bounds, fisher_critical,
                     fisher_score, minp_bound)
from .coupling import synthesize_ppp
from .distributions import SubUniformDist, ks_distance, p2alpha
from .estimators import PosteriorSampler, marginal_estimator_run
from .idf import IntegratedDF, beta22_idf, dominates_cx, uniform_idf
from .models import (G_FAMILIES, frequency_run, lasso_model, load_port_pmfs, port_model,
                     ruschendorf_sample, simplex_atom, simplex_model)
from .numerics import EmpiricalSample, RngStream

_TAIL_GRID = (0.01, 0.05, 0.1, 0.25)


class _DomainError(Exception):
    pass


class _IOErrorExit(Exception):
    pass


def _flatten(payload: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in payload.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, prefix=f"{name}."))
        elif isinstance(val, (list, tuple)):
            continue  # vector fields are JSON-only
        else:
            out[name] = val
    return out


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(payload) + "\n")
        return
    flat = _flatten(payload)
    sys.stdout.write(",".join(flat.keys()) + "\n")
    sys.stdout.write(",".join("" if v is None else f"{v}" for v in flat.values()) + "\n")


def _emit_table(columns: list[str], rows: list[list], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps({"columns": columns, "rows": rows}) + "\n")
        return
    sys.stdout.write(",".join(columns) + "\n")
    for row in rows:
        sys.stdout.write(",".join("" if v is None else f"{v}" for v in row) + "\n")


def _read_pvals(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise _IOErrorExit(f"cannot read {path!r}: {exc}") from exc
    try:
        vals = np.array([float(ln) for ln in lines])
    except ValueError as exc:
        raise _DomainError(f"non-numeric entry in {path!r}: {exc}") from exc
    if vals.size == 0:
        raise _DomainError(f"{path!r} contains no p-values")
    return vals


# ------------------------------------------------------------------ subcommands

def _cmd_calibrate(args) -> None:
    if not 0.0 <= args.p <= 1.0:
        raise _DomainError(f"--p must lie in [0, 1], got {args.p!r}")
    _emit({"p": args.p, "conservative_p": conservative_single(args.p)}, args.format)


def _cmd_fisher(args) -> None:
    vals = _read_pvals(args.pvals)
    if np.any(vals < 0.0) or np.any(vals > 1.0):
        raise _DomainError("p-values must lie in [0, 1]")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        score = fisher_score(vals)
    notes = tuple(str(w.message) for w in caught)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    report: FisherReport = fisher_bounds(score.score, score.m, warnings=notes)
    _emit(json.loads(report.to_json()), args.format)


def _cmd_minp(args) -> None:
    if args.pvals is not None:
        vals = _read_pvals(args.pvals)
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise _DomainError("p-values must lie in [0, 1]")
        x, m = float(vals.min()), int(vals.size)
    else:
        if args.min is None or args.m is None:
            raise _DomainError("provide either --pvals or both --min and --m")
        x, m = args.min, args.m
        if not 0.0 <= x <= 1.0:
            raise _DomainError(f"--min must lie in [0, 1], got {x!r}")
        if m < 1:
            raise _DomainError(f"--m must be >= 1, got {m!r}")
    nominal_q = float(-np.expm1(m * np.log1p(-min(x, 1.0)))) if x < 1.0 else 1.0
    _emit({
        "min": x,
        "m": m,
        "conservative_p": minp_bound(x, m),
        "nominal_q": nominal_q,
        "limit_2q_minus_q2": 2.0 * nominal_q - nominal_q ** 2,
    }, args.format)


_WORKED_PMFS = np.array([[0.7, 0.2, 0.1], [0.1, 0.2, 0.7]])


def _build_model(args):
    if args.model == "lasso":
        if args.g not in G_FAMILIES:
            raise _DomainError(f"--g must be one of {sorted(G_FAMILIES)}")
        return lasso_model(args.alpha, G_FAMILIES[args.g]())
    if args.model == "simplex":
        return simplex_model(args.alpha)
    if args.model == "port":
        pmfs = _WORKED_PMFS if args.pmfs is None else load_port_pmfs(args.pmfs)
        return port_model(pmfs)
    raise _DomainError(f"unknown model {args.model!r}")


def _sub_uniformity_payload(sample: EmpiricalSample) -> dict:
    emp = IntegratedDF.from_samples(sample.values)
    res = dominates_cx(emp, uniform_idf())
    return {"holds": bool(res), "max_violation": res.max_violation, "tol": res.tol}


def _cmd_simulate(args) -> None:
    if args.n < 1:
        raise _DomainError("--n must be >= 1")
    rng = RngStream(seed=args.seed)
    ks_ref_alpha = None
    if args.model == "ruschendorf":
        if not 0.0 < args.alpha <= 0.5:
            raise _DomainError(f"--alpha must lie in (0, 0.5] for ruschendorf, got {args.alpha!r}")
        if args.estimator != "exact":
            raise _DomainError("ruschendorf is a direct construction; only --estimator exact applies")
        sample = ruschendorf_sample(args.alpha, rng, args.n)
        model_id = f"ruschendorf(alpha={args.alpha:g})"
        ks_ref_alpha = args.alpha
    else:
        try:
            model = _build_model(args)
        except ValueError as exc:
            raise _DomainError(str(exc)) from exc
        if args.estimator == "exact":
            run = frequency_run(model, args.n, rng)
        else:
            sampler = (PosteriorSampler(kind="markov", rho=args.rho)
                       if args.sampler == "markov" else PosteriorSampler(kind="iid"))
            run = marginal_estimator_run(model, args.estimator, args.m_draws, args.n,
                                         rng, sampler=sampler)
        sample, model_id = run.pvalues, run.model_id
        if args.estimator == "exact":
            if args.model == "lasso" and args.g == "uniform":
                ks_ref_alpha = args.alpha
            elif args.model == "simplex":
                ks_ref_alpha = simplex_atom(args.alpha)
    payload = {
        "model": model_id,
        "n": args.n,
        "seed": args.seed,
        "mean": sample.mean(),
        "variance": sample.variance(),
        "p_le_alpha": {f"{a:g}": sample.tail_prob(a) for a in _TAIL_GRID},
        "sub_uniformity": _sub_uniformity_payload(sample),
    }
    if ks_ref_alpha is not None and ks_ref_alpha < 0.5:
        ref = p2alpha(ks_ref_alpha)
        payload["ks_vs_p2alpha"] = ks_distance(ref, sample)
        payload["p2alpha_alpha"] = ks_ref_alpha
    if args.out is not None:
        try:
            np.savetxt(args.out, sample.values, fmt="%.17g")
        except OSError as exc:
            raise _IOErrorExit(f"cannot write {args.out!r}: {exc}") from exc
    if args.format == "csv":
        for v in sample.values:
            sys.stdout.write(f"{v:.17g}\n")
    else:
        _emit(payload, args.format)


def _cmd_construct(args) -> None:
    if args.n < 1:
        raise _DomainError("--n must be >= 1")
    try:
        with open(args.target) as fh:
            target_text = fh.read()
    except OSError as exc:
        raise _IOErrorExit(f"cannot read {args.target!r}: {exc}") from exc
    try:
        target = SubUniformDist.from_json(target_text)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise _DomainError(f"invalid target spec: {exc}") from exc
    rng = RngStream(seed=args.seed)
    try:
        model = synthesize_ppp(target, g_name=args.g, rng=rng)
    except ValueError as exc:
        raise _DomainError(str(exc)) from exc
    gen = rng.generator()
    pvals, svals = model.draw_joint(gen, args.n)
    sample = EmpiricalSample(pvals)
    s_sample = EmpiricalSample(svals)
    uniform = SubUniformDist("uniform01")
    comparison = {
        "ks_vs_target": ks_distance(target, sample),
        "atom_frequencies": {f"{loc:g}": sample.atom_frequency(loc) for loc, _m in target.atoms},
        "atom_expected": {f"{loc:g}": m for loc, m in target.atoms},
        "s_marginal_ks": ks_distance(uniform, s_sample),
        "martingale_residual": model.coupling.martingale_residual(),
    }
    singular_only = not model.coupling.atom_rows
    payload = {
        "target": json.loads(target.to_json()),
        "coupling": "singular" if singular_only else "mixed",
        "path": model.meta.get("path", ""),
        "n": args.n,
        "seed": args.seed,
        "comparison": comparison,
        "model": json.loads(model.to_json()),
    }
    if args.out is not None:
        try:
            np.savetxt(args.out, sample.values, fmt="%.17g")
        except OSError as exc:
            raise _IOErrorExit(f"cannot write {args.out!r}: {exc}") from exc
    if args.model_out is not None:
        try:
            with open(args.model_out, "w") as fh:
                fh.write(model.to_json() + "\n")
        except OSError as exc:
            raise _IOErrorExit(f"cannot write {args.model_out!r}: {exc}") from exc
    _emit(payload, args.format)


def _cmd_curves(args) -> None:
    if args.figure == "idf":
        if not 0.0 < args.alpha < 0.5:
            raise _DomainError(f"--alpha must lie in (0, 0.5), got {args.alpha!r}")
        grid = np.linspace(0.0, 1.0, args.points)
        extremal = p2alpha(args.alpha).idf()
        beta_idf = beta22_idf()
        rows = [[float(x),
                 float(x * x / 2.0),
                 float(beta_idf.evaluate(x)),
                 float(extremal.evaluate(x))] for x in grid]
        _emit_table(["x", "phi_uniform", "phi_beta22", "phi_p2alpha"], rows, args.format)
        return
    if args.figure == "fisher":
        if args.m < 1:
            raise _DomainError(f"--m must be >= 1, got {args.m!r}")
        alphas = np.geomspace(1e-5, 0.1, args.points)
        rows = []
        for a in alphas:
            score = fisher_critical(float(a), args.m)
            rep = fisher_bounds(score, args.m)
            rows.append([float(a), score, rep.nominal_p, rep.bound_shifted_chi2,
                         rep.bound_cantelli, rep.bound_mgf])
        _emit_table(["alpha", "score", "nominal", "bound_shifted_chi2",
                     "bound_cantelli", "bound_mgf"], rows, args.format)
        return
    raise _DomainError(f"unknown figure {args.figure!r}")


# ------------------------------------------------------------------ parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppp",
        description="Calibration, combination, simulation and synthesis of "
                    "posterior predictive p-values.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("calibrate", help="conservative calibration of one p-value")
    p.add_argument("--p", type=float, required=True)
    add_format(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("fisher", help="Fisher combination with conservative bounds")
    p.add_argument("--pvals", required=True, help="CSV file, one p-value per line")
    add_format(p)
    p.set_defaults(func=_cmd_fisher)

    p = sub.add_parser("minp", help="minimum-p combination bound")
    p.add_argument("--pvals", help="CSV file, one p-value per line")
    p.add_argument("--min", type=float, help="smallest p-value")
    p.add_argument("--m", type=int, help="number of p-values")
    add_format(p)
    p.set_defaults(func=_cmd_minp)

    p = sub.add_parser("simulate", help="frequency run of a built-in model")
    p.add_argument("--model", choices=("lasso", "simplex", "port", "ruschendorf"),
                   required=True)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--g", default="uniform", help="lasso travel law: uniform|power2|power3")
    p.add_argument("--pmfs", help="port model pmf CSV (rows = applications)")
    p.add_argument("--estimator", choices=("exact", "p_hat", "r_hat"), default="exact")
    p.add_argument("--M", dest="m_draws", type=int, default=1,
                   help="posterior draws per replicate for p_hat/r_hat")
    p.add_argument("--sampler", choices=("iid", "markov"), default="iid")
    p.add_argument("--rho", type=float, default=0.0, help="markov sampler autocorrelation")
    p.add_argument("--out", help="write the p-value sample to this CSV path")
    add_format(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("construct", help="synthesize a p-value with a prescribed law")
    p.add_argument("--target", required=True, help="JSON file with the target law")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--g", default="logistic", help="parameter CDF: logistic|normal")
    p.add_argument("--out", help="write the realized p-value sample to this CSV path")
    p.add_argument("--model-out", dest="model_out", help="write the model JSON here")
    add_format(p)
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("curves", help="figure-data export")
    p.add_argument("--figure", choices=("idf", "fisher"), required=True)
    p.add_argument("--alpha", type=float, default=0.1, help="idf: extremal mixture parameter")
    p.add_argument("--m", type=int, default=20, help="fisher: number of combined p-values")
    p.add_argument("--points", type=int, default=512)
    add_format(p)
    p.set_defaults(func=_cmd_curves)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _IOErrorExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
