"""Monte Carlo estimation of a posterior predictive p-value: averaging
indicators versus averaging conditional probabilities, and what happens
to the marginal law of the estimate as the posterior sample grows."""

import numpy as np

from subuniform import (IntegratedDF, PosteriorSampler, RngStream, lasso_model,
                        marginal_estimator_run, uniform_g)

N = 100_000
GRID = np.linspace(0.0, 1.0, 513)


def summarize(run):
    samp = run.pvalues
    support = np.unique(samp.values)
    kind = "binary" if support.size <= 2 else f"{support.size} values"
    emp = IntegratedDF.from_samples(samp.values)
    worst = float(np.max(emp.evaluate(GRID) - GRID ** 2 / 2.0))
    return (f"mean {samp.mean():.4f}  var {samp.variance():.4f}  "
            f"P<=0.05 {samp.tail_prob(0.05):.4f}  support {kind}  "
            f"IDF excess over uniform {worst:+.4f}")


def main():
    model = lasso_model(0.1, uniform_g())

    print("single posterior draw per replicate:")
    run = marginal_estimator_run(model, "p_hat", 1, N, RngStream(seed=7))
    print(f"  indicator average (M=1):   {summarize(run)}")
    run = marginal_estimator_run(model, "r_hat", 1, N, RngStream(seed=8))
    print(f"  conditional average (M=1): {summarize(run)}")
    print("  one indicator is a fair coin; one conditional probability is uniform.")
    print()

    print("conditional averaging, growing posterior sample (iid draws):")
    for i, m_draws in enumerate((1, 4, 16, 64)):
        run = marginal_estimator_run(model, "r_hat", m_draws, N, RngStream(seed=9 + i))
        print(f"  M = {m_draws:<3} {summarize(run)}")
    print()

    print("same but with an autocorrelated posterior chain (rho = 0.9):")
    sampler = PosteriorSampler(kind="markov", rho=0.9)
    for i, m_draws in enumerate((4, 64)):
        run = marginal_estimator_run(model, "r_hat", m_draws, N, RngStream(seed=13 + i),
                                     sampler=sampler)
        print(f"  M = {m_draws:<3} {summarize(run)}")
    print()
    print("every variant stays sub-uniform (IDF excess <= MC noise), so the 2*alpha")
    print("calibration rule covers the estimate at any M, not just the limit.")


if __name__ == "__main__":
    main()
