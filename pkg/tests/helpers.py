import numpy as np

from mixseg.types import ModelParams


def random_params(rng, d, p, L, sep=1.0):
    """Random valid parameters with the given breakpoint counts."""
    T, mu, sigma = [], [], []
    for l in L:
        inner = np.sort(rng.choice(np.arange(1, d), size=l, replace=False)) if l else np.array([], int)
        T.append(np.concatenate([[0], inner, [d]]).astype(int))
        mu.append(rng.normal(scale=sep, size=(l + 1, p)))
        sigma.append(rng.uniform(0.5, 2.0, size=(l + 1, p)))
    pi = rng.dirichlet(np.ones(len(L)) * 5)
    return ModelParams(pi=pi, T=tuple(T), mu=tuple(mu), sigma=tuple(sigma))


def sample(rng, params, n):
    """Draw ``n`` rows (and labels) from a parameter set."""
    mu, var = params.expanded()
    z = rng.choice(params.K, size=n, p=params.pi)
    y = mu[z] + np.sqrt(var[z]) * rng.standard_normal((n, params.d, params.p))
    return y, z + 1
