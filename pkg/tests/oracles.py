"""Reference values computed without the package, mostly in mpmath."""

import mpmath as mp

mp.mp.dps = 40


def two_point_alpha_moment(values, probs, alpha):
    return float(mp.fsum(mp.mpf(p) * mp.power(v, alpha) for v, p in zip(values, probs)))


BREIMAN_CONSTANT = two_point_alpha_moment([0.5, 2.0], [0.5, 0.5], 0.7)
FINITE_SUM_CONSTANT = 3 * BREIMAN_CONSTANT
PATHOLOGICAL_SUM = float(mp.zeta(2))
MELLIN_NORM = float(2 * mp.e / (1 + mp.e))


def breiman_tail(x):
    """P[ΘX > x] for Pareto(0.7) X and Θ uniform on {0.5, 2}, valid for x >= 2."""
    return BREIMAN_CONSTANT * float(mp.power(x, -0.7))


def mellin_two_atom(beta, alpha=1.0, beta0=mp.pi):
    """E[Θ^(α+iβ)] for Θ on {1, v} with v = e^(π/β0) and weights proportional to (v^α, 1)."""
    v2 = mp.exp(mp.pi / beta0)
    w1, w2 = mp.power(v2, alpha), mp.mpf(1)
    total = w1 + w2
    s = mp.mpc(alpha, beta)
    return complex((w1 * 1 + w2 * mp.power(v2, s)) / total)


def builtin_tail(name, alpha, x):
    """Closed-form P[X > x] for the shipped families at their default parameters."""
    x = mp.mpf(x)
    if x <= 1:
        return 1.0
    lx = mp.log(x)
    base = mp.power(x, -alpha)
    if name == "pareto":
        out = base
    elif name == "weibull_log":
        out = base * mp.exp(-mp.sqrt(lx))
    elif name == "log_pareto_type3":
        out = base * mp.power(1 + lx, -2)
    elif name == "log_pareto_type2":
        out = base * mp.sqrt(1 + lx)
    elif name == "lognormal_log":
        out = base * mp.ncdf(-mp.log(lx))
    else:
        raise KeyError(name)
    return float(min(out, 1))


def pathological_moment(t, s, alpha):
    """E[Θ_t^s] for Θ_t = 2^t t^(-2/α) with probability 2^(-tα), else 0."""
    return float(mp.power(2, -t * alpha) * mp.power(mp.power(2, t) * mp.power(t, -2 / mp.mpf(alpha)), s))


def builtin_tail_vec(name, alpha, x):
    """Vectorised float64 version of :func:`builtin_tail` for large samples."""
    import numpy as np
    from scipy.special import ndtr

    x = np.maximum(np.asarray(x, dtype=float), 1.0)
    lx = np.log(x)
    base = x ** -alpha
    with np.errstate(divide="ignore"):
        factor = {
            "pareto": lambda: 1.0,
            "weibull_log": lambda: np.exp(-np.sqrt(lx)),
            "log_pareto_type3": lambda: (1.0 + lx) ** -2,
            "log_pareto_type2": lambda: np.sqrt(1.0 + lx),
            "lognormal_log": lambda: ndtr(-np.log(lx)),
        }[name]()
    return np.minimum(base * factor, 1.0)
