"""Independent closed-form oracles the tests check the solver against.

Everything here is derived from textbook formulas (Mehler formula for the
Ornstein-Uhlenbeck flow, Gaussian tails, matrix exponentials, brute-force
graph reachability) and never calls into the package's solve path.
"""

import numpy as np
from scipy.linalg import expm
from scipy.stats import norm


def ou_mean_var(q, gamma, tau):
    """Transition law of dX = -gamma X dt + sqrt(2q) dW (generator q D^2 - gamma x D):
    X_tau | x ~ N(x e^{-gamma tau}, (q/gamma)(1 - e^{-2 gamma tau}))."""
    decay = np.exp(-gamma * tau)
    var = (q / gamma) * (1.0 - np.exp(-2.0 * gamma * tau))
    return decay, var


def ou_apply_sin(q, gamma, tau, a, phase, x):
    """(T(tau) sin(a . + phase))(x) via E[sin(a(mu + sd Z) + phase)]."""
    decay, var = ou_mean_var(q, gamma, tau)
    return np.sin(a * decay * x + phase) * np.exp(-a * a * var / 2.0)


def ou_apply_cos(q, gamma, tau, a, phase, x):
    decay, var = ou_mean_var(q, gamma, tau)
    return np.cos(a * decay * x + phase) * np.exp(-a * a * var / 2.0)


def ou_apply_gaussian(q, gamma, tau, alpha, x):
    """(T(tau) e^{-alpha .^2})(x) by Gaussian convolution (exact)."""
    decay, var = ou_mean_var(q, gamma, tau)
    denom = 1.0 + 2.0 * alpha * var
    return np.exp(-alpha * (decay * x) ** 2 / denom) / np.sqrt(denom)


def coupled_ou_oracle(C, q, gamma, tau, f_actions, x):
    """Tensor oracle u(tau) = e^{tau C} applied to componentwise scalar flows.

    `f_actions` is a list of callables t, x -> (T(t) f_k)(x), one per
    component; valid when all scalar parts coincide and C is constant.
    """
    E = expm(tau * np.asarray(C, dtype=float))
    flows = np.stack([fa(tau, x) for fa in f_actions])  # (m, npts)
    return E @ flows


def gaussian_cell_masses(xs, mean, sd):
    """Cell-integrated N(mean, sd^2) masses on a 1d grid (open end cells)."""
    edges = np.concatenate([[-np.inf], (xs[:-1] + xs[1:]) / 2.0, [np.inf]])
    return norm.cdf(edges[1:], mean, sd) - norm.cdf(edges[:-1], mean, sd)


def gaussian_tail(r, mean, sd):
    """Two-sided mass of N(mean, sd^2) outside [-r, r]."""
    return norm.cdf(-r, mean, sd) + 1.0 - norm.cdf(r, mean, sd)


def reachability_closure(adj):
    """Brute-force transitive closure of a boolean adjacency matrix."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    reach = adj.copy()
    for _ in range(n):
        reach = reach | (reach @ adj)
    return reach


def strongly_connected(adj):
    reach = reachability_closure(adj)
    off = ~np.eye(adj.shape[0], dtype=bool)
    return bool(np.all(reach[off]))


def quadratic_ou_second_moment(q, gamma, tau, x):
    """(T(tau) (.)^2)(x) = x^2 e^{-2 gamma tau} + (q/gamma)(1 - e^{-2 gamma tau})."""
    decay, var = ou_mean_var(q, gamma, tau)
    return (decay * x) ** 2 + var
