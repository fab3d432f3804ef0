"""Slow, direct transcriptions of every statistic used as test oracles.

Nothing here imports the optimized code paths; triples and pairs are
enumerated explicitly and the Kaplan-Meier estimate is a plain loop.
"""

import math
from itertools import combinations


def n_choose_3(n):
    return n * (n - 1) * (n - 2) / 6


def h1(a, b, c, theta, beta):
    def term(x1, x2, x3):
        return min(x1, x3) * min(x2, x3) / ((theta + beta * x1) * (theta + beta * x2))

    return (term(a, b, c) + term(a, c, b) + term(b, c, a)) / 3


def h2(a, b, c, theta, beta):
    def term(xi, xj, xk):
        return min(xi, max(xj, xk)) / (theta + beta * xi)

    return (term(a, b, c) + term(b, a, c) + term(c, a, b)) / 3


def g(a, b, c, k):
    return (min(a, b) + min(b, c) + min(a, c) + (6 * k - 3) * min(a, b, c)) / 3


def u1(x, theta, beta):
    return math.fsum(h1(*t, theta, beta) for t in combinations(x, 3)) / n_choose_3(len(x))


def u2(x, theta, beta):
    return math.fsum(h2(*t, theta, beta) for t in combinations(x, 3)) / n_choose_3(len(x))


def delta_p(x, theta, beta):
    b1 = beta + 1
    return b1 * b1 * u1(x, theta, beta) - b1 * u2(x, theta, beta) + 1 / 3


def delta_n(x, k):
    return math.fsum(g(*t, k) for t in combinations(x, 3)) / n_choose_3(len(x))


def km_censoring_left(times, delta):
    """Censoring survival K(t-) at each t_i by the textbook product-limit loop."""
    n = len(times)
    distinct = sorted(set(times))
    out = []
    for ti in times:
        k = 1.0
        for u in distinct:
            if u >= ti:
                break
            d = sum(1 for j in range(n) if times[j] == u and delta[j] == 0)
            r = sum(1 for j in range(n) if times[j] >= u)
            k *= 1 - d / r
        out.append(k)
    return out


def ipcw(times, delta):
    km = km_censoring_left(times, delta)
    return [delta[i] / km[i] if delta[i] else 0.0 for i in range(len(times))]


def censored_estimates(times, delta):
    n = len(times)
    w = ipcw(times, delta)
    mean_c = math.fsum(times[i] * w[i] for i in range(n)) / n
    mx = max(times)
    beta = mean_c / (mean_c - mx)
    theta = -beta * mx
    return theta, beta, 1 / (2 * (beta - 2)), w


def delta_n_censored(times, delta):
    theta, beta, k, w = censored_estimates(times, delta)
    n = len(times)
    total = math.fsum(g(times[i], times[j], times[l], k) * w[i] * w[j] * w[l]
                      for i, j, l in combinations(range(n), 3))
    stat = total / n_choose_3(n)
    return stat, stat / theta


def censored_variance(times, delta, form):
    """sigma2_1c and sigma2_c for either variance form, by explicit loops."""
    theta, beta, k, w = censored_estimates(times, delta)
    n = len(times)
    h1_hat = []
    for i in range(n):
        if form == "printed":
            pairs = combinations(range(n), 2)
            scale = n * n
        else:
            pairs = combinations([j for j in range(n) if j != i], 2)
            scale = (n - 1) * (n - 2) / 2
        h1_hat.append(math.fsum(g(times[i], times[j], times[l], k) * w[j] * w[l]
                                for j, l in pairs) / scale)
    xi = [h1_hat[j] * w[j] for j in range(n)]
    at_risk = [sum(1 for j in range(n) if times[j] >= times[i]) for i in range(n)]
    w_hat = [math.fsum(xi[j] for j in range(n) if times[j] > times[i]) / at_risk[i]
             for i in range(n)]
    phi = [w_hat[i] * (1 - delta[i]) for i in range(n)]
    V = []
    for i in range(n):
        if form == "printed":
            corr = math.fsum(phi[i] / at_risk[i] for j in range(n) if times[i] > times[j])
        else:
            corr = math.fsum(phi[j] / at_risk[j] for j in range(n) if times[i] >= times[j])
        V.append(xi[i] + phi[i] - corr)
    vbar = math.fsum(V) / n
    ss = math.fsum((v - vbar) ** 2 for v in V)
    if form == "printed":
        s1 = 9 / (n - 1) * ss
        return s1, s1 / theta, phi
    s1 = ss / (n - 1)
    return s1, s1 / theta ** 2, phi
