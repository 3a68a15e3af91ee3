"""Independent reference implementations used to cross-check the library.

Everything here is written the slow, obvious way on purpose: vertex
enumeration for tiny LPs, direct evaluation of the piecewise-linear dual
objective, and a brute-force projection.  None of it imports from olpr.
"""

import itertools

import numpy as np


def lp_vertex_enumeration(c, G, h):
    """Maximize c.x subject to G x <= h by enumerating basic solutions.

    Returns (value, argmax).  Assumes the feasible region is bounded and
    nonempty.  Only usable for a handful of variables and constraints.
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    n = c.size
    best_val, best_x = -np.inf, None
    for rows in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            val = float(c @ x)
            if val > best_val:
                best_val, best_x = val, x
    if best_x is None:
        raise ValueError("no feasible vertex found")
    return best_val, best_x


def induced_lp_oracle(rewards, requirements, budget, caps):
    """Fluid LP value via vertex enumeration on the inequality form.

    max R.X  s.t.  A X <= B,  0 <= X <= caps.
    """
    R = np.asarray(rewards, dtype=float)
    A = np.asarray(requirements, dtype=float)
    B = np.asarray(budget, dtype=float)
    caps = np.asarray(caps, dtype=float)
    n = R.size
    G = np.vstack([A, np.eye(n), -np.eye(n)])
    h = np.concatenate([B, caps, np.zeros(n)])
    return lp_vertex_enumeration(R, G, h)


def hindsight_oracle(rewards, requirements, replenishments):
    """Offline relaxation: max sum r_t x_t, A^T x <= sum_t b_t, 0<=x<=1."""
    r = np.asarray(rewards, dtype=float)
    A = np.asarray(requirements, dtype=float)
    total_b = np.asarray(replenishments, dtype=float).sum(axis=0)
    T = r.size
    G = np.vstack([A.T, np.eye(T), -np.eye(T)])
    h = np.concatenate([total_b, np.ones(T), np.zeros(T)])
    return lp_vertex_enumeration(r, G, h)


def f_oracle(p, budget, rewards, requirements):
    """Dual objective <p,B'> + mean[r - <a,p>]^+ evaluated term by term."""
    p = np.asarray(p, dtype=float)
    total = float(np.dot(p, budget))
    acc = 0.0
    for r, a in zip(rewards, requirements):
        acc += max(r - float(np.dot(a, p)), 0.0)
    return total + acc / len(rewards)


def f_grid_min(budget, rewards, requirements, cap, res=201):
    """Minimize the dual objective on a uniform grid over [0, cap]^m."""
    m = len(budget)
    axes = [np.linspace(0.0, cap, res)] * m
    best_val, best_p = np.inf, None
    for p in itertools.product(*axes):
        v = f_oracle(np.array(p), budget, rewards, requirements)
        if v < best_val:
            best_val, best_p = v, np.array(p)
    return best_val, best_p


def project_oracle(p, cap):
    """Nearest point of {q >= 0, sum q <= cap} by brute-force KKT search.

    Tries every subset of coordinates pinned to zero, solves the equality
    projection on the rest, and keeps the closest feasible candidate.
    """
    p = np.asarray(p, dtype=float)
    m = p.size
    best_d, best_q = np.inf, None
    for zeros in itertools.product([0, 1], repeat=m):
        free = [j for j in range(m) if not zeros[j]]
        for tight in (False, True):
            q = np.zeros(m)
            if free:
                if tight:
                    shift = (p[free].sum() - cap) / len(free)
                    q[free] = p[free] - shift
                else:
                    q[free] = p[free]
            if np.all(q >= -1e-12) and q.sum() <= cap + 1e-12:
                d = float(np.sum((q - p) ** 2))
                if d < best_d - 1e-15:
                    best_d, best_q = d, np.maximum(q, 0.0)
    return best_q


def finite_diff_grad(fun, p, h=1e-6):
    """Central finite differences of a scalar function of a vector."""
    p = np.asarray(p, dtype=float)
    g = np.zeros_like(p)
    for j in range(p.size):
        e = np.zeros_like(p)
        e[j] = h
        g[j] = (fun(p + e) - fun(p - e)) / (2.0 * h)
    return g


def sequential_policy_oracle(prices, rewards, requirements, replenishments,
                             post_replenishment):
    """Replay a price-threshold policy one period at a time.

    `prices` is a (T, m) array of the price in force each period.  Returns
    (reward, stockouts, inventory path) with the inventory recorded at the
    start of each period, before that period's replenishment.
    """
    T, m = replenishments.shape
    ell = np.zeros(m)
    reward, stockouts = 0.0, 0
    path = np.zeros((T, m))
    for t in range(T):
        path[t] = ell
        r, a, b = rewards[t], requirements[t], replenishments[t]
        wants = r > float(np.dot(a, prices[t]))
        if post_replenishment:
            feasible = bool(np.all(ell + b >= a))
        else:
            feasible = bool(np.all(ell >= a))
        if wants and feasible:
            reward += r
            ell = ell + b - a
        else:
            if wants:
                stockouts += 1
            ell = ell + b
    return reward, stockouts, path
