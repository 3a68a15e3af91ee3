"""Warm-up lengths, batch schedules, and the C0..C11 constant family.

Every policy parameter has a closed-form definition in terms of the model's
boundedness and non-degeneracy constants.  Those formulas are extremely
conservative: at desk-scale horizons the implied warm-ups exceed T.  The
ledger therefore always computes the exact values AND effective values under
multiplicative overrides; experiment configs use the overrides, and both are
reported so runs stay auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .model import BoundsParams, InputModel, NonDegeneracyParams

_EPS_LOG = 1e-12  # guards floor(log(...)) against 4.0 evaluating as 3.999...


@dataclass(frozen=True)
class Overrides:
    """Multiplicative rescaling of warm-up and batch constants."""

    alg1_kappa: float = 1.0
    alg2_kappa: float = 1.0
    alg2_warmup: float = 1.0
    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"override {f.name} must be strictly positive")

    @property
    def active(self) -> bool:
        return any(getattr(self, f.name) != 1.0 for f in fields(self))


def alg1_params(bounds: BoundsParams, m: int, T: int,
                overrides: Overrides | None = None) -> dict:
    """Warm-up parameters of the fixed-step dual-descent policy."""
    rb, ab, bb, bl = bounds.r_bar, bounds.a_bar, bounds.b_bar, bounds.b_lower
    sm = math.sqrt(m)
    W = 2 + math.ceil(max(
        8.0 * sm * rb / bl,
        24.0 * sm * (bb + ab) * bb ** 2 / bl ** 2,
        (rb + 2.0 * m * (bb ** 2 + ab ** 2)) / (sm * (bb + ab)),
    ))
    C = 9.0
    base = 4.0 * W * math.sqrt(C * T * math.log(T)) / bl if T > 1 else 1.0
    kappa_exact = math.ceil(base)
    scale = 1.0 if overrides is None else overrides.alg1_kappa
    kappa = max(1, math.ceil(scale * base))
    step = 1.0 / math.sqrt(C * T * math.log(T)) if T > 1 else 1.0
    return {"W": W, "C": C, "kappa_exact": kappa_exact, "kappa": kappa, "step": step}


def alg2_params(model: InputModel, T: int, overrides: Overrides | None = None) -> dict:
    """Batch length and warm-up of the induced-LP resolving policy."""
    spec = model.support
    if spec is None:
        raise ValueError("batch-LP parameters need a finite-support model")
    bl, bb = model.bounds.b_lower, model.bounds.b_bar
    C = 2.0 * (1.0 + (8.0 + 8.0 * bb) / min(spec.stability_radius, bl, spec.mu_lower)) ** 2
    base = C * math.log(T) if T > 1 else 1.0
    kappa_exact = math.ceil(base)
    W_exact = math.ceil(4.0 * spec.n * float(np.max(np.abs(spec.requirements))) / bl)
    k_scale = 1.0 if overrides is None else overrides.alg2_kappa
    w_scale = 1.0 if overrides is None else overrides.alg2_warmup
    kappa = max(1, math.ceil(k_scale * base))
    W = max(1, math.ceil(w_scale * W_exact))
    return {"C": C, "kappa_exact": kappa_exact, "kappa": kappa,
            "W_exact": W_exact, "W": W}


def nondeg_constants(bounds: BoundsParams, nd: NonDegeneracyParams, m: int,
                     eps: float = 1e-4) -> dict:
    """The C0..C11 family for the accumulate/detect/convert components.

    `eps` is the accuracy level at which the covering number N behind C5 is
    taken; the source formulas leave it free, so it is a documented config
    knob (smaller eps inflates C5 logarithmically).
    """
    rb, ab, bb, bl = bounds.r_bar, bounds.a_bar, bounds.b_bar, bounds.b_lower
    lmin, lam, mu, dB = nd.lambda_min, nd.lam, nd.mu, nd.delta_b
    ll = lam * lmin
    q = 1.0 / min(1.0 + 1.0 / math.sqrt(m),
                  1.0 + (1.0 / math.sqrt(m)) * (ll / (8.0 * mu * ab ** 2)) ** (1.0 / 3.0))
    N = max(1, math.floor(math.log(bl * eps ** 2 / (ab * rb * math.sqrt(m))) / math.log(q)) + 1)
    C5 = max(
        (2 * ab + 1 + math.sqrt((2 * ab + 1) ** 2 + ll / 8.0)) / (ll / 16.0)
        * math.sqrt(2 * m * math.log(2 * N) + 10 + 10 * m * ab),
        math.sqrt(5.0 * m) * bb / ll,
    )
    C7 = 2.0 * (bb + 2 * ab)
    C2 = max(32.0 * (bb + 2 * ab), 4 * C5 * mu * ab ** 2 + 12 * bb)
    C9 = max(16 * math.sqrt(2) * bb + 8 * math.sqrt(2) * C2 * ab ** 2 * mu,
             9 * bb + 18 * ab)
    C3 = max(2 * math.sqrt(3) * C5 * mu * ab ** 2, 3 * (bb + 2 * ab))
    C4 = max(3 * C9, 16 * C5 * mu * ab ** 2)
    C1 = 4.0 * C2 ** 2 / dB ** 2
    C6 = max(16 * C5, (8.0 / ll) * math.sqrt(2 * m * (C2 ** 2 + 5 * bb ** 2)))
    C0 = max(10 * bb ** 2 / dB ** 2, 20 * ab / lmin + 10, 2 * C1,
             math.sqrt(C1) * C7 / bl, 10 * bb ** 2 / bl ** 2)
    C8 = 1.0 + max(18 * C2, C4, 5 * math.sqrt(6) * bb * C0)
    C10 = math.sqrt(6 * C5 ** 2 + (m / ll ** 2) * (20 * bb ** 2 + 18 * (C8 + C9) ** 2))
    C11 = _min_valid_horizon(C0, C3, C5, bounds, nd)
    return {"C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
            "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10, "C11": C11,
            "N": N, "q": q, "eps": eps}


def _min_valid_horizon(C0, C3, C5, bounds: BoundsParams, nd: NonDegeneracyParams) -> int:
    """Smallest H beyond which both horizon-size inequalities hold."""
    rb, ab, bb = bounds.r_bar, bounds.a_bar, bounds.b_bar
    lmin, mu, dB = nd.lambda_min, nd.mu, nd.delta_b
    coef = max(20 * bb ** 2, 40 * ab * dB ** 2 / lmin, 63 * (bb + 2 * ab) ** 2,
               400 * C3 ** 2, 24 * C5 ** 2 * ab ** 4 * mu ** 2 + 2 * dB ** 2,
               10 * bb ** 2 + 2 * dB ** 2) / dB ** 2

    def holds(h: float) -> bool:
        lh = math.log(h)
        return h > 3 + 2 * C0 * lh ** 2 and h > 22 + coef * lh

    # h - a - b*ln^2 h has a single sign change from - to + on h >= 3, so the
    # violation set is a prefix and bisection applies
    hi = 3.0
    while not holds(hi):
        hi *= 2.0
        if hi > 1e300:
            return int(1e300)
    lo = 3.0
    # stop once the bracket is tighter than 1 or than float spacing allows
    while hi - lo > max(1.0, 1e-12 * hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return math.ceil(hi)


def accumulation_warmup(C0_eff: float, H: int) -> int:
    """Reject-all prefix length of the accumulation component."""
    if H < 2:
        return 0
    return max(0, math.ceil(C0_eff * math.log(H) ** 2))


def accumulation_schedule(kappa: int, c1_log: float, H: int) -> tuple[int, np.ndarray]:
    """Doubling batch boundaries V_1..V_{N_V+1} after a warm-up of kappa.

    Batch w occupies periods [V_w, V_{w+1}); V_1 = kappa+1 and the last
    boundary is pinned to H+1.  Returns N_V (0 when the horizon cannot fit a
    single doubling batch; callers fall back to one batch).
    """
    if c1_log <= 0:
        raise ValueError("batch growth constant must be positive")
    span = H - kappa
    if span < c1_log:
        return 0, np.array([kappa + 1, H + 1], dtype=np.int64)
    N_V = int(math.floor(math.log2(span / c1_log) + _EPS_LOG))
    V = [kappa + 1]
    for w in range(2, N_V + 1):
        V.append(min(H + 1, math.ceil(kappa + c1_log * 2 ** (w - 1))))
    V.append(H + 1)
    return N_V, np.asarray(V, dtype=np.int64)


def conversion_schedule(H: int) -> tuple[int, np.ndarray]:
    """Shrinking (one-third) batch boundaries U_1..U_{N_U+1} over H periods."""
    if H < 1:
        raise ValueError("conversion horizon must be >= 1")
    N_U = int(math.floor(math.log(H) / math.log(3.0) + _EPS_LOG))
    U = [1]
    for s in range(2, N_U + 1):
        U.append(H + 2 - 3 ** (N_U + 1 - s))
    U.append(H + 1)
    return N_U, np.asarray(U, dtype=np.int64)


def conversion_flat_index(H: int, bounds: BoundsParams, nd: NonDegeneracyParams,
                          consts: dict) -> int:
    """N_U^(cutoff): last conversion batch with guaranteed price tracking."""
    N_U, _ = conversion_schedule(H)
    ab, bb = bounds.a_bar, bounds.b_bar
    arg = max(4 * consts["C10"] ** 2 * ab ** 4 * nd.mu ** 2 / (3 * nd.delta_b ** 2),
              5 * (bb + 2 * ab) ** 2 / nd.delta_b ** 2,
              12 * (consts["C8"] + consts["C9"]) ** 2 / nd.delta_b ** 2)
    return N_U - math.ceil(math.log(arg * math.log(max(H, 3))) / math.log(3.0))


def ledger_lines(model: InputModel, T: int, overrides: Overrides | None = None,
                 eps: float = 1e-4) -> list[str]:
    """Human-readable constant report for one model/horizon pair."""
    out = [f"horizon T = {T}, resources m = {model.m}"]
    b = model.bounds
    out.append(f"bounds: r_bar={b.r_bar:g} a_bar={b.a_bar:g} "
               f"b_bar={b.b_bar:g} b_lower={b.b_lower:g}")
    p1 = alg1_params(b, model.m, T, overrides)
    out.append(f"bounded policy: W={p1['W']} C={p1['C']:g} "
               f"kappa_exact={p1['kappa_exact']} kappa_effective={p1['kappa']}")
    if model.support is not None:
        p2 = alg2_params(model, T, overrides)
        out.append(f"batch-LP policy: C={p2['C']:.6g} kappa_exact={p2['kappa_exact']} "
                   f"kappa_effective={p2['kappa']} W_exact={p2['W_exact']} "
                   f"W_effective={p2['W']}")
    if model.nondeg is not None:
        cs = nondeg_constants(b, model.nondeg, model.m, eps)
        row = " ".join(f"C{k}={cs[f'C{k}']:.6g}" for k in range(12))
        out.append("accumulate/convert constants: " + row)
        out.append(f"covering number N={cs['N']} at eps={cs['eps']:g}")
        if overrides is not None and overrides.active:
            eff = {f.name: getattr(overrides, f.name) for f in fields(overrides)
                   if getattr(overrides, f.name) != 1.0}
            out.append(f"active overrides: {eff}")
    return out
