"""Bound-checking suites run by ``listsecrecy verify``.

Each suite returns rows ``{suite, check, measured, bound, slack, status, hard}``.
``status`` is ``pass``, ``fail``, ``info`` or ``refused: regime``; only rows
with ``hard=True`` and status ``fail`` make the command exit nonzero.
"""
from __future__ import annotations

import math

import numpy as np

from .cipher import CipherCode, build_codebook, ideal_joint, induced_joint
from .errors import RegimeError
from .prob import Channel, Distribution, DistortionMatrix, entropy
from .rd import rd_exponent
from .rng import stream
from .subproblem import (
    Tau,
    binomial_tail,
    chernoff_binary,
    chernoff_bounded,
    decay_experiment,
    exact_xi_mean,
    exceed_fraction,
    type_class_bound,
)


def _row(suite, check, measured, bound, hard, ok=None, status=None):
    if status is None:
        status = "info" if ok is None else ("pass" if ok else "fail")
    slack = bound - measured if (bound is not None and measured is not None) else None
    return {"suite": suite, "check": check, "measured": measured, "bound": bound,
            "slack": slack, "status": status, "hard": hard}


def suite_chernoff(seed: int, points: int = 200) -> list[dict]:
    rng = stream(seed, "grid", 1)
    dominated = 0
    for _ in range(points):
        m = int(rng.integers(1, 31))
        p = float(rng.uniform(0, 1))
        k = float(rng.uniform(0.5, m))
        b, t = chernoff_binary(m, p, k), binomial_tail(m, p, k)
        dominated += b >= t
    return [_row("chernoff", f"binomial tail, {points} points", dominated / points, 1.0, True,
                 dominated == points)]


def bounded_tail_mc(m, a, kind, theta, k, samples, rng):
    if kind == "uniform":
        x = rng.uniform(0, a, size=(samples, m))
    else:
        x = a * (rng.random((samples, m)) < theta)
    return float(np.mean(x.sum(axis=1) > k))


def suite_chernoff_bounded(seed: int, points: int = 50, samples: int = 100_000) -> list[dict]:
    rng = stream(seed, "grid", 2)
    ok = 0
    for i in range(points):
        m = int(rng.integers(2, 21))
        a = float(rng.uniform(0.2, 3.0))
        kind = "uniform" if i % 2 == 0 else "two-point"
        theta = 0.5 if kind == "uniform" else float(rng.uniform(0.01, 0.5))
        p = a * theta
        k = float(rng.uniform(0.3, 1.5)) * math.e * m * p
        b = chernoff_bounded(m, p, k, a)
        t = bounded_tail_mc(m, a, kind, theta, k, samples, stream(seed, "trial", 2, i))
        sigma = math.sqrt(max(t * (1 - t), 1.0 / samples) / samples)
        ok += b + 3 * sigma >= t
    return [_row("chernoff_bounded", f"Monte Carlo tail, {points} points", ok / points, 1.0, True,
                 ok == points)]


def suite_xi_mean(P: Distribution, d: DistortionMatrix, D: float, n: int, delta: float,
                 seed: int, draws: int = 20) -> list[dict]:
    rows = []
    bound = type_class_bound(P, d, D, n, delta)
    zs = [np.zeros(n, dtype=np.uint8), stream(seed, "grid", 3).integers(0, d.recon_alphabet, n)]
    for z in zs:
        exact = exact_xi_mean(P, d, D, z, delta)
        rows.append(_row("xi_mean", f"E xi, z={''.join(map(str, z))}", exact, bound, True,
                         exact <= bound + 1e-12))
        # Monte Carlo over codewords drawn i.i.d.: the empirical mean of xi
        rng = stream(seed, "codebook", n, 3)
        xs = rng.choice(P.alphabet_size, size=(draws * 1000, n), p=P.mass)
        t = np.stack([np.bincount(r, minlength=P.alphabet_size) for r in xs]) / n
        typ = 0.5 * np.abs(t - P.mass).sum(axis=1) < delta
        dist = d.values[xs, z[None, :]].sum(axis=1)
        mc = float(np.mean(typ & (dist <= n * D + 1e-9)))
        rows.append(_row("xi_mean", "Monte Carlo E xi", mc, bound, False))
    e = rd_exponent(P, d, D, delta)
    worst = max(r["measured"] for r in rows if r["hard"])
    if worst > 0:
        rows.append(_row("xi_mean", "measured exponent slack (bits/symbol)",
                         -math.log2(worst) / n, e, False))
    return rows


def suite_encoder_tv(P: Distribution, R0: float, seeds: int, ns=(2, 4, 6), margin=0.25) -> list[dict]:
    H = entropy(P)
    rows = []
    for label, R in (("above entropy", H + margin), ("below entropy", max(0.0, H - margin))):
        means = []
        for n in ns:
            tvs = []
            for s in range(seeds):
                code = CipherCode(build_codebook(s, n, R, R0, P))
                tvs.append(induced_joint(code, P).tv(ideal_joint(code)))
            means.append(float(np.mean(tvs)))
            rows.append(_row("encoder_tv", f"mean TV {label}, n={n}", means[-1], None, False))
        if label == "above entropy":
            dec = all(a > b for a, b in zip(means, means[1:]))
            rows.append(_row("encoder_tv", "TV decreasing in n above entropy", float(dec), 1.0, True, dec))
        else:
            stays = min(means) > 0.2
            rows.append(_row("encoder_tv", "TV stays above 0.2 below entropy", min(means), 0.2, True, stays))
    return rows


def suite_decay(P: Distribution, d: DistortionMatrix, params: dict, channel: Channel | None = None,
                name: str = "decay") -> list[dict]:
    tau = Tau(**params.get("tau", {}))
    try:
        rows = decay_experiment(params["n_grid"], params["seeds"], params["R_C"], params["R"],
                                params["D"], P, d, tau, channel, params.get("delta", 0.1))
    except RegimeError as exc:
        return [_row(name, str(exc), None, None, False, status="refused: regime")]
    out = []
    for n, frac in exceed_fraction(rows).items():
        out.append(_row(name, f"fraction of seeds with upper > tau_n, n={n}", frac, None, False))
    return out
