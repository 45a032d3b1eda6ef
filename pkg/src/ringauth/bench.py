"""Scaling benchmark: sign time, verify time, and encoded size vs ring size.

Runs single-threaded on locally generated keys so the numbers measure the
signature scheme, not the network.  Each series gets a least-squares
linear fit; both operations walk the ring once, so the expected picture is
a straight line, and the encoded size follows the codec's exact formula.
The same run can be repeated under the pure-Python and GMP backends to
quantify what the compiled extension buys.
"""

from __future__ import annotations

import random
import time

from . import lrs
from ._backend import active_backend, available_backends, set_backend
from .group import GroupParams, exp


def linear_fit(xs: list[float], ys: list[float]) -> dict:
    """Ordinary least squares y = slope*x + intercept, with R^2."""
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points to fit a line")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return {"slope": slope, "intercept": intercept, "r2": r2}


def _bench_one_backend(
    ring_sizes: list[int], reps: int, params: GroupParams, rng: random.Random
) -> dict:
    series = []
    for n in ring_sizes:
        keys = [rng.randrange(1, params.q) for _ in range(n)]
        ring = lrs.Ring.of([exp(params.g, x, params) for x in keys], params)
        signer = rng.randrange(n)
        x = keys[signer]
        index = ring.index_of(exp(params.g, x, params))
        msg = rng.randbytes(32)

        sign_times = []
        verify_times = []
        size = None
        for _ in range(reps):
            t0 = time.perf_counter()
            sig = lrs.sign(msg, ring, index, x, params, scope=b"", rng=rng)
            t1 = time.perf_counter()
            ok = lrs.verify(msg, ring, sig, params)
            t2 = time.perf_counter()
            if not ok:
                raise RuntimeError(f"benchmark signature failed to verify at ring size {n}")
            sign_times.append(t1 - t0)
            verify_times.append(t2 - t1)
            size = len(lrs.encode(sig, params))
        series.append(
            {
                "ring_size": n,
                "reps": reps,
                "mean_sign_s": sum(sign_times) / reps,
                "mean_verify_s": sum(verify_times) / reps,
                "size_bytes": size,
            }
        )

    xs = [float(s["ring_size"]) for s in series]
    return {
        "backend": active_backend(),
        "series": series,
        "fits": {
            "sign": linear_fit(xs, [s["mean_sign_s"] for s in series]),
            "verify": linear_fit(xs, [s["mean_verify_s"] for s in series]),
            "size": linear_fit(xs, [float(s["size_bytes"]) for s in series]),
        },
    }


def run_bench(
    ring_sizes: list[int],
    reps: int,
    params: GroupParams,
    backend: str = "active",
    seed: int | None = None,
) -> dict:
    """Benchmark one backend, or all of them with backend="both"."""
    if len(set(ring_sizes)) < 2:
        raise ValueError("need at least two distinct ring sizes")
    if reps < 1:
        raise ValueError("reps must be positive")
    sizes = sorted(set(ring_sizes))
    rng = random.Random(seed)

    if backend == "both":
        names = list(available_backends())
    elif backend == "active":
        names = [active_backend()]
    else:
        names = [backend]

    runs = []
    previous = active_backend()
    try:
        for name in names:
            set_backend(name)
            runs.append(_bench_one_backend(sizes, reps, params, rng))
    finally:
        set_backend(previous)

    return {
        "params_fingerprint": params.fingerprint(),
        "ring_sizes": sizes,
        "reps": reps,
        "runs": runs,
    }


def report_csv(report: dict) -> str:
    """Plot-ready CSV: one row per (backend, ring size)."""
    lines = ["backend,ring_size,mean_sign_s,mean_verify_s,size_bytes"]
    for run in report["runs"]:
        for s in run["series"]:
            lines.append(
                f"{run['backend']},{s['ring_size']},{s['mean_sign_s']:.6f},"
                f"{s['mean_verify_s']:.6f},{s['size_bytes']}"
            )
    return "\n".join(lines) + "\n"
