"""Time the compiled coincidence kernels against the numpy fallback.

Generates one realistic thermal tag stream, then times hist1d / hist2d from
both backends on identical inputs and checks the counts agree bit for bit.
Run from the repo root after an editable install:

    python3 benchmarks/bench_kernels.py
"""
import time

import numpy as np

from sqcorr import ModeParams, MultimodeState, OpticsConfig, generate_timetags, load_tags
from sqcorr import _kernels_py
from sqcorr._backend import BACKEND

try:
    from sqcorr import _kernels_cy
except ImportError:
    _kernels_cy = None

N_PULSES = 5_000_000
PERIOD_PS = 1e12 / 1.866e7
REPEATS = 3


def best_of(fn, *args):
    times = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return out, min(times)


def main():
    import tempfile

    optics = OpticsConfig(eta=0.6, n_pulses=N_PULSES, splitter=(1 / 3, 1 / 3, 1 / 3))
    state = MultimodeState((ModeParams(n_th=0.15),))
    with tempfile.NamedTemporaryFile(suffix=".bin") as f:
        generate_timetags(state, optics, seed=7, path=f.name)
        tags = load_tags(f.name)
    t0, t1, t2 = (tags.channel(c) for c in range(3))
    print(f"{t0.size} / {t1.size} / {t2.size} tags per channel, "
          f"{N_PULSES} pulses, active backend: {BACKEND}")

    nbins_1d = 2 * int(round(25.5 * PERIOD_PS) // 100) + 1
    nbins_2d = 2 * int(round(4.5 * PERIOD_PS) // 2061) + 1
    cases = [
        ("hist1d", "hist1d(a, b) bin 100 ps", (t0, t1, 100, nbins_1d)),
        ("hist2d", "hist2d(a, b, c) bin 2061 ps", (t0, t1, t2, 2061, nbins_2d)),
    ]
    print(f"{'kernel':<28} {'numpy':>10} {'cython':>10} {'speedup':>9}")
    for name, label, args in cases:
        ref, t_py = best_of(getattr(_kernels_py, name), *args)
        if _kernels_cy is None:
            print(f"{label:<28} {t_py * 1e3:>8.1f}ms {'absent':>10} {'-':>9}")
            continue
        out, t_cy = best_of(getattr(_kernels_cy, name), *args)
        if not np.array_equal(ref, out):
            raise SystemExit(f"{name}: backend results differ")
        print(f"{label:<28} {t_py * 1e3:>8.1f}ms {t_cy * 1e3:>8.1f}ms "
              f"{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
