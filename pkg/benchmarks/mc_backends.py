"""Time the compiled sampler kernel against the pure-NumPy backend.

Both backends share the counter-based normal generation, which dominates
end-to-end runtime; the table therefore reports the full pipeline and the
transform-only path (pregenerated normals) separately, and checks that
the two backends accumulate identical moments.

Usage: python3 benchmarks/mc_backends.py [--samples N] [--workers W]
"""
from __future__ import annotations

import argparse
import time

from diffint import mc
from diffint.core import EnsembleConfig
from diffint.schemes import LightConfig, SchemeId


def _rate(samples: int, fn) -> float:
    fn()  # warm-up
    start = time.perf_counter()
    fn()
    return samples / (time.perf_counter() - start) / 1e6


def run(samples: int, workers: int) -> None:
    cfg = EnsembleConfig.symmetric(1e4, gamma=10.0, alpha=0.02,
                                   phi=0.003, theta=0.001)
    light = LightConfig(n=1e7, chi=1e-4)
    opts = mc.McOptions(n_samples=samples, seed=20260818, workers=workers)

    backends = ["numpy"]
    try:
        from diffint.mc import _kernel  # noqa: F401
        backends.insert(0, "kernel")
    except ImportError:
        print("compiled kernel not built; timing the NumPy backend only")

    gen_rate = _rate(samples, lambda: mc.generate_normals(opts.seed, samples))
    normals = mc.generate_normals(opts.seed, samples)
    print(f"samples {samples:,}   workers {workers}   "
          f"default backend {mc.active_backend()}")
    print(f"normal generation (shared by both backends): {gen_rate:.2f} Ms/s")

    columns = [f"{b} full" for b in backends] + [f"{b} xform" for b in backends]
    print(f"{'scheme':<20}" + "".join(f"{c + ' (Ms/s)':>21}" for c in columns))

    for scheme in SchemeId:
        rates = []
        results = []
        for pregen in (None, normals):
            for backend in backends:
                def call(backend=backend, pregen=pregen):
                    return mc.run_scheme_mc(cfg, light, scheme, opts,
                                            backend=backend, normals=pregen)
                rates.append(_rate(samples, call))
                results.append(call())
        variances = {round(r.sample_variance, 15) for r in results}
        if len(variances) > 1:
            raise AssertionError(f"backend moment mismatch for {scheme.value}")
        print(f"{scheme.value:<20}" + "".join(f"{r:>21.2f}" for r in rates))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=400_000)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    run(args.samples, args.workers)


if __name__ == "__main__":
    main()
