"""Compare the compiled core with the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--samples 2000] [--seed 1]

For each sampler kind the same keyed samples are evaluated on both backends;
the script reports throughput, the speedup and whether the outputs agree bit
for bit.
"""
import argparse
import time

import numpy as np

from rnsens import backend, model
from rnsens.estimators import (CoupledSensSampler, EstimatorConfig, FDSecondOrderSampler,
                               FirstOrderSampler, MeanSampler, SecondOrderSampler)


def cases(bd, prod):
    net, x0, f, th = bd.network, bd.initial_state, bd.output, bd.parameters
    yield "mean", lambda b: MeanSampler(net, x0, f, th, 1.0, backend=b)
    yield "sens1 th2", lambda b: FirstOrderSampler(net, x0, f, th, 1, 1.0, backend=b)
    yield "sens2 th1,th2", lambda b: SecondOrderSampler(net, x0, f, th, EstimatorConfig(1.0, 0, 1),
                                                        backend=b)
    yield "sens2 th2,th2", lambda b: SecondOrderSampler(net, x0, f, th, EstimatorConfig(1.0, 1, 1),
                                                        backend=b)
    yield "sens2 prod", lambda b: SecondOrderSampler(
        prod.network, prod.initial_state, prod.output, prod.parameters,
        EstimatorConfig(1.0, 0, 1), backend=b)
    yield "fd2 eps=0.1", lambda b: FDSecondOrderSampler(net, x0, f, th, 0, 1, 1.0, 0.1, backend=b)
    yield "coupled sens", lambda b: CoupledSensSampler(net, (0,), (1,), th, 1, 0.5, 1.0, f,
                                                       backend=b)


def timed(sampler, seed, n):
    t0 = time.perf_counter()
    out = sampler.block(seed, 0, n)
    return out, time.perf_counter() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    a = ap.parse_args(argv)
    if not backend.COMPILED:
        raise SystemExit("compiled core not built; install with the extension to compare")
    bd, prod = model.birth_death(), model.product_birth_death()
    print(f"{'sampler':<16}{'python/s':>12}{'cython/s':>14}{'speedup':>10}  identical")
    for name, make in cases(bd, prod):
        py, tpy = timed(make("python"), a.seed, a.samples)
        cy, tcy = timed(make("cython"), a.seed, a.samples)
        print(f"{name:<16}{a.samples / tpy:>12.0f}{a.samples / tcy:>14.0f}"
              f"{tpy / tcy:>9.0f}x  {np.array_equal(py, cy)}")


if __name__ == "__main__":
    main()
