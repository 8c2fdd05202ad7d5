"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from bargmann.fock import enumerate_sector
from bargmann.interferometer import random_unitary
from bargmann.kernels import available_backends, load_backend


def cases(rng):
    for n in (8, 12, 16, 20):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        yield f"permanent n={n}", lambda k, a=a: k.permanent(a)
    for m, photons in ((4, 4), (6, 4), (4, 6), (8, 3)):
        u = random_unitary(m, rng).matrix
        outputs = np.array(enumerate_sector(photons, m), dtype=np.int64)
        inputs = outputs[:: max(1, len(outputs) // 10)]

        def column_block(k, u=u, outputs=outputs, inputs=inputs):
            for t in inputs:
                k.fock_amplitudes(u, t, outputs)
        yield f"fock columns M={m} n={photons} ({len(inputs)}x{len(outputs)})", column_block


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    names = available_backends()
    backends = {n: load_backend(n) for n in names}
    print(f"{'case':<42}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, fn in cases(np.random.default_rng(0)):
        times = {}
        for name, mod in backends.items():
            fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<42}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in names)
              + f"{speed:>11.1f}x")


if __name__ == "__main__":
    main()
