"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two CSR kernels and a full binary training run on synthetic
sparse data shaped like a char-n-gram design matrix, and checks that the
backends agree numerically.

    python3 benchmarks/bench_kernels.py [--rows 20000] [--dim 200000]
"""

import argparse
import time

import numpy as np

from aggdetect import kernels
from aggdetect.featurize import SparseVector
from aggdetect.model import TrainConfig, train_binary


def make_problem(rng, rows, dim, nnz_per_row):
    vectors = []
    for _ in range(rows):
        idx = rng.choice(dim, size=nnz_per_row, replace=False)
        vectors.append(
            SparseVector(dimension=dim, entries={int(i): float(rng.normal()) for i in idx})
        )
    y = rng.integers(0, 2, size=rows)
    return vectors, y


def time_call(fn, *args, repeat=20):
    fn(*args)  # warm up (and trigger jit compilation)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times)) * 1000.0, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=200000)
    parser.add_argument("--nnz", type=int, default=300, help="nonzeros per row")
    parser.add_argument("--train-iters", type=int, default=50)
    args = parser.parse_args()

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare against")

    rng = np.random.default_rng(0)
    print(f"building problem: {args.rows} rows x {args.dim} dims, {args.nnz} nnz/row")
    vectors, y = make_problem(rng, args.rows, args.dim, args.nnz)
    indptr, indices, data, dim = kernels.stack_csr(vectors)
    w = rng.normal(size=dim)
    r = rng.normal(size=args.rows)

    print(f"{'kernel':<28}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}{'max |diff|':>12}")
    rows = [
        ("csr_matvec", kernels.csr_matvec_numpy, kernels.csr_matvec_numba,
         (indptr, indices, data, w)),
        ("csr_rmatvec", kernels.csr_rmatvec_numpy, kernels.csr_rmatvec_numba,
         (indptr, indices, data, r, dim)),
    ]
    z = kernels.csr_matvec_numpy(indptr, indices, data, w)
    rows.append(("sigmoid", kernels.sigmoid_numpy, kernels.sigmoid_numba, (z,)))
    yf = y.astype(np.float64)
    rows.append(
        ("logistic_loss_sum", kernels.logistic_loss_sum_numpy,
         kernels.logistic_loss_sum_numba, (z, yf))
    )
    for name, numpy_fn, numba_fn, call_args in rows:
        t_np, out_np = time_call(numpy_fn, *call_args)
        t_nb, out_nb = time_call(numba_fn, *call_args)
        diff = float(np.max(np.abs(np.asarray(out_np) - np.asarray(out_nb))))
        print(f"{name:<28}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>8.2f}x{diff:>12.2e}")

    config = TrainConfig(max_iters=args.train_iters)
    print(f"\nfull train_binary, {args.train_iters} iterations:")
    for backend in ("numpy", "numba"):
        kernels.set_backend(backend)
        train_binary(vectors[:200], y[:200], TrainConfig(max_iters=3))  # warm up
        start = time.perf_counter()
        clf = train_binary(vectors, y, config)
        elapsed = time.perf_counter() - start
        print(f"  {backend:<8}{elapsed:>8.2f}s   (final grad norm {clf.final_grad_norm:.2e})")
    kernels.set_backend("numba")


if __name__ == "__main__":
    main()
