#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot kernels (codebook hashing, maximum-likelihood candidate
search) on synthetic workloads, plus one end-to-end Monte Carlo audit of a
binning protocol, once per backend, and prints a timing table.  Workloads
are seeded, so both backends chew on identical data; the first numba call
in each section is excluded as JIT warm-up.

Usage:
    python benchmarks/bench_backends.py [--codes 2000000] [--cands 192]
                                        [--n 16] [--repeats 5]
"""

import argparse
import time

import numpy as np

from trikey.kernels import numba_backend, numpy_backend
import trikey.kernels as kernels
from trikey.protocol_engine import binning_protocol
from trikey.secrecy_audit import mc_audit
from trikey.source_model import cascade_bsc_source

BACKENDS = (("numba", numba_backend), ("numpy", numpy_backend))


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_hash(args):
    codes = np.arange(args.codes, dtype=np.uint64)
    results = {}
    for name, backend in BACKENDS:
        backend.hash_codes(codes[:16], 7, 1)  # warm-up / JIT
        results[name] = best_of(lambda b=backend: b.hash_codes(codes, 7, 1), args.repeats)
    return f"hash_codes ({args.codes:.0e} codes)", results


def bench_decode(args):
    rng = np.random.default_rng(0)
    card = 2
    n = args.n
    logp = np.log(rng.dirichlet(np.ones(card**3))).reshape(card, card, card)
    pows = np.array([card ** (n - 1 - t) for t in range(n)], dtype=np.int64)
    own = rng.integers(0, card, size=n).astype(np.int64)
    cand_u = np.sort(rng.choice(card**n, size=args.cands, replace=False)).astype(np.int64)
    cand_v = np.sort(rng.choice(card**n, size=args.cands, replace=False)).astype(np.int64)
    results = {}
    for name, backend in BACKENDS:
        backend.decode_pair(own, cand_u[:2], cand_v[:2], logp, pows, pows, card, card)
        results[name] = best_of(
            lambda b=backend: b.decode_pair(own, cand_u, cand_v, logp, pows, pows, card, card),
            args.repeats,
        )
    return f"decode_pair ({args.cands}x{args.cands} pairs, n={n})", results


def bench_end_to_end(args):
    # Low slack keeps the bins coarse so candidate sets stay fat and the
    # decode kernel dominates the audit.
    pmf = cascade_bsc_source(0.25, 0.1)
    results = {}
    saved = (kernels.hash_codes, kernels.decode_pair)
    try:
        for name, backend in BACKENDS:
            kernels.hash_codes = backend.hash_codes
            kernels.decode_pair = backend.decode_pair

            def audit_once():
                proto = binning_protocol(pmf, 12, 0.05, 0.1, 0.0, seed=5)
                mc_audit(proto, pmf, 400, seed=6)

            audit_once()  # warm-up / JIT
            results[name] = best_of(audit_once, max(2, args.repeats // 2))
    finally:
        kernels.hash_codes, kernels.decode_pair = saved
    return "binning mc_audit (n=12, slack=0.05, 400 trials)", results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--codes", type=int, default=2_000_000)
    parser.add_argument("--cands", type=int, default=192)
    parser.add_argument("--n", type=int, default=16)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rows = [bench_hash(args), bench_decode(args), bench_end_to_end(args)]
    width = max(len(label) for label, _ in rows)
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, results in rows:
        speedup = results["numpy"] / results["numba"]
        print(
            f"{label:<{width}}  {results['numba']:>9.4f}s  {results['numpy']:>9.4f}s  {speedup:>7.1f}x"
        )


if __name__ == "__main__":
    main()
