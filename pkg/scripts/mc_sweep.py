"""Sweep Monte Carlo estimates of Z(N, o, beta) against the exact values and report z-scores.

    python scripts/mc_sweep.py --q 2 3 5 --n 2 3 4 5 --beta 1/2 1 2 --samples 200000
"""
import argparse
from fractions import Fraction

from ultrametric_gas.acceptance import exact_float
from ultrametric_gas.canonical import canonical_Z
from ultrametric_gas.mcoracle import estimate_Z


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--beta", type=Fraction, nargs="+", default=[Fraction(1, 2), Fraction(1), Fraction(2)])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--precision", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    print(f"{'q':>3} {'N':>3} {'beta':>6} {'exact':>12} {'estimate':>12} {'std err':>10} {'z':>7}")
    zs = []
    seed = args.seed
    for q in args.q:
        for N in args.n:
            for beta in args.beta:
                seed += 1
                exact = exact_float(canonical_Z(q, N), q, beta)
                est = estimate_Z(q, N, float(beta), args.precision, args.samples, seed, threads=args.threads)
                z = est.z_score(exact)
                zs.append(z)
                print(f"{q:>3} {N:>3} {str(beta):>6} {exact:12.8f} {est.mean:12.8f} {est.std_error:10.2e} {z:7.2f}")
    outside = sum(abs(z) > 3 for z in zs)
    print(f"\n{len(zs)} estimates, {outside} outside 3 sigma, max |z| = {max(abs(z) for z in zs):.2f}")


if __name__ == "__main__":
    main()
