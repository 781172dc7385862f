"""Tabulate p_k = P(|discriminant| = q**-k) for N uniform points of o.

    python scripts/energy_distribution.py --q 3 --n 2 3 4 5 --kmax 12
"""
import argparse

from ultrametric_gas.canonical import energy_distribution, zero_temperature_value


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--kmax", type=int, default=10)
    args = ap.parse_args()

    header = "k".rjust(4) + "".join(f"N={N}".rjust(14) for N in args.n)
    print(f"q = {args.q}: p_k as floats, exact values from the Taylor expansion of Z(N)")
    print(header)
    cols = {N: energy_distribution(args.q, N, args.kmax) for N in args.n}
    for k in range(args.kmax + 1):
        print(str(k).rjust(4) + "".join(f"{float(cols[N][k]):14.6e}" for N in args.n))
    print("sum".rjust(4) + "".join(f"{float(sum(cols[N])):14.6f}" for N in args.n))
    for N in args.n:
        assert cols[N][0] == zero_temperature_value(args.q, N)


if __name__ == "__main__":
    main()
