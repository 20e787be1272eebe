#!/usr/bin/env python3
"""Diophantine fingerprints of shift vectors.

For a shift xi the quantity zeta(xi, T) is the smallest box of integer
combinations needed to bring xi . m within 1/T of an integer.  Rational
shifts freeze at a fixed level, badly-approximable quadratic pairs grow
along a slow staircase, and exact resonances collapse to 1 forever.  The
demo tabulates the staircase over dyadic T, the partial sums of the
associated weighted series, and Brjuno-type resonance verdicts.
"""

from affdirs.diophantine import (
    brjuno_partial,
    dirichlet_bound,
    parse_xi,
    vaguely_diophantine_partial,
    zeta,
)

SHIFTS = (
    ("rational (1/3, 1/2)", "1/3,1/2"),
    ("resonant (1/7, 2/7, 3/7)", "1/7,2/7,3/7"),
    ("quadratic pair", "sqrt2-1,sqrt3-1"),
    ("golden pair", "(-1+sqrt5)/2,(3-sqrt5)/2"),
)


def staircase_table(l_max):
    shifts = [(label, parse_xi(text)) for label, text in SHIFTS]
    print(f"zeta(xi, T) over dyadic T = 2^(l-1), l = 1..{l_max}")
    print(f"{'l':>3} {'T':>7} {'pigeonhole':>10} "
          + "".join(f"{label.split()[0]:>11}" for label, _ in shifts))
    for l in range(1, l_max + 1):
        T = 2.0 ** (l - 1)
        row = "".join(f"{zeta(xi, T):>11d}" for _, xi in shifts)
        print(f"{l:>3} {T:>7g} {dirichlet_bound(T, 2):>10d} {row}")
    print("(pigeonhole column uses d=2; every entry must stay at or below")
    print(" the bound for its own dimension)")


def series_table():
    xi = parse_xi("sqrt2-1,sqrt3-1")
    sums = vaguely_diophantine_partial(xi, 1.0, 0.0, 1.5, 16)
    print("\nweighted series l * zeta(xi, 2^(l-1))^(-1.5) for the "
          "quadratic pair:")
    print(f"{'l':>3} {'zeta':>6} {'term':>10} {'partial sum':>12}")
    for l, z, term, acc in zip(sums.l, sums.zetas, sums.terms,
                               sums.partial_sums):
        print(f"{l:>3} {z:>6d} {term:>10.5f} {acc:>12.5f}")
    print("The staircase grows fast enough that the terms shrink and the")
    print("partial sums level off: a shift of this quality is vague-")
    print("Diophantine for these weights.")


def brjuno_table():
    print("\nBrjuno-type sums 2^(-j/2) * phi(2^j), j = 0..8:")
    for label, text in (
        ("quadratic pair", "sqrt2-1,sqrt3-1"),
        ("rational (1/3, 1/2)", "1/3,1/2"),
        ("golden pair", "(-1+sqrt5)/2,(3-sqrt5)/2"),
    ):
        sums = brjuno_partial(parse_xi(text), 2.0, 8)
        if sums.resonant:
            print(f"  {label:<20} resonant, witness m = {sums.witness} "
                  "(series diverges)")
        else:
            print(f"  {label:<20} partial sum {sums.partial_sums[-1]:.4f}, "
                  f"phi range [{sums.phi[0]:.3f}, {sums.phi[-1]:.3f}]")
    print("The golden pair sums to 1 exactly, so an integer combination")
    print("of its coordinates resonates even though each coordinate is a")
    print("badly-approximable irrational.")


def main():
    staircase_table(16)
    series_table()
    brjuno_table()


if __name__ == "__main__":
    main()
