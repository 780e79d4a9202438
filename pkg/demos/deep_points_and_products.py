"""Why long relators leave large subgroups alone, and how products grow.

Every nontrivial element of the normal closure of (ab)^6 in F2 has a geodesic
that runs along some translate of Ax(ab) for at least half the relator.  The
``extension`` CLI command shows the other side: words from the extension
construction never do, so their free semigroup survives in the quotient.
The second half measures growth of F2 x F2 under L^p product metrics, where
the rate is the L^q norm of the factor rates.
"""

import math

from growthlab import cayley_space, format_word, free_group, product_experiment
from growthlab.quotients import ExperimentConfig, deepest_segment, sample_normal_closure

LOG3 = math.log(3)


def main():
    x = ExperimentConfig("ab", n=6)
    space = cayley_space(free_group(2), 6)
    samples = sample_normal_closure("ab", 1, 6, 8, 2, seed=1)
    print(f"deep segments along translates of Ax(ab), eps = {x.eps}, M = {x.M}")
    for g in samples:
        seg = deepest_segment(space, g, "ab", x.params)
        print(f"  |g| = {len(g):<3} deepest run {seg.length:<3} on {seg.axis.label:<12} {format_word(g)}")

    print("\nF2 x F2 with the L^p product metric")
    for p in (1, 2, 3, math.inf):
        res = product_experiment([free_group(2), free_group(2)], p, 14)
        print(f"  p = {res['p']!s:<4} measured {res['measured']:.4f}  L^q norm of (log 3, log 3) "
              f"{res['predicted']:.4f}")


if __name__ == "__main__":
    main()
