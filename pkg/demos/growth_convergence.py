"""Quotient growth rates climbing towards the full rate.

F2 has growth rate log 3.  Killing h^n for larger and larger n gives proper
quotients whose growth rates increase towards log 3.  For h = a the quotient
is a free product Z/n * Z, and its rate is known exactly from a rational
growth series; for h = ab the quotient is small cancellation and only the
measured trend is available.
"""

import math

from growthlab import census, exact_free_product_rate, free_group, growth_rate
from growthlab.quotients import convergence_sweep

LOG3 = math.log(3)


def main():
    spheres = census(free_group(2), 10)
    balls = [sum(spheres[: i + 1]) for i in range(len(spheres))]
    print("F2 spheres:", spheres)
    print(f"F2 growth rate {growth_rate(balls).delta:.6f} (log 3 = {LOG3:.6f})")

    print("\nh = a: measured rate, exact series rate, gap to log 3")
    sweep = convergence_sweep("a", range(2, 9), radius=40)
    for row in sweep["rows"]:
        if row["n"] == "inf":
            continue
        exact = exact_free_product_rate([row["n"], 0])
        print(f"  n={row['n']:<2}  {row['delta']:.6f}  {exact:.6f}  {LOG3 - row['delta']:.6f}")

    print("\nh = ab: measured rate and gap to log 3")
    sweep = convergence_sweep("ab", range(4, 9), radius=40)
    for row in sweep["rows"]:
        if row["n"] != "inf":
            print(f"  n={row['n']:<2}  {row['delta']:.6f}  {LOG3 - row['delta']:.6f}")


if __name__ == "__main__":
    main()
