"""Contracting axes in F2 and the projection complex they generate.

An axis is the orbit of a cyclic subgroup.  In a tree every axis is
contracting: closest-point projections of far-away balls have bounded
diameter.  Translates of one axis project onto each other boundedly, which is
what the projection complex axioms need.  A flat Z^2 has no such axis.
"""

from growthlab import (NotContracting, build_projection_complex, build_projection_table,
                       cayley_space, contraction_constant, direct_product, free_group,
                       independence_test, make_axis)
from growthlab.projection import axis_window, default_Theta, interval_set


def main():
    f2 = cayley_space(free_group(2), 6)
    for h in ("a", "ab", "aab"):
        print(f"Ax({h}): contraction constant {contraction_constant(f2, make_axis(f2, h), 4)}")
    print("ab and aB independent:", independence_test(f2, "ab", "aB"))
    print("ab and ba independent:", independence_test(f2, "ab", "ba"), "(conjugates)")

    z2 = cayley_space(direct_product(free_group(1), free_group(1)), 8)
    try:
        contraction_constant(z2, make_axis(z2, "a"), 6)
    except NotContracting as e:
        print("Z^2 axis:", e)

    space = cayley_space(free_group(2), 8)
    window = axis_window(space, "ab", 100)
    table = build_projection_table(space, window)
    Theta = default_Theta(table)
    g = build_projection_complex(table, Theta)
    print(f"\n{len(window)} translates of Ax(ab), theta = {table.theta}, complex at K = {Theta}: "
          f"{g.number_of_nodes()} vertices, {g.number_of_edges()} edges")

    # the longest interval set between two axes, in its natural order
    best = max(((u, v) for u in range(len(window)) for v in range(u + 1, len(window))),
               key=lambda uv: len(interval_set(table, 3, *uv, validate=False).members))
    iv = interval_set(table, 3, *best)
    chain = [window[i].label for i in [iv.U, *iv.members, iv.V]]
    print("longest ordered interval at K = 3:", " < ".join(chain))


if __name__ == "__main__":
    main()
