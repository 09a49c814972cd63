"""Print the staged wave log of the merge Riemann construction for each region.

Usage: python scripts/wave_diagram.py [u_l v_l w_r]
"""

import sys

from multipath import FluxModel, solve_modified_merge

CASES = [(0.1, 0.15, 0.6), (0.3, 0.1, 0.6), (0.1, 0.3, 0.6), (0.2, 0.3, 0.8)]


def show(model, u, v, w):
    sol = solve_modified_merge(model, u, v, w)
    x, t = sol.interaction
    print(f"u_l={u} v_l={v} w_r={w}: region {sol.region.value}, "
          f"interaction at x={x:.4f} t={t:.4f}, edge hit at t={sol.t_hit:.4f}")
    for lw in sol.waves:
        wv = lw.wave
        speed = "" if wv.speed is None else f"{wv.speed:+.4f}"
        print(f"  stage {lw.stage} {lw.label:4} {wv.kind.value:11} {wv.sign.value:9} {speed:>8}  "
              f"({wv.left_flux.shift:.3f}, {wv.left:.4f}) -> ({wv.right_flux.shift:.3f}, {wv.right:.4f})")
    print("  quadruplet: " + ", ".join(f"{q:.4f}" for q in sol.quadruplet))


def main():
    model = FluxModel.quadratic()
    cases = [tuple(map(float, sys.argv[1:4]))] if len(sys.argv) == 4 else CASES
    for c in cases:
        show(model, *c)


if __name__ == "__main__":
    main()
