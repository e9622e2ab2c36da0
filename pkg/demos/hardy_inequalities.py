"""The three weighted Hardy inequalities and their sharp constant.

Evaluates both sides for a few test functions across the three ranges of the
weight exponent a, then shows the ratio tending to one along the truncated
extremizers.
"""

import numpy as np

from dirac_extensions.inequalities import hardy_check, sharpness_probe

FUNCTIONS = {
    "r exp(-r)": (lambda r: r * np.exp(-r), lambda r: (1 - r) * np.exp(-r)),
    "exp(-r^2)": (lambda r: np.exp(-r**2), lambda r: -2 * r * np.exp(-r**2)),
    "1/(1+r^2)": (lambda r: 1 / (1 + r**2), lambda r: -2 * r / (1 + r**2) ** 2),
}

if __name__ == "__main__":
    for name, (f, df) in FUNCTIONS.items():
        for a in (0.0, 0.5, 0.9):
            rep = hardy_check(f, a, df=df)
            print(f"{name:>10} a={a:3.1f} {rep.variant.value:<15} lhs={rep.lhs:.6f} rhs={rep.rhs:.6f} "
                  f"ratio={rep.ratio:.4f}")
    print("\nsharpness (ratio of the two sides along the extremizer family):")
    for a in (-1.0, 0.3, 0.5, 2.0):
        print(f"  a={a:4.1f}: " + ", ".join(f"{sharpness_probe(a, eps):.10f}" for eps in (1e-1, 1e-2, 1e-3)))
