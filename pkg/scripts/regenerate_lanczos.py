"""
Refit the pinned log-gamma series coefficients of app/core/specfun.py.

    Gamma(x) = sqrt(2 pi) / x * (x + g)^(x + 1/2) e^-(x + g) * (c_0 + sum_k c_k / (x + k))

With g fixed, the bracket is linear in c_0..c_14, so the coefficients are the
least-squares solution against scipy's gammaln on a grid of x. Prints the
constants ready to paste, and the worst relative error of the fit.

Usage: python scripts/regenerate_lanczos.py [--points 400]
"""
import argparse
import os
import sys

import numpy as np
from scipy.special import gammaln

sys.path.append(os.getcwd())

from app.core.specfun import LANCZOS_COEFFICIENTS, LANCZOS_G, SQRT_2PI, log_gamma


def fit(points: int) -> np.ndarray:
    x = np.concatenate([np.linspace(0.05, 2.0, points // 2), np.geomspace(2.0, 170.0, points - points // 2)])
    tmp = x + LANCZOS_G
    log_prefix = (x + 0.5) * np.log(tmp) - tmp + np.log(SQRT_2PI / x)
    target = np.exp(gammaln(x) - log_prefix)

    k = np.arange(1, len(LANCZOS_COEFFICIENTS) + 1)
    design = np.column_stack([np.ones_like(x), 1.0 / (x[:, None] + k[None, :])])
    # rows scaled by the target: least squares in relative error
    coef, *_ = np.linalg.lstsq(design / target[:, None], np.ones_like(x), rcond=None)
    return coef


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--points", type=int, default=400)
    args = parser.parse_args()

    coef = fit(args.points)
    print(f"LANCZOS_G = {LANCZOS_G!r}")
    print(f"LANCZOS_SERIES_0 = {coef[0]!r}")
    print("LANCZOS_COEFFICIENTS = (")
    for c in coef[1:]:
        print(f"    {c!r},")
    print(")")

    grid = np.geomspace(1e-3, 1e3, 2001)
    current = np.max(np.abs(np.expm1(log_gamma(grid) - gammaln(grid))))
    print(f"# pinned coefficients: max relative error {current:.3e} on [1e-3, 1e3]")


if __name__ == "__main__":
    main()
