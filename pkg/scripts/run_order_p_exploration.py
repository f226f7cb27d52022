#!/usr/bin/env python3
"""Exploratory order-p sweep on the fractional-integration surrogate.

EXPLORATORY OUTPUT, NOT A PASS/FAIL GATE.  The order-p lower estimate is
stated for semigroups that are p times norm-differentiable in t; no certified
desk-scale quasinilpotent example of that class is available, so this runs
the sweep on the fractional-integration family as a surrogate.  Powers of the
generator are replaced by central finite differences of t -> T(t), which is
exactly the differentiability the hypothesis would provide.
"""

import argparse

import numpy as np

from sgcalc.cli import NAMED_MEASURES
from sgcalc.complexfn import ray_max
from sgcalc.linalg import op_norm
from sgcalc.measures import CompactDistribution, laplace_distribution
from sgcalc.semigroups import riemann_liouville

_FD_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
}


def semigroup_derivative(backend, s: float, order: int, h: float) -> np.ndarray:
    """Central finite difference of t -> T(t) at s; equals A^order T(s)."""
    M = np.zeros((backend.dim, backend.dim), dtype=complex)
    for offset, w in _FD_STENCILS[order]:
        M += w * backend.materialize(s + offset * h)
    return M / h**order


def distribution_calc(backend, phi: CompactDistribution, u: float, h: float):
    """F(-uA) = sum_j int (uA)^j T(u t) dmu_j(t) via semigroup derivatives."""
    n = backend.dim
    M = np.zeros((n, n), dtype=complex)
    for j, mu_j in enumerate(phi.components):
        if mu_j.is_zero:
            continue
        for t, w in mu_j.atoms:
            M += w * u**j * semigroup_derivative(backend, u * t, j, h)
        if mu_j.pieces:
            raise NotImplementedError("exploratory sweep uses atom measures only")
    return M


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=256, help="discretization cells")
    parser.add_argument("--h", type=float, default=1e-3,
                        help="finite-difference step for semigroup derivatives")
    parser.add_argument("--u", type=float, nargs="+",
                        default=[0.02, 0.05, 0.1, 0.2, 0.4])
    args = parser.parse_args()

    backend = riemann_liouville(args.n)
    mu = NAMED_MEASURES["delta-difference"]()
    phi = CompactDistribution(1, (mu, 0.25 * mu))
    ray = ray_max(phi)
    print(__doc__)
    print(f"n={args.n}  fd step h={args.h:g}  ray max {ray.value:.6f} "
          f"at alpha={ray.alpha:.6f}")
    print(f"{'u':>8s} {'norm_F':>12s} {'margin':>12s}")
    for u in args.u:
        M = distribution_calc(backend, phi, u, args.h)
        norm = op_norm(M)
        print(f"{u:8.3f} {norm:12.6f} {norm - ray.value:+12.6f}")
    print("scalar sanity: |L(phi)| on the ray is reproduced by "
          f"laplace_distribution: F(alpha) = {laplace_distribution(phi, ray.alpha):.6f}")


if __name__ == "__main__":
    main()
