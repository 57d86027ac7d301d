"""Shared test germs: the flat structure, the minimal torsion fixture, and
deterministic random deformations."""

from __future__ import annotations

import numpy as np

from .normal import structure_from_b_family
from .structure import AlmostComplexStructure, structure_from_deformation

FIX_B_VALUE = 0.3 + 0.1j


def fix_j0(n=2, order=4) -> AlmostComplexStructure:
    """Flat integrable structure: A = iI, B = 0."""
    return AlmostComplexStructure.standard(n, order)


def fix_b(order=4, b=FIX_B_VALUE) -> AlmostComplexStructure:
    """Smallest torsion-carrying normal-form germ: n = 2, B(z) = b z_2 E11.

    The single family entry sits at (alpha, beta) = ((0,1), (0,0)), row 1,
    column 1 (one-based), which respects the vanishing pattern; A follows
    from the closed-form reconstruction.
    """
    fam = {((0, 1), (0, 0)): np.array([[b, 0], [0, 0]], dtype=complex)}
    return structure_from_b_family(fam, 2, order, exact_check=True)


def fix_b2(order=4, b=FIX_B_VALUE) -> AlmostComplexStructure:
    """Variant with vanishing torsion at the origin: B(z) = b z_2^2 E11."""
    fam = {((0, 2), (0, 0)): np.array([[b, 0], [0, 0]], dtype=complex)}
    return structure_from_b_family(fam, 2, order, exact_check=True)


def fix_b3(order=4, b=0.2 - 0.15j) -> AlmostComplexStructure:
    """Variant with vanishing torsion 1-jet: B(z) = b z_2^2 zbar_1 E11."""
    fam = {((0, 2), (1, 0)): np.array([[b, 0], [0, 0]], dtype=complex)}
    return structure_from_b_family(fam, 2, order, exact_check=True)


def random_deformation(seed, n=2, order=4) -> AlmostComplexStructure:
    return structure_from_deformation(n, order, seed=seed)


def random_b_normal(seed, n=2, order=4, magnitude=0.15) -> AlmostComplexStructure:
    """Random normal-form structure: a few B family entries respecting the
    vanishing pattern, A reconstructed from them."""
    rng = np.random.default_rng(seed)
    fam = {}
    placed = 0
    while placed < 3:
        d = int(rng.integers(1, 3))
        exps = [0] * (2 * n)
        exps[int(rng.integers(1, n))] += 1      # ensures lmax(alpha) >= 1
        for _ in range(d - 1):
            exps[int(rng.integers(0, 2 * n))] += 1
        alpha, beta = tuple(exps[:n]), tuple(exps[n:])
        from .normal import lmax
        big = lmax(alpha)
        if big < 1:
            continue
        k = int(rng.integers(0, n))
        l = int(rng.integers(0, big))
        mat = np.zeros((n, n), dtype=complex)
        mat[k, l] = magnitude * complex(rng.normal(), rng.normal())
        key = (alpha, beta)
        fam[key] = fam.get(key, np.zeros((n, n), dtype=complex)) + mat
        placed += 1
    return structure_from_b_family(fam, n, order, exact_check=True)
