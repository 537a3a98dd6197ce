"""Shared fixtures: lattices, the bundled molecule, random junction draws."""

import numpy as np
import pytest

from molscatter import LatticeParams, bundled_molecule_path, load_molecule


@pytest.fixture(scope="session")
def h2():
    return load_molecule(bundled_molecule_path())


@pytest.fixture
def quad_lattice():
    return LatticeParams.canonical(a=1.0, dispersion="quadratic")


@pytest.fixture
def cos_lattice():
    return LatticeParams.canonical(a=1.0, dispersion="cosine")


def random_junction(rng, n_leads=None, n_states=None, scale=3.0):
    """Draw a valid (B, D, E0) with real couplings and off-resonance energies."""
    n = n_leads if n_leads is not None else int(rng.integers(1, 5))
    G = n_states if n_states is not None else int(rng.integers(1, 7))
    B = rng.normal(size=(G, n)) * scale
    # keep every resonance denominator at least ~1 eV from the sweep band
    D = rng.uniform(30.0, 120.0, size=G) * rng.choice([-1.0, 1.0], size=G)
    E0 = rng.uniform(-5.0, 5.0)
    return B, D, E0


@pytest.fixture
def junction_factory():
    return random_junction
