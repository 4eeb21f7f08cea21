"""Reproducible random streams.

Every stochastic quantity in the package is a pure function of an explicit
integer seed. Tie-breaking uniforms are drawn from a counter-based Philox
stream keyed by the seed, so the uniform attached to test unit ``j`` depends
only on ``(seed, j)`` and can be shared across p-value constructions (the
dominance coupling relies on this).
"""

from __future__ import annotations

import numpy as np

_U64 = 2**64


def unit_uniforms(seed: int, n_units: int) -> np.ndarray:
    """Return one Unif[0,1] variate per test unit, keyed by (seed, index).

    The j-th entry is the j-th variate of a Philox stream keyed by ``seed``;
    it is independent across units and invariant to ``n_units`` (asking for
    more units extends the vector without changing earlier entries).
    """
    if n_units < 0:
        raise ValueError("n_units must be >= 0")
    gen = np.random.Generator(np.random.Philox(key=seed % _U64))
    return gen.random(n_units)


def spawn_seeds(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """Derive ``n`` independent child seeds from ``(seed, stream)``.

    Used by the simulation harness to give each replicate its own seed while
    keeping the whole run a function of a single master seed.
    """
    ss = np.random.SeedSequence(entropy=(int(seed) % _U64, int(stream)))
    return ss.generate_state(n, dtype=np.uint64)
