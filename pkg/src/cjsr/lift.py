"""Kronecker lift of a constrained switching system to an arbitrary one.

Phi_i = F_i (x) A_i; products over accepted words factor as
kron(F-product, A-product), so the joint spectral radius of the lifted set
equals the constrained joint spectral radius of the original system.
"""

from dataclasses import dataclass

import numpy as np

from .automaton import Tsm, _check_word
from .linalg import kron


@dataclass(frozen=True)
class MatrixSet:
    modes: tuple  # m square matrices, all n x n

    def __post_init__(self):
        modes = tuple(np.asarray(a, dtype=float) for a in self.modes)
        if len(modes) < 1:
            raise ValueError("need at least one mode matrix")
        n = modes[0].shape[0]
        for a in modes:
            if a.shape != (n, n):
                raise ValueError("all mode matrices must be square of the same size")
            if not np.all(np.isfinite(a)):
                raise ValueError("mode matrices must be finite")
        object.__setattr__(self, "modes", modes)

    @property
    def num_modes(self):
        return len(self.modes)

    @property
    def dim(self):
        return self.modes[0].shape[0]

    def word_product(self, word):
        """A_{sigma_k} ... A_{sigma_1} for the word sigma_1 ... sigma_k."""
        word = [int(s) for s in word]
        p = self.modes[word[0] - 1].copy()
        for lab in word[1:]:
            p = self.modes[lab - 1] @ p
        return p


@dataclass(frozen=True)
class LiftedSet:
    phis: tuple
    matrix_set: MatrixSet
    tsm: Tsm

    @property
    def num_modes(self):
        return len(self.phis)

    @property
    def dim(self):
        return self.phis[0].shape[0]


def build_lift(matrix_set, tsm):
    if matrix_set.num_modes != tsm.num_labels:
        raise ValueError(
            "mode count %d does not match automaton label count %d"
            % (matrix_set.num_modes, tsm.num_labels)
        )
    phis = tuple(kron(f, a) for f, a in zip(tsm.blocks, matrix_set.modes))
    return LiftedSet(phis, matrix_set, tsm)


def lifted_word_product(lifted, word):
    """Phi_{sigma_k} ... Phi_{sigma_1}, same orientation as the F-product."""
    word = _check_word(lifted.tsm, word)
    p = lifted.phis[word[0] - 1].copy()
    for lab in word[1:]:
        p = lifted.phis[lab - 1] @ p
    return p
