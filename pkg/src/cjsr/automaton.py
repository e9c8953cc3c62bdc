"""Deterministic finite automata over switching labels, their transition
structure matrices, and acceptance checks on label words.

Convention: a word sigma_1 ... sigma_k is read left to right and its matrix
product composes right to left, F_{sigma_k} ... F_{sigma_1}.  A word is
accepted iff that product is nonzero; it is a repeatable cycle iff the product
has a nonzero diagonal entry.  States and labels are 1-indexed.
"""

from dataclasses import dataclass, field

import numpy as np


class NondeterministicDfaError(ValueError):
    """Two transitions defined for the same (state, label) pair."""


class LabelRangeError(ValueError):
    """A word contains a label outside [1, m]."""


@dataclass(frozen=True)
class Dfa:
    num_states: int
    num_labels: int
    transitions: frozenset  # triples (from_state, label, to_state)

    def __post_init__(self):
        object.__setattr__(self, "transitions", frozenset(tuple(t) for t in self.transitions))
        seen = {}
        for frm, lab, to in self.transitions:
            if not (1 <= frm <= self.num_states and 1 <= to <= self.num_states):
                raise ValueError("state out of range in transition (%d, %d, %d)" % (frm, lab, to))
            if not (1 <= lab <= self.num_labels):
                raise ValueError("label out of range in transition (%d, %d, %d)" % (frm, lab, to))
            key = (frm, lab)
            if key in seen and seen[key] != to:
                raise NondeterministicDfaError(
                    "two transitions from state %d on label %d" % (frm, lab)
                )
            seen[key] = to

    def step(self, state, label):
        """Successor state of (state, label), or None if undefined."""
        for frm, lab, to in self.transitions:
            if frm == state and lab == label:
                return to
        return None

    def transition_map(self):
        return {(frm, lab): to for frm, lab, to in self.transitions}


@dataclass(frozen=True)
class Tsm:
    """Per-label 0/1 transition structure matrices F_j (columns: source state,
    rows: target state); each column of each block has at most one 1."""

    blocks: tuple  # m matrices, each num_states x num_states

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        ell = blocks[0].shape[0]
        for b in blocks:
            if b.shape != (ell, ell):
                raise ValueError("all F blocks must be square of the same size")
            if not np.all((b == 0.0) | (b == 1.0)):
                raise ValueError("F blocks must be 0/1 matrices")
            if np.any(b.sum(axis=0) > 1):
                raise NondeterministicDfaError("some column of an F block has more than one 1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def num_states(self):
        return self.blocks[0].shape[0]

    @property
    def num_labels(self):
        return len(self.blocks)

    def to_dfa(self):
        transitions = set()
        for j, f in enumerate(self.blocks, start=1):
            rows, cols = np.nonzero(f)
            for s, t in zip(rows, cols):
                transitions.add((int(t) + 1, j, int(s) + 1))
        return Dfa(self.num_states, self.num_labels, frozenset(transitions))


@dataclass(frozen=True)
class AcceptancePath:
    states: tuple  # q_{j_1} ... q_{j_{k+1}}
    word: tuple


def build_tsm(dfa):
    """F_j[s, t] = 1 iff the DFA maps state t to state s under label j."""
    blocks = []
    tmap = dfa.transition_map()
    for j in range(1, dfa.num_labels + 1):
        f = np.zeros((dfa.num_states, dfa.num_states))
        for t in range(1, dfa.num_states + 1):
            s = tmap.get((t, j))
            if s is not None:
                f[s - 1, t - 1] = 1.0
        blocks.append(f)
    return Tsm(tuple(blocks))


def _check_word(tsm, word):
    word = tuple(int(s) for s in word)
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    for lab in word:
        if not (1 <= lab <= tsm.num_labels):
            raise LabelRangeError("label %d out of range [1, %d]" % (lab, tsm.num_labels))
    return word


def word_product(tsm, word):
    """F_{sigma_k} ... F_{sigma_1} for the word sigma_1 ... sigma_k."""
    word = _check_word(tsm, word)
    p = tsm.blocks[word[0] - 1].copy()
    for lab in word[1:]:
        p = tsm.blocks[lab - 1] @ p
    return p


def is_accepted(tsm, word):
    return bool(np.any(word_product(tsm, word) != 0.0))


def is_repeatable_cycle(tsm, word):
    """True iff some automaton state returns to itself after reading the word,
    so every power of the word is accepted."""
    return bool(np.any(np.diag(word_product(tsm, word)) != 0.0))


def find_path(dfa, word):
    """One concrete state path realizing the word, or None if rejected."""
    word = tuple(int(s) for s in word)
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    tmap = dfa.transition_map()
    for start in range(1, dfa.num_states + 1):
        states = [start]
        ok = True
        for lab in word:
            nxt = tmap.get((states[-1], lab))
            if nxt is None:
                ok = False
                break
            states.append(nxt)
        if ok:
            return AcceptancePath(tuple(states), word)
    return None


def path_from_state(dfa, word, start):
    """Path realizing the word from a given start state, or None."""
    tmap = dfa.transition_map()
    states = [start]
    for lab in word:
        nxt = tmap.get((states[-1], int(lab)))
        if nxt is None:
            return None
        states.append(nxt)
    return AcceptancePath(tuple(states), tuple(int(s) for s in word))
