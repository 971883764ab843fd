"""Stochastic noise model shared by the trajectory and density backends."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_P2Q = 0.0014
DEFAULT_P_SPAM = 0.0035


@dataclass(frozen=True)
class NoiseModel:
    """Two-qubit depolarizing noise after every RZZ plus SPAM bit flips.

    ``p2q`` is the probability that one of the 15 non-identity two-qubit
    Paulis, chosen uniformly, follows an RZZ gate. ``p_spam`` is the flip
    probability of every initial qubit, every measurement record and hence
    every measurement-conditioned reset.
    """

    p2q: float = DEFAULT_P2Q
    p_spam: float = DEFAULT_P_SPAM

    def __post_init__(self):
        for name in ("p2q", "p_spam"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_trivial(self) -> bool:
        return self.p2q == 0.0 and self.p_spam == 0.0
