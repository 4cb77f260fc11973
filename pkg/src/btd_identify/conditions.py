"""Arithmetic uniqueness conditions for rank-(1, L_r, L_r) block terms.

For sizes (I, J, K) with blocks L_1 <= ... <= L_R under the shape hypothesis
K >= J > L_R, the ambient-count comparison

    sum_r ( J L_r + L_r (K - L_r) + I - 1 )   vs   I J K

gates everything: strict overfill means a generic tensor in the model class
has infinitely many decompositions, and strict underfill enables the
conditions below.  All arithmetic is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .tensor_core import BlockTermSpec

VERDICTS = ("EssentiallyUnique", "PartiallyUnique", "InfinitelyMany", "Unknown")

CONDITION_NAMES = ("A", "B", "C", "D", "E", "AmbientOverfull")


@dataclass(frozen=True)
class AmbientFill:
    """Parameter count vs ambient size, with the comparison sign."""

    total: int
    ambient: int
    sign: str  # '<' | '=' | '>'
    terms: tuple = ()


@dataclass(frozen=True)
class ConditionVerdict:
    verdict: str
    fired: frozenset
    hypothesis_ok: bool
    fill: AmbientFill
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        bad = set(self.fired) - set(CONDITION_NAMES)
        if bad:
            raise ValueError(f"unknown conditions fired: {sorted(bad)}")
        f = self.fired
        if self.verdict == "EssentiallyUnique" and not (f & {"C", "D", "E"}):
            raise ValueError("EssentiallyUnique requires one of C, D, E")
        if self.verdict == "PartiallyUnique" and ("A" not in f or f & {"C", "D", "E"}):
            raise ValueError("PartiallyUnique requires A and none of C, D, E")
        if self.verdict == "InfinitelyMany" and not (f & {"AmbientOverfull", "B"}):
            raise ValueError("InfinitelyMany requires AmbientOverfull or B")


def ambient_fill_check(spec: BlockTermSpec) -> AmbientFill:
    """Per-block parameter counts J L_r + L_r (K - L_r) + I - 1 vs I J K."""
    I, J, K = spec.I, spec.J, spec.K
    terms = tuple(J * L + L * (K - L) + I - 1 for L in spec.L)
    total = sum(terms)
    ambient = I * J * K
    sign = "<" if total < ambient else ("=" if total == ambient else ">")
    return AmbientFill(total, ambient, sign, terms)


def condition_table(spec: BlockTermSpec) -> dict:
    """Truth value of each arithmetic condition, evaluated unconditionally."""
    I, J, K = spec.I, spec.J, spec.K
    L, R = spec.L, spec.R
    Lmax, Lsum = L[-1], sum(L)
    return {
        "A": comb(J, Lmax) >= R and I >= 2,
        "B": I * J * K < sum(x * x for x in L),
        "C": I >= 2 and J >= Lsum and K >= Lsum,
        "D": R == 2 and I >= 2,
        "E": I >= R and K >= Lsum and J >= 2 * Lmax and comb(J, Lmax) >= R,
    }


def evaluate_theorem(spec: BlockTermSpec) -> ConditionVerdict:
    """Uniqueness verdict with the full set of satisfied conditions.

    Precedence: ambient overfill contradicts everything else and wins;
    then any of C/D/E gives essential uniqueness, then A partial
    uniqueness, else Unknown.  Equality in the ambient count and a failing
    shape hypothesis both leave the verdict Unknown, with a note.
    """
    fill = ambient_fill_check(spec)
    table = condition_table(spec)
    fired = {name for name, ok in table.items() if ok}
    notes = []
    if fill.sign == ">":
        fired.add("AmbientOverfull")
    if table["B"]:
        notes.append(
            "condition B holds, but with K >= J > L_R every per-block count "
            "strictly exceeds L_r^2, so B forces ambient overfill; it is "
            "reported independently of the gate")
    shape_ok = spec.shape_hypothesis_ok
    hypothesis_ok = shape_ok and fill.sign == "<"
    if not shape_ok:
        notes.append(
            f"shape hypothesis K >= J > L_R fails for (I,J,K)=({spec.I},{spec.J},"
            f"{spec.K}), L_R={spec.L[-1]}; conditions reported but no verdict drawn")
        verdict = "Unknown"
    elif fill.sign == ">":
        verdict = "InfinitelyMany"
    elif fill.sign == "=":
        notes.append(
            "parameter count equals the ambient dimension; overfill statements "
            "need strict inequality, so no verdict is drawn")
        verdict = "Unknown"
    elif fired & {"C", "D", "E"}:
        verdict = "EssentiallyUnique"
    elif "A" in fired:
        verdict = "PartiallyUnique"
    else:
        verdict = "Unknown"
    return ConditionVerdict(verdict, frozenset(fired), hypothesis_ok, fill,
                            tuple(notes))
