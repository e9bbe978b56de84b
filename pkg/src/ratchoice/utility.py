"""Scalar utilities over discrete alternatives.

Covers the deterministic part of a rational decision: turning each option
into a utility, ranking, picking the best, checking that a preference
relation is complete and transitive, and measuring what was given up.

All routines are pure. Ties are broken by ascending ``id`` so that every
output is reproducible.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
import numbers
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import (
    CompletenessError,
    DomainError,
    EmptyInputError,
    InsufficientOptionsError,
    LoadError,
)

DEFAULT_EPSILON = 1e-9

ALTERNATIVE_COLUMNS = ("id", "label", "cost")


@dataclass(frozen=True)
class Alternative:
    """A choosable option.

    ``cost`` is any positive cost measure (hours of travel in the route
    example). ``attributes`` carries named inputs for model-backed utilities.
    """

    id: str
    label: str
    cost: float
    attributes: dict[str, float] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not (isinstance(self.cost, numbers.Real) and math.isfinite(self.cost) and self.cost > 0):
            raise DomainError(f"alternative {self.id!r}: cost must be positive and finite, got {self.cost!r}")


class Preference(enum.Enum):
    STRICTLY_PREFERRED = "strictly_preferred"
    STRICTLY_DISPREFERRED = "strictly_dispreferred"
    INDIFFERENT = "indifferent"

    @property
    def weakly_preferred(self) -> bool:
        """Weak preference: strictly preferred or indifferent."""
        return self is not Preference.STRICTLY_DISPREFERRED


class TransitivityWarning(UserWarning):
    """Raised for chains that mix indifference with strict preference."""


UtilityFn = Callable[[Alternative], float]
Comparator = Callable[[Alternative, Alternative], "Preference | None"]


def inverse_cost_utility(cost: float, name: str | None = None) -> float:
    """Return ``1 / cost``.

    ``name`` identifies the alternative in the error message.
    """
    if not math.isfinite(cost) or cost <= 0:
        who = f"alternative {name!r}" if name is not None else "alternative"
        raise DomainError(f"{who}: cost must be positive and finite, got {cost!r}")
    return 1.0 / cost


def inverse_cost(alt: Alternative) -> float:
    """Utility handle: inverse of the alternative's cost."""
    return inverse_cost_utility(alt.cost, alt.id)


def _utilities(alts: Sequence[Alternative], utility: UtilityFn) -> list[float]:
    seen = set()
    values = []
    for alt in alts:
        if alt.id in seen:
            raise DomainError(f"duplicate alternative id {alt.id!r}")
        seen.add(alt.id)
        u = float(utility(alt))
        if not math.isfinite(u):
            raise DomainError(f"alternative {alt.id!r}: utility is not finite ({u!r})")
        values.append(u)
    return values


def rank_alternatives(
    alts: Sequence[Alternative], utility: UtilityFn = inverse_cost
) -> list[tuple[Alternative, float]]:
    """Sort alternatives by descending utility, ties by ascending id."""
    if len(alts) == 0:
        raise EmptyInputError("cannot rank an empty set of alternatives")
    values = _utilities(alts, utility)
    pairs = list(zip(alts, values))
    pairs.sort(key=lambda p: (-p[1], p[0].id))
    return pairs


def select_best(alts: Sequence[Alternative], utility: UtilityFn = inverse_cost) -> tuple[Alternative, float]:
    return rank_alternatives(alts, utility)[0]


def opportunity_cost(alts: Sequence[Alternative], utility: UtilityFn = inverse_cost) -> float:
    """Utility of the best alternative that was not chosen.

    When the top two utilities tie, this equals the chosen utility: the
    forgone option was just as good.
    """
    if len(alts) < 2:
        raise InsufficientOptionsError(
            f"opportunity cost needs at least 2 alternatives, got {len(alts)}"
        )
    return rank_alternatives(alts, utility)[1][1]


def classify_preference(u_a: float, u_b: float, epsilon: float = DEFAULT_EPSILON) -> Preference:
    if not (math.isfinite(u_a) and math.isfinite(u_b)):
        raise DomainError(f"utilities must be finite, got {u_a!r} and {u_b!r}")
    if epsilon < 0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon!r}")
    if abs(u_a - u_b) <= epsilon:
        return Preference.INDIFFERENT
    if u_a > u_b + epsilon:
        return Preference.STRICTLY_PREFERRED
    return Preference.STRICTLY_DISPREFERRED


def utility_comparator(utility: UtilityFn = inverse_cost, epsilon: float = DEFAULT_EPSILON) -> Comparator:
    """Build the preference relation induced by a utility function."""

    def compare(a: Alternative, b: Alternative) -> Preference:
        return classify_preference(float(utility(a)), float(utility(b)), epsilon)

    return compare


def _safe_compare(comparator: Comparator, a: Alternative, b: Alternative) -> Preference | None:
    try:
        result = comparator(a, b)
    except (ValueError, TypeError, KeyError, LookupError, ArithmeticError):
        return None
    return result if isinstance(result, Preference) else None


def check_completeness(
    alts: Sequence[Alternative], comparator: Comparator
) -> list[tuple[Alternative, Alternative]]:
    """List every unordered pair the comparator cannot relate.

    A pair fails when the comparator returns something other than a
    ``Preference`` (``None`` included) or raises.
    """
    failures = []
    for a, b in itertools.combinations(alts, 2):
        if _safe_compare(comparator, a, b) is None:
            failures.append((a, b))
    return failures


def _relation_matrix(alts: Sequence[Alternative], comparator: Comparator) -> list[list]:
    missing = check_completeness(alts, comparator)
    if missing:
        raise CompletenessError((a.id, b.id) for a, b in missing)
    n = len(alts)
    rel: list[list] = [[None] * n for _ in range(n)]
    for i, j in itertools.permutations(range(n), 2):
        rel[i][j] = _safe_compare(comparator, alts[i], alts[j])
    return rel


def check_transitivity(
    alts: Sequence[Alternative], comparator: Comparator
) -> list[tuple[Alternative, Alternative, Alternative]]:
    """Brute-force scan of ordered triples for strict preference cycles.

    A violation is a ≻ b, b ≻ c together with c ≻ a. Each cycle is reported
    once, rotated so that its first member comes earliest in ``alts``.
    Chains that break transitivity only through indifference (for example
    a ≻ b, b ≻ c, a ~ c) are not violations; they are emitted as a single
    :class:`TransitivityWarning`.

    Raises CompletenessError if some pair cannot be compared.
    """
    rel = _relation_matrix(alts, comparator)
    strict = Preference.STRICTLY_PREFERRED
    indiff = Preference.INDIFFERENT
    n = len(alts)
    violations = []
    weak_chains = []
    for i, j, k in itertools.permutations(range(n), 3):
        ab, bc, ac = rel[i][j], rel[j][k], rel[i][k]
        if ab is strict and bc is strict and rel[k][i] is strict:
            if i < j and i < k:
                violations.append((alts[i], alts[j], alts[k]))
            continue
        weak_fail = ab.weakly_preferred and bc.weakly_preferred and not ac.weakly_preferred
        strict_fail = ab is strict and bc is strict and ac is not strict
        indiff_fail = ab is indiff and bc is indiff and ac is not indiff
        if weak_fail or strict_fail or indiff_fail:
            weak_chains.append((alts[i].id, alts[j].id, alts[k].id))
    if weak_chains:
        warnings.warn(
            f"{len(weak_chains)} chain(s) break transitivity through indifference, "
            f"e.g. {weak_chains[0]}",
            TransitivityWarning,
            stacklevel=2,
        )
    return violations


def read_alternatives_csv(path) -> list[Alternative]:
    """Load alternatives from a ``id,label,cost`` CSV file.

    A zero-byte file or a header-only file yields an empty list.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return []
        header = [h.strip() for h in header]
        for col in ALTERNATIVE_COLUMNS:
            if col not in header:
                raise LoadError(None, col, f"missing column {col!r}")
        idx = {c: header.index(c) for c in ALTERNATIVE_COLUMNS}
        alts: list[Alternative] = []
        seen = set()
        for rownum, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise LoadError(rownum, None, f"expected {len(header)} fields, got {len(row)}")
            alt_id = row[idx["id"]].strip()
            if alt_id in seen:
                raise LoadError(rownum, "id", f"duplicate id {alt_id!r}")
            try:
                cost = float(row[idx["cost"]])
            except ValueError:
                raise LoadError(rownum, "cost", f"cannot parse cost {row[idx['cost']]!r}") from None
            try:
                alts.append(Alternative(alt_id, row[idx["label"]].strip(), cost))
            except DomainError as exc:
                raise LoadError(rownum, "cost", str(exc)) from None
            seen.add(alt_id)
    return alts


def write_ranking_csv(path, ranking: Iterable[tuple[Alternative, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", "cost", "utility"])
        for alt, u in ranking:
            writer.writerow([alt.id, alt.label, repr(float(alt.cost)), f"{u:.8f}"])
