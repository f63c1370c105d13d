"""Decision tables, rough approximations and LEM2 rule induction.

A decision table is a finite universe of examples over discrete-valued
attributes plus one decision column. Identical attribute vectors with
different decisions are allowed; they are what makes a table inconsistent,
and the lower/upper approximation machinery exists to handle exactly that.

``lem2_local_covering`` implements the greedy LEM2 local-covering loop:
grow a complex by repeatedly taking the attribute-value pair whose block
intersects the current goal the most (ties: smaller block, then first pair
in attribute-then-value order), stop once the complex's block fits inside
the target, prune redundant conditions in the order they were added, and
repeat on the uncovered remainder. A final sweep drops whole complexes
that the union no longer needs. Certain rules come from lower
approximations (or from concepts when the table is consistent on them),
possible rules from upper approximations.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from roughseg.exceptions import DataError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class AVPair:
    """One (attribute, value) condition."""

    attribute: str
    value: int


@dataclass(frozen=True)
class Block:
    """All rows where one attribute takes one value."""

    pair: AVPair
    members: frozenset[int]


@dataclass(frozen=True)
class Concept:
    """All rows sharing one decision value."""

    decision_value: int
    members: frozenset[int]


@dataclass
class LocalCovering:
    """A minimal family of minimal complexes whose blocks union to target."""

    complexes: list[tuple[AVPair, ...]]
    target: frozenset[int]


@dataclass(frozen=True)
class Rule:
    """Conjunction of conditions implying one decision value.

    ``support`` counts training rows the rule matches with the correct
    decision; ``strength`` equals support and feeds conflict resolution in
    the classifier. ``decision_label`` is the display name of the decision
    value when the inducing table knows one.
    """

    conditions: tuple[AVPair, ...]
    decision: tuple[str, int]
    certain: bool
    support: int
    strength: int
    decision_label: str | None = None

    @property
    def certainty(self) -> str:
        return "certain" if self.certain else "possible"

    def label(self) -> str:
        return self.decision_label if self.decision_label is not None else str(self.decision[1])


class DecisionTable:
    """Universe of discrete examples with one decision column."""

    def __init__(
        self,
        attributes: Sequence[str],
        rows: Sequence[Sequence[int]],
        decisions: Sequence[int],
        decision_name: str = "class",
        value_names: Mapping[str, Sequence[str]] | None = None,
    ):
        self.attributes = tuple(attributes)
        if len(set(self.attributes)) != len(self.attributes):
            raise DataError("duplicate attribute names")
        if decision_name in self.attributes:
            raise DataError("decision column name collides with an attribute")
        self.rows = [tuple(int(v) for v in row) for row in rows]
        self.decisions = [int(d) for d in decisions]
        if len(self.rows) != len(self.decisions):
            raise DataError("row/decision count mismatch")
        arity = len(self.attributes)
        for k, row in enumerate(self.rows):
            if len(row) != arity:
                raise DataError(f"row {k} has arity {len(row)}, expected {arity}")
            if any(v < 0 for v in row):
                raise DataError(f"row {k} holds a negative value code")
        self.decision_name = decision_name
        self.value_names = {a: tuple(names) for a, names in (value_names or {}).items()}
        self._attr_index = {a: k for k, a in enumerate(self.attributes)}

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(range(self.n_rows))

    def attribute_index(self, attribute: str) -> int:
        try:
            return self._attr_index[attribute]
        except KeyError:
            raise DataError(f"unknown attribute {attribute!r}") from None

    def column(self, attribute: str) -> list[int]:
        k = self.attribute_index(attribute)
        return [row[k] for row in self.rows]

    def value_label(self, attribute: str, code: int) -> str:
        names = self.value_names.get(attribute)
        if names is not None and 0 <= code < len(names):
            return names[code]
        return str(code)

    def decision_label(self, code: int) -> str:
        return self.value_label(self.decision_name, code)

    @classmethod
    def from_delimited(cls, text: str, decision_name: str = "class") -> "DecisionTable":
        """Parse whitespace-delimited text: header row, then one example per line.

        The final header token must equal the decision column name; value
        tokens map to integer codes in first-appearance order per column.
        """
        lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
        if not lines:
            raise DataError("empty decision table text")
        header = lines[0].split()
        if len(header) < 2:
            raise DataError("header must name at least one attribute plus the decision column")
        if header[-1] != decision_name:
            raise DataError(f"final header column must be {decision_name!r}, got {header[-1]!r}")
        attributes = header[:-1]
        codes: list[dict[str, int]] = [{} for _ in header]
        names: list[list[str]] = [[] for _ in header]
        rows: list[tuple[int, ...]] = []
        decisions: list[int] = []
        for lineno, line in enumerate(lines[1:], start=2):
            tokens = line.split()
            if len(tokens) != len(header):
                raise DataError(
                    f"line {lineno}: expected {len(header)} fields, got {len(tokens)}"
                )
            encoded = []
            for col, token in enumerate(tokens):
                mapping = codes[col]
                if token not in mapping:
                    mapping[token] = len(mapping)
                    names[col].append(token)
                encoded.append(mapping[token])
            rows.append(tuple(encoded[:-1]))
            decisions.append(encoded[-1])
        value_names = {attr: tuple(names[k]) for k, attr in enumerate(attributes)}
        value_names[decision_name] = tuple(names[-1])
        return cls(attributes, rows, decisions, decision_name, value_names)


def compute_blocks(table: DecisionTable) -> list[Block]:
    """One block per (attribute, value) pair occurring in the table."""
    blocks: list[Block] = []
    for attribute in table.attributes:
        column = table.column(attribute)
        by_value: dict[int, set[int]] = {}
        for row_id, value in enumerate(column):
            by_value.setdefault(value, set()).add(row_id)
        for value in sorted(by_value):
            blocks.append(Block(AVPair(attribute, value), frozenset(by_value[value])))
    return blocks


def concepts(table: DecisionTable) -> list[Concept]:
    """Concepts in ascending decision-code order; they partition the universe."""
    by_value: dict[int, set[int]] = {}
    for row_id, value in enumerate(table.decisions):
        by_value.setdefault(value, set()).add(row_id)
    return [Concept(value, frozenset(by_value[value])) for value in sorted(by_value)]


def indiscernibility_classes(
    table: DecisionTable, attributes: Sequence[str]
) -> list[frozenset[int]]:
    """Partition of the universe by equality on the given attribute subset."""
    if not attributes:
        raise ParameterError("attribute subset must be non-empty")
    idxs = [table.attribute_index(a) for a in attributes]
    by_key: dict[tuple[int, ...], set[int]] = {}
    order: list[tuple[int, ...]] = []
    for row_id, row in enumerate(table.rows):
        key = tuple(row[k] for k in idxs)
        if key not in by_key:
            by_key[key] = set()
            order.append(key)
        by_key[key].add(row_id)
    return [frozenset(by_key[key]) for key in order]


def lower_approx(x: Iterable[int], partition: Sequence[frozenset[int]]) -> frozenset[int]:
    """Union of partition classes entirely inside x."""
    xs = frozenset(x)
    out: set[int] = set()
    for cls in partition:
        if cls <= xs:
            out |= cls
    return frozenset(out)


def upper_approx(x: Iterable[int], partition: Sequence[frozenset[int]]) -> frozenset[int]:
    """Union of partition classes that intersect x."""
    xs = frozenset(x)
    out: set[int] = set()
    for cls in partition:
        if cls & xs:
            out |= cls
    return frozenset(out)


def boundary_region(x: Iterable[int], partition: Sequence[frozenset[int]]) -> frozenset[int]:
    """Upper minus lower approximation: the rows that make x rough."""
    xs = frozenset(x)
    return upper_approx(xs, partition) - lower_approx(xs, partition)


def _block_map(table: DecisionTable) -> dict[AVPair, frozenset[int]]:
    return {block.pair: block.members for block in compute_blocks(table)}


def _intersect(blocks: dict[AVPair, frozenset[int]], pairs: Sequence[AVPair]) -> frozenset[int]:
    it = iter(pairs)
    out = blocks[next(it)]
    for pair in it:
        out = out & blocks[pair]
    return out


def lem2_local_covering(target: Iterable[int], table: DecisionTable) -> LocalCovering:
    """Greedy LEM2 local covering of a target row set.

    The target must be a concept or one of its approximations (any union
    of indiscernibility classes works); other sets may be uncoverable, in
    which case a DataError is raised.
    """
    b = frozenset(target)
    if not b:
        raise DataError("empty target")
    if not b <= table.universe:
        raise DataError("target contains unknown row ids")
    blocks = _block_map(table)
    pair_order = [block.pair for block in compute_blocks(table)]
    tau: list[tuple[tuple[AVPair, ...], frozenset[int]]] = []
    g = b
    while g:
        t: list[AVPair] = []
        tb: frozenset[int] = table.universe
        goal = g
        while not (t and tb <= b):
            best: AVPair | None = None
            best_hit = -1
            best_size = 0
            for pair in pair_order:
                if pair in t:
                    continue
                hit = len(blocks[pair] & goal)
                if hit == 0:
                    continue
                size = len(blocks[pair])
                if hit > best_hit or (hit == best_hit and size < best_size):
                    best = pair
                    best_hit = hit
                    best_size = size
            if best is None:
                raise DataError("uncoverable target")
            t.append(best)
            tb = tb & blocks[best]
            goal = goal & blocks[best]
        # prune conditions in the order they were added
        for pair in list(t):
            if len(t) == 1:
                break
            rest = [q for q in t if q != pair]
            rest_block = _intersect(blocks, rest)
            if rest_block <= b:
                t = rest
                tb = rest_block
        tau.append((tuple(t), tb))
        covered: set[int] = set()
        for _, block in tau:
            covered |= block
        g = b - covered
    # prune whole complexes the union no longer needs, in discovery order
    k = 0
    while k < len(tau) and len(tau) > 1:
        rest_union: set[int] = set()
        for j, (_, block) in enumerate(tau):
            if j != k:
                rest_union |= block
        if rest_union == b:
            del tau[k]
        else:
            k += 1
    return LocalCovering([pairs for pairs, _ in tau], b)


def induce_rules(table: DecisionTable) -> list[Rule]:
    """Minimal certain/possible rules for every concept of the table."""
    partition = indiscernibility_classes(table, table.attributes)
    blocks = _block_map(table)
    rules: list[Rule] = []

    def emit(covering: LocalCovering, concept: Concept, certain: bool) -> None:
        for pairs in covering.complexes:
            block = _intersect(blocks, pairs)
            support = len(block & concept.members)
            rules.append(
                Rule(
                    pairs,
                    (table.decision_name, concept.decision_value),
                    certain,
                    support,
                    support,
                    decision_label=table.decision_label(concept.decision_value),
                )
            )

    for concept in concepts(table):
        lower = lower_approx(concept.members, partition)
        if lower == concept.members:
            emit(lem2_local_covering(concept.members, table), concept, certain=True)
        else:
            if lower:
                emit(lem2_local_covering(lower, table), concept, certain=True)
            else:
                logger.info(
                    "concept %s has an empty lower approximation; no certain rules",
                    table.decision_label(concept.decision_value),
                )
            upper = upper_approx(concept.members, partition)
            emit(lem2_local_covering(upper, table), concept, certain=False)
    return rules


def rule_matches(rule: Rule, row: Sequence[int], table: DecisionTable) -> bool:
    """True when every condition of the rule holds on the attribute vector."""
    for pair in rule.conditions:
        if row[table.attribute_index(pair.attribute)] != pair.value:
            return False
    return True
