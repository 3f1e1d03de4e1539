"""Parser and evaluator for the SPARQL subset emitted by the question decomposer.

Grammar (keywords case-insensitive, whitespace-insensitive, trailing dot in a
pattern optional)::

    query      := SELECT projection WHERE { pattern+ }
    projection := ?var | ( COUNT(?var) AS ?var )
    pattern    := term term term [.]
    term       := ?var | wd:Qn | wdt:Pn | "literal"

Anything else — OPTIONAL, FILTER, LIMIT, property paths — is a parse error:
failing loud beats silently misanswering.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Union

from .errors import ParseError, UnboundProjection
from .kb import TripleStore, id_number

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class EntityRef:
    qid: str


@dataclass(frozen=True)
class RelationRef:
    pid: str


@dataclass(frozen=True)
class Literal:
    text: str


Term = Union[Variable, EntityRef, RelationRef, Literal]
# Values a variable can be bound to during evaluation.
Value = Union[EntityRef, RelationRef, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    obj: Term


@dataclass(frozen=True)
class SelectVar:
    name: str


@dataclass(frozen=True)
class Count:
    var: str
    alias: str


Projection = Union[SelectVar, Count]


@dataclass(frozen=True)
class SparqlQuery:
    projection: Projection
    patterns: tuple[TriplePattern, ...]

    def variables(self) -> list[str]:
        """Variable names occurring in the patterns, in sorted order."""
        names = set()
        for p in self.patterns:
            for term in (p.subject, p.predicate, p.obj):
                if isinstance(term, Variable):
                    names.add(term.name)
        return sorted(names)


@dataclass
class Rows:
    rows: list[dict[str, Value]]


@dataclass(frozen=True)
class CountValue:
    alias: str
    value: int


ResultSet = Union[Rows, CountValue]

_VAR_RE = re.compile(r"\?([A-Za-z0-9_]+)")
_WD_RE = re.compile(r"wd:(Q\d+)")
_WDT_RE = re.compile(r"wdt:(P\d+)")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def eof(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_punct(self, ch: str) -> bool:
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == ch:
            self.pos += 1
            return True
        return False

    def expect_punct(self, ch: str) -> None:
        if not self.take_punct(ch):
            raise ParseError(self.pos, f"{ch!r}")

    def take_keyword(self, word: str) -> bool:
        """Consume ``word`` case-insensitively if it appears at the cursor."""
        self.skip_ws()
        end = self.pos + len(word)
        if self.text[self.pos : end].upper() != word.upper():
            return False
        if end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
            return False
        self.pos = end
        return True

    def expect_keyword(self, word: str) -> None:
        if not self.take_keyword(word):
            raise ParseError(self.pos, word)

    def take_regex(self, pattern: re.Pattern) -> str | None:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(1)

    def take_literal(self) -> str | None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != '"':
            return None
        i = self.pos + 1
        out = []
        while i < len(self.text):
            ch = self.text[i]
            if ch == "\\" and i + 1 < len(self.text):
                out.append(self.text[i + 1])
                i += 2
                continue
            if ch == '"':
                self.pos = i + 1
                return "".join(out)
            out.append(ch)
            i += 1
        raise ParseError(self.pos, "closing '\"'")


def _parse_term(sc: _Scanner) -> Term:
    var = sc.take_regex(_VAR_RE)
    if var is not None:
        return Variable(var)
    qid = sc.take_regex(_WD_RE)
    if qid is not None:
        return EntityRef(qid)
    pid = sc.take_regex(_WDT_RE)
    if pid is not None:
        return RelationRef(pid)
    lit = sc.take_literal()
    if lit is not None:
        return Literal(lit)
    raise ParseError(sc.pos, "a term (?var, wd:Qn, wdt:Pn, or \"literal\")")


def parse(text: str) -> SparqlQuery:
    """Parse a query string into an AST.

    Raises :class:`ParseError` with the byte offset of the failure and
    :class:`UnboundProjection` when the projected variable never occurs in a
    pattern.
    """
    sc = _Scanner(text)
    sc.expect_keyword("SELECT")

    projection: Projection
    if sc.take_punct("("):
        sc.expect_keyword("COUNT")
        sc.expect_punct("(")
        inner = sc.take_regex(_VAR_RE)
        if inner is None:
            raise ParseError(sc.pos, "?var inside COUNT()")
        sc.expect_punct(")")
        sc.expect_keyword("AS")
        alias = sc.take_regex(_VAR_RE)
        if alias is None:
            raise ParseError(sc.pos, "?alias after AS")
        sc.expect_punct(")")
        projection = Count(inner, alias)
    else:
        name = sc.take_regex(_VAR_RE)
        if name is None:
            raise ParseError(sc.pos, "?var or (COUNT(?var) AS ?alias)")
        projection = SelectVar(name)

    sc.expect_keyword("WHERE")
    sc.expect_punct("{")

    patterns: list[TriplePattern] = []
    while True:
        if sc.take_punct("}"):
            break
        if sc.eof():
            raise ParseError(sc.pos, "'}'")
        start = sc.pos
        subject = _parse_term(sc)
        if not isinstance(subject, (EntityRef, Variable)):
            raise ParseError(start, "pattern subject to be wd:Qn or ?var")
        start = sc.pos
        predicate = _parse_term(sc)
        if not isinstance(predicate, (RelationRef, Variable)):
            raise ParseError(start, "pattern predicate to be wdt:Pn or ?var")
        obj = _parse_term(sc)
        sc.take_punct(".")
        patterns.append(TriplePattern(subject, predicate, obj))

    if not patterns:
        raise ParseError(sc.pos, "at least one triple pattern")
    if not sc.eof():
        raise ParseError(sc.pos, "end of query")

    query = SparqlQuery(projection, tuple(patterns))
    projected = projection.var if isinstance(projection, Count) else projection.name
    if projected not in query.variables():
        raise UnboundProjection(projected)
    _warn_if_disconnected(query, projected)
    return query


def _warn_if_disconnected(query: SparqlQuery, root_var: str) -> None:
    """Log when some pattern is not linked to the projection via shared variables."""
    groups = [
        {t.name for t in (p.subject, p.predicate, p.obj) if isinstance(t, Variable)}
        for p in query.patterns
    ]
    reached = {root_var}
    changed = True
    while changed:
        changed = False
        for vars_ in groups:
            if vars_ & reached and not vars_ <= reached:
                reached |= vars_
                changed = True
    if any(vars_ and not vars_ & reached for vars_ in groups):
        logger.warning("query has patterns disconnected from the projection: %s", to_text(query))


def _term_text(term: Term) -> str:
    if isinstance(term, Variable):
        return f"?{term.name}"
    if isinstance(term, EntityRef):
        return f"wd:{term.qid}"
    if isinstance(term, RelationRef):
        return f"wdt:{term.pid}"
    escaped = term.text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def to_text(query: SparqlQuery) -> str:
    """Canonical single-space rendering; parse(to_text(q)) == q."""
    if isinstance(query.projection, Count):
        head = f"SELECT (COUNT(?{query.projection.var}) AS ?{query.projection.alias})"
    else:
        head = f"SELECT ?{query.projection.name}"
    body = " ".join(
        f"{_term_text(p.subject)} {_term_text(p.predicate)} {_term_text(p.obj)} ."
        for p in query.patterns
    )
    return f"{head} WHERE {{ {body} }}"


def _value_sort_key(value: Value) -> tuple:
    if isinstance(value, EntityRef):
        return (0, id_number(value.qid), "")
    if isinstance(value, RelationRef):
        return (1, id_number(value.pid), "")
    return (2, 0, value.text)


def _match_position(term: Term, actual: Value, bindings: dict[str, Value]) -> dict[str, Value] | None:
    """Unify one pattern position against a concrete value; None on mismatch."""
    if isinstance(term, Variable):
        bound = bindings.get(term.name)
        if bound is None:
            return {term.name: actual}
        return {} if bound == actual else None
    return {} if term == actual else None


def _triple_values(triple) -> tuple[Value, Value, Value]:
    obj: Value = EntityRef(triple.obj) if triple.obj_is_entity else Literal(triple.obj)
    return (EntityRef(triple.subject), RelationRef(triple.predicate), obj)


def _candidates(pattern: TriplePattern, bindings: dict[str, Value], store: TripleStore):
    """Triples possibly matching the pattern under the current bindings."""

    def resolve(term: Term) -> Term:
        if isinstance(term, Variable) and term.name in bindings:
            return bindings[term.name]
        return term

    s, p, o = resolve(pattern.subject), resolve(pattern.predicate), resolve(pattern.obj)
    if isinstance(s, (Literal, RelationRef)) or isinstance(p, (Literal, EntityRef)):
        return []  # a variable got bound to a value impossible for this position
    kwargs = {}
    if isinstance(s, EntityRef):
        kwargs["subject"] = s.qid
    if isinstance(p, RelationRef):
        kwargs["predicate"] = p.pid
    if isinstance(o, EntityRef):
        kwargs["obj"], kwargs["obj_is_entity"] = o.qid, True
    elif isinstance(o, Literal):
        kwargs["obj"], kwargs["obj_is_entity"] = o.text, False
    if not kwargs:
        return store.triples
    return store.lookup(**kwargs)


def evaluate(query: SparqlQuery, store: TripleStore) -> ResultSet:
    """All satisfying assignments of the conjunctive pattern over the store.

    Rows bind every pattern variable, are deduplicated, and come back in
    lexicographic order of their bound values. COUNT returns the number of
    distinct bindings of the counted variable (0 on no match, never an error).
    """
    solutions: list[dict[str, Value]] = []

    def extend(remaining: list[TriplePattern], bindings: dict[str, Value]) -> None:
        if not remaining:
            solutions.append(bindings)
            return
        # Most selective pattern first: fewest candidate triples right now.
        scored = sorted(
            ((len(_candidates(p, bindings, store)), i) for i, p in enumerate(remaining)),
            key=lambda pair: pair,
        )
        _, idx = scored[0]
        pattern = remaining[idx]
        rest = remaining[:idx] + remaining[idx + 1 :]
        for triple in _candidates(pattern, bindings, store):
            new_bindings = dict(bindings)
            ok = True
            for term, actual in zip((pattern.subject, pattern.predicate, pattern.obj), _triple_values(triple)):
                unified = _match_position(term, actual, new_bindings)
                if unified is None:
                    ok = False
                    break
                new_bindings.update(unified)
            if ok:
                extend(rest, new_bindings)

    extend(list(query.patterns), {})

    if isinstance(query.projection, Count):
        distinct = {sol[query.projection.var] for sol in solutions}
        return CountValue(query.projection.alias, len(distinct))

    var_order = query.variables()
    unique = {tuple(sol[v] for v in var_order) for sol in solutions}
    ordered = sorted(unique, key=lambda row: tuple(_value_sort_key(v) for v in row))
    return Rows([dict(zip(var_order, row)) for row in ordered])


def _value_label(value: Value, store: TripleStore) -> str:
    if isinstance(value, EntityRef):
        return store.entity_label(value.qid)
    if isinstance(value, RelationRef):
        return store.relation_label(value.pid)
    return value.text


def render_evidence(result: ResultSet, query: SparqlQuery, store: TripleStore) -> list[str]:
    """Render rows as "<subject label> <relation label> <object label>" lines.

    Ids are resolved through the catalogs, falling back to the raw id; a
    count result renders as ``count = <n>``.
    """
    if isinstance(result, CountValue):
        return [f"count = {result.value}"]
    lines = []
    for row in result.rows:
        def instantiate(term: Term) -> str:
            if isinstance(term, Variable):
                return _value_label(row[term.name], store)
            return _value_label(term, store)  # type: ignore[arg-type]

        parts = [
            f"{instantiate(p.subject)} {instantiate(p.predicate)} {instantiate(p.obj)}"
            for p in query.patterns
        ]
        lines.append("; ".join(parts))
    return lines
