"""Independent reference implementations used as test oracles.

These stay deliberately naive: the query oracle enumerates every variable
assignment over the store's ids and literals (with prefix pruning, which
cannot change the result set), and the ranking oracle computes the Okapi
formula directly per document with no inverted index.
"""

from __future__ import annotations

import math
import random

from hetqa.kb import Entity, Relation, Triple, TripleStore, id_number
from hetqa.sparql import (
    Count,
    CountValue,
    EntityRef,
    Literal,
    RelationRef,
    SelectVar,
    SparqlQuery,
    TriplePattern,
    Variable,
)
from hetqa.textindex import BM25_B, BM25_K1, tokenize


def brute_force_evaluate(query: SparqlQuery, store: TripleStore):
    """Try every assignment of the query's variables to all store ids/literals.

    Returns a set of value-tuples in sorted-variable order, or a CountValue.
    """
    variables = query.variables()
    universe = [EntityRef(q) for q in sorted(store.entities, key=id_number)]
    universe += [RelationRef(p) for p in sorted(store.relations, key=id_number)]
    universe += [Literal(text) for text in sorted({t.obj for t in store.triples if not t.obj_is_entity})]
    triple_set = {(t.subject, t.predicate, t.obj, t.obj_is_entity) for t in store.triples}

    def ground_check(pattern: TriplePattern, env: dict):
        """True/False when fully ground under env, None when not ground yet."""
        resolved = []
        for term in (pattern.subject, pattern.predicate, pattern.obj):
            if isinstance(term, Variable):
                if term.name not in env:
                    return None
                term = env[term.name]
            resolved.append(term)
        s, p, o = resolved
        if not isinstance(s, EntityRef) or not isinstance(p, RelationRef):
            return False
        if isinstance(o, EntityRef):
            return (s.qid, p.pid, o.qid, True) in triple_set
        if isinstance(o, Literal):
            return (s.qid, p.pid, o.text, False) in triple_set
        return False

    solutions: list[dict] = []

    def assign(i: int, env: dict) -> None:
        if i == len(variables):
            solutions.append(dict(env))
            return
        name = variables[i]
        for value in universe:
            env[name] = value
            if all(ground_check(p, env) is not False for p in query.patterns):
                assign(i + 1, env)
        del env[name]

    if variables:
        assign(0, {})

    if isinstance(query.projection, Count):
        distinct = {sol[query.projection.var] for sol in solutions}
        return CountValue(query.projection.alias, len(distinct))
    return {tuple(sol[v] for v in variables) for sol in solutions}


def rows_as_set(result, variables):
    return {tuple(row[v] for v in variables) for row in result.rows}


def random_store(rng: random.Random, max_triples: int = 200) -> TripleStore:
    n_entities = rng.randint(3, 12)
    n_relations = rng.randint(1, 4)
    entities = {f"Q{i}": Entity(f"Q{i}", f"entity {i}") for i in range(1, n_entities + 1)}
    relations = {f"P{i}": Relation(f"P{i}", f"relation {i}") for i in range(1, n_relations + 1)}
    literal_pool = ["alpha", "beta", "gamma", "1", "2"]
    triples = []
    for _ in range(rng.randint(1, max_triples)):
        subject = f"Q{rng.randint(1, n_entities)}"
        predicate = f"P{rng.randint(1, n_relations)}"
        if rng.random() < 0.7:
            triples.append(Triple(subject, predicate, f"Q{rng.randint(1, n_entities)}", True))
        else:
            triples.append(Triple(subject, predicate, rng.choice(literal_pool), False))
    return TripleStore(entities, relations, triples)


def random_query(rng: random.Random, store: TripleStore, max_patterns: int = 3) -> SparqlQuery:
    var_pool = ["x", "y", "z"]
    entity_ids = sorted(store.entities, key=id_number)
    relation_ids = sorted(store.relations, key=id_number)
    literal_pool = ["alpha", "beta", "gamma", "1", "2", "missing"]

    def subject_term():
        if rng.random() < 0.5:
            return Variable(rng.choice(var_pool))
        # occasionally reference an id absent from the store
        return EntityRef(rng.choice(entity_ids + ["Q999"]))

    def predicate_term():
        if rng.random() < 0.4:
            return Variable(rng.choice(var_pool))
        return RelationRef(rng.choice(relation_ids + ["P999"]))

    def object_term():
        roll = rng.random()
        if roll < 0.45:
            return Variable(rng.choice(var_pool))
        if roll < 0.8:
            return EntityRef(rng.choice(entity_ids + ["Q999"]))
        return Literal(rng.choice(literal_pool))

    patterns = [
        TriplePattern(subject_term(), predicate_term(), object_term())
        for _ in range(rng.randint(1, max_patterns))
    ]
    occurring = sorted(
        {t.name for p in patterns for t in (p.subject, p.predicate, p.obj) if isinstance(t, Variable)}
    )
    if not occurring:
        patterns[0] = TriplePattern(patterns[0].subject, patterns[0].predicate, Variable("x"))
        occurring = ["x"]
    projected = rng.choice(occurring)
    if rng.random() < 0.4:
        projection = Count(projected, "count")
    else:
        projection = SelectVar(projected)
    return SparqlQuery(projection, tuple(patterns))


def reference_bm25_scores(texts: list[str], query: str) -> list[float]:
    """Direct per-document Okapi computation, no index structures."""
    docs = [tokenize(t) for t in texts]
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / n if n else 0.0
    scores = []
    query_terms = sorted(set(tokenize(query)))
    for doc in docs:
        dl = len(doc)
        score = 0.0
        for term in query_terms:
            df = sum(1 for d in docs if term in d)
            if df == 0:
                continue
            idf = max(0.0, math.log((n - df + 0.5) / (df + 0.5)))
            tf = doc.count(term)
            if tf == 0:
                continue
            score += idf * tf * (BM25_K1 + 1) / (tf + BM25_K1 * (1 - BM25_B + BM25_B * dl / avgdl))
        scores.append(score)
    return scores


def random_ast(rng: random.Random) -> SparqlQuery:
    """Arbitrary well-formed AST for print/parse round-trip checks."""
    def name():
        return "".join(rng.choice("abcdefgh_123") for _ in range(rng.randint(1, 6)))

    def term(position: str):
        roll = rng.random()
        if position == "subject":
            return Variable(name()) if roll < 0.5 else EntityRef(f"Q{rng.randint(0, 99999)}")
        if position == "predicate":
            return Variable(name()) if roll < 0.5 else RelationRef(f"P{rng.randint(0, 99999)}")
        if roll < 0.4:
            return Variable(name())
        if roll < 0.7:
            return EntityRef(f"Q{rng.randint(0, 99999)}")
        chars = 'ab "\\\\quote 7'
        return Literal("".join(rng.choice(chars) for _ in range(rng.randint(0, 8))))

    patterns = [
        TriplePattern(term("subject"), term("predicate"), term("object"))
        for _ in range(rng.randint(1, 4))
    ]
    occurring = sorted(
        {t.name for p in patterns for t in (p.subject, p.predicate, p.obj) if isinstance(t, Variable)}
    )
    if not occurring:
        patterns[0] = TriplePattern(patterns[0].subject, patterns[0].predicate, Variable(name()))
        occurring = [patterns[0].obj.name]
    projected = rng.choice(occurring)
    projection = Count(projected, name()) if rng.random() < 0.4 else SelectVar(projected)
    return SparqlQuery(projection, tuple(patterns))
