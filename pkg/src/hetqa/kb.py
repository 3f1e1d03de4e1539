"""Wikidata-style knowledge subset: entity/relation catalogs and an indexed triple store.

The store is immutable after :func:`ingest`; lookups are pure and safe for
concurrent readers. Only ingest enforces referential integrity — lookups with
unknown ids return empty results so that machine-generated queries fail soft.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import DanglingReference, MalformedRecord

logger = logging.getLogger(__name__)

_QID_RE = re.compile(r"^Q\d+$")
_PID_RE = re.compile(r"^P\d+$")


def is_entity_id(value: str) -> bool:
    return bool(_QID_RE.match(value))


def is_relation_id(value: str) -> bool:
    return bool(_PID_RE.match(value))


def id_number(value: str) -> int:
    """Numeric part of a Q/P identifier; used for stable numeric tie-breaks."""
    return int(value[1:])


@dataclass(frozen=True)
class Entity:
    id: str
    label: str
    description: str = ""
    aliases: tuple[str, ...] = ()
    wikipedia_title: Optional[str] = None


@dataclass(frozen=True)
class Relation:
    id: str
    label: str
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class Triple:
    """(subject, predicate, object); the object is an entity id or a raw literal."""

    subject: str
    predicate: str
    obj: str
    obj_is_entity: bool = True

    def sort_key(self) -> tuple:
        obj_part = (0, id_number(self.obj), "") if self.obj_is_entity else (1, 0, self.obj)
        return (id_number(self.subject), id_number(self.predicate), obj_part)


class TripleStore:
    """Triple multiset with SPO / POS / OSP indexes and the id catalogs."""

    def __init__(
        self,
        entities: dict[str, Entity],
        relations: dict[str, Relation],
        triples: Iterable[Triple],
    ):
        self.entities = dict(entities)
        self.relations = dict(relations)
        self.triples = tuple(sorted(triples, key=Triple.sort_key))
        self._spo: dict[str, list[Triple]] = {}
        self._pos: dict[str, list[Triple]] = {}
        self._osp: dict[tuple[str, bool], list[Triple]] = {}
        for t in self.triples:
            self._spo.setdefault(t.subject, []).append(t)
            self._pos.setdefault(t.predicate, []).append(t)
            self._osp.setdefault((t.obj, t.obj_is_entity), []).append(t)
        self._label_index: dict[str, list[str]] = {}
        self._alias_index: dict[str, list[str]] = {}
        for qid in sorted(self.entities, key=id_number):
            ent = self.entities[qid]
            self._label_index.setdefault(ent.label.casefold(), []).append(qid)
            for alias in ent.aliases:
                self._alias_index.setdefault(alias.casefold(), []).append(qid)

    def __len__(self) -> int:
        return len(self.triples)

    def entity_label(self, qid: str) -> str:
        ent = self.entities.get(qid)
        return ent.label if ent else qid

    def relation_label(self, pid: str) -> str:
        rel = self.relations.get(pid)
        return rel.label if rel else pid

    def entities_by_label(self, text: str) -> list[str]:
        """Entity ids whose label equals ``text`` after case-folding."""
        return list(self._label_index.get(text.casefold(), ()))

    def entities_by_alias(self, text: str) -> list[str]:
        return list(self._alias_index.get(text.casefold(), ()))

    def lookup(
        self,
        subject: Optional[str] = None,
        predicate: Optional[str] = None,
        obj: Optional[str] = None,
        obj_is_entity: Optional[bool] = None,
    ) -> list[Triple]:
        """All triples matching the bound positions, in ascending-id order.

        At least one of subject/predicate/obj must be bound. Unknown ids
        simply match nothing.
        """
        if subject is None and predicate is None and obj is None:
            raise ValueError("lookup requires at least one bound position")
        if subject is not None:
            candidates = self._spo.get(subject, [])
        elif predicate is not None:
            candidates = self._pos.get(predicate, [])
        elif obj_is_entity is not None:
            candidates = self._osp.get((obj, obj_is_entity), [])
        else:
            candidates = self._osp.get((obj, True), []) + self._osp.get((obj, False), [])
        out = [
            t
            for t in candidates
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (obj is None or t.obj == obj)
            and (obj_is_entity is None or t.obj_is_entity == obj_is_entity)
        ]
        out.sort(key=Triple.sort_key)
        return out

    def object_count(self, subject: str, predicate: str) -> int:
        """Number of triples with the given subject and predicate."""
        return len(self.lookup(subject=subject, predicate=predicate))

    def check_indexes(self) -> None:
        """Verify the three indexes hold the same triple multiset; raises on drift."""
        from collections import Counter

        base = Counter(self.triples)
        for name, index in (("spo", self._spo), ("pos", self._pos), ("osp", self._osp)):
            seen = Counter(t for bucket in index.values() for t in bucket)
            if seen != base:
                raise AssertionError(f"{name} index out of sync with triple multiset")


def _read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(path), line_no, f"invalid JSON: {exc.msg}")
            if not isinstance(record, dict):
                raise MalformedRecord(str(path), line_no, "record is not an object")
            yield line_no, record


def _dedupe_aliases(aliases: Iterable[str]) -> tuple[str, ...]:
    seen: set[str] = set()
    out = []
    for alias in aliases:
        folded = alias.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        out.append(alias)
    return tuple(out)


def ingest(entities_file: str | Path, relations_file: str | Path, triples_file: str | Path) -> TripleStore:
    """Load a store from line-delimited entity / relation / triple records.

    Raises :class:`MalformedRecord` for structurally bad lines and
    :class:`DanglingReference` when a triple points at an id missing from the
    catalogs.
    """
    entities: dict[str, Entity] = {}
    for line_no, rec in _read_jsonl(Path(entities_file)):
        qid = rec.get("qid", "")
        if not is_entity_id(qid):
            raise MalformedRecord(str(entities_file), line_no, f"bad qid {qid!r}")
        label = rec.get("label", "")
        if not label:
            raise MalformedRecord(str(entities_file), line_no, "empty label")
        entities[qid] = Entity(
            id=qid,
            label=label,
            description=rec.get("description", ""),
            aliases=_dedupe_aliases(rec.get("aliases", [])),
            wikipedia_title=rec.get("wikipedia_title"),
        )

    relations: dict[str, Relation] = {}
    for line_no, rec in _read_jsonl(Path(relations_file)):
        pid = rec.get("pid", "")
        if not is_relation_id(pid):
            raise MalformedRecord(str(relations_file), line_no, f"bad pid {pid!r}")
        label = rec.get("label", "")
        if not label:
            raise MalformedRecord(str(relations_file), line_no, "empty label")
        relations[pid] = Relation(id=pid, label=label, aliases=_dedupe_aliases(rec.get("aliases", [])))

    triples: list[Triple] = []
    for line_no, rec in _read_jsonl(Path(triples_file)):
        subject = rec.get("subject", "")
        predicate = rec.get("predicate", "")
        obj_spec = rec.get("object")
        if not is_entity_id(subject):
            raise MalformedRecord(str(triples_file), line_no, f"bad subject {subject!r}")
        if not is_relation_id(predicate):
            raise MalformedRecord(str(triples_file), line_no, f"bad predicate {predicate!r}")
        if not isinstance(obj_spec, dict) or not ({"qid", "literal"} & obj_spec.keys()):
            raise MalformedRecord(str(triples_file), line_no, "object must be {'qid': …} or {'literal': …}")
        if subject not in entities:
            raise DanglingReference(subject, f"{triples_file}:{line_no} subject")
        if predicate not in relations:
            raise DanglingReference(predicate, f"{triples_file}:{line_no} predicate")
        if "qid" in obj_spec:
            obj = obj_spec["qid"]
            if obj not in entities:
                raise DanglingReference(obj, f"{triples_file}:{line_no} object")
            triples.append(Triple(subject, predicate, obj, obj_is_entity=True))
        else:
            triples.append(Triple(subject, predicate, str(obj_spec["literal"]), obj_is_entity=False))

    store = TripleStore(entities, relations, triples)
    logger.info(
        "ingested %d entities, %d relations, %d triples",
        len(store.entities),
        len(store.relations),
        len(store.triples),
    )
    return store
