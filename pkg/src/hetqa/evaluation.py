"""Benchmark loading, answer metrics, per-hop retrieval accuracy, and
symbolic-query diagnostics.

Answer grading follows the usual reading-comprehension convention: normalize
(case-fold, punctuation to spaces, drop articles, collapse whitespace), then
exact match, token-multiset F1, and a substring recall that credits longer
generations containing the gold answer.
"""

from __future__ import annotations

import json
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import sparql
from .errors import MalformedRecord, MissingTrace
from .kb import Triple, TripleStore
from .pipeline import HopState, PipelineTrace
from .textindex import linearize, linearized_id

QUESTION_TYPES = (
    "short_entity_text_kb",
    "short_entity_kb_text",
    "yesno_text_kb",
    "yesno_kb_text",
    "aggregate_text_kb",
)

_PUNCT_TO_SPACE = str.maketrans({ch: " " for ch in string.punctuation})


def normalize(answer: str) -> str:
    """Case-fold, punctuation to spaces, drop a/an/the, collapse whitespace."""
    text = answer.casefold().translate(_PUNCT_TO_SPACE)
    tokens = [t for t in text.split() if t not in ("a", "an", "the")]
    return " ".join(tokens)


def exact_match(prediction: str, answers: Sequence[str]) -> int:
    pred = normalize(prediction)
    return int(any(pred == normalize(gold) for gold in answers))


def f1(prediction: str, answers: Sequence[str]) -> float:
    """Max token-multiset F1 over the acceptable answers."""
    pred_tokens = normalize(prediction).split()
    best = 0.0
    for gold in answers:
        gold_tokens = normalize(gold).split()
        if not pred_tokens or not gold_tokens:
            best = max(best, float(pred_tokens == gold_tokens))
            continue
        overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
        if overlap == 0:
            continue
        precision = overlap / len(pred_tokens)
        recall = overlap / len(gold_tokens)
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


def recall_substring(prediction: str, answers: Sequence[str]) -> int:
    """1 iff some normalized gold answer appears contiguously in the prediction."""
    pred = normalize(prediction)
    return int(any(normalize(gold) in pred for gold in answers))


@dataclass
class HopGold:
    sub_question: str
    sub_answer: str
    source: str  # "text" | "kb"
    gold_passage_id: Optional[str] = None
    gold_triple: Optional[Triple] = None
    gold_sparql: Optional[str] = None


@dataclass
class BenchmarkRecord:
    id: str
    question: str
    answers: list[str]
    qtype: str
    hops: list[HopGold]


def _hop_from_dict(data: dict, where: str) -> HopGold:
    source = data.get("source")
    if source not in ("text", "kb"):
        raise ValueError(f"{where}: hop source must be 'text' or 'kb'")
    triple = None
    if data.get("gold_triple") is not None:
        t = data["gold_triple"]
        triple = Triple(t["subject"], t["predicate"], t["object"], t.get("object_is_entity", True))
    hop = HopGold(
        sub_question=data.get("sub_question", ""),
        sub_answer=data.get("sub_answer", ""),
        source=source,
        gold_passage_id=data.get("gold_passage_id"),
        gold_triple=triple,
        gold_sparql=data.get("gold_sparql"),
    )
    if hop.source == "text" and not hop.gold_passage_id:
        raise ValueError(f"{where}: text hop needs gold_passage_id")
    if hop.source == "kb" and hop.gold_triple is None:
        raise ValueError(f"{where}: kb hop needs gold_triple")
    return hop


def _hop_to_dict(hop: HopGold) -> dict:
    out: dict = {
        "sub_question": hop.sub_question,
        "sub_answer": hop.sub_answer,
        "source": hop.source,
    }
    if hop.gold_passage_id is not None:
        out["gold_passage_id"] = hop.gold_passage_id
    if hop.gold_triple is not None:
        out["gold_triple"] = {
            "subject": hop.gold_triple.subject,
            "predicate": hop.gold_triple.predicate,
            "object": hop.gold_triple.obj,
            "object_is_entity": hop.gold_triple.obj_is_entity,
        }
    if hop.gold_sparql is not None:
        out["gold_sparql"] = hop.gold_sparql
    return out


def record_to_dict(record: BenchmarkRecord) -> dict:
    return {
        "id": record.id,
        "question": record.question,
        "answers": record.answers,
        "qtype": record.qtype,
        "hops": [_hop_to_dict(h) for h in record.hops],
    }


def record_from_dict(data: dict, where: str = "record") -> BenchmarkRecord:
    record = BenchmarkRecord(
        id=str(data["id"]),
        question=data["question"],
        answers=list(data["answers"]),
        qtype=data["qtype"],
        hops=[_hop_from_dict(h, where) for h in data.get("hops", [])],
    )
    if not record.answers:
        raise ValueError(f"{where}: answers must be non-empty")
    if record.qtype not in QUESTION_TYPES:
        raise ValueError(f"{where}: unknown question type {record.qtype!r}")
    if len(record.hops) != 2:
        raise ValueError(f"{where}: records carry exactly two hops")
    if record.qtype == "aggregate_text_kb":
        gold_sparqls = [h.gold_sparql for h in record.hops if h.gold_sparql]
        if not gold_sparqls:
            raise ValueError(f"{where}: aggregate record needs a gold symbolic query")
        parsed = sparql.parse(gold_sparqls[-1])
        if not isinstance(parsed.projection, sparql.Count):
            raise ValueError(f"{where}: aggregate gold query must use COUNT")
    return record


def load_benchmark(path: str | Path) -> list[BenchmarkRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(path), line_no, f"invalid JSON: {exc.msg}")
            try:
                records.append(record_from_dict(data, where=f"{path}:{line_no}"))
            except (KeyError, ValueError) as exc:
                raise MalformedRecord(str(path), line_no, str(exc))
    return records


def save_benchmark(records: Sequence[BenchmarkRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")


def hop_retrieval_hit(trace: PipelineTrace, gold: HopGold, j: int, store: Optional[TripleStore] = None) -> int:
    """1 iff the hop-j retained context contains the gold evidence.

    Gold evidence counts when the context holds the gold passage id, the
    linearized gold triple, or a symbolic-query rendering whose text contains
    the gold sub-answer.
    """
    if j < 1 or j > len(trace.hops):
        return 0
    items = trace.hops[j - 1].context.items
    if gold.gold_passage_id and any(c.key == gold.gold_passage_id for c in items):
        return 1
    if gold.gold_triple is not None:
        lin_id = linearized_id(gold.gold_triple)
        if any(c.key == lin_id for c in items):
            return 1
        if store is not None:
            body = linearize(gold.gold_triple, store).body
            if any(c.text == body for c in items):
                return 1
    target = normalize(gold.sub_answer)
    if target and any(c.source == "sparql" and target in normalize(c.text) for c in items):
        return 1
    return 0


def _gold_link_targets(gold: HopGold) -> tuple[Optional[str], Optional[str]]:
    """(entity id, relation id) the generated query should have linked.

    The gold query's constant entity position decides whether the subject or
    the object of the gold triple is the linkable entity.
    """
    entity = gold.gold_triple.subject if gold.gold_triple else None
    relation = gold.gold_triple.predicate if gold.gold_triple else None
    if gold.gold_sparql:
        try:
            parsed = sparql.parse(gold.gold_sparql)
        except Exception:
            return entity, relation
        for p in parsed.patterns:
            if isinstance(p.subject, sparql.EntityRef):
                entity = p.subject.qid
            elif isinstance(p.obj, sparql.EntityRef):
                entity = p.obj.qid
            if isinstance(p.predicate, sparql.RelationRef):
                relation = p.predicate.pid
    return entity, relation


def _executed_pids(hop: HopState) -> set[str]:
    text = hop.executed_sparql or hop.sparql_text
    if not text:
        return set()
    try:
        parsed = sparql.parse(text)
    except Exception:
        return set()
    return {p.predicate.pid for p in parsed.patterns if isinstance(p.predicate, sparql.RelationRef)}


def sparql_diagnostics(
    traces: Sequence[PipelineTrace],
    records: Sequence[BenchmarkRecord],
    store: Optional[TripleStore] = None,
) -> tuple[float, float, float]:
    """(entity-link rate, entity+relation rate, entity-anywhere-in-candidates rate).

    Computed over records carrying structured gold evidence; by construction
    the rates satisfy relation-correct <= entity-correct <= entity-recoverable.
    """
    eligible = 0
    qid_hits = rel_hits = star_hits = 0
    for record, trace in zip(records, traces):
        kb_hops = [(i + 1, h) for i, h in enumerate(record.hops) if h.source == "kb"]
        if not kb_hops:
            continue
        eligible += 1
        j, gold = kb_hops[0]
        gold_entity, gold_relation = _gold_link_targets(gold)
        if gold_entity is None or j > len(trace.hops):
            continue
        hop = trace.hops[j - 1]
        if hop.link is None:
            continue
        if gold_entity in hop.link.candidate_ids:
            star_hits += 1
        if hop.link.chosen == gold_entity:
            qid_hits += 1
            if gold_relation is not None and gold_relation in _executed_pids(hop):
                rel_hits += 1
    if eligible == 0:
        return (0.0, 0.0, 0.0)
    return (qid_hits / eligible, rel_hits / eligible, star_hits / eligible)


@dataclass
class EvalReport:
    verdicts: list[dict]
    aggregates: dict[str, float]
    diagnostics: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_json_text(self) -> str:
        payload = {
            "metadata": self.metadata,
            "aggregates": self.aggregates,
            "diagnostics": self.diagnostics,
            "verdicts": self.verdicts,
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"

    def to_table_text(self) -> str:
        lines = ["evaluation report"]
        for key in sorted(self.metadata):
            lines.append(f"{key:<12} {self.metadata[key]}")
        lines.append("")
        for name, key in (("EM", "em"), ("F1", "f1"), ("Recall", "recall"), ("H1-R", "h1_r"), ("H2-R", "h2_r")):
            lines.append(f"{name:<8} {self.aggregates[key]:.4f}")
        for name, key in (("QID", "qid"), ("QID+REL", "qid_rel"), ("QID*", "qid_star")):
            if key in self.diagnostics:
                lines.append(f"{name:<8} {self.diagnostics[key]:.4f}")
        lines.append("")
        lines.append(f"{'id':<12} {'em':>2} {'f1':>6} {'rec':>3} {'h1':>2} {'h2':>2}  prediction")
        for v in self.verdicts:
            lines.append(
                f"{v['id']:<12} {v['em']:>2} {v['f1']:>6.4f} {v['recall']:>3} {v['h1']:>2} {v['h2']:>2}  {v['answer']}"
            )
        return "\n".join(lines) + "\n"


def evaluate_run(
    records: Sequence[BenchmarkRecord],
    traces: dict[str, PipelineTrace] | Sequence[PipelineTrace],
    store: Optional[TripleStore] = None,
    metadata: Optional[dict] = None,
) -> EvalReport:
    """Grade one trace per record and aggregate; order-independent rates."""
    if not records:
        raise ValueError("cannot evaluate an empty record set")
    if not isinstance(traces, dict):
        if len(traces) != len(records):
            raise MissingTrace("<count mismatch>")
        traces = {r.id: t for r, t in zip(records, traces)}

    verdicts = []
    ordered_traces = []
    for record in sorted(records, key=lambda r: r.id):
        trace = traces.get(record.id)
        if trace is None:
            raise MissingTrace(record.id)
        ordered_traces.append(trace)
        em = exact_match(trace.answer, record.answers)
        verdicts.append(
            {
                "id": record.id,
                "qtype": record.qtype,
                "answer": trace.answer,
                "em": em,
                "f1": round(f1(trace.answer, record.answers), 4),
                "recall": recall_substring(trace.answer, record.answers),
                "h1": hop_retrieval_hit(trace, record.hops[0], 1, store),
                "h2": hop_retrieval_hit(trace, record.hops[1], 2, store),
            }
        )

    n = len(verdicts)
    aggregates = {
        "em": round(sum(v["em"] for v in verdicts) / n, 4),
        "f1": round(sum(v["f1"] for v in verdicts) / n, 4),
        "recall": round(sum(v["recall"] for v in verdicts) / n, 4),
        "h1_r": round(sum(v["h1"] for v in verdicts) / n, 4),
        "h2_r": round(sum(v["h2"] for v in verdicts) / n, 4),
    }
    sorted_records = sorted(records, key=lambda r: r.id)
    qid, qid_rel, qid_star = sparql_diagnostics(ordered_traces, sorted_records, store)
    diagnostics = {"qid": round(qid, 4), "qid_rel": round(qid_rel, 4), "qid_star": round(qid_star, 4)}
    meta = {"records": n}
    if metadata:
        meta.update(metadata)
    return EvalReport(verdicts=verdicts, aggregates=aggregates, diagnostics=diagnostics, metadata=meta)
