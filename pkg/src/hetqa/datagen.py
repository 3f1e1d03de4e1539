"""Benchmark construction: anchor filtering, bridge linking, triplet retention,
question generation and composition, leak validation, and the annotation
round-trip.

Two-hop questions are built by chaining a text-anchored question with a
KB-derived question through a bridge entity, in either direction. Every
emitted record passes the leak validators: the composed question must not
contain its bridge answer or its final answer (case-folded substring after
metric normalization).
"""

from __future__ import annotations

import json
import logging
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import (
    CircularQuestion,
    CompositionLeak,
    DistractorEqualsAnswer,
    GenerationLeak,
    MalformedRecord,
    UnknownRecordId,
)
from .evaluation import BenchmarkRecord, HopGold, normalize
from .kb import Triple, TripleStore
from .linking import link
from .llm import GenerationRequest, generate
from . import sparql

logger = logging.getLogger(__name__)

MAX_ANSWER_WORDS = 5
REGEN_ATTEMPTS = 3

REJECTION_REASONS = ("circular", "bridge_leak", "answer_leak", "meaning_change", "other")

KB_QUESTION_PROMPT = """\
Instruction: Question generation given the following information:
1) Answer
2) Short relation between the question entity and the answer
3) Question entity.

IMPORTANT: The answer must be avoided in the question.

Answer: Jacques Boigelot;
Relation: director;
Question Entity: Peace in the Fields;
Question: Who directs Peace in the Fields?

Answer: Academy Award for Best Sound Mixing;
Relation: award received;
Question Entity: Douglas Shearer;
Question: Which award does Douglas Shearer receive?

Answer: Rio de Janeiro;
Relation: place of birth;
Question Entity: David Resnick;
Question: Where was David Resnick born?

Answer: {answer};
Relation: {relation};
Question Entity: {entity};
Question:"""

COMPOSE_PROMPT = """\
Instruction: Compose 2 single-hop questions into a 2-hop question given:
1) Hop1 question
2) Hop1 answer
3) Hop2 question.

Hop1 question: Who said a rose by any other name would smell just as sweet?
Hop1 answer: Juliet
Hop2 question: What is the cause of death of Juliet?
Composed question: What is the cause of death of the person who said a rose by any other name would smell just as sweet?

Hop1 question: Who hosted The Price Is Right before Bob Barker?
Hop1 answer: Bill Cullen
Hop2 question: What is the medical condition of Bill Cullen?
Composed question: What is the medical condition of the person who hosted The Price Is Right before Bob Barker?

Hop1 question: Who wrote If You Go Away on a Summer's Day?
Hop1 answer: Rod McKuen
Hop2 question: Which record company does Rod McKuen own?
Composed question: Which record company does the person who wrote If You Go Away on a Summer's Day own?

Hop1 question: {hop1_question}
Hop1 answer: {hop1_answer}
Hop2 question: {hop2_question}
Composed question:"""

DISTRACTOR_PROMPT = """\
Instruction: Give one incorrect but closely related alternative to the answer of the question.
Reply with the alternative only.

Question: {question}
Answer: {answer}
Alternative:"""

VERIFICATION_PROMPT = """\
Instruction: Rewrite the question as a verification question that starts with one of
Is, Was, Were, Does, Do, Did and embeds the candidate answer.

Question: {question}
Candidate answer: {candidate}
Verification question:"""

VERIFICATION_PREFIXES = ("is ", "was ", "were ", "does ", "do ", "did ")


@dataclass
class AnchorQA:
    question: str
    answer: str
    title: str
    passage: str
    id: str = ""

    def __post_init__(self):
        if not self.id:
            import hashlib

            digest = hashlib.sha1(f"{self.title}|{self.question}".encode("utf-8")).hexdigest()
            self.id = f"nq:{digest[:12]}"


@dataclass
class CandidatePair:
    anchor: AnchorQA
    direction: str  # "text_to_kb" | "kb_to_text"
    bridge_entity: str
    triple: Triple


@dataclass
class ComposedQuestion:
    qtype: str
    composed_text: str
    hop1_question: str
    hop1_answer: str
    hop2_question: str
    hop2_answer: str
    gold_sparql: Optional[str] = None
    verifying_answer: Optional[str] = None
    status: str = "machine"  # machine | accepted | revised | rejected
    record_id: str = ""
    pair: Optional[CandidatePair] = None
    kb_question: str = ""  # factoid form of the KB hop, pre yes/no rewriting
    kb_answer: str = ""


def load_anchors(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(path), line_no, f"invalid JSON: {exc.msg}")
    return rows


def filter_anchors(records: Iterable[dict]) -> list[AnchorQA]:
    """Keep tuples with all four fields present and a succinct (<=5 word) answer."""
    out = []
    for rec in records:
        question = (rec.get("question") or "").strip()
        answer = (rec.get("answer") or "").strip()
        title = (rec.get("title") or "").strip()
        passage = (rec.get("passage") or "").strip()
        if not (question and answer and title and passage):
            continue
        if len(answer.split()) > MAX_ANSWER_WORDS:
            continue
        out.append(AnchorQA(question=question, answer=answer, title=title, passage=passage, id=rec.get("id", "")))
    return out


def link_bridge(anchor: AnchorQA, store: TripleStore, direction: str) -> list[CandidatePair]:
    """Connect an anchor to the KB through its bridge entity.

    text_to_kb treats the anchor's answer as the bridge and returns triples
    with it as subject; kb_to_text treats the title entity as the bridge and
    returns triples with it as object.
    """
    if direction == "text_to_kb":
        mention, context = anchor.answer, anchor.question
    elif direction == "kb_to_text":
        mention, context = anchor.title, anchor.question
    else:
        raise ValueError(f"unknown direction {direction!r}")
    result = link(mention, context, store)
    if result.chosen is None:
        return []
    bridge = result.chosen
    if direction == "text_to_kb":
        triples = store.lookup(subject=bridge)
    else:
        triples = store.lookup(obj=bridge, obj_is_entity=True)
    return [CandidatePair(anchor=anchor, direction=direction, bridge_entity=bridge, triple=t) for t in triples]


def retain_triples(
    pairs: Sequence[CandidatePair],
    store: TripleStore,
    wiki_pages: dict[str, str],
) -> list[CandidatePair]:
    """Drop pairs whose fact is already stated on the subject's wiki page, and
    kb_to_text pairs whose (subject, relation) has more than one object."""
    out = []
    for pair in pairs:
        t = pair.triple
        subject = store.entities.get(t.subject)
        page_title = subject.wikipedia_title if subject else None
        if page_title is not None:
            page_text = wiki_pages.get(page_title, "")
            obj_label = store.entity_label(t.obj) if t.obj_is_entity else t.obj
            if page_text and obj_label.casefold() in page_text.casefold():
                continue
        if pair.direction == "kb_to_text" and store.object_count(t.subject, t.predicate) != 1:
            continue
        out.append(pair)
    return out


def _object_label(triple: Triple, store: TripleStore) -> str:
    return store.entity_label(triple.obj) if triple.obj_is_entity else triple.obj


def gen_kb_question(pair: CandidatePair, gateway, store: TripleStore) -> str:
    """Generate the single-hop KB question for a (subject, relation, object) triple.

    The object is the expected answer, so any generation containing it
    (normalized substring) is rejected and regenerated, up to 3 attempts.
    """
    t = pair.triple
    answer = _object_label(t, store)
    prompt = KB_QUESTION_PROMPT.format(
        answer=answer,
        relation=store.relation_label(t.predicate),
        entity=store.entity_label(t.subject),
    )
    leak = normalize(answer)
    for _ in range(REGEN_ATTEMPTS):
        response = generate(GenerationRequest(prompt, temperature=0.7, n_samples=1), gateway)
        question = response.samples[0].strip().split("\n")[0]
        if question and (not leak or leak not in normalize(question)):
            return question
    raise GenerationLeak(f"question for {t.subject}/{t.predicate} kept leaking {answer!r}")


def make_yesno(question: str, answer: str, gateway, rng: random.Random) -> tuple[str, str]:
    """Rewrite a factoid question into a verification question.

    An even coin decides whether the embedded candidate is the true answer
    (gold "yes") or an LLM-sampled near-miss distractor (gold "no").
    """
    embed_true = rng.random() < 0.5
    if embed_true:
        candidate, gold = answer, "yes"
    else:
        candidate = None
        for _ in range(REGEN_ATTEMPTS):
            response = generate(
                GenerationRequest(DISTRACTOR_PROMPT.format(question=question, answer=answer), temperature=0.7),
                gateway,
            )
            sampled = response.samples[0].strip().split("\n")[0]
            if sampled and normalize(sampled) != normalize(answer):
                candidate = sampled
                break
        if candidate is None:
            raise DistractorEqualsAnswer(f"no usable distractor for {answer!r}")
        gold = "no"
    for _ in range(REGEN_ATTEMPTS):
        response = generate(
            GenerationRequest(
                VERIFICATION_PROMPT.format(question=question, candidate=candidate), temperature=0.7
            ),
            gateway,
        )
        verification = response.samples[0].strip().split("\n")[0]
        if verification.casefold().startswith(VERIFICATION_PREFIXES):
            return verification, gold
    raise GenerationLeak(f"verification rewrite never matched Is/Was/Were/Does/Do/Did: {question!r}")


_NUMBER_WORDS = {
    0: "zero", 1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten", 11: "eleven",
    12: "twelve", 13: "thirteen", 14: "fourteen", 15: "fifteen", 16: "sixteen",
    17: "seventeen", 18: "eighteen", 19: "nineteen", 20: "twenty",
}


def count_answers(count: int) -> list[str]:
    answers = [str(count)]
    if count in _NUMBER_WORDS:
        answers.append(_NUMBER_WORDS[count])
    return answers


def make_aggregate(pair: CandidatePair, store: TripleStore) -> tuple[str, int, str]:
    """Build the counting question over (subject, relation) plus its gold query."""
    if pair.direction != "text_to_kb":
        raise ValueError("aggregate questions follow the text_to_kb order only")
    t = pair.triple
    count = store.object_count(t.subject, t.predicate)
    if count < 2:
        raise ValueError("aggregate questions need at least two associated objects")
    question = f"How many {store.relation_label(t.predicate)} objects does {store.entity_label(t.subject)} have?"
    gold_sparql = (
        f"SELECT (COUNT(?obj) AS ?count) WHERE {{ wd:{t.subject} wdt:{t.predicate} ?obj . }}"
    )
    return question, count, gold_sparql


def compose(
    hop1: tuple[str, str],
    hop2: tuple[str, str],
    qtype: str,
    gateway,
) -> ComposedQuestion:
    """Chain two single-hop questions by substituting the bridge mention.

    Raises :class:`CircularQuestion` when both hops are the same question and
    :class:`CompositionLeak` when the composition contains the bridge answer
    or the final answer.
    """
    q1, a1 = hop1
    q2, a2 = hop2
    if normalize(q1) == normalize(q2):
        raise CircularQuestion(q1)
    if normalize(a1) not in normalize(q2):
        raise ValueError("hop2 must mention the bridge entity (hop1's answer)")
    prompt = COMPOSE_PROMPT.format(hop1_question=q1, hop1_answer=a1, hop2_question=q2)
    response = generate(GenerationRequest(prompt, temperature=0.7), gateway)
    composed = response.samples[0].strip().split("\n")[0]
    folded = normalize(composed)
    if not composed:
        raise CompositionLeak("empty composition")
    if normalize(a1) and normalize(a1) in folded:
        raise CompositionLeak(f"bridge answer {a1!r} leaked")
    if normalize(a2) and normalize(a2) in folded:
        raise CompositionLeak(f"final answer {a2!r} leaked")
    return ComposedQuestion(
        qtype=qtype,
        composed_text=composed,
        hop1_question=q1,
        hop1_answer=a1,
        hop2_question=q2,
        hop2_answer=a2,
    )


def realize_pair(
    pair: CandidatePair,
    qtype: str,
    store: TripleStore,
    gateway,
    rng: random.Random,
    record_id: str,
) -> ComposedQuestion:
    """Run one candidate pair through question generation and composition."""
    t = pair.triple
    kb_question = gen_kb_question(pair, gateway, store)
    kb_answer = _object_label(t, store)
    gold_sparql = f"SELECT ?obj WHERE {{ wd:{t.subject} wdt:{t.predicate} ?obj . }}"
    verifying = None

    if pair.direction == "text_to_kb":
        hop1 = (pair.anchor.question, pair.anchor.answer)
        if qtype == "aggregate_text_kb":
            agg_question, count, gold_sparql = make_aggregate(pair, store)
            hop2 = (agg_question, str(count))
        elif qtype == "yesno_text_kb":
            verification, gold = make_yesno(kb_question, kb_answer, gateway, rng)
            verifying = verification
            hop2 = (verification, gold)
        else:
            hop2 = (kb_question, kb_answer)
    else:
        hop1 = (kb_question, kb_answer)
        if qtype == "yesno_kb_text":
            verification, gold = make_yesno(pair.anchor.question, pair.anchor.answer, gateway, rng)
            verifying = verification
            hop2 = (verification, gold)
        else:
            hop2 = (pair.anchor.question, pair.anchor.answer)

    composed = compose(hop1, hop2, qtype, gateway)
    composed.gold_sparql = gold_sparql
    composed.verifying_answer = verifying if verifying else None
    composed.record_id = record_id
    composed.pair = pair
    composed.kb_question = kb_question
    composed.kb_answer = kb_answer
    if qtype == "aggregate_text_kb":
        result = sparql.evaluate(sparql.parse(gold_sparql), store)
        if not isinstance(result, sparql.CountValue) or str(result.value) != composed.hop2_answer:
            raise CompositionLeak("aggregate gold query disagrees with the gold count")
    return composed


def composed_to_record(composed: ComposedQuestion, store: TripleStore) -> BenchmarkRecord:
    """Materialize a benchmark record; the KB hop keeps its factoid form."""
    pair = composed.pair
    if pair is None:
        raise ValueError("composed question lost its candidate pair")
    text_hop = HopGold(
        sub_question=pair.anchor.question,
        sub_answer=pair.anchor.answer,
        source="text",
        gold_passage_id=pair.anchor.id,
    )
    kb_hop = HopGold(
        sub_question=composed.kb_question,
        sub_answer=composed.kb_answer,
        source="kb",
        gold_triple=pair.triple,
        gold_sparql=composed.gold_sparql,
    )
    hops = [text_hop, kb_hop] if pair.direction == "text_to_kb" else [kb_hop, text_hop]
    if composed.qtype.startswith("yesno"):
        answers = [composed.hop2_answer]
    elif composed.qtype == "aggregate_text_kb":
        answers = count_answers(int(composed.hop2_answer))
    else:
        answers = [composed.hop2_answer]
    return BenchmarkRecord(
        id=composed.record_id,
        question=composed.composed_text,
        answers=answers,
        qtype=composed.qtype,
        hops=hops,
    )


def emit_records(composed_questions: Sequence[ComposedQuestion], store: TripleStore) -> list[BenchmarkRecord]:
    """Benchmark records for everything that survived annotation (or was never rejected)."""
    return [composed_to_record(c, store) for c in composed_questions if c.status != "rejected"]


def export_annotation_tasks(
    composed_questions: Sequence[ComposedQuestion],
    annotators: int = 2,
    rng: Optional[random.Random] = None,
) -> list[dict]:
    """Task rows for double annotation, with per-annotator randomized order."""
    rng = rng or random.Random(0)
    rows = []
    for slot in range(annotators):
        order = list(range(len(composed_questions)))
        rng.shuffle(order)
        for display_index, idx in enumerate(order):
            c = composed_questions[idx]
            rows.append(
                {
                    "record_id": c.record_id,
                    "annotator": slot,
                    "display_order": display_index,
                    "composed_question": c.composed_text,
                    "hop1_question": c.hop1_question,
                    "hop1_answer": c.hop1_answer,
                    "hop2_question": c.hop2_question,
                    "hop2_answer": c.hop2_answer,
                    "bridge_entity": c.hop1_answer,
                }
            )
    return rows


def write_annotation_tasks(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def import_verdicts(
    composed_questions: Sequence[ComposedQuestion],
    verdict_rows: Iterable[dict],
) -> list[ComposedQuestion]:
    """Apply accept/revise/reject verdicts; any reject wins, then any revise.

    Revised text replaces the machine composition. Unknown record ids raise.
    """
    by_id = {c.record_id: c for c in composed_questions}
    for row in verdict_rows:
        record_id = row.get("record_id", "")
        if record_id not in by_id:
            raise UnknownRecordId(record_id)
        verdict = row.get("verdict")
        if verdict not in ("accept", "revise", "reject"):
            raise ValueError(f"bad verdict {verdict!r} for {record_id}")
        c = by_id[record_id]
        if verdict == "reject":
            c.status = "rejected"
            reason = row.get("reason", "other")
            if reason not in REJECTION_REASONS:
                reason = "other"
            logger.info("record %s rejected (%s)", record_id, reason)
        elif verdict == "revise" and c.status != "rejected":
            c.status = "revised"
            revised = (row.get("revised_text") or "").strip()
            if revised:
                c.composed_text = revised
        elif verdict == "accept" and c.status == "machine":
            c.status = "accepted"
    return list(composed_questions)


def read_verdicts(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


class TemplateWriter:
    """Deterministic offline stand-in for the generation provider.

    Answers the three construction prompts with rule-based text so the whole
    pipeline can run (and be property-tested) without a model endpoint.
    """

    name = "template-writer"

    _WH_STRIP = re.compile(r"^(who|what|which|where|when|how)\s+(is|was|are|were|does|do|did)?\s*", re.IGNORECASE)

    def _field(self, prompt: str, label: str) -> str:
        matches = re.findall(rf"^{re.escape(label)}:\s*(.*)$", prompt, re.MULTILINE)
        value = matches[-1].strip() if matches else ""
        return value.rstrip(";")

    def _descriptor(self, question: str) -> str:
        stripped = self._WH_STRIP.sub("", question).strip().rstrip("?").strip()
        if not stripped:
            stripped = question.rstrip("?")
        return stripped if stripped.casefold().startswith("the ") else f"the {stripped}"

    def complete(self, request: GenerationRequest) -> list[str]:
        p = request.prompt
        if "Compose 2 single-hop questions" in p:
            q1 = self._field(p, "Hop1 question")
            a1 = self._field(p, "Hop1 answer")
            q2 = self._field(p, "Hop2 question")
            pattern = re.compile(re.escape(a1), re.IGNORECASE)
            composed = pattern.sub(self._descriptor(q1), q2, count=1)
            return [composed] * request.n_samples
        if "The answer must be avoided in the question" in p:
            relation = self._field(p, "Relation")
            entity = self._field(p, "Question Entity")
            return [f"What is the {relation} of {entity}?"] * request.n_samples
        if "Alternative:" in p:
            answer = self._field(p, "Answer")
            return [f"alternate {answer}"] * request.n_samples
        if "Verification question:" in p:
            question = self._field(p, "Question")
            candidate = self._field(p, "Candidate answer")
            body = self._descriptor(question)
            return [f"Is {candidate} {body}?"] * request.n_samples
        return ["None"] * request.n_samples
