"""Few-shot prompt rendering for the hop and final-answer stages, and parsing
of the labeled fields the model writes back.

Prompt rendering is byte-stable: the same stage, question, and contexts always
produce the identical string, which the gateway passes through unmodified.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MissingField
from .rerank import RankedContext

HOP_GUIDANCE = """\
Write a search query, query entity, and SPARQL that will help answer a complex question.
Follow the following format.
Context: ${sources that may contain relevant content}
Question: ${the question to be answered}
Rationale: Let's think step by step. Based on the context, we have learned the following. ${information from the context that provides useful clues}
Search Query: ${a simple question for seeking the missing information}
Query Entity: ${query entity name from search query}
SPARQL: ${SPARQL query used to query against Wikidata}"""

FIRST_HOP_DEMOS = """\
Example 1
Context:
Question: What are the occupations of the person who holds the most women's Wimbledon titles?
Rationale: Let's think step by step. Based on the context, we have learned the following. Decompose the question to answer the following single-hop questions. 1. Who holds the most women's Wimbledon titles? 2. What are the occupations of this person
Search Query: Who holds the most women's Wimbledon titles?
Query Entity: women's Wimbledon titles
SPARQL: None

Example 2
Context:
Question: Which bay is the name of David Resnick's place of birth?
Rationale: Let's think step by step. Based on the context, we have learned the following. Decompose the question to answer the following single-hop questions. 1. Where was David Resnick born? 2. Which bay is the name of this place
Search Query: Where was David Resnick born?
Query Entity: David Resnick
SPARQL: SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}

Example 3
Context:
Question: Is the person who directed the film The Shape of Water a member of the Writers Guild of America, West?
Rationale: Let's think step by step. Based on the context, we have learned the following. Decompose the question to answer the following single-hop questions. 1. Who directed the film the shape of water? 2. Is the person the person a member of the Writers Guild of America, West?
Search Query: The director of the film The Shape of Water
Query Entity: The Shape of Water
SPARQL: SELECT ?name WHERE {wd:Q26698156 wdt:P57 ?name.}"""

LATER_HOP_DEMOS = """\
Example 1
Context:[[1] ... [k]]
Question: What are the occupations of the person who holds the most women's Wimbledon titles?
Rationale: Let's think step by step. Based on the context, we have learned the following. Wimbledon is a tennis tournament, and tennis player Martina Navratilova holds the most women's Wimbledon titles. The second step is to answer what are the occupations of this person.
Search Query: What are the occupations of Martina Navratilova?
Query Entity: Martina Navratilova
SPARQL: SELECT ?name WHERE {wd:Q54545 wdt:P106 ?name.}

Example 2
Context:[[1] ... [k]]
Question: Which bay is the name of David Resnick's place of birth?
Rationale: Let's think step by step. Based on the context, we have learned the following. David Resnick was born in Rio de Janeiro. The second step is to answer which bay is the name of Rio de Janeiro?
Search Query: which bay is the name of Rio de Janeiro?
Query Entity: Rio de Janeiro
SPARQL: None

Example 3
Context:[[1] ... [k]]
Question: Is the person who directed the film The Shape of Water a member of the Writers Guild of America, West?
Rationale: Let's think step by step. Based on the context, we have learned the following. The Shape of Water is directed by Guillermo del Toro. The second step is to answer is the person a member of the Writers Guild of America, West
Search Query: the organization Guillermo del Toro is in
Query Entity: Guillermo del Toro
SPARQL: SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}"""

FINAL_GUIDANCE = """\
Answer questions with short factoid answers.
Follow the following format.
Context:${sources that may contain relevant content}
Question: ${the question to be answered}
Rationale: Let's think step by step. ${a step-by-step deduction that identifies the correct response, which will be provided below}
Answer: ${a short factoid answer, often between 1 and 5 words}"""

FINAL_DEMOS = """\
Example 1
Context: [[1] ... [k]]
Question: What are the occupations of the person who holds the most women's Wimbledon titles?
Rationale: Let's think step by step. Martina Navratilova is a tennis player, writer, novelist, and autobiographer.
Answer: tennis player, writer, novelist, and autobiographer

Example 2
Context: [[1] ... [k]]
Question: Which bay is the name of David Resnick's place of birth?
Rationale: Let's think step by step. David Resnick was born in Rio de Janeiro, and "Rio de Janeiro" was the name of Guanabara Bay.
Answer: Guanabara Bay

Example 3
Context:[[1] ... [k]]
Question: Is the person who directed the film The Shape of Water a member of the Writers Guild of America, West?
Rationale: Let's think step by step. Guillermo del Toro Gomez is a filmmaker, he is a member of the Writers Guild of America, West.
Answer: yes"""


def render_context_block(contexts: Sequence[RankedContext]) -> str:
    """The numbered evidence block; entries count up across all hops."""
    lines = ["Context:"]
    i = 0
    for ctx in contexts:
        for item in ctx.items:
            i += 1
            lines.append(f"[{i}] {item.text}")
    return "\n".join(lines)


def render_prompt(
    stage: str,
    question: str,
    contexts: Sequence[RankedContext] = (),
    hop_index: int = 1,
) -> str:
    """Assemble the full few-shot prompt for a hop or the final-answer stage."""
    context_block = render_context_block(contexts)
    if stage == "final":
        target = f"Target\n{context_block}\nQuestion: {question}\nRationale: Let's think step by step."
        return f"{FINAL_GUIDANCE}\n\n{FINAL_DEMOS}\n\n{target}"
    if stage != "hop":
        raise ValueError(f"unknown stage {stage!r}")
    demos = FIRST_HOP_DEMOS if hop_index == 1 else LATER_HOP_DEMOS
    target = (
        f"Target Question\n{context_block}\nQuestion: {question}\n"
        "Rationale: Let's think step by step. Based on the context, we have learned the following."
    )
    return f"{HOP_GUIDANCE}\n\n{demos}\n\n{target}"


@dataclass
class ParsedFields:
    rationale: str
    search_query: str
    query_entity: Optional[str]
    sparql_text: Optional[str]


_LABELS = ("Rationale", "Search Query", "Query Entity", "SPARQL", "Answer")
_LABEL_RE = {
    label: re.compile(rf"^[ \t]*{re.escape(label)}[ \t]*:[ \t]*", re.MULTILINE)
    for label in _LABELS
}
_DEMO_BOUNDARY_RE = re.compile(r"^[ \t]*(Example\b|Target\b)", re.MULTILINE)


def _truncate_trailing_demos(completion: str) -> str:
    m = _DEMO_BOUNDARY_RE.search(completion)
    return completion[: m.start()] if m else completion


def _none_means_absent(value: str) -> Optional[str]:
    value = value.strip()
    if not value or value.rstrip(".").casefold() == "none":
        return None
    return value


def _last_field(text: str, label: str) -> Optional[tuple[int, str]]:
    """(start offset, single-line value) of the final occurrence of a label."""
    matches = list(_LABEL_RE[label].finditer(text))
    if not matches:
        return None
    m = matches[-1]
    value = text[m.end() :].split("\n", 1)[0]
    return m.start(), value.strip()


def _rationale_of(text: str) -> str:
    found = _last_field(text, "Rationale")
    if found is None:
        # Completions usually continue straight from the "Rationale:" cue in
        # the prompt, so the leading free text up to the first label is it.
        starts = [m.start() for lab in _LABELS for m in _LABEL_RE[lab].finditer(text)]
        cut = min(starts) if starts else len(text)
        return " ".join(text[:cut].split())
    start = found[0]
    m = _LABEL_RE["Rationale"].search(text, start)
    tail = text[m.end() :]
    next_starts = [n.start() for lab in _LABELS if lab != "Rationale" for n in _LABEL_RE[lab].finditer(tail)]
    cut = min(next_starts) if next_starts else len(tail)
    return " ".join(tail[:cut].split())


def parse_llm_fields(completion: str) -> ParsedFields:
    """Extract (rationale, search query, query entity, sparql) from a hop completion.

    The last occurrence of each label wins; a literal "None" value means
    absent; trailing regenerated demonstrations are ignored. A missing search
    query aborts the hop via :class:`MissingField`.
    """
    text = _truncate_trailing_demos(completion)
    query_found = _last_field(text, "Search Query")
    search_query = _none_means_absent(query_found[1]) if query_found else None
    if search_query is None:
        raise MissingField("search_query")
    entity_found = _last_field(text, "Query Entity")
    sparql_found = _last_field(text, "SPARQL")
    return ParsedFields(
        rationale=_rationale_of(text),
        search_query=search_query,
        query_entity=_none_means_absent(entity_found[1]) if entity_found else None,
        sparql_text=_none_means_absent(sparql_found[1]) if sparql_found else None,
    )


def parse_final_fields(completion: str) -> tuple[str, str]:
    """(rationale, answer) from a final-stage completion.

    Falls back to the whole completion as the answer when no "Answer:" label
    is present, so free-form models still grade.
    """
    text = _truncate_trailing_demos(completion)
    answer_found = _last_field(text, "Answer")
    if answer_found is None:
        return "", " ".join(text.split())
    return _rationale_of(text[: answer_found[0]]), answer_found[1]
