#!/usr/bin/env python3
"""Author the bundled fixture corpus, mini-benchmark, and scripted LLM responses.

Run from the repo root after changing fixture content:

    python tools/make_fixtures.py          # rewrite src/hetqa/data/*
    python tools/make_fixtures.py --check  # also re-run the pipeline and report hits

The golden report under tests/golden/ is produced by tools/make_goldens.py.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "src" / "hetqa" / "data"

# --------------------------------------------------------------------------
# knowledge subset
# --------------------------------------------------------------------------

RELATIONS = [
    ("P17", "country", ["state", "land"]),
    ("P19", "place of birth", ["birthplace", "born in", "birth place"]),
    ("P26", "spouse", ["wife", "husband", "married to"]),
    ("P57", "director", ["directed by", "film director"]),
    ("P69", "educated at", ["alma mater", "studied at"]),
    ("P106", "occupation", ["profession", "job"]),
    ("P166", "award received", ["awards", "award won", "honours"]),
    ("P463", "member of", ["membership", "member"]),
    ("P569", "date of birth", ["birthday", "born on"]),
    ("P800", "notable work", ["famous work", "major works"]),
    ("P1441", "present in work", ["appears in"]),
]

ENTITIES = [
    # (qid, label, description, aliases, wikipedia_title)
    ("Q30", "United States", "country in North America", ["USA", "United States of America"], "United States"),
    ("Q60", "New York City", "most populous city in the United States", ["NYC"], "New York City"),
    ("Q84", "London", "capital of England and the United Kingdom", [], "London"),
    ("Q145", "United Kingdom", "island country in north-western Europe", ["UK"], "United Kingdom"),
    ("Q155", "Brazil", "country in South America", [], "Brazil"),
    ("Q213", "Czech Republic", "country in Central Europe", ["Czechia"], "Czech Republic"),
    ("Q925", "Mercury", "chemical element with the symbol Hg and atomic number 80", ["quicksilver"], None),
    ("Q2887", "Guanabara Bay", "oceanic bay in Southeast Brazil", [], "Guanabara Bay"),
    ("Q8678", "Rio de Janeiro", "coastal city in Brazil, former national capital", ["Rio"], "Rio de Janeiro"),
    ("Q13371", "Harvard University", "private university in Cambridge, Massachusetts", ["Harvard"], "Harvard University"),
    ("Q17144", "Presidential Medal of Freedom", "highest civilian award of the United States", [], None),
    ("Q18419", "Brooklyn", "borough of New York City", [], "Brooklyn"),
    ("Q29468", "Republican Party", "political party in the United States", ["GOP"], "Republican Party"),
    ("Q33866", "Theodore Roosevelt", "26th president of the United States", ["Teddy Roosevelt", "T. Roosevelt"], "Theodore Roosevelt"),
    ("Q33999", "actor", "person who acts in a dramatic production", ["actress"], None),
    ("Q35637", "Nobel Peace Prize", "one of the five Nobel Prizes", [], None),
    ("Q36180", "writer", "person who uses written words to communicate ideas", [], None),
    ("Q36484", "Prague", "capital and largest city of the Czech Republic", [], "Prague"),
    ("Q42973", "architect", "person who designs buildings", [], None),
    ("Q44725", "Hamilton", "musical about Alexander Hamilton", [], None),
    ("Q47170", "Nobel Memorial Prize in Economic Sciences", "economics award administered by the Nobel Foundation", ["Nobel Prize in Economics"], None),
    ("Q49088", "Columbia University", "private university in New York City", ["Columbia"], "Columbia University"),
    ("Q54545", "Martina Navratilova", "Czech-American former professional tennis player", [], "Martina Navratilova"),
    ("Q81328", "Emily Blunt", "British actress", [], "Emily Blunt"),
    ("Q82955", "politician", "person involved in politics", [], None),
    ("Q152262", "William Weatherall Wilkins", "fictional bank president in Mary Poppins Returns", [], None),
    ("Q157246", "Paul Samuelson", "American economist", [], "Paul Samuelson"),
    ("Q172137", "Lin-Manuel Miranda", "American songwriter, actor, and director", [], "Lin-Manuel Miranda"),
    ("Q188094", "economist", "professional in the social science discipline of economics", [], None),
    ("Q188740", "Milton Friedman", "American economist of the Chicago school", [], "Milton Friedman"),
    ("Q219124", "Guillermo del Toro", "Mexican filmmaker, author, and artist", [], "Guillermo del Toro"),
    ("Q221384", "High School Musical", "2006 musical television film", [], "High School Musical"),
    ("Q239", "Brussels", "capital city of Belgium", [], "Brussels"),
    ("Q270794", "National Medal of Science", "science award by the President of the United States", [], None),
    ("Q308021", "Mercury", "smallest planet in the Solar System and the closest planet to the Sun", [], None),
    ("Q313039", "John Krasinski", "American actor and filmmaker", [], "John Krasinski"),
    ("Q316629", "Rod McKuen", "American poet, singer, and composer", [], None),
    ("Q365144", "Rob Marshall", "American film director and choreographer", [], None),
    ("Q438402", "Rose Friedman", "American economist and writer", [], None),
    ("Q463303", "American Historical Association", "society of historians and professors of history", ["AHA"], None),
    ("Q466089", "American Philosophical Society", "scholarly organization in Philadelphia", [], None),
    ("Q489531", "Academy Award for Best Sound Mixing", "former annual award for sound mixing in film", [], None),
    ("Q962183", "David Resnick", "Brazilian-born Israeli architect and urban planner", ["David Reznik"], "David Resnick"),
    ("Q1190807", "Explorers Club", "professional society for scientific exploration", [], None),
    ("Q1251578", "Douglas Shearer", "Canadian-American pioneer of sound design in film", [], None),
    ("Q1342", "Pittsburgh", "city in western Pennsylvania", [], "Pittsburgh"),
    ("Q1420038", "University of Chicago", "private university in Chicago, Illinois", ["UChicago"], "University of Chicago"),
    ("Q1509278", "Boone and Crockett Club", "wildlife conservation organization", [], None),
    ("Q1543268", "John Bates Clark Medal", "economics award for economists under forty", [], None),
    ("Q2014300", "Juliet", "character in Shakespeare's Romeo and Juliet", [], None),
    ("Q2351849", "Felicity Blunt", "English literary agent", [], None),
    ("Q2526255", "film director", "person who directs a film", [], None),
    ("Q3159087", "Jacques Boigelot", "Belgian film director", [], None),
    ("Q3373222", "Peace in the Fields", "1970 Belgian drama film", [], None),
    ("Q4955600", "Bradley Prize", "award of the Bradley Foundation", [], None),
    ("Q5593890", "Order of the Sacred Treasure", "Japanese order of merit", [], None),
    ("Q6625963", "novelist", "writer of novels", [], None),
    ("Q10833314", "tennis player", "person who plays tennis", [], None),
    ("Q16973741", "Irving Kristol Award", "award of the American Enterprise Institute", [], None),
    ("Q18814623", "autobiographer", "writer of an autobiography", [], None),
    ("Q24190126", "Writers Guild of America, West", "labor union of film, television, and new media writers", ["WGAW", "Writers Guild of America West"], None),
    ("Q26698156", "The Shape of Water", "2017 romantic fantasy film", [], "The Shape of Water"),
    ("Q27787557", "A Quiet Place", "2018 horror film", [], "A Quiet Place"),
    ("Q27869339", "Mary Poppins Returns", "2018 musical fantasy film", [], "Mary Poppins Returns"),
    ("Q28861731", "Adam Smith Award", "prize for lifetime contributions to economics", [], None),
    ("Q52382875", "Fellow of the Econometric Society", "elected fellowship of the Econometric Society", [], None),
    ("Q83186", "Romeo and Juliet", "tragedy by William Shakespeare", [], None),
    ("Q96733447", "Wincott Foundation Award", "prize for economic journalism and scholarship", [], None),
]

E = "entity"
L = "literal"

TRIPLES = [
    # Theodore Roosevelt: exactly five memberships, used by the counting fixtures
    ("Q33866", "P463", E, "Q29468"),
    ("Q33866", "P463", E, "Q1509278"),
    ("Q33866", "P463", E, "Q463303"),
    ("Q33866", "P463", E, "Q1190807"),
    ("Q33866", "P463", E, "Q466089"),
    ("Q33866", "P19", E, "Q60"),
    ("Q33866", "P69", E, "Q13371"),
    ("Q33866", "P106", E, "Q82955"),
    ("Q33866", "P106", E, "Q36180"),
    ("Q33866", "P166", E, "Q35637"),
    ("Q33866", "P569", L, "27 October 1858"),
    # Milton Friedman: exactly ten awards
    ("Q188740", "P166", E, "Q47170"),
    ("Q188740", "P166", E, "Q1543268"),
    ("Q188740", "P166", E, "Q17144"),
    ("Q188740", "P166", E, "Q270794"),
    ("Q188740", "P166", E, "Q4955600"),
    ("Q188740", "P166", E, "Q16973741"),
    ("Q188740", "P166", E, "Q52382875"),
    ("Q188740", "P166", E, "Q5593890"),
    ("Q188740", "P166", E, "Q28861731"),
    ("Q188740", "P166", E, "Q96733447"),
    ("Q188740", "P19", E, "Q18419"),
    ("Q188740", "P69", E, "Q49088"),
    ("Q188740", "P106", E, "Q188094"),
    ("Q188740", "P26", E, "Q438402"),
    ("Q188740", "P569", L, "31 July 1912"),
    # David Resnick: exactly one birthplace triple
    ("Q962183", "P19", E, "Q8678"),
    ("Q962183", "P106", E, "Q42973"),
    # Emily Blunt / Felicity Blunt / John Krasinski
    ("Q81328", "P3373", E, "Q2351849"),
    ("Q81328", "P26", E, "Q313039"),
    ("Q81328", "P19", E, "Q84"),
    ("Q81328", "P106", E, "Q33999"),
    ("Q81328", "P569", L, "23 February 1983"),
    ("Q2351849", "P3373", E, "Q81328"),
    ("Q313039", "P26", E, "Q81328"),
    ("Q313039", "P106", E, "Q33999"),
    ("Q313039", "P800", E, "Q27787557"),
    ("Q27787557", "P57", E, "Q313039"),
    # Guillermo del Toro and The Shape of Water
    ("Q219124", "P106", E, "Q2526255"),
    ("Q219124", "P463", E, "Q24190126"),
    ("Q219124", "P800", E, "Q26698156"),
    ("Q219124", "P569", L, "9 October 1964"),
    ("Q26698156", "P57", E, "Q219124"),
    # Mary Poppins Returns
    ("Q27869339", "P57", E, "Q365144"),
    ("Q152262", "P1441", E, "Q27869339"),
    ("Q172137", "P800", E, "Q27869339"),
    ("Q172137", "P800", E, "Q44725"),
    ("Q172137", "P800", E, "Q7603"),
    ("Q172137", "P19", E, "Q60"),
    # Martina Navratilova
    ("Q54545", "P106", E, "Q10833314"),
    ("Q54545", "P106", E, "Q36180"),
    ("Q54545", "P106", E, "Q6625963"),
    ("Q54545", "P106", E, "Q18814623"),
    ("Q54545", "P19", E, "Q36484"),
    ("Q54545", "P569", L, "18 October 1956"),
    # color from the construction-prompt demonstrations
    ("Q1251578", "P166", E, "Q489531"),
    ("Q3373222", "P57", E, "Q3159087"),
    ("Q2014300", "P1441", E, "Q83186"),
    # more economists
    ("Q157246", "P106", E, "Q188094"),
    ("Q157246", "P166", E, "Q47170"),
    ("Q157246", "P166", E, "Q1543268"),
    ("Q157246", "P569", L, "15 May 1915"),
    ("Q438402", "P106", E, "Q188094"),
    # biographical literals
    ("Q962183", "P569", L, "5 August 1924"),
    ("Q313039", "P569", L, "20 October 1979"),
    ("Q1251578", "P569", L, "17 November 1899"),
    ("Q172137", "P569", L, "16 January 1980"),
    # geography
    ("Q8678", "P17", E, "Q155"),
    ("Q2887", "P17", E, "Q155"),
    ("Q84", "P17", E, "Q145"),
    ("Q36484", "P17", E, "Q213"),
    ("Q60", "P17", E, "Q30"),
    ("Q18419", "P17", E, "Q30"),
    ("Q1342", "P17", E, "Q30"),
    ("Q239", "P17", E, "Q145"),
    ("Q13371", "P17", E, "Q30"),
    ("Q49088", "P17", E, "Q30"),
    ("Q1420038", "P17", E, "Q30"),
    # organizations
    ("Q29468", "P17", E, "Q30"),
    ("Q463303", "P17", E, "Q30"),
    ("Q466089", "P17", E, "Q30"),
    ("Q1190807", "P17", E, "Q30"),
    ("Q1509278", "P17", E, "Q30"),
    ("Q24190126", "P17", E, "Q30"),
    # bystander facts: retrieval noise at a more realistic density
    ("Q54545", "P463", E, "Q919406"),
    ("Q157246", "P69", E, "Q1420038"),
    ("Q157246", "P69", E, "Q13371"),
    ("Q438402", "P26", E, "Q188740"),
    ("Q438402", "P569", L, "2 December 1910"),
    ("Q316629", "P106", E, "Q49757"),
    ("Q316629", "P106", E, "Q177220"),
    ("Q316629", "P19", E, "Q17042"),
    ("Q316629", "P569", L, "29 April 1933"),
    ("Q4910986", "P106", E, "Q947873"),
    ("Q4910986", "P19", E, "Q1342"),
    ("Q4910986", "P569", L, "18 February 1920"),
    ("Q3159087", "P19", E, "Q239"),
    ("Q3159087", "P106", E, "Q2526255"),
    ("Q3159087", "P569", L, "16 June 1929"),
    ("Q1251578", "P19", E, "Q340"),
    ("Q1251578", "P106", E, "Q1289554"),
    ("Q221384", "P57", E, "Q439315"),
    ("Q439315", "P106", E, "Q2526255"),
    ("Q439315", "P569", L, "18 April 1950"),
    ("Q81328", "P800", E, "Q27787557"),
    ("Q219124", "P19", E, "Q9022"),
    ("Q17042", "P17", E, "Q30"),
    ("Q340", "P17", E, "Q16"),
    ("Q9022", "P17", E, "Q96"),
]

# present in TRIPLES but easy to forget in ENTITIES
EXTRA_ENTITIES = [
    ("Q7603", "In the Heights", "musical by Lin-Manuel Miranda", [], None),
    ("Q16", "Canada", "country in North America", [], "Canada"),
    ("Q96", "Mexico", "country in North America", [], "Mexico"),
    ("Q340", "Montreal", "largest city in Quebec, Canada", [], "Montreal"),
    ("Q9022", "Guadalajara", "city in Jalisco, Mexico", [], "Guadalajara"),
    ("Q17042", "Oakland", "city in California, United States", [], "Oakland"),
    ("Q49757", "poet", "person who writes poetry", [], None),
    ("Q177220", "singer", "person who sings", [], None),
    ("Q439315", "Kenny Ortega", "American filmmaker and choreographer", [], None),
    ("Q919406", "International Tennis Hall of Fame", "tennis museum and hall of fame", [], None),
    ("Q947873", "television presenter", "person who hosts television programmes", [], None),
    ("Q1289554", "audio engineer", "engineer for recorded or broadcast sound", [], None),
    ("Q4910986", "Bill Cullen", "American television game show host", [], None),
]

EXTRA_RELATIONS = [
    ("P3373", "sibling", ["brother", "sister"]),
]

# --------------------------------------------------------------------------
# wiki passage corpus (short on purpose: lexical ranking at desk scale)
# --------------------------------------------------------------------------

PASSAGES = [
    ("wiki:theodore-roosevelt", "Theodore Roosevelt",
     "Theodore Roosevelt was an American politician who served as the 26th president of the United States from 1901 to 1909."),
    ("wiki:milton-friedman", "Milton Friedman",
     "Milton Friedman was the American economist who advocated monetarism."),
    ("wiki:mary-poppins-returns", "Mary Poppins Returns",
     "Emily Blunt plays Mary Poppins in the 2018 film Mary Poppins Returns."),
    ("wiki:rio-de-janeiro", "Rio de Janeiro",
     "Rio de Janeiro is the Brazilian city on Guanabara Bay, whose name means January River."),
    ("wiki:the-shape-of-water", "The Shape of Water",
     "The Shape of Water is a 2017 fantasy film directed by Guillermo del Toro."),
    ("wiki:john-krasinski", "John Krasinski",
     "John Krasinski was born in Newton, Massachusetts."),
    ("wiki:david-resnick", "David Resnick",
     "David Resnick was an Israeli architect who settled in Jerusalem and designed modernist landmarks."),
    ("wiki:emily-blunt", "Emily Blunt",
     "Emily Blunt is a British actress who married John Krasinski in 2010."),
    ("wiki:martina-navratilova", "Martina Navratilova",
     "Martina Navratilova holds the record of nine women's singles Wimbledon titles."),
    ("wiki:guillermo-del-toro", "Guillermo del Toro",
     "Guillermo del Toro is a Mexican filmmaker celebrated for dark fantasy cinema."),
    ("wiki:writers-guild", "Writers Guild of America, West",
     "The Writers Guild of America, West is a labor union representing film, television, and new media writers."),
    ("wiki:guanabara-bay", "Guanabara Bay",
     "Guanabara Bay is an oceanic bay in Southeast Brazil."),
    ("wiki:high-school-musical", "High School Musical",
     "In High School Musical, Troy and Gabriella are juniors at East High School."),
    ("wiki:harvard", "Harvard University",
     "Harvard University is a private Ivy League research university in Cambridge, Massachusetts."),
    ("wiki:republican-party", "Republican Party",
     "The Republican Party, also known as the GOP, is one of the two major political parties in the United States."),
    ("wiki:nobel-economics", "Nobel Memorial Prize in Economic Sciences",
     "The Nobel Memorial Prize in Economic Sciences is administered by the Nobel Foundation."),
    ("wiki:lin-manuel-miranda", "Lin-Manuel Miranda",
     "Lin-Manuel Miranda created the Broadway musicals Hamilton and In the Heights."),
    ("wiki:brooklyn", "Brooklyn",
     "Brooklyn is the most populous borough of New York City."),
    ("wiki:chicago-school", "Chicago school of economics",
     "The Chicago school is a neoclassical school of economic thought at the University of Chicago."),
    ("wiki:prague", "Prague",
     "Prague is the capital and largest city of the Czech Republic."),
]

# page text used by the construction pipeline's retention filter
WIKI_PAGES = {title: body for _, title, body in PASSAGES}

# --------------------------------------------------------------------------
# anchor tuples for the construction-pipeline demo
# --------------------------------------------------------------------------

ANCHORS = [
    {"question": "Who plays Mary Poppins in Mary Poppins Returns?", "answer": "Emily Blunt",
     "title": "Mary Poppins Returns", "passage": WIKI_PAGES["Mary Poppins Returns"]},
    {"question": "Who is the 26th president of the United States?", "answer": "Theodore Roosevelt",
     "title": "Theodore Roosevelt", "passage": WIKI_PAGES["Theodore Roosevelt"]},
    {"question": "Which economist advocated monetarism?", "answer": "Milton Friedman",
     "title": "Milton Friedman", "passage": WIKI_PAGES["Milton Friedman"]},
    {"question": "Who directed the film The Shape of Water?", "answer": "Guillermo del Toro",
     "title": "The Shape of Water", "passage": WIKI_PAGES["The Shape of Water"]},
    {"question": "What grade were they in High School Musical 1?", "answer": "juniors",
     "title": "High School Musical", "passage": WIKI_PAGES["High School Musical"]},
]

# --------------------------------------------------------------------------
# mini benchmark and the scripted responses that answer it
# --------------------------------------------------------------------------


def triple(subject, predicate, obj, is_entity=True):
    return {"subject": subject, "predicate": predicate, "object": obj, "object_is_entity": is_entity}


def hop(sub_question, sub_answer, source, passage=None, gold_triple=None, gold_sparql=None):
    out = {"sub_question": sub_question, "sub_answer": sub_answer, "source": source}
    if passage:
        out["gold_passage_id"] = passage
    if gold_triple:
        out["gold_triple"] = gold_triple
    if gold_sparql:
        out["gold_sparql"] = gold_sparql
    return out


BENCHMARK = [
    {
        "id": "mb-01",
        "question": "How many organizations is the 26th president of the United States a member of?",
        "answers": ["5", "five"],
        "qtype": "aggregate_text_kb",
        "hops": [
            hop("Who is the 26th president of the United States?", "Theodore Roosevelt", "text",
                passage="wiki:theodore-roosevelt"),
            hop("How many organizations is Theodore Roosevelt a member of?", "5", "kb",
                gold_triple=triple("Q33866", "P463", "Q29468"),
                gold_sparql="SELECT (COUNT(?organization) AS ?count) WHERE { wd:Q33866 wdt:P463 ?organization . }"),
        ],
    },
    {
        "id": "mb-02",
        "question": "How many award received objects does the economist who advocated monetarism have?",
        "answers": ["10", "ten"],
        "qtype": "aggregate_text_kb",
        "hops": [
            hop("Which economist advocated monetarism?", "Milton Friedman", "text",
                passage="wiki:milton-friedman"),
            hop("How many award received objects does Milton Friedman have?", "10", "kb",
                gold_triple=triple("Q188740", "P166", "Q16973741"),
                gold_sparql="SELECT (COUNT(?award) AS ?count) WHERE { wd:Q188740 wdt:P166 ?award . }"),
        ],
    },
    {
        "id": "mb-03",
        "question": "Who is the sibling of the actress who plays Mary Poppins in Mary Poppins Returns?",
        "answers": ["Felicity Blunt"],
        "qtype": "short_entity_text_kb",
        "hops": [
            hop("Who plays Mary Poppins in Mary Poppins Returns?", "Emily Blunt", "text",
                passage="wiki:mary-poppins-returns"),
            hop("Who is the sibling of Emily Blunt?", "Felicity Blunt", "kb",
                gold_triple=triple("Q81328", "P3373", "Q2351849"),
                gold_sparql="SELECT ?sibling WHERE { wd:Q81328 wdt:P3373 ?sibling . }"),
        ],
    },
    {
        "id": "mb-04",
        "question": "What bay is the name of David Resnick's place of birth?",
        "answers": ["Guanabara Bay"],
        "qtype": "short_entity_kb_text",
        "hops": [
            hop("Where was David Resnick born?", "Rio de Janeiro", "kb",
                gold_triple=triple("Q962183", "P19", "Q8678"),
                gold_sparql="SELECT ?place WHERE { wd:Q962183 wdt:P19 ?place . }"),
            hop("Which bay is the name of Rio de Janeiro?", "Guanabara Bay", "text",
                passage="wiki:rio-de-janeiro"),
        ],
    },
    {
        "id": "mb-05",
        "question": "Where was the spouse of Emily Blunt born?",
        "answers": ["Newton, Massachusetts", "Newton"],
        "qtype": "short_entity_kb_text",
        "hops": [
            hop("Who is the spouse of Emily Blunt?", "John Krasinski", "kb",
                gold_triple=triple("Q81328", "P26", "Q313039"),
                gold_sparql="SELECT ?spouse WHERE { wd:Q81328 wdt:P26 ?spouse . }"),
            hop("Where was John Krasinski born?", "Newton, Massachusetts", "text",
                passage="wiki:john-krasinski"),
        ],
    },
    {
        "id": "mb-06",
        "question": "Is the director of the film The Shape of Water a member of the Writers Guild of America, West?",
        "answers": ["yes"],
        "qtype": "yesno_text_kb",
        "hops": [
            hop("Who directed the film The Shape of Water?", "Guillermo del Toro", "text",
                passage="wiki:the-shape-of-water"),
            hop("Which organization is Guillermo del Toro a member of?", "Writers Guild of America, West", "kb",
                gold_triple=triple("Q219124", "P463", "Q24190126"),
                gold_sparql="SELECT ?organization WHERE { wd:Q219124 wdt:P463 ?organization . }"),
        ],
    },
    {
        "id": "mb-07",
        "question": "Is the sibling of the actress who plays Mary Poppins in Mary Poppins Returns named Susan Blunt?",
        "answers": ["no"],
        "qtype": "yesno_text_kb",
        "hops": [
            hop("Who plays Mary Poppins in Mary Poppins Returns?", "Emily Blunt", "text",
                passage="wiki:mary-poppins-returns"),
            hop("Who is the sibling of Emily Blunt?", "Felicity Blunt", "kb",
                gold_triple=triple("Q81328", "P3373", "Q2351849"),
                gold_sparql="SELECT ?sibling WHERE { wd:Q81328 wdt:P3373 ?sibling . }"),
        ],
    },
    {
        "id": "mb-08",
        "question": "Was the spouse of Emily Blunt born in Newton, Massachusetts?",
        "answers": ["yes"],
        "qtype": "yesno_kb_text",
        "hops": [
            hop("Who is the spouse of Emily Blunt?", "John Krasinski", "kb",
                gold_triple=triple("Q81328", "P26", "Q313039"),
                gold_sparql="SELECT ?spouse WHERE { wd:Q81328 wdt:P26 ?spouse . }"),
            hop("Where was John Krasinski born?", "Newton, Massachusetts", "text",
                passage="wiki:john-krasinski"),
        ],
    },
    {
        "id": "mb-09",
        "question": "Was David Resnick's place of birth named after Botafogo Bay?",
        "answers": ["no"],
        "qtype": "yesno_kb_text",
        "hops": [
            hop("Where was David Resnick born?", "Rio de Janeiro", "kb",
                gold_triple=triple("Q962183", "P19", "Q8678"),
                gold_sparql="SELECT ?place WHERE { wd:Q962183 wdt:P19 ?place . }"),
            hop("Which bay is the name of Rio de Janeiro?", "Guanabara Bay", "text",
                passage="wiki:rio-de-janeiro"),
        ],
    },
    {
        "id": "mb-10",
        "question": "Who is the spouse of the actress who plays Mary Poppins in Mary Poppins Returns?",
        "answers": ["John Krasinski"],
        "qtype": "short_entity_text_kb",
        "hops": [
            hop("Who plays Mary Poppins in Mary Poppins Returns?", "Emily Blunt", "text",
                passage="wiki:mary-poppins-returns"),
            hop("Who is the spouse of Emily Blunt?", "John Krasinski", "kb",
                gold_triple=triple("Q81328", "P26", "Q313039"),
                gold_sparql="SELECT ?spouse WHERE { wd:Q81328 wdt:P26 ?spouse . }"),
        ],
    },
]


def hop_completion(rationale, query, entity="None", sparql="None"):
    return (
        f" {rationale}\n"
        f"Search Query: {query}\n"
        f"Query Entity: {entity}\n"
        f"SPARQL: {sparql}"
    )


def final_completion(rationale, answer):
    return f" {rationale}\nAnswer: {answer}"


# hop-1 variants, hop-2 variants, final answer; one scripted entry per stage
SCRIPT = [
    # mb-01
    ("How many organizations is the 26th president of the United States a member of?", [
        [
            hop_completion("Decompose the question to answer the following single-hop questions. 1. Who is the 26th president of the United States? 2. How many organizations is this person a member of?",
                           "Who is the 26th president of the United States?"),
            hop_completion("We first need to identify the 26th president of the United States.",
                           "26th president of the United States"),
            hop_completion("The first step is finding which person served as the 26th president.",
                           "Which person was the 26th president of the United States?"),
        ],
        [
            hop_completion("The 26th president of the United States is Theodore Roosevelt. The second step is to answer how many organizations he is a member of.",
                           "How many organizations is Theodore Roosevelt a member of?",
                           "Theodore Roosevelt",
                           "SELECT (COUNT(?organization) as ?count) WHERE { wd:Q33866 wdt:P463 ?organization. }"),
            hop_completion("Theodore Roosevelt was the 26th president, so we count his memberships.",
                           "Theodore Roosevelt member of organizations",
                           "Theodore Roosevelt",
                           "SELECT (COUNT(?organization) as ?count) WHERE { wd:Q33866 wdt:P463 ?organization. }"),
            hop_completion("Based on the context, Theodore Roosevelt is the person in question.",
                           "What organizations does Theodore Roosevelt belong to?",
                           "Theodore Roosevelt",
                           "SELECT (COUNT(?organization) as ?count) WHERE { wd:Q33866 wdt:P463 ?organization. }"),
        ],
        [final_completion("The 26th president of the United States was Theodore Roosevelt. He is a member of 5 organizations.", "5")],
    ]),
    # mb-02
    ("How many award received objects does the economist who advocated monetarism have?", [
        [
            hop_completion("Decompose the question. 1. Which economist advocated monetarism? 2. How many awards does this economist have?",
                           "Which economist advocated monetarism?"),
            hop_completion("We first identify the economist behind monetarism.",
                           "economist who advocated monetarism"),
            hop_completion("Find the economist associated with monetarism.",
                           "Who was the economist advocating monetarism?"),
        ],
        [
            hop_completion("The economist who advocated monetarism is Milton Friedman. Now count the awards he received.",
                           "How many award received objects does Milton Friedman have?",
                           "Milton Friedman",
                           "SELECT (COUNT(?award) as ?count) WHERE { wd:Q188740 wdt:P166 ?award. }"),
            hop_completion("Milton Friedman is the monetarist economist; count his awards.",
                           "Milton Friedman award received count",
                           "Milton Friedman",
                           "SELECT (COUNT(?award) as ?count) WHERE { wd:Q188740 wdt:P166 ?award. }"),
            hop_completion("The context names Milton Friedman.",
                           "awards received by Milton Friedman",
                           "Milton Friedman",
                           "SELECT (COUNT(?award) as ?count) WHERE { wd:Q188740 wdt:P166 ?award. }"),
        ],
        [final_completion("Milton Friedman advocated monetarism, and he received 10 awards.", "10")],
    ]),
    # mb-03
    ("Who is the sibling of the actress who plays Mary Poppins in Mary Poppins Returns?", [
        [
            hop_completion("Decompose the question. 1. Who plays Mary Poppins in Mary Poppins Returns? 2. Who is the sibling of this actress?",
                           "Who plays Mary Poppins in Mary Poppins Returns?"),
            hop_completion("First find the actress playing Mary Poppins in the 2018 film.",
                           "actress who plays Mary Poppins in Mary Poppins Returns"),
            hop_completion("Identify the Mary Poppins actress in Mary Poppins Returns.",
                           "Mary Poppins Returns lead actress"),
        ],
        [
            hop_completion("Emily Blunt plays Mary Poppins in Mary Poppins Returns. The second step is to find her sibling.",
                           "Who is the sibling of Emily Blunt?",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
            hop_completion("The actress is Emily Blunt; now find the sibling.",
                           "Emily Blunt sibling",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
            hop_completion("Emily Blunt is the actress; search for her sibling.",
                           "Who is Emily Blunt's sibling?",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
        ],
        [final_completion("Emily Blunt plays Mary Poppins, and her sibling is Felicity Blunt.", "Felicity Blunt")],
    ]),
    # mb-04 (hop 1 carries a wrong memorized id on purpose; the linker repairs it)
    ("What bay is the name of David Resnick's place of birth?", [
        [
            hop_completion("Decompose the question. 1. Where was David Resnick born? 2. Which bay is the name of this place",
                           "David Resnick place of birth",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q42 wdt:P19 ?place.}"),
            hop_completion("First find David Resnick's birthplace.",
                           "Where was David Resnick born?",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}"),
            hop_completion("We need the city where David Resnick was born.",
                           "David Resnick born city",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}"),
        ],
        [
            hop_completion("David Resnick was born in Rio de Janeiro. The second step is to answer which bay is the name of Rio de Janeiro?",
                           "Which bay is the name of Rio de Janeiro?",
                           "Rio de Janeiro"),
            hop_completion("The birthplace is Rio de Janeiro; find the bay sharing its name.",
                           "Rio de Janeiro bay name"),
            hop_completion("Now we look for the bay called Rio de Janeiro.",
                           "bay named Rio de Janeiro"),
        ],
        [final_completion("David Resnick was born in Rio de Janeiro, and Rio de Janeiro was the name of Guanabara Bay.", "Guanabara Bay")],
    ]),
    # mb-05
    ("Where was the spouse of Emily Blunt born?", [
        [
            hop_completion("Decompose the question. 1. Who is the spouse of Emily Blunt? 2. Where was this person born?",
                           "Who is the spouse of Emily Blunt?",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("First identify Emily Blunt's spouse.",
                           "Emily Blunt spouse",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("We need the spouse of Emily Blunt.",
                           "Who is Emily Blunt married to?",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
        ],
        [
            hop_completion("The spouse of Emily Blunt is John Krasinski. The second step is to find where he was born.",
                           "Where was John Krasinski born?",
                           "John Krasinski"),
            hop_completion("John Krasinski is the spouse; find his birthplace.",
                           "John Krasinski birthplace"),
            hop_completion("Now search for John Krasinski's place of birth.",
                           "John Krasinski born"),
        ],
        [final_completion("Emily Blunt's spouse is John Krasinski, who was born in Newton, Massachusetts.", "Newton, Massachusetts")],
    ]),
    # mb-06
    ("Is the director of the film The Shape of Water a member of the Writers Guild of America, West?", [
        [
            hop_completion("Decompose the question. 1. Who directed the film the shape of water? 2. Is the person a member of the Writers Guild of America, West?",
                           "Who directed the film The Shape of Water?"),
            hop_completion("First find the director of The Shape of Water.",
                           "The director of the film The Shape of Water"),
            hop_completion("Identify who directed The Shape of Water.",
                           "The Shape of Water director"),
        ],
        [
            hop_completion("The Shape of Water is directed by Guillermo del Toro. The second step is to answer is the person a member of the Writers Guild of America, West",
                           "Which organization is Guillermo del Toro a member of?",
                           "Guillermo del Toro",
                           "SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}"),
            hop_completion("Guillermo del Toro directed the film; check his memberships.",
                           "the organization Guillermo del Toro is in",
                           "Guillermo del Toro",
                           "SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}"),
            hop_completion("Now verify Guillermo del Toro's guild membership.",
                           "Guillermo del Toro member of Writers Guild",
                           "Guillermo del Toro",
                           "SELECT ?name WHERE {wd:Q219124 wdt:P463 ?name.}"),
        ],
        [final_completion("Guillermo del Toro directed The Shape of Water, and he is a member of the Writers Guild of America, West.", "yes")],
    ]),
    # mb-07
    ("Is the sibling of the actress who plays Mary Poppins in Mary Poppins Returns named Susan Blunt?", [
        [
            hop_completion("Decompose the question. 1. Who plays Mary Poppins in Mary Poppins Returns? 2. Is this actress's sibling named Susan Blunt?",
                           "Who plays Mary Poppins in Mary Poppins Returns?"),
            hop_completion("First find the Mary Poppins Returns lead actress.",
                           "actress playing Mary Poppins in Mary Poppins Returns"),
            hop_completion("Identify the actress of Mary Poppins in the 2018 film.",
                           "Mary Poppins Returns actress Mary Poppins"),
        ],
        [
            hop_completion("Emily Blunt plays Mary Poppins. The second step is to check the name of her sibling.",
                           "Who is the sibling of Emily Blunt?",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
            hop_completion("The actress is Emily Blunt; look up her sibling.",
                           "Emily Blunt sibling name",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
            hop_completion("Check whether Emily Blunt's sibling is Susan Blunt.",
                           "Emily Blunt sibling",
                           "Emily Blunt",
                           "SELECT ?sibling WHERE {wd:Q81328 wdt:P3373 ?sibling.}"),
        ],
        [final_completion("Emily Blunt's sibling is Felicity Blunt, not Susan Blunt.", "no")],
    ]),
    # mb-08
    ("Was the spouse of Emily Blunt born in Newton, Massachusetts?", [
        [
            hop_completion("Decompose the question. 1. Who is the spouse of Emily Blunt? 2. Was this person born in Newton, Massachusetts?",
                           "Who is the spouse of Emily Blunt?",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("First identify the spouse of Emily Blunt.",
                           "Emily Blunt spouse name",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("Find who Emily Blunt is married to.",
                           "Emily Blunt married",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
        ],
        [
            hop_completion("The spouse is John Krasinski. The second step is to verify his birthplace.",
                           "Where was John Krasinski born?",
                           "John Krasinski"),
            hop_completion("John Krasinski is the spouse; verify Newton, Massachusetts.",
                           "John Krasinski birthplace Newton"),
            hop_completion("Check John Krasinski's place of birth.",
                           "John Krasinski born where"),
        ],
        [final_completion("John Krasinski, the spouse of Emily Blunt, was born in Newton, Massachusetts.", "yes")],
    ]),
    # mb-09
    ("Was David Resnick's place of birth named after Botafogo Bay?", [
        [
            hop_completion("Decompose the question. 1. Where was David Resnick born? 2. Was this place named after Botafogo Bay?",
                           "David Resnick place of birth",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}"),
            hop_completion("First find David Resnick's place of birth.",
                           "David Resnick birthplace",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}"),
            hop_completion("We need the birth city of David Resnick.",
                           "birth city of David Resnick",
                           "David Resnick",
                           "SELECT ?place WHERE {wd:Q962183 wdt:P19 ?place.}"),
        ],
        [
            hop_completion("David Resnick was born in Rio de Janeiro. The second step is to check which bay the city is named after.",
                           "Which bay is the name of Rio de Janeiro?",
                           "Rio de Janeiro"),
            hop_completion("Verify whether Rio de Janeiro is named after Botafogo Bay.",
                           "Rio de Janeiro named after bay"),
            hop_completion("Check the bay associated with Rio de Janeiro's name.",
                           "Rio de Janeiro bay"),
        ],
        [final_completion("Rio de Janeiro's name belongs to Guanabara Bay, not Botafogo Bay.", "no")],
    ]),
    # mb-10
    ("Who is the spouse of the actress who plays Mary Poppins in Mary Poppins Returns?", [
        [
            hop_completion("Decompose the question. 1. Who plays Mary Poppins in Mary Poppins Returns? 2. Who is the spouse of this actress?",
                           "Who plays Mary Poppins in Mary Poppins Returns?"),
            hop_completion("First find who plays Mary Poppins in the 2018 film.",
                           "Mary Poppins Returns Mary Poppins actress"),
            hop_completion("Identify the lead actress of Mary Poppins Returns.",
                           "who plays Mary Poppins in Mary Poppins Returns film"),
        ],
        [
            hop_completion("Emily Blunt plays Mary Poppins. The second step is to find her spouse.",
                           "Who is the spouse of Emily Blunt?",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("The actress is Emily Blunt; find her spouse.",
                           "Emily Blunt spouse",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
            hop_completion("Search for the person married to Emily Blunt.",
                           "Emily Blunt husband",
                           "Emily Blunt",
                           "SELECT ?spouse WHERE {wd:Q81328 wdt:P26 ?spouse.}"),
        ],
        [final_completion("Emily Blunt plays Mary Poppins, and her spouse is John Krasinski.", "John Krasinski")],
    ]),
]


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--check", action="store_true", help="re-run the pipeline and report hits")
    args = parser.parse_args()

    DATA.mkdir(parents=True, exist_ok=True)

    entities = ENTITIES + EXTRA_ENTITIES
    entity_rows = []
    for qid, label, description, aliases, page in sorted(entities, key=lambda e: int(e[0][1:])):
        row = {"qid": qid, "label": label, "description": description, "aliases": aliases}
        if page:
            row["wikipedia_title"] = page
        entity_rows.append(row)
    write_jsonl(DATA / "fixture_entities.jsonl", entity_rows)

    relations = RELATIONS + EXTRA_RELATIONS
    relation_rows = [
        {"pid": pid, "label": label, "aliases": aliases}
        for pid, label, aliases in sorted(relations, key=lambda r: int(r[0][1:]))
    ]
    write_jsonl(DATA / "fixture_relations.jsonl", relation_rows)

    triple_rows = []
    for subject, predicate, kind, obj in TRIPLES:
        obj_spec = {"qid": obj} if kind == E else {"literal": obj}
        triple_rows.append({"subject": subject, "predicate": predicate, "object": obj_spec})
    write_jsonl(DATA / "fixture_triples.jsonl", triple_rows)

    manifest = {
        "entities": len(entity_rows),
        "relations": len(relation_rows),
        "triples": len(triple_rows),
    }
    (DATA / "fixture_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    write_jsonl(DATA / "fixture_passages.jsonl", [{"id": i, "title": t, "text": b} for i, t, b in PASSAGES])
    (DATA / "fixture_wiki_pages.json").write_text(
        json.dumps(WIKI_PAGES, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    write_jsonl(DATA / "nq_anchors.jsonl", ANCHORS)
    write_jsonl(DATA / "mini_benchmark.jsonl", BENCHMARK)

    # a matcher must never occur inside the few-shot demonstration blocks,
    # or concurrent questions would steal each other's scripted entries
    from hetqa import prompts

    demo_text = "\n".join(
        [prompts.FIRST_HOP_DEMOS, prompts.LATER_HOP_DEMOS, prompts.FINAL_DEMOS]
    )
    script_rows = []
    for question, stages in SCRIPT:
        matcher = f"Question: {question}"
        if matcher in demo_text:
            raise SystemExit(f"matcher collides with prompt demonstrations: {question!r}")
        for responses in stages:
            script_rows.append({"matcher": matcher, "responses": responses})
    write_jsonl(DATA / "llm_script.jsonl", script_rows)

    print(f"wrote fixtures: {manifest}")

    if args.check:
        check()


def check():
    from hetqa.evaluation import evaluate_run, load_benchmark
    from hetqa.kb import ingest
    from hetqa.llm import ScriptedProvider
    from hetqa.pipeline import RunConfig, Toolset, answer
    from hetqa.providers import HashEmbedder
    from hetqa.textindex import load_passages

    store = ingest(
        DATA / "fixture_entities.jsonl",
        DATA / "fixture_relations.jsonl",
        DATA / "fixture_triples.jsonl",
    )
    wiki = load_passages(DATA / "fixture_passages.jsonl")
    records = load_benchmark(DATA / "mini_benchmark.jsonl")
    config = RunConfig()
    toolset = Toolset(store, wiki, ScriptedProvider.load(DATA / "llm_script.jsonl"), config,
                      embedder=HashEmbedder())
    traces = {}
    for record in records:
        answer_text, trace = answer(record.question, config, toolset)
        traces[record.id] = trace
        print(f"{record.id}: answer={answer_text!r} llm_calls={trace.llm_call_count}")
    report = evaluate_run(records, traces, store=store)
    print(report.to_table_text())


if __name__ == "__main__":
    main()
