#!/usr/bin/env python3
# Copyright 2026 The sparqlrl Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Generates the micro-corpus in data/micro.

Writes store.nt (DBLP-shaped synthetic triples), train/valid/test.jsonl
(questions with gold queries, no materialized answers) and prior.txt
(generic question/skeleton pairs in pointer form used to pretrain the
toy policy).
Output is deterministic.
"""

import argparse
import json
import random
from pathlib import Path

SCHEMA = "https://dblp.org/rdf/schema#"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

RELATIONS = {
    "authoredBy": {
        "uri": SCHEMA + "authoredBy",
        "label": "authored by",
        "domain": SCHEMA + "Publication",
        "range": SCHEMA + "Creator",
        "comment": "A creator of the publication.",
    },
    "yearOfPublication": {
        "uri": SCHEMA + "yearOfPublication",
        "label": "year of publication",
        "domain": SCHEMA + "Publication",
        "range": "http://www.w3.org/2001/XMLSchema#gYear",
        "comment": "The calendar year in which the publication was published.",
    },
    "publishedInStream": {
        "uri": SCHEMA + "publishedInStream",
        "label": "published in stream",
        "domain": SCHEMA + "Publication",
        "range": SCHEMA + "Stream",
        "comment": "The venue stream (conference or journal) of the publication.",
    },
    "primaryAffiliation": {
        "uri": SCHEMA + "primaryAffiliation",
        "label": "primary affiliation",
        "domain": SCHEMA + "Person",
        "range": SCHEMA + "Organization",
        "comment": "The primary organization the person is affiliated with.",
    },
}

PERSON_NAMES = [
    "Ada Lovelace", "Alan Turing", "Grace Hopper", "Edsger Dijkstra", "Barbara Liskov",
    "Donald Knuth", "Frances Allen", "John McCarthy", "Leslie Lamport", "Radia Perlman",
    "Tony Hoare", "Shafi Goldwasser",
]
VENUES = [("iswc", "ISWC"), ("esws", "ESWC"), ("www", "WWW"), ("kcap", "K-CAP"), ("semweb", "SEMANTiCS")]
ORGS = [("kit", "Karlsruhe Institute"), ("tib", "Leibniz Library"), ("mit", "Cambridge Lab"),
        ("eth", "Zurich Polytechnic")]
TITLE_A = ["Scalable", "Neural", "Federated", "Incremental", "Robust", "Temporal", "Sparse",
           "Explainable", "Lightweight", "Adaptive"]
TITLE_B = ["Entity Linking", "Query Answering", "Graph Embeddings", "Schema Matching",
           "Link Prediction", "Ontology Alignment", "Triple Stores", "Knowledge Graph Completion"]


class Graph:
    def __init__(self, rng):
        self.persons = []  # (uri, label)
        for i, name in enumerate(PERSON_NAMES):
            self.persons.append((f"https://dblp.org/pid/{10 + i}/{1000 + 37 * i}", name))
        self.venues = [(f"https://dblp.org/streams/conf/{key}", label) for key, label in VENUES]
        self.orgs = [(f"https://dblp.org/org/{key}", label) for key, label in ORGS]
        self.affiliation = {p[0]: rng.choice(self.orgs)[0] for p in self.persons}
        titles = [f"{a} {b}" for a in TITLE_A for b in TITLE_B]
        rng.shuffle(titles)
        self.papers = []  # dicts
        for i in range(40):
            first = self.persons[i % len(self.persons)][0]
            authors = [first]
            for _ in range(rng.choice([0, 1, 1, 2])):
                other = rng.choice(self.persons)[0]
                if other not in authors:
                    authors.append(other)
            venue_key, _ = VENUES[rng.randrange(len(VENUES))]
            self.papers.append({
                "uri": f"https://dblp.org/rec/conf/{venue_key}/P{i:02d}",
                "label": titles[i],
                "authors": authors,
                "year": str(rng.randint(2015, 2023)),
                "venue": f"https://dblp.org/streams/conf/{venue_key}",
            })
        self.labels = {uri: label for uri, label in self.persons + self.venues + self.orgs}
        for p in self.papers:
            self.labels[p["uri"]] = p["label"]

    def triples(self):
        out = []
        for p in self.papers:
            for a in p["authors"]:
                out.append((p["uri"], RELATIONS["authoredBy"]["uri"], a))
            out.append((p["uri"], RELATIONS["yearOfPublication"]["uri"], f'"{p["year"]}"'))
            out.append((p["uri"], RELATIONS["publishedInStream"]["uri"], p["venue"]))
        for uri, _ in self.persons:
            out.append((uri, RELATIONS["primaryAffiliation"]["uri"], self.affiliation[uri]))
        for uri, label in self.labels.items():
            out.append((uri, RDFS_LABEL, json.dumps(label)))
        return out

    def papers_of(self, person):
        return {p["uri"] for p in self.papers if person in p["authors"]}

    def paper(self, uri):
        return next(p for p in self.papers if p["uri"] == uri)


def iri(uri):
    return f"<{uri}>"


def select(body, head="?x"):
    return f"SELECT DISTINCT {head} WHERE {{ {body} }}"


def ent(g, uri):
    return {"uri": uri, "label": g.labels[uri]}


# Each template: (template_id, query_type, temporal, phrasings, builder).
# A builder draws an instance or returns None when the draw violates the
# template's constraints (empty answers, degenerate distractors).

def t_sf_subj(g, rng):
    a, name = rng.choice(g.persons)
    body = f"?x {iri(RELATIONS['authoredBy']['uri'])} {iri(a)}"
    return {"slots": {"A": name}, "entities": [ent(g, a)], "relations": ["authoredBy"],
            "query": select(body), "answer": g.papers_of(a)}


def sf_obj(relation, value):
    def build(g, rng):
        p = rng.choice(g.papers)
        body = f"{iri(p['uri'])} {iri(RELATIONS[relation]['uri'])} ?x"
        return {"slots": {"P": p["label"]}, "entities": [ent(g, p["uri"])], "relations": [relation],
                "query": select(body), "answer": value(p)}
    return build


def t_sf_affil(g, rng):
    a, name = rng.choice(g.persons)
    body = f"{iri(a)} {iri(RELATIONS['primaryAffiliation']['uri'])} ?x"
    return {"slots": {"A": name}, "entities": [ent(g, a)], "relations": ["primaryAffiliation"],
            "query": select(body), "answer": {g.affiliation[a]}}


def two_persons(g, rng):
    (a, na), (b, nb) = rng.sample(g.persons, 2)
    return a, na, b, nb


def t_mf_coauth(g, rng):
    a, na, b, nb = two_persons(g, rng)
    ans = g.papers_of(a) & g.papers_of(b)
    if not ans:
        return None
    r = iri(RELATIONS["authoredBy"]["uri"])
    return {"slots": {"A": na, "B": nb}, "entities": [ent(g, a), ent(g, b)],
            "relations": ["authoredBy"],
            "query": select(f"?x {r} {iri(a)} . ?x {r} {iri(b)}"), "answer": ans}


def t_mf_venue(g, rng):
    a, na = rng.choice(g.persons)
    v, nv = rng.choice(g.venues)
    ans = {p for p in g.papers_of(a) if g.paper(p)["venue"] == v}
    if not ans or ans == g.papers_of(a):
        return None
    ra, rv = iri(RELATIONS["authoredBy"]["uri"]), iri(RELATIONS["publishedInStream"]["uri"])
    return {"slots": {"A": na, "V": nv}, "entities": [ent(g, a), ent(g, v)],
            "relations": ["authoredBy", "publishedInStream"],
            "query": select(f"?x {ra} {iri(a)} . ?x {rv} {iri(v)}"), "answer": ans}


def t_temp_in(g, rng):
    a, na = rng.choice(g.persons)
    mine = sorted(g.papers_of(a))
    year = g.paper(rng.choice(mine))["year"]
    ans = {p for p in mine if g.paper(p)["year"] == year}
    if ans == set(mine):
        return None
    ra, ry = iri(RELATIONS["authoredBy"]["uri"]), iri(RELATIONS["yearOfPublication"]["uri"])
    return {"slots": {"A": na, "Y": year}, "entities": [ent(g, a)],
            "relations": ["authoredBy", "yearOfPublication"],
            "query": select(f"?x {ra} {iri(a)} . ?x {ry} '{year}'"), "answer": ans}


def t_bool_auth(g, rng):
    p = rng.choice(g.papers)
    a, na = rng.choice(g.persons)
    if rng.random() < 0.5:
        a = rng.choice(p["authors"])
        na = g.labels[a]
    r = iri(RELATIONS["authoredBy"]["uri"])
    return {"slots": {"A": na, "P": p["label"]}, "entities": [ent(g, p["uri"]), ent(g, a)],
            "relations": ["authoredBy"],
            "query": f"ASK {{ {iri(p['uri'])} {r} {iri(a)} }}", "answer": a in p["authors"]}


def t_bool_venue(g, rng):
    p = rng.choice(g.papers)
    v = p["venue"] if rng.random() < 0.5 else rng.choice(g.venues)[0]
    r = iri(RELATIONS["publishedInStream"]["uri"])
    return {"slots": {"P": p["label"], "V": g.labels[v]}, "entities": [ent(g, p["uri"]), ent(g, v)],
            "relations": ["publishedInStream"],
            "query": f"ASK {{ {iri(p['uri'])} {r} {iri(v)} }}", "answer": p["venue"] == v}


def t_neg_coauth(g, rng):
    a, na, b, nb = two_persons(g, rng)
    mine, both = g.papers_of(a), g.papers_of(a) & g.papers_of(b)
    if not both or both == mine:
        return None
    r = iri(RELATIONS["authoredBy"]["uri"])
    return {"slots": {"A": na, "B": nb}, "entities": [ent(g, a), ent(g, b)],
            "relations": ["authoredBy"],
            "query": select(f"?x {r} {iri(a)} . FILTER NOT EXISTS {{ ?x {r} {iri(b)} }}"),
            "answer": mine - both}


def t_neg_venue(g, rng):
    a, na = rng.choice(g.persons)
    v, nv = rng.choice(g.venues)
    mine = g.papers_of(a)
    ans = {p for p in mine if g.paper(p)["venue"] != v}
    if not ans or ans == mine:
        return None
    ra, rv = iri(RELATIONS["authoredBy"]["uri"]), iri(RELATIONS["publishedInStream"]["uri"])
    return {"slots": {"A": na, "V": nv}, "entities": [ent(g, a), ent(g, v)],
            "relations": ["authoredBy", "publishedInStream"],
            "query": select(f"?x {ra} {iri(a)} . FILTER NOT EXISTS {{ ?x {rv} {iri(v)} }}"),
            "answer": ans}


def t_dneg(g, rng):
    (a, na), (b, nb), (c, nc) = rng.sample(g.persons, 3)
    mine = g.papers_of(a)
    ans = mine - g.papers_of(b) - g.papers_of(c)
    if not ans or ans == mine or ans == mine - g.papers_of(b) or ans == mine - g.papers_of(c):
        return None
    r = iri(RELATIONS["authoredBy"]["uri"])
    body = (f"?x {r} {iri(a)} . FILTER NOT EXISTS {{ ?x {r} {iri(b)} }} . "
            f"FILTER NOT EXISTS {{ ?x {r} {iri(c)} }}")
    return {"slots": {"A": na, "B": nb, "C": nc}, "entities": [ent(g, a), ent(g, b), ent(g, c)],
            "relations": ["authoredBy"], "query": select(body), "answer": ans}


def t_dint(g, rng):
    p = rng.choice(g.papers)
    rv, ry = iri(RELATIONS["publishedInStream"]["uri"]), iri(RELATIONS["yearOfPublication"]["uri"])
    e = iri(p["uri"])
    return {"slots": {"P": p["label"]}, "entities": [ent(g, p["uri"])],
            "relations": ["publishedInStream", "yearOfPublication"],
            "query": select(f"{e} {rv} ?x . {e} {ry} ?y", "?x ?y"), "answer": {(p["venue"], p["year"])}}


def t_union(g, rng):
    a, na, b, nb = two_persons(g, rng)
    r = iri(RELATIONS["authoredBy"]["uri"])
    return {"slots": {"A": na, "B": nb}, "entities": [ent(g, a), ent(g, b)],
            "relations": ["authoredBy"],
            "query": select(f"{{ ?x {r} {iri(a)} }} UNION {{ ?x {r} {iri(b)} }}"),
            "answer": g.papers_of(a) | g.papers_of(b)}


def t_count(g, rng):
    a, na = rng.choice(g.persons)
    r = iri(RELATIONS["authoredBy"]["uri"])
    return {"slots": {"A": na}, "entities": [ent(g, a)], "relations": ["authoredBy"],
            "query": f"SELECT ( COUNT ( DISTINCT ?x ) AS ?c ) WHERE {{ ?x {r} {iri(a)} }}",
            "answer": len(g.papers_of(a))}


def t_disamb(g, rng):
    p = rng.choice([p for p in g.papers if len(p["authors"]) > 1])
    a = rng.choice(p["authors"])
    o = g.affiliation[a]
    ans = {x for x in p["authors"] if g.affiliation[x] == o}
    if ans == set(p["authors"]):
        return None
    ra, rf = iri(RELATIONS["authoredBy"]["uri"]), iri(RELATIONS["primaryAffiliation"]["uri"])
    return {"slots": {"P": p["label"], "O": g.labels[o]}, "entities": [ent(g, p["uri"]), ent(g, o)],
            "relations": ["authoredBy", "primaryAffiliation"],
            "query": select(f"{iri(p['uri'])} {ra} ?x . ?x {rf} {iri(o)}"), "answer": ans}


def t_sup(op):
    def build(g, rng):
        a, na = rng.choice(g.persons)
        mine = sorted(g.papers_of(a))
        year = str(rng.randint(2016, 2022))
        ans = {p for p in mine if (g.paper(p)["year"] > year if op == ">" else g.paper(p)["year"] < year)}
        if not ans or ans == set(mine):
            return None
        ra, ry = iri(RELATIONS["authoredBy"]["uri"]), iri(RELATIONS["yearOfPublication"]["uri"])
        body = f"?x {ra} {iri(a)} . ?x {ry} ?y . FILTER ( ?y {op} '{year}' )"
        return {"slots": {"A": na, "Y": year}, "entities": [ent(g, a)],
                "relations": ["authoredBy", "yearOfPublication"], "query": select(body), "answer": ans}
    return build


# (template id, category, temporal, training phrasings, held-out phrasings, builder)
TEMPLATES = [
    ("sf_subj", "Single Fact", False, ["Which papers did {A} author?"],
     ["Which papers has {A} written?"], t_sf_subj),
    ("sf_authors", "Single Fact", False, ["Who are the authors of {P}?"], [],
     sf_obj("authoredBy", lambda p: set(p["authors"]))),
    ("sf_year", "Single Fact", True, ["In which year was {P} published?"], [],
     sf_obj("yearOfPublication", lambda p: {p["year"]})),
    ("sf_venue", "Single Fact", False, ["In which venue was {P} published?"], [],
     sf_obj("publishedInStream", lambda p: {p["venue"]})),
    ("sf_affil", "Single Fact", False, ["What is the primary affiliation of {A}?"], [], t_sf_affil),
    ("mf_coauth", "Multiple Facts", False, ["Which papers did {A} and {B} write together?"], [],
     t_mf_coauth),
    ("mf_venue", "Multiple Facts", False, ["Which papers by {A} appeared in {V}?"], [], t_mf_venue),
    ("mf_year", "Multiple Facts", True, ["Which papers did {A} publish in {Y}?"], [], t_temp_in),
    ("bool_auth", "Boolean", False, ["Did {A} write {P}?"], [], t_bool_auth),
    ("bool_venue", "Boolean", False, ["Was {P} published in {V}?"], [], t_bool_venue),
    ("neg_coauth", "Negation", False, ["Which papers by {A} were not written with {B}?"],
     ["Which papers of {A} were not co-authored by {B}?"], t_neg_coauth),
    ("neg_venue", "Negation", False, ["Which papers by {A} did not appear in {V}?"], [], t_neg_venue),
    ("dneg", "Double Negation", False, ["Which papers by {A} were written with neither {B} nor {C}?"],
     [], t_dneg),
    ("dint", "Double Intent", True, ["Where and when was {P} published?"], [], t_dint),
    ("union", "Union", False, ["Which papers were written by {A} or {B}?"],
     ["Which papers were written by {A} or by {B}?"], t_union),
    ("count", "Count", False, ["How many papers did {A} write?"],
     ["How many papers has {A} authored?"], t_count),
    ("disamb", "Disambiguation", False, ["Which author of {P} is affiliated with {O}?"], [], t_disamb),
    ("sup_after", "Superlative/Comparative", True, ["Which papers did {A} publish after {Y}?"], [],
     t_sup(">")),
    ("sup_before", "Superlative/Comparative", True, ["Which papers did {A} publish before {Y}?"], [],
     t_sup("<")),
]

SPLIT_COUNTS = {"train": 3, "valid": 1, "test": 2}

# Prior pairs: a question built from generic English cue words and a query
# skeleton in pointer form. Cue words select the query shape; triple
# direction, hint order and relation choice are random. T is a triple linking
# ?x to an entity, E/R are entity/relation pointers and Q the year.
PRIOR_NOUNS = ["papers", "works", "items", "people", "authors", "venues", "articles"]
PRIOR_VERBS = ["write", "publish", "appear", "author", "create", "have"]
PRIOR_WH = ["which", "what", "who", "where", "when"]

PRIOR_SHAPES = [
    ("{wh} {noun} {verb}", "SELECT DISTINCT ?x WHERE { T }"),
    ("{wh} is the {noun} of", "SELECT DISTINCT ?x WHERE { T }"),
    ("{wh} {noun} {verb} and {verb}", "SELECT DISTINCT ?x WHERE { T . T }"),
    ("{wh} {noun} {verb} in", "SELECT DISTINCT ?x WHERE { T . T }"),
    ("{wh} {noun} {verb} together", "SELECT DISTINCT ?x WHERE { T . T }"),
    ("{wh} {noun} {verb} in {year}", "SELECT DISTINCT ?x WHERE { T . ?x R Q }"),
    ("{wh} {noun} {verb} after {year}",
     "SELECT DISTINCT ?x WHERE { T . ?x R ?y . FILTER ( ?y > Q ) }"),
    ("{wh} {noun} {verb} before {year}",
     "SELECT DISTINCT ?x WHERE { T . ?x R ?y . FILTER ( ?y < Q ) }"),
    ("{wh} {noun} {verb} not", "SELECT DISTINCT ?x WHERE { T . FILTER NOT EXISTS { T } }"),
    ("{wh} {noun} did not {verb}", "SELECT DISTINCT ?x WHERE { T . FILTER NOT EXISTS { T } }"),
    ("{wh} {noun} {verb} with neither nor",
     "SELECT DISTINCT ?x WHERE { T . FILTER NOT EXISTS { T } . FILTER NOT EXISTS { T } }"),
    ("{wh} {noun} {verb} by or", "SELECT DISTINCT ?x WHERE { { T } UNION { T } }"),
    ("{wh} {noun} {verb} or", "SELECT DISTINCT ?x WHERE { { T } UNION { T } }"),
    ("how many {noun} {verb}", "SELECT ( COUNT ( DISTINCT ?x ) AS ?c ) WHERE { T }"),
    ("did {verb}", "ASK { E R E }"),
    ("was {verb} in", "ASK { E R E }"),
    ("is {noun} of", "ASK { E R E }"),
    ("where and when was {verb}", "SELECT DISTINCT ?x ?y WHERE { E R ?x . E R ?y }"),
    ("what and when {verb}", "SELECT DISTINCT ?x ?y WHERE { E R ?x . E R ?y }"),
]


def prior_line(rng):
    text, skeleton = rng.choice(PRIOR_SHAPES)
    question = text.format(wh=rng.choice(PRIOR_WH), noun=rng.choice(PRIOR_NOUNS),
                           verb=rng.choice(PRIOR_VERBS), year=rng.randrange(2000, 2030))
    out, entities = [], 0
    n_entities = sum(tok in ("E", "T") for tok in skeleton.split())
    order = rng.sample(range(n_entities), n_entities)

    def entity():
        nonlocal entities
        entities += 1
        return f"<E{min(order[entities - 1], 2)}>"

    def relation():
        return f"<R{rng.randrange(2)}>"

    for tok in skeleton.split():
        if tok == "T":
            r, e = relation(), entity()
            out.extend(["?x", r, e] if rng.random() < 0.5 else [e, r, "?x"])
        elif tok == "E":
            out.append(entity())
        elif tok == "R":
            out.append(relation())
        elif tok == "Q":
            out.append("<Q0>")
        else:
            out.append(tok)
    return f"{question}?\t<think> step </think> " + " ".join(out)


def prior_lines(rng, n):
    return [prior_line(rng) for _ in range(n)]


def make_instances(g, rng):
    splits = {"train": [], "valid": [], "test": []}
    seen = set()
    for tid, category, temporal, phrasings, heldout, build in TEMPLATES:
        plan = [(split, False) for split, n in SPLIT_COUNTS.items() for _ in range(n)]
        plan += [("test", True) for _ in heldout]
        for index, (split, is_heldout) in enumerate(plan):
            for _ in range(1000):
                draw = build(g, rng)
                if draw is None:
                    continue
                phrasing = heldout[index - sum(SPLIT_COUNTS.values())] if is_heldout else rng.choice(phrasings)
                question = phrasing.format(**draw["slots"])
                if question in seen:
                    continue
                seen.add(question)
                break
            else:
                raise RuntimeError(f"cannot draw an instance of {tid}")
            splits[split].append({
                "id": f"{split}-{tid}-{index}",
                "question": question,
                "query": draw["query"],
                "query_type": category,
                "template_id": tid + ("_heldout" if is_heldout else ""),
                "temporal": temporal,
                "held_out": is_heldout,
                "entities": draw["entities"],
                "relations": [RELATIONS[r] for r in draw["relations"]],
            })
    for items in splits.values():
        rng.shuffle(items)
    return splits


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "micro")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--prior-lines", type=int, default=2000)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    g = Graph(rng)
    args.out.mkdir(parents=True, exist_ok=True)
    triples = g.triples()
    with open(args.out / "store.nt", "w") as f:
        for s, p, o in triples:
            obj = o if o.startswith('"') else f"<{o}>"
            f.write(f"<{s}> <{p}> {obj} .\n")
    for split, items in make_instances(g, rng).items():
        with open(args.out / f"{split}.jsonl", "w") as f:
            for item in items:
                f.write(json.dumps(item, ensure_ascii=False) + "\n")
    with open(args.out / "prior.txt", "w") as f:
        f.write("\n".join(prior_lines(rng, args.prior_lines)) + "\n")
    print(f"{len(triples)} triples written to {args.out}")


if __name__ == "__main__":
    main()
