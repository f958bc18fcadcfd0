#!/usr/bin/env python3
"""Regenerate the bundled fixtures with computed character offsets.

Run from the repo root: python scripts/build_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from eventaug.model import load_ontology, load_dataset  # noqa: E402

FIXTURES = ROOT / "fixtures"

ONTOLOGY_YAML = """\
# Fixture event ontology. Each role's slot phrase must appear exactly once in
# the type's argument template.
event_types:
  - name: Justice:Pardon
    template: "some people in somewhere was pardoned by some adjudicator."
    roles:
      - name: Adjudicator
        entity_types: [PER, ORG, GPE]
        slot: "some adjudicator"
      - name: Defendant
        entity_types: [PER]
        slot: "some people"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
  - name: Justice:Fine
    template: "some people or some organization in somewhere was ordered by some adjudicator to pay a fine."
    roles:
      - name: Entity
        entity_types: [PER, ORG]
        slot: "some people or some organization"
      - name: Adjudicator
        entity_types: [PER, ORG, GPE]
        slot: "some adjudicator"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
  - name: Justice:Acquit
    template: "some adjudicator acquitted some people in somewhere."
    roles:
      - name: Adjudicator
        entity_types: [PER, ORG, GPE]
        slot: "some adjudicator"
      - name: Defendant
        entity_types: [PER, ORG]
        slot: "some people"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
  - name: Justice:Convict
    template: "some adjudicator convicted some people of a crime in somewhere."
    roles:
      - name: Adjudicator
        entity_types: [PER, ORG, GPE]
        slot: "some adjudicator"
      - name: Defendant
        entity_types: [PER, ORG]
        slot: "some people"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
  - name: Business:Declare-Bankruptcy
    template: "some organization declared bankruptcy in somewhere at some time."
    roles:
      - name: Org
        entity_types: [ORG, PER]
        slot: "some organization"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
      - name: Time
        entity_types: [DATE, TIME]
        slot: "some time"
  - name: Conflict:Attack
    template: "some attacker attacked some target in somewhere."
    roles:
      - name: Attacker
        entity_types: [PER, ORG, GPE]
        slot: "some attacker"
      - name: Target
        entity_types: [PER, ORG, GPE, LOC, FAC]
        slot: "some target"
      - name: Place
        entity_types: [GPE, LOC, FAC]
        slot: "somewhere"
"""

GAZETTEER = {
    "Paul Laxalt": "PER",
    "Nevada": "GPE",
    "1988": "DATE",
    "1999": "DATE",
    "Texas": "GPE",
    "Jordan": "GPE",
    "Abdullah II": "PER",
    "Marc Rich": "PER",
    "Hazelhurst & Associates Inc.": "ORG",
    "Acme Corp": "ORG",
    "the Supreme Court": "ORG",
    "the Ninth Circuit": "ORG",
    "Vancouver": "GPE",
    "al Qaeda": "ORG",
    "John Hinkley": "PER",
    "Ronald Reagan": "PER",
    "Yeltsin": "PER",
    "Skuratov": "PER",
    "the Pentagon": "FAC",
    "Mount Vernon": "LOC",
    "$22.5 million": "MONEY",
    "$2 million": "MONEY",
    "yesterday": "DATE",
    "this morning": "TIME",
    "Maria Alvarez": "PER",
    "Daniel Okafor": "PER",
    "Judge Harmon": "PER",
    "Governor Lee": "PER",
    "Oakdale": "GPE",
    "Riverton": "GPE",
    "Crestview Bank": "ORG",
    "Northfield Mills": "ORG",
    "Tuesday": "DATE",
    "last spring": "DATE",
}

CORPUS = [
    "Paul Laxalt retired in 1988 in Nevada.",
    "The board finally cleared the suspects after years of appeals.",
    "Governor Lee moved to clear the backlog of clemency petitions in Nevada.",
    "Prosecutors in Texas said the records were clear of any tampering.",
    "Marc Rich was pardoned by Abdullah II during a ceremony in Jordan.",
    "A spokesman said Yeltsin would pardon Skuratov before leaving office.",
    "The committee asked Governor Lee to pardon two clerks from Oakdale.",
    "Judge Harmon convicted Daniel Okafor of fraud in Riverton.",
    "A jury in Vancouver convicted three smugglers after a short trial.",
    "The tribunal convicted the militia leader despite appeals from al Qaeda sympathizers.",
    "The appeals panel acquitted Maria Alvarez of all charges in Oakdale.",
    "After deliberating, the Ninth Circuit acquitted the shipping clerk.",
    "The judge fined Acme Corp $2 million for dumping waste near Mount Vernon.",
    "Regulators fined Crestview Bank for misleading investors in 1999.",
    "The city will fine landlords who ignore the new safety code.",
    "Hazelhurst & Associates Inc. declared bankruptcy yesterday, with $22.5 million in debts.",
    "Northfield Mills declared bankruptcy in Riverton last spring.",
    "Analysts expect Crestview Bank to declare bankruptcy by Tuesday.",
    "Militants attacked a convoy near the Pentagon this morning.",
    "Rebels attacked Northfield Mills and set the warehouse ablaze.",
    "John Hinkley denied his attempt to assassinate Ronald Reagan.",
    "The senate calendar is clear for the rest of the week.",
    "Maria Alvarez asked the Supreme Court to clear her name.",
    "Skies over Riverton stayed clear through the harvest.",
    "The Supreme Court pardoned no one during the session of 1999.",
    "Daniel Okafor was convicted once before, in Texas.",
    "A military court acquitted two privates in Jordan.",
    "The exchange fined a floor trader for a string of late reports.",
    "Shareholders feared Acme Corp would declare bankruptcy after the audit.",
    "Gunmen attacked a checkpoint outside Oakdale on Tuesday.",
    "The governor of Nevada pardoned a wartime deserter in 1988.",
    "Investigators cleared Judge Harmon of misconduct allegations.",
    "The court in Vancouver fined the shipping line $2 million.",
    "Counsel for Marc Rich argued the conviction should be vacated.",
    "Abdullah II toured Mount Vernon with a delegation from Jordan.",
    "The panel convicted the auditors who hid losses at Crestview Bank.",
    "Villagers said soldiers attacked the mill at dawn.",
    "The parole board in Texas pardoned four inmates this morning.",
    "A federal jury acquitted the pilot of smuggling charges.",
    "Creditors of Northfield Mills met in Riverton yesterday.",
    "The tax office fined Maria Alvarez over unreported income.",
    "Officials in Oakdale cleared the square before the parade.",
    "The king pardoned Marc Rich, a decision Republicans criticized.",
    "Judge Harmon acquitted the bookkeeper, citing thin evidence.",
    "Raiders attacked a depot near Mount Vernon in 1999.",
    "Yeltsin convicted no ministers, despite pressure from parliament.",
    "The council fined vendors who blocked the market lanes.",
    "A storm left the harbor clear of traffic by Tuesday.",
    "Auditors warned that Acme Corp had defaulted twice since 1988.",
    "The clerk said the docket was convicted-free, an odd phrase that amused reporters.",
]


def mention(etype: str, text: str, trigger: str, args: list[tuple[str, str]]) -> dict:
    """Build a mention record with offsets computed from the sentence text."""

    used: list[tuple[int, int]] = []

    def locate(fragment: str) -> tuple[int, int]:
        start = 0
        while True:
            idx = text.find(fragment, start)
            if idx < 0:
                raise SystemExit(f"fragment {fragment!r} not in {text!r}")
            span = (idx, idx + len(fragment))
            if span not in used:
                used.append(span)
                return span
            start = idx + 1

    t0, t1 = locate(trigger)
    arguments = []
    for role, filler in args:
        a0, a1 = locate(filler)
        arguments.append({"role": role, "text": filler, "start": a0, "end": a1})
    return {
        "event_type": etype,
        "trigger": {"text": trigger, "start": t0, "end": t1},
        "arguments": arguments,
    }


def sentence(sid: str, text: str, mentions: list[dict]) -> dict:
    return {"id": sid, "text": text, "tokens": text.split(), "mentions": mentions}


def build_novel() -> list[dict]:
    rows = []
    # --- Justice:Pardon (5 mentions) ---
    t = (
        "now it 's up to the appeals court and the board of pardon and paroles "
        "to officially clear their names."
    )
    rows.append(
        sentence(
            "nov-01",
            t,
            [
                mention(
                    "Justice:Pardon",
                    t,
                    "clear",
                    [
                        ("Adjudicator", "court"),
                        ("Adjudicator", "board of pardon and paroles"),
                    ],
                )
            ],
        )
    )
    t = "The governor pardoned the clerk in Texas."
    rows.append(
        sentence(
            "nov-02",
            t,
            [
                mention(
                    "Justice:Pardon",
                    t,
                    "pardoned",
                    [("Adjudicator", "governor"), ("Place", "Texas")],
                )
            ],
        )
    )
    t = "Marc Rich hoped the king would pardon him before the new year."
    rows.append(
        sentence(
            "nov-03",
            t,
            [
                mention(
                    "Justice:Pardon",
                    t,
                    "pardon",
                    [("Defendant", "Marc Rich"), ("Adjudicator", "king")],
                )
            ],
        )
    )
    t = "A royal decree cleared the two merchants of smuggling."
    rows.append(
        sentence(
            "nov-04",
            t,
            [mention("Justice:Pardon", t, "cleared", [("Defendant", "merchants")])],
        )
    )
    t = "The outgoing president pardoned a financier and his partner."
    rows.append(
        sentence(
            "nov-05",
            t,
            [
                mention(
                    "Justice:Pardon",
                    t,
                    "pardoned",
                    [("Adjudicator", "president"), ("Defendant", "financier")],
                )
            ],
        )
    )
    # --- Justice:Convict (6 mentions, one sentence shared with Acquit) ---
    t = "The court convicted the treasurer but acquitted the clerk in Riverton."
    rows.append(
        sentence(
            "nov-06",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "court"), ("Defendant", "treasurer"), ("Place", "Riverton")],
                ),
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "court"), ("Defendant", "clerk")],
                ),
            ],
        )
    )
    t = "Judge Harmon convicted the forger after a week of testimony."
    rows.append(
        sentence(
            "nov-07",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "Judge Harmon"), ("Defendant", "forger")],
                )
            ],
        )
    )
    t = "A jury convicted the broker of wire fraud in Oakdale."
    rows.append(
        sentence(
            "nov-08",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "jury"), ("Defendant", "broker"), ("Place", "Oakdale")],
                )
            ],
        )
    )
    t = "The tribunal convicted two captains and convicted their quartermaster as well."
    rows.append(
        sentence(
            "nov-09",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "tribunal"), ("Defendant", "captains")],
                ),
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Defendant", "quartermaster")],
                ),
            ],
        )
    )
    t = "Prosecutors said the appeals panel convicted the importer at last."
    rows.append(
        sentence(
            "nov-10",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "panel"), ("Defendant", "importer")],
                )
            ],
        )
    )
    # --- Justice:Acquit (4 mentions total; one lives in nov-06) ---
    t = "The bench acquitted Maria Alvarez on every count."
    rows.append(
        sentence(
            "nov-11",
            t,
            [
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "bench"), ("Defendant", "Maria Alvarez")],
                )
            ],
        )
    )
    t = "A military panel acquitted the sergeant in Jordan."
    rows.append(
        sentence(
            "nov-12",
            t,
            [
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "panel"), ("Defendant", "sergeant"), ("Place", "Jordan")],
                )
            ],
        )
    )
    t = "The magistrate acquitted the night watchman of negligence."
    rows.append(
        sentence(
            "nov-13",
            t,
            [
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "magistrate"), ("Defendant", "watchman")],
                )
            ],
        )
    )
    # --- Justice:Fine (5 mentions) ---
    t = "The exchange fined the floor trader for late reports."
    rows.append(
        sentence(
            "nov-14",
            t,
            [
                mention(
                    "Justice:Fine",
                    t,
                    "fined",
                    [("Adjudicator", "exchange"), ("Entity", "trader")],
                )
            ],
        )
    )
    t = "Regulators fined Crestview Bank over the misleading brochures."
    rows.append(
        sentence(
            "nov-15",
            t,
            [
                mention(
                    "Justice:Fine",
                    t,
                    "fined",
                    [("Adjudicator", "Regulators"), ("Entity", "Crestview Bank")],
                )
            ],
        )
    )
    t = "The council fined two vendors and fined their supplier in Oakdale."
    rows.append(
        sentence(
            "nov-16",
            t,
            [
                mention(
                    "Justice:Fine",
                    t,
                    "fined",
                    [("Adjudicator", "council"), ("Entity", "vendors"), ("Place", "Oakdale")],
                ),
                mention(
                    "Justice:Fine",
                    t,
                    "fined",
                    [("Entity", "supplier")],
                ),
            ],
        )
    )
    t = "The port authority fined the shipping line for the spill."
    rows.append(
        sentence(
            "nov-17",
            t,
            [
                mention(
                    "Justice:Fine",
                    t,
                    "fined",
                    [("Adjudicator", "authority"), ("Entity", "shipping line")],
                )
            ],
        )
    )
    return rows


def build_base() -> list[dict]:
    rows = []
    t = "Hazelhurst & Associates Inc. declared bankruptcy yesterday, with $22.5 million in debts."
    rows.append(
        sentence(
            "base-01",
            t,
            [
                mention(
                    "Business:Declare-Bankruptcy",
                    t,
                    "bankruptcy",
                    [("Org", "Hazelhurst & Associates Inc."), ("Time", "yesterday")],
                )
            ],
        )
    )
    t = "Northfield Mills declared bankruptcy in Riverton last spring."
    rows.append(
        sentence(
            "base-02",
            t,
            [
                mention(
                    "Business:Declare-Bankruptcy",
                    t,
                    "bankruptcy",
                    [
                        ("Org", "Northfield Mills"),
                        ("Place", "Riverton"),
                        ("Time", "last spring"),
                    ],
                )
            ],
        )
    )
    t = "The storied club declared bankruptcy after the season collapsed."
    rows.append(
        sentence(
            "base-03",
            t,
            [
                mention(
                    "Business:Declare-Bankruptcy",
                    t,
                    "bankruptcy",
                    [("Org", "club")],
                )
            ],
        )
    )
    t = "Militants attacked a convoy near the Pentagon this morning."
    rows.append(
        sentence(
            "base-04",
            t,
            [
                mention(
                    "Conflict:Attack",
                    t,
                    "attacked",
                    [
                        ("Attacker", "Militants"),
                        ("Target", "convoy"),
                        ("Place", "the Pentagon"),
                    ],
                )
            ],
        )
    )
    t = "Rebels attacked Northfield Mills and set the warehouse ablaze."
    rows.append(
        sentence(
            "base-05",
            t,
            [
                mention(
                    "Conflict:Attack",
                    t,
                    "attacked",
                    [("Attacker", "Rebels"), ("Target", "Northfield Mills")],
                )
            ],
        )
    )
    t = "Gunmen attacked a checkpoint outside Oakdale on Tuesday."
    rows.append(
        sentence(
            "base-06",
            t,
            [
                mention(
                    "Conflict:Attack",
                    t,
                    "attacked",
                    [("Attacker", "Gunmen"), ("Target", "checkpoint"), ("Place", "Oakdale")],
                )
            ],
        )
    )
    t = "Raiders attacked a depot near Mount Vernon in 1999."
    rows.append(
        sentence(
            "base-07",
            t,
            [
                mention(
                    "Conflict:Attack",
                    t,
                    "attacked",
                    [("Attacker", "Raiders"), ("Target", "depot"), ("Place", "Mount Vernon")],
                )
            ],
        )
    )
    t = "Creditors feared Acme Corp would declare bankruptcy by Tuesday."
    rows.append(
        sentence(
            "base-08",
            t,
            [
                mention(
                    "Business:Declare-Bankruptcy",
                    t,
                    "bankruptcy",
                    [("Org", "Acme Corp"), ("Time", "Tuesday")],
                )
            ],
        )
    )
    return rows


def build_eval() -> tuple[list[dict], list[dict]]:
    gold = []
    t = "Judge Harmon convicted the forger after a week of testimony."
    gold.append(
        sentence(
            "ev-01",
            t,
            [
                mention(
                    "Justice:Convict",
                    t,
                    "convicted",
                    [("Adjudicator", "Judge Harmon"), ("Defendant", "forger")],
                )
            ],
        )
    )
    t = "The bench acquitted Maria Alvarez on every count."
    gold.append(
        sentence(
            "ev-02",
            t,
            [
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "bench"), ("Defendant", "Maria Alvarez")],
                )
            ],
        )
    )
    # Predictions: ev-01 trigger correct but typed Acquit, one argument role
    # wrong; ev-02 exact; plus a spurious trigger on ev-02.
    pred = []
    t = gold[0]["text"]
    pred.append(
        {
            "id": "ev-01",
            "mentions": [
                mention(
                    "Justice:Acquit",
                    t,
                    "convicted",
                    [("Adjudicator", "Judge Harmon"), ("Adjudicator", "forger")],
                )
            ],
        }
    )
    t = gold[1]["text"]
    pred.append(
        {
            "id": "ev-02",
            "mentions": [
                mention(
                    "Justice:Acquit",
                    t,
                    "acquitted",
                    [("Adjudicator", "bench"), ("Defendant", "Maria Alvarez")],
                ),
                mention("Justice:Acquit", t, "count", []),
            ],
        }
    )
    return gold, pred


DEMO_CONFIG = """\
# Offline demo configuration: stub agent, stub endpoints, bundled fixtures.
ontology: fixtures/ontology.yaml
corpus: fixtures/corpus.txt
base_data: fixtures/base.jsonl
novel_data: fixtures/novel.jsonl
gazetteer: fixtures/gazetteer.tsv
workdir: out/demo
seed: 42
embed_dim: 64

index:
  normalization: lemmatized

retrieval:
  limit: 5

enrichment:
  policy: add_or_replace
  replace_probability: 1.0
  max_variants: 3

generation:
  agent: stub

validation:
  accuracy_threshold: 0.5
  coherence_threshold: 0.5
  pair_counts: [8, 4, 4]

curation:
  n: 4
  k: 2
  epochs: 3
  base_batch: 4
  gen_batch: 8
  discard_value: 0.9
"""


def write_jsonl(rows: list[dict], path: Path) -> None:
    path.write_text(
        "".join(json.dumps(r, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n" for r in rows),
        encoding="utf-8",
    )


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    (FIXTURES / "ontology.yaml").write_text(ONTOLOGY_YAML, encoding="utf-8")
    (FIXTURES / "corpus.txt").write_text("\n".join(CORPUS) + "\n", encoding="utf-8")
    (FIXTURES / "gazetteer.tsv").write_text(
        "".join(f"{surface}\t{label}\n" for surface, label in GAZETTEER.items()),
        encoding="utf-8",
    )
    write_jsonl(build_novel(), FIXTURES / "novel.jsonl")
    write_jsonl(build_base(), FIXTURES / "base.jsonl")
    gold, pred = build_eval()
    write_jsonl(gold, FIXTURES / "eval_gold.jsonl")
    write_jsonl(pred, FIXTURES / "eval_pred.jsonl")
    (FIXTURES / "demo.yaml").write_text(DEMO_CONFIG, encoding="utf-8")

    # Sanity: everything loads and validates.
    ontology = load_ontology(FIXTURES / "ontology.yaml")
    novel = load_dataset(FIXTURES / "novel.jsonl", ontology, kind="novel")
    base = load_dataset(FIXTURES / "base.jsonl", ontology, kind="base")
    print(f"ontology: {len(ontology.event_types)} types")
    print(f"novel: {len(novel)} sentences, {novel.mentions_per_type()}")
    print(f"base: {len(base)} sentences, {base.mentions_per_type()}")
    print(f"corpus: {len(CORPUS)} sentences")


if __name__ == "__main__":
    main()
