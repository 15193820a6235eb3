"""Annotation service walkthrough: rank, validate, accept, export.

Starts the service in-process against a three-passage corpus, drafts a pair
that violates the different-sentence rule, corrects it, accepts it, and
exports the accepted pairs as a SQuAD-schema dataset.

Run:  python demos/03_annotation_service_demo.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from coref2qa import service

PASSAGES = {
    "passages": [
        {
            "id": "motteux",
            "text": (
                "John Motteux sailed to France in June. Later that year his estate "
                "was sold. The buyer kept the gardens."
            ),
        },
        {"id": "meeting", "text": "We saw Alice meet Bob in Rome. She liked him at once."},
        {"id": "rain", "text": "the rain fell. it kept falling."},
    ]
}

workdir = Path(tempfile.mkdtemp(prefix="coref2qa-demo-"))
corpus_path = workdir / "corpus.json"
corpus_path.write_text(json.dumps(PASSAGES), encoding="utf-8")

config = service.ServiceConfig(
    corpus_path=str(corpus_path), store_path=str(workdir / "pairs.jsonl")
)
client = TestClient(service.create_app(config))

# ---------------------------------------------------------------------------
# 1. Ranked passage browsing: entity-rich passages first.
# ---------------------------------------------------------------------------

print("ranked passages:")
for entry in client.get("/passages").json():
    print(f"  {entry['passage_id']:>8}: {entry['distinct_entity_count']} entities, "
          f"{entry['pronoun_count']} pronouns")

detail = client.get("/passages/motteux").json()
text = detail["text"]
print(f"\npronoun highlights in 'motteux': {[s['text'] for s in detail['pronoun_spans']]}")

# ---------------------------------------------------------------------------
# 2. A violating draft: m1 and m2 in the same sentence.
# ---------------------------------------------------------------------------

name = "John Motteux"
his = text.index("his")
france = text.index("France")
violating = {
    "passage_id": "motteux",
    "question": "Who sailed to France?",
    "answer": {"text": name, "answer_start": 0},
    "m1": {"start": france, "end": france + len("France")},
    "m2": {"start": 0, "end": len(name)},
}
verdict = client.post("/validate", json=violating).json()
print("\nviolating draft:")
for rule, result in verdict["validation"]["rules"].items():
    print(f"  {rule:>19}: {'pass' if result['passed'] else 'FAIL'}  ({result['message']})")

# ---------------------------------------------------------------------------
# 3. Corrected draft: the referring expression moves to sentence two, and
#    the bias preview reports whether the answer hides in the most
#    question-similar sentence.
# ---------------------------------------------------------------------------

corrected = dict(violating)
corrected["question"] = "Whose estate was sold later that year?"
corrected["m1"] = {"start": his, "end": his + 3}
verdict = client.post("/validate", json=corrected).json()
print(f"\ncorrected draft passes: {verdict['validation']['passed']}")
print(f"bias preview: {verdict['bias_preview']}")

response = client.post("/pairs", json=corrected)
print(f"accept -> HTTP {response.status_code}, record id {response.json()['id']}")

# ---------------------------------------------------------------------------
# 4. The store and the export.
# ---------------------------------------------------------------------------

pairs = client.get("/pairs").json()
print(f"\nstore now holds {len(pairs)} accepted pair(s)")
exported = client.get("/export").json()
qas = exported["data"][0]["paragraphs"][0]["qas"]
print(f"export contains {len(qas)} QA item(s); first question: {qas[0]['question']!r}")
print(f"\nstore file: {config.store_path}")
