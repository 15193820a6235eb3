"""Artifact probes on a dataset with planted biases.

Constructs a 40-example extractive QA dataset where a known fraction of the
answers sit inside the sentence most similar to the question, then runs the
heuristic probes, the degraded-training transforms, and the bias-ratio
report with bootstrap bounds.

Run:  python demos/02_bias_probe_walkthrough.py
"""

from coref2qa import metrics, probes
from coref2qa.qa_data import Answer, QADataset, QAExample

# ---------------------------------------------------------------------------
# 1. Plant the corpus: sentence 1 is always the most question-similar one
#    (the question repeats it verbatim); only the first 12 examples keep
#    their answer inside it.
# ---------------------------------------------------------------------------

examples = []
entity_table = {}
for i in range(40):
    target = f"The courier word{i} delivered parcel{i} at dawn."
    context = f"Nobody expected news. {target} Pers{i} waited near gate{i}."
    if i < 12:
        answer = Answer(f"parcel{i}", context.index(f"parcel{i}"))
    else:
        answer = Answer(f"gate{i}", context.index(f"gate{i}"))
    question = f"What happened when {target.rstrip('.').lower()}?"
    examples.append(QAExample(f"ex{i}", question, context, [answer]))
    entity_table[f"ex{i}"] = [answer.text] if i % 4 == 0 else [f"Other{i}"]

ds = QADataset("demo", examples)
print(f"dataset: {len(ds)} examples; planted overlap fraction = 12/40 = 30%")

# ---------------------------------------------------------------------------
# 2. Heuristic probes: semantic overlap and random named entity.
# ---------------------------------------------------------------------------

overlap = probes.probe_semantic_overlap(ds)
random_ne = probes.probe_random_ne(ds, probes.tagged_entity_source(entity_table), seed=7)
print(f"semantic-overlap flags: {len(overlap)}")
print(f"random-NE flags:        {len(random_ne)}")

# ---------------------------------------------------------------------------
# 3. Transforms build degraded training sets for external probe models.
# ---------------------------------------------------------------------------

wh = probes.transform_wh_only(ds)
empty = probes.transform_empty_question(ds)
short = probes.transform_short_context(ds)
print(f"\nwh-only questions look like: {wh.examples[0].question!r}")
print(f"empty-question size: {len(empty)} (unchanged)")
print(f"short-context size:  {len(short)} (dropped {len(ds) - len(short)} unreachable examples)")

# ---------------------------------------------------------------------------
# 4. Scoring an external model's predictions back into flags. Gold answers
#    as predictions give the 100% sanity ceiling.
# ---------------------------------------------------------------------------

gold_preds = {ex.qid: ex.answers[0].text for ex in short.examples}
ceiling = probes.score_probe_predictions(short, gold_preds)
print(f"\ngold-as-prediction ceiling on short-context output: {len(ceiling)}/{len(short)}")

# ---------------------------------------------------------------------------
# 5. The report, with bootstrap bounds over 10 seeded subsets of 20.
# ---------------------------------------------------------------------------

flags = probes.collect_flags(
    ds,
    {
        "semantic_overlap": overlap,
        "random_ne": random_ne,
        "short_distance": probes.score_probe_predictions(ds, gold_preds),
    },
)
report = probes.bias_report(ds, flags, bootstrap=(10, 20, 3))
print("\nbias ratios (% of examples):")
for probe, ratio in sorted(report.ratios.items()):
    bounds = report.bootstrap[probe]
    print(f"  {probe:>17}: {ratio:6.2f}   bootstrap mean {bounds.mean:6.2f} in [{bounds.min:.2f}, {bounds.max:.2f}]")

# ---------------------------------------------------------------------------
# 6. Subset deltas: how much a "better" model gains on the hard complement.
# ---------------------------------------------------------------------------

baseline = {ex.qid: (ex.answers[0].text if ex.qid in overlap else "") for ex in ds.examples}
variant = {ex.qid: ex.answers[0].text for ex in ds.examples}
for delta in metrics.subset_analysis(ds, flags, baseline, variant):
    print(f"  {delta.subset_name:>21}: n={delta.n:3d}  baseline {delta.baseline_f1:6.2f}"
          f"  variant {delta.variant_f1:6.2f}  delta {delta.delta:+.2f}")
