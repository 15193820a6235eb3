"""Coreference-to-QA conversion, end to end on two tiny passages.

Builds a two-document coreference corpus in the CoNLL-2012 column format,
parses it, and converts it with both the declarative-query strategy and the
rule-based question generator, printing every intermediate artifact.

Run:  python demos/01_conversion_walkthrough.py
"""

from coref2qa import convert
from coref2qa.conll import ColumnMap, mention_text, parse_conll

# ---------------------------------------------------------------------------
# 1. A corpus in the four-column layout (word, POS, NE, coref).
#    One cluster per document: [My mother, She, She, she] and
#    [a large chain, the chain].
# ---------------------------------------------------------------------------

CORPUS = """\
#begin document (demo/mother); part 000
My PRP$ * (0
mother NN * 0)
was VBD * -
Thelma NNP (PERSON* -
Wahl NNP *) -
. . * -

She PRP * (0)
was VBD * -
a DT * -
very RB * -
good JJ * -
mother NN * -
. . * -

She PRP * (0)
was VBD * -
at IN * -
Huntingdon NNP (GPE) -
because IN * -
she PRP * (0)
needed VBD * -
care NN * -
. . * -

#end document
#begin document (demo/chain); part 000
The DT * -
angel NN * -
also RB * -
held VBD * -
a DT * (0
large JJ * -
chain NN * 0)
in IN * -
his PRP$ * -
hand NN * -
. . * -

The DT * -
angel NN * -
tied VBD * -
the DT * -
dragon NN * -
with IN * -
the DT * (0
chain NN * 0)
for IN * -
1000 CD * -
years NNS * -
. . * -

#end document
"""

docs = parse_conll(CORPUS, ColumnMap.compact())
print(f"parsed {len(docs)} documents")
for doc in docs:
    for cluster in doc.clusters:
        mentions = [mention_text(doc, m) for m in cluster.mentions]
        print(f"  {doc.doc_id} cluster {cluster.cluster_id}: {mentions}")

# ---------------------------------------------------------------------------
# 2. Anaphor/antecedent selection: every non-first mention pairs with its
#    closest non-pronominal antecedent; identical pairs are removed.
# ---------------------------------------------------------------------------

print("\nanaphor -> antecedent pairs")
for doc in docs:
    for anaphor, antecedent in convert.select_anaphors(doc):
        print(f"  {doc.doc_id}: {mention_text(doc, anaphor)!r} -> {mention_text(doc, antecedent)!r}")

# ---------------------------------------------------------------------------
# 3. Declarative queries: the anaphor's sentence with <ref> markers. The
#    whole document is the context; the antecedent is the extractive answer.
# ---------------------------------------------------------------------------

dec = convert.convert(docs, "dec")
print(f"\ndeclarative conversion: {len(dec)} examples")
for ex in dec.examples:
    print(f"  Q: {ex.question}")
    print(f"  A: {ex.answers[0].text!r} at context offset {ex.answers[0].answer_start}")

# ---------------------------------------------------------------------------
# 4. Rule-based questions: only sentences with a subject-position cluster
#    mate can be questioned, so the chain example is skipped.
# ---------------------------------------------------------------------------

rule = convert.convert(docs, "rule")
print(f"\nrule-based conversion: {len(rule)} examples (dec had {len(dec)})")
for ex in rule.examples:
    print(f"  Q: {ex.question}")
    print(f"  A: {ex.answers[0].text!r}")
