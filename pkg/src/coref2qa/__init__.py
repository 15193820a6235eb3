"""coref2qa: coreference corpora -> extractive QA, with artifact probes and
a curation/annotation service.

Subpackages by pipeline stage:

* ``conll``     - CoNLL-2012 column-format parsing and serialization
* ``qa_data``   - extractive QA dataset model, SQuAD JSON I/O, dataset algebra
* ``convert``   - coreference-to-QA conversion (declarative / rule / external)
* ``metrics``   - normalization, token F1 / EM, subset deltas
* ``probes``    - the five artifact probes, transforms, and bias reports
* ``curation``  - passage ranking and annotation-guideline validation
* ``service``   - HTTP annotation service with an append-only pair store
* ``cli``       - batch command-line interface over all of the above
"""

__version__ = "0.1.0"
