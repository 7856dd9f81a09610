"""Gender bias evaluation for masked language models across languages.

The pipeline: load a gender lexicon (`lexicon`), ingest and partition a
corpus (`corpus`), generate counterfactual sentence pairs by lexicon
substitution or mask-filling (`pairgen`), score sentences through a
pluggable backend (`scoring`), and aggregate bias metrics (`metrics`).
The `cli` module wires these into reproducible runs.
"""

__version__ = "0.1.0"
