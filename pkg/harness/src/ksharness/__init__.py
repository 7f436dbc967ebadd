"""Model harness for knowledge-surrounded multiple-choice experiments.

Consumes the toolkit's emitted dataset and probe files, fine-tunes or
zero-shot-evaluates small transformer models, and writes prediction logs
in the analyzer's format.  All exchange with the toolkit happens through
files; nothing here imports it.
"""

__version__ = "0.1.0"
