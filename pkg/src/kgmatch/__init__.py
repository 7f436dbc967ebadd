"""kgmatch: measure how well a knowledge graph matches a multiple-choice
commonsense task via knowledge extraction, knowledge-surrounded dataset
emission, probe generation, and integration statistics."""

__version__ = "0.1.0"
