"""Type graphs, homomorphism search, and algebraic model selection.

The pipeline: ingest a JSONL execution trace, fold it into a type graph,
check the graph for semantic type ambiguity, relate graphs by homomorphisms,
and explore/augment/select executable models via finitely presented
transformation monoids acting on them.
"""

from . import errors, models, morphism, rewriting, trace, typegraph
from .errors import MetamodelError

__version__ = "0.1.0"

__all__ = [
    "MetamodelError",
    "errors",
    "models",
    "morphism",
    "rewriting",
    "trace",
    "typegraph",
]
