"""lakeql: an enterprise Text-to-SQL engine.

Indexes data-lake metadata into a knowledge graph, clusters tables by user
access patterns, and answers natural-language questions through a
retrieve -> rank -> write -> fix agent pipeline served over a chat API.
"""

__version__ = "0.1.0"
