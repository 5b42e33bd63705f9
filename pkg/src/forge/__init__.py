"""forge: a self-hostable platform for running AI competitions end to end.

Competitions are defined over a common submission bundle contract, incoming
bundles are evaluated in sandboxed child processes against hidden datasets,
rankings are served from a leaderboard, and winning submissions are harvested
into a versioned model registry, gated by static analysis, and materialized
as runnable microservices with generated API documents.
"""

__version__ = "0.1.0"
