"""Unsupervised named entity disambiguation with top-k group Steiner trees."""

from .candidates import CandidateSet, Document, Mention, generate_candidates
from .context import ContextGraph, TerminalGroup, build_context_graph
from .embeddings import EmbeddingTable, WalkConfig, embed_graph
from .evaluation import EvalReport, evaluate
from .kg import KnowledgeGraph, load_kg
from .pipeline import Linker, PipelineConfig
from .ranker import RankedCandidates, Scheme, rank
from .similarity import indel_similarity, jaro_winkler
from .solver import GstSolution, SteinerTree, brute_force_gst, solve_topk

__version__ = "0.1.0"
