"""Stability analysis of keyword-defined citation networks.

Build citation networks from keyword-matched document corpora, detect their
community structure with the two-level map equation, and measure how stable
topology and communities are when keywords are removed from the defining
query. A benchmark-graph laboratory reproduces the same experiments on
generated networks with planted communities.
"""

__version__ = "0.1.0"

from .corpus import (Document, KeywordSet, MatchedCorpus, build_network,
                     load_corpus, match_corpus, match_keywords,
                     retained_documents, synthetic_corpus, write_corpus)
from .errors import (CitesweepError, ConfigError, DegenerateInput,
                     EmptyIntersection, EmptyNetwork, GenerationFailure,
                     InvalidPartition, SchemaError)
from .graph import CitationGraph, UndirectedGraph
from .lfr import (LfrConfig, ToyRun, assign_keywords, generate_lfr,
                  realized_mixing, toy_experiment)
from .mapeq import (DetectionConfig, Partition, detect_communities,
                    map_equation_codelength)
from .metrics import (ContingencyTable, MetricReport, ami, ari,
                      compare_partitions, expected_mutual_information,
                      mutual_information, nmi, restrict_to_shared, v_measure)
from .perturb import (GreedyTrace, PuritySummary, SweepResult,
                      greedy_sequence, keyword_purity, shuffled_baseline,
                      single_removal_sweep, summarize_sweep)
from .topology import (PcaProjection, TopologyProfile, avg_neighbor_degree,
                       clustering_coefficient, degrees, pca_project,
                       topology_profile)
