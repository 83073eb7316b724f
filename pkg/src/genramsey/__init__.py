"""Constructive (F, q)-colorings of uniform hypergraphs, with verification and audits."""

from .audit import AuditReport, audit, j_degree_check
from .bes import bes_lower_bound, classify_regime, verify_color_class_span
from .coloring import (ListAssignment, PartialColoring, make_lists, read_witness, verify_coloring,
                       write_witness)
from .encoder import (BipartiteInstance, ConfigurationHypergraph, ConflictTracker, ForbiddenConfig,
                      SizeLimitError, budget, build_instance, conflicts_with, enumerate_H,
                      index_triples, is_forbidden, scaled_potential, spans_forbidden)
from .exact import exact_min_colors, exact_min_colors_list, export_cnf
from .greedy import GreedyConfig, colors_used, greedy_color
from .harness import fit_exponent, run_experiment
from .hypergraph import (CopySet, HostGraph, ParameterError, PatternGraph, RamseyParams,
                         complete_host, complete_pattern, enumerate_copies, parse_pattern)
from .lll import calibrate_constant, lll_budget, lll_parameters, moser_tardos_color

__version__ = "0.1.0"

__all__ = [
    "audit",
    "AuditReport",
    "j_degree_check",
    "bes_lower_bound",
    "classify_regime",
    "verify_color_class_span",
    "ListAssignment",
    "PartialColoring",
    "make_lists",
    "read_witness",
    "verify_coloring",
    "write_witness",
    "BipartiteInstance",
    "ConfigurationHypergraph",
    "ConflictTracker",
    "ForbiddenConfig",
    "SizeLimitError",
    "budget",
    "build_instance",
    "conflicts_with",
    "enumerate_H",
    "index_triples",
    "is_forbidden",
    "scaled_potential",
    "spans_forbidden",
    "exact_min_colors",
    "exact_min_colors_list",
    "export_cnf",
    "GreedyConfig",
    "colors_used",
    "greedy_color",
    "fit_exponent",
    "run_experiment",
    "CopySet",
    "HostGraph",
    "ParameterError",
    "PatternGraph",
    "RamseyParams",
    "complete_host",
    "complete_pattern",
    "enumerate_copies",
    "parse_pattern",
    "calibrate_constant",
    "lll_budget",
    "lll_parameters",
    "moser_tardos_color",
]
