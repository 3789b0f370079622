"""diversim: dynamic network diversity as a moving-target defense, simulated.

Networks of computers run diversified software stacks; an attacker spreads
through phase-structured agents while the defender redeploys implementations
under one of five strategies. Ensembles are deterministic given a master
seed, and security metrics reduce the ensemble-mean traces.
"""
from .defense import DefenderSpec, Detector, InitialAlgo, SpecError, Strategy
from .diversity import (
    ColoringReport,
    DiversityConfig,
    color_flipping,
    count_defective_edges,
    degree_priority_assignment,
    random_coloring,
)
from .engine import (
    MeanTrace,
    NetworkFiles,
    PrebuiltNetwork,
    Scenario,
    SyntheticNetwork,
    Trace,
    final_snapshot,
    mean_of,
    monte_carlo,
    run,
)
from .netmodel import (
    CommGraph,
    ImplementationPool,
    Layer,
    NetworkError,
    VulnerabilityMap,
    assign_vulnerabilities,
    build_graph,
    generate_synthetic_network,
    load_network_files,
    read_edge_file,
    write_edge_file,
)
from .config import ConfigError, LoadedConfig, load_scenario
from .metrics import AecResult, AsdResult, aec, aoc, asd, awd, first_crossing, tts, vt
from .threat import (
    AttackerSpec,
    AttackPhase,
    CatalogError,
    ExploitCatalog,
    build_exploit_catalog,
    initial_compromise,
)

__version__ = "0.1.0"

__all__ = [
    "AecResult",
    "AsdResult",
    "AttackPhase",
    "AttackerSpec",
    "CatalogError",
    "ColoringReport",
    "CommGraph",
    "ConfigError",
    "DefenderSpec",
    "Detector",
    "DiversityConfig",
    "ExploitCatalog",
    "ImplementationPool",
    "InitialAlgo",
    "Layer",
    "LoadedConfig",
    "MeanTrace",
    "NetworkError",
    "NetworkFiles",
    "PrebuiltNetwork",
    "Scenario",
    "SpecError",
    "Strategy",
    "SyntheticNetwork",
    "Trace",
    "VulnerabilityMap",
    "aec",
    "aoc",
    "asd",
    "assign_vulnerabilities",
    "awd",
    "build_exploit_catalog",
    "build_graph",
    "color_flipping",
    "count_defective_edges",
    "degree_priority_assignment",
    "final_snapshot",
    "first_crossing",
    "generate_synthetic_network",
    "initial_compromise",
    "load_network_files",
    "load_scenario",
    "mean_of",
    "monte_carlo",
    "random_coloring",
    "read_edge_file",
    "run",
    "tts",
    "vt",
    "write_edge_file",
    "__version__",
]
