"""Parallel (r,s) nucleus decomposition with clique listing, multi-level clique tables and bucketed peeling."""
from .bucketing import DenseBuckets, OpenBuckets, init_buckets, next_bucket, update_buckets
from .estimator import NucleusDecomposition, check_graph
from .exceptions import (BucketsExhausted, CliqueNotFoundError, ContractViolation, GraphParseError,
                         InvariantViolation, NucleusError, OracleCapExceeded, ParameterError,
                         TableConfigError)
from .graph import (DirectedGraph, Ordering, UndirectedGraph, contract, degeneracy_order, degree_order,
                    generate_gnp, generate_rmat, orient, parse_edge_list, read_edge_list, relabel,
                    write_edge_list)
from .listing import count_cliques, intersect, list_cliques, rec_list_cliques
from .aggregation import UpdateAggregator
from .oracle import brute_cliques, kcore_numbers, oracle_nucleus
from .peeling import PeelConfig, PeelResult, count_phase, fixed_point_scale, nucleus_decomposition, peel, prepare
from .table import CliqueTable, TableConfig, build_table

__version__ = "0.1.0"
