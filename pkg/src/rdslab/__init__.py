"""Network sampling laboratory for respondent-driven sampling on partially directed networks."""

from .network import (
    EdgeBlockCounts,
    NetworkStats,
    PartiallyDirectedNetwork,
    block_edge_counts,
    edge_ratio_in,
    in_degree,
    network_stats,
    out_degree,
    partial_in_degree,
    read_network,
    write_network,
)

__version__ = "0.1.0"
