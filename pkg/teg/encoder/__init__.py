"""Graph embedder: single-layer GCN producing semantic coordinates."""
from teg.encoder.gcn import GcnConfig, NormalizedAdjacency, gcn_forward, init_gcn_params, normalize_adjacency

__all__ = ["GcnConfig", "NormalizedAdjacency", "gcn_forward", "init_gcn_params", "normalize_adjacency"]
