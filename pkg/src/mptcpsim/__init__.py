"""Deterministic discrete-event simulator for a two-subflow MPTCP connection.

Six packet schedulers (minrtt, blest, ecf, rr, llhd, remp), seven congestion
controllers (cubic, lia, olia, balia, wvegas, bbr, cmpbbr), the five-family
scenario matrix, and the normalized-goodput score pipeline.
"""

from .engine import RngStream, SimEngine, derive_seed
from .links import SMSS, WIRE_OVERHEAD, PathConfig, Topology
from .metrics import (RunResult, ScoreTable, build_score_table, cca_scores,
                      ecdf, eccdf, goodput_mbps, per_packet_delay_ms, ps_score)
from .scenarios import RunMatrix, RunSpec, Scenario, load_matrix
from .simulation import RunSetup, Simulation
from .subflow import Subflow, allowed_send, initial_window

__version__ = "0.1.0"

__all__ = [
    "RngStream", "SimEngine", "derive_seed",
    "SMSS", "WIRE_OVERHEAD", "PathConfig", "Topology",
    "RunResult", "ScoreTable", "build_score_table", "cca_scores",
    "ecdf", "eccdf", "goodput_mbps", "per_packet_delay_ms", "ps_score",
    "RunMatrix", "RunSpec", "Scenario", "load_matrix",
    "RunSetup", "Simulation",
    "Subflow", "allowed_send", "initial_window",
]
