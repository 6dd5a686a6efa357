"""Capacity analysis of delay-constrained CDMA ad hoc networks."""

__version__ = "0.1.0"

from .asymptotic import (CapacityResult, PowerBudget, ReceiverKind, SystemConfig, ThroughputPoint,
                         TimingMode, achievable_diameter, achievable_prob, capacity_for_diameter,
                         diameter_map, max_load, required_snr, throughput_curves)
from .geometry import Arena, DistanceModel, PathLossModel
from .simulator import InterfererPolicy, SimConfig, SimSummary, run_monte_carlo

__all__ = [
    "Arena", "CapacityResult", "DistanceModel", "InterfererPolicy", "PathLossModel", "PowerBudget",
    "ReceiverKind", "SimConfig", "SimSummary", "SystemConfig", "ThroughputPoint", "TimingMode",
    "achievable_diameter", "achievable_prob", "capacity_for_diameter", "diameter_map", "max_load",
    "required_snr", "run_monte_carlo", "throughput_curves",
]
