"""Row builders behind ``adhoccap reproduce``.

Each builder returns ``(header, rows)`` ready for CSV emission. Table
builders carry the published reference values alongside the computed ones
so a run can be diffed at a glance.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .asymptotic import (PowerBudget, ReceiverKind, SystemConfig, TimingMode, achievable_diameter,
                         achievable_prob, capacity_for_diameter, diameter_map, max_load,
                         required_snr, throughput_curves)
from .geometry import Arena
from .simulator import SimConfig, run_monte_carlo

# (L, N, p analysis, p simulated, asymptotic diameter label)
TABLE_ROWS = {
    "table1": (ReceiverKind.DECORRELATOR, PowerBudget.max_snr(1e4), [
        (512, 60, 0.7773, 0.7472, "2"),
        (1024, 120, 0.7773, 0.7510, "2"),
        (64, 28, 0.6160, 0.5670, "3"),
        (128, 92, 0.3803, 0.3392, "4"),
        (128, 96, 0.3464, 0.3074, "4"),
        (128, 100, 0.3107, 0.2764, "4"),
        (64, 57, 0.1698, 0.1515, "7"),
    ]),
    "table2": (ReceiverKind.MMSE, PowerBudget.unlimited(), [
        (32, 38, 0.6056, 0.7491, "2"),
        (32, 39, 0.5415, 0.4886, "3"),
        (32, 42, 0.4024, 0.4330, "3/4"),
        (32, 45, 0.3137, 0.3260, "4"),
        (32, 46, 0.2913, 0.2983, "4"),
        (32, 48, 0.2537, 0.2590, "5"),
        (32, 57, 0.1546, 0.1584, "7"),
        (64, 78, 0.5415, 0.5490, "3"),
        (64, 74, 0.6814, 0.7482, "2"),
    ]),
    "table3": (ReceiverKind.MATCHED_FILTER, PowerBudget.unlimited(), [
        (1024, 44, 0.5117, 0.6107, "3"),
        (256, 31, 0.2246, 0.3093, "5"),
        (512, 144, 0.1037, 0.1127, "8"),
    ]),
}

CAPACITY_HEADER = ["series", "sweep_var", "alpha_max [users/dim]", "p [-]", "T [gain]",
                   "required_snr [ratio]"]


def _hist_text(hist: dict) -> str:
    return ";".join(f"{k}:{v:.2f}" for k, v in hist.items())


def table(name: str, arena: Arena, gamma: float = 5.0, trials: int = 100, seed: int = 0,
          simulate: bool = True, workers: Optional[int] = None):
    receiver, power, rows_in = TABLE_ROWS[name]
    cfg = SystemConfig(arena, receiver, TimingMode.SYNCHRONOUS, power, gamma)
    header = ["receiver", "L", "N", "alpha [users/dim]", "p_analysis [-]", "p_analysis_ref [-]",
              "p_sim [-]", "p_sim_ref [-]", "D_cont [hops]", "D_ceil [hops]", "D_ref",
              "D_sim_mode [hops]", "D_sim_hist", "D_sim_undirected_hist"]
    rows = []
    for idx, (L, N, p_ref, p_sim_ref, d_ref) in enumerate(rows_in):
        alpha = N / L
        p = achievable_prob(cfg, alpha)
        d_cont, d_ceil = achievable_diameter(cfg, alpha)
        p_sim = mode = math.nan
        hist = uhist = ""
        if simulate:
            # distinct stream per table row
            sim = run_monte_carlo(SimConfig(arena, receiver, gamma, power, L, N, trials,
                                            master_seed=seed + idx), workers=workers)
            p_sim, mode = sim.mean_link_prob, sim.modal_diameter
            hist, uhist = _hist_text(sim.diameter_histogram), _hist_text(sim.undirected_histogram)
        rows.append([receiver.value, L, N, alpha, p, p_ref, p_sim, p_sim_ref, d_cont, d_ceil,
                     d_ref, mode, hist, uhist])
    return header, rows


def fig6(arena: Arena, gamma: float = 5.0, snr_c: float = 1e4):
    """Capacity against link probability for the three receivers, with and
    without a power cap."""
    rows = []
    for power in (PowerBudget.unlimited(), PowerBudget.max_snr(snr_c)):
        for receiver in ReceiverKind:
            cfg = SystemConfig(arena, receiver, TimingMode.SYNCHRONOUS, power, gamma)
            for p in np.round(np.arange(0.05, 0.96, 0.05), 2):
                r = max_load(cfg, float(p))
                rows.append([f"{receiver.value}/snr_c={power}", float(p), r.alpha_max, p,
                             r.threshold_T, r.required_snr if r.required_snr else math.inf])
    return CAPACITY_HEADER, rows


def fig8(arena: Arena, max_D: int = 10):
    header = ["D [hops]", "d_r [m]", "p [-]", "T [gain]"]
    rows = []
    for D in range(1, max_D + 1):
        d_r, p, T = diameter_map(arena, D)
        rows.append([D, d_r, p, T])
    return header, rows


def fig9(arena: Arena, D: int, gamma: float = 5.0):
    """Capacity under a diameter constraint as the power cap grows."""
    rows = []
    for receiver in ReceiverKind:
        for snr_c in np.logspace(3, 6, 31):
            cfg = SystemConfig(arena, receiver, TimingMode.SYNCHRONOUS,
                               PowerBudget.max_snr(float(snr_c)), gamma)
            r = capacity_for_diameter(cfg, D)
            snr = required_snr(cfg, r.alpha_max, r.link_prob) if r.feasible else math.inf
            rows.append([f"{receiver.value}/D={D}", float(snr_c), r.alpha_max, r.link_prob,
                         r.threshold_T, snr])
    return CAPACITY_HEADER, rows


THROUGHPUT_HEADER = ["N [nodes/area]", "D_cont [hops]", "D_ceil [hops]", "thr_cdma_sync [R]",
                     "thr_cdma_async [R]", "thr_gk [R]"]


def throughput_rows(cfg: SystemConfig, n_values, L: int):
    return [[pt.n_per_area, pt.d_cont_sync, pt.d_ceil_sync, pt.cdma_sync, pt.cdma_async,
             pt.gupta_kumar]
            for pt in throughput_curves(cfg, n_values, L)]


def fig10(arena: Arena, gamma: float = 5.0, L: int = 32, n_max: int = 100):
    cfg = SystemConfig(arena, ReceiverKind.MMSE, TimingMode.SYNCHRONOUS, PowerBudget.unlimited(), gamma)
    return THROUGHPUT_HEADER, throughput_rows(cfg, range(2, n_max + 1), L)


TARGETS = ("table1", "table2", "table3", "fig6", "fig8", "fig9a", "fig9b", "fig10")
