"""Finite-network Monte Carlo: random placement, per-pair SIR, feasibility
graph and hop diameter, repeated over independent trials.

Node ``i`` transmitting to node ``r`` is scored with the large-system SIR
formula of the chosen receiver, using the actual gains of the other nodes
as interference. Unit-weight shortest paths are found by breadth-first
expansion of the reachability matrix.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .asymptotic import PowerBudget, ReceiverKind
from .geometry import Arena
from .numerics import ConvergenceError

DISCONNECTED = math.inf

MMSE_REL_TOL = 1e-10
MMSE_MAX_ITER = 500


class InterfererPolicy(enum.Enum):
    INCLUDE_RECEIVER = "include"
    EXCLUDE_RECEIVER = "exclude"


@dataclass(frozen=True)
class SimConfig:
    arena: Arena = field(default_factory=Arena)
    receiver: ReceiverKind = ReceiverKind.MMSE
    gamma: float = 5.0
    power: PowerBudget = field(default_factory=PowerBudget)
    L: int = 32
    N: int = 38
    trials: int = 100
    master_seed: int = 0
    interferer_policy: InterfererPolicy = InterfererPolicy.EXCLUDE_RECEIVER

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need at least 2 nodes, got N={self.N}")
        if self.L < 1:
            raise ValueError(f"spreading gain must be >= 1, got L={self.L}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def alpha(self) -> float:
        return self.N / self.L


@dataclass(frozen=True)
class Placement:
    positions: np.ndarray  # (N, 2), metres


@dataclass(frozen=True)
class TrialOutcome:
    link_prob_hat: float
    diameter: float  # hop count, or DISCONNECTED
    feasible_link_count: int
    undirected_diameter: float = DISCONNECTED
    max_mmse_residual: float = 0.0


@dataclass
class SimSummary:
    mean_link_prob: float
    diameter_histogram: dict
    trials_run: int
    undirected_histogram: dict = field(default_factory=dict)
    outcomes: list = field(default_factory=list)

    @property
    def modal_diameter(self) -> float:
        return max(self.diameter_histogram.items(), key=lambda kv: (kv[1], -kv[0]))[0]


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream per trial, derived from ``(master_seed, trial_index)``."""
    return np.random.default_rng(np.random.SeedSequence([master_seed & (2**64 - 1), trial_index]))


def place_nodes(cfg: SimConfig, trial_index: int) -> Placement:
    if not 0 <= trial_index < cfg.trials:
        raise ValueError(f"trial_index {trial_index} outside [0, {cfg.trials})")
    rng = trial_rng(cfg.master_seed, trial_index)
    return Placement(rng.uniform(0.0, cfg.arena.b, size=(cfg.N, 2)))


def distance_matrix(pl: Placement) -> np.ndarray:
    diff = pl.positions[:, None, :] - pl.positions[None, :, :]
    return np.sqrt((diff**2).sum(-1))


def gain_matrix(a: Arena, pl: Placement) -> np.ndarray:
    """Symmetric free-space gains ``lambda**2/d**2``, clamped at 1.

    Pairs closer than ``d_m`` (coincident nodes included) sit at the clamp.
    The diagonal is zero.
    """
    d = distance_matrix(pl)
    with np.errstate(divide="ignore"):
        h = np.minimum(a.lam**2 / d**2, a.delta_m**-2)
    np.fill_diagonal(h, 0.0)
    return h


def interferer_gains(gains: np.ndarray, policy: InterfererPolicy) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair interferer gains ``hj[i, r, j] = h_jr`` and the matching 0/1 mask.

    Node ``i`` never interferes with its own transmission. Under
    ``EXCLUDE_RECEIVER`` the receiver is left out as well. ``INCLUDE_RECEIVER``
    keeps ``N - 1`` interferer slots; the receiver's own slot, having no
    physical path gain to itself, carries the mean gain of the other
    interferers.
    """
    n = gains.shape[0]
    idx = np.arange(n)
    mask = np.ones((n, n, n))
    mask[idx, :, idx] = 0.0
    mask[:, idx, idx] = 0.0
    hj = np.broadcast_to(gains.T[None, :, :], (n, n, n)) * mask
    if policy is InterfererPolicy.INCLUDE_RECEIVER and n > 2:
        hj = hj.copy()
        mean_other = hj.sum(-1) / (n - 2)
        ii, rr = np.meshgrid(idx, idx, indexing="ij")
        hj[ii, rr, rr] = mean_other
        mask[ii, rr, rr] = 1.0
        mask[idx, idx, idx] = 0.0
        hj[idx, idx, idx] = 0.0
    return hj, mask


def _interferer_count(n: int, policy: InterfererPolicy) -> int:
    if policy is InterfererPolicy.INCLUDE_RECEIVER and n > 2:
        return n - 1
    return n - 2


def mf_sir(gains: np.ndarray, L: int, inv_snr: float, policy: InterfererPolicy) -> np.ndarray:
    n = gains.shape[0]
    # column r sums every h_jr; drop the desired link (the diagonal is zero)
    interference = gains.sum(axis=0)[None, :] - gains
    if policy is InterfererPolicy.INCLUDE_RECEIVER and n > 2:
        interference = interference * (n - 1) / (n - 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        sir = gains / (inv_snr + interference / L)
    return np.where(gains > 0, sir, 0.0)


def decorrelator_sir(gains: np.ndarray, alpha: float, inv_snr: float) -> np.ndarray:
    if alpha >= 1:
        return np.zeros_like(gains)
    if inv_snr == 0:
        return np.where(gains > 0, np.inf, 0.0)
    return gains * (1.0 - alpha) / inv_snr


def mmse_rhs(x: np.ndarray, gains: np.ndarray, hj: np.ndarray, mask: np.ndarray,
             L: int, inv_snr: float) -> np.ndarray:
    """Right-hand side of the MMSE SIR fixed point for every pair."""
    hi = gains[:, :, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(mask > 0, hi * hj / (hi + hj * x[:, :, None]), 0.0)
        return gains / (inv_snr + terms.sum(-1) / L)


def mmse_sir(gains: np.ndarray, L: int, inv_snr: float, policy: InterfererPolicy,
             rel_tol: float = MMSE_REL_TOL, max_iter: int = MMSE_MAX_ITER):
    """Solve ``x = h / (1/SNR + (1/L) sum_j h h_j / (h + h_j x))`` for every pair.

    Written as ``G(x) = x/SNR + (1/L) sum_j h h_j x/(h + h_j x) - h = 0``, the
    residual is increasing and concave in ``x``; Newton steps from ``x = 0``
    climb monotonically to the root (the first step is the matched-filter
    SIR). With unlimited power and no more interferers than ``L``, the root
    does not exist and the SIR is infinite.

    Returns ``(sir, max_relative_residual)``.
    """
    n = gains.shape[0]
    hj, w = interferer_gains(gains, policy)
    hi = gains[:, :, None]
    active = gains > 0
    x = np.zeros_like(gains)
    unbounded = np.zeros_like(active)
    if inv_snr == 0 and _interferer_count(n, policy) <= L:
        # sum_j h_j x/(h + h_j x) < #interferers/L <= 1 for all x: no finite root
        unbounded = active.copy()
    todo = active & ~unbounded

    converged = False
    for _ in range(max_iter):
        xs = x[:, :, None]
        den = hi + hj * xs
        with np.errstate(divide="ignore", invalid="ignore"):
            g = inv_snr * x + np.where(w > 0, hi * hj * xs / den, 0.0).sum(-1) / L - gains
            dg = inv_snr + np.where(w > 0, hi * hi * hj / den**2, 0.0).sum(-1) / L
            step = np.where(todo, -g / dg, 0.0)
        x_new = x + step
        done = np.abs(step) <= rel_tol * np.abs(x_new)
        x = x_new
        if np.all(done | ~todo):
            converged = True
            break
    if not converged:
        bad = np.argwhere(todo & ~(np.abs(step) <= rel_tol * np.abs(x)))
        i, r = bad[0]
        raise ConvergenceError(f"MMSE fixed point did not converge for pair ({i}, {r})", float(x[i, r]))

    sir = np.where(unbounded, np.inf, np.where(active, x, 0.0))
    residual = 0.0
    if np.any(todo):
        rhs = mmse_rhs(x, gains, hj, w, L, inv_snr)
        residual = float(np.max(np.abs(x[todo] - rhs[todo]) / x[todo]))
    return sir, residual


def sir_matrix(cfg: SimConfig, gains: np.ndarray):
    """SIR of every ordered transmission ``i -> r`` (entry ``[i, r]``).

    Returns ``(sir, max_mmse_residual)``; the residual is 0 for non-MMSE receivers.
    """
    inv_snr = cfg.power.inv_snr
    if cfg.receiver is ReceiverKind.MATCHED_FILTER:
        sir = mf_sir(gains, cfg.L, inv_snr, cfg.interferer_policy)
        res = 0.0
    elif cfg.receiver is ReceiverKind.DECORRELATOR:
        sir = decorrelator_sir(gains, cfg.alpha, inv_snr)
        res = 0.0
    else:
        sir, res = mmse_sir(gains, cfg.L, inv_snr, cfg.interferer_policy)
    sir = sir.copy()
    np.fill_diagonal(sir, 0.0)
    return sir, res


def feasibility_graph(sirs: np.ndarray, gamma: float, a: Arena, pl: Placement) -> np.ndarray:
    """Directed adjacency: ``i -> r`` when the SIR target is met outside the near field."""
    adj = (sirs >= gamma) & (distance_matrix(pl) >= a.d_m)
    np.fill_diagonal(adj, False)
    return adj


def hop_diameter(adj: np.ndarray) -> float:
    """Longest shortest-path hop count over ordered pairs, or ``DISCONNECTED``."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    # float products go through BLAS; entries count paths, only > 0 matters
    step = adj.astype(np.float64)
    reach = np.eye(n, dtype=bool)
    for hops in range(1, n):
        grown = reach | ((reach.astype(np.float64) @ step) > 0)
        if grown.all():
            return hops
        if np.array_equal(grown, reach):
            return DISCONNECTED
        reach = grown
    return DISCONNECTED


def run_trial(cfg: SimConfig, trial_index: int) -> TrialOutcome:
    pl = place_nodes(cfg, trial_index)
    gains = gain_matrix(cfg.arena, pl)
    try:
        sirs, residual = sir_matrix(cfg, gains)
    except ConvergenceError as exc:
        raise ConvergenceError(f"trial {trial_index}: {exc}", exc.best_estimate) from exc
    adj = feasibility_graph(sirs, cfg.gamma, cfg.arena, pl)
    n = cfg.N
    count = int(adj.sum())
    return TrialOutcome(
        link_prob_hat=count / (n * (n - 1)),
        diameter=hop_diameter(adj),
        feasible_link_count=count,
        undirected_diameter=hop_diameter(adj & adj.T),
        max_mmse_residual=residual,
    )


def summarize(outcomes: list[TrialOutcome]) -> SimSummary:
    """Merge trial outcomes; the result does not depend on their order."""
    n = len(outcomes)
    directed = Counter(o.diameter for o in outcomes)
    undirected = Counter(o.undirected_diameter for o in outcomes)
    return SimSummary(
        mean_link_prob=math.fsum(o.link_prob_hat for o in outcomes) / n,
        diameter_histogram={k: directed[k] / n for k in sorted(directed)},
        trials_run=n,
        undirected_histogram={k: undirected[k] / n for k in sorted(undirected)},
        outcomes=list(outcomes),
    )


def run_monte_carlo(cfg: SimConfig, workers: Optional[int] = None) -> SimSummary:
    """Run ``cfg.trials`` independent trials and aggregate them.

    ``workers > 1`` spreads trials over processes; results are identical to
    the serial run because each trial owns its random stream.
    """
    indices = range(cfg.trials)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_trial, [cfg] * cfg.trials, indices))
    else:
        outcomes = [run_trial(cfg, t) for t in indices]
    return summarize(outcomes)
