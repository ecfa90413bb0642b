"""Quasiparticle population dynamics.

The relative quasiparticle density x (number of QPs over number of Cooper
pairs) follows

    dx/dt = generation - trapping * x - recombination * x**2

with all three coefficients in 1/s and x dimensionless.  The same dynamics
is realized discretely as a birth-death chain on the QP number N: QPs are
created and recombine in pairs (broken/reformed Cooper pairs), while
trapping removes them one at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EVENT_PAIR_GENERATION = "pair-generation"
EVENT_SINGLE_LOSS = "single-loss"
EVENT_RECOMBINATION = "recombination"
EVENT_INJECTION = "injection"


@dataclass(frozen=True)
class QpKineticsParams:
    """Coefficients of the QP density rate equation.

    generation, trapping, recombination are in 1/s and act on the
    dimensionless density x; n_pairs is the Cooper-pair count used to map
    between x and the integer QP number N = x * n_pairs.
    """

    generation: float = 3.2e-4
    trapping: float = 8000.0
    recombination: float = 0.0
    n_pairs: float = 3.75e7

    def __post_init__(self):
        if self.generation < 0 or self.trapping < 0 or self.recombination < 0:
            raise ValueError("kinetics coefficients must be non-negative")
        if self.generation > 0 and self.trapping == 0 and self.recombination == 0:
            raise ValueError(
                "generation without trapping or recombination has no steady state"
            )
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be at least 1")


@dataclass(frozen=True)
class QpEventTrace:
    """Record of one sampled realization of the discrete QP population.

    times are strictly increasing event times in seconds, kinds are event
    labels (EVENT_* constants), counts[i] is N immediately after event i.
    """

    initial_count: int
    duration: float
    times: np.ndarray
    kinds: tuple[str, ...]
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def count_at(self, t: float) -> int:
        """QP number at time t (initial count before the first event)."""
        i = int(np.searchsorted(self.times, t, side="right"))
        return self.initial_count if i == 0 else int(self.counts[i - 1])


def steady_state(params: QpKineticsParams) -> float:
    """Non-negative root of generation - trapping*x - recombination*x**2."""
    g, s, r = params.generation, params.trapping, params.recombination
    if s == 0.0 and r == 0.0:
        if g > 0.0:
            raise ValueError("no steady state: generation with no removal")
        return 0.0
    # stable form of the quadratic root; no cancellation for small r
    return 2.0 * g / (s + math.sqrt(s * s + 4.0 * r * g))


def relaxation_time(params: QpKineticsParams, x_steady: float) -> float:
    """Exponential time constant 1/(trapping + 2*recombination*x_steady).

    x_steady should be the output of steady_state(params); the linearized
    return-to-steady-state rate does not distinguish the two removal
    channels beyond this combination.
    """
    rate = params.trapping + 2.0 * params.recombination * x_steady
    if rate == 0.0:
        raise ValueError("relaxation rate is zero: density never relaxes")
    return 1.0 / rate


def exponential_relaxation(x0: float, x_steady: float, tau: float, t) -> float | np.ndarray:
    """Closed-form linearized recovery x_steady + (x0 - x_steady)*exp(-t/tau)."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    return x_steady + (x0 - x_steady) * np.exp(-np.asarray(t, dtype=float) / tau)


def _xdot(x: float, g: float, s: float, r: float) -> float:
    return g - s * x - r * x * x


def evolve_ode(x0: float, params: QpKineticsParams, t_grid) -> np.ndarray:
    """Integrate the density rate equation on t_grid with fixed-step RK4.

    The step is capped at 1/100 of the fastest linearized time scale so
    results are bit-reproducible; returns x at each grid time (the first
    grid point gets x0 exactly when the grid starts at the initial time).
    """
    if x0 < 0.0:
        raise ValueError("initial density must be non-negative")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")

    g, s, r = params.generation, params.trapping, params.recombination
    # fastest local rate over the reachable range [0, max(x0, x_steady)]
    try:
        x_ref = max(x0, steady_state(params))
    except ValueError:
        x_ref = x0
    rate_ref = s + 2.0 * r * x_ref
    h_max = (1.0 / rate_ref) / 100.0 if rate_ref > 0.0 else math.inf

    out = np.empty_like(t_grid)
    x = float(x0)
    t = float(t_grid[0])
    out[0] = x
    for i in range(1, len(t_grid)):
        span = float(t_grid[i]) - t
        n_sub = max(1, math.ceil(span / h_max)) if math.isfinite(h_max) else 1
        h = span / n_sub
        for _ in range(n_sub):
            k1 = _xdot(x, g, s, r)
            k2 = _xdot(x + 0.5 * h * k1, g, s, r)
            k3 = _xdot(x + 0.5 * h * k2, g, s, r)
            k4 = _xdot(x + h * k3, g, s, r)
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if x < 0.0:
                x = 0.0
        t = float(t_grid[i])
        out[i] = x
    return out


def sample_birth_death(
    n0: int,
    params: QpKineticsParams,
    duration: float,
    rng: np.random.Generator,
    injections=(),
) -> QpEventTrace:
    """Exact-jump sampling of the discrete QP number over [0, duration].

    Propensities: pair generation at generation*n_pairs/2 (N += 2), single
    loss at trapping*N (N -= 1), recombination at
    recombination*N*(N-1)/(2*n_pairs) (N -= 2).  The ensemble mean of
    N/n_pairs obeys the continuous rate equation in the large-N limit.
    injections is an optional sequence of (time, count) pairs applied
    instantaneously, recorded as their own events.
    """
    if n0 < 0:
        raise ValueError("initial count must be non-negative")
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    g, s, r = params.generation, params.trapping, params.recombination
    ncp = params.n_pairs
    gen_prop = 0.5 * g * ncp

    inj = sorted((float(t), int(c)) for t, c in injections)
    for t_inj, _ in inj:
        if not 0.0 <= t_inj <= duration:
            raise ValueError("injection outside simulated interval")

    times: list[float] = []
    kinds: list[str] = []
    counts: list[int] = []
    n = int(n0)
    t = 0.0
    i_inj = 0
    while True:
        loss_prop = s * n
        rec_prop = r * n * (n - 1) / (2.0 * ncp)
        total = gen_prop + loss_prop + rec_prop
        if total > 0.0:
            dt = rng.exponential(1.0 / total)
        else:
            dt = math.inf
        if i_inj < len(inj) and t + dt >= inj[i_inj][0]:
            t = inj[i_inj][0]
            n += inj[i_inj][1]
            times.append(t)
            kinds.append(EVENT_INJECTION)
            counts.append(n)
            i_inj += 1
            continue
        if t + dt >= duration:
            break
        t += dt
        u = rng.random() * total
        if u < gen_prop:
            n += 2
            kinds.append(EVENT_PAIR_GENERATION)
        elif u < gen_prop + loss_prop:
            n -= 1
            kinds.append(EVENT_SINGLE_LOSS)
        else:
            n -= 2
            kinds.append(EVENT_RECOMBINATION)
        times.append(t)
        counts.append(n)

    return QpEventTrace(
        initial_count=int(n0),
        duration=float(duration),
        times=np.asarray(times, dtype=float),
        kinds=tuple(kinds),
        counts=np.asarray(counts, dtype=np.int64),
    )


def stationary_distribution(params: QpKineticsParams, n_max: int = 50) -> np.ndarray:
    """Stationary law of the birth-death chain truncated to N <= n_max.

    Solves pi Q = 0 for the generator of the chain used by
    sample_birth_death (pair births, single losses, pair recombinations),
    with births suppressed where they would overflow the truncation.
    Intended as a small-matrix oracle for tests at desk scale.
    """
    g, s, r = params.generation, params.trapping, params.recombination
    ncp = params.n_pairs
    size = n_max + 1
    q = np.zeros((size, size))
    for n in range(size):
        if n + 2 <= n_max:
            q[n, n + 2] += 0.5 * g * ncp
        if n >= 1:
            q[n, n - 1] += s * n
        if n >= 2:
            q[n, n - 2] += r * n * (n - 1) / (2.0 * ncp)
        q[n, n] = -q[n].sum()
    # replace last balance equation with normalization
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi[pi < 0] = 0.0
    return pi / pi.sum()
