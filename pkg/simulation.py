"""seeded Monte Carlo trajectories of the chain, checked against matrix powers"""
from concurrent.futures import ThreadPoolExecutor
import logging
import math

import numpy as np

from markovchain import STATES, StateId, evolve, point_mass

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
CHUNK_SIZE = 8192
SKIP_BELOW = 1e-12


class SimulationError(Exception):
    pass


def mix_seed(base_seed, index):
    """Seed of trajectory `index` in a cohort: SplitMix64 finalizer of base_seed + (index + 1) * golden gamma.

    Stable across versions; each trajectory then draws from numpy's PCG64 via default_rng(seed).
    """
    z = (int(base_seed) + (int(index) + 1) * GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class Trajectory:
    def __init__(self, states):
        self.states = tuple(StateId(s) for s in states)

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        return isinstance(other, Trajectory) and self.states == other.states

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return ''.join(s.label() for s in self.states)


class CohortResult:
    def __init__(self, horizon, start, n_trajectories, occupancy):
        self.horizon = horizon
        self.start = StateId(start)
        self.n_trajectories = n_trajectories
        self.occupancy = occupancy
        self.occupancy.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, CohortResult) and
                (self.horizon, self.start, self.n_trajectories) ==
                (other.horizon, other.start, other.n_trajectories) and
                np.array_equal(self.occupancy, other.occupancy))

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return 'cohort of %d from %s over %d days' % (self.n_trajectories, self.start.label(), self.horizon)

    def frequencies(self, day):
        return self.occupancy[day] / float(self.n_trajectories)


class ZScore:
    def __init__(self, day, state, frequency, analytic, z):
        self.day = day
        self.state = state
        self.frequency = frequency
        self.analytic = analytic
        self.z = z

    @property
    def skipped(self):
        return self.z is None

    def __str__(self):
        return 'day=%d state=%s frequency=%.6g analytic=%.6g z=%s' % (
            self.day, self.state.label(), self.frequency, self.analytic,
            'skipped' if self.skipped else '%.4g' % self.z)


class Sampler:
    """Inverse-CDF step over cumulative rows, states scanned in canonical order."""

    def __init__(self, P):
        self.cdf = np.cumsum(P.entries, axis=1)
        # a draw past a rounded-down last boundary lands on the row's last reachable state
        self.last_reachable = np.array([np.flatnonzero(P.entries[s] > 0.0)[-1] for s in STATES])

    def advance(self, states, draws):
        nxt = (draws[:, np.newaxis] >= self.cdf[states]).sum(axis=1)
        return np.minimum(nxt, self.last_reachable[states])


def _draws(seeds, horizon):
    draws = np.empty((len(seeds), horizon))
    for i, seed in enumerate(seeds):
        draws[i] = np.random.default_rng(seed).random(horizon)
    return draws


def simulate_trajectory(P, start, horizon, seed):
    if horizon < 0:
        raise SimulationError('horizon must be >= 0, got %d' % horizon)
    sampler = Sampler(P)
    draws = _draws([seed], horizon)
    states = np.array([int(StateId(start))])
    path = [int(states[0])]
    for day in range(horizon):
        states = sampler.advance(states, draws[:, day])
        path.append(int(states[0]))
    return Trajectory(path)


def _simulate_chunk(sampler, start, horizon, seeds):
    occupancy = np.zeros((horizon + 1, len(STATES)), dtype=np.int64)
    draws = _draws(seeds, horizon)
    states = np.full(len(seeds), int(start))
    occupancy[0] = np.bincount(states, minlength=len(STATES))
    for day in range(horizon):
        states = sampler.advance(states, draws[:, day])
        occupancy[day + 1] = np.bincount(states, minlength=len(STATES))
    return occupancy


def simulate_cohort(P, start, horizon, n, base_seed, workers=1):
    """n trajectories, trajectory i seeded with mix_seed(base_seed, i); counts are summed per chunk."""
    if n < 1:
        raise SimulationError('cohort needs at least one trajectory, got %d' % n)
    if horizon < 0:
        raise SimulationError('horizon must be >= 0, got %d' % horizon)
    start = StateId(start)
    sampler = Sampler(P)
    chunks = []
    for first in range(0, n, CHUNK_SIZE):
        chunks.append([mix_seed(base_seed, i) for i in range(first, min(first + CHUNK_SIZE, n))])

    def run(seeds):
        return _simulate_chunk(sampler, start, horizon, seeds)

    occupancy = np.zeros((horizon + 1, len(STATES)), dtype=np.int64)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for counts in executor.map(run, chunks):
                occupancy += counts
    else:
        for counts in map(run, chunks):
            occupancy += counts
    logger.info('Simulated %d trajectories from %s over %d days in %d chunks', n, start.label(), horizon,
                len(chunks))
    return CohortResult(horizon, start, n, occupancy)


def compare_empirical_analytic(result, P):
    """Per day and state, z = (freq - p) / sqrt(p (1 - p) / n) with p from the exact distribution.

    Cells with p below 1e-12 are skipped (z is None). A certain cell (p = 1) has zero
    variance: z is 0 when the frequency matches and infinite otherwise.
    """
    mu = point_mass(result.start)
    scores = []
    for day in range(result.horizon + 1):
        analytic = evolve(mu, P, day)
        freq = result.frequencies(day)
        for state in STATES:
            p = analytic[state]
            f = float(freq[state])
            if p < SKIP_BELOW:
                z = None
            elif p >= 1.0:
                z = 0.0 if f == p else math.copysign(float('inf'), f - p)
            else:
                z = (f - p) / math.sqrt(p * (1.0 - p) / result.n_trajectories)
            scores.append(ZScore(day, state, f, p, z))
    return scores
