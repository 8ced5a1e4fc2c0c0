"""recover a daily transition matrix from a published multi-horizon table"""
import logging

import numpy as np

from estimation import EstimationError, StructureMask
from markovchain import STATES, make_matrix

logger = logging.getLogger(__name__)


class EmptySupportError(EstimationError):
    def __str__(self):
        return 'simplex projection needs a nonempty support'


class EmptyTableError(EstimationError):
    def __str__(self):
        return 'horizon table has no rows to fit'


class FitConfig:
    def __init__(self, fd_step=1e-7, armijo=1e-4, tolerance=1e-12, max_iterations=10000, damping=1e-3,
                 min_damping=1e-12, max_damping=1e16):
        self.fd_step = fd_step
        self.armijo = armijo
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.damping = damping
        self.min_damping = min_damping
        self.max_damping = max_damping

    def __str__(self):
        return 'fd_step: %g, armijo: %g, tolerance: %g, max_iterations: %d, damping: %g' % (
            self.fd_step, self.armijo, self.tolerance, self.max_iterations, self.damping)


class FitResult:
    def __init__(self, matrix, residual, iterations, converged, reason, residual_history):
        self.matrix = matrix
        self.residual = residual
        self.iterations = iterations
        self.converged = converged
        self.reason = reason
        self.residual_history = residual_history

    def __str__(self):
        return 'residual: %.6g, iterations: %d, converged: %s (%s)' % (self.residual, self.iterations,
                                                                       self.converged, self.reason)


def project_to_simplex(v, support=None):
    """Euclidean projection onto {x >= 0, sum(x) = 1, x = 0 off support}, sort-based."""
    v = np.asarray(v, dtype=float)
    support = np.ones(v.shape, dtype=bool) if support is None else np.asarray(support, dtype=bool)
    if not support.any():
        raise EmptySupportError()
    w = v[support]
    u = np.sort(w)[::-1]
    shifted = np.cumsum(u) - 1.0
    k = np.arange(1, len(u) + 1)
    rho = np.nonzero(u - shifted / k > 0)[0][-1]
    theta = shifted[rho] / (rho + 1)
    x = np.zeros(v.shape)
    x[support] = np.maximum(w - theta, 0.0)
    return x


class HorizonObjective:
    """Sum over horizons n and transitions (a, b) of (P^n(a, b) - table(n, a, b))^2."""

    def __init__(self, table, mask):
        self.horizons = table.horizons
        self.targets = table.values
        self.rows = np.array([int(a) for a, _ in table.transitions])
        self.columns = np.array([int(b) for _, b in table.transitions])
        self.mask = mask.allowed

    def residual_vectors(self, stack):
        """Residuals of every matrix in a (k, 6, 6) stack, horizon-major in table order."""
        return np.concatenate([np.linalg.matrix_power(stack, n)[:, self.rows, self.columns] - target
                               for n, target in zip(self.horizons, self.targets)], axis=1)

    def residual_vector(self, x):
        return self.residual_vectors(x[np.newaxis])[0]

    def residuals(self, stack):
        r = self.residual_vectors(stack)
        return (r * r).sum(axis=1)

    def value(self, x):
        return float(self.residuals(x[np.newaxis])[0])

    def moves(self, x):
        """(row, entry, pivot) triples that shift mass from the row's largest entry to another allowed entry.

        Moving along them keeps every row summing to one; rows with a single
        allowed entry have none.
        """
        moves = []
        for s in STATES:
            support = np.nonzero(self.mask[s])[0]
            if len(support) < 2:
                continue
            pivot = support[np.argmax(x[s, support])]
            moves.extend((int(s), int(b), int(pivot)) for b in support if b != pivot)
        return moves

    def jacobian(self, x, moves, step):
        """Central differences of the residual vector along each move, all evaluated as one stack."""
        k = len(moves)
        stack = np.repeat(x[np.newaxis], 2 * k, axis=0)
        for i, (s, b, pivot) in enumerate(moves):
            stack[i, s, b] += step
            stack[i, s, pivot] -= step
            stack[k + i, s, b] -= step
            stack[k + i, s, pivot] += step
        r = self.residual_vectors(stack)
        return ((r[:k] - r[k:]) / (2.0 * step)).T

    def project(self, x):
        return np.array([project_to_simplex(x[s], self.mask[s]) for s in STATES])

    def initial_point(self, start=None):
        if start is None:
            return self.mask / self.mask.sum(axis=1, keepdims=True)
        return self.project(np.array(start.entries))


def apply_moves(x, moves, delta):
    y = x.copy()
    for (s, b, pivot), t in zip(moves, delta):
        y[s, b] += t
        y[s, pivot] -= t
    return y


def damped_step(J, r, damping, scale):
    """Minimizer of |r + J d|^2 + damping * |diag(scale)^(1/2) d|^2, solved as a stacked least squares."""
    A = np.vstack([J, np.diag(np.sqrt(damping * scale))])
    rhs = np.concatenate([-r, np.zeros(J.shape[1])])
    return np.linalg.lstsq(A, rhs, rcond=None)[0]


def fit_matrix_from_horizons(table, mask=None, config=None, initial=None):
    """Projected descent fit of a masked stochastic matrix to a horizon table.

    Every iteration builds the finite-difference Jacobian of the residual
    vector along mass-preserving moves inside each row and takes the damped
    Gauss-Newton direction, which preconditions the gradient. The candidate is
    projected back onto the masked simplex and accepted only under the Armijo
    condition, so accepted residuals strictly decrease; a rejected candidate
    raises the damping tenfold, an accepted one lowers it tenfold. Entries at
    zero that the gradient would push negative are held for the iteration.

    The search starts from `initial` projected onto the mask, or from the
    row-uniform matrix over the mask.
    """
    mask = StructureMask.published() if mask is None else mask
    config = FitConfig() if config is None else config
    if not len(table):
        raise EmptyTableError()

    objective = HorizonObjective(table, mask)
    x = objective.initial_point(initial)
    r = objective.residual_vector(x)
    fx = float((r * r).sum())
    damping = config.damping
    history = [fx]
    converged = False
    reason = 'max-iterations'
    iterations = 0

    while iterations < config.max_iterations:
        if fx == 0.0:
            converged, reason = True, 'exact'
            break
        moves = objective.moves(x)
        J = objective.jacobian(x, moves, config.fd_step) if moves else np.zeros((len(r), 0))
        g = 2.0 * J.T.dot(r)
        keep = np.array([x[s, b] > 0.0 or g[i] < 0.0 for i, (s, b, _) in enumerate(moves)], dtype=bool)
        if not keep.any():
            converged, reason = True, 'stationary'
            break
        moves = [m for m, kept in zip(moves, keep) if kept]
        J, g = J[:, keep], g[keep]
        scale = np.maximum((J * J).sum(axis=0), config.fd_step ** 2)

        while True:
            delta = damped_step(J, r, damping, scale)
            candidate = objective.project(apply_moves(x, moves, delta))
            rc = objective.residual_vector(candidate)
            fc = float((rc * rc).sum())
            if fc < fx and fc <= fx + config.armijo * float(g.dot(delta)):
                break
            damping *= 10.0
            if damping > config.max_damping:
                candidate = None
                break
        if candidate is None:
            converged, reason = True, 'damping'
            break

        iterations += 1
        improvement = fx - fc
        previous = fx
        x, r, fx = candidate, rc, fc
        history.append(fx)
        damping = max(damping / 10.0, config.min_damping)
        if iterations % 100 == 0:
            logger.debug('Fit iteration %d: residual %.6g, damping %.3g', iterations, fx, damping)
        if improvement <= config.tolerance * max(previous, config.tolerance):
            converged, reason = True, 'tolerance'
            break

    logger.info('Horizon fit finished after %d iterations: residual %.6g (%s)', iterations, fx, reason)
    return FitResult(make_matrix(x), fx, iterations, converged, reason, history)
