"""
Modelo de random features.

- sample_basis(): pesos N(0, 1) y sesgos U(0, 2*pi) congelados
- feature_matrix(): matriz A con entradas phi(<h_k, w_j> + b_j)
- lasso_solve(): LASSO por coordinate descent cíclico con soft-thresholding
- lasso_path(): la grilla de lambda como camino con warm starts
- bic_score() / select_lambda(): elección de lambda por BIC sobre una grilla

El objetivo es ``w * ||Ac - z||^2 + lam * ||c||_1`` con ``w = 1`` o, con
``scaled=True``, ``w = 1 / (2n)``. La actualización de la coordenada j es
``c_j = S(rho_j, lam / (2w)) / ||a_j||^2``.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from numba import njit
from scipy.special import expit

from spade4.config.logging_config import log_run_event
from spade4.exceptions import DimensionMismatchError, DomainError, NonFiniteInputError
from spade4.models import (
    DEFAULT_LAMBDA_GRID,
    Activation,
    RandomFeatureBasis,
    SparseCoefficients,
)

RSS_FLOOR = 1e-30


def sample_basis(
    p: int, N: int, seed: int, activation: Activation = Activation.RELU
) -> RandomFeatureBasis:
    """
    Muestrear N vectores de pesos en R^p y N sesgos.

    Misma semilla, misma base: se usa un ``Generator`` propio, nunca el global.
    """
    if p < 1 or N < 1:
        raise DomainError(f"basis needs p >= 1 and N >= 1 (p={p}, N={N})")
    rng = np.random.default_rng(seed)
    weights = rng.standard_normal((N, p))
    biases = rng.uniform(0.0, 2.0 * np.pi, size=N)
    return RandomFeatureBasis(
        weights=weights, biases=biases, activation=Activation(activation), seed=seed
    )


def _activate(x: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.SIN:
        return np.sin(x)
    if activation is Activation.SIGMOID:
        return expit(x)
    return np.maximum(x, 0.0)


def feature_matrix(basis: RandomFeatureBasis, inputs) -> np.ndarray:
    """
    Evaluar los features sobre vectores de retardos.

    Args:
        basis: Base congelada
        inputs: Matriz (filas, p) o un único vector (p,)

    Returns:
        np.ndarray: (filas, N), o (N,) para un único vector

    Raises:
        DimensionMismatchError: la dimensión de los vectores no es p
    """
    h = np.asarray(inputs, dtype=float)
    if h.shape[-1] != basis.dim or h.ndim not in (1, 2):
        raise DimensionMismatchError(
            f"delay vectors of shape {h.shape} do not match basis dimension {basis.dim}"
        )
    return _activate(h @ basis.weights.T + basis.biases, basis.activation)


# ---------------------------------------------------------------------------
# LASSO
# ---------------------------------------------------------------------------

# Cada cuántos barridos sobre el conjunto activo se intenta el paso exacto.
FACE_EVERY = 20


@njit(cache=True)
def _sweep(A, c, r, col_sq, lam_eff, columns):
    max_delta = 0.0
    n = A.shape[0]
    for j in columns:
        if col_sq[j] == 0.0:
            continue
        old = c[j]
        rho = col_sq[j] * old
        for i in range(n):
            rho += A[i, j] * r[i]
        if rho > lam_eff:
            new = (rho - lam_eff) / col_sq[j]
        elif rho < -lam_eff:
            new = (rho + lam_eff) / col_sq[j]
        else:
            new = 0.0
        delta = new - old
        if delta != 0.0:
            for i in range(n):
                r[i] -= delta * A[i, j]
            c[j] = new
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


@njit(cache=True)
def _objective(r, c, weight, lam):
    return weight * np.sum(r * r) + lam * np.sum(np.abs(c))


@njit(cache=True)
def _face_step(A, z, c, r, columns, lam_eff, weight, lam):
    """
    Minimizar exactamente sobre la cara de signos actual.

    Con los signos s de los coeficientes no nulos fijos, el óptimo cumple
    ``A_S^T A_S x = A_S^T z - lam_eff * s``. Se avanza hacia x hasta el primer
    cambio de signo y el paso se acepta solo si baja el objetivo.
    """
    n = A.shape[0]
    k = 0
    for j in columns:
        if c[j] != 0.0:
            k += 1
    if k == 0 or k > n:
        return
    support = np.empty(k, dtype=np.int64)
    AS = np.empty((n, k))
    k = 0
    for j in columns:
        if c[j] != 0.0:
            support[k] = j
            for i in range(n):
                AS[i, k] = A[i, j]
            k += 1
    cS = c[support]
    s = np.sign(cS)

    # A_S = QR: R^T R x = R^T Q^T z - lam_eff s
    Q, R = np.linalg.qr(AS)
    shift = np.linalg.lstsq(np.ascontiguousarray(R.T), s)[0]
    y = Q.T @ z - lam_eff * shift
    x = np.linalg.lstsq(R, y)[0]
    if not np.all(np.isfinite(x)):
        return

    t_max = 1.0
    blocked = -1
    for q in range(k):
        if x[q] * s[q] < 0.0:
            t = cS[q] / (cS[q] - x[q])
            if t < t_max:
                t_max = t
                blocked = q
    candidate = cS + t_max * (x - cS)
    if blocked >= 0:
        candidate[blocked] = 0.0

    r_new = z - AS @ candidate
    before = _objective(r, c, weight, lam)
    after = weight * np.sum(r_new * r_new) + lam * (
        np.sum(np.abs(c)) - np.sum(np.abs(cS)) + np.sum(np.abs(candidate))
    )
    if after < before:
        for q in range(k):
            c[support[q]] = candidate[q]
        r[:] = r_new


@njit(cache=True)
def _coordinate_descent(A, z, c, lam_eff, weight, lam, tol, max_iter):
    n, N = A.shape
    col_sq = np.zeros(N)
    for j in range(N):
        acc = 0.0
        for i in range(n):
            acc += A[i, j] * A[i, j]
        col_sq[j] = acc

    r = z.copy()
    for j in range(N):
        if c[j] != 0.0:
            for i in range(n):
                r[i] -= A[i, j] * c[j]

    every = np.arange(N)
    history = np.empty(max_iter + 1)
    history[0] = _objective(r, c, weight, lam)
    n_iter = 0
    converged = False
    while n_iter < max_iter:
        # barrido completo: solo acá se declara la convergencia
        max_delta = _sweep(A, c, r, col_sq, lam_eff, every)
        n_iter += 1
        history[n_iter] = _objective(r, c, weight, lam)
        if max_delta < tol:
            converged = True
            break

        active = np.flatnonzero(c)
        inner = 0
        while n_iter < max_iter:
            if inner % FACE_EVERY == 0:
                _face_step(A, z, c, r, active, lam_eff, weight, lam)
            max_delta = _sweep(A, c, r, col_sq, lam_eff, active)
            n_iter += 1
            inner += 1
            history[n_iter] = _objective(r, c, weight, lam)
            if max_delta < tol:
                break
    return c, history[: n_iter + 1], n_iter, converged


def _check_problem(A: np.ndarray, z: np.ndarray, lam: float) -> None:
    if A.ndim != 2 or z.ndim != 1 or A.shape[0] != z.shape[0]:
        raise DimensionMismatchError(
            f"design {A.shape} and target {z.shape} are not compatible"
        )
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(z))):
        raise NonFiniteInputError("design matrix or target contains NaN or inf")


def _fit_weight(n: int, scaled: bool) -> float:
    return 1.0 / (2.0 * n) if scaled else 1.0


def coordinate_descent(
    A,
    z,
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    scaled: bool = False,
    c0: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, int, bool]:
    """
    Coordinate descent crudo, desde ``c0`` o desde cero.

    Returns:
        (c, historial del objetivo por barrido, barridos, convergió)
    """
    A = np.asfortranarray(A, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    _check_problem(A, z, lam)
    weight = _fit_weight(A.shape[0], scaled)
    if c0 is None:
        c = np.zeros(A.shape[1])
    else:
        c = np.array(c0, dtype=float)
        if c.shape != (A.shape[1],):
            raise DimensionMismatchError(
                f"warm start of shape {c.shape} does not match {A.shape[1]} columns"
            )
    return _coordinate_descent(
        A, z, c, lam / (2.0 * weight), weight, float(lam), float(tol), int(max_iter)
    )


def kkt_residual(A, z, c, lam: float, scaled: bool = False) -> float:
    """
    Máxima violación de las condiciones de optimalidad.

    Con ``g = 2w A^T (Ac - z)``: ``|g_j + lam*sign(c_j)|`` si c_j != 0 y
    ``max(|g_j| - lam, 0)`` si c_j = 0.
    """
    A = np.asarray(A, dtype=float)
    c = np.asarray(c, dtype=float)
    weight = _fit_weight(A.shape[0], scaled)
    g = 2.0 * weight * (A.T @ (A @ c - np.asarray(z, dtype=float)))
    active = c != 0.0
    violation = np.where(
        active, np.abs(g + lam * np.sign(c)), np.maximum(np.abs(g) - lam, 0.0)
    )
    return float(violation.max()) if violation.size else 0.0


def lasso_solve(
    A,
    z,
    lam: float,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    scaled: bool = False,
    c0: Optional[np.ndarray] = None,
) -> SparseCoefficients:
    """
    Resolver ``min w*||Ac - z||^2 + lam*||c||_1``.

    Alterna barridos completos con barridos sobre los coeficientes no nulos
    (más un paso exacto sobre la cara de signos actual) y converge cuando un
    barrido completo no mueve ninguna coordenada más que ``tol``. Si se agota
    ``max_iter`` el resultado se devuelve igual, marcado con ``converged=False``.

    Args:
        c0: Punto de arranque opcional (warm start)

    Raises:
        NonFiniteInputError: NaN o inf en A o z
        DimensionMismatchError: filas de A distintas del largo de z
    """
    c, history, n_iter, converged = coordinate_descent(
        A, z, lam, tol=tol, max_iter=max_iter, scaled=scaled, c0=c0
    )
    if not converged:
        logger.warning(
            f"Coordinate descent did not converge for lambda={lam:g} "
            f"after {n_iter} sweeps"
        )
    return SparseCoefficients(
        c=c,
        lam=lam,
        scaled=scaled,
        objective=float(history[-1]),
        kkt_residual=kkt_residual(A, z, c, lam, scaled),
        n_iter=n_iter,
        converged=converged,
    )


def bic_score(A, z, c: Union[SparseCoefficients, np.ndarray]) -> float:
    """``n ln(RSS/n) + nnz ln n``, con RSS acotado inferiormente por 1e-30."""
    coeffs = c if isinstance(c, SparseCoefficients) else SparseCoefficients(c=c, lam=0.0)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    residual = A @ coeffs.c - np.asarray(z, dtype=float)
    rss = max(float(residual @ residual), RSS_FLOOR)
    return n * np.log(rss / n) + coeffs.nnz * np.log(n)


def lasso_path(
    A,
    z,
    grid: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 100_000,
    scaled: bool = False,
) -> List[SparseCoefficients]:
    """
    Resolver la grilla de mayor a menor lambda, arrancando cada una desde la
    solución anterior.

    Returns:
        List[SparseCoefficients]: en el mismo orden que ``grid``
    """
    fits: List[Optional[SparseCoefficients]] = [None] * len(grid)
    c0 = None
    for i in sorted(range(len(grid)), key=lambda i: -grid[i]):
        fits[i] = lasso_solve(A, z, grid[i], tol, max_iter, scaled, c0=c0)
        c0 = fits[i].c
    return fits


def select_lambda(
    A,
    z,
    grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    scaled: bool = False,
    n_jobs: int = 1,
    warm_start: bool = True,
) -> Tuple[float, SparseCoefficients]:
    """
    Resolver el LASSO para cada lambda de la grilla y quedarse con el menor BIC.

    Con ``warm_start`` la grilla se recorre ordenada como un camino (serial);
    sin él cada lambda arranca desde c = 0 y se reparte con joblib en
    ``n_jobs`` workers. El puntaje de cada lambda no depende del orden en que
    viene la grilla. Empates de BIC van al lambda más grande.

    Returns:
        (lambda elegido, coeficientes)
    """
    grid = [float(lam) for lam in grid]
    if not grid:
        raise DomainError("lambda grid must be non-empty")
    A = np.asfortranarray(A, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)

    if warm_start:
        fits = lasso_path(A, z, grid, tol, max_iter, scaled)
    else:
        fits = Parallel(n_jobs=n_jobs)(
            delayed(lasso_solve)(A, z, lam, tol, max_iter, scaled) for lam in grid
        )
    scores = [bic_score(A, z, fit) for fit in fits]
    best = min(range(len(grid)), key=lambda i: (scores[i], -grid[i]))

    log_run_event(
        "lambda_selected",
        {
            "lambda": grid[best],
            "bic": round(float(scores[best]), 6),
            "nnz": fits[best].nnz,
            "n_features": A.shape[1],
            "converged": all(fit.converged for fit in fits),
        },
    )
    return grid[best], fits[best]
