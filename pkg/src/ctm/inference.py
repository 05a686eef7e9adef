"""Per-document variational inference for the correlated topic model.

Coordinate ascent on the document ELBO: closed-form updates for the
auxiliary bound parameter and the topic-assignment rows, conjugate gradient
for the Gaussian means, safeguarded Newton for the Gaussian variances.
"""

from __future__ import annotations

import numpy as np

from .model import CtmModel, VariationalState
from .numerics import log_sum_exp

_LOG_2PI = np.log(2.0 * np.pi)

GRAD_TOL_LAMBDA = 1e-5
GRAD_TOL_NU2 = 1e-8
ARMIJO_C = 1e-4
MAX_LINE_SEARCH = 200


class UnmodelableWordError(ValueError):
    """A document word has zero probability under every topic."""


def _doc_arrays(doc):
    ids = np.asarray(doc.term_ids, dtype=int)
    counts = np.asarray(doc.counts, dtype=float)
    return ids, counts, float(counts.sum()) if counts.size else 0.0


def update_zeta(lam, nu2) -> float:
    """Closed-form maximizer of the Taylor-bound parameter: sum exp(lam + nu2/2)."""
    return float(np.exp(update_log_zeta(lam, nu2)))


def update_log_zeta(lam, nu2) -> float:
    return log_sum_exp(np.asarray(lam) + np.asarray(nu2) / 2.0)


def update_phi(lam, doc, model: CtmModel) -> np.ndarray:
    """Row-normalized assignment probabilities: phi_{w,i} ∝ exp(lam_i) beta_{i,w}."""
    ids, _, _ = _doc_arrays(doc)
    log_phi = lam[None, :] + model.log_topics[:, ids].T
    row_max = np.max(log_phi, axis=1)
    if np.any(np.isneginf(row_max)):
        bad = ids[np.isneginf(row_max)][0]
        raise UnmodelableWordError(f"term {bad} has zero probability in every topic")
    log_phi -= row_max[:, None]
    phi = np.exp(log_phi)
    phi /= phi.sum(axis=1, keepdims=True)
    return phi


def elbo(doc, model: CtmModel, state: VariationalState) -> float:
    """The document lower bound at the given variational parameters."""
    k = model.K
    ids, counts, n = _doc_arrays(doc)
    sigma_inv = model.sigma.inverse()
    lam, nu2, phi = state.lam, state.nu2, state.phi

    dm = lam - model.mu
    gauss = (
        -0.5 * model.sigma.logdet()
        - 0.5 * k * _LOG_2PI
        - 0.5 * (nu2 @ np.diag(sigma_inv) + dm @ sigma_inv @ dm)
    )

    if n > 0:
        ratio = np.exp(update_log_zeta(lam, nu2) - state.log_zeta)
        assign = counts @ (phi @ lam) - n * (ratio - 1.0 + state.log_zeta)
        logb = model.log_topics[:, ids].T
        with np.errstate(invalid="ignore", divide="ignore"):
            words = counts @ np.sum(np.where(phi > 0, phi * logb, 0.0), axis=1)
            phi_ent = -counts @ np.sum(
                np.where(phi > 0, phi * np.log(phi), 0.0), axis=1
            )
    else:
        assign = words = phi_ent = 0.0

    gauss_ent = 0.5 * np.sum(np.log(nu2) + _LOG_2PI + 1.0)
    value = gauss + assign + words + gauss_ent + phi_ent
    if not np.isfinite(value):
        raise ValueError("ELBO is not finite")
    return float(value)


def _lambda_objective(lam, mu, sigma_inv, half_nu2, s, n, log_zeta):
    dm = lam - mu
    ex = lam + half_nu2
    m = ex.max()
    lse = m + np.log(np.exp(ex - m).sum())
    if lse - log_zeta > 700.0:
        return -np.inf
    return float(-0.5 * dm @ (sigma_inv @ dm) + s @ lam - n * np.exp(lse - log_zeta))


def _lambda_gradient(lam, mu, sigma_inv, half_nu2, s, n, log_zeta):
    return (
        -sigma_inv @ (lam - mu)
        + s
        - n * np.exp(np.minimum(lam + half_nu2 - log_zeta, 700.0))
    )


def update_lambda(state: VariationalState, doc, model: CtmModel,
                  max_iters: int = 1000) -> tuple[np.ndarray, bool]:
    """Maximize the bound over the Gaussian means by Polak-Ribiere CG.

    Backtracking Armijo line search with an adaptive initial step, restart
    every K iterations; returns (lambda, degraded) where degraded marks a
    line-search failure.
    """
    k = model.K
    ids, counts, n = _doc_arrays(doc)
    sigma_inv = model.sigma.inverse()
    s = counts @ state.phi if counts.size else np.zeros(k)
    args = (model.mu, sigma_inv, state.nu2 / 2.0, s, n, state.log_zeta)

    mu, sigma_inv, half_nu2, _, _, log_zeta = args
    lam = state.lam.copy()
    f = _lambda_objective(lam, *args)
    g = _lambda_gradient(lam, *args)
    d = g.copy()
    degraded = False
    for it in range(max_iters):
        if np.max(np.abs(g)) <= GRAD_TOL_LAMBDA:
            break
        slope = float(g @ d)
        if slope <= 0:
            d = g.copy()
            slope = float(g @ g)
            if slope <= 0:
                break
        # Exact step for the local quadratic model (the Hessian is analytic:
        # -sigma_inv - diag(n exp(lam + nu2/2 - log zeta))), then Armijo.
        ex = n * np.exp(np.minimum(lam + half_nu2 - log_zeta, 700.0))
        curvature = float(d @ (sigma_inv @ d) + (ex * d) @ d)
        t = slope / curvature if curvature > 0 else 1.0
        accepted = False
        for _ in range(MAX_LINE_SEARCH):
            f_new = _lambda_objective(lam + t * d, *args)
            if f_new >= f + ARMIJO_C * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if np.array_equal(d, g):
                degraded = True
                break
            d = g.copy()
            continue
        lam_new = lam + t * d
        g_new = _lambda_gradient(lam_new, *args)
        if (it + 1) % k == 0:
            beta = 0.0
        else:
            beta = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        d = g_new + beta * d
        lam, g, f = lam_new, g_new, f_new
    else:
        degraded = True
    return lam, degraded


def _nu2_grad(v, sinv_ii, lam_i, n, log_zeta):
    """Derivative of the bound wrt a single variational variance coordinate."""
    return (
        -0.5 * sinv_ii
        - 0.5 * n * np.exp(np.minimum(lam_i + v / 2.0 - log_zeta, 700.0))
        + 0.5 / v
    )


def update_nu2(state: VariationalState, doc, model: CtmModel) -> np.ndarray:
    """Per-coordinate root of the variance stationarity condition.

    The gradient is strictly decreasing in each nu2_i, so the root is unique;
    Newton steps fall back to bisection whenever they leave the bracket.
    All K coordinates are iterated in lockstep.
    """
    _, _, n = _doc_arrays(doc)
    sinv = np.diag(model.sigma.inverse())
    lam, log_zeta = state.lam, state.log_zeta
    lo = np.full(model.K, 1e-10)
    hi = np.full(model.K, 1e10)
    v = np.clip(state.nu2, lo, hi)
    done = np.zeros(model.K, dtype=bool)
    for _ in range(200):
        g = _nu2_grad(v, sinv, lam, n, log_zeta)
        done |= np.abs(g) <= GRAD_TOL_NU2
        if done.all():
            break
        lo = np.where(~done & (g > 0), v, lo)
        hi = np.where(~done & (g <= 0), v, hi)
        gp = (
            -0.25 * n * np.exp(np.minimum(lam + v / 2.0 - log_zeta, 700.0))
            - 0.5 / v**2
        )
        step = v - g / gp
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        step = np.where(bad, 0.5 * (lo + hi), step)
        v = np.where(done, v, step)
    return v


def initial_state(doc, model: CtmModel) -> VariationalState:
    """Prior-centered start: lam = mu, nu2 from the prior diagonal, uniform phi."""
    ids, _, _ = _doc_arrays(doc)
    lam = model.mu.copy()
    nu2 = np.clip(np.diag(model.sigma.entries), 1e-4, 10.0)
    phi = np.full((len(ids), model.K), 1.0 / model.K)
    return VariationalState(lam, nu2, phi, update_log_zeta(lam, nu2))


def infer_document(
    doc,
    model: CtmModel,
    init: VariationalState | None = None,
    rel_tol: float = 1e-6,
    max_iters: int = 500,
    update_trace: list | None = None,
) -> VariationalState:
    """Coordinate ascent to convergence of the document bound.

    Update order per iteration: zeta, phi, zeta, lambda, zeta, nu2 (the
    auxiliary parameter is refreshed between blocks). Stops when the
    relative bound change drops below ``rel_tol``. Deterministic.

    When ``update_trace`` is a list, the bound value after every individual
    update is appended to it (used by monotonicity checks).
    """
    if init is None:
        state = initial_state(doc, model)
        if len(doc.term_ids):
            state.phi = update_phi(state.lam, doc, model)
    else:
        state = VariationalState(
            init.lam.copy(), init.nu2.copy(),
            np.full((len(doc.term_ids), model.K), 1.0 / model.K),
            update_log_zeta(init.lam, init.nu2),
        )
        state.phi = update_phi(state.lam, doc, model)

    def record():
        if update_trace is not None:
            update_trace.append(elbo(doc, model, state))

    degraded = False
    prev = elbo(doc, model, state)
    converged = False
    for _ in range(max_iters):
        state.log_zeta = update_log_zeta(state.lam, state.nu2)
        record()
        state.phi = update_phi(state.lam, doc, model)
        record()
        state.log_zeta = update_log_zeta(state.lam, state.nu2)
        record()
        state.lam, bad = update_lambda(state, doc, model)
        degraded = degraded or bad
        record()
        state.log_zeta = update_log_zeta(state.lam, state.nu2)
        record()
        state.nu2 = update_nu2(state, doc, model)
        record()
        current = elbo(doc, model, state)
        if abs(current - prev) <= rel_tol * abs(prev):
            prev = current
            converged = True
            break
        prev = current
    state.elbo = prev
    state.converged = converged
    state.degraded = degraded
    return state
