"""Hot numeric kernels with a numba path and a pure-Python/numpy fallback.

The two inner loops that dominate runtime live here: the per-document
variational E-step of the topic model and the negative-sampling SGD epoch of
the document-embedding trainer. Each is written once as a nopython-compatible
function; by default it is compiled with ``numba.njit``, and setting
``LITTREND_DISABLE_NUMBA=1`` (or numba being unavailable) selects the
uncompiled fallback. Both paths execute the identical statement sequence, so
results agree across backends up to floating-point noise.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np

_U53_INV = 1.0 / 9007199254740992.0


def _stm_estep_impl(indptr, indices, counts, beta, mus, etas, sigma_inv, logdet_sigma, max_inner, tol):
    """One E-step sweep: refine each document's MAP position eta under the
    logistic-normal prior, accumulate expected topic-word counts, and return
    the objective value plus per-document negative Hessians.

    Mutates ``etas`` in place. ``beta`` is (K, V); eta lives in K-1 space
    with the last topic as reference.
    """
    K, V = beta.shape
    D = etas.shape[0]
    Km1 = K - 1
    log_2pi = 1.8378770664093453

    beta_acc = np.zeros((K, V))
    neg_hess = np.zeros((D, Km1, Km1))
    theta_out = np.zeros((D, K))
    bound = 0.0

    theta = np.zeros(K)
    s = np.zeros(K)
    grad = np.zeros(Km1)
    for d in range(D):
        start = indptr[d]
        end = indptr[d + 1]
        eta = etas[d]
        mu = mus[d]
        n_d = 0.0
        for pos in range(start, end):
            n_d += counts[pos]

        for _ in range(max_inner):
            # theta = softmax([eta, 0])
            m = 0.0
            for k in range(Km1):
                if eta[k] > m:
                    m = eta[k]
            z = math.exp(-m)
            for k in range(Km1):
                theta[k] = math.exp(eta[k] - m)
                z += theta[k]
            for k in range(Km1):
                theta[k] /= z
            theta[Km1] = math.exp(-m) / z

            # expected topic counts s_k from the token posteriors
            for k in range(K):
                s[k] = 0.0
            for pos in range(start, end):
                v = indices[pos]
                c = counts[pos]
                denom = 1e-300
                for k in range(K):
                    denom += theta[k] * beta[k, v]
                for k in range(K):
                    s[k] += c * theta[k] * beta[k, v] / denom

            # one damped Newton step on the concave eta subproblem
            quad = 0.0
            for i in range(Km1):
                acc = 0.0
                for j in range(Km1):
                    acc += sigma_inv[i, j] * (eta[j] - mu[j])
                grad[i] = s[i] - n_d * theta[i] - acc
                quad += (eta[i] - mu[i]) * acc
            slin = 0.0
            for k in range(Km1):
                slin += s[k] * eta[k]
            lse = m + math.log(z)
            h_old = -0.5 * quad + slin - n_d * lse

            hess = np.zeros((Km1, Km1))
            for i in range(Km1):
                for j in range(Km1):
                    hess[i, j] = sigma_inv[i, j] + n_d * (-theta[i] * theta[j])
                hess[i, i] += n_d * theta[i]
            step = np.linalg.solve(hess, grad.reshape(Km1, 1)).ravel()

            scale = 1.0
            improved = False
            for _bt in range(30):
                h_new, m_new, z_new = _eta_objective(
                    eta, step, scale, mu, sigma_inv, s, n_d, Km1
                )
                if h_new >= h_old - 1e-12:
                    improved = True
                    break
                scale *= 0.5
            if improved:
                delta = 0.0
                for k in range(Km1):
                    move = scale * step[k]
                    eta[k] += move
                    if abs(move) > delta:
                        delta = abs(move)
                if delta < tol:
                    break
            else:
                break

        # final theta at the refined eta
        m = 0.0
        for k in range(Km1):
            if eta[k] > m:
                m = eta[k]
        z = math.exp(-m)
        for k in range(Km1):
            theta[k] = math.exp(eta[k] - m)
            z += theta[k]
        for k in range(Km1):
            theta[k] /= z
        theta[Km1] = math.exp(-m) / z
        for k in range(K):
            theta_out[d, k] = theta[k]

        # token posteriors at the final eta: expected counts and likelihood
        loglik = 0.0
        for pos in range(start, end):
            v = indices[pos]
            c = counts[pos]
            denom = 1e-300
            for k in range(K):
                denom += theta[k] * beta[k, v]
            for k in range(K):
                beta_acc[k, v] += c * theta[k] * beta[k, v] / denom
            loglik += c * math.log(denom)

        quad = 0.0
        for i in range(Km1):
            acc = 0.0
            for j in range(Km1):
                acc += sigma_inv[i, j] * (eta[j] - mu[j])
            quad += (eta[i] - mu[i]) * acc
        bound += loglik - 0.5 * (quad + logdet_sigma + Km1 * log_2pi)

        for i in range(Km1):
            for j in range(Km1):
                neg_hess[d, i, j] = sigma_inv[i, j] - n_d * theta[i] * theta[j]
            neg_hess[d, i, i] += n_d * theta[i]

    return bound, beta_acc, neg_hess, theta_out


def _eta_objective(eta, step, scale, mu, sigma_inv, s, n_d, Km1):
    """Objective of the eta subproblem at eta + scale*step (shared by the
    backtracking line search)."""
    m = 0.0
    for k in range(Km1):
        cand = eta[k] + scale * step[k]
        if cand > m:
            m = cand
    z = math.exp(-m)
    slin = 0.0
    quad = 0.0
    for i in range(Km1):
        cand = eta[i] + scale * step[i]
        z += math.exp(cand - m)
        slin += s[i] * cand
        acc = 0.0
        for j in range(Km1):
            acc += sigma_inv[i, j] * (eta[j] + scale * step[j] - mu[j])
        quad += (eta[i] + scale * step[i] - mu[i]) * acc
    lse = m + math.log(z)
    return -0.5 * quad + slin - n_d * lse, m, z


def _pvdbow_train_impl(
    indptr,
    indices,
    counts,
    doc_vecs,
    word_vecs,
    noise_cdf,
    n_epochs,
    negative,
    lr_start,
    lr_end,
    rng_state,
):
    """Distributed-bag-of-words training: each document vector learns to
    predict its own tokens against noise words via negative sampling.

    Token order within a document follows the sorted vocabulary indices and
    repeats each term by its count, so the schedule is fully determined by
    the corpus and the seed state. Noise words come from an inline
    xorshift64 stream so the draw sequence is identical on both backends.
    Mutates ``doc_vecs`` and ``word_vecs``; returns the per-epoch
    accumulated loss.
    """
    D = indptr.shape[0] - 1
    dim = doc_vecs.shape[1]
    V = word_vecs.shape[0]

    total_tokens = 0.0
    for pos in range(indices.shape[0]):
        total_tokens += counts[pos]
    total_updates = n_epochs * total_tokens
    if total_updates == 0:
        return np.zeros(n_epochs)

    state = rng_state
    thirteen = np.uint64(13)
    seven = np.uint64(7)
    seventeen = np.uint64(17)
    eleven = np.uint64(11)

    losses = np.zeros(n_epochs)
    work = np.zeros(dim)
    done = 0.0
    for epoch in range(n_epochs):
        epoch_loss = 0.0
        for d in range(D):
            for pos in range(indptr[d], indptr[d + 1]):
                w = indices[pos]
                for _rep in range(int(counts[pos])):
                    alpha = lr_start - (lr_start - lr_end) * (done / total_updates)
                    done += 1.0
                    dvec = doc_vecs[d]
                    for i in range(dim):
                        work[i] = 0.0
                    for n in range(negative + 1):
                        if n == 0:
                            target = w
                            label = 1.0
                        else:
                            state ^= state << thirteen
                            state ^= state >> seven
                            state ^= state << seventeen
                            u = float(state >> eleven) * _U53_INV
                            lo, hi = 0, V - 1
                            while lo < hi:
                                mid = (lo + hi) // 2
                                if noise_cdf[mid] < u:
                                    lo = mid + 1
                                else:
                                    hi = mid
                            target = lo
                            if target == w:
                                continue
                            label = 0.0
                        f = 0.0
                        for i in range(dim):
                            f += dvec[i] * word_vecs[target, i]
                        if f > 12.0:
                            f = 12.0
                        elif f < -12.0:
                            f = -12.0
                        sig = 1.0 / (1.0 + math.exp(-f))
                        g = (label - sig) * alpha
                        if label > 0.5:
                            epoch_loss -= math.log(sig + 1e-12)
                        else:
                            epoch_loss -= math.log(1.0 - sig + 1e-12)
                        for i in range(dim):
                            work[i] += g * word_vecs[target, i]
                            word_vecs[target, i] += g * dvec[i]
                    for i in range(dim):
                        dvec[i] += work[i]
        losses[epoch] = epoch_loss
    return losses


def _select_backend():
    disabled = os.environ.get("LITTREND_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
    if disabled:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _select_backend()

if USE_NUMBA:
    from numba import njit

    _eta_objective = njit(cache=True)(_eta_objective)
    stm_estep = njit(cache=True)(_stm_estep_impl)
    pvdbow_train = njit(cache=True)(_pvdbow_train_impl)
else:
    stm_estep = _stm_estep_impl
    pvdbow_train = _pvdbow_train_impl


def mix_seed(seed: int) -> np.uint64:
    """Fold a 64-bit seed into a nonzero xorshift64 state (splitmix-style)."""
    state = (seed * 6364136223846793005 + 1442695040888963407) & 0xFFFFFFFFFFFFFFFF
    state ^= state >> 30
    state = (state * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    state ^= state >> 27
    if state == 0:
        state = 88172645463325252
    return np.uint64(state)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
