"""Numba kernels for the embedding layout optimization.

The schedule is strictly sequential and single-threaded: with a fixed RNG
state the optimization is bit-reproducible across runs, which the pipeline's
determinism contract relies on.
"""
from __future__ import annotations

import numba


@numba.njit(inline="always")
def _clip(val):
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val


@numba.njit(inline="always")
def _tau_rand_int(state):
    # Combined Tausworthe generator over three 32-bit words held in int64.
    state[0] = (((state[0] & 4294967294) << 12) & 0xFFFFFFFF) ^ (
        (((state[0] << 13) & 0xFFFFFFFF) ^ state[0]) >> 19
    )
    state[1] = (((state[1] & 4294967288) << 4) & 0xFFFFFFFF) ^ (
        (((state[1] << 2) & 0xFFFFFFFF) ^ state[1]) >> 25
    )
    state[2] = (((state[2] & 4294967280) << 17) & 0xFFFFFFFF) ^ (
        (((state[2] << 3) & 0xFFFFFFFF) ^ state[2]) >> 11
    )
    return state[0] ^ state[1] ^ state[2]


@numba.njit(cache=True)
def optimize_layout(
    embedding,
    head,
    tail,
    n_epochs,
    n_vertices,
    epochs_per_sample,
    a,
    b,
    rng_state,
    gamma,
    initial_alpha,
    negative_sample_rate,
):
    dim = embedding.shape[1]
    alpha = initial_alpha
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    epoch_of_next_sample = epochs_per_sample.copy()

    for n in range(n_epochs):
        for i in range(epochs_per_sample.shape[0]):
            if epoch_of_next_sample[i] <= n:
                j = head[i]
                k = tail[i]

                dist_squared = 0.0
                for d in range(dim):
                    diff = embedding[j, d] - embedding[k, d]
                    dist_squared += diff * diff
                if dist_squared > 0.0:
                    grad_coeff = (-2.0 * a * b * pow(dist_squared, b - 1.0)) / (
                        a * pow(dist_squared, b) + 1.0
                    )
                else:
                    grad_coeff = 0.0
                for d in range(dim):
                    grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[k, d]))
                    embedding[j, d] += grad_d * alpha
                    embedding[k, d] -= grad_d * alpha

                epoch_of_next_sample[i] += epochs_per_sample[i]

                n_neg_samples = int(
                    (n - epoch_of_next_negative_sample[i]) / epochs_per_negative_sample[i]
                )
                for _ in range(n_neg_samples):
                    k = _tau_rand_int(rng_state) % n_vertices
                    dist_squared = 0.0
                    for d in range(dim):
                        diff = embedding[j, d] - embedding[k, d]
                        dist_squared += diff * diff
                    if dist_squared > 0.0:
                        grad_coeff = (2.0 * gamma * b) / (
                            (0.001 + dist_squared) * (a * pow(dist_squared, b) + 1.0)
                        )
                    elif j == k:
                        continue
                    else:
                        grad_coeff = 0.0
                    for d in range(dim):
                        if grad_coeff > 0.0:
                            grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[k, d]))
                        else:
                            grad_d = 4.0
                        embedding[j, d] += grad_d * alpha

                epoch_of_next_negative_sample[i] += (
                    n_neg_samples * epochs_per_negative_sample[i]
                )

        alpha = initial_alpha * (1.0 - float(n) / float(n_epochs))

    return embedding
