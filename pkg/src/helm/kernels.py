"""Numeric inner loops with two interchangeable backends.

Two kernels dominate runtime: full enumeration of a network's joint
state space (the exact-inference oracle) and the per-node contraction
over joint parent configurations (belief maintenance updates). Both are
implemented twice: a numba-jitted mixed-radix loop and a vectorized
pure-numpy fallback.

Backend selection: numba when importable, unless the environment
variable HELM_PURE_NUMPY is set to a non-empty value other than "0".
`set_backend` overrides at runtime so the two can be benchmarked against
each other in one process (see the `bench-backend` CLI subcommand).

Flat network encoding shared by both enumeration implementations:
  card      (n,)   states per node
  par_idx   concatenated parent node indices, CSR layout
  par_ptr   (n+1,) offsets into par_idx
  rstride   row stride per parent, aligned with par_idx (first parent
            varies slowest in table rows)
  tab_ptr   (n+1,) offsets into tab_flat
  tab_flat  concatenated row-major (rows, states) tables; roots hold a
            single prior row
  like      (n, max_states) per-node likelihood, padded with zeros

Configurations enumerate with the last node varying fastest.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("HELM_PURE_NUMPY", "0") not in ("", "0")

_ENUM_CHUNK = 1 << 18


# ---------------------------------------------------------------------------
# pure numpy implementations


def _enumerate_marginals_numpy(card, par_idx, par_ptr, rstride, tab_ptr, tab_flat,
                               like, n_configs):
    n = card.size
    max_states = like.shape[1]
    strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * card[i + 1]
    marginals = np.zeros((n, max_states))
    total = 0.0
    for lo in range(0, n_configs, _ENUM_CHUNK):
        hi = min(lo + _ENUM_CHUNK, n_configs)
        configs = np.arange(lo, hi, dtype=np.int64)
        digit = [(configs // strides[i]) % card[i] for i in range(n)]
        weight = np.ones(hi - lo)
        for i in range(n):
            row = np.zeros(hi - lo, dtype=np.int64)
            for k in range(par_ptr[i], par_ptr[i + 1]):
                row += digit[par_idx[k]] * rstride[k]
            weight *= tab_flat[tab_ptr[i] + row * card[i] + digit[i]]
            weight *= like[i][digit[i]]
        total += float(weight.sum())
        for i in range(n):
            marginals[i, : card[i]] += np.bincount(
                digit[i], weights=weight, minlength=int(card[i]))
    return marginals, total


def _node_update_numpy(table, digits, parent_pi, lam_x):
    """Contract a node's table against inbound causal messages.

    Returns (pi_x, lam_out): causal support for the node and one
    unnormalized diagnostic message row per parent, padded to
    parent_pi's width. Products over "all parents but one" are formed
    directly rather than by division, so zero messages are safe.
    """
    rows, _ = table.shape
    m = digits.shape[1]
    if m == 0:
        return table[0].copy(), np.zeros_like(parent_pi)
    vals = parent_pi[np.arange(m)[None, :], digits]
    pi_x = table.T @ vals.prod(axis=1)
    q = table @ lam_x
    lam_out = np.zeros_like(parent_pi)
    for j in range(m):
        others = np.ones(rows)
        for k in range(m):
            if k != j:
                others *= vals[:, k]
        lam_out[j] = np.bincount(digits[:, j], weights=others * q,
                                 minlength=parent_pi.shape[1])
    return pi_x, lam_out


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily on first call, cached on disk)


def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def enumerate_marginals(card, par_idx, par_ptr, rstride, tab_ptr, tab_flat,
                            like, n_configs):
        n = card.size
        digits = np.zeros(n, dtype=np.int64)
        marginals = np.zeros((n, like.shape[1]))
        total = 0.0
        for _ in range(n_configs):
            weight = 1.0
            for i in range(n):
                row = 0
                for k in range(par_ptr[i], par_ptr[i + 1]):
                    row += digits[par_idx[k]] * rstride[k]
                weight *= (tab_flat[tab_ptr[i] + row * card[i] + digits[i]]
                           * like[i, digits[i]])
            for i in range(n):
                marginals[i, digits[i]] += weight
            total += weight
            j = n - 1
            while j >= 0:
                digits[j] += 1
                if digits[j] < card[j]:
                    break
                digits[j] = 0
                j -= 1
        return marginals, total

    @njit(cache=True)
    def node_update(table, digits, parent_pi, lam_x):
        rows, states = table.shape
        m = digits.shape[1]
        pi_x = np.zeros(states)
        lam_out = np.zeros_like(parent_pi)
        if m == 0:
            for s in range(states):
                pi_x[s] = table[0, s]
            return pi_x, lam_out
        for r in range(rows):
            p = 1.0
            for j in range(m):
                p *= parent_pi[j, digits[r, j]]
            q = 0.0
            for s in range(states):
                q += table[r, s] * lam_x[s]
                pi_x[s] += table[r, s] * p
            for j in range(m):
                others = 1.0
                for k in range(m):
                    if k != j:
                        others *= parent_pi[k, digits[r, k]]
                lam_out[j, digits[r, j]] += others * q
        return pi_x, lam_out

    return {"enumerate_marginals": enumerate_marginals, "node_update": node_update}


_BACKENDS: dict[str, dict] = {
    "numpy": {
        "enumerate_marginals": _enumerate_marginals_numpy,
        "node_update": _node_update_numpy,
    }
}

if not _FORCE_NUMPY:
    try:
        _BACKENDS["numba"] = _build_numba_kernels()
    except ImportError:
        pass

_active = "numba" if "numba" in _BACKENDS else "numpy"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = name


def enumerate_marginals(card, par_idx, par_ptr, rstride, tab_ptr, tab_flat,
                        like, n_configs):
    return _BACKENDS[_active]["enumerate_marginals"](
        card, par_idx, par_ptr, rstride, tab_ptr, tab_flat, like, n_configs)


def node_update(table, digits, parent_pi, lam_x):
    return _BACKENDS[_active]["node_update"](table, digits, parent_pi, lam_x)


def warmup() -> None:
    """Force jit compilation of the active backend on tiny inputs."""
    card = np.array([2, 2], dtype=np.int64)
    par_idx = np.array([0], dtype=np.int64)
    par_ptr = np.array([0, 0, 1], dtype=np.int64)
    rstride = np.array([1], dtype=np.int64)
    tab_ptr = np.array([0, 2, 6], dtype=np.int64)
    tab_flat = np.array([0.5, 0.5, 0.7, 0.3, 0.4, 0.6])
    like = np.ones((2, 2))
    enumerate_marginals(card, par_idx, par_ptr, rstride, tab_ptr, tab_flat, like, 4)
    node_update(np.array([[0.7, 0.3], [0.4, 0.6]]),
                np.array([[0], [1]], dtype=np.int64),
                np.array([[0.5, 0.5]]), np.ones(2))
