"""Exact expectation values by Heisenberg-picture Pauli propagation.

The observable is written as a real combination of Pauli strings and pulled
back through the adjoint of every channel, last gate first.  All channels
used here map Pauli sums to Pauli sums exactly:

* unitary gates through their Pauli transfer matrix (Clifford gates map one
  string to one string; rotations split a string into at most two),
* depolarizing noise on qubits S scales every string that acts nontrivially
  on S by 1 - p 4^k / (4^k - 1),
* complete dephasing (measurement) removes strings with X/Y on the qubit,
* reset removes strings with X/Y on the qubit and drops its Z factor.

At the end ``<0...0| P |0...0>`` is 1 for strings without X/Y and 0
otherwise.  Cost scales with the number of live strings, not with 4^n,
so circuits well beyond the density-matrix cap are exact and cheap.

Several observables are propagated together by tagging each string with an
observable id.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..circuit import Circuit
from .core import PAULI, NoiseModel, Op, ZObservable, kind_matrix, resolve

_CODE_MATS = [PAULI["I"], PAULI["X"], PAULI["Z"], PAULI["Y"]]  # code = x | z << 1
_ONE = np.uint64(1)
_DROP = 1e-14
MAX_QUBITS = 62


def _pauli_string_matrix(idx: int, k: int) -> np.ndarray:
    m = np.ones((1, 1), dtype=complex)
    for j in range(k):
        m = np.kron(m, _CODE_MATS[(idx >> (2 * j)) & 3])
    return m


@lru_cache(maxsize=None)
def _transfer_table(kind: str, angle: float | None, inner: str | None, k: int):
    """Heisenberg images U^dag P U = sum_Q R[Q, P] Q as padded (4^k, m) tables."""
    u = kind_matrix(kind, angle, inner)
    if u.shape[0] != 2**k:
        raise ValueError("matrix size does not match arity")
    dim = 4**k
    mats = [_pauli_string_matrix(i, k) for i in range(dim)]
    images = []
    for p in range(dim):
        heis = u.conj().T @ mats[p] @ u
        row = []
        for q in range(dim):
            r = np.trace(mats[q] @ heis).real / 2**k
            if abs(r - round(r)) < _DROP:  # Clifford entries exactly
                r = float(round(r))
            if abs(r) > _DROP:
                row.append((q, r))
        images.append(row)
    width = max(len(r) for r in images)
    codes = np.zeros((dim, width), dtype=np.int64)
    vals = np.zeros((dim, width))
    for p, row in enumerate(images):
        for j, (q, r) in enumerate(row):
            codes[p, j], vals[p, j] = q, r
    return codes, vals


class PauliSum:
    """Batched Pauli strings: parallel arrays of X mask, Z mask, coefficient, observable id."""

    def __init__(self, xs, zs, coef, obs):
        self.xs = np.asarray(xs, dtype=np.uint64)
        self.zs = np.asarray(zs, dtype=np.uint64)
        self.coef = np.asarray(coef, dtype=float)
        self.obs = np.asarray(obs, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.coef)

    def _keep(self, mask: np.ndarray) -> None:
        self.xs, self.zs, self.coef, self.obs = self.xs[mask], self.zs[mask], self.coef[mask], self.obs[mask]

    def merge(self, num_qubits: int) -> None:
        if len(self) < 2:
            return
        obs_bits = int(self.obs.max()).bit_length()
        if 2 * num_qubits + obs_bits <= 63:
            key = (self.obs.astype(np.uint64) << np.uint64(2 * num_qubits)) | (
                self.xs << np.uint64(num_qubits)
            ) | self.zs
            uniq, first, inv = np.unique(key, return_index=True, return_inverse=True)
        else:
            stacked = np.stack([self.obs.astype(np.uint64), self.xs, self.zs], axis=1)
            uniq, first, inv = np.unique(stacked, axis=0, return_index=True, return_inverse=True)
        if len(uniq) == len(self):
            return
        coef = np.bincount(inv.reshape(-1), weights=self.coef, minlength=len(uniq))
        self.xs, self.zs, self.obs = self.xs[first], self.zs[first], self.obs[first]
        self.coef = coef
        self._keep(self.coef != 0.0)

    def apply_unitary(self, op: Op, num_qubits: int) -> None:
        g, qubits = op.gate, op.qubits
        k = len(qubits)
        codes, vals = _transfer_table(g.kind, g.angle, g.inner, k)
        idx = np.zeros(len(self), dtype=np.int64)
        clear = np.uint64(0)
        for j, q in enumerate(qubits):
            bit = np.uint64(q)
            local = ((self.xs >> bit) & _ONE) | (((self.zs >> bit) & _ONE) << _ONE)
            idx |= local.astype(np.int64) << (2 * j)
            clear |= _ONE << bit
        out_codes, out_vals = codes[idx], vals[idx]
        width = codes.shape[1]
        if width == 1:
            new_codes, factor = out_codes[:, 0], out_vals[:, 0]
            base_x, base_z = self.xs & ~clear, self.zs & ~clear
            coef, obs = self.coef * factor, self.obs
        else:
            live = out_vals != 0.0
            rows = np.nonzero(live)[0]
            new_codes, factor = out_codes[live], out_vals[live]
            base_x, base_z = (self.xs & ~clear)[rows], (self.zs & ~clear)[rows]
            coef, obs = self.coef[rows] * factor, self.obs[rows]
        new_codes = new_codes.astype(np.uint64)
        for j, q in enumerate(qubits):
            bit = np.uint64(q)
            code = new_codes >> np.uint64(2 * j)
            base_x |= (code & _ONE) << bit
            base_z |= ((code >> _ONE) & _ONE) << bit
        self.xs, self.zs, self.coef, self.obs = base_x, base_z, coef, obs
        if width > 1:
            self.merge(num_qubits)

    def depolarize(self, qubits: tuple[int, ...], p: float) -> None:
        k = len(qubits)
        scale = 1.0 - p * 4**k / (4**k - 1)
        mask = np.uint64(0)
        for q in qubits:
            mask |= _ONE << np.uint64(q)
        hit = ((self.xs | self.zs) & mask) != 0
        self.coef = np.where(hit, self.coef * scale, self.coef)
        if scale == 0.0:
            self._keep(self.coef != 0.0)

    def dephase(self, q: int) -> None:
        self._keep(((self.xs >> np.uint64(q)) & _ONE) == 0)

    def reset(self, q: int) -> None:
        self.dephase(q)
        self.zs = self.zs & ~(_ONE << np.uint64(q))

    def vacuum_expectations(self, num_obs: int) -> np.ndarray:
        on_zero = self.xs == 0
        return np.bincount(self.obs[on_zero], weights=self.coef[on_zero], minlength=num_obs)


def propagate(c: Circuit, noise: NoiseModel, observables: PauliSum, num_obs: int) -> np.ndarray:
    """Expectation of each tagged observable on the circuit's output state."""
    if c.num_qubits > MAX_QUBITS:
        raise ValueError(f"Pauli propagation supports at most {MAX_QUBITS} qubits")
    ops = resolve(c, noise)
    ps = observables
    for op in reversed(ops):
        if not len(ps):
            break
        if op.kind == "unitary":
            if op.p:
                ps.depolarize(op.qubits, op.p)
            ps.apply_unitary(op, c.num_qubits)
        elif op.kind == "dephase":
            ps.dephase(op.qubits[0])
        else:
            ps.reset(op.qubits[0])
    return ps.vacuum_expectations(num_obs)


def _z_mask(c: Circuit, positions: tuple[int, ...]) -> int:
    mask = 0
    for pos in positions:
        mask |= 1 << c.data_qubits[pos]
    return mask


def pauli_expectation(c: Circuit, noise: NoiseModel, observable: ZObservable) -> float:
    zs = [_z_mask(c, positions) for positions, _ in observable.terms]
    coef = [cf for _, cf in observable.terms]
    ps = PauliSum(np.zeros(len(zs)), zs, coef, np.zeros(len(zs)))
    ps.merge(c.num_qubits)
    return float(propagate(c, noise, ps, 1)[0])


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform of a length-2^n vector."""
    v = np.array(values, dtype=float)
    h = 1
    while h < len(v):
        v = v.reshape(-1, 2, h)
        v = np.stack([v[:, 0] + v[:, 1], v[:, 0] - v[:, 1]], axis=1).reshape(-1)
        h *= 2
    return v


def pauli_distribution(c: Circuit, noise: NoiseModel) -> np.ndarray:
    """Exact data-qubit output distribution, indexed by bitstring (first data qubit most significant).

    Computes every Z-string expectation <Z_T> over the data qubits in one
    batched propagation and inverts with a Walsh-Hadamard transform.
    """
    nd = len(c.data_qubits)
    masks = np.arange(1 << nd)
    zs = np.zeros(1 << nd, dtype=np.uint64)
    for i, q in enumerate(c.data_qubits):
        bit = (masks >> (nd - 1 - i)) & 1
        zs |= bit.astype(np.uint64) << np.uint64(q)
    ps = PauliSum(np.zeros(1 << nd), zs, np.ones(1 << nd), masks)
    expect = propagate(c, noise, ps, 1 << nd)
    probs = walsh_hadamard(expect) / (1 << nd)
    return probs
