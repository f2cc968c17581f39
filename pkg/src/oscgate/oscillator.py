"""
Truncated Fock-basis operators for 1-D and isotropic 3-D harmonic oscillators.

Units: hbar = mass = omega0 = 1, so ``[a, a^dagger] = 1`` on the untruncated
algebra and ``H0 |n> = (n + 1/2) |n>``. Truncation breaks commutators on the
last basis state; nothing here tries to hide that.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidTruncationError, ShapeError
from .matrixcore import kron

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class TruncationSpec:
    """Basis size ``n_per_axis`` per axis; 3-D states are ordered lexicographically."""

    n_per_axis: int
    axes: int = 1

    def __post_init__(self):
        if self.axes not in (1, 3):
            raise InvalidTruncationError(f"axes must be 1 or 3, got {self.axes}")
        if int(self.n_per_axis) != self.n_per_axis or self.n_per_axis < 1:
            raise InvalidTruncationError(f"n_per_axis must be a positive integer, got {self.n_per_axis}")

    @property
    def dim(self) -> int:
        return self.n_per_axis ** self.axes

    def flat_index(self, occupation) -> int:
        occ = (occupation,) if np.isscalar(occupation) else tuple(occupation)
        if len(occ) != self.axes or any(not 0 <= n < self.n_per_axis for n in occ):
            raise InvalidInputError(f"occupation {occupation!r} outside truncation")
        idx = 0
        for n in occ:
            idx = idx * self.n_per_axis + n
        return idx

    def occupation(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise InvalidInputError(f"index {index} outside 0..{self.dim - 1}")
        occ = []
        for _ in range(self.axes):
            index, r = divmod(index, self.n_per_axis)
            occ.append(r)
        return tuple(reversed(occ))

    def occupations(self) -> np.ndarray:
        """All occupation tuples, row ``i`` belonging to flat index ``i``."""
        return np.array(list(itertools.product(range(self.n_per_axis), repeat=self.axes)), dtype=int)


@dataclass(frozen=True)
class EnergySpectrum:
    energies: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.energies)

    def bohr(self) -> np.ndarray:
        """Matrix of Bohr frequencies ``E_m - E_n``."""
        E = self.energies
        return E[:, None] - E[None, :]


def _require_min(spec: TruncationSpec, axes: int | None = None):
    if axes is not None and spec.axes != axes:
        raise InvalidTruncationError(f"expected a {axes}-axis truncation, got axes={spec.axes}")
    if spec.n_per_axis < 2:
        raise InvalidTruncationError(f"need at least 2 levels per axis, got {spec.n_per_axis}")


def annihilation(n: int) -> np.ndarray:
    """``a`` on the first ``n`` Fock states: ``a[k-1, k] = sqrt(k)``."""
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


def ladder_matrices(spec: TruncationSpec) -> tuple[np.ndarray, np.ndarray]:
    _require_min(spec, axes=1)
    a = annihilation(spec.n_per_axis)
    return a, a.conj().T


def canonical_matrices(spec: TruncationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Position ``q = (a + a^dag)/sqrt2`` and momentum ``p = (a - a^dag)/(i sqrt2)``."""
    a, ad = ladder_matrices(spec)
    return (a + ad) / SQRT2, (a - ad) / (1j * SQRT2)


def q_power_matrix(spec: TruncationSpec, power: int) -> np.ndarray:
    """
    Exact Fock-space matrix elements of ``q**power`` on the truncated basis.

    The power is formed in a basis padded by three levels and then cut back,
    so no entry is contaminated by the truncation edge.
    """
    if power not in (1, 2, 3):
        raise InvalidInputError(f"power must be 1, 2 or 3, got {power!r}")
    _require_min(spec, axes=1)
    n = spec.n_per_axis
    a = annihilation(n + 3)
    q = (a + a.conj().T) / SQRT2
    Qp = np.linalg.matrix_power(q, power)[:n, :n]
    return 0.5 * (Qp + Qp.conj().T)


def embed(op: np.ndarray, axis: int, spec: TruncationSpec) -> np.ndarray:
    """Single-axis operator acting on ``axis`` (0-based) of a multi-axis basis."""
    eye = np.eye(spec.n_per_axis, dtype=complex)
    factors = [op if k == axis else eye for k in range(spec.axes)]
    return kron(*factors)


def axis_ladders(spec: TruncationSpec) -> list[np.ndarray]:
    """Annihilation operators ``a_1, a_2, a_3`` embedded in the 3-D basis."""
    _require_min(spec, axes=3)
    a = annihilation(spec.n_per_axis)
    return [embed(a, k, spec) for k in range(3)]


def position_matrices(spec: TruncationSpec) -> list[np.ndarray]:
    """``q_1, q_2, q_3`` on the 3-D basis."""
    q, _ = canonical_matrices(TruncationSpec(spec.n_per_axis))
    return [embed(q, k, spec) for k in range(3)]


def position_products(spec: TruncationSpec) -> np.ndarray:
    """
    ``out[k, l] = q_k q_l`` with exact matrix elements (3-D).

    Products on different axes factorise; same-axis squares use the padded
    single-axis ``q**2``.
    """
    _require_min(spec, axes=3)
    one = TruncationSpec(spec.n_per_axis)
    q1 = q_power_matrix(one, 1)
    q2 = q_power_matrix(one, 2)
    d = spec.dim
    out = np.empty((3, 3, d, d), dtype=complex)
    for k in range(3):
        for l in range(3):
            if k == l:
                out[k, l] = embed(q2, k, spec)
            else:
                eye = np.eye(spec.n_per_axis, dtype=complex)
                factors = [q1 if ax in (k, l) else eye for ax in range(3)]
                out[k, l] = kron(*factors)
    return out


def angular_momentum_matrices(spec: TruncationSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``L_k = i (a_r a_s^dag - a_r^dag a_s)`` for cyclic ``(k, r, s)``."""
    if spec.axes != 3:
        raise InvalidTruncationError(f"angular momentum needs a 3-axis truncation, got axes={spec.axes}")
    a = axis_ladders(spec)
    ad = [x.conj().T for x in a]
    L = []
    for k in range(3):
        r, s = (k + 1) % 3, (k + 2) % 3
        L.append(1j * (a[r] @ ad[s] - ad[r] @ a[s]))
    return tuple(L)


def energy_spectrum(spec: TruncationSpec) -> EnergySpectrum:
    occ = spec.occupations()
    return EnergySpectrum(occ.sum(axis=1) + 0.5 * spec.axes)


def oscillator_hamiltonian(spec: TruncationSpec) -> tuple[np.ndarray, EnergySpectrum]:
    spectrum = energy_spectrum(spec)
    return np.diag(spectrum.energies).astype(complex), spectrum


def interaction_dress(V, spectrum, t: float) -> np.ndarray:
    """
    ``e^{i H0 t} V e^{-i H0 t}`` for diagonal ``H0``: entry ``(m, n)`` picks up
    the Bohr phase ``exp(i (E_m - E_n) t)``.
    """
    V = np.asarray(V, dtype=complex)
    E = np.asarray(getattr(spectrum, "energies", spectrum), dtype=float)
    if V.shape != (len(E), len(E)):
        raise ShapeError(f"operator shape {V.shape} does not match spectrum length {len(E)}")
    phase = np.exp(1j * E * t)
    return phase[:, None] * V * phase.conj()[None, :]


def dressed_samples(V, spectrum, times) -> np.ndarray:
    """Stack of ``interaction_dress(V, spectrum, t)`` over ``times``, shape ``(M, d, d)``."""
    V = np.asarray(V, dtype=complex)
    E = np.asarray(getattr(spectrum, "energies", spectrum), dtype=float)
    if V.shape != (len(E), len(E)):
        raise ShapeError(f"operator shape {V.shape} does not match spectrum length {len(E)}")
    ph = np.exp(1j * np.outer(np.asarray(times, dtype=float), E))
    return ph[:, :, None] * V[None] * ph.conj()[:, None, :]
