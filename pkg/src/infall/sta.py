"""Spacetime algebra Cl(1,3) and single-particle kinematics.

The algebra is stored densely: a :class:`Multivector` holds 16 real
coefficients on the basis blades of the real Clifford algebra generated by
``g0, g1, g2, g3`` with ``g0**2 = +1`` and ``gi**2 = -1``.  Blades are encoded
as bitmasks (bit 0 is ``g0``, bit ``i`` is ``gi``) and ordered by grade.

Relative vectors follow the convention ``v/c = (u ^ v) / (u . v)``.  With
``u = g0`` the relative basis is ``sigma_i = g_i g_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "Multivector",
    "RelVector",
    "ParticleState",
    "BLADES",
    "METRIC",
    "geometric_product",
    "scalar",
    "four_vector",
    "basis_vector",
    "frame_boost",
    "boost_rotor",
    "split",
    "boost_energy_momentum",
    "kinetic_deltas",
    "kinetic_series_coefficients",
    "kinematic_derivatives",
    "check_system_conservation",
    "UNIT_TOL",
]

UNIT_TOL = 1e-12

METRIC = (1.0, -1.0, -1.0, -1.0)


class DomainError(ValueError):
    """Input outside the physical domain of an operation."""


def _blade_order() -> tuple[int, ...]:
    masks = sorted(range(16), key=lambda m: (bin(m).count("1"), [i for i in range(4) if m >> i & 1]))
    return tuple(masks)


BLADES: tuple[int, ...] = _blade_order()
_INDEX = {mask: i for i, mask in enumerate(BLADES)}
_GRADE = np.array([bin(m).count("1") for m in BLADES])


def blade_name(mask: int) -> str:
    if mask == 0:
        return "1"
    return "g" + "".join(str(i) for i in range(4) if mask >> i & 1)


def _reorder_sign(a: int, b: int) -> int:
    # number of transpositions needed to merge blade a (left) with blade b
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def blade_product(a: int, b: int) -> tuple[float, int]:
    """Product of two basis blades as ``(sign, blade)``."""
    sign = float(_reorder_sign(a, b))
    common = a & b
    for i in range(4):
        if common >> i & 1:
            sign *= METRIC[i]
    return sign, a ^ b


def _build_table() -> np.ndarray:
    table = np.zeros((16, 16, 16))
    for i, a in enumerate(BLADES):
        for j, b in enumerate(BLADES):
            sign, c = blade_product(a, b)
            table[i, j, _INDEX[c]] = sign
    return table


_TABLE = _build_table()
_REVERSE_SIGN = np.array([(-1.0) ** (k * (k - 1) // 2) for k in _GRADE])


class Multivector:
    """Dense element of Cl(1,3).

    Instances are immutable; arithmetic returns new objects.  Scalars mix
    freely with multivectors in ``+``, ``-`` and ``*``.
    """

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable[float] = ()):
        c = np.array(list(coefficients) if not isinstance(coefficients, np.ndarray) else coefficients, dtype=float)
        if c.size == 0:
            c = np.zeros(16)
        if c.shape != (16,):
            raise ValueError(f"expected 16 coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self._c = c

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @classmethod
    def blade(cls, mask: int, value: float = 1.0) -> "Multivector":
        c = np.zeros(16)
        c[_INDEX[mask]] = value
        return cls(c)

    def __getitem__(self, mask: int) -> float:
        return float(self._c[_INDEX[mask]])

    def _coerce(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return scalar(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(self._c - other._c)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Multivector(other._c - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Multivector(self._c / float(other))
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def isclose(self, other: "Multivector", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def grade(self, k: int) -> "Multivector":
        """Grade projection; grades outside 0..4 give zero."""
        return Multivector(np.where(_GRADE == k, self._c, 0.0))

    def reverse(self) -> "Multivector":
        return Multivector(self._c * _REVERSE_SIGN)

    def scalar_part(self) -> float:
        return float(self._c[0])

    def dot(self, other: "Multivector") -> float:
        """Scalar part of the product; the inner product for vectors."""
        return geometric_product(self, other).scalar_part()

    def wedge(self, other: "Multivector") -> "Multivector":
        """Outer product of two vectors (grade-2 part of their product)."""
        return geometric_product(self, other).grade(2)

    def vector_components(self) -> np.ndarray:
        return np.array([self._c[_INDEX[1 << i]] for i in range(4)])

    def __repr__(self):
        terms = [f"{v:+.6g}*{blade_name(m)}" for m, v in zip(BLADES, self._c) if v != 0.0]
        return "Multivector(" + (" ".join(terms) if terms else "0") + ")"


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    return Multivector(np.einsum("i,j,ijk->k", a.coefficients, b.coefficients, _TABLE))


def scalar(value: float) -> Multivector:
    return Multivector.blade(0, value)


def basis_vector(i: int) -> Multivector:
    return Multivector.blade(1 << i)


def four_vector(e0: float, e1: float, e2: float, e3: float) -> Multivector:
    c = np.zeros(16)
    for i, v in enumerate((e0, e1, e2, e3)):
        c[_INDEX[1 << i]] = v
    return Multivector(c)


G0 = basis_vector(0)


def _sigma(i: int) -> Multivector:
    # sigma_i = g_i g_0
    return basis_vector(i) * G0


SIGMA = (_sigma(1), _sigma(2), _sigma(3))


@dataclass(frozen=True)
class RelVector:
    """Relative vector ``x sigma_1 + y sigma_2 + z sigma_3`` of a frame."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "RelVector":
        x, y, z = (float(v) for v in a)
        return cls(x, y, z)

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "RelVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __add__(self, other: "RelVector") -> "RelVector":
        return RelVector(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "RelVector") -> "RelVector":
        return RelVector(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, k: float) -> "RelVector":
        return RelVector(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> "RelVector":
        return RelVector(self.x / k, self.y / k, self.z / k)

    def __neg__(self) -> "RelVector":
        return RelVector(-self.x, -self.y, -self.z)

    def bivector(self, u: Multivector | None = None) -> Multivector:
        """Bivector form in the frame ``u`` (default ``g0``)."""
        b = self.x * SIGMA[0] + self.y * SIGMA[1] + self.z * SIGMA[2]
        if u is None:
            return b
        L = frame_boost(u)
        return L * b * L.reverse()

    @classmethod
    def from_bivector(cls, b: Multivector, u: Multivector | None = None) -> "RelVector":
        """Read a relative vector of frame ``u`` from the bivector ``b``."""
        if u is not None:
            L = frame_boost(u)
            b = L.reverse() * b * L
        # coefficient on sigma_i = g_i g_0 = -g_0 g_i
        return cls(*(-b[1 | 1 << i] for i in (1, 2, 3)))


def _check_unit_timelike(v: Multivector, name: str) -> None:
    vv = v.dot(v)
    if abs(vv - 1.0) > UNIT_TOL or not v.grade(1).isclose(v, UNIT_TOL):
        raise DomainError(f"{name} must be a unit timelike vector (v.v = {vv!r})")
    if v[1] <= 0.0:
        raise DomainError(f"{name} must be future-pointing (g0 component {v[1]!r})")


def frame_boost(u: Multivector) -> Multivector:
    """Pure boost rotor ``L`` with ``L g0 ~L = u``."""
    _check_unit_timelike(u, "u")
    return (1.0 + u * G0) / math.sqrt(2.0 * (1.0 + u.dot(G0)))


def boost_rotor(rapidity: float, vhat: RelVector) -> Multivector:
    """Rotor ``exp(-rapidity * vhat / 2)``.

    Conjugating ``g0`` by it yields a frame moving along ``+vhat`` under the
    relative-vector convention used here.
    """
    n = vhat.norm()
    if abs(n - 1.0) > UNIT_TOL:
        raise DomainError(f"vhat must be a unit relative vector (|vhat| = {n!r})")
    half = 0.5 * rapidity
    return math.cosh(half) - math.sinh(half) * vhat.bivector()


def split(p: Multivector, u: Multivector, v: Multivector, c: float = 1.0):
    """Energy-momentum split relative to the frames ``u`` and ``v``.

    The rest-mass is read off as ``m_inf = p.u / c^2``, which holds both for
    ``p = p_inf`` and for ``p = (m_inf / gamma) c^2 v``.  Returns
    ``(gamma, E_v, p_v, v_rel)`` with ``gamma = u.v``,
    ``E_v = gamma m_inf c^2``, ``v_rel = c (u ^ v) / (u . v)`` and
    ``p_v = gamma m_inf c v_rel``, so that
    ``p_inf v = E_v (1 + v_rel / c)``.
    """
    _check_unit_timelike(u, "u")
    _check_unit_timelike(v, "v")
    if p.dot(p) <= 0.0 or p.dot(u) <= 0.0:
        raise DomainError("p must be a future-pointing timelike vector")
    m_inf = p.dot(u) / c**2
    gamma = u.dot(v)
    v_rel = RelVector.from_bivector(u.wedge(v) / gamma, u) * c
    E_v = gamma * m_inf * c**2
    p_v = v_rel * (gamma * m_inf * c)
    return gamma, E_v, p_v, v_rel


def boost_energy_momentum(m_inf: float, vhat: RelVector, speed: float, c: float = 1.0,
                          u: Multivector | None = None) -> Multivector:
    """Energy-momentum after paying for the kinetic energy out of rest-mass.

    Computes ``R (p_inf / gamma) ~R`` with ``R = exp(-phi vhat / 2)`` and
    ``tanh(phi) = speed / c``.  The residual rest-mass is ``m_inf / gamma``.
    """
    if not 0.0 <= speed < c:
        raise DomainError(f"speed must satisfy 0 <= speed < c (got {speed!r}, c = {c!r}); "
                          "the body annihilates at the speed of light")
    phi = math.atanh(speed / c)
    gamma = math.cosh(phi)
    p_inf = m_inf * c**2 * G0
    R = boost_rotor(phi, vhat)
    p = R * (p_inf / gamma) * R.reverse()
    if u is not None:
        L = frame_boost(u)
        p = L * p * L.reverse()
    return p.grade(1)


def _generalized_binomial(alpha: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (alpha - j) / (j + 1)
    return out


def kinetic_series_coefficients(order: int) -> tuple[list[float], list[float]]:
    """Coefficients of ``(v/c)^(2k)``, k = 1..order, for both kinetic deltas.

    ``gamma - 1`` gives 1/2, 3/8, 5/16, ...; ``1 - 1/gamma`` gives 1/2, 1/8,
    1/16, ...
    """
    d1 = [(-1.0) ** k * _generalized_binomial(-0.5, k) for k in range(1, order + 1)]
    d2 = [(-1.0) ** (k + 1) * _generalized_binomial(0.5, k) for k in range(1, order + 1)]
    return d1, d2


def kinetic_deltas(m_inf: float, speed: float, c: float = 1.0, order: int = 3):
    """Energy to boost ``m_inf`` to ``speed`` and the rest-mass actually spent.

    Returns ``(dE1_exact, dE1_series, dE2_exact, dE2_series)`` with
    ``dE1 = (gamma - 1) m_inf c^2`` and ``dE2 = (1 - 1/gamma) m_inf c^2``; the
    series keep ``order`` terms in powers of ``speed**2``.
    """
    if not 0.0 <= speed < c:
        raise DomainError(f"speed must satisfy 0 <= speed < c (got {speed!r})")
    if order < 1:
        raise DomainError("order must be >= 1")
    x = (speed / c) ** 2
    rest = m_inf * c**2
    # 1 - sqrt(1 - x) without cancellation
    root = math.sqrt(1.0 - x)
    one_minus_inv_gamma = x / (1.0 + root)
    dE2 = rest * one_minus_inv_gamma
    dE1 = dE2 / root
    d1, d2 = kinetic_series_coefficients(order)
    s1 = rest * sum(a * x ** (k + 1) for k, a in enumerate(d1))
    s2 = rest * sum(a * x ** (k + 1) for k, a in enumerate(d2))
    return dE1, s1, dE2, s2


def _gamma_from(v: RelVector, c: float) -> float:
    b2 = v.dot(v) / c**2
    if b2 >= 1.0:
        raise DomainError(f"|v| must be < c (got |v|/c = {math.sqrt(b2)!r})")
    return 1.0 / math.sqrt(1.0 - b2)


def kinematic_derivatives(m_inf: float, v_rel: RelVector, a_rel: RelVector, c: float = 1.0):
    """Relative force and mass rates for a particle that pays for kinetic energy.

    Returns ``(F, dgamma_dt, dm_dtau, dm_dt)``.
    """
    v_rel = v_rel if isinstance(v_rel, RelVector) else RelVector.from_array(v_rel)
    a_rel = a_rel if isinstance(a_rel, RelVector) else RelVector.from_array(a_rel)
    gamma = _gamma_from(v_rel, c)
    F = a_rel * (gamma * m_inf)
    va = v_rel.dot(a_rel)
    dgamma_dt = gamma**3 * va / c**2
    dm_dt = -F.dot(v_rel) / c**2
    dm_dtau = gamma * dm_dt
    return F, dgamma_dt, dm_dtau, dm_dt


def check_system_conservation(momenta: Sequence[Multivector], u: Multivector,
                              rest_masses: Sequence[float], c: float = 1.0):
    """Residuals of total energy and total linear momentum in frame ``u``."""
    if len(momenta) == 0 or len(momenta) != len(rest_masses):
        raise DomainError("need equally many momenta and rest masses (n >= 1)")
    P = momenta[0]
    for p in momenta[1:]:
        P = P + p
    energy = u.dot(P) - sum(rest_masses) * c**2
    momentum = RelVector.from_bivector(u.wedge(P) / c**2, u)
    return energy, momentum


@dataclass(frozen=True)
class ParticleState:
    """A body that started at rest in ``u`` with rest-mass ``m_inf``."""

    m_inf: float
    m: float
    v: Multivector
    p: Multivector

    @classmethod
    def moving(cls, m_inf: float, vhat: RelVector, speed: float, c: float = 1.0) -> "ParticleState":
        p = boost_energy_momentum(m_inf, vhat, speed, c)
        m = math.sqrt(p.dot(p)) / c**2
        v = p / (m * c**2) if m > 0 else p
        return cls(m_inf, m, v, p)


def random_unit_timelike(rng: np.random.Generator, max_speed: float = 0.99) -> Multivector:
    """Future-pointing unit timelike vector with relative speed below ``max_speed``."""
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    speed = max_speed * rng.uniform()
    g = 1.0 / math.sqrt(1.0 - speed**2)
    w = g * speed * d
    return four_vector(g, *w)


def blades_by_grade() -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for m in BLADES:
        out.setdefault(bin(m).count("1"), []).append(m)
    return out
