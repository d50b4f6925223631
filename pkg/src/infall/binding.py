"""Masses, speeds and energy sharing of two bodies as a function of binding energy.

Both bodies start at rest at infinite separation with rest-masses ``m1_inf``
and ``m2_inf = s * m1_inf``.  Once the total binding energy ``eb`` has been
spent, each body has paid its share out of its own rest-mass and momentum
balance fixes ``v2**2 = v1**2 / s**2``.  Writing ``K = (1 + s) - eb/(c^2 m1_inf)``
and ``q = s**2 - 1`` the physical root of the resulting system is

    m1 = m1_inf (K**2 - q) / (2 K)
    m2 = m1_inf (K**2 + q) / (2 K)

Errata.  The printed closed forms for ``f1``, ``m1`` and ``m2`` carry the
shared denominator ``eb - c^2 m1_inf (s + 1)``; with that sign ``m2(0)``
evaluates to ``-s m1_inf``.  The forms used here have the denominator
``c^2 m1_inf (s + 1) - eb``, which reproduces every stated special value.
The verbatim printed forms are kept in :func:`printed_forms` for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .sta import DomainError, _check_unit_timelike

__all__ = [
    "TwoBodyConfig",
    "BindingState",
    "critical_binding_energy",
    "v1_squared",
    "v1_squared_printed",
    "v1_squared_celestial",
    "solve_state",
    "body_binding_energy",
    "binding_power_identity",
    "printed_forms",
    "state_invariant_residuals",
    "system_residuals",
    "G_SI",
    "C_SI",
]

G_SI = 6.6743e-11
C_SI = 299_792_458.0


@dataclass(frozen=True)
class TwoBodyConfig:
    """Physical parameters of a two-body infall plus solver tolerances.

    Geometrized units (``G = c = 1``) by default.
    """

    m1_inf: float = 1.0
    s: float = math.sqrt(2.0)
    G: float = 1.0
    c: float = 1.0
    tol_rel: float = 1e-9
    tol_abs: float = 1e-12

    def __post_init__(self):
        for name in ("m1_inf", "G", "c", "tol_rel", "tol_abs"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be a positive finite number (got {v!r})")
        if not (math.isfinite(self.s) and self.s >= 1.0):
            raise DomainError(f"s must be >= 1 (got {self.s!r})")

    @classmethod
    def si(cls, m1_inf: float, s: float, **kw) -> "TwoBodyConfig":
        return cls(m1_inf=m1_inf, s=s, G=G_SI, c=C_SI, **kw)

    @property
    def m2_inf(self) -> float:
        return self.s * self.m1_inf

    @property
    def rest_energy(self) -> float:
        """``c^2 m1_inf``, the natural energy scale."""
        return self.c**2 * self.m1_inf

    @property
    def length_scale(self) -> float:
        """``G m1_inf / c^2``."""
        return self.G * self.m1_inf / self.c**2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BindingState:
    """Everything determined by the total binding energy ``eb``."""

    eb: float
    f1: float
    v1_sq: float
    v2_sq: float
    m1: float
    m2: float
    gamma1: float
    gamma2: float

    @property
    def v1_abs(self) -> float:
        return math.sqrt(self.v1_sq)

    @property
    def v2_abs(self) -> float:
        return math.sqrt(self.v2_sq)


def critical_binding_energy(cfg: TwoBodyConfig) -> float:
    """Binding energy at which the lighter body's rest-mass reaches zero."""
    s = cfg.s
    root = math.sqrt((s - 1.0) * (s + 1.0))
    # s - sqrt(s^2 - 1) = 1 / (s + sqrt(s^2 - 1)) avoids cancellation at large s
    return cfg.rest_energy * (1.0 + 1.0 / (s + root))


def _check_eb(eb: float, cfg: TwoBodyConfig) -> float:
    ec = critical_binding_energy(cfg)
    slack = cfg.tol_abs * cfg.rest_energy
    if not (math.isfinite(eb) and -slack <= eb <= ec + slack):
        raise DomainError(f"binding energy {eb!r} outside [0, E_c] with E_c = {ec!r}")
    return min(max(eb, 0.0), ec)


def _core(eb: float, cfg: TwoBodyConfig):
    """(eps, K, q, root_q) for a clamped binding energy."""
    eps = eb / cfg.rest_energy
    K = 1.0 + cfg.s - eps
    q = (cfg.s - 1.0) * (cfg.s + 1.0)
    return eps, K, q, math.sqrt(q)


def _one_minus_a(eps: float, K: float, s: float) -> float:
    # 1 - m1/m1_inf = eps (2 s - eps) / (2 K); finite limit at K = 0 only for s = 1
    if K == 0.0:
        return 1.0
    return eps * (2.0 * s - eps) / (2.0 * K)


def v1_squared(eb: float, cfg: TwoBodyConfig) -> float:
    """Squared speed of the lighter body after spending ``eb``.

    Evaluated in the factored form ``c^2 (1 - a)(1 + a)`` with
    ``a = m1 / m1_inf``; algebraically identical to the printed rational
    expression (see :func:`v1_squared_printed`) but free of the 0/0 that
    expression has at ``s = 1, eb = E_c``.
    """
    eb = _check_eb(eb, cfg)
    eps, K, _, _ = _core(eb, cfg)
    oma = _one_minus_a(eps, K, cfg.s)
    beta2 = oma * (2.0 - oma)
    c2 = cfg.c**2
    if beta2 > 1.0:
        if beta2 - 1.0 > cfg.tol_abs:
            raise DomainError(f"v1^2/c^2 = {beta2!r} exceeds 1")
        beta2 = 1.0
    return max(beta2, 0.0) * c2


def v1_squared_printed(eb: float, cfg: TwoBodyConfig) -> float:
    """The printed rational closed form for ``v1**2``, verbatim."""
    m, s, c2 = cfg.m1_inf, cfg.s, cfg.c**2
    num = eb * (eb - 2.0 * c2 * m) * (4.0 * m * m * s * (s + 1.0) * c2 * c2
                                       - 2.0 * eb * m * (2.0 * s + 1.0) * c2 + eb * eb)
    den = 4.0 * c2 * m * m * (eb - c2 * m * (s + 1.0)) ** 2
    return -num / den


def v1_squared_celestial(eb: float, m1_inf: float, c: float = 1.0) -> float:
    """Limit of :func:`v1_squared` for an infinitely heavy partner."""
    rest = m1_inf * c**2
    if not (0.0 <= eb <= rest):
        raise DomainError(f"binding energy {eb!r} outside [0, m1_inf c^2 = {rest!r}]")
    return eb * (2.0 * c**2 * m1_inf - eb) / (c**2 * m1_inf**2)


def solve_state(eb: float, cfg: TwoBodyConfig) -> BindingState:
    """Full :class:`BindingState` for the binding energy ``eb``."""
    eb = _check_eb(eb, cfg)
    eps, K, q, rq = _core(eb, cfg)
    m, s, c2 = cfg.m1_inf, cfg.s, cfg.c**2
    ec = critical_binding_energy(cfg)
    if q == 0.0:
        f1 = 0.5
        m1 = m2 = 0.5 * (ec - eb) / c2
    else:
        f1 = (2.0 * s - eps) / (2.0 * K)
        # (E_c - eb) factor keeps m1 accurate right up to annihilation
        m1 = (ec - eb) * (K + rq) / (2.0 * K * c2)
        m2 = m * (K * K + q) / (2.0 * K)
    if m1 < 0.0:
        if m1 < -cfg.tol_abs * m:
            raise DomainError(f"m1 = {m1!r} < 0")
        m1 = 0.0
    # rounding can put the masses a few ulp above their rest values
    m1 = min(m1, m)
    m2 = min(m2, s * m)
    v1_sq = v1_squared(eb, cfg)
    v2_sq = v1_sq / (s * s)
    gamma1 = m / m1 if m1 > 0.0 else math.inf
    gamma2 = s * m / m2 if m2 > 0.0 else math.inf
    return BindingState(eb=eb, f1=f1, v1_sq=v1_sq, v2_sq=v2_sq, m1=m1, m2=m2,
                        gamma1=gamma1, gamma2=gamma2)


def printed_forms(eb: float, cfg: TwoBodyConfig) -> dict:
    """``f1``, ``m1``, ``m2`` and ``v1**2`` exactly as printed (diagnostic only).

    ``f1`` is ``nan`` at ``eb = 0`` where the printed form divides by zero.
    """
    m, s, c2 = cfg.m1_inf, cfg.s, cfg.c**2
    num = 2.0 * m * m * s * (s + 1.0) * c2 * c2 - 2.0 * m * (s + 1.0) * eb * c2 + eb * eb
    den = 2.0 * c2 * (eb - c2 * m * (s + 1.0))
    m2 = num / den
    m1 = m * (1.0 + s) - eb / c2 - m2
    if eb != 0.0:
        f1 = 1.0 - m * s * c2 / eb + num / (2.0 * eb * (eb - c2 * m * (s + 1.0)))
    else:
        f1 = math.nan
    return {"f1": f1, "m1": m1, "m2": m2, "v1_sq": v1_squared_printed(eb, cfg)}


def system_residuals(f1: float, v1_sq: float, eb: float, cfg: TwoBodyConfig) -> tuple[float, float]:
    """Left-hand sides of the two rest-mass balance equations (zero on solutions)."""
    m, s, c2 = cfg.m1_inf, cfg.s, cfg.c**2
    b2 = v1_sq / c2
    r1 = m * (1.0 - math.sqrt(max(1.0 - b2, 0.0))) - f1 * eb / c2
    r2 = m * (s - math.sqrt(s * s - b2)) - (1.0 - f1) * eb / c2
    return r1, r2


def state_invariant_residuals(st: BindingState, cfg: TwoBodyConfig) -> dict:
    """Residuals of the conservation relations a :class:`BindingState` obeys."""
    m, s, c2 = cfg.m1_inf, cfg.s, cfg.c**2
    return {
        "energy": st.m1 + st.m2 - ((1.0 + s) * m - st.eb / c2),
        "momentum": m * m * st.v1_sq - (s * m) ** 2 * st.v2_sq,
        "share1": (m - st.m1) - st.f1 * st.eb / c2,
        "share2": (s * m - st.m2) - (1.0 - st.f1) * st.eb / c2,
        "gamma1": st.m1 * st.gamma1 - m if st.m1 > 0 else 0.0,
        "gamma2": st.m2 * st.gamma2 - s * m if st.m2 > 0 else 0.0,
    }


def body_binding_energy(p, u, v) -> float:
    """Binding energy ``p . (u - v)`` of one body in frame ``v``."""
    _check_unit_timelike(u, "u")
    _check_unit_timelike(v, "v")
    return p.dot(u - v)


def binding_power_identity(state: BindingState, force: float, dr_dt: float,
                           deb_dr: float | None = None) -> tuple[float, float]:
    """Both sides of the binding-energy power balance for radial infall.

    ``lhs = F (|v1| + |v2|)`` is the power delivered by the mutual force;
    ``rhs = (d eb / dr)(dr / dt)``.  ``deb_dr`` defaults to ``-force``, the
    Newtonian attraction doing all the binding work.
    """
    if deb_dr is None:
        deb_dr = -force
    lhs = force * (state.v1_abs + state.v2_abs)
    rhs = deb_dr * dr_dt
    return lhs, rhs
