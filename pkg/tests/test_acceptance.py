"""Acceptance criteria 1-9, each at its stated tolerance and runtime budget.

Every check prints one ``PASS``/``FAIL`` line; they are also repeated in the
pytest terminal summary.  Run directly with ``python3 tests/test_acceptance.py``
for the report alone.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from infall.binding import (
    TwoBodyConfig,
    critical_binding_energy,
    solve_state,
    system_residuals,
)
from infall.cli import main
from infall.dynamics import (
    binding_energy_at,
    celestial_binding_energy,
    celestial_radius,
    equal_mass_binding_energy,
    equal_mass_radius,
    integrate_celestial,
    invariant_force,
    newton_force,
    riccati_residual,
    solve_general,
)
from infall.sta import (
    G0,
    ParticleState,
    RelVector,
    boost_energy_momentum,
    boost_rotor,
    four_vector,
    kinetic_deltas,
    split,
)

SQRT2 = math.sqrt(2.0)
REPORT: list[str] = []


def report(n, ok, detail, elapsed, budget=None):
    timing = f"{elapsed:.2f} s" + (f" (budget {budget:g} s)" if budget else "")
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}; {timing}"
    REPORT.append(line)
    print(line)
    return ok


def test_criterion_1_critical_values():
    t0 = time.perf_counter()
    cfg = TwoBodyConfig(m1_inf=1.0, s=SQRT2, c=1.0)
    ec = critical_binding_energy(cfg)
    st = solve_state(ec, cfg)
    errs = {"E_c": abs(ec - SQRT2), "m2": abs(st.m2 - 1.0), "f1": abs(st.f1 - 1 / SQRT2),
            "v1_sq": abs(st.v1_sq - 1.0)}
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    assert report(1, worst < 1e-10 and dt < 1.0, f"max abs error {worst:.2e} (< 1e-10)", dt, 1)


def test_criterion_2_system_residuals():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = {"system": 0.0, "energy": 0.0, "momentum": 0.0}
    for _ in range(200):
        cfg = TwoBodyConfig(s=rng.uniform(1.0, 20.0))
        ec = critical_binding_energy(cfg)
        eb = rng.uniform(0.0, ec)
        while eb == 0.0:
            eb = rng.uniform(0.0, ec)
        st = solve_state(eb, cfg)
        r1, r2 = system_residuals(st.f1, st.v1_sq, eb, cfg)
        worst["system"] = max(worst["system"], abs(r1), abs(r2))
        worst["energy"] = max(worst["energy"], abs(st.m1 + st.m2 - ((1 + cfg.s) - eb)))
        worst["momentum"] = max(worst["momentum"], abs(st.v1_sq - cfg.s**2 * st.v2_sq))
    dt = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-10 and dt < 1.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(2, ok, f"200 states, worst residuals {detail} (< 1e-10)", dt, 1)


def test_criterion_3_celestial_oracle():
    t0 = time.perf_counter()
    cfg = TwoBodyConfig(s=1e4)
    rs = np.geomspace(1e2, 6e4, 200)
    num = integrate_celestial(cfg, rs)
    err = max(abs(s.state.eb / celestial_binding_energy(s.r, cfg) - 1) for s in num.samples)
    dt = time.perf_counter() - t0
    assert report(3, err < 1e-8 and dt < 5.0, f"max relative error {err:.2e} (< 1e-8)", dt, 5)


def _equal_mass_error(grid, eb0):
    cfg = TwoBodyConfig(s=1.0)
    res = solve_general(cfg, grid, eb0=eb0)
    return max(abs(s.r / equal_mass_radius(s.state.eb, cfg) - 1) for s in res.samples), res


def test_criterion_4_equal_mass_oracle():
    t0 = time.perf_counter()
    cfg = TwoBodyConfig(s=1.0)
    ec = critical_binding_energy(cfg)
    # 100 radii between 1e-3 and 1e3 mapped through the closed form
    rs = np.geomspace(1e3, 1e-3, 100)
    grid = np.array([equal_mass_binding_energy(r, cfg) for r in rs])
    err, res = _equal_mass_error(grid, None)
    coarse, _ = _equal_mass_error(np.linspace(1e-2, 1 - 1e-3, 50) * ec, 1e-3 * ec)
    fine, _ = _equal_mass_error(np.linspace(1e-2, 1 - 1e-3, 50) * ec, 1e-4 * ec)
    ratio = coarse / fine
    dt = time.perf_counter() - t0
    ok = len(res.samples) == 100 and err < 1e-6 and ratio >= 5 and dt < 5.0
    assert report(4, ok, f"max relative error {err:.2e} (< 1e-6); anchor 1e-3 -> 1e-4 E_c "
                         f"error {coarse:.1e} -> {fine:.1e}, reduction {ratio:.0f}x (>= 5x)", dt, 5)


def test_criterion_5_figure2():
    t0 = time.perf_counter()
    cfg = TwoBodyConfig()
    grid = np.linspace(1e-6 * SQRT2, SQRT2 - 1e-6, 64)
    res = solve_general(cfg, grid)
    r = res.column("r")
    monotone = bool(np.all(np.diff(r) < 0)) and len(r) == 64
    trip = max(abs(binding_energy_at(s.r, cfg) - s.state.eb) for s in res.samples)
    term = res.solver_stats.terminal_m1
    dt = time.perf_counter() - t0
    ok = monotone and trip < 1e-6 and term < 1e-9 and dt < 10.0
    assert report(5, ok, f"strictly decreasing={monotone}, round trip {trip:.1e} (< 1e-6), "
                         f"terminal m1 {term:.2e} at stop '{res.solver_stats.stop_reason}' (< 1e-9)", dt, 10)


def test_criterion_6_large_s():
    t0 = time.perf_counter()
    cfg = TwoBodyConfig(s=1e4)
    # common range: the celestial closed form caps at m1_inf c^2; compared up to m1 = 5% of m1_inf
    grid = np.linspace(1e-4, 0.95, 200)
    res = solve_general(cfg, grid)
    err = max(abs(s.r / celestial_radius(s.state.eb, cfg) - 1) for s in res.samples)
    dt = time.perf_counter() - t0
    assert report(6, err < 1e-3, f"max relative error {err:.2e} over eb in [1e-4, 0.95] (< 1e-3)", dt)


def test_criterion_7_sta_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    trip = 0.0
    for _ in range(1000):
        d = rng.normal(size=3)
        vhat = RelVector.from_array(d / np.linalg.norm(d))
        speed = 0.99 * rng.uniform()
        p = boost_energy_momentum(1.0, vhat, speed)
        v = p / math.sqrt(p.dot(p))
        _, _, _, v_rel = split(p, G0, v)
        trip = max(trip, float(np.max(np.abs(v_rel.as_array() - speed * vhat.as_array()))))
    ident = 0.0
    for speed in np.linspace(0, 0.999, 500):
        e1, _, e2, _ = kinetic_deltas(1.0, float(speed))
        gamma = 1 / math.sqrt(1 - speed**2)
        ident = max(ident, abs(e2 * gamma - e1) / max(e1, 1e-300))
    v = np.linspace(0, 0.3, 400)
    fit = 0.0
    for idx, ref in ((0, [0.5, 0.375, 0.3125]), (2, [0.5, 0.125, 0.0625])):
        y = np.array([kinetic_deltas(1.0, float(s))[idx] for s in v])
        c = P.polyfit(v**2, y, 10)
        fit = max(fit, float(np.max(np.abs(c[1:4] - ref))))
    force, boosted = 0.0, 0.0
    for _ in range(100):
        cfg = TwoBodyConfig(s=rng.uniform(1, 10), m1_inf=rng.uniform(0.1, 5))
        st = solve_state(rng.uniform(0, 0.999) * critical_binding_energy(cfg), cfg)
        rr = 10 ** rng.uniform(-2, 3)
        p1 = ParticleState.moving(cfg.m1_inf, RelVector(1, 0, 0), st.v1_abs).p
        p2 = ParticleState.moving(cfg.m2_inf, RelVector(-1, 0, 0), st.v2_abs).p
        x1, x2 = four_vector(0, -rr / 2, 0, 0), four_vector(0, rr / 2, 0, 0)
        f = invariant_force(p1, p2, x1, x2)
        fn = newton_force(st.m1, st.m2, rr)
        force = max(force, abs(f / fn - 1))
        d = rng.normal(size=3)
        R = boost_rotor(rng.uniform(-2, 2), RelVector.from_array(d / np.linalg.norm(d)))
        q = [R * w * R.reverse() for w in (p1, p2, x1, x2)]
        boosted = max(boosted, abs(invariant_force(*q, u=R * G0 * R.reverse()) / f - 1))
    dt = time.perf_counter() - t0
    ok = trip < 1e-10 and ident < 1e-12 and fit < 1e-8 and force < 1e-12 and boosted < 1e-10
    assert report(7, ok, f"rotor round trip {trip:.1e} (< 1e-10), dE2*gamma-dE1 {ident:.1e} (< 1e-12), "
                         f"series fit {fit:.1e} (< 1e-8), force {force:.1e} (< 1e-12), "
                         f"boosted {boosted:.1e} (< 1e-10)", dt)


def test_criterion_8_riccati_and_errata(tmp_path):
    t0 = time.perf_counter()
    cfg = TwoBodyConfig(s=1.0)
    worst = 0.0
    for r in np.geomspace(1e-3, 1e3, 200):
        eb = equal_mass_binding_energy(r, cfg)
        slope = -4.0 / (1.0 + 2.0 * r) ** 2
        worst = max(worst, abs(riccati_residual(eb, slope, r, cfg, scaled=True)))
    # the numerically integrated s = sqrt(2) trajectory as well
    general = solve_general(TwoBodyConfig(), np.linspace(1e-3, 1.41, 64))
    worst = max(worst, general.solver_stats.max_residual)
    out = tmp_path / "f1.json"
    code = main(["figure1", "--samples", "8", "--format", "json", "--errata-diagnostic", "--out", str(out)])
    obj = json.loads(out.read_text())
    printed0 = obj["metadata"]["errata_diagnostic"]["m2_printed_at_0"]
    col = obj["metadata"]["grid"]
    row0 = obj["rows"][0][obj["columns"].index("m2_printed")]
    s = obj["metadata"]["config"]["s"]
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and code == 0 and abs(printed0 + s) < 1e-12 and abs(row0 + s) < 1e-12 and col["min"] == 0
    assert report(8, ok, f"scaled corrected residual {worst:.1e} (< 1e-8); printed m2(0) = {printed0:.6f} "
                         f"= -s m1_inf", dt)


def test_criterion_9_cli():
    t0 = time.perf_counter()
    argv = [sys.executable, "-m", "infall", "figure1", "--samples", "32"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    j = subprocess.run(argv + ["--format", "json"], capture_output=True, check=True).stdout
    obj = json.loads(j)
    first, last = obj["rows"][0], obj["rows"][-1]
    cols = obj["columns"]
    endpoints = (first[cols.index("eb")] == 0.0 and first[cols.index("m1")] == 1.0
                 and abs(first[cols.index("m2")] - SQRT2) < 1e-10
                 and abs(last[cols.index("eb")] - SQRT2) < 1e-10
                 and abs(last[cols.index("m2")] - 1.0) < 1e-10
                 and abs(last[cols.index("f1")] - 1 / SQRT2) < 1e-10
                 and abs(last[cols.index("v1_abs")] ** 2 - 1.0) < 1e-10
                 and last[cols.index("m1")] == 0.0)
    dt = time.perf_counter() - t0
    ok = a == b and len(a) > 0 and len(obj["rows"]) == 32 and endpoints
    assert report(9, ok, f"byte-identical={a == b}, JSON rows {len(obj['rows'])} (= 32), "
                         f"endpoints match={endpoints}", dt)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
