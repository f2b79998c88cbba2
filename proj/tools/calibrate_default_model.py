#!/usr/bin/env python3
"""Generate data/default_soc.json, the bundled reference SoC model.

The model is synthetic but shaped to behave like a small passively cooled
mobile SoC board:

  * 5 hotspots (four big cores + GPU), 4 power resources
    (little cluster, big cluster, memory/board, GPU).
  * A is symmetric, nonnegative, with every row summing to 0.9994, so the
    spectral radius is exactly 0.9994 and the uniform thermal mode relaxes
    with the published per-sample retention.
  * The steady-state gain matrix G = (I - A)^-1 B is chosen directly and
    B is recovered as (I - A) G.  The big/gpu columns carry ~17..26 K/W;
    the mem column is a stand-in for the constant board load plus ambient
    coupling and carries the idle operating point (~324 K at the standard
    baseline of 0.30 W little + 1.05 W mem).
  * Per-hotspot scalar reduction: a_i = row sum of A = 0.9994 and
    b_i = (1 - a_i) * (reference-mix gain over the leakage-active columns)
    with the reference dynamic mix big:gpu = 0.8:0.38.  The gains below
    are solved so b_i = 0.0121 for every hotspot, i.e. a steady-state
    thermal resistance of 0.0121/0.0006 = 20.1667 K/W of dynamic power.
  * Exponential leakage is active on the big and GPU rails, driven by
    hotspot 2 (big cluster sensor) and hotspot 4 (GPU sensor).  Constants
    are sized so leakage is a few percent of the dynamic budget: enough to
    bend trajectories and exercise the low-rank Newton algebra, small
    enough that the guaranteed-convergence region is delimited by range
    containment rather than by the contraction norm.

The mem-column gain is tuned (twice, via Newton solves that include
leakage) so the idle fixed point lands on the targets exactly.  The script
then re-derives every quantity the test suite pins and prints them; run it
after any edit and re-commit the JSON if the summary still meets the
targets listed at the bottom.
"""

import json
import pathlib

import numpy as np

HOTSPOTS = ["big0", "big1", "big2", "big3", "gpu"]
RESOURCES = ["little", "big", "mem", "gpu"]

RETENTION = 0.9994          # common row sum of A
B_REDUCED = 0.0121          # target per-hotspot reduced gain
MIX_BIG, MIX_GPU = 0.8, 0.38  # reference dynamic power mix (watts)

BASE_LITTLE = 0.30          # standard baseline powers (watts)
BASE_MEM = 1.05
IDLE_TARGET = np.array([321.4, 321.4, 322.1, 321.4, 322.9])  # kelvin

DOMAIN_C = (37.0, 120.0)
AMBIENT_C = 24.0
TS = 0.1

# leakage: [V, kappa1, kappa2, driving_hotspot, active] per resource
LEAKAGE = [
    {"V": 0.0, "kappa1": 1.0, "kappa2": -1.0, "driving_hotspot": 0, "active": False},
    {"V": 1.05, "kappa1": 6.0e-6, "kappa2": -1000.0, "driving_hotspot": 2, "active": True},
    {"V": 0.0, "kappa1": 1.0, "kappa2": -1.0, "driving_hotspot": 0, "active": False},
    {"V": 0.90, "kappa1": 7.0e-6, "kappa2": -950.0, "driving_hotspot": 4, "active": True},
]


def build_a():
    big_diag, big_big, big_gpu = 0.99845, 0.00025, 0.0002
    gpu_diag = 0.9986
    a = np.zeros((5, 5))
    for i in range(4):
        a[i, i] = big_diag
        for j in range(4):
            if i != j:
                a[i, j] = big_big
        a[i, 4] = a[4, i] = big_gpu
    a[4, 4] = gpu_diag
    assert np.allclose(a, a.T)
    assert np.allclose(a.sum(axis=1), RETENTION, atol=1e-15)
    return a


def build_g(mem_col):
    """Steady-state gains; the gpu column solves the reduced-gain identity."""
    theta = B_REDUCED / (1.0 - RETENTION)          # 20.1667 K/W
    total = MIX_BIG + MIX_GPU
    little = np.array([12.0, 12.0, 12.0, 12.0, 11.0])
    big = np.array([21.0, 21.0, 21.8, 21.0, 17.6])
    gpu = (theta * total - MIX_BIG * big) / MIX_GPU
    return np.column_stack([little, big, mem_col, gpu])


def leak_power(temps):
    p = np.zeros(len(RESOURCES))
    for j, lk in enumerate(LEAKAGE):
        if lk["active"]:
            t = temps[lk["driving_hotspot"]]
            p[j] = lk["V"] * lk["kappa1"] * t * t * np.exp(lk["kappa2"] / t)
    return p


def leak_slope(temps):
    """d(leak_j)/d(T_driving): V*k1*exp(k2/T)*(2T - k2)."""
    s = np.zeros(len(RESOURCES))
    for j, lk in enumerate(LEAKAGE):
        if lk["active"]:
            t = temps[lk["driving_hotspot"]]
            s[j] = lk["V"] * lk["kappa1"] * np.exp(lk["kappa2"] / t) * (2.0 * t - lk["kappa2"])
    return s


def solve_fixed_point(a, b, pc, t0):
    t = t0.copy()
    for _ in range(80):
        f = (a - np.eye(5)) @ t + b @ (pc + leak_power(t))
        jac = a - np.eye(5)
        sl = leak_slope(t)
        for j, lk in enumerate(LEAKAGE):
            if lk["active"]:
                jac = jac + np.outer(b[:, j] * sl[j], np.eye(5)[lk["driving_hotspot"]])
        dt = np.linalg.solve(jac, -f)
        t = t + dt
        if np.max(np.abs(dt)) < 1e-12:
            break
    return t


def newton_map(a, b, pc, t):
    f = (a - np.eye(5)) @ t + b @ (pc + leak_power(t))
    jac = a - np.eye(5)
    sl = leak_slope(t)
    for j, lk in enumerate(LEAKAGE):
        if lk["active"]:
            jac = jac + np.outer(b[:, j] * sl[j], np.eye(5)[lk["driving_hotspot"]])
    return t + np.linalg.solve(jac, -f)


def pc_vector(p_big, p_gpu):
    return np.array([BASE_LITTLE, p_big, BASE_MEM, p_gpu])


def main():
    a = build_a()
    i_minus_a = np.eye(5) - a

    # Tune the mem column so the idle fixed point (leakage included) hits
    # IDLE_TARGET exactly.
    mem = (IDLE_TARGET - BASE_LITTLE * np.array([12, 12, 12, 12, 11])) / BASE_MEM
    for _ in range(4):
        g = build_g(mem)
        b = i_minus_a @ g
        idle = solve_fixed_point(a, b, pc_vector(0.0, 0.0), IDLE_TARGET.copy())
        mem = mem - (idle - IDLE_TARGET) / BASE_MEM
    g = build_g(mem)
    b = i_minus_a @ g
    idle = solve_fixed_point(a, b, pc_vector(0.0, 0.0), IDLE_TARGET.copy())

    assert np.all(b > 0), b
    rho = max(abs(np.linalg.eigvalsh(a)))
    theta_rows = (1.0 - RETENTION) * (MIX_BIG * g[:, 1] + MIX_GPU * g[:, 3]) / (MIX_BIG + MIX_GPU)

    # Incremental thermal resistance at the reference operating point.
    loaded = solve_fixed_point(a, b, pc_vector(MIX_BIG, MIX_GPU), idle + 25.0)
    p_idle = pc_vector(0.0, 0.0).sum() + leak_power(idle).sum()
    p_load = pc_vector(MIX_BIG, MIX_GPU).sum() + leak_power(loaded).sum()
    hot = int(np.argmax(loaded))
    theta_trace = (loaded[hot] - idle[hot]) / (p_load - p_idle)

    # Containment sweep: 9x9 temperature grid on the driving axes, Newton
    # map range inside the kelvin domain.
    tmin, tmax = DOMAIN_C[0] + 273.15, DOMAIN_C[1] + 273.15
    grid = np.linspace(tmin, tmax, 9)
    lin_gain = np.linalg.solve(i_minus_a, b)

    def cell_guaranteed(p_big, p_gpu):
        pc = pc_vector(p_big, p_gpu)
        jmax = 0.0
        for t2 in grid:
            for t4 in grid:
                t = np.empty(5)
                t[2], t[4] = t2, t4
                probe = t.copy()
                pw = pc + leak_power(np.array([0, 0, t2, 0, t4], dtype=float))
                aff = lin_gain @ pw
                for i in (0, 1, 3):
                    t[i] = aff[i]
                gmap = newton_map(a, b, pc, t)
                if gmap.min() < tmin or gmap.max() > tmax:
                    return False, jmax
                # coarse contraction probe (full FD left to the C++ side)
                h = 0.01
                for k in range(5):
                    tp, tm_ = t.copy(), t.copy()
                    tp[k] += h
                    tm_[k] -= h
                    col = (newton_map(a, b, pc, tp) - newton_map(a, b, pc, tm_)) / (2 * h)
                    jmax = max(jmax, np.abs(col).sum())
        return True, jmax

    knee, jac_seen = 0.0, 0.0
    step = 0.16
    ps = np.arange(0.0024, 4.0 + 1e-9, step)
    region = 0
    for pb in ps:
        for pg in ps:
            ok, jm = cell_guaranteed(pb, pg)
            jac_seen = max(jac_seen, jm)
            if ok:
                region += 1
                knee = max(knee, pb + pg)

    # First-order-fit sanity on the reference heat-up.
    n = 9000
    temps = np.empty((n + 1, 5))
    temps[0] = idle
    pc = pc_vector(MIX_BIG, MIX_GPU)
    for k in range(n):
        temps[k + 1] = a @ temps[k] + b @ (pc + leak_power(temps[k]))
    series = temps[:, hot]
    final = loaded[hot]
    inside = np.abs(series - final) <= 1.0
    t_true = 0.0
    for k in range(n, -1, -1):
        if not inside[k]:
            t_true = (k + 1) * TS
            break
    # crude 2-parameter fit over the first 200 s (the C++ fit is exact GN)
    win = int(200 / TS)
    tt = np.arange(win + 1) * TS
    from scipy.optimize import curve_fit
    t0v = series[0]
    popt, _ = curve_fit(
        lambda t, tf, tau: t0v + (tf - t0v) * (1 - np.exp(-t / tau)),
        tt, series[: win + 1], p0=(series[win] + 1.0, 200 / 3))
    tfit, taufit = popt
    t_fp = taufit * np.log(max(tfit - t0v, 1e-9) / 1.0)

    out = {
        "hotspots": HOTSPOTS,
        "resources": RESOURCES,
        "A": [list(map(float, row)) for row in a],
        "B": [list(map(float, row)) for row in b],
        "leakage": LEAKAGE,
        "domain_celsius": list(DOMAIN_C),
        "ambient_celsius": AMBIENT_C,
        "sample_period_s": TS,
    }
    dest = pathlib.Path(__file__).resolve().parent.parent / "data" / "default_soc.json"
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(json.dumps(out, indent=2) + "\n")

    print(f"wrote {dest}")
    print(f"rho(A)            = {rho:.10f}        (target 0.9994)")
    print(f"reduced b rows    = {theta_rows}  (target {B_REDUCED})")
    print(f"idle fixed point  = {idle}  (target {IDLE_TARGET})")
    print(f"theta_trace       = {theta_trace:.4f} K/W   (target 20.17 +/- 5%)")
    print(f"hot hotspot       = {HOTSPOTS[hot]}")
    print(f"containment knee  = {knee:.3f} W total  (target 3.0..4.0)")
    print(f"guaranteed cells  = {region}/{len(ps) ** 2}")
    print(f"max |J_g| seen    = {jac_seen:.4f}      (must stay < 1)")
    print(f"loaded fixed pt   = {loaded}")
    print(f"fit: tau={taufit:.2f}s tfix={tfit:.3f}K t_fp={t_fp:.1f}s "
          f"t_true={t_true:.1f}s ratio={t_fp / t_true:.3f} (target 0.9..1.1)")


if __name__ == "__main__":
    main()
