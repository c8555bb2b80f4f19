#!/usr/bin/env python3
"""Generate high-precision reference values for the Carleman weight.

Evaluates log(zeta) at 60 significant digits with mpmath for a deterministic
set of points and parameter combinations, and writes them as CSV consumed by
the test suites. Inputs are exact f64 values (shortest round-trip reprs), so
the implementation under test sees bit-identical coordinates.

Points are kept away from the null cone (f_p >= 0.05 r_p^2): closer in, the
f64 computation of f_p itself loses digits to cancellation and no weight
implementation could match a high-precision oracle at 1e-12.

Usage: python3 tools/golden_zeta.py > crates/core/tests/data/golden_zeta.csv
"""

import random

import mpmath as mp

mp.mp.dps = 60

CONFIGS = [
    # (m, n, p_t, p_x, a, style, r_bound)
    (1, 2, [0.0], [0.0, 0.0], 9.0, "explicit", 1.0),
    (1, 2, [0.0], [0.0, 0.0], 9.0, "delta", 1.0),
    (1, 1, [0.0], [0.0], 4.0, "explicit", 1.0),
    (2, 2, [0.25, -0.5], [0.5, 0.0], 16.0, "delta", 2.0),
    (1, 3, [0.0], [0.0, 0.0, 0.0], 16.0, "explicit", 2.0),
    (2, 1, [0.0, 0.0], [1.5], 9.0, "delta", 3.0),
    (1, 2, [0.5], [2.0, 0.0], 25.0, "delta", 3.0),
    (1, 2, [0.0], [0.0, 0.0], 25.0, "explicit", 1.0),
]


def params_for(style, a, r_bound):
    if style == "delta":
        delta = 0.1
        return a, delta / r_bound, delta * delta / r_bound
    # Boundary of the admissible regime: b = 0.1 / R, eps = 0.1 b.
    b = 0.1 / r_bound
    return a, b, 0.01 / r_bound


def log_zeta(q_t, q_x, p_t, p_x, a, b, eps):
    tau = mp.sqrt(mp.fsum((mp.mpf(t) - mp.mpf(s)) ** 2 for t, s in zip(q_t, p_t)))
    r = mp.sqrt(mp.fsum((mp.mpf(x) - mp.mpf(s)) ** 2 for x, s in zip(q_x, p_x)))
    f = (r * r - tau * tau) / 4
    if f <= 0:
        return None
    denom = 1 - mp.mpf(eps) * r + mp.mpf(eps) ** 2 * f
    if denom <= 0:
        return None
    phi = f / denom
    return 2 * mp.mpf(a) * (mp.log(phi) + 2 * mp.mpf(b) * mp.sqrt(phi))


def row_from(m, n, p_t, p_x, q_t, q_x, a, b, eps):
    lz = log_zeta(q_t, q_x, p_t, p_x, a, b, eps)
    return {
        "m": m,
        "n": n,
        "p_t": ";".join(repr(v) for v in p_t),
        "p_x": ";".join(repr(v) for v in p_x),
        "q_t": ";".join(repr(v) for v in q_t),
        "q_x": ";".join(repr(v) for v in q_x),
        "a": repr(a),
        "b": repr(b),
        "eps": repr(eps),
        "log_zeta": mp.nstr(lz, 30),
    }


def main():
    rng = random.Random(20240817)
    # One pinned reference configuration ahead of the random sweep:
    # p = 0, a = 9, b = 0.1, eps = 0.01, q = (t=0, x=(1,0)).
    rows = [row_from(1, 2, [0.0], [0.0, 0.0], [0.0], [1.0, 0.0], 9.0, 0.1, 0.01)]
    per_config = 100 // len(CONFIGS) + 1
    for (m, n, p_t, p_x, a, style, r_bound) in CONFIGS:
        a, b, eps = params_for(style, a, r_bound)
        made = 0
        while made < per_config and len(rows) < 100:
            # Draw within the reach bound around p.
            q_x = [p_x[j] + rng.uniform(-1.0, 1.0) * r_bound / (n ** 0.5) for j in range(n)]
            q_t = [p_t[i] + rng.uniform(-1.0, 1.0) * r_bound / (m ** 0.5) for i in range(m)]
            r2 = sum((q_x[j] - p_x[j]) ** 2 for j in range(n))
            tau2 = sum((q_t[i] - p_t[i]) ** 2 for i in range(m))
            if r2 == 0.0:
                continue
            f = (r2 - tau2) / 4.0
            if f < 0.05 * r2:
                continue
            if log_zeta(q_t, q_x, p_t, p_x, a, b, eps) is None:
                continue
            rows.append(row_from(m, n, p_t, p_x, q_t, q_x, a, b, eps))
            made += 1
    cols = ["m", "n", "p_t", "p_x", "q_t", "q_x", "a", "b", "eps", "log_zeta"]
    print(",".join(cols))
    for row in rows[:100]:
        print(",".join(str(row[c]) for c in cols))


if __name__ == "__main__":
    main()
