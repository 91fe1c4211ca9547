"""Independent 50-digit evaluation of the reference logistic curves.

Produces the frozen constants in tests/acceptance.rs (criterion 6) and
tests/model_values.rs. Run: python3 analytic_oracle.py
"""
from mpmath import mp, mpf, exp

mp.dps = 50


def f(t, c, tau, gamma):
    return c / (1 + exp(-gamma * (t - tau)))


C = mpf("0.75")
for t in (0, 20, 25, 30):
    t = mpf(t)
    xg = f(t, C, 30, mpf("0.15"))
    xw = 1 - f(t, C, 20, mpf("0.25"))
    xb = C * (1 / (1 + exp(-mpf("0.25") * (t - 20))) - 1 / (1 + exp(-mpf("0.15") * (t - 30))))
    print(f"t={int(t)} x_g={mp.nstr(xg, 25)} x_w={mp.nstr(xw, 25)} x_b={mp.nstr(xb, 25)}")
