"""Reference Adam trajectory on a fixed quadratic, printed as Rust literals.

f(theta) = 0.5 * sum(a * (theta - c)**2), theta_0 = 0, eta = 0.05,
beta1 = 0.9, beta2 = 0.999, eps = 1e-8, 100 bias-corrected steps.
"""
import numpy as np

a = np.array([1.0, 2.0, 0.5, 3.0, 0.1])
c = np.array([1.0, -1.0, 0.5, 2.0, -3.0])
theta = np.zeros(5)
m = np.zeros(5)
v = np.zeros(5)
b1, b2, eps, eta = 0.9, 0.999, 1e-8, 0.05
snap = {}
for t in range(1, 101):
    g = a * (theta - c)
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    mh = m / (1 - b1**t)
    vh = v / (1 - b2**t)
    theta = theta - eta * mh / (np.sqrt(vh) + eps)
    if t in (1, 10, 50, 100):
        snap[t] = theta.copy()
for t, th in snap.items():
    print(f"({t}, [{', '.join(repr(float(x)) for x in th)}]),")
