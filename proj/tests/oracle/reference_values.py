#!/usr/bin/env python3
"""Independent reference-value generator for the C++ test suite.

Every frozen constant in tests/ that is not trivially readable off the
implementation is computed here first, with numpy/scipy as the authority.
Run:  python3 tests/oracle/reference_values.py
and paste the printed blocks into the corresponding test files.
"""
import numpy as np
from scipy import special, stats

np.set_printoptions(precision=17)


def block(title):
    print(f"\n# ---- {title} ----")


# ---------------------------------------------------------------- cholesky
block("cholesky 2x2")
A = np.array([[4.0, 2.0], [2.0, 5.0]])
L = np.linalg.cholesky(A)
print("L =", L.tolist())

block("mvn logpdf spot value (d=3)")
c = np.array([0.5, -1.0, 2.0])
Lm = np.array([[1.5, 0.0, 0.0], [0.3, 0.8, 0.0], [-0.2, 0.1, 2.0]])
S = Lm @ Lm.T
x = np.array([1.0, 0.2, -0.7])
print("logpdf =", repr(stats.multivariate_normal(mean=c, cov=S).logpdf(x)))

# ------------------------------------------------------------- streaming moments
block("batch-updated moments vs direct (3 uneven batches, d=2)")
rng = np.random.default_rng(12345)
xs = rng.normal(size=(9, 2)) * np.array([2.0, 0.5]) + np.array([1.0, -3.0])
batches = [xs[:2], xs[2:3], xs[3:9]]
print("rows =", xs.tolist())
m = np.mean(xs, axis=0)
v = np.std(xs, axis=0, ddof=1)
C = np.cov(xs.T, ddof=1)
print("mean =", m.tolist())
print("sd(ddof=1) =", v.tolist())
print("cov(ddof=1) =", C.tolist())

block("median, even and odd counts (d=1)")
vals = np.array([3.0, -1.0, 7.0, 2.0])
print("median of", vals.tolist(), "=", repr(np.median(vals)))  # mean of two middle
vals5 = np.array([3.0, -1.0, 7.0, 2.0, 100.0])
print("median of", vals5.tolist(), "=", repr(np.median(vals5)))

# ---------------------------------------------------------------- schedules
block("schedule values")
print("floor(1.5^(k+16)) k=1..5 =", [int(np.floor(np.longdouble(1.5) ** (k + 16))) for k in range(1, 6)])
print("exact 3^17/2^17 =", 3**17 / 2**17, "floor =", 3**17 // 2**17)
print("linear 25*p*k, p=10, k=1..3 =", [25 * 10 * k for k in (1, 2, 3)])
print("linear max(d,25)*p*k, d=50, p=10, k=1..3 =", [max(50, 25) * 10 * k for k in (1, 2, 3)])

# ---------------------------------------------------------------- targets
block("gaussian / heavy-tail / exponential-family log-densities (d=3)")
tau = np.array([1.0, -2.0, 0.5])
P1 = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, -0.2], [0.0, -0.2, 0.5]])
x = np.array([0.4, -1.0, 1.25])
Lp = np.linalg.cholesky(P1)
q = float((x - tau) @ np.linalg.solve(P1, x - tau))
print("quadform =", repr(q))
print("gaussian log rho = -q/2 =", repr(-0.5 * q))
print("mvexp log rho = -sqrt(q) =", repr(-np.sqrt(q)))
gamma = 10.0
d = 3
print("mvt log rho =", repr(-((d + gamma) / 2.0) * np.log1p(q / gamma)))

block("logistic-regression log-density (2 data points, prior var 100)")
A2 = np.array([[0.5, -1.0, 2.0], [1.5, 0.3, -0.7]])
b2 = np.array([1.0, -1.0])
w = np.array([0.2, -0.4, 0.9])
z = b2 * (A2 @ w)
ll = -np.sum(np.logaddexp(0.0, -z))
lp = -np.dot(w, w) / (2.0 * 100.0)
print("z =", z.tolist())
print("log rho =", repr(lp + ll))
print("softplus(40) =", repr(float(np.logaddexp(0.0, 40.0))))
print("softplus(-40) =", repr(float(np.logaddexp(0.0, -40.0))))

# ---------------------------------------------------------------- dataset pipeline
block("normalization (n-1 divisor) and binary remap")
F = np.array([[1.0, 5.0], [2.0, 5.0], [4.0, -5.0], [5.0, -5.0]])  # col0 continuous, col1 binary {-5,5}
mu0, sd0 = F[:, 0].mean(), F[:, 0].std(ddof=1)
print("col0 mean/sd =", repr(mu0), repr(sd0))
print("col0 normalized =", ((F[:, 0] - mu0) / sd0).tolist())
print("col1 remapped (smaller->0) =", [0.0 if v < 0 else 1.0 for v in F[:, 1]])

block("feature-engineering dimensions and order")
for dd in (8, 11, 24, 30):
    print(f"d={dd}: with interactions -> {dd + dd*(dd+1)//2 + 1}, intercept-only -> {dd + 1}")
r = np.array([2.0, 3.0])
inter = [r[i] * r[j] for i in range(2) for j in range(i, 2)]
print("row (2,3) ->", list(r) + inter + [1.0])

# ---------------------------------------------------------------- diagnostics
block("autocorrelation-time estimator on a frozen series (n=200)")


def iat_ips(y, cap_frac=1.0 / 3.0):
    y = np.asarray(y, dtype=float)
    n = len(y)
    mu = y.mean()
    z = y - mu
    g0 = float(z @ z) / n
    if g0 <= 0:
        return None
    maxlag = int(np.floor(n * cap_frac))

    def gamma(k):
        if k >= n:
            return 0.0
        return float(z[: n - k] @ z[k:]) / n

    s = 0.0
    prev = np.inf
    m = 0
    while True:
        k0, k1 = 2 * m, 2 * m + 1
        if k0 > maxlag:
            break
        pair = gamma(k0) / g0 + (gamma(k1) / g0 if k1 <= maxlag else 0.0)
        if pair <= 0.0:
            break
        pair = min(pair, prev)
        s += pair
        prev = pair
        m += 1
    return max(1.0, -1.0 + 2.0 * s)


rng = np.random.default_rng(777)
phi = 0.6
e = rng.normal(size=200)
series = np.empty(200)
acc = 0.0
for i in range(200):
    acc = phi * acc + e[i]
    series[i] = acc
print("first5 =", series[:5].tolist())
print("iat =", repr(iat_ips(series)))
print("ar1 truth (1+phi)/(1-phi) for 0.0,0.5,0.9 =", [(1 + p) / (1 - p) for p in (0.0, 0.5, 0.9)])

block("mean step size of a tiny path")
P = np.array([[0.0, 0.0], [3.0, 4.0], [3.0, 4.0], [0.0, 0.0]])
steps = np.linalg.norm(np.diff(P, axis=0), axis=1)
print("steps =", steps.tolist(), "mean =", repr(steps.mean()))

block("KS p-value spot checks (asymptotic with small-n correction)")
for D, n in ((0.05, 1000), (0.02, 4000), (0.0342, 4000)):
    lam = D * (np.sqrt(n) + 0.12 + 0.11 / np.sqrt(n))
    print(f"D={D}, n={n}: lambda={lam!r}, p={special.kolmogorov(lam)!r}")

block("gaussian-proposal slice threshold value")
cc = np.array([0.5, -0.5])
LL = np.array([[2.0, 0.0], [0.5, 1.0]])
SS = LL @ LL.T
xx = np.array([1.0, 1.0])
lr = -0.5 * float(xx @ xx)  # pretend log rho(x) = -|x|^2/2
print("log phi = logrho - logN =", repr(lr - stats.multivariate_normal(mean=cc, cov=SS).logpdf(xx)))

block("adaptive-walk mixture proposal variance, d=1, unit sample variance")
beta = 0.05
print("var =", repr(beta * 0.1**2 + (1 - beta) * 2.38**2), "sd =", repr(np.sqrt(beta * 0.1**2 + (1 - beta) * 2.38**2)))
