"""Independent reference computations used to freeze expected values.

Deliberately naive: plain lists of Fractions, no shared code with the
package beyond the Fraction type.
"""

from fractions import Fraction
from itertools import permutations


def mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def power(a, k, n):
    out = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for _ in range(k):
        out = mul(out, a, n)
    return out


def compose(f, g, n):
    """f(g(t)) mod t^n with g(0) = 0, by summing powers of g."""
    out = [Fraction(0)] * n
    for k, c in enumerate(f[:n]):
        if c:
            for i, x in enumerate(power(g, k, n)):
                out[i] += c * x
    return out


def invert_order_by_order(f, n):
    """Solve f(g(t)) = t one coefficient at a time."""
    g = [Fraction(0), 1 / Fraction(f[1])] + [Fraction(0)] * (n - 2)
    for k in range(2, n):
        err = compose(f, g, k + 1)[k]
        g[k] = -err / f[1]
    return g


def flow(v, n, steps=None):
    """exp(v d/dt) t = sum_k D^k t / k!, D f = v f'."""
    out = [Fraction(0)] * n
    term = [Fraction(0), Fraction(1)] + [Fraction(0)] * (n - 2)
    k = 0
    while any(term):
        for i, x in enumerate(term):
            out[i] += x
        k += 1
        deriv = [i * term[i] for i in range(1, n)] + [Fraction(0)]
        term = [x / k for x in mul(v, deriv, n)]
    return out


def shuffles_brute_force(m, p):
    return sorted(s for s in permutations(range(1, m + 1))
                  if list(s[:p]) == sorted(s[:p]) and list(s[p:]) == sorted(s[p:]))


def apply_permutation(sigma, f):
    """Return x -> f(x[sigma(1)-1], ..., x[sigma(n)-1]) for a callable f."""
    return lambda *x: f(*(x[s - 1] for s in sigma))


def sign(sigma):
    s = 1
    for i in range(len(sigma)):
        for j in range(i + 1, len(sigma)):
            if sigma[i] > sigma[j]:
                s = -s
    return s
