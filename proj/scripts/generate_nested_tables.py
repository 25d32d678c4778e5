#!/usr/bin/env python3
"""Generate the embedded nested quadrature tables (Patterson, Genz-Keister).

Each level extends the previous node set by the roots of the monic polynomial
q of degree p that is orthogonal to all polynomials of degree < p with respect
to pi_old(x) dmu(x), where pi_old vanishes on the existing nodes. Weights are
the interpolatory weights of the combined node set. Everything is done in
high-precision arithmetic and rounded to binary64 only at output.

Usage: generate_nested_tables.py > src/nested_tables.inc
"""
import sys

import mpmath as mp

mp.mp.dps = 420


def uniform_moment(k):
    # uniform probability measure on [-1, 1]
    return mp.mpf(0) if k % 2 else mp.mpf(1) / (k + 1)


def gaussian_moment(k):
    # standard normal measure
    return mp.mpf(0) if k % 2 else mp.fac2(k - 1) if k else mp.mpf(1)


def poly_from_roots(roots):
    coeffs = [mp.mpf(1)]  # ascending order
    for r in roots:
        nxt = [mp.mpf(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= r * c
        coeffs = nxt
    return coeffs


def extend(old_nodes, p, moment):
    pi_old = poly_from_roots(old_nodes)
    deg = len(pi_old) - 1

    def s(j):
        return mp.fsum(c * moment(i + j) for i, c in enumerate(pi_old))

    svals = [s(j) for j in range(2 * p + 1)]
    a = mp.matrix(p, p)
    b = mp.matrix(p, 1)
    for k in range(p):
        for i in range(p):
            a[k, i] = svals[i + k]
        b[k] = -svals[p + k]
    c = mp.lu_solve(a, b)
    # descending coefficients for polyroots
    desc = [mp.mpf(1)] + [c[i] for i in reversed(range(p))]
    roots = mp.polyroots(desc, maxsteps=2000, extraprec=2000)
    out = []
    for r in roots:
        if abs(mp.im(r)) > mp.mpf(10) ** (-200):
            raise RuntimeError("complex extension node %s" % r)
        out.append(mp.re(r))
    del deg
    return sorted(out)


def interpolatory_weights(nodes, moment):
    n = len(nodes)
    v = mp.matrix(n, n)
    rhs = mp.matrix(n, 1)
    for k in range(n):
        for i, x in enumerate(nodes):
            v[k, i] = x ** k
        rhs[k] = moment(k)
    return mp.lu_solve(v, rhs)


def build(additions, moment):
    levels = [[mp.mpf(0)]]  # new nodes per level
    for p in additions:
        old = [x for lvl in levels for x in lvl]
        levels.append(extend(old, p, moment))
    weights = []
    for l in range(len(levels)):
        nodes = [x for lvl in levels[: l + 1] for x in lvl]
        w = interpolatory_weights(nodes, moment)
        weights.append([w[i] for i in range(len(nodes))])
    return levels, weights


def fmt(x):
    return mp.nstr(x, 20, min_fixed=0, max_fixed=0, strip_zeros=False)


def emit(name, levels, weights, transform):
    print("// clang-format off")
    print("constexpr std::array<double, %d> k%sNodes = {" % (sum(map(len, levels)), name))
    for l, lvl in enumerate(levels):
        print("    // level %d" % l)
        for x in lvl:
            print("    %s," % fmt(transform(x)))
    print("};")
    print()
    total = sum(len(w) for w in weights)
    print("constexpr std::array<double, %d> k%sWeights = {" % (total, name))
    for l, w in enumerate(weights):
        print("    // level %d" % l)
        for x in w:
            print("    %s," % fmt(x))
    print("};")
    print("// clang-format on")
    print()


def main():
    print("// Generated by scripts/generate_nested_tables.py. Do not edit.")
    print()
    sys.stderr.write("patterson...\n")
    p_levels, p_weights = build([2, 4, 8, 16, 32, 64], uniform_moment)
    # Patterson nodes stored as lower-tail probabilities u = (1 - |t|) / 2 with
    # the sign of t kept separately: the node on (0,1) is u for t <= 0 and
    # 1 - u for t > 0. Keeping u avoids cancellation near the endpoints.
    emit("PattersonTail", p_levels, p_weights, lambda t: (1 - abs(t)) / 2)
    print("constexpr std::array<signed char, %d> kPattersonSide = {" % sum(map(len, p_levels)))
    print("    " + ", ".join(("1" if t > 0 else "-1" if t < 0 else "0") for lvl in p_levels for t in lvl))
    print("};")
    print()
    sys.stderr.write("genz-keister...\n")
    g_levels, g_weights = build([2, 6, 10, 16], gaussian_moment)
    emit("GenzKeister", g_levels, g_weights, lambda y: y)


if __name__ == "__main__":
    main()
