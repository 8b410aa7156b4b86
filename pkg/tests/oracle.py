"""Scalar reference evaluation in mpmath, kept independent of the vectorised package code."""

import mpmath as mp

mp.mp.dps = 40


def sigmoid(x):
    return 1 / (1 + mp.e ** (-mp.mpf(x)))


def reference(W, V_dec, V_cls, X, T, kappa, S, sigma, cols):
    """Return a dict with win, H, O_dec, O_cls, loss, deltas, hidden delta and dL/dW."""
    W = [[mp.mpf(v) for v in row] for row in W]
    X = [mp.mpf(v) for v in X]
    n, d, C = len(W), len(X), len(T)
    sq = [sum((X[k] - W[j][k]) ** 2 for k in range(d)) for j in range(n)]
    win = min(range(n), key=lambda j: (sq[j], j))
    wr, wc = divmod(win, cols)
    H = []
    for j in range(n):
        r, c = divmod(j, cols)
        dist = mp.sqrt((r - wr) ** 2 + (c - wc) ** 2)
        H.append(mp.e ** (-dist / S) * mp.e ** (-sq[j] / mp.mpf(sigma) ** 2))
    O_dec = [sigmoid(sum(mp.mpf(V_dec[j][k]) * H[j] for j in range(n))) for k in range(d)]
    O_cls = [sigmoid(sum(mp.mpf(V_cls[j][l]) * H[j] for j in range(n))) for l in range(C)]
    kappa = mp.mpf(kappa)
    L = (1 - kappa) / 2 * sum((O_dec[k] - X[k]) ** 2 for k in range(d)) + kappa / 2 * sum(
        (O_cls[l] - T[l]) ** 2 for l in range(C)
    )
    dd = [(O_dec[k] - X[k]) * O_dec[k] * (1 - O_dec[k]) for k in range(d)]
    dc = [(O_cls[l] - T[l]) * O_cls[l] * (1 - O_cls[l]) for l in range(C)]
    dh = [
        ((1 - kappa) * sum(dd[k] * V_dec[j][k] for k in range(d)) + kappa * sum(dc[l] * V_cls[j][l] for l in range(C)))
        / mp.mpf(sigma) ** 2
        for j in range(n)
    ]
    gW = [[2 * dh[j] * H[j] * (X[k] - W[j][k]) for k in range(d)] for j in range(n)]
    return dict(win=win, H=H, O_dec=O_dec, O_cls=O_cls, loss=L, delta_dec=dd, delta_cls=dc, delta_hid=dh, grad_W=gW)


# the hand example shared by the core tests: 2x2 grid, d = 2, C = 2
HAND = dict(
    W=[[0.1, 0.2], [0.8, 0.3], [0.4, 0.9], [0.6, 0.6]],
    V_dec=[[0.5, -0.3], [0.2, 0.1], [-0.4, 0.7], [0.3, 0.3]],
    V_cls=[[0.2, -0.1], [-0.5, 0.4], [0.3, 0.3], [0.1, -0.2]],
    X=[0.3, 0.4],
    T=[0.0, 1.0],
    kappa=0.3,
    S=1,
    sigma=1.0,
    cols=2,
)

if __name__ == "__main__":
    out = reference(**HAND)
    for key, val in out.items():
        if isinstance(val, list):
            if val and isinstance(val[0], list):
                val = [[mp.nstr(v, 17) for v in row] for row in val]
            else:
                val = [mp.nstr(v, 17) for v in val]
        elif not isinstance(val, int):
            val = mp.nstr(val, 17)
        print(key, val)
    print("sigmoid(1)", mp.nstr(sigmoid(1), 17))
