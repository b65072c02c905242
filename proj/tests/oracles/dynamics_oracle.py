"""Reference emitter amplitudes from a dense-free Krylov exponential.

Builds the Hatano-Nelson ring with one emitter directly from the hopping
amplitudes and propagates with scipy's expm_multiply. Values printed here are
frozen into test_dynamics.cpp.
"""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply


def hn_emitter(J, kappa, g, delta, L):
    n = L + 1
    rows, cols, vals = [], [], []
    for x in range(L):
        s = 1 + x
        rows.append(s); cols.append(s); vals.append(-1j * kappa)
        rows.append(1 + (x + 1) % L); cols.append(s); vals.append(J + kappa / 2)
        rows.append(1 + (x - 1) % L); cols.append(s); vals.append(J - kappa / 2)
    e = 1 + L // 2
    rows += [0, e, 0]; cols += [0, 0, e]; vals += [delta, g, g]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n)), e


def run(J, kappa, g, delta, times, L=801):
    H, e = hn_emitter(J, kappa, g, delta, L)
    psi = np.zeros(H.shape[0], complex)
    psi[0] = 1
    out = []
    for t in times:
        v = expm_multiply(-1j * t * H, psi)
        out.append((v[0], v[e + 3], v[e - 2]))
    return out


if __name__ == "__main__":
    for g, delta in [(2.0, 0.0), (5.0, 0.0), (0.5, -1j)]:
        print(f"g={g} delta={delta}")
        for t, (c, r3, l2) in zip([1.0, 5.0, 10.0], run(2.5, 1.0, g, delta, [1.0, 5.0, 10.0])):
            print(f"  t={t}: ce={c.real:.17g}{c.imag:+.17g}i  x+3={r3.real:.17g}{r3.imag:+.17g}i  x-2={l2.real:.17g}{l2.imag:+.17g}i")
    # unidirectional chain
    H, e = hn_emitter(0.5, 1.0, 1.0, 0.0, 401)
    psi = np.zeros(H.shape[0], complex); psi[0] = 1
    v = expm_multiply(-1j * 7.0 * H, psi)
    print(f"unidirectional g=1 t=7: {v[0].real:.17g}{v[0].imag:+.17g}i")
