"""Independent high-precision values for the self-energy unit tests.

Integrates the Bloch-space resolvent directly with mpmath; nothing here
shares code with the C++ library. Output is pasted into test_selfenergy.cpp.
"""
import mpmath as mp

mp.mp.dps = 30
I = mp.mpc(0, 1)


def hn(z, x, J, kappa):
    f = lambda k: mp.e**(I * k * x) / (z - (2 * J * mp.cos(k) - I * kappa * (mp.sin(k) + 1)))
    return mp.quad(f, mp.linspace(-mp.pi, mp.pi, 9)) / (2 * mp.pi)


def pt(z, x, J, kappa, to, frm):
    def f(k):
        h = mp.matrix([[-I * kappa, J * (1 + mp.e**(-I * k))], [J * (1 + mp.e**(I * k)), 0]])
        g = (z * mp.eye(2) - h) ** -1
        return mp.e**(I * k * x) * g[to, frm]
    return mp.quad(f, mp.linspace(-mp.pi, mp.pi, 9)) / (2 * mp.pi)


def wick(z, J):
    f = lambda k: 1 / (z + 2 * I * J * (mp.cos(k) + 1))
    return mp.quad(f, mp.linspace(-mp.pi, mp.pi, 9)) / (2 * mp.pi)


def swap2d(z, kappa):
    w = z + 2 * I * kappa
    f = lambda kx, ky: w / (w**2 - 2 * kappa**2 * (mp.cos(kx) + mp.cos(ky)))
    return mp.quad(f, [-mp.pi, 0, mp.pi], [-mp.pi, 0, mp.pi]) / (4 * mp.pi**2)


def show(tag, v):
    print(f"{tag}: {mp.nstr(mp.re(v), 17)} {mp.nstr(mp.im(v), 17)}")


if __name__ == "__main__":
    show("hn J=0.15 z=0.3-0.2i x=0", hn(mp.mpc(0.3, -0.2), 0, 0.15, 1))
    show("hn J=0.15 z=0.3-0.2i x=-2", hn(mp.mpc(0.3, -0.2), -2, 0.15, 1))
    show("hn J=2.5 z=1+0.5i x=3", hn(mp.mpc(1, 0.5), 3, 2.5, 1))
    show("hn J=2.5 z=1+0.5i x=-4", hn(mp.mpc(1, 0.5), -4, 2.5, 1))
    show("pt AA x=0 z=0.4+0.1i", pt(mp.mpc(0.4, 0.1), 0, 1, 1, 0, 0))
    show("pt BB x=2 z=0.4+0.1i", pt(mp.mpc(0.4, 0.1), 2, 1, 1, 1, 1))
    show("pt AB x=1 z=0.4+0.1i", pt(mp.mpc(0.4, 0.1), 1, 1, 1, 0, 1))
    show("pt AB x=-1 z=0.4+0.1i", pt(mp.mpc(0.4, 0.1), -1, 1, 1, 0, 1))
    show("pt BA x=1 z=0.4+0.1i", pt(mp.mpc(0.4, 0.1), 1, 1, 1, 1, 0))
    show("wick J=1 z=0.5+0.2i", wick(mp.mpc(0.5, 0.2), 1))
    show("swap2d z=1-0.1i", swap2d(mp.mpc(1, -0.1), 1))
    show("hn J=0.15 z=0.05-0.5i x=-3", hn(mp.mpc(0.05, -0.5), -3, 0.15, 1))
