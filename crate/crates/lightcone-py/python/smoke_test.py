"""Smoke test for the Python bindings: python python/smoke_test.py"""

import math

import lightcone_py as lc


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    p = lc.FormParams(2, 1)
    assert (p.n, p.d) == (2, 1)

    s = complex(3.5, 0.5)
    x, y = [0.3, 0.7], 1.1
    fourier = p.eisenstein(s, x, y)
    direct = p.eisenstein_direct(s, x, y)
    assert close(fourier, direct, 1e-5), (fourier, direct)

    assert close(lc.FormParams(5).omega(), 405 / math.pi**3, 1e-9)
    assert lc.cusp_volume_vp1(4) == (1, 96)
    assert close(lc.volume(3) * lc.FormParams(3).omega(), 1 / 12, 1e-9)
    assert close(lc.r_series(3, 5), lc.r_closed(3, 5), 1e-7)
    assert close(lc.zeta(2), math.pi**2 / 6, 1e-12)
    assert close(lc.bessel_k(0.5, 1.0), math.sqrt(math.pi / 2) * math.exp(-1), 1e-10)

    assert lc.FormParams(1).count(5).count == 12
    assert lc.FormParams(1).count(0.5).count == 0

    try:
        p.phi(2)
    except lc.PoleError:
        pass
    else:
        raise AssertionError("expected a pole at s = 2")

    try:
        lc.FormParams(2, 2)
    except ValueError:
        pass
    else:
        raise AssertionError("even d must be rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
