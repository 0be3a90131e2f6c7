"""High-precision reference values for the special-function tests.

Run with `python3 tests/oracles/specfun_oracle.py`; the printed values are
frozen into tests/unit/test_specfun.cpp. Uses mpmath at 50 digits and is
independent of the C++ evaluation path (no log-space tricks, no asymptotic
series, direct 2-D integration where noted).
"""
import mpmath as mp

mp.mp.dps = 50


def log1perf(y):
    return mp.log(mp.erfc(-y))


def q_2d(theta, a1, a2):
    m = theta + a2
    inner = lambda z2: mp.quad(lambda z1: mp.exp(-((z1 - m) ** 2 + z2 ** 2) / 2),
                               [a1 * z2, m, m + 20, mp.inf])
    return mp.quad(inner, [0, 2, 6, mp.inf])


def log_q_steep(theta, a1, a2):
    # Inner integral in closed form; breakpoints follow the decay scale 1/(a1 |m|).
    m = theta + a2
    f = lambda z: mp.exp(-z ** 2 / 2) * mp.sqrt(mp.pi / 2) * mp.erfc((a1 * z - m) / mp.sqrt(2))
    s = 1 / (a1 * abs(m))
    return mp.log(mp.quad(f, [0, s, 4 * s, 16 * s, 64 * s, 1, mp.inf]))


def log_p(theta, a1, a2):
    return theta ** 2 / 2 - mp.log(mp.pi) + mp.log(q_2d(theta, a1, a2))


if __name__ == "__main__":
    for y in ["-3", "-6.5", "-10", "-30", "2.5", "0.1"]:
        print("log1perf(%s) = %s" % (y, mp.nstr(log1perf(mp.mpf(y)), 20)))
    print("log_pfun(10,0.5,0) - 50 = %s" % mp.nstr(log_p(mp.mpf(10), mp.mpf("0.5"), mp.mpf(0)) - 50, 20))
    print("log_pfun(0,0,-8) = %s" % mp.nstr(mp.log(mp.erfc(8 / mp.sqrt(2)) / 2), 20))
    print("pfun(0.3,0.8,-0.5) = %s" % mp.nstr(mp.exp(log_p(mp.mpf("0.3"), mp.mpf("0.8"), mp.mpf("-0.5"))), 20))
    print("log_qfun(-6,40,0) = %s" % mp.nstr(log_q_steep(mp.mpf(-6), mp.mpf(40), mp.mpf(0)), 20))
    print("log_qfun(-8,44.7,0.5) = %s" % mp.nstr(log_q_steep(mp.mpf(-8), mp.mpf("44.7"), mp.mpf("0.5")), 20))
    print("qfun(-1.2,2.5,0.7) = %s" % mp.nstr(q_2d(mp.mpf("-1.2"), mp.mpf("2.5"), mp.mpf("0.7")), 20))
