"""High-precision reference values for the GaAs deformation-potential spectral density.

J(w) = w^3 / (4 pi^2 rho hbar c^5) * (D_e exp(-w^2 a_e^2 / 4c^2) - D_h exp(-w^2 a_h^2 / 4c^2))^2

with w in 1/s; the script reports J in 1/ps for w in 1/ps. Output values are
frozen in bath_oracle.rs.
"""
from mpmath import mp, mpf, exp, pi, findroot, diff

mp.dps = 40

rho = mpf(5370)
c = mpf(5110)
hbar = mpf("1.054571817e-34")
ev = mpf("1.602176634e-19")
d_e = 7 * ev
d_h = mpf("-3.5") * ev
a_e = mpf(4) * mpf("1e-9")
a_h = a_e / mpf("1.15")


def j_per_ps(w_ps):
    w = w_ps * mpf("1e12")
    bracket = d_e * exp(-w**2 * a_e**2 / (4 * c**2)) - d_h * exp(-w**2 * a_h**2 / (4 * c**2))
    return w**3 / (4 * pi**2 * rho * hbar * c**5) * bracket**2 * mpf("1e-12")


def polaron_shift_mev():
    from mpmath import quad, inf
    hbar_mev_ps = mpf("0.6582119569")
    return hbar_mev_ps * quad(lambda w: j_per_ps(w) / w, [0, 1, 2, 4, 8, inf])


if __name__ == "__main__":
    print("J(1 ps^-1) =", mp.nstr(j_per_ps(mpf(1)), 20))
    peak = findroot(lambda w: diff(j_per_ps, w), mpf("2.3"))
    print("argmax J  =", mp.nstr(peak, 20))
    print("polaron shift (meV) =", mp.nstr(polaron_shift_mev(), 20))
