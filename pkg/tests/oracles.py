"""Reference values computed independently with mpmath at 40 digits.

Regenerate with ``python scripts/make_oracles.py``.  Each value is written
directly from the defining series or product, not from skly code.
"""

# theta_1(0.3+0.1i | 0.8i) via mpmath.jtheta(1, pi z, e^{i pi tau})
THETA1_03_01I_TAU08I = 0.9029524315077162 + 0.20752925054607516j
# theta_3(0.2 | i) = sum_n q^{n^2} e^{2 pi i n z}
THETA3_02_TAUI = 1.026702027634758 + 0j
# prod_{m>=1} (1 - q^{2m}) at tau = 0.8i
G_TAU08I = 0.9933955278442754 + 0j
# elliptic gamma at z=0.2+0.1i, a_+=1, a_-=0.7, double loop to 1e-45
GAMMA_02_01I_AP1_AM07 = 0.9979556261622575 + 0.011135814110370996j
# R_+(0.3) with a_+ = 0.9, 200 factors
RPLUS_03_AP09 = 1.0401997548481052 + 0j
# theta(z)^4 / theta(2z) at z=0.17+0.05i, tau=0.9i
V1_ZERO_A_NU0_TAU09I = 0.052058791321059755 + 0.06152998330930843j
# theta(2z-2eta) theta(2z) theta(2z+4eta) at z=0.2, eta=0.13i, tau=0.9i
PKM_3_1_Z02_ETA013I_TAU09I = 3.4265411257204685 + 0.403946263244314j
# D_0 applied to cos(2 pi z) at z=0.2, tau=0.9i, eta=0.17i, nu=0.05
D0_COS_Z02 = -0.13621222773306288 + 0.5197309171580291j
# order-2 ratio with the zeros listed in make_oracles.py, at z=0.23+0.07i
RATIO_K2_ZEROS = (0.1, -0.2 + 0.1j, 0.3j, 0.05 - 0.15j, 0.22, -0.31 + 0.02j, 0.12 - 0.2j)
RATIO_K2_GENERIC = 0.5528119254210184 - 0.38361888116535237j
