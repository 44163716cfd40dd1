"""Frozen high-precision reference values used across the test suite.

All constants were computed independently at 50-digit working precision
(closed forms where available, double-exponential quadrature otherwise)
and rounded to 20 significant digits.  Tests compare library output
against these literals; none of them are produced by the library itself.
"""

import math

# sqrt(pi) * Gamma((1+alpha)/(2 alpha)) / Gamma(1/(2 alpha))
C_ALPHA = {
    0.5: 1.570796326794896619,
    1.0: 1.0,
    1.5: 0.7468342002221868131,
    2.0: 0.5990701173677961037,
    3.0: 0.4311849265382984225,
}

GAMMA = {
    0.1: 9.513507698668731836,
    0.25: 3.625609908221908312,
    0.5: 1.772453850905516027,
    1.5: 0.886226925452758014,
    3.5: 3.323350970447842551,
    5.0: 24.0,
    7.75: 3057.822671192607210,
    10.0: 362880.0,
    12.5: 136843365.4655658573,
    20.0: 121645100408832000.0,
    30.1: 1.24049957529766317e31,
    42.0: 3.34525266131638071e49,
    50.0: 6.08281864034267561e62,
}

# (a, b, c, z) -> 2F1(a, b; c; z)
HYP2F1 = {
    (0.5, 0.5, 1.5, 0.25): 1.047197551196597746,
    (0.5, -0.25, 0.75, 1.0): C_ALPHA[2.0],
    (0.5, -0.25, 0.75, 0.5): 0.897921799550300289,
    (0.5, -0.25, 0.75, 0.95): 0.704196255414693403,
    (0.5, -1.0 / 6.0, 5.0 / 6.0, 0.3): 0.966312393266306973,
    (0.5, 0.75, 1.75, 0.9375): 1.490644440094768589,
    (0.5, 0.5, 1.5, 0.95): 1.380231154269966081,
    (0.5, 1.0 / 6.0, 7.0 / 6.0, 0.2): 1.015591644611503883,
    (0.5, -1.0 / 3.0, 2.0 / 3.0, 0.8): 0.705752059712187811,
}

# power-law alpha = 2 at tau = 1, keyed where relevant by t0
PW2 = {
    "rho_05": 0.5568281044616782474,        # rho(1, 0.5)
    "rho_m05": 0.6413121302739139601,       # rho(1, -0.5)
    "rho_025": 0.5938574162330837456,       # rho(1, 0.25)
    "f_0": 0.20046494131610194814,          # f(1, 0)
    "f_05": 0.1679267530899595377,
    "f_025": 0.1958392982219173095,
    "f_m05": 0.2330031295422443586,
    "g_05": -0.4410905652535067897,
    "g_m05": -0.2851493153369421887,
    "g_025": -0.3700549300245430191,
    "J_05": 0.6898317843210150976,
    "J_025": 1.699161219717372127,
    "dgdrho_05": 1.832597443529809803,
    "dgdrho_m05": 1.473463420448003978,
    "dgdrho_025": 2.067272276093355446,
    "dgdtau_05": -1.020441760722021436,
    "dgdtau_m05": -0.94494996504819718563,
    "dgdtau_025": -1.2276649725310862051,
    "dgdtau_m075": -0.60029918614747348393,
    "chi_05": 1.379663568642030195,         # chi_{0.5}(1)
    "I1_05": -0.5037802592698786131,
    "I2_05": 0.4249104065919136805,
    "I1pI2_025": -0.18253859784370619,
    "dtau_f0": -0.20046494131610194814,     # equals -f(1,0) for alpha=2
    "dG_dtau_05": -0.086857431967462706,
    "t0_rho03": 0.9021272939361449586,      # solve_t0(1, 0.3)
    "dt0_drho_rho03": -0.71402541343416671564,
    "dt0_dtau_rho03": 1.1163349179663949733,
    "g_rho03": -0.8253921024705479124,
    "bnd_dgdrho": 2.3962804694711844149,    # 2*alpha*C/tau
    "bnd_dgdtau": -1.4355400220922599956,   # -2*alpha*C^2/tau
    "ang_gth_05": 0.1189669726648788728,    # k=0 g_thetatheta at t0=0.5
    "ang_lam_05": -1.987717479862067726,    # k=0 lambda at t0=0.5
    "bnd_lambda": -2.786407859371353718,    # -1/rho_M^2
    "k1_gth_05": 0.0602444352096682180,     # k=+1 at t0=0.5
    "km1_gth_05": 0.2164460901285336183,    # k=-1 at t0=0.5
}

PW3 = {
    "bnd_dgdrho": 2.587109559229790535,
    "bnd_dgdtau": -1.1155226452430268434,
    "rho_max": 0.64823364295429240885,      # interior zero of g_tautau
    "two_rho_m": 0.8623698530765968450,
}

SINH = {
    "rho_m_05": 0.4803810791337294486,
    "rho_m_1": 0.8657694832396586243,
    "rho_m_2": 1.3017603360460150999,
    "rate_1": 0.6480542736638853996,
    "f0_1": 0.2280799320498593302,
    "g_bnd_1": -0.4199743416140260694,
    "J_0p_1": 0.49355434756457307527,
    "bnd_dgdrho_1": 0.98710869512914615054,
    "rho_05": 0.7513575652103332616,        # rho(1, 0.5)
    "g_05": -0.53401430763895573448,
    "f_05": 0.1744803013394549611,
    "rho_m05": 0.98018140126898398695,      # rho(1, -0.5)
    "g_m05": -0.31961578479733825833,
    "dgdtau_m05": 0.1157197587409162101,
    "dgdrho_m05": 0.77184553576037788556,
    "rho_max_1": 1.7315389664793172486,     # = 2 rho_M (no interior zero)
}

# lambda_gamma with Lambda=3, gamma=0.5, A=1 at tau = 1
LG05 = {
    "a_1": 0.77040454474503261698,
    "a_05": 0.2789653976904557908,
    "adot_1": 1.212950980788632527,
    "rho_m_1": 0.7429305586658079033,
    "rate_1": 0.6164747393288525351,
    "f0_1": 0.3161918880034115287,
    "g_bnd_1": -0.3800411042305766826,
    "rho_05": 0.6639656827197657169,        # rho(1, 0.5)
    "g_05": -0.4876220873436043781,
    "rho_max_1": 1.4858611173316158066,     # = 2 rho_M
}

MILNE = {
    "dG_dtau_05": -0.15470053837925152902,  # tau=1, t0=0.5
    "dt0_drho_06": -0.75,                   # tau=1, rho=0.6
    "dt0_dtau_06": 1.25,
    "dt0_dtau_rho14": 0.25,                 # tau=1, rho=1.4 (t0 < 0)
}

# chi(tau, 0) = tau^(1-alpha)/(2 alpha) * B(1/(2 alpha) - 1/2, 1/2) at tau=1
CHI_AT_ZERO = {
    0.5: math.pi,
    0.75: 4.857301295775163224,
    0.9: 10.749977292460236170,
}
