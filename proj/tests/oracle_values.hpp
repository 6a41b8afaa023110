#pragma once
// Generated by tests/oracles/oracles.py (mpmath, 50 digits). Do not edit.

namespace oracle {
inline constexpr double tau_half = 6.9314718055994530942e-1;
inline constexpr double uk_a_u = 1.0986122886681096914;
inline constexpr double uk_a_ut = 1.3333333333333333333;
inline constexpr double uk_a_ux = 2.6666666666666666667;
inline constexpr double uk_a_utt = 3.5555555555555555556;
inline constexpr double uk_a_utx = 4.4444444444444444444;
inline constexpr double uk_a_uxx = 3.5555555555555555556;
inline constexpr double uk_a_q = 6.3333333333333333333;
inline constexpr double uk_b_u = 2.1972245773362193828;
inline constexpr double uk_b_ut = 6.6666666666666666667;
inline constexpr double uk_b_ux = -1.3333333333333333333e+1;
inline constexpr double uk_b_utt = 4.4444444444444444444e+1;
inline constexpr double uk_b_utx = -5.5555555555555555556e+1;
inline constexpr double uk_b_uxx = 4.4444444444444444444e+1;
inline constexpr double uk_b_q = 1.3433333333333333333e+2;
inline constexpr double xstar_small = 4.9999987500006249996e-7;
inline constexpr double j_on_curve_s07 = 9.0384039740479766715e-2;
inline constexpr double j_centre_s07 = 1.0913140311804008909e-1;
inline constexpr double b_elliptic = -7.0027236475367378013e-1;
inline constexpr double h0_sin = 7.071067811865475244e-1;
inline constexpr double h1_sin = 2.3312662225804841162;
inline constexpr double h2_sin = 7.3579445307467423125;
inline constexpr double c2s_tsin = 7.7184292390414888895;
inline constexpr double pert_P = -3.5079583862596276167e-3;
inline constexpr double pert_w = 5.2900672706322581625e-4;
inline constexpr double pert_wt = 3.526711513754838775e-3;
inline constexpr double pert_wx = 2.2874416615418669171e-3;
inline constexpr double pert_wtt = 1.1755705045849462583e-2;
inline constexpr double pert_wtx = 1.5249611076945779447e-2;
inline constexpr double pert_wxx = -5.2210871216290906318e-3;
inline constexpr double bi_gminus = -1.3392;
}  // namespace oracle
