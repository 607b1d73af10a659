#pragma once

// Values for (c, theta, m) = (1.05, 2, 2), evaluated at 256-bit precision by
// tests/oracles/generate_frozen_values.py.  Rounded to binary64 on use.

namespace tanprime::reference {

inline constexpr double c = 1.05;
inline constexpr double theta = 2.0;
inline constexpr long m = 2;

inline constexpr double X = 1430.785725039779704846619;
inline constexpr double epsilon = 0.6551522232513646957343527;
inline constexpr double tau = 0.001089597432907094670149814;
inline constexpr double H = 1.558980453043460169556616;
inline constexpr double delta1 = 813.5518298171486111451131;
inline constexpr double delta2 = 1620.247225592971423284408;
inline constexpr double N_induced = 13888.55622460181407134913;

struct LambdaBounds {
    double theta;
    double lo;
    double hi;
};

inline constexpr LambdaBounds lambda_bounds[] = {
    {1.5, 1.53647977900763885370379, 1.554355565318348923923131},
    {2.0, 1.549193338482966754071706, 1.559914527573012037859235},
    {3.0, 1.553616252976929433438831, 1.558205987922424766773703},
};

inline constexpr double geometric_mid = 1148.109356785023454005596;
inline constexpr double phase_at_mid = 1491.127176465213518081567;
inline constexpr double phase_at_X = 4629.518741533938023783044;
inline constexpr double phase_d1_at_X = 17.41857087503310631630276;
inline constexpr double phase_d2_at_X = 0.06152960898587062091955502;

inline constexpr unsigned prime_count = 115;
inline constexpr unsigned first_prime = 821;
inline constexpr unsigned last_prime = 1619;
inline constexpr double theta_sum = 814.7653405522390442235918;

// S(alpha) at alpha = tau rounded to binary64.
inline constexpr double s_at_tau_re = 8.236908846907837648150527;
inline constexpr double s_at_tau_im = 72.54317968099803788574825;

}  // namespace tanprime::reference
