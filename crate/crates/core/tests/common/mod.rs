//! Frozen values computed independently in 30-digit arithmetic.
#![allow(dead_code, clippy::excessive_precision)]

/// `(x, Gamma(x))`.
pub const GAMMA: [(f64, f64); 8] = [
    (0.15, 6.2202728740498776174),
    (0.35, 2.5461469772122880276),
    (0.6, 1.4891922488128171024),
    (1.3, 0.89747069630627718849),
    (2.75, 1.6083594219855456592),
    (-0.25, -4.9016668098607105805),
    (-0.6, -3.6969325729294803718),
    (4.1, 6.812622863016678868),
];

/// `(N, s, C_{N,s}, Lambda_{N,s})`; `NAN` where `N <= 2s`.
pub const CONSTANTS: [(u32, f64, f64, f64); 25] = [
    (1, 0.1, 0.090313982871455613452, 0.48777442730992573469),
    (1, 0.25, 0.19947114020071633897, 0.13999967745248263087),
    (1, 0.4, 0.28195845299999037907, 0.017790930985801221111),
    (1, 0.6, 0.33354942991224811386, f64::NAN),
    (1, 0.9, 0.1649049388183027249, f64::NAN),
    (2, 0.1, 0.032551422029941055115, 0.77454225516539150876),
    (2, 0.25, 0.083241983875425065489, 0.51792989522583891799),
    (2, 0.4, 0.13207971389562194355, 0.32780257669761268424),
    (2, 0.6, 0.17674478557428508474, 0.1477502883057383496),
    (2, 0.9, 0.10084985986148907972, 0.009772764581095432162),
    (3, 0.1, 0.01724870016517071392, 0.92405313817033526369),
    (3, 0.25, 0.047620226950680727339, 0.81597791751976735986),
    (3, 0.4, 0.080775146774686166088, 0.70920803349696391088),
    (3, 0.6, 0.11678928917923955692, 0.56208413196481444995),
    (3, 0.9, 0.07348722122895846633, 0.32802047635502222193),
    (4, 0.1, 0.01139758338561818091, 1.0232519075865323823),
    (4, 0.25, 0.033120933016374363642, 1.0563396877642225066),
    (4, 0.4, 0.05885919017622427849, 1.0829082084016880671),
    (4, 0.6, 0.090015380127566676296, 1.098221995771828241),
    (4, 0.9, 0.060992864086907473626, 1.0457789676394569832),
    (5, 0.1, 0.0087846908582301140879, 1.097492461447332903),
    (5, 0.25, 0.026526480786255561006, 1.2599970970723436778),
    (5, 0.4, 0.048851902775025745397, 1.44106540984989891),
    (5, 0.6, 0.078067889226872073517, 1.7061284458859418123),
    (5, 0.9, 0.056140101660846756133, 2.1210901397736539603),
];

/// `(lambda / Lambda, beta)` for `N = 1, s = 1/4`.
pub const BETA_QUARTER: [(f64, f64); 3] = [
    (0.2, 0.02397829878160899989),
    (0.5, 0.068338214960984471746),
    (0.8, 0.13313399152797155361),
];
