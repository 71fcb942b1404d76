//! Every number the fixtures are calibrated against, in one place.
//!
//! Weekly targets are exact integer pins: per-year 10%-quantile counts, the
//! total deaths of the history years over the two analysis windows (weeks
//! 1–10 and 11–23), and the 2020 window totals. The window totals were
//! back-solved from the published per-million cells so that the whole table
//! reproduces within rounding. Daily targets are calibration bands hit by
//! tuning the level curves and noise parameters below.

/// Shift pins apply to the all-ages series only.
pub struct ShiftPins {
    /// Cumulative excess over weeks 10..=22 (window shifted left by one).
    pub t_minus: i64,
    /// Cumulative excess over weeks 12..=24 (window shifted right by one).
    pub t_plus: i64,
    /// Approximate week-10 excess used to seed the exact pinning.
    pub e10: f64,
    /// Approximate week-11 excess.
    pub e11: f64,
}

pub struct AgeSpecW {
    pub age: &'static str,
    pub population: u64,
    /// (year, 6th-smallest weekly count) for every history year.
    pub quantile_by_year: &'static [(i32, u64)],
    /// Per history year: total deaths over weeks 1..=10.
    pub h_win1_by_year: &'static [u64],
    /// Per history year: total deaths over weeks 11..=23.
    pub h_win2_by_year: &'static [u64],
    /// 2020 total deaths over weeks 1..=10.
    pub s1_2020: u64,
    /// 2020 total deaths over weeks 11..=23.
    pub s2_2020: u64,
    pub shift: Option<ShiftPins>,
    /// Epidemic bump centre (week) and width for the 2020 curve.
    pub epi_peak: f64,
    pub epi_width: f64,
    /// Exponent of the week 11→23 trend template: 1 = linear, >1 pushes the
    /// rise towards the end of the window.
    pub epi_ramp_pow: f64,
    /// Free-path week-23 excess as a fraction of the window excess.
    pub e23_frac: f64,
}

pub struct CountrySpec {
    pub code: &'static str,
    pub first_year: i32,
    pub last_year: i32,
    pub ages: [AgeSpecW; 3],
    pub seed: u64,
}

pub const EW: CountrySpec = CountrySpec {
    code: "ew",
    first_year: 2015,
    last_year: 2019,
    seed: 0x57A7_0001,
    ages: [
        AgeSpecW {
            age: "0+",
            population: 59_000_000,
            quantile_by_year: &[
                (2015, 9028),
                (2016, 8968),
                (2017, 8850),
                (2018, 8791),
                (2019, 8968),
            ],
            h_win1_by_year: &[145_000, 133_000, 138_000, 144_000, 130_300],
            h_win2_by_year: &[127_500, 124_500, 126_000, 126_500, 124_145],
            s1_2020: 112_808,
            s2_2020: 184_316,
            shift: Some(ShiftPins {
                t_minus: 57_088,
                t_plus: 63_088,
                e10: -300.0,
                e11: -250.0,
            }),
            epi_peak: 16.0,
            epi_width: 2.4,
            epi_ramp_pow: 1.0,
            e23_frac: 0.02,
        },
        AgeSpecW {
            age: "65+",
            population: 11_000_000,
            quantile_by_year: &[
                (2015, 7535),
                (2016, 7469),
                (2017, 7370),
                (2018, 7370),
                (2019, 7546),
            ],
            h_win1_by_year: &[105_500, 96_500, 99_500, 104_535, 94_300],
            h_win2_by_year: &[106_500, 104_000, 105_000, 105_500, 103_890],
            s1_2020: 95_799,
            s2_2020: 158_108,
            shift: None,
            epi_peak: 16.0,
            epi_width: 2.4,
            epi_ramp_pow: 1.0,
            e23_frac: 0.02,
        },
        AgeSpecW {
            age: "64-",
            population: 48_000_000,
            quantile_by_year: &[
                (2015, 1421),
                (2016, 1392),
                (2017, 1344),
                (2018, 1392),
                (2019, 1392),
            ],
            h_win1_by_year: &[16_600, 15_900, 16_100, 16_300, 15_500],
            h_win2_by_year: &[19_100, 18_900, 19_000, 19_050, 18_750],
            s1_2020: 15_648,
            s2_2020: 24_432,
            shift: None,
            epi_peak: 16.5,
            epi_width: 2.6,
            epi_ramp_pow: 1.0,
            e23_frac: 0.02,
        },
    ],
};

pub const DE: CountrySpec = CountrySpec {
    code: "de",
    first_year: 2016,
    last_year: 2019,
    seed: 0x57A7_0002,
    ages: [
        AgeSpecW {
            age: "0+",
            population: 83_000_000,
            quantile_by_year: &[
                (2016, 15_687),
                (2017, 15_853),
                (2018, 16_019),
                (2019, 16_185),
            ],
            h_win1_by_year: &[200_457, 200_457, 212_029, 200_457],
            h_win2_by_year: &[226_000, 228_500, 243_051, 226_209],
            s1_2020: 192_394,
            s2_2020: 238_542,
            shift: Some(ShiftPins {
                t_minus: 2_760,
                t_plus: 12_094,
                e10: -1_400.0,
                e11: -1_100.0,
            }),
            epi_peak: 15.0,
            epi_width: 2.2,
            epi_ramp_pow: 2.6,
            e23_frac: 0.40,
        },
        AgeSpecW {
            age: "65+",
            population: 17_500_000,
            quantile_by_year: &[
                (2016, 13_213),
                (2017, 13_388),
                (2018, 13_545),
                (2019, 13_860),
            ],
            h_win1_by_year: &[166_000, 167_000, 175_602, 166_000],
            h_win2_by_year: &[185_768, 187_000, 196_504, 184_536],
            s1_2020: 159_008,
            s2_2020: 196_782,
            shift: None,
            epi_peak: 15.0,
            epi_width: 2.2,
            epi_ramp_pow: 2.6,
            e23_frac: 0.40,
        },
        AgeSpecW {
            age: "64-",
            population: 65_500_000,
            quantile_by_year: &[
                (2016, 2_489),
                (2017, 2_424),
                (2018, 2_424),
                (2019, 2_424),
            ],
            h_win1_by_year: &[27_600, 27_400, 27_698, 27_100],
            h_win2_by_year: &[32_900, 32_800, 33_250, 32_600],
            s1_2020: 26_074,
            s2_2020: 32_167,
            shift: None,
            epi_peak: 15.5,
            epi_width: 2.4,
            epi_ramp_pow: 2.6,
            e23_frac: 0.40,
        },
    ],
};

pub const BE: CountrySpec = CountrySpec {
    code: "be",
    first_year: 2009,
    last_year: 2019,
    seed: 0x57A7_0003,
    ages: [
        AgeSpecW {
            age: "0+",
            population: 11_500_000,
            quantile_by_year: &[
                (2009, 1770),
                (2010, 1778),
                (2011, 1783),
                (2012, 1790),
                (2013, 1797),
                (2014, 1803),
                (2015, 1809),
                (2016, 1817),
                (2017, 1817),
                (2018, 1817),
                (2019, 1829),
            ],
            h_win1_by_year: &[
                23_400, 23_500, 23_600, 23_300, 24_000, 23_500, 24_200, 23_600, 24_100, 23_390,
                24_000,
            ],
            h_win2_by_year: &[
                26_300, 26_400, 26_350, 26_200, 26_700, 26_300, 26_900, 26_450, 26_800, 26_303,
                26_500,
            ],
            s1_2020: 22_563,
            s2_2020: 35_340,
            shift: Some(ShiftPins {
                t_minus: 8_446,
                t_plus: 9_289,
                e10: -120.0,
                e11: -100.0,
            }),
            epi_peak: 15.0,
            epi_width: 2.0,
            epi_ramp_pow: 1.0,
            e23_frac: 0.035,
        },
        AgeSpecW {
            age: "65+",
            population: 2_200_000,
            quantile_by_year: &[
                (2009, 1460),
                (2010, 1466),
                (2011, 1471),
                (2012, 1477),
                (2013, 1483),
                (2014, 1490),
                (2015, 1497),
                (2016, 1505),
                (2017, 1514),
                (2018, 1511),
                (2019, 1549),
            ],
            h_win1_by_year: &[
                22_100, 22_200, 22_300, 22_000, 22_600, 22_200, 22_800, 22_300, 22_700, 22_215,
                22_600,
            ],
            h_win2_by_year: &[
                24_700, 24_800, 24_750, 24_600, 25_100, 24_700, 25_300, 24_850, 25_200, 24_692,
                24_900,
            ],
            s1_2020: 19_448,
            s2_2020: 31_241,
            shift: None,
            epi_peak: 15.0,
            epi_width: 2.0,
            epi_ramp_pow: 1.0,
            e23_frac: 0.035,
        },
        AgeSpecW {
            age: "64-",
            population: 9_300_000,
            quantile_by_year: &[
                (2009, 300),
                (2010, 302),
                (2011, 300),
                (2012, 305),
                (2013, 306),
                (2014, 308),
                (2015, 310),
                (2016, 316),
                (2017, 316),
                (2018, 298),
                (2019, 298),
            ],
            h_win1_by_year: &[
                3_600, 3_620, 3_640, 3_590, 3_660, 3_610, 3_680, 3_630, 3_650, 3_608, 3_620,
            ],
            h_win2_by_year: &[
                4_380, 4_370, 4_400, 4_350, 4_420, 4_380, 4_440, 4_390, 4_430, 4_341, 4_400,
            ],
            s1_2020: 3_349,
            s2_2020: 4_410,
            shift: None,
            epi_peak: 15.5,
            epi_width: 2.2,
            epi_ramp_pow: 1.0,
            e23_frac: 0.035,
        },
    ],
};

/// Published per-million Table-1 quantile rates, 2016–2019, used by `check`.
pub const TABLE1: [(&str, &str, [f64; 4]); 9] = [
    ("ew", "0+", [152.0, 150.0, 149.0, 152.0]),
    ("de", "0+", [189.0, 191.0, 193.0, 195.0]),
    ("be", "0+", [158.0, 158.0, 158.0, 159.0]),
    ("ew", "65+", [679.0, 670.0, 670.0, 686.0]),
    ("de", "65+", [755.0, 765.0, 774.0, 792.0]),
    ("be", "65+", [684.0, 688.0, 687.0, 704.0]),
    ("ew", "64-", [29.0, 28.0, 29.0, 29.0]),
    ("de", "64-", [38.0, 37.0, 37.0, 37.0]),
    ("be", "64-", [34.0, 34.0, 32.0, 32.0]),
];

/// Published per-million cumulative excess cells used by `check`:
/// (country, age, [q 1–10, q 11–23, hist 1–10, hist 11–23]).
pub const TABLE2: [(&str, &str, [f64; 4]); 9] = [
    ("ew", "0+", [402.0, 1161.0, -428.0, 993.0]),
    ("ew", "65+", [1964.0, 5605.0, -388.0, 4830.0]),
    ("ew", "64-", [36.0, 132.0, -9.0, 114.0]),
    ("de", "0+", [398.0, 378.0, -132.0, 92.0]),
    ("de", "65+", [1391.0, 1241.0, -551.0, 476.0]),
    ("de", "64-", [28.0, 10.0, -21.0, -11.0]),
    ("be", "0+", [382.0, 1019.0, -98.0, 771.0]),
    ("be", "65+", [1965.0, 5263.0, -1326.0, 2895.0]),
    ("be", "64-", [30.0, 45.0, -30.0, 2.0]),
];

/// One constant plateau of a daily level curve: (midpoint day, half width,
/// deaths per day).
pub type Plateau = (usize, usize, f64);

pub struct DailySpec {
    pub code: &'static str,
    pub population: u64,
    pub start_ymd: (i32, u32, u32),
    pub n: usize,
    pub head_level: f64,
    pub tail_level: f64,
    pub plateaus: &'static [Plateau],
    /// Waypoints `(day, level)` the ramps between plateaus pass through:
    /// onset steps, slow sags, knees in a decline. Each must fall strictly
    /// inside a ramp span, with its level inside the span's range.
    pub bends: &'static [(usize, f64)],
    /// short forced-level runs (start, len, level): flu/heat blips that pin
    /// the tube locally without adding a fitted extreme
    pub spikes: &'static [(usize, usize, f64)],
    /// Multiplicative day-of-week pattern: fundamental and first harmonic
    /// coefficients (a1, b1, a2, b2) of cos/sin(2πd/7) and cos/sin(4πd/7).
    pub weekly: [f64; 4],
    /// Multiplicative annual modulation amplitude; peaks `annual_peak_day`
    /// days after the series start.
    pub annual_amp: f64,
    pub annual_peak_day: f64,
    /// Additive MA(1) intensity noise: u(t) = σ(ε(t) + θ·ε(t−1)).
    pub ma_theta: f64,
    pub ma_sigma: f64,
    pub seed: u64,
    /// (1-based order-statistic index, value): pins the 10% daily quantile.
    pub quantile_pin: Option<(usize, u64)>,
    /// Exact total of the counts over the inclusive day window.
    pub window_total: Option<(usize, usize, u64)>,
}

/// Belgian plateau table. These are *design* positions: the fitted knots
/// land where ramp slope and tube radius say they do, so each midpoint is
/// offset from the location it should be read at. Calibrated so the fit
/// reports the midpoints in `BE_EXTREME_MIDPOINTS` and the first epidemic
/// reads start 215 / peak 393 / end 454.
pub const BE_PLATEAUS: &[Plateau] = &[
    (205, 10, 250.0),
    (396, 11, 330.0),
    (500, 43, 274.0),
    (546, 2, 332.0),
    (592, 16, 262.0),
    (719, 15, 330.0),
    (887, 12, 258.0),
    (905, 2, 318.0),
    (944, 21, 258.0),
    (1148, 13, 375.0),
    (1276, 12, 266.0),
    (1306, 5, 360.0),
    (1315, 2, 260.0),
    (1518, 14, 390.0),
    (1692, 30, 262.0),
    (1867, 12, 315.0),
    (2049, 6, 260.0),
    (2241, 10, 380.0),
    (2349, 12, 268.0),
    (2369, 4, 320.0),
    (2416, 10, 264.0),
    (2642, 11, 400.0),
    (2742, 13, 267.0),
    (2798, 5, 340.0),
    (2810, 3, 258.0),
    (2958, 9, 390.0),
    (3087, 4, 260.0),
    (3095, 3, 365.0),
    (3145, 17, 266.0),
    (3366, 11, 415.0),
    (3464, 13, 272.0),
    (3496, 6, 335.0),
    (3548, 16, 270.0),
    (3671, 10, 350.0),
    (3830, 10, 268.0),
    (3858, 3, 330.0),
    (3888, 12, 272.0),
];

/// Ramp waypoints for the Belgian curve. The first epidemic rides a flat
/// onset shelf from August to the late-January spike; its flanks are made
/// steep (the July dive, the onset step, the post-peak drop and the end
/// step) so the fitted knots snap to the corners instead of smearing into
/// the shallow ramps.
pub const BE_BENDS: &[(usize, f64)] = &[
    (150, 320.0),
    (188, 300.0),
    (216, 285.0),
    (384, 284.0),
    (412, 294.0),
    (456, 294.0),
    (573, 285.0),
    (613, 280.0),
    (870, 280.0),
    (1260, 290.0),
    (1322, 300.0),
    (1658, 285.0),
    (1727, 280.0),
    (2038, 275.0),
    (2060, 275.0),
    (2403, 290.0),
    (2430, 290.0),
    (2726, 290.0),
    (2758, 292.0),
    (2821, 290.0),
    (3078, 300.0),
    (3102, 292.0),
    (3125, 290.0),
    (3169, 292.0),
    (3815, 285.0),
];

pub const BE_EXTREME_MIDPOINTS: [usize; 37] = [
    203, 393, 499, 549, 593, 725, 880, 909, 954, 1145, 1275, 1304, 1316, 1509, 1698, 1863, 2049,
    2230, 2348, 2375, 2417, 2639, 2741, 2795, 2812, 2954, 3085, 3095, 3148, 3350, 3465, 3500,
    3552, 3683, 3833, 3858, 3895,
];

pub const BE_DAILY: DailySpec = DailySpec {
    code: "be",
    population: 11_500_000,
    start_ymd: (2009, 1, 1),
    n: 4017,
    head_level: 345.0,
    tail_level: 330.0,
    plateaus: BE_PLATEAUS,
    bends: BE_BENDS,
    spikes: &[(445, 3, 305.0), (448, 7, 325.0), (458, 6, 245.0)],
    weekly: [0.0194, -0.0109, 0.0070, 0.0063],
    annual_amp: 0.011,
    annual_peak_day: 9.0,
    ma_theta: 0.4,
    ma_sigma: 7.5,
    seed: 0xBEDA_1101,
    quantile_pin: Some((402, 252)),
    window_total: Some((215, 454, 69_619)),
};

/// German winters 2016–2019 with the 2018 flu season on top and the
/// 2018/2019 heat spikes; calibrated for ≈65% overdispersion and the
/// smoothed-fit residual spread.
pub const DE_PLATEAUS: &[Plateau] = &[
    (45, 14, 3_350.0),    // 2016-02 winter peak
    (200, 50, 2_680.0),   // 2016 summer trough
    (390, 16, 3_500.0),   // 2017-01 flu
    (560, 45, 2_700.0),   // 2017 summer trough
    (799, 13, 3_780.0),   // 2018-03 flu
    (900, 30, 2_730.0),   // 2018 early summer
    (947, 6, 3_540.0),    // 2018-08 heat
    (1_000, 30, 2_710.0), // 2018 autumn dip
    (1_150, 14, 3_300.0), // 2019-02 winter peak
    (1_255, 30, 2_690.0), // 2019 early summer
    (1_301, 5, 3_610.0),  // 2019-07 heat
    (1_355, 25, 2_700.0), // 2019 late summer
];

pub const DE_DAILY: DailySpec = DailySpec {
    code: "de",
    population: 83_000_000,
    start_ymd: (2016, 1, 1),
    n: 1_461,
    head_level: 3_150.0,
    tail_level: 2_900.0,
    plateaus: DE_PLATEAUS,
    bends: &[],
    spikes: &[],
    weekly: [0.024, -0.011, 0.008, 0.006],
    annual_amp: 0.015,
    annual_peak_day: 20.0,
    ma_theta: 0.45,
    ma_sigma: 30.0,
    seed: 0xDEDA_1101,
    quantile_pin: None,
    window_total: None,
};

/// England and Wales 2011–2014: the strong 2012/13 flu winter, mild 2014.
pub const EW_PLATEAUS: &[Plateau] = &[
    (20, 10, 1_520.0),    // 2011-01 winter
    (210, 55, 1_320.0),   // 2011 summer trough
    (398, 14, 1_580.0),   // 2012-02 winter
    (580, 50, 1_315.0),   // 2012 summer trough
    (745, 20, 1_680.0),   // 2013-01 flu
    (940, 45, 1_330.0),   // 2013 summer trough
    (1_110, 16, 1_500.0), // 2014-01 mild winter
    (1_300, 40, 1_310.0), // 2014 summer trough
];

pub const EW_DAILY: DailySpec = DailySpec {
    code: "ew",
    population: 59_000_000,
    start_ymd: (2011, 1, 1),
    n: 1_461,
    head_level: 1_470.0,
    tail_level: 1_400.0,
    plateaus: EW_PLATEAUS,
    bends: &[],
    spikes: &[],
    weekly: [0.019, -0.0105, 0.006, 0.0048],
    annual_amp: 0.013,
    annual_peak_day: 15.0,
    ma_theta: 0.4,
    ma_sigma: 14.0,
    seed: 0xE3DA_1101,
    quantile_pin: Some((147, 1_289)),
    window_total: None,
};
