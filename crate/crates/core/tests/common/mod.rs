//! Test-only oracles. Nothing in here calls into the library's elliptic
//! kernel; the values they produce are what the kernel is checked against.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half.abs())
}

// |K15 − G7| measures the Gauss error; the Kronrod value is already orders of
// magnitude better once that estimate falls below the threshold, which stays
// above round-off so the recursion terminates.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol.max(1e-14 * value.abs()) || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, tol, depth - 1) + adaptive(f, mid, b, tol, depth - 1)
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]` (either order).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive(&f, a, b, tol, 30)
}

/// Incomplete elliptic integral of the first kind `F(φ, k)` by quadrature.
pub fn incomplete_f(phi: f64, k: f64) -> f64 {
    let k2 = k * k;
    integrate(
        |theta: f64| {
            let s = theta.sin();
            1.0 / (1.0 - k2 * s * s).sqrt()
        },
        0.0,
        phi,
        1e-15,
    )
}

/// `K(k)` from its defining integral.
pub fn quadrature_k(k: f64) -> f64 {
    incomplete_f(FRAC_PI_2, k)
}

/// `(sn, cn, dn)` by inverting `u = F(φ, k)` with bracketed Newton iteration
/// on the quadrature values.
pub fn oracle_sn_cn_dn(u: f64, k: f64) -> (f64, f64, f64) {
    let k2 = k * k;
    let quarter = quadrature_k(k);
    // F(φ + π) = F(φ) + 2K, so solve for φ' ∈ [−π/2, π/2] and shift by nπ.
    let turns = (u / (2.0 * quarter)).round();
    let target = u - 2.0 * quarter * turns;
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    let mut phi = target * FRAC_PI_2 / quarter;
    for _ in 0..200 {
        let residual = incomplete_f(phi, k) - target;
        if residual > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let s = phi.sin();
        let mut next = phi - residual * (1.0 - k2 * s * s).sqrt();
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - phi).abs();
        phi = next;
        if step <= 2.0 * f64::EPSILON || hi - lo <= 2.0 * f64::EPSILON {
            break;
        }
    }
    let (s, c) = (phi + turns * std::f64::consts::PI).sin_cos();
    (s, c, (1.0 - k2 * s * s).sqrt())
}

/// Reads the frozen `u,k,sn,cn,dn` table.
pub fn read_golden(path: &std::path::Path) -> Vec<[f64; 5]> {
    let text = std::fs::read_to_string(path).expect("golden table present");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut row = [0.0; 5];
            for (slot, field) in row.iter_mut().zip(line.split(',')) {
                *slot = field.trim().parse().expect("numeric field");
            }
            row
        })
        .collect()
}

pub fn golden_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/sn_golden.csv")
}
