//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the library's special functions.
#![allow(dead_code)]

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[lo, hi]` to relative
/// tolerance `rel_tol` of the whole-interval estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (value, err) = whole;
        if err <= tol || err <= 1e-15 * value.abs() || depth >= 50 {
            return value;
        }
        let mid = 0.5 * (lo + hi);
        let left = gk15(f, lo, mid);
        let right = gk15(f, mid, hi);
        recurse(f, lo, mid, 0.5 * tol, left, depth + 1) + recurse(f, mid, hi, 0.5 * tol, right, depth + 1)
    }
    if hi <= lo {
        return 0.0;
    }
    let whole = gk15(&f, lo, hi);
    let scale = whole.0.abs().max(whole.1);
    recurse(&f, lo, hi, rel_tol * scale, whole, 0)
}

/// `∫_0^m t^{a-1}(1-t)^{b-1} dt` for `m <= 1/2`. For `a < 1` the endpoint
/// singularity is removed with `u = t^a`.
fn lower_piece(m: f64, a: f64, b: f64) -> f64 {
    if a < 1.0 {
        let top = m.powf(a);
        let g = |u: f64| (1.0 - u.powf(1.0 / a)).powf(b - 1.0) / a;
        integrate(g, 0.0, top, 1e-13)
    } else {
        let g = |t: f64| if t <= 0.0 { if a == 1.0 { 1.0 } else { 0.0 } } else { ((a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p()).exp() };
        integrate(g, 0.0, m, 1e-13)
    }
}

/// `∫_m^1 t^{a-1}(1-t)^{b-1} dt` for `m >= 1/2`, through `v = (1-t)^b`.
fn upper_piece(m: f64, a: f64, b: f64) -> f64 {
    lower_piece(1.0 - m, b, a)
}

/// Complete beta integral by quadrature.
pub fn beta_integral(a: f64, b: f64) -> f64 {
    lower_piece(0.5, a, b) + upper_piece(0.5, a, b)
}

/// `I_z(a, b)` by quadrature of the Beta density, normalized by quadrature.
pub fn reg_inc_beta(z: f64, a: f64, b: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let left = lower_piece(0.5, a, b);
    let right = upper_piece(0.5, a, b);
    let total = left + right;
    if z <= 0.5 {
        lower_piece(z, a, b) / total
    } else {
        1.0 - upper_piece(z, a, b) / total
    }
}

/// `∂_a I_z(a, b)` by central differences of the quadrature `I_z` with two
/// Richardson levels. Differences are taken on the smaller tail.
pub fn d_a_reg_inc_beta(z: f64, a: f64, b: f64) -> f64 {
    if z <= 0.0 || z >= 1.0 {
        return 0.0;
    }
    let use_upper = z > a / (a + b);
    let tail = |aa: f64| {
        let total = beta_integral(aa, b);
        if use_upper {
            -(if z >= 0.5 {
                upper_piece(z, aa, b)
            } else {
                total - lower_piece(z, aa, b)
            }) / total
        } else {
            (if z <= 0.5 {
                lower_piece(z, aa, b)
            } else {
                total - upper_piece(z, aa, b)
            }) / total
        }
    };
    let h = 0.02 * a;
    let central = |h: f64| (tail(a + h) - tail(a - h)) / (2.0 * h);
    let d1 = central(h);
    let d2 = central(h / 2.0);
    let d4 = central(h / 4.0);
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Beta density, evaluated through a quadrature normalizer.
pub fn beta_density(x: f64, a: f64, b: f64, norm: f64) -> f64 {
    x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) / norm
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    d
}

/// Asymptotic p-value of the KS statistic with Stephens' small-sample factor.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS p-value of samples against a Beta law, CDF from quadrature.
pub fn ks_beta_p_value(samples: &[f64], a: f64, b: f64) -> f64 {
    let d = ks_statistic(samples, |x| reg_inc_beta(x.clamp(0.0, 1.0), a, b));
    ks_p_value(d, samples.len())
}

/// Upper-tail p-value of a chi-square statistic, via the regularized lower
/// incomplete gamma series / continued fraction.
pub fn chi_square_p_value(stat: f64, dof: usize) -> f64 {
    let s = dof as f64 / 2.0;
    let x = stat / 2.0;
    if x <= 0.0 {
        return 1.0;
    }
    let ln_gamma_s = ln_gamma_stirling(s);
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut k = s;
        for _ in 0..10_000 {
            k += 1.0;
            term *= x / k;
            sum += term;
            if term < sum * 1e-16 {
                break;
            }
        }
        1.0 - (sum.ln() + s * x.ln() - x - ln_gamma_s).exp()
    } else {
        // Lentz continued fraction for the upper incomplete gamma.
        let tiny = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (h.ln() + s * x.ln() - x - ln_gamma_s).exp()
    }
}

/// `ln Γ(x)` by recurrence up to x >= 20 and the Stirling series.
pub fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 20.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
