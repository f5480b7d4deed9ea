//! Quadrature primitives: adaptive Gauss–Kronrod (7/15) with breakpoints, and
//! fixed Gauss–Legendre panel rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [0, 1); xgk[1], xgk[3], xgk[5] are the Gauss nodes.
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

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// Number of subintervals in the final partition.
    pub intervals: usize,
    pub converged: bool,
}

/// One Gauss–Kronrod 15-point panel: returns (kronrod, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integrator: the panel with the largest error estimate is
/// bisected until the summed estimate meets `max(abs_tol, rel_tol·|I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Adaptive {
    pub fn new(abs_tol: f64) -> Self {
        Adaptive { abs_tol, rel_tol: 1e-13, max_intervals: 4000 }
    }

    /// Integrates over `[points[0], points[last]]` with mandatory panel breaks at
    /// every entry of `points` (must be ascending; duplicates are ignored).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Integral {
        let (integral, _) = self.run(&f, points);
        integral
    }

    /// Like [`Adaptive::integrate`] but also returns the final partition,
    /// sorted by left endpoint.
    pub fn partition<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> (Integral, Vec<(f64, f64)>) {
        let (integral, panels) = self.run(&f, points);
        let mut edges: Vec<(f64, f64)> = panels.into_iter().map(|p| (p.a, p.b)).collect();
        edges.sort_by(|x, y| x.0.total_cmp(&y.0));
        (integral, edges)
    }

    fn run<F: Fn(f64) -> f64>(&self, f: &F, points: &[f64]) -> (Integral, Vec<Panel>) {
        let mut heap = BinaryHeap::new();
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > a {
                let (value, error) = gk15(f, a, b);
                heap.push(Panel { a, b, value, error });
            }
        }
        let total = |heap: &BinaryHeap<Panel>| heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let (mut value, mut error) = total(&heap);
        let mut steps = 0usize;
        while error > self.abs_tol.max(self.rel_tol * value.abs()) && heap.len() < self.max_intervals {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Panel at floating-point resolution.
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            let (v1, e1) = gk15(f, worst.a, mid);
            let (v2, e2) = gk15(f, mid, worst.b);
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
            value += v1 + v2 - worst.value;
            error += e1 + e2 - worst.error;
            steps += 1;
            // Resum periodically to keep the running totals from drifting.
            if steps.is_multiple_of(64) {
                (value, error) = total(&heap);
            }
        }
        (value, error) = total(&heap);
        let converged = error <= self.abs_tol.max(self.rel_tol * value.abs());
        let panels = heap.into_vec();
        (Integral { value, error, intervals: panels.len(), converged }, panels)
    }
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(16);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // x^30 over [0, 2]
        let v: f64 = gl.on(0.0, 2.0).map(|(x, w)| w * x.powi(30)).sum();
        let exact = 2f64.powi(31) / 31.0;
        assert!(((v - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let width = 1e-3;
        let f = |x: f64| width / std::f64::consts::PI / ((x - 0.3).powi(2) + width * width);
        let r = Adaptive::new(1e-11).integrate(f, &[-1.0, 1.0]);
        let exact = ((0.7f64 / width).atan() + (1.3f64 / width).atan()) / std::f64::consts::PI;
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-10, "{} vs {}", r.value, exact);
    }

    #[test]
    fn breakpoints_resolve_kinks() {
        let r = Adaptive::new(1e-12).integrate(|x: f64| x.abs().sqrt(), &[-1.0, 0.0, 1.0]);
        assert!((r.value - 4.0 / 3.0).abs() < 1e-10);
    }
}
