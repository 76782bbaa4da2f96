//! Floating-point side of the invariant calculus.
//!
//! Everything else in the crate is exact; this module is where `t` finally
//! becomes the IEEE double nearest 2*pi.  It provides the branch-cut
//! logarithm `ln_plus`, the kernel `k_plus` whose pullbacks absorb the
//! singular part of the action, a synthesizer for regularized-action samples
//! on a staggered grid, and a finite-difference Taylor extractor that
//! round-trips those samples back into the exact series types.
//!
//! The extractor is a verification harness, not a measurement pipeline: its
//! point is that for polynomial inputs the recovered coefficients agree with
//! the formal ones to stated tolerances.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::coeff::{Coeff, Rational};
use crate::jets::{solve_substitution, Jet2, JetError, JetPair};
use crate::labels::{LabelError, RelativeActionSeries};
use crate::par;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("argument lies on the branch cut i*R>=0")]
    OnBranchCut,
    #[error("chart {chart} maps grid point ({x}, {y}) onto the branch cut")]
    GridTouchesCut { chart: usize, x: f64, y: f64 },
    #[error("order {order} exceeds the finite-difference accuracy budget ({max})")]
    OrderTooHigh { order: u32, max: u32 },
    #[error("grid spacing {h} is too coarse for extraction (need h <= {max})")]
    GridTooCoarse { h: f64, max: f64 },
    #[error("charts are truncated at order {have} but extraction needs {need}")]
    ChartOrderTooLow { have: u32, need: u32 },
    #[error("at least one chart is required")]
    NoCharts,
    #[error("chart {0} does not fix the origin")]
    ChartNotOriginFixing(usize),
    #[error("charts must share their first component")]
    MismatchedAbscissa,
    #[error("no sample at grid key ({0}, {1})")]
    MissingSample(i64, i64),
    #[error("sample at grid key ({0}, {1}) is not finite")]
    NonFiniteSample(i64, i64),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Label(#[from] LabelError),
}

/// Branch data of the determination used throughout: cut along the positive
/// imaginary axis, value 0 at 1, arguments in the open range (-3*pi/2, pi/2).
/// That range is the unique one reachable by continuation from 1 around the
/// cut.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchSpec;

impl BranchSpec {
    pub const ARG_MIN: f64 = -3.0 * std::f64::consts::FRAC_PI_2;
    pub const ARG_MAX: f64 = std::f64::consts::FRAC_PI_2;

    /// Direction of the cut ray, as a unit vector.
    pub const CUT_DIRECTION: (f64, f64) = (0.0, 1.0);

    pub fn contains_arg(a: f64) -> bool {
        Self::ARG_MIN < a && a < Self::ARG_MAX
    }

    pub fn on_cut(c: Complex64) -> bool {
        c.re == 0.0 && c.im >= 0.0
    }
}

/// Logarithm with cut along the positive imaginary axis and `ln_plus(1) = 0`;
/// the argument lands in (-3*pi/2, pi/2).
pub fn ln_plus(c: Complex64) -> Result<Complex64, NumericsError> {
    if BranchSpec::on_cut(c) {
        return Err(NumericsError::OnBranchCut);
    }
    let principal = c.ln();
    let arg = if principal.im > BranchSpec::ARG_MAX {
        principal.im - TAU
    } else {
        principal.im
    };
    Ok(Complex64::new(principal.re, arg))
}

/// The kernel `-Im(c ln_plus(c) - c)`, extended by its limit 0 at the origin.
/// Vanishes identically on the positive real axis, and extends continuously
/// (though not smoothly) across the cut because the branch jump of the
/// logarithm is purely imaginary there.
pub fn k_plus(c: Complex64) -> Result<f64, NumericsError> {
    if c == Complex64::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let l = ln_plus(c)?;
    Ok(-((c * l - c).im))
}

/// Continuation step for tracking a logarithm along a path: returns the
/// determination of `ln z` whose imaginary part is nearest `prev.im`.  The
/// node-monodromy harness in the base module walks circles with this, so the
/// numeric monodromy and the branch conventions here cannot drift apart.
pub(crate) fn continue_log(prev: Complex64, z: Complex64) -> Complex64 {
    let principal = z.ln();
    let mut arg = principal.im;
    let turns = ((prev.im - arg) / TAU).round();
    arg += turns * TAU;
    Complex64::new(principal.re, arg)
}

/// Which side of the cut the x-direction stencil nodes sit on.  Central
/// stencils straddle the cut line x = 0 (without touching it); the one-sided
/// variants stay strictly left or right and exist to check that extraction
/// sees the same smooth function from both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilSide {
    Central,
    LeftOfCut,
    RightOfCut,
}

// Stencil nodes, in units of h/2.  The x nodes are odd so no sample ever has
// x = 0; the y nodes are even so every ordinate is a whole multiple of h.
// Six x nodes and seven y nodes make every rule exact through total degree 5
// in x and 6 in y, so for the polynomial inputs of the round-trip harness
// the only error left is rounding.
const X_CENTRAL: [i64; 6] = [-5, -3, -1, 1, 3, 5];
const X_RIGHT: [i64; 6] = [1, 3, 5, 7, 9, 11];
const X_LEFT: [i64; 6] = [-11, -9, -7, -5, -3, -1];
const Y_NODES: [i64; 7] = [-6, -4, -2, 0, 2, 4, 6];

/// Scale factor between the fine and coarse stencils of the Richardson step.
const COARSE: i64 = 3;

fn x_nodes(side: StencilSide) -> &'static [i64] {
    match side {
        StencilSide::Central => &X_CENTRAL,
        StencilSide::LeftOfCut => &X_LEFT,
        StencilSide::RightOfCut => &X_RIGHT,
    }
}

/// Sampling plan: base spacing plus the stencil pattern the extractor will
/// later need.  The default spacing 1e-2 balances truncation against
/// cancellation for coefficients up to order 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub side: StencilSide,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { h: 1e-2, side: StencilSide::Central }
    }
}

impl GridSpec {
    pub fn new(h: f64, side: StencilSide) -> Self {
        assert!(h.is_finite() && h > 0.0, "grid spacing must be positive");
        GridSpec { h, side }
    }

    /// All sample keys (units of h/2) the extractor can ask for: the tensor
    /// grid of stencil nodes at both Richardson scales.
    pub fn points(&self) -> Vec<(i64, i64)> {
        let mut keys = std::collections::BTreeSet::new();
        for scale in [1, COARSE] {
            for &kx in x_nodes(self.side) {
                for &ky in &Y_NODES {
                    keys.insert((kx * scale, ky * scale));
                }
            }
        }
        keys.into_iter().collect()
    }
}

/// Real samples on the staggered grid, keyed by offsets in units of h/2.
/// Because the x keys are odd, the sampled set never meets the cut ray.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    h: f64,
    side: StencilSide,
    values: BTreeMap<(i64, i64), f64>,
}

impl SampledFunction {
    pub fn new(h: f64, side: StencilSide, values: BTreeMap<(i64, i64), f64>) -> Self {
        assert!(h.is_finite() && h > 0.0, "grid spacing must be positive");
        SampledFunction { h, side, values }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn side(&self) -> StencilSide {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, ix: i64, iy: i64) -> Option<f64> {
        self.values.get(&(ix, iy)).copied()
    }

    /// Samples in key order.
    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    /// Coordinates of a grid key.
    pub fn point(&self, ix: i64, iy: i64) -> (f64, f64) {
        (ix as f64 * self.h / 2.0, iy as f64 * self.h / 2.0)
    }
}

fn check_charts(charts: &[JetPair]) -> Result<(), NumericsError> {
    if charts.is_empty() {
        return Err(NumericsError::NoCharts);
    }
    for (u, e) in charts.iter().enumerate() {
        if !e.fixes_origin() {
            return Err(NumericsError::ChartNotOriginFixing(u));
        }
    }
    for e in &charts[1..] {
        if e.x != charts[0].x {
            return Err(NumericsError::MismatchedAbscissa);
        }
    }
    Ok(())
}

/// Sum of the pulled-back kernels at one point.  Chart order is fixed, so the
/// result does not depend on how callers partition the grid.
fn kernel_sum(charts: &[JetPair], x: f64, y: f64) -> Result<f64, NumericsError> {
    let mut acc = 0.0;
    for (u, e) in charts.iter().enumerate() {
        let (a, b) = e.eval_f64(x, y);
        match k_plus(Complex64::new(a, b)) {
            Ok(k) => acc += k,
            Err(_) => return Err(NumericsError::GridTouchesCut { chart: u, x, y }),
        }
    }
    Ok(acc)
}

/// Synthesizes samples of the squared-action component on the grid:
/// `A2 = (stilde + sum_u k_plus(E_u)) / 2pi`, a "measured action" with a
/// known smooth part, for exercising the extractor.
pub fn regularized_action(
    stilde: &Jet2,
    charts: &[JetPair],
    grid: &GridSpec,
) -> Result<SampledFunction, NumericsError> {
    check_charts(charts)?;
    let keys = grid.points();
    let h = grid.h;
    let computed = par::map(keys.clone(), move |(ix, iy)| {
        let (x, y) = (ix as f64 * h / 2.0, iy as f64 * h / 2.0);
        kernel_sum(charts, x, y).map(|k| (stilde.eval_f64(x, y) + k) / TAU)
    });
    let mut values = BTreeMap::new();
    for (key, r) in keys.into_iter().zip(computed) {
        values.insert(key, r?);
    }
    Ok(SampledFunction::new(grid.h, grid.side, values))
}

fn rat_pow(base: &Rational, e: usize) -> Rational {
    let mut out = Rational::one();
    for _ in 0..e {
        out = out.mul(base);
    }
    out
}

fn factorial(a: u32) -> Rational {
    let mut out = Rational::one();
    for k in 2..=a as i64 {
        out = out.mul(&Rational::from_int(k));
    }
    out
}

/// Exact Gaussian elimination for the small Vandermonde systems below.
fn solve_rat(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Vec<Rational> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("stencil system is nonsingular");
        m.swap(col, piv);
        rhs.swap(col, piv);
        let prow = m[col].clone();
        let pval = rhs[col].clone();
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&prow[col]);
            for c in col..n {
                m[r][c] = m[r][c].sub(&f.mul(&prow[c]));
            }
            rhs[r] = rhs[r].sub(&f.mul(&pval));
        }
    }
    (0..n).map(|i| rhs[i].div(&m[i][i])).collect()
}

/// Weights w with sum_i w_i f(node_i * h/2) = h^a (f^(a)(0) + O(h^err)), for
/// nodes given in units of h/2.  Solved exactly so the only inexactness in a
/// derivative estimate is the samples themselves.  Also reports the error
/// order: the gap between `a` and the first monomial degree the rule fails
/// on, which is what the Richardson step needs.
fn stencil_1d(nodes: &[i64], a: u32) -> (Vec<Rational>, u32) {
    let n = nodes.len();
    assert!((a as usize) < n, "stencil has too few nodes for derivative {a}");
    let xi: Vec<Rational> = nodes.iter().map(|&k| Rational::new(k, 2)).collect();
    let mat: Vec<Vec<Rational>> = (0..n)
        .map(|j| xi.iter().map(|x| rat_pow(x, j)).collect())
        .collect();
    let mut rhs = vec![Rational::zero(); n];
    rhs[a as usize] = factorial(a);
    let w = solve_rat(mat, rhs);
    let mut err = 10;
    for j in n..n + 6 {
        let mut moment = Rational::zero();
        for (wi, x) in w.iter().zip(&xi) {
            moment = moment.add(&wi.mul(&rat_pow(x, j)));
        }
        if !moment.is_zero() {
            err = j as u32 - a;
            break;
        }
    }
    (w, err)
}

const MAX_EXTRACT_ORDER: u32 = 4;
const MAX_EXTRACT_H: f64 = 1e-2;

/// Recovers the relative action series from sampled `A2` data: subtracts the
/// pulled-back kernels, estimates Taylor coefficients of the leftover smooth
/// part by tensor finite differences with one Richardson step at scale 3,
/// then substitutes the inverse of the first chart so the series lives in
/// that chart's coordinates.  The constant term is dropped; it is gauge.
///
/// Orders up to 2 are good to about 1e-3 at the default spacing 1e-2; orders
/// 3 and 4 to about 1e-2, the order-4 case validated at spacing 5e-3.
pub fn extract_relative_series(
    a2: &SampledFunction,
    charts: &[JetPair],
    order: u32,
) -> Result<RelativeActionSeries, NumericsError> {
    if order > MAX_EXTRACT_ORDER {
        return Err(NumericsError::OrderTooHigh { order, max: MAX_EXTRACT_ORDER });
    }
    if a2.h() > MAX_EXTRACT_H * (1.0 + 1e-9) {
        return Err(NumericsError::GridTooCoarse { h: a2.h(), max: MAX_EXTRACT_H });
    }
    check_charts(charts)?;
    if order == 0 {
        return Ok(RelativeActionSeries::new(Jet2::zero(0))?);
    }
    if charts[0].order() < order {
        return Err(NumericsError::ChartOrderTooLow { have: charts[0].order(), need: order });
    }

    // Peel the singular part off: what remains samples the smooth stilde.
    let entries: Vec<((i64, i64), f64)> = a2.iter().collect();
    let peeled = par::map(entries.clone(), |((ix, iy), v)| {
        let (x, y) = a2.point(ix, iy);
        kernel_sum(charts, x, y).map(|k| TAU * v - k)
    });
    let mut st = BTreeMap::new();
    for (((ix, iy), _), r) in entries.into_iter().zip(peeled) {
        let v = r?;
        if !v.is_finite() {
            return Err(NumericsError::NonFiniteSample(ix, iy));
        }
        st.insert((ix, iy), v);
    }

    let xs = x_nodes(a2.side());
    let fetch = |ix: i64, iy: i64| -> Result<f64, NumericsError> {
        st.get(&(ix, iy)).copied().ok_or(NumericsError::MissingSample(ix, iy))
    };

    let mut taylor = Jet2::zero(order);
    for a in 0..=order {
        for b in 0..=order - a {
            if a + b == 0 {
                continue;
            }
            let (wx, err_x) = stencil_1d(xs, a);
            let (wy, err_y) = stencil_1d(&Y_NODES, b);
            let wxf: Vec<f64> = wx.iter().map(Rational::to_f64).collect();
            let wyf: Vec<f64> = wy.iter().map(Rational::to_f64).collect();
            let apply = |scale: i64| -> Result<f64, NumericsError> {
                let mut acc = 0.0;
                for (i, &kx) in xs.iter().enumerate() {
                    let mut row = 0.0;
                    for (j, &ky) in Y_NODES.iter().enumerate() {
                        row += wyf[j] * fetch(kx * scale, ky * scale)?;
                    }
                    acc += wxf[i] * row;
                }
                Ok(acc / (a2.h() * scale as f64).powi((a + b) as i32))
            };
            let fine = apply(1)?;
            let coarse = apply(COARSE)?;
            let gain = 3f64.powi(err_x.min(err_y).max(1) as i32);
            let refined = (gain * fine - coarse) / (gain - 1.0);
            let coeff = refined / (factorial(a).mul(&factorial(b))).to_f64();
            let exact = Rational::from_f64_exact(coeff)
                .ok_or(NumericsError::NonFiniteSample(0, 0))?;
            taylor.set(a, b, Coeff::from_rational(exact))?;
        }
    }

    let ex = charts[0].x.truncated(order)?;
    let ey = charts[0].y.truncated(order)?;
    let series = solve_substitution(&ex, &ey, &taylor)?;
    Ok(RelativeActionSeries::new(series)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coeff, Rational};
    use crate::sampling;
    use rand::Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Magnitude of the branch jump of `f` across the line through `center`
    /// with unit normal `normal`, estimated from two symmetric differences at
    /// straddle distances 1e-6 and 5e-7.  The smooth drift (gradient term,
    /// itself of order 1e-6 here) cancels between the two; an actual jump
    /// survives in full, and what remains for a continuous function is
    /// third-order, far below the 1e-8 acceptance line.
    fn branch_jump<F: Fn(Complex64) -> f64>(f: F, center: Complex64, normal: Complex64) -> f64 {
        let d = normal * 5e-7;
        let wide = f(center + d) - f(center - d);
        let narrow = f(center + d * 0.5) - f(center - d * 0.5);
        (wide - 2.0 * narrow).abs()
    }

    #[test]
    fn ln_plus_pins_the_stated_branch() {
        assert_eq!(ln_plus(c64(1.0, 0.0)).unwrap(), c64(0.0, 0.0));
        let v = ln_plus(c64(0.0, -1.0)).unwrap();
        assert!((v - c64(0.0, -std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
        let w = ln_plus(c64(-1.0, 0.0)).unwrap();
        assert!((w - c64(0.0, -std::f64::consts::PI)).norm() < 1e-15);
        let u = ln_plus(c64(0.0, -2.0)).unwrap();
        assert!((u.re - 2f64.ln()).abs() < 1e-15);

        assert_eq!(ln_plus(c64(0.0, 0.0)), Err(NumericsError::OnBranchCut));
        assert_eq!(ln_plus(c64(0.0, 1.0)), Err(NumericsError::OnBranchCut));
        assert_eq!(ln_plus(c64(0.0, 2.5)), Err(NumericsError::OnBranchCut));
    }

    #[test]
    fn exp_inverts_ln_plus_off_the_cut() {
        let mut rng = sampling::rng_from_env(0x1095);
        let mut tested = 0;
        while tested < 10_000 {
            let c = c64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if BranchSpec::on_cut(c) || c.norm() < 1e-6 {
                continue;
            }
            let l = ln_plus(c).unwrap();
            assert!(BranchSpec::contains_arg(l.im), "arg {} escapes the range", l.im);
            assert!((l.exp() - c).norm() <= 1e-12 * c.norm());
            tested += 1;
        }
    }

    #[test]
    fn ln_plus_jumps_only_across_the_cut() {
        // Straddling the positive imaginary axis sees the full 2*pi jump.
        let above = ln_plus(c64(-1e-9, 1.0)).unwrap();
        let below = ln_plus(c64(1e-9, 1.0)).unwrap();
        assert!((above.im - below.im + TAU).abs() < 1e-6);
        // Straddling the other three semi-axes does not.
        for (p, q) in [
            (c64(-1.0, 1e-9), c64(-1.0, -1e-9)),
            (c64(1e-9, -1.0), c64(-1e-9, -1.0)),
            (c64(1.0, 1e-9), c64(1.0, -1e-9)),
        ] {
            let d = (ln_plus(p).unwrap() - ln_plus(q).unwrap()).norm();
            assert!(d < 1e-8, "unexpected jump {d} between {p} and {q}");
        }
    }

    #[test]
    fn k_plus_matches_the_pinned_values() {
        assert_eq!(k_plus(c64(1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(k_plus(c64(0.0, 0.0)).unwrap(), 0.0);
        assert!((k_plus(c64(0.0, -1.0)).unwrap() + 1.0).abs() < 1e-15);
        for k in 1..=1000 {
            let x = k as f64 * 7e-3;
            assert_eq!(k_plus(c64(x, 0.0)).unwrap(), 0.0, "K should vanish at {x}");
        }
    }

    #[test]
    fn k_plus_has_no_branch_jump_off_the_cut() {
        let k = |c: Complex64| k_plus(c).unwrap();
        for t in [0.3, 1.0, 2.7] {
            // Negative real axis, crossed vertically.
            assert!(branch_jump(k, c64(-t, 0.0), c64(0.0, 1.0)) < 1e-8);
            // Negative imaginary axis, crossed horizontally.
            assert!(branch_jump(k, c64(0.0, -t), c64(1.0, 0.0)) < 1e-8);
            // Even the cut itself: the logarithm jumps by 2*pi*i there, but
            // the kernel's jump carries a factor Re(c) = 0.
            assert!(branch_jump(k, c64(0.0, t), c64(1.0, 0.0)) < 1e-8);
        }
        // Sanity for the estimator: applied to a function with a genuine
        // jump it reports the jump, not zero.
        let arg = |c: Complex64| ln_plus(c).unwrap().im;
        let seen = branch_jump(arg, c64(0.0, 1.0), c64(1.0, 0.0));
        assert!((seen - TAU).abs() < 1e-6);
    }

    #[test]
    fn grid_points_avoid_the_cut_and_respect_the_side() {
        for side in [StencilSide::Central, StencilSide::LeftOfCut, StencilSide::RightOfCut] {
            let g = GridSpec::new(1e-2, side);
            for (ix, iy) in g.points() {
                assert!(ix % 2 != 0, "x key {ix} is even");
                assert!(iy % 2 == 0, "y key {iy} is odd");
                match side {
                    StencilSide::Central => {}
                    StencilSide::LeftOfCut => assert!(ix < 0),
                    StencilSide::RightOfCut => assert!(ix > 0),
                }
            }
        }
        // 42 fine + 42 coarse keys sharing 6: both scales must be present.
        let n = GridSpec::default().points().len();
        assert_eq!(n, 78);
    }

    fn jet(order: u32, entries: &[((u32, u32), Coeff)]) -> Jet2 {
        Jet2::from_entries(order, entries.iter().cloned()).unwrap()
    }

    #[test]
    fn regularized_action_matches_the_closed_forms() {
        let grid = GridSpec::default();
        let id = JetPair::identity(4);

        let zero = Jet2::zero(4);
        let a = regularized_action(&zero, std::slice::from_ref(&id), &grid).unwrap();
        for ((ix, iy), v) in a.iter() {
            let (x, y) = a.point(ix, iy);
            let expect = k_plus(c64(x, y)).unwrap() / TAU;
            assert!((v - expect).abs() < 1e-14);
        }

        // stilde = 2pi * Y: the samples are Y + K/2pi.
        let lin = jet(4, &[((0, 1), Coeff::tau())]);
        let b = regularized_action(&lin, std::slice::from_ref(&id), &grid).unwrap();
        for ((ix, iy), v) in b.iter() {
            let (x, y) = b.point(ix, iy);
            let expect = y + k_plus(c64(x, y)).unwrap() / TAU;
            assert!((v - expect).abs() < 1e-14);
        }

        let two = [id.clone(), id.clone()];
        let c = regularized_action(&zero, &two, &grid).unwrap();
        for ((ix, iy), v) in c.iter() {
            let (x, y) = c.point(ix, iy);
            let expect = 2.0 * k_plus(c64(x, y)).unwrap() / TAU;
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn regularized_action_rejects_charts_hitting_the_cut() {
        // (2X - Y, Y) sends the grid key (1, 2), i.e. (h/2, h), to (0, h),
        // which lies on the cut ray.
        let order = 3;
        let ex = jet(order, &[((1, 0), Coeff::from_int(2)), ((0, 1), Coeff::from_int(-1))]);
        let e = JetPair::new(ex, Jet2::y(order)).unwrap();
        let r = regularized_action(&Jet2::zero(order), &[e], &GridSpec::default());
        assert!(matches!(r, Err(NumericsError::GridTouchesCut { .. })), "got {r:?}");
    }

    fn max_coeff_gap(got: &Jet2, want: &Jet2) -> f64 {
        let mut worst: f64 = 0.0;
        for d in 0..=got.order().max(want.order()) {
            for p in 0..=d {
                let (p, q) = (p, d - p);
                let g = got.get(p, q).eval_f64();
                let w = want.get(p, q).eval_f64();
                worst = worst.max((g - w).abs());
            }
        }
        worst
    }

    fn stilde_fixtures(order: u32) -> Vec<Jet2> {
        // The linear part 2pi*Y is one action quantum.
        let action_y = ((0, 1), Coeff::tau());
        let mut out = vec![
            Jet2::zero(order),
            jet(order, &[action_y.clone()]),
            jet(order, &[action_y.clone(), ((2, 0), Coeff::one())]),
        ];
        if order >= 3 {
            out.push(jet(
                order,
                &[
                    action_y,
                    ((2, 0), Coeff::one()),
                    ((1, 1), Coeff::from_int(-3)),
                    ((0, 3), Coeff::one()),
                ],
            ));
        }
        out
    }

    #[test]
    fn round_trip_recovers_polynomial_coefficients() {
        let grid = GridSpec::default();
        let id = JetPair::identity(4);
        for stilde in stilde_fixtures(4) {
            let a2 = regularized_action(&stilde, std::slice::from_ref(&id), &grid).unwrap();
            for order in [2u32, 3] {
                let got = extract_relative_series(&a2, std::slice::from_ref(&id), order).unwrap();
                let want = stilde.truncated(order).unwrap();
                let gap = max_coeff_gap(got.rep(), &want);
                let tol = if order <= 2 { 1e-3 } else { 1e-2 };
                assert!(gap <= tol, "order {order}: gap {gap} for {stilde}");
            }
        }
    }

    #[test]
    fn round_trip_composes_with_the_chart_inverse() {
        // Chart (X, Y + X^2/2): the extracted series lives in its
        // coordinates, so the exact target is the substitution of the
        // chart's inverse into the input.
        let order = 3;
        let ey = jet(
            order,
            &[((0, 1), Coeff::one()), ((2, 0), Coeff::from_rational(Rational::new(1, 2)))],
        );
        let chart = JetPair::new(Jet2::x(order), ey).unwrap();
        let grid = GridSpec::default();
        for stilde in stilde_fixtures(order) {
            let a2 = regularized_action(&stilde, std::slice::from_ref(&chart), &grid).unwrap();
            for order_out in [2u32, 3] {
                let got =
                    extract_relative_series(&a2, std::slice::from_ref(&chart), order_out).unwrap();
                let ex = chart.x.truncated(order_out).unwrap();
                let eyt = chart.y.truncated(order_out).unwrap();
                let input = stilde.truncated(order_out).unwrap();
                let want = solve_substitution(&ex, &eyt, &input).unwrap();
                let tol = if order_out <= 2 { 1e-3 } else { 1e-2 };
                let gap = max_coeff_gap(got.rep(), &want);
                assert!(gap <= tol, "order {order_out}: gap {gap} for {stilde}");

                // Undoing the substitution must land back on the input.
                let back = crate::jets::compose2(got.rep(), &ex, &eyt).unwrap();
                let gap_back = max_coeff_gap(&back, &input);
                assert!(gap_back <= tol, "order {order_out}: return gap {gap_back}");
            }
        }
    }

    #[test]
    fn one_sided_extractions_agree_across_the_cut() {
        // The recovered stilde is smooth, so expanding it from strictly left
        // of the cut and strictly right of it must give the same series.
        let order = 3;
        let ey = jet(
            order,
            &[((0, 1), Coeff::one()), ((2, 0), Coeff::from_rational(Rational::new(1, 2)))],
        );
        let chart = JetPair::new(Jet2::x(order), ey).unwrap();
        let stilde = stilde_fixtures(order).pop().unwrap();
        let mut reps = Vec::new();
        for side in [StencilSide::LeftOfCut, StencilSide::RightOfCut] {
            let grid = GridSpec::new(1e-2, side);
            let a2 = regularized_action(&stilde, std::slice::from_ref(&chart), &grid).unwrap();
            let got = extract_relative_series(&a2, std::slice::from_ref(&chart), order).unwrap();
            reps.push(got.rep().clone());
        }
        let gap = max_coeff_gap(&reps[0], &reps[1]);
        assert!(gap <= 1e-3, "left/right disagree by {gap}");
    }

    #[test]
    fn order_four_extraction_on_the_finer_documented_grid() {
        let order = 4;
        let mut stilde = stilde_fixtures(order).pop().unwrap();
        stilde
            .set(2, 2, Coeff::from_rational(Rational::new(1, 4)))
            .unwrap();
        let grid = GridSpec::new(5e-3, StencilSide::Central);
        let id = JetPair::identity(order);
        let a2 = regularized_action(&stilde, std::slice::from_ref(&id), &grid).unwrap();
        let got = extract_relative_series(&a2, std::slice::from_ref(&id), order).unwrap();
        let gap = max_coeff_gap(got.rep(), &stilde);
        assert!(gap <= 1e-2, "order-4 gap {gap}");
    }

    #[test]
    fn extraction_rejects_bad_requests() {
        let id = JetPair::identity(4);
        let grid = GridSpec::default();
        let a2 = regularized_action(&Jet2::zero(4), std::slice::from_ref(&id), &grid).unwrap();

        let r = extract_relative_series(&a2, std::slice::from_ref(&id), 5);
        assert!(matches!(r, Err(NumericsError::OrderTooHigh { .. })));

        let coarse = regularized_action(
            &Jet2::zero(4),
            std::slice::from_ref(&id),
            &GridSpec::new(5e-2, StencilSide::Central),
        )
        .unwrap();
        let r = extract_relative_series(&coarse, std::slice::from_ref(&id), 2);
        assert!(matches!(r, Err(NumericsError::GridTooCoarse { .. })));

        let r = extract_relative_series(&a2, &[], 2);
        assert!(matches!(r, Err(NumericsError::NoCharts)));

        let short = JetPair::identity(1);
        let r = extract_relative_series(&a2, std::slice::from_ref(&short), 2);
        assert!(matches!(r, Err(NumericsError::ChartOrderTooLow { .. })));

        let mut holed = BTreeMap::new();
        for ((k, v), _) in a2.iter().zip(0..3) {
            holed.insert(k, v);
        }
        let partial = SampledFunction::new(a2.h(), a2.side(), holed);
        let r = extract_relative_series(&partial, std::slice::from_ref(&id), 2);
        assert!(matches!(r, Err(NumericsError::MissingSample(..))));
    }

    #[test]
    fn stencil_rules_differentiate_low_monomials_exactly() {
        for nodes in [&X_CENTRAL[..], &X_LEFT[..], &X_RIGHT[..], &Y_NODES[..]] {
            for a in 0..=4u32 {
                let (w, err) = stencil_1d(nodes, a);
                assert!(err >= 2, "error order {err} too low for derivative {a}");
                for deg in 0..nodes.len() {
                    let mut moment = Rational::zero();
                    for (wi, &k) in w.iter().zip(nodes) {
                        moment = moment.add(&wi.mul(&rat_pow(&Rational::new(k, 2), deg)));
                    }
                    let want = if deg == a as usize { factorial(a) } else { Rational::zero() };
                    assert_eq!(moment, want, "nodes {nodes:?}, derivative {a}, degree {deg}");
                }
            }
        }
    }

    #[test]
    fn continued_log_tracks_turns() {
        let mut w = c64(0.0, 0.0);
        let steps = 1000;
        for k in 1..=steps {
            let th = TAU * k as f64 / steps as f64;
            w = continue_log(w, c64(th.cos(), th.sin()));
        }
        assert!((w.im - TAU).abs() < 1e-9, "one loop should add a full turn, got {}", w.im);
        assert!(w.re.abs() < 1e-12);
    }
}
