//! Principal-minor checks on the two rank-two projections of the case (v)
//! state at x = 1/7, taken in the frame ρ̃ = (K⊗K̄)ρ(K⊗K̄)†.
//!
//! α₁(a) = (P₁⊗I)ρ̃^Γ(P₁†⊗I) and α₂(b,c) = (P₂⊗I)ρ̃^Γ(P₂†⊗I) are 9×9 with a
//! zero last block row, so their leading minors of order 4, 5 and 6 carry all
//! of the information; the order-6 minor is reported as `det`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::{log_polar_grid, RankTwoProjection};
use crate::error::{Error, Result};
use crate::format::{complex_pairs, ser_f64, sig17, Sig17};
use crate::linalg::{inertia_of, is_psd, leading_principal_minors, Inertia};
use crate::linalg::{c64, kron, partial_transpose, ComplexMatrix, C64};
use crate::states::{apply_local, build_family, FamilyCase, LocalOperator, QUTRIT};

pub const EXAMPLE_X: f64 = 1.0 / 7.0;
pub const F_SCALE: f64 = 1_075_648.0;
pub const G_SCALE: f64 = 7_529_536.0;
/// Relative deviation accepted between a closed form and the direct minor.
pub const CROSS_CHECK_TOL: f64 = 1e-9;
/// Imaginary residue allowed in a closed-form numerator, relative to its size.
pub const NONREAL_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Interval the F and G minima must fall in.
pub const MIN_RANGE: (f64, f64) = (1.0, 10.0);
pub const FIGURE_HALF_WIDTH: f64 = 3.0;
pub const FIGURE_STEP: f64 = 0.05;
const REFINE_STARTS: usize = 10;
const REFINE_EVALS: usize = 4000;

/// ρ̃^Γ for the case (v) state at a given x.
#[derive(Clone, Debug)]
pub struct ExampleFrame {
    x: f64,
    gamma: ComplexMatrix,
}

impl ExampleFrame {
    pub fn new(x: f64) -> Result<Self> {
        let state = build_family(FamilyCase::V, x)?;
        let tilde = apply_local(&state, &LocalOperator::example_frame())?;
        let gamma = partial_transpose(&tilde, QUTRIT, QUTRIT)?;
        Ok(Self { x, gamma })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn gamma(&self) -> &ComplexMatrix {
        &self.gamma
    }

    pub fn alpha(&self, params: AlphaParams) -> Result<ComplexMatrix> {
        let p = match params {
            AlphaParams::One { a } => RankTwoProjection::p1(a),
            AlphaParams::Two { b, c } => RankTwoProjection::p2(b, c),
        };
        kron(&p.operator(), &ComplexMatrix::identity(QUTRIT)).conjugate(&self.gamma)
    }

    pub fn direct_minors(&self, b: C64, c: C64) -> Result<DirectMinors> {
        DirectMinors::of(&self.alpha(AlphaParams::Two { b, c })?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaParams {
    One { a: C64 },
    Two { b: C64, c: C64 },
}

/// α₁(a) or α₂(b,c) at the given x.
pub fn build_alpha(params: AlphaParams, x: f64) -> Result<ComplexMatrix> {
    ExampleFrame::new(x)?.alpha(params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinorKind {
    Minor4,
    Minor5,
    Det,
}

impl MinorKind {
    pub const ALL: [MinorKind; 3] = [MinorKind::Minor4, MinorKind::Minor5, MinorKind::Det];

    pub fn order(self) -> usize {
        match self {
            MinorKind::Minor4 => 4,
            MinorKind::Minor5 => 5,
            MinorKind::Det => 6,
        }
    }

    pub fn denominator(self) -> f64 {
        match self {
            MinorKind::Minor4 => 5_531_904.0,
            MinorKind::Minor5 => 464_679_936.0,
            MinorKind::Det => 39_033_114_624.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MinorKind::Minor4 => "minor4",
            MinorKind::Minor5 => "minor5",
            MinorKind::Det => "det",
        }
    }
}

impl std::str::FromStr for MinorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "minor4" | "4" => Ok(MinorKind::Minor4),
            "minor5" | "5" => Ok(MinorKind::Minor5),
            "det" | "6" => Ok(MinorKind::Det),
            _ => Err(format!("unknown minor `{s}` (minor4, minor5, det)")),
        }
    }
}

/// Leading principal minors of orders 4, 5 and 6 of α₂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectMinors {
    pub leading: [f64; 6],
}

impl DirectMinors {
    pub fn of(alpha: &ComplexMatrix) -> Result<Self> {
        let lpm = leading_principal_minors(&alpha.leading(6))?;
        let mut leading = [0.0; 6];
        leading.copy_from_slice(&lpm);
        Ok(Self { leading })
    }

    pub fn get(&self, kind: MinorKind) -> f64 {
        self.leading[kind.order() - 1]
    }
}

/// The polynomial numerators as printed, with b̄ and c̄ kept where they appear.
/// For the determinant the grouping is: the b̄³ term, the b̄² bracket closing
/// after the −65|c|²(…) factor, the |b|² bracket closing after the c̄² term,
/// and the trailing 9(…) holding the nested c̄(c(…) + c̄(…)) expression.
fn closed_form_numerator(kind: MinorKind, b: C64, c: C64) -> C64 {
    let r = |v: f64| c64(v, 0.0);
    let bb = b.conj();
    let cb = c.conj();
    let b2 = b * b;
    let c2 = c * c;
    let ab2 = r(b.norm_sqr());
    let ac2 = r(c.norm_sqr());
    let ab4 = ab2 * ab2;
    let ab6 = ab4 * ab2;
    let ac4 = ac2 * ac2;
    match kind {
        MinorKind::Minor4 => {
            r(737.0) + r(268.0) * b2 + r(648.0) * ab6 + r(715.0) * ac2
                + ab4 * (r(1184.0) + r(63.0) * ac2)
                + bb * (b * (r(1427.0) + r(324.0) * b2)
                    + r(4.0) * bb * (r(67.0) + r(81.0) * ab2)
                    + r(778.0) * b * ac2)
        }
        MinorKind::Minor5 => {
            r(536.0) * (r(5.0) + b2)
                + ab2 * (r(8533.0) + r(648.0) * b2 - r(504.0) * c2)
                + r(9.0) * ac4 * (r(715.0) + r(63.0) * ab2)
                + bb * bb
                    * (r(536.0) + r(6868.0) * b2 + r(4095.0) * c2
                        + r(81.0) * ab2 * (r(8.0) + r(7.0) * b2 - r(7.0) * c2))
                + ac2 * (r(9233.0) + r(2412.0) * b2 + r(4788.0) * ab4 + r(7388.0) * ab2 + r(2412.0) * bb * bb)
                - r(18.0) * b * (r(-65.0) * b + r(9.0) * b * ab2 + r(8.0) * bb) * cb * cb
        }
        MinorKind::Det => {
            r(585.0) * b * (r(8.0) + r(7.0) * b2 - r(7.0) * c2) * bb * bb * bb
                + bb * bb
                    * (r(4824.0) + r(50436.0) * b2 + r(30647.0) * c2
                        - r(65.0) * ac2 * (r(-212.0) - r(595.0) * b2 + r(63.0) * c2))
                + ab2
                    * (r(71037.0) + r(4680.0) * b2 + r(13780.0) * c2 + r(38675.0) * ac4 + r(56293.0) * ac2
                        - r(1170.0) * (r(-14.0) + b2) * cb * cb)
                + r(9.0)
                    * (r(536.0) * (r(5.0) + b2 + c2)
                        + cb * (c * (r(7893.0) + r(1820.0) * b2 + r(520.0) * c2)
                            + cb * (r(536.0) + r(1058.0) * b2 + r(5604.0) * c2
                                + r(65.0) * ac2 * (r(8.0) - r(2.0) * b2 + r(7.0) * c2))))
        }
    }
}

/// Closed-form value of a minor of α₂ at x = 1/7. A numerator whose imaginary
/// part exceeds `NONREAL_TOL` of its modulus (or of 1) is rejected.
pub fn eval_closed_form(kind: MinorKind, b: C64, c: C64) -> Result<f64> {
    let n = closed_form_numerator(kind, b, c);
    if n.im.abs() > NONREAL_TOL * n.norm().max(1.0) {
        let d = kind.denominator();
        return Err(Error::NonRealValue {
            re: n.re / d,
            im: n.im / d,
        });
    }
    Ok(n.re / kind.denominator())
}

/// A (b, c) point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub b: C64,
    pub c: C64,
}

impl Point {
    pub fn new(b: C64, c: C64) -> Self {
        Self { b, c }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Pairs {
            b: [Sig17; 2],
            c: [Sig17; 2],
        }
        Pairs {
            b: [Sig17(self.b.re), Sig17(self.b.im)],
            c: [Sig17(self.c.re), Sig17(self.c.im)],
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub point: Point,
    #[serde(serialize_with = "ser_f64")]
    pub direct: f64,
    /// Real closed-form value, or `None` when it was non-real.
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub closed_form: Option<f64>,
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub imaginary: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub which: MinorKind,
    pub points: usize,
    /// Largest |closed − direct| / max(1, |direct|) over points where the
    /// closed form is real.
    #[serde(serialize_with = "ser_f64")]
    pub max_deviation: f64,
    pub non_real: usize,
    pub mismatches: Vec<Mismatch>,
    pub pass: bool,
}

pub fn cross_check(kind: MinorKind, points: &[Point]) -> Result<CrossCheck> {
    cross_check_at(&ExampleFrame::new(EXAMPLE_X)?, kind, points)
}

pub fn cross_check_at(frame: &ExampleFrame, kind: MinorKind, points: &[Point]) -> Result<CrossCheck> {
    if points.iter().any(|p| !(p.b.re.is_finite() && p.b.im.is_finite() && p.c.re.is_finite() && p.c.im.is_finite())) {
        return Err(Error::OutOfRange {
            name: "grid",
            value: f64::NAN,
            range: "finite points",
        });
    }
    let rows: Vec<Mismatch> = points
        .par_iter()
        .map(|&p| {
            let direct = frame.direct_minors(p.b, p.c)?.get(kind);
            let (closed_form, imaginary, deviation) = match eval_closed_form(kind, p.b, p.c) {
                Ok(v) => (Some(v), None, (v - direct).abs() / direct.abs().max(1.0)),
                Err(Error::NonRealValue { re, im }) => (None, Some(im), (re - direct).hypot(im) / direct.abs().max(1.0)),
                Err(e) => return Err(e),
            };
            Ok(Mismatch {
                point: p,
                direct,
                closed_form,
                imaginary,
                deviation,
            })
        })
        .collect::<Result<_>>()?;
    let max_deviation = rows
        .iter()
        .filter(|m| m.closed_form.is_some())
        .map(|m| m.deviation)
        .fold(0.0, f64::max);
    let non_real = rows.iter().filter(|m| m.closed_form.is_none()).count();
    let mismatches: Vec<Mismatch> = rows
        .into_iter()
        .filter(|m| m.closed_form.is_none() || m.deviation > CROSS_CHECK_TOL)
        .collect();
    Ok(CrossCheck {
        which: kind,
        points: points.len(),
        max_deviation,
        non_real,
        pass: mismatches.is_empty(),
        mismatches,
    })
}

/// 21 × 21 real (b, c) points on [−2, 2]².
pub fn real_cross_check_grid() -> Vec<Point> {
    let axis = AxisRange::new(-2.0, 2.0, 0.2).values();
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &b in &axis {
        for &c in &axis {
            out.push(Point::new(c64(b, 0.0), c64(c, 0.0)));
        }
    }
    out
}

/// 21 × 21 complex b on [−2, 2]² with c = 0.
pub fn complex_cross_check_grid() -> Vec<Point> {
    let axis = AxisRange::new(-2.0, 2.0, 0.2).values();
    let mut out = Vec::with_capacity(axis.len() * axis.len());
    for &re in &axis {
        for &im in &axis {
            out.push(Point::new(c64(re, im), c64(0.0, 0.0)));
        }
    }
    out
}

/// Evenly spaced values lo, lo + step, ..., up to hi.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxisRange {
    #[serde(serialize_with = "ser_f64")]
    pub lo: f64,
    #[serde(serialize_with = "ser_f64")]
    pub hi: f64,
    #[serde(serialize_with = "ser_f64")]
    pub step: f64,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    pub fn fixed(v: f64) -> Self {
        Self { lo: v, hi: v, step: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi < self.lo {
            return Err(Error::OutOfRange {
                name: "range",
                value: self.hi,
                range: "finite with lo <= hi",
            });
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::OutOfRange {
                name: "step",
                value: self.step,
                range: "(0, inf)",
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// When hi sits on the lattice the points are interpolated between the
    /// end points, so a symmetric range contains an exact zero.
    pub fn values(&self) -> Vec<f64> {
        let n = self.len();
        let span = (self.hi - self.lo) / self.step;
        let on_lattice = n > 1 && ((n - 1) as f64 - span).abs() < 1e-9;
        (0..n)
            .map(|k| {
                if on_lattice {
                    self.lo + (self.hi - self.lo) * k as f64 / (n - 1) as f64
                } else {
                    self.lo + k as f64 * self.step
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanQuantity {
    #[serde(rename = "alpha1_psd")]
    Alpha1Psd,
    #[serde(rename = "alpha2_minor4")]
    Minor4,
    #[serde(rename = "alpha2_minor5")]
    Minor5,
    #[serde(rename = "alpha2_det")]
    Det,
    F,
    G,
}

impl ScanQuantity {
    pub fn label(self) -> &'static str {
        match self {
            ScanQuantity::Alpha1Psd => "alpha1_psd",
            ScanQuantity::Minor4 => "alpha2_minor4",
            ScanQuantity::Minor5 => "alpha2_minor5",
            ScanQuantity::Det => "alpha2_det",
            ScanQuantity::F => "F",
            ScanQuantity::G => "G",
        }
    }

    pub fn default_scale(self) -> f64 {
        match self {
            ScanQuantity::F => F_SCALE,
            ScanQuantity::G => G_SCALE,
            _ => 1.0,
        }
    }

    pub fn minor(self) -> Option<MinorKind> {
        match self {
            ScanQuantity::Alpha1Psd => None,
            ScanQuantity::Minor4 => Some(MinorKind::Minor4),
            ScanQuantity::Minor5 | ScanQuantity::F => Some(MinorKind::Minor5),
            ScanQuantity::Det | ScanQuantity::G => Some(MinorKind::Det),
        }
    }
}

impl std::str::FromStr for ScanQuantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "alpha1_psd" => Ok(ScanQuantity::Alpha1Psd),
            "alpha2_minor4" | "minor4" => Ok(ScanQuantity::Minor4),
            "alpha2_minor5" | "minor5" => Ok(ScanQuantity::Minor5),
            "alpha2_det" | "det" => Ok(ScanQuantity::Det),
            "F" | "f" => Ok(ScanQuantity::F),
            "G" | "g" => Ok(ScanQuantity::G),
            _ => Err(format!(
                "unknown quantity `{s}` (alpha1_psd, alpha2_minor4, alpha2_minor5, alpha2_det, F, G)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    Direct,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CGrid {
    List(#[serde(serialize_with = "complex_pairs")] Vec<C64>),
    Grid { re: AxisRange, im: AxisRange },
}

impl CGrid {
    pub fn values(&self) -> Vec<C64> {
        match self {
            CGrid::List(v) => v.clone(),
            CGrid::Grid { re, im } => {
                let ims = im.values();
                re.values().iter().flat_map(|&r| ims.iter().map(move |&i| c64(r, i))).collect()
            }
        }
    }

    fn is_grid(&self) -> bool {
        matches!(self, CGrid::Grid { .. })
    }
}

/// c ∈ {0, ±1±i}.
pub fn figure_c_values() -> Vec<C64> {
    vec![
        c64(0.0, 0.0),
        c64(1.0, 1.0),
        c64(1.0, -1.0),
        c64(-1.0, 1.0),
        c64(-1.0, -1.0),
    ]
}

/// A grid scan over b (or a, for α₁) and c. For `Alpha1Psd` the value is
/// the minimum eigenvalue of α₁(a) with a = b and c ignored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorScanSpec {
    pub which: ScanQuantity,
    pub source: ValueSource,
    pub re_b: AxisRange,
    pub im_b: AxisRange,
    pub c: CGrid,
    #[serde(serialize_with = "ser_f64")]
    pub scale: f64,
    #[serde(serialize_with = "ser_f64")]
    pub x: f64,
}

impl MinorScanSpec {
    /// Re b, Im b ∈ [−3, 3] with step 0.05, c = 0, direct minors, x = 1/7.
    pub fn figure(which: ScanQuantity) -> Self {
        let axis = AxisRange::new(-FIGURE_HALF_WIDTH, FIGURE_HALF_WIDTH, FIGURE_STEP);
        Self {
            which,
            source: ValueSource::Direct,
            re_b: axis,
            im_b: axis,
            c: CGrid::List(vec![c64(0.0, 0.0)]),
            scale: which.default_scale(),
            x: EXAMPLE_X,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.re_b.step = step;
        self.im_b.step = step;
        self
    }

    pub fn with_c(mut self, c: CGrid) -> Self {
        self.c = c;
        self
    }

    pub fn with_source(mut self, source: ValueSource) -> Self {
        self.source = source;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.re_b.validate()?;
        self.im_b.validate()?;
        if let CGrid::Grid { re, im } = &self.c {
            re.validate()?;
            im.validate()?;
        }
        if self.c.values().is_empty() {
            return Err(Error::OutOfRange {
                name: "c",
                value: 0.0,
                range: "non-empty list",
            });
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::OutOfRange {
                name: "scale",
                value: self.scale,
                range: "(0, inf)",
            });
        }
        if !(self.x > 0.0 && self.x < 1.0) {
            return Err(Error::OutOfRange {
                name: "x",
                value: self.x,
                range: "(0, 1)",
            });
        }
        if self.which == ScanQuantity::Alpha1Psd && self.source == ValueSource::ClosedForm {
            return Err(Error::OutOfRange {
                name: "source",
                value: 0.0,
                range: "direct for alpha1_psd",
            });
        }
        Ok(())
    }

    /// Grid points in emission order: c outermost, then Re b, then Im b.
    pub fn points(&self) -> Vec<Point> {
        let res = self.re_b.values();
        let ims = self.im_b.values();
        let mut out = Vec::with_capacity(res.len() * ims.len());
        for c in self.c.values() {
            for &r in &res {
                for &i in &ims {
                    out.push(Point::new(c64(r, i), c));
                }
            }
        }
        out
    }

    pub fn resolution(&self) -> f64 {
        self.re_b.step.max(self.im_b.step)
    }
}

fn scan_value(frame: &ExampleFrame, spec: &MinorScanSpec, p: Point) -> Result<f64> {
    let v = match (spec.which.minor(), spec.source) {
        (None, _) => is_psd(&frame.alpha(AlphaParams::One { a: p.b })?, PSD_TOL)?.min_eigenvalue,
        (Some(kind), ValueSource::Direct) => frame.direct_minors(p.b, p.c)?.get(kind),
        (Some(kind), ValueSource::ClosedForm) => eval_closed_form(kind, p.b, p.c)?,
    };
    Ok(spec.scale * v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub point: Point,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub starts: usize,
    pub evaluations: usize,
    #[serde(serialize_with = "ser_f64")]
    pub min_value: f64,
    pub argmin: Point,
}

#[derive(Clone, Debug)]
pub struct GridScan {
    pub spec: MinorScanSpec,
    pub samples: Vec<Sample>,
    pub min_value: f64,
    pub argmin: Point,
    pub refinement: Option<Refinement>,
}

#[derive(Serialize)]
struct GridSummary<'a> {
    re_b: &'a AxisRange,
    im_b: &'a AxisRange,
    c: &'a CGrid,
    points: usize,
    source: ValueSource,
    #[serde(serialize_with = "ser_f64")]
    x: f64,
}

/// {which, scale, min_value, argmin, grid, pass}, plus the refinement.
#[derive(Serialize)]
pub struct ScanSummary<'a> {
    which: &'static str,
    #[serde(serialize_with = "ser_f64")]
    scale: f64,
    #[serde(serialize_with = "ser_f64")]
    min_value: f64,
    argmin: Point,
    grid: GridSummary<'a>,
    refinement: Option<&'a Refinement>,
    pass: bool,
}

impl GridScan {
    /// Smallest value seen, refinement included.
    pub fn overall_min(&self) -> f64 {
        self.refinement
            .as_ref()
            .map_or(self.min_value, |r| r.min_value.min(self.min_value))
    }

    /// F and G: minimum in [1, 10]. α₁: minimum eigenvalue ≥ −1e-10.
    /// Raw minors: every value strictly positive.
    pub fn pass(&self) -> bool {
        let m = self.overall_min();
        match self.spec.which {
            ScanQuantity::F | ScanQuantity::G => m >= MIN_RANGE.0 && m <= MIN_RANGE.1,
            ScanQuantity::Alpha1Psd => m >= -PSD_TOL,
            _ => m > 0.0,
        }
    }

    pub fn summary(&self) -> ScanSummary<'_> {
        ScanSummary {
            which: self.spec.which.label(),
            scale: self.spec.scale,
            min_value: self.min_value,
            argmin: self.argmin,
            grid: GridSummary {
                re_b: &self.spec.re_b,
                im_b: &self.spec.im_b,
                c: &self.spec.c,
                points: self.samples.len(),
                source: self.spec.source,
                x: self.spec.x,
            },
            refinement: self.refinement.as_ref(),
            pass: self.pass(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"re_b,im_b,re_c,im_c,value\n")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{}",
                sig17(s.point.b.re),
                sig17(s.point.b.im),
                sig17(s.point.c.re),
                sig17(s.point.c.im),
                sig17(s.value)
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

pub fn scan(spec: &MinorScanSpec) -> Result<GridScan> {
    spec.validate()?;
    let frame = ExampleFrame::new(spec.x)?;
    let points = spec.points();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&p| scan_value(&frame, spec, p))
        .collect::<Result<_>>()?;
    let samples: Vec<Sample> = points
        .iter()
        .zip(&values)
        .map(|(&point, &value)| Sample { point, value })
        .collect();
    let best = samples
        .iter()
        .fold(None::<&Sample>, |m, s| match m {
            Some(m) if m.value <= s.value => Some(m),
            _ => Some(s),
        })
        .expect("validated grid is non-empty");
    let (min_value, argmin) = (best.value, best.point);
    let refinement = refine(&frame, spec, &samples)?;
    Ok(GridScan {
        spec: spec.clone(),
        samples,
        min_value,
        argmin,
        refinement: Some(refinement),
    })
}

/// Pattern search from the ten smallest samples over Re b, Im b (and c when
/// c is a grid), starting at the grid step and halving to 1e-10.
fn refine(frame: &ExampleFrame, spec: &MinorScanSpec, samples: &[Sample]) -> Result<Refinement> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| samples[i].value.total_cmp(&samples[j].value).then(i.cmp(&j)));
    order.truncate(REFINE_STARTS);
    let free = if spec.c.is_grid() && spec.which != ScanQuantity::Alpha1Psd { 4 } else { 2 };
    let h0 = spec.resolution();
    let results: Vec<(f64, Point, usize)> = order
        .par_iter()
        .map(|&i| {
            let start = samples[i];
            let mut q = [start.point.b.re, start.point.b.im, start.point.c.re, start.point.c.im];
            let at = |q: &[f64; 4]| Point::new(c64(q[0], q[1]), c64(q[2], q[3]));
            let mut best = start.value;
            let mut h = h0;
            let mut evals = 0;
            while h > 1e-10 && evals < REFINE_EVALS {
                let mut improved = false;
                'coords: for k in 0..free {
                    for sign in [1.0, -1.0] {
                        let mut t = q;
                        t[k] += sign * h;
                        evals += 1;
                        let v = match scan_value(frame, spec, at(&t)) {
                            Ok(v) => v,
                            Err(Error::NonRealValue { .. }) => continue,
                            Err(e) => return Err(e),
                        };
                        if v < best {
                            best = v;
                            q = t;
                            improved = true;
                            break 'coords;
                        }
                    }
                }
                if !improved {
                    h *= 0.5;
                }
            }
            Ok((best, at(&q), evals))
        })
        .collect::<Result<_>>()?;
    let evaluations = results.iter().map(|r| r.2).sum();
    let (min_value, argmin, _) = results
        .into_iter()
        .fold(None::<(f64, Point, usize)>, |m, r| match m {
            Some(m) if m.0 <= r.0 => Some(m),
            _ => Some(r),
        })
        .expect("at least one start");
    Ok(Refinement {
        starts: order.len(),
        evaluations,
        min_value,
        argmin,
    })
}

/// Minimum of a closed form over the scan grid, skipping non-real points.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormMinimum {
    pub which: &'static str,
    #[serde(serialize_with = "crate::format::ser_opt_f64")]
    pub min_value: Option<f64>,
    pub argmin: Option<Point>,
    pub evaluated: usize,
    pub non_real: usize,
}

pub fn closed_form_minimum(spec: &MinorScanSpec) -> Result<ClosedFormMinimum> {
    spec.validate()?;
    let kind = spec.which.minor().ok_or(Error::OutOfRange {
        name: "which",
        value: 0.0,
        range: "a minor of alpha2",
    })?;
    let points = spec.points();
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|p| match eval_closed_form(kind, p.b, p.c) {
            Ok(v) => Ok(Some(spec.scale * v)),
            Err(Error::NonRealValue { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, Point)> = None;
    for (p, v) in points.iter().zip(&values) {
        if let Some(v) = *v {
            if best.map_or(true, |(m, _)| v < m) {
                best = Some((v, *p));
            }
        }
    }
    let non_real = values.iter().filter(|v| v.is_none()).count();
    Ok(ClosedFormMinimum {
        which: spec.which.label(),
        min_value: best.map(|b| b.0),
        argmin: best.map(|b| b.1),
        evaluated: points.len(),
        non_real,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdVerdict {
    #[serde(serialize_with = "crate::format::complex_scalar")]
    pub a: C64,
    #[serde(serialize_with = "ser_f64")]
    pub min_eigenvalue: f64,
    pub psd: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsdScan {
    #[serde(serialize_with = "ser_f64")]
    pub x: f64,
    pub points: usize,
    #[serde(serialize_with = "ser_f64")]
    pub min_eigenvalue: f64,
    pub verdicts: Vec<PsdVerdict>,
    pub pass: bool,
}

/// |a| at 20 log-spaced radii in [1e-2, 1e2] × 24 phases, plus a = 0.
pub fn default_a_grid() -> Vec<C64> {
    log_polar_grid(20, 24, 1e-2, 1e2)
}

pub fn psd_scan_alpha1(a_grid: &[C64], x: f64) -> Result<PsdScan> {
    let frame = ExampleFrame::new(x)?;
    let verdicts: Vec<PsdVerdict> = a_grid
        .par_iter()
        .map(|&a| {
            let cert = is_psd(&frame.alpha(AlphaParams::One { a })?, PSD_TOL)?;
            Ok(PsdVerdict {
                a,
                min_eigenvalue: cert.min_eigenvalue,
                psd: cert.psd,
            })
        })
        .collect::<Result<_>>()?;
    let min_eigenvalue = verdicts.iter().map(|v| v.min_eigenvalue).fold(f64::INFINITY, f64::min);
    Ok(PsdScan {
        x,
        points: verdicts.len(),
        min_eigenvalue,
        pass: verdicts.iter().all(|v| v.psd),
        verdicts,
    })
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub x: f64,
    pub step: f64,
    pub half_width: f64,
    pub c_values: Vec<C64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            x: EXAMPLE_X,
            step: FIGURE_STEP,
            half_width: FIGURE_HALF_WIDTH,
            c_values: figure_c_values(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

/// Everything `verify_example` computed. `scans` hold the full grids for
/// CSV emission.
#[derive(Clone, Debug)]
pub struct ExampleReport {
    pub x: f64,
    pub resolution: f64,
    pub inertia: Inertia,
    pub checks: Vec<Check>,
    pub psd_scan: PsdScan,
    pub cross_checks: Vec<CrossCheck>,
    /// Same comparison on complex b; reported, not gating.
    pub complex_cross_checks: Vec<CrossCheck>,
    pub scans: Vec<GridScan>,
    pub closed_form_minima: Vec<ClosedFormMinimum>,
}

impl ExampleReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn scan(&self, which: ScanQuantity) -> Option<&GridScan> {
        self.scans.iter().find(|s| s.spec.which == which)
    }
}

#[derive(Serialize)]
struct ScanJson<'a> {
    #[serde(flatten)]
    summary: ScanSummary<'a>,
    #[serde(serialize_with = "ser_f64")]
    overall_min: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    #[serde(serialize_with = "ser_f64")]
    x: f64,
    #[serde(serialize_with = "ser_f64")]
    resolution: f64,
    inertia: Inertia,
    pass: bool,
    checks: &'a [Check],
    psd_scan: PsdScanSummary,
    cross_checks: &'a [CrossCheck],
    complex_cross_checks: &'a [CrossCheck],
    scans: Vec<ScanJson<'a>>,
    closed_form_minima: &'a [ClosedFormMinimum],
}

#[derive(Serialize)]
struct PsdScanSummary {
    #[serde(serialize_with = "ser_f64")]
    x: f64,
    points: usize,
    #[serde(serialize_with = "ser_f64")]
    min_eigenvalue: f64,
    pass: bool,
}

impl ExampleReport {
    fn doc(&self) -> ReportJson<'_> {
        ReportJson {
            x: self.x,
            resolution: self.resolution,
            inertia: self.inertia,
            pass: self.pass(),
            checks: &self.checks,
            psd_scan: PsdScanSummary {
                x: self.psd_scan.x,
                points: self.psd_scan.points,
                min_eigenvalue: self.psd_scan.min_eigenvalue,
                pass: self.psd_scan.pass,
            },
            cross_checks: &self.cross_checks,
            complex_cross_checks: &self.complex_cross_checks,
            scans: self
                .scans
                .iter()
                .map(|s| ScanJson {
                    summary: s.summary(),
                    overall_min: s.overall_min(),
                })
                .collect(),
            closed_form_minima: &self.closed_form_minima,
        }
    }

    /// Master verdict as JSON; per-point PSD verdicts and grid samples are
    /// left to the CSV files.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.doc()).expect("report serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json_string()).expect("report parses")
    }
}

fn fmt_point(p: &Point) -> String {
    format!("b = {}{:+}i, c = {}{:+}i", p.b.re, p.b.im, p.c.re, p.c.im)
}

/// Runs the full battery: inertia (1,0,8), α₁ PSD on the default a-grid,
/// closed forms against direct minors, positivity of the three minors and
/// the F/G minima over the figure range.
pub fn verify_example(cfg: &VerifyConfig) -> Result<ExampleReport> {
    let frame = ExampleFrame::new(cfg.x)?;
    let mut checks = Vec::new();

    let state = build_family(FamilyCase::V, cfg.x)?;
    let inertia = inertia_of(&state.partial_transpose(), None)?;
    checks.push(Check {
        id: "inertia".into(),
        pass: inertia == Inertia::new(1, 0, 8),
        detail: format!("inertia of the partial transpose {inertia}, expected (1, 0, 8)"),
    });

    let psd_scan = psd_scan_alpha1(&default_a_grid(), cfg.x)?;
    checks.push(Check {
        id: "alpha1_psd".into(),
        pass: psd_scan.pass,
        detail: format!(
            "{} a-values, min eigenvalue {:.6e} (tolerance -{PSD_TOL:e})",
            psd_scan.points, psd_scan.min_eigenvalue
        ),
    });

    let real_grid = real_cross_check_grid();
    let complex_grid = complex_cross_check_grid();
    let mut cross_checks = Vec::new();
    let mut complex_cross_checks = Vec::new();
    for kind in MinorKind::ALL {
        let cc = cross_check_at(&frame, kind, &real_grid)?;
        let worst = cc.mismatches.iter().max_by(|a, b| a.deviation.total_cmp(&b.deviation));
        checks.push(Check {
            id: format!("closed_form_{}", kind.label()),
            pass: cc.pass,
            detail: format!(
                "{} real points, max deviation {:.3e}, {} mismatches{}",
                cc.points,
                cc.max_deviation,
                cc.mismatches.len(),
                worst.map_or(String::new(), |w| format!(", worst at {}", fmt_point(&w.point)))
            ),
        });
        cross_checks.push(cc);
        complex_cross_checks.push(cross_check_at(&frame, kind, &complex_grid)?);
    }

    let base = |which: ScanQuantity| MinorScanSpec {
        which,
        source: ValueSource::Direct,
        re_b: AxisRange::new(-cfg.half_width, cfg.half_width, cfg.step),
        im_b: AxisRange::new(-cfg.half_width, cfg.half_width, cfg.step),
        c: CGrid::List(cfg.c_values.clone()),
        scale: which.default_scale(),
        x: cfg.x,
    };
    let mut scans = Vec::new();
    let mut closed_form_minima = Vec::new();
    for which in [
        ScanQuantity::Minor4,
        ScanQuantity::Minor5,
        ScanQuantity::Det,
        ScanQuantity::F,
        ScanQuantity::G,
    ] {
        let spec = base(which);
        let s = scan(&spec)?;
        let detail = match which {
            ScanQuantity::F | ScanQuantity::G => format!(
                "{} points at step {}, grid min {:.6} at {}, refined min {:.6}, required in [{}, {}]",
                s.samples.len(),
                cfg.step,
                s.min_value,
                fmt_point(&s.argmin),
                s.overall_min(),
                MIN_RANGE.0,
                MIN_RANGE.1
            ),
            _ => format!(
                "{} points at step {}, min {:.6e} at {}",
                s.samples.len(),
                cfg.step,
                s.overall_min(),
                fmt_point(&s.argmin)
            ),
        };
        let id = match which {
            ScanQuantity::F => "F_min_in_range".to_string(),
            ScanQuantity::G => "G_min_in_range".to_string(),
            _ => format!("{}_positive", which.minor().expect("minor").label()),
        };
        checks.push(Check {
            id,
            pass: s.pass(),
            detail,
        });
        if matches!(which, ScanQuantity::F | ScanQuantity::G) {
            closed_form_minima.push(closed_form_minimum(&spec)?);
        }
        scans.push(s);
    }

    Ok(ExampleReport {
        x: cfg.x,
        resolution: cfg.step,
        inertia,
        checks,
        psd_scan,
        cross_checks,
        complex_cross_checks,
        scans,
        closed_form_minima,
    })
}
