use thiserror::Error;

use crate::distill::DistillReport;
use crate::kernel::ProductVectorResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not complex symmetric (residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("iteration budget exhausted after {rotations} rotations")]
    NoConvergence { rotations: usize },

    #[error("minor of order {order} has imaginary residue {imag:.3e}")]
    NonRealMinor { order: usize, imag: f64 },

    #[error("closed form evaluated to a non-real value ({re:.6e} + {im:.6e}i)")]
    NonRealValue { re: f64, im: f64 },

    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("zero vector")]
    ZeroVector,

    #[error("state has an empty kernel")]
    EmptyKernel,

    #[error("vector has Schmidt rank {0}, at most 2 required")]
    SchmidtRankTooHigh(usize),

    #[error("vector is not in the kernel (residual {residual:.3e})")]
    NotInKernel { residual: f64 },

    #[error("no strict sign change on [{lo}, {hi}] (values {f_lo:.3e}, {f_hi:.3e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("cubic pencil vanishes identically")]
    DegeneratePencil(Box<ProductVectorResult>),

    #[error("search budget exhausted")]
    BudgetExhausted(Box<DistillReport>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
