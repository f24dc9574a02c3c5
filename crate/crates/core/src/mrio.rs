//! Multiregional input-output core.
//!
//! Supply/use tables are turned into an industry-by-industry direct
//! requirements matrix with the fixed product-sales-structure transformation
//! (Eurostat Model D): `A = D B` where `D[i,p] = V[i,p] / q[p]` is the market
//! share of industry `i` in product `p` and `B[p,j] = U[p,j] / g[j]` is the
//! product input per unit of industry output. Impacts of a final-demand shock
//! follow from the Leontief model `dx = (I - A)^{-1} dy`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::accounts::RegionSectorVector;
use crate::index::{IndexError, RegionSectorIndex};
use crate::linalg::{DenseMatrix, LinalgError, LuFactors};

/// Relative tolerance on supply/output balances.
pub const BALANCE_TOLERANCE: f64 = 1e-6;
/// Default Neumann series settings.
pub const NEUMANN_TOLERANCE: f64 = 1e-10;
pub const NEUMANN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MrioError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("negative entry {value} in {table} at ({row}, {col})")]
    NegativeEntry {
        table: &'static str,
        row: String,
        col: String,
        value: f64,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("industry {industry}: total supply {supply} does not match output {output}")]
    Unbalanced {
        industry: String,
        supply: f64,
        output: f64,
    },
    #[error("industry {0} has zero output but nonzero intermediate inputs")]
    ZeroOutputWithInputs(String),
    #[error("direct requirements matrix is not productive; column sums >= 1: {}", fmt_columns(.columns))]
    NonProductive { columns: Vec<(String, f64)> },
    #[error("Neumann series did not converge after {iterations} terms (last increment {residual:e})")]
    NeumannNotConverged { iterations: usize, residual: f64 },
    #[error("vectors are laid out over different indices")]
    IndexMismatch,
    #[error("negative final demand {value} at {position} in shock `{label}`")]
    NegativeShock {
        label: String,
        position: String,
        value: f64,
    },
    #[error("I - A is singular (column {0})")]
    Singular(usize),
    #[error("Leontief solve residual {0:e} exceeds tolerance")]
    IllConditioned(f64),
}

fn fmt_columns(cols: &[(String, f64)]) -> String {
    let mut out = String::new();
    for (i, (label, sum)) in cols.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&alloc::format!("{label}={sum}"));
    }
    out
}

impl From<LinalgError> for MrioError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::DimensionMismatch { expected, found } => MrioError::DimensionMismatch {
                what: "matrix",
                expected,
                found,
            },
            LinalgError::Singular(k) => MrioError::Singular(k),
        }
    }
}

fn check_dims(what: &'static str, expected: usize, found: usize) -> Result<(), MrioError> {
    if expected != found {
        return Err(MrioError::DimensionMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

/// Multiregional supply and use tables in million USD.
#[derive(Debug, Clone)]
pub struct SupplyUseTables {
    industries: Arc<RegionSectorIndex>,
    products: Arc<RegionSectorIndex>,
    /// products x industries
    use_matrix: DenseMatrix,
    /// industries x products
    supply_matrix: DenseMatrix,
    industry_output: Vec<f64>,
    product_output: Vec<f64>,
}

impl SupplyUseTables {
    /// Validates and assembles the tables.
    ///
    /// Product output `q` is the column sums of the supply matrix. Industry
    /// output `g` defaults to the row sums of the supply matrix; when given it
    /// must match them within [`BALANCE_TOLERANCE`].
    pub fn new(
        industries: Arc<RegionSectorIndex>,
        products: Arc<RegionSectorIndex>,
        use_matrix: DenseMatrix,
        supply_matrix: DenseMatrix,
        industry_output: Option<Vec<f64>>,
    ) -> Result<Self, MrioError> {
        match Self::audit(
            &industries,
            &products,
            &use_matrix,
            &supply_matrix,
            industry_output.as_deref(),
        )
        .into_iter()
        .next()
        {
            Some(e) => Err(e),
            None => {
                let product_output = supply_matrix.col_sums();
                let industry_output = industry_output.unwrap_or_else(|| supply_matrix.row_sums());
                Ok(SupplyUseTables {
                    industries,
                    products,
                    use_matrix,
                    supply_matrix,
                    industry_output,
                    product_output,
                })
            }
        }
    }

    /// Every invariant violation in the raw tables, in a deterministic order.
    pub fn audit(
        industries: &RegionSectorIndex,
        products: &RegionSectorIndex,
        use_matrix: &DenseMatrix,
        supply_matrix: &DenseMatrix,
        industry_output: Option<&[f64]>,
    ) -> Vec<MrioError> {
        let ni = industries.len();
        let np = products.len();
        let mut findings = Vec::new();
        let dims = [
            ("use matrix rows", np, use_matrix.rows()),
            ("use matrix columns", ni, use_matrix.cols()),
            ("supply matrix rows", ni, supply_matrix.rows()),
            ("supply matrix columns", np, supply_matrix.cols()),
            (
                "industry output",
                ni,
                industry_output.map_or(ni, |g| g.len()),
            ),
        ];
        for (what, expected, found) in dims {
            if let Err(e) = check_dims(what, expected, found) {
                findings.push(e);
            }
        }
        if !findings.is_empty() {
            return findings;
        }
        for (table, m, rows, cols) in [
            ("use", use_matrix, products, industries),
            ("supply", supply_matrix, industries, products),
        ] {
            if !m.is_finite() {
                findings.push(MrioError::NonFinite(table));
                continue;
            }
            for i in 0..m.rows() {
                for (j, &v) in m.row(i).iter().enumerate() {
                    if v < 0.0 {
                        findings.push(MrioError::NegativeEntry {
                            table,
                            row: rows.label(i),
                            col: cols.label(j),
                            value: v,
                        });
                    }
                }
            }
        }
        let supply = supply_matrix.row_sums();
        if let Some(g) = industry_output {
            for (j, (&s, &o)) in supply.iter().zip(g).enumerate() {
                if !o.is_finite() || o < 0.0 {
                    findings.push(MrioError::NegativeEntry {
                        table: "industry output",
                        row: industries.label(j),
                        col: "output".to_string(),
                        value: o,
                    });
                } else if (s - o).abs() > BALANCE_TOLERANCE * s.abs().max(o.abs()) {
                    findings.push(MrioError::Unbalanced {
                        industry: industries.label(j),
                        supply: s,
                        output: o,
                    });
                }
            }
        }
        let g: Vec<f64> = industry_output.map_or(supply, |g| g.to_vec());
        let inputs = use_matrix.col_sums();
        for (j, (&gj, &uj)) in g.iter().zip(&inputs).enumerate() {
            if gj <= 0.0 && uj > 0.0 {
                findings.push(MrioError::ZeroOutputWithInputs(industries.label(j)));
            }
        }
        findings
    }

    pub fn industries(&self) -> &Arc<RegionSectorIndex> {
        &self.industries
    }

    pub fn products(&self) -> &Arc<RegionSectorIndex> {
        &self.products
    }

    pub fn industry_output(&self) -> &[f64] {
        &self.industry_output
    }

    pub fn product_output(&self) -> &[f64] {
        &self.product_output
    }

    pub fn use_matrix(&self) -> &DenseMatrix {
        &self.use_matrix
    }

    pub fn supply_matrix(&self) -> &DenseMatrix {
        &self.supply_matrix
    }

    /// Market-share matrix `D` (industries x products), `D[i,p] = V[i,p] / q[p]`.
    pub fn market_shares(&self) -> DenseMatrix {
        let mut d = self.supply_matrix.clone();
        for i in 0..d.rows() {
            for (v, &q) in d.row_mut(i).iter_mut().zip(&self.product_output) {
                *v = if q > 0.0 { *v / q } else { 0.0 };
            }
        }
        d
    }

    /// Input coefficients `B` (products x industries), `B[p,j] = U[p,j] / g[j]`.
    pub fn input_coefficients(&self) -> DenseMatrix {
        let mut b = self.use_matrix.clone();
        for p in 0..b.rows() {
            for (v, &g) in b.row_mut(p).iter_mut().zip(&self.industry_output) {
                *v = if g > 0.0 { *v / g } else { 0.0 };
            }
        }
        b
    }
}

/// How the productivity of `A` was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductivityEvidence {
    /// Every column sum is below one.
    ColumnSums,
    /// The series `sum_k A^k 1` converged after the given number of terms.
    NeumannConverged(usize),
}

/// Industry-by-industry direct requirements matrix `A`.
#[derive(Debug, Clone)]
pub struct DirectRequirements {
    index: Arc<RegionSectorIndex>,
    a: DenseMatrix,
    evidence: ProductivityEvidence,
}

impl DirectRequirements {
    /// Wraps a coefficient matrix after checking shape, sign and productivity.
    pub fn new(index: Arc<RegionSectorIndex>, a: DenseMatrix) -> Result<Self, MrioError> {
        let n = index.len();
        check_dims("A rows", n, a.rows())?;
        check_dims("A columns", n, a.cols())?;
        if !a.is_finite() {
            return Err(MrioError::NonFinite("A"));
        }
        for i in 0..n {
            for (j, &v) in a.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(MrioError::NegativeEntry {
                        table: "A",
                        row: index.label(i),
                        col: index.label(j),
                        value: v,
                    });
                }
            }
        }
        let evidence = check_productive(&index, &a)?;
        Ok(DirectRequirements { index, a, evidence })
    }

    pub fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn evidence(&self) -> ProductivityEvidence {
        self.evidence
    }
}

/// Accepts `A` if all column sums are below one, otherwise if `sum_k A^k 1`
/// converges within the default Neumann budget.
pub fn check_productive(
    index: &RegionSectorIndex,
    a: &DenseMatrix,
) -> Result<ProductivityEvidence, MrioError> {
    let sums = a.col_sums();
    if sums.iter().all(|&s| s < 1.0) {
        return Ok(ProductivityEvidence::ColumnSums);
    }
    let mut term = vec![1.0; a.rows()];
    for k in 1..=NEUMANN_MAX_ITER {
        term = a.matvec(&term)?;
        let m = term.iter().fold(0.0f64, |m, v| m.max(*v));
        if m < NEUMANN_TOLERANCE {
            return Ok(ProductivityEvidence::NeumannConverged(k));
        }
        if !m.is_finite() || m > 1e12 {
            break;
        }
    }
    Err(MrioError::NonProductive {
        columns: sums
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= 1.0)
            .map(|(j, &s)| (index.label(j), s))
            .collect(),
    })
}

/// Model D: `A = D B`. Columns of zero-output industries are zero.
pub fn derive_direct_requirements(sut: &SupplyUseTables) -> Result<DirectRequirements, MrioError> {
    let d = sut.market_shares();
    let b = sut.input_coefficients();
    let a = d.matmul(&b)?;
    DirectRequirements::new(sut.industries.clone(), a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeontiefMethod {
    /// Dense LU factorization of `I - A`; `L` stays implicit in the factors.
    Direct,
    /// Explicit `L` from the doubling form of the Neumann series,
    /// `S_{2m} = S_m + A^m S_m`, stopped when the added block falls below `tol`.
    Neumann { tol: f64, max_iter: usize },
}

impl LeontiefMethod {
    pub fn neumann_default() -> Self {
        LeontiefMethod::Neumann {
            tol: NEUMANN_TOLERANCE,
            max_iter: NEUMANN_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Factored(LuFactors),
    Explicit(DenseMatrix),
}

/// Total requirements `L = (I - A)^{-1}`, either factored or explicit.
///
/// Immutable; share it across threads to evaluate many shocks.
#[derive(Debug, Clone)]
pub struct TotalRequirements {
    index: Arc<RegionSectorIndex>,
    repr: Repr,
}

impl TotalRequirements {
    pub fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.repr, Repr::Explicit(_))
    }

    /// `L y`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>, MrioError> {
        check_dims("shock", self.index.len(), y.len())?;
        Ok(match &self.repr {
            Repr::Factored(lu) => lu.solve(y)?,
            Repr::Explicit(l) => l.matvec(y)?,
        })
    }

    /// Explicit `L`; materialized column by column when factored.
    pub fn to_matrix(&self) -> DenseMatrix {
        match &self.repr {
            Repr::Factored(lu) => lu.inverse(),
            Repr::Explicit(l) => l.clone(),
        }
    }

    /// `max |((I - A) L - I)[i,j]|`. Cubic cost; meant for verification.
    pub fn residual(&self, a: &DirectRequirements) -> f64 {
        let l = self.to_matrix();
        let prod = a
            .matrix()
            .identity_minus()
            .matmul(&l)
            .expect("square matrices of equal size");
        prod.max_abs_diff(&DenseMatrix::identity(l.rows()))
    }
}

/// Computes the total requirements for a productive `A`.
pub fn leontief_inverse(
    a: &DirectRequirements,
    method: LeontiefMethod,
) -> Result<TotalRequirements, MrioError> {
    let index = a.index.clone();
    match method {
        LeontiefMethod::Direct => {
            let lu = LuFactors::factorize(a.a.identity_minus())?;
            // Probe: (I - A) L 1 should reproduce 1.
            let ones = vec![1.0; index.len()];
            let x = lu.solve(&ones)?;
            let back = a.a.identity_minus().matvec(&x)?;
            let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let resid = back
                .iter()
                .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
            if resid > 1e-8 * scale {
                return Err(MrioError::IllConditioned(resid));
            }
            Ok(TotalRequirements {
                index,
                repr: Repr::Factored(lu),
            })
        }
        LeontiefMethod::Neumann { tol, max_iter } => {
            let n = index.len();
            let mut sum = DenseMatrix::identity(n);
            let mut power = a.a.clone();
            let mut terms = 1usize;
            loop {
                let increment = power.matmul(&sum)?;
                let residual = increment.max_abs();
                sum.add_assign(&increment);
                terms *= 2;
                if !residual.is_finite() {
                    return Err(MrioError::NeumannNotConverged {
                        iterations: terms,
                        residual,
                    });
                }
                if residual < tol {
                    break;
                }
                if terms >= max_iter {
                    return Err(MrioError::NeumannNotConverged {
                        iterations: terms,
                        residual,
                    });
                }
                power = power.matmul(&power)?;
            }
            Ok(TotalRequirements {
                index,
                repr: Repr::Explicit(sum),
            })
        }
    }
}

/// Exogenous final-demand vector in million USD.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalDemandShock {
    label: String,
    index: Arc<RegionSectorIndex>,
    values: Vec<f64>,
}

impl FinalDemandShock {
    pub fn new(
        label: impl Into<String>,
        index: Arc<RegionSectorIndex>,
        values: Vec<f64>,
    ) -> Result<Self, MrioError> {
        let label = label.into();
        check_dims("shock", index.len(), values.len())?;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(MrioError::NegativeShock {
                    label,
                    position: index.label(i),
                    value: v,
                });
            }
        }
        Ok(FinalDemandShock {
            label,
            index,
            values,
        })
    }

    pub fn zeros(label: impl Into<String>, index: Arc<RegionSectorIndex>) -> Self {
        let n = index.len();
        FinalDemandShock {
            label: label.into(),
            index,
            values: vec![0.0; n],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Adds `amount` at a flat position. `amount` must be finite and nonnegative.
    pub fn add(&mut self, position: usize, amount: f64) -> Result<(), MrioError> {
        if !amount.is_finite() || amount < 0.0 {
            return Err(MrioError::NegativeShock {
                label: self.label.clone(),
                position: self.index.label(position),
                value: amount,
            });
        }
        self.values[position] += amount;
        Ok(())
    }

    /// Elementwise sum of two shocks over the same index.
    pub fn combined(&self, other: &FinalDemandShock, label: impl Into<String>) -> Result<Self, MrioError> {
        same_index(&self.index, &other.index)?;
        Ok(FinalDemandShock {
            label: label.into(),
            index: self.index.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

impl RegionSectorVector for FinalDemandShock {
    fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Total (direct + indirect) output change in million USD.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactVector {
    index: Arc<RegionSectorIndex>,
    values: Vec<f64>,
}

impl ImpactVector {
    pub fn new(index: Arc<RegionSectorIndex>, values: Vec<f64>) -> Result<Self, MrioError> {
        check_dims("impact", index.len(), values.len())?;
        Ok(ImpactVector { index, values })
    }
}

impl RegionSectorVector for ImpactVector {
    fn index(&self) -> &Arc<RegionSectorIndex> {
        &self.index
    }
    fn values(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn same_index(a: &Arc<RegionSectorIndex>, b: &Arc<RegionSectorIndex>) -> Result<(), MrioError> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(MrioError::IndexMismatch)
    }
}

/// `dx = L dy`.
pub fn impact(l: &TotalRequirements, dy: &FinalDemandShock) -> Result<ImpactVector, MrioError> {
    same_index(&l.index, &dy.index)?;
    Ok(ImpactVector {
        index: l.index.clone(),
        values: l.apply(&dy.values)?,
    })
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::index::{Region, Sector};
    use alloc::format;

    fn index(regions: usize, sectors: usize) -> Arc<RegionSectorIndex> {
        let r = (0..regions)
            .map(|i| Region::new(format!("R{i}"), "").unwrap())
            .collect();
        let s = (0..sectors)
            .map(|i| Sector::parse(&format!("{:03}", 100 + i), "").unwrap())
            .collect();
        Arc::new(RegionSectorIndex::new(r, s).unwrap())
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn model_d_hand_example() {
        let idx = index(1, 2);
        let v = DenseMatrix::from_rows(&[&[10.0, 0.0], &[2.0, 8.0]]);
        let u = DenseMatrix::from_rows(&[&[3.0, 1.0], &[2.0, 4.0]]);
        let sut = SupplyUseTables::new(idx.clone(), idx, u, v, Some(vec![10.0, 10.0])).unwrap();
        assert_eq!(sut.product_output(), &[12.0, 8.0]);
        let d = sut.market_shares();
        assert!(close(d.get(0, 0), 10.0 / 12.0, 1e-15) && d.get(0, 1) == 0.0);
        assert!(close(d.get(1, 0), 2.0 / 12.0, 1e-15) && d.get(1, 1) == 1.0);
        let a = derive_direct_requirements(&sut).unwrap();
        // hand product of D and B = [[0.3, 0.1], [0.2, 0.4]]
        let expected = [[0.25, 1.0 / 12.0], [0.25, 5.0 / 12.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(a.matrix().get(i, j), expected[i][j], 1e-12));
            }
        }
    }

    #[test]
    fn model_d_one_to_one_supply() {
        let idx = index(2, 1);
        let g = [20.0, 40.0];
        let v = DenseMatrix::from_rows(&[&[20.0, 0.0], &[0.0, 40.0]]);
        let u = DenseMatrix::from_rows(&[&[2.0, 8.0], &[4.0, 10.0]]);
        let sut = SupplyUseTables::new(idx.clone(), idx, u.clone(), v, None).unwrap();
        let a = derive_direct_requirements(&sut).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(a.matrix().get(i, j), u.get(i, j) / g[j], 1e-15));
            }
        }
    }

    #[test]
    fn model_d_no_intermediate_use() {
        let idx = index(1, 3);
        let v = DenseMatrix::from_rows(&[&[5.0, 1.0, 0.0], &[0.0, 4.0, 0.0], &[0.0, 0.0, 2.0]]);
        let sut = SupplyUseTables::new(idx.clone(), idx, DenseMatrix::zeros(3, 3), v, None).unwrap();
        let a = derive_direct_requirements(&sut).unwrap();
        assert_eq!(a.matrix(), &DenseMatrix::zeros(3, 3));
    }

    #[test]
    fn zero_output_industry_column_is_zero() {
        let idx = index(1, 2);
        let v = DenseMatrix::from_rows(&[&[10.0, 0.0], &[0.0, 0.0]]);
        let u = DenseMatrix::from_rows(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let sut = SupplyUseTables::new(idx.clone(), idx, u, v, None).unwrap();
        let a = derive_direct_requirements(&sut).unwrap();
        assert_eq!(a.matrix().get(0, 1), 0.0);
        assert_eq!(a.matrix().get(1, 1), 0.0);
        let l = leontief_inverse(&a, LeontiefMethod::Direct).unwrap().to_matrix();
        assert_eq!(l.get(1, 1), 1.0);
    }

    #[test]
    fn sut_errors() {
        let idx = index(1, 2);
        let v = DenseMatrix::from_rows(&[&[10.0, 0.0], &[0.0, 10.0]]);
        let neg = DenseMatrix::from_rows(&[&[1.0, -0.5], &[0.0, 1.0]]);
        assert!(matches!(
            SupplyUseTables::new(idx.clone(), idx.clone(), neg, v.clone(), None),
            Err(MrioError::NegativeEntry { table: "use", .. })
        ));
        let u = DenseMatrix::zeros(2, 2);
        let err = SupplyUseTables::new(idx.clone(), idx.clone(), u.clone(), v.clone(), Some(vec![10.0, 10.5]))
            .unwrap_err();
        assert_eq!(
            err,
            MrioError::Unbalanced {
                industry: "R0:101".into(),
                supply: 10.0,
                output: 10.5
            }
        );
        assert!(matches!(
            SupplyUseTables::new(idx.clone(), idx.clone(), DenseMatrix::zeros(3, 2), v.clone(), None),
            Err(MrioError::DimensionMismatch { .. })
        ));
        let zero_out = DenseMatrix::from_rows(&[&[10.0, 0.0], &[0.0, 0.0]]);
        let u = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(
            SupplyUseTables::new(idx.clone(), idx, u, zero_out, None).unwrap_err(),
            MrioError::ZeroOutputWithInputs("R0:101".into())
        );
    }

    #[test]
    fn non_productive_rejected() {
        let idx = index(1, 2);
        let a = DenseMatrix::from_rows(&[&[0.6, 0.5], &[0.5, 0.6]]);
        match DirectRequirements::new(idx.clone(), a) {
            Err(MrioError::NonProductive { columns }) => {
                assert_eq!(columns.len(), 2);
                assert_eq!(columns[0].0, "R0:100");
            }
            other => panic!("{other:?}"),
        }
        // Column sum above one but spectral radius below one.
        let a = DenseMatrix::from_rows(&[&[0.1, 0.0], &[1.2, 0.1]]);
        let d = DirectRequirements::new(idx, a).unwrap();
        assert!(matches!(d.evidence(), ProductivityEvidence::NeumannConverged(_)));
    }

    #[test]
    fn leontief_two_by_two() {
        let idx = index(1, 2);
        let a = DirectRequirements::new(idx.clone(), DenseMatrix::from_rows(&[&[0.2, 0.3], &[0.1, 0.4]])).unwrap();
        // closed-form 2x2 inverse of I - A: det = 0.8*0.6 - 0.3*0.1 = 0.45
        let det = 0.8 * 0.6 - 0.3 * 0.1;
        let expected = [[0.6 / det, 0.3 / det], [0.1 / det, 0.8 / det]];
        for method in [LeontiefMethod::Direct, LeontiefMethod::neumann_default()] {
            let l = leontief_inverse(&a, method).unwrap();
            let m = l.to_matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(m.get(i, j), expected[i][j], 1e-9), "{method:?}");
                }
            }
            assert!(l.residual(&a) < 1e-8);
            let dy = FinalDemandShock::new("t", idx.clone(), vec![100.0, 0.0]).unwrap();
            let dx = impact(&l, &dy).unwrap();
            assert!(close(dx.values()[0], 100.0 * 0.6 / det, 1e-7));
            assert!(close(dx.values()[1], 100.0 * 0.1 / det, 1e-7));
        }
    }

    #[test]
    fn zero_a_gives_identity() {
        let idx = index(2, 2);
        let a = DirectRequirements::new(idx.clone(), DenseMatrix::zeros(4, 4)).unwrap();
        for method in [LeontiefMethod::Direct, LeontiefMethod::neumann_default()] {
            let l = leontief_inverse(&a, method).unwrap();
            assert_eq!(l.to_matrix(), DenseMatrix::identity(4));
            let dy = FinalDemandShock::new("t", idx.clone(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
            assert_eq!(impact(&l, &dy).unwrap().values(), &[1.0, 2.0, 3.0, 4.0]);
        }
    }

    #[test]
    fn neumann_budget_exhausted() {
        let idx = index(1, 1);
        let a = DirectRequirements::new(idx, DenseMatrix::from_rows(&[&[0.99]])).unwrap();
        let err = leontief_inverse(&a, LeontiefMethod::Neumann { tol: 1e-10, max_iter: 16 }).unwrap_err();
        assert!(matches!(err, MrioError::NeumannNotConverged { iterations: 16, .. }));
    }

    #[test]
    fn shock_validation_and_mismatch() {
        let idx = index(1, 2);
        assert!(matches!(
            FinalDemandShock::new("x", idx.clone(), vec![1.0, -1.0]),
            Err(MrioError::NegativeShock { .. })
        ));
        assert!(FinalDemandShock::new("x", idx.clone(), vec![1.0]).is_err());
        let a = DirectRequirements::new(idx, DenseMatrix::zeros(2, 2)).unwrap();
        let l = leontief_inverse(&a, LeontiefMethod::Direct).unwrap();
        let other = FinalDemandShock::zeros("y", index(2, 1));
        assert_eq!(impact(&l, &other).unwrap_err(), MrioError::IndexMismatch);
    }
}
