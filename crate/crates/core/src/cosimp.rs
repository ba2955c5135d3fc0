//! Truncated cosimplicial rational vector spaces, the box product, the
//! product-compatibility checker, Hochschild objects with cup product, and
//! discrete tree-indexed monad models (see [`discrete`]).

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::linalg::{Matrix, Quotient};
use crate::surj::parse_rational;

pub mod discrete;

#[derive(Debug, Error)]
pub enum CosimpError {
    #[error("degree {0} outside truncation {1}")]
    Degree(usize, usize),
    #[error("cosimplicial identity violated: {0}")]
    Identity(String),
    #[error("algebra axiom violated: {0}")]
    Axiom(String),
    #[error("bad input: {0}")]
    BadInput(String),
}

/// Degrees `0..=n` of a cosimplicial rational vector space: dimensions,
/// cofaces `d[p][i] : X^p -> X^{p+1}` (`0 <= i <= p+1`, `p < n`) and
/// codegeneracies `s[p][j] : X^{p+1} -> X^p` (`0 <= j <= p`, `p < n`).
#[derive(Clone, Debug)]
pub struct TruncatedCosimplicial {
    pub n: usize,
    pub dims: Vec<usize>,
    pub d: Vec<Vec<Matrix>>,
    pub s: Vec<Vec<Matrix>>,
}

impl TruncatedCosimplicial {
    /// The constant object with one `dim`-dimensional space.
    pub fn constant(dim: usize, n: usize) -> Self {
        let dims = vec![dim; n + 1];
        let d = (0..n)
            .map(|p| (0..=p + 1).map(|_| Matrix::identity(dim)).collect())
            .collect();
        let s = (0..n)
            .map(|p| (0..=p).map(|_| Matrix::identity(dim)).collect())
            .collect();
        TruncatedCosimplicial { n, dims, d, s }
    }

    pub fn coface(&self, p: usize, i: usize) -> &Matrix {
        &self.d[p][i]
    }

    pub fn codegeneracy(&self, p: usize, j: usize) -> &Matrix {
        // s^j out of degree p+1.
        &self.s[p][j]
    }

    /// Verify the five cosimplicial identity families exactly, through the
    /// truncation degree.
    pub fn validate(&self) -> Result<(), CosimpError> {
        let n = self.n;
        for p in 0..n {
            if self.d[p].len() != p + 2 {
                return Err(CosimpError::Identity(format!("coface count at {p}")));
            }
            if self.s[p].len() != p + 1 {
                return Err(CosimpError::Identity(format!("codegeneracy count at {p}")));
            }
        }
        // d^j d^i = d^i d^{j-1} for i < j.
        for p in 0..n.saturating_sub(1) {
            for j in 0..=p + 2 {
                for i in 0..j {
                    let lhs = self.d[p + 1][j].mul(&self.d[p][i]);
                    let rhs = self.d[p + 1][i].mul(&self.d[p][j - 1]);
                    if lhs != rhs {
                        return Err(CosimpError::Identity(format!("d^{j} d^{i} at degree {p}")));
                    }
                }
            }
        }
        // s^b s^a = s^{a-1} s^b for b < a (maps X^{p+2} -> X^p).
        for p in 0..n.saturating_sub(1) {
            for a in 0..=p + 1 {
                for b in 0..a.min(p + 1) {
                    let lhs = self.s[p][b].mul(&self.s[p + 1][a]);
                    let rhs = self.s[p][a - 1].mul(&self.s[p + 1][b]);
                    if lhs != rhs {
                        return Err(CosimpError::Identity(format!("s^{b} s^{a} at degree {p}")));
                    }
                }
            }
        }
        // s^j d^i cases (maps X^p -> X^p).
        for p in 0..n {
            for i in 0..=p + 1 {
                for j in 0..=p {
                    let comp = self.s[p][j].mul(&self.d[p][i]);
                    let ok = if i == j || i == j + 1 {
                        comp == Matrix::identity(self.dims[p])
                    } else if i < j {
                        // i < j needs p >= 1 to form d^i s^{j-1}.
                        comp == self.d[p - 1][i].mul(&self.s[p - 1][j - 1])
                    } else {
                        comp == self.d[p - 1][i - 1].mul(&self.s[p - 1][j])
                    };
                    if !ok {
                        return Err(CosimpError::Identity(format!(
                            "s^{j} d^{i} at degree {p}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A family of products `mu_{p,q} : X^p (x) X^q -> X^{p+q}` given on tensor
/// bases (column index `a * dim_q + b`), for `p + q <= n`.
#[derive(Clone, Debug)]
pub struct MsProduct {
    pub n: usize,
    pub mats: Vec<Vec<Matrix>>,
}

impl MsProduct {
    pub fn mat(&self, p: usize, q: usize) -> &Matrix {
        &self.mats[p][q]
    }

    pub fn apply(&self, p: usize, q: usize, x: &[BigRational], y: &[BigRational]) -> Vec<BigRational> {
        let mut tensor = Vec::with_capacity(x.len() * y.len());
        for a in x {
            for b in y {
                tensor.push(a * b);
            }
        }
        self.mats[p][q].apply(&tensor)
    }
}

fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zero(a.rows * b.rows, a.cols * b.cols);
    for ra in 0..a.rows {
        for ca in 0..a.cols {
            let va = a.get(ra, ca);
            if va.is_zero() {
                continue;
            }
            for rb in 0..b.rows {
                for cb in 0..b.cols {
                    let vb = b.get(rb, cb);
                    if vb.is_zero() {
                        continue;
                    }
                    out.set(ra * b.rows + rb, ca * b.cols + cb, va * vb);
                }
            }
        }
    }
    out
}

/// One violation found by [`ms_check`].
#[derive(Clone, Debug)]
pub struct MsViolation {
    pub family: &'static str,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct MsReport {
    pub checks: usize,
    pub violations: Vec<MsViolation>,
}

impl MsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify the product-compatibility conditions as exact matrix identities:
/// coface distribution, the hinge identity `(d^{p+1}x)y = x(d^0y)`,
/// codegeneracy distribution, and associativity.
pub fn ms_check(x: &TruncatedCosimplicial, mu: &MsProduct) -> MsReport {
    let n = x.n;
    let mut report = MsReport::default();
    for p in 0..=n {
        for q in 0..=n - p {
            if p + q >= n {
                continue;
            }
            let m = mu.mat(p, q);
            // d^i (x . y).
            for i in 0..=p + q + 1 {
                report.checks += 1;
                let lhs = x.d[p + q][i].mul(m);
                let rhs = if i <= p {
                    mu.mat(p + 1, q).mul(&kron(&x.d[p][i], &Matrix::identity(x.dims[q])))
                } else {
                    mu.mat(p, q + 1)
                        .mul(&kron(&Matrix::identity(x.dims[p]), &x.d[q][i - p]))
                };
                if lhs != rhs {
                    report.violations.push(MsViolation {
                        family: "coface",
                        indices: vec![p, q, i],
                    });
                }
            }
            // Hinge: (d^{p+1} x) . y = x . (d^0 y).
            report.checks += 1;
            let lhs = mu
                .mat(p + 1, q)
                .mul(&kron(&x.d[p][p + 1], &Matrix::identity(x.dims[q])));
            let rhs = mu
                .mat(p, q + 1)
                .mul(&kron(&Matrix::identity(x.dims[p]), &x.d[q][0]));
            if lhs != rhs {
                report.violations.push(MsViolation {
                    family: "hinge",
                    indices: vec![p, q],
                });
            }
        }
    }
    // s^i (x . y) for p + q <= n, p + q >= 1.
    for p in 0..=n {
        for q in 0..=n - p {
            if p + q == 0 {
                continue;
            }
            let m = mu.mat(p, q);
            for i in 0..=p + q - 1 {
                report.checks += 1;
                let lhs = x.s[p + q - 1][i].mul(m);
                let rhs = if p > 0 && i + 1 <= p {
                    mu.mat(p - 1, q)
                        .mul(&kron(&x.s[p - 1][i], &Matrix::identity(x.dims[q])))
                } else {
                    mu.mat(p, q - 1)
                        .mul(&kron(&Matrix::identity(x.dims[p]), &x.s[q - 1][i - p]))
                };
                if lhs != rhs {
                    report.violations.push(MsViolation {
                        family: "codegeneracy",
                        indices: vec![p, q, i],
                    });
                }
            }
        }
    }
    // Associativity on triples with p + q + r <= n.
    for p in 0..=n {
        for q in 0..=n - p {
            for r in 0..=n - p - q {
                report.checks += 1;
                let left = mu.mat(p + q, r).mul(&kron(
                    mu.mat(p, q),
                    &Matrix::identity(x.dims[r]),
                ));
                let right = mu.mat(p, q + r).mul(&kron(
                    &Matrix::identity(x.dims[p]),
                    mu.mat(q, r),
                ));
                if left != right {
                    report.violations.push(MsViolation {
                        family: "associativity",
                        indices: vec![p, q, r],
                    });
                }
            }
        }
    }
    report
}

// -- algebras and bimodules ---------------------------------------------------

/// A finite-dimensional associative unital rational algebra given by
/// structure constants `mul[i][j] = e_i * e_j` expanded on the basis.
#[derive(Clone, Debug)]
pub struct Algebra {
    pub dim: usize,
    pub unit: Vec<BigRational>,
    pub mul: Vec<Vec<Vec<BigRational>>>,
}

impl Algebra {
    pub fn validate(&self) -> Result<(), CosimpError> {
        let d = self.dim;
        if self.unit.len() != d || self.mul.len() != d {
            return Err(CosimpError::BadInput("shape mismatch".into()));
        }
        let prod = |x: &[BigRational], y: &[BigRational]| -> Vec<BigRational> {
            let mut out = vec![BigRational::zero(); d];
            for i in 0..d {
                for j in 0..d {
                    let c = &x[i] * &y[j];
                    if c.is_zero() {
                        continue;
                    }
                    for k in 0..d {
                        out[k] = &out[k] + &c * &self.mul[i][j][k];
                    }
                }
            }
            out
        };
        let basis = |i: usize| -> Vec<BigRational> {
            let mut v = vec![BigRational::zero(); d];
            v[i] = BigRational::one();
            v
        };
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let lhs = prod(&prod(&basis(i), &basis(j)), &basis(k));
                    let rhs = prod(&basis(i), &prod(&basis(j), &basis(k)));
                    if lhs != rhs {
                        return Err(CosimpError::Axiom(format!("associativity at {i},{j},{k}")));
                    }
                }
            }
            if prod(&self.unit, &basis(i)) != basis(i) || prod(&basis(i), &self.unit) != basis(i) {
                return Err(CosimpError::Axiom(format!("unit at {i}")));
            }
        }
        Ok(())
    }

    /// The rationals.
    pub fn rationals() -> Self {
        Algebra {
            dim: 1,
            unit: vec![BigRational::one()],
            mul: vec![vec![vec![BigRational::one()]]],
        }
    }

    /// The dual numbers: basis `1, x` with `x^2 = 0`.
    pub fn dual_numbers() -> Self {
        let z = BigRational::zero;
        let o = BigRational::one;
        Algebra {
            dim: 2,
            unit: vec![o(), z()],
            mul: vec![
                vec![vec![o(), z()], vec![z(), o()]],
                vec![vec![z(), o()], vec![z(), z()]],
            ],
        }
    }

    /// 2x2 matrices, basis `E11, E12, E21, E22`.
    pub fn m2q() -> Self {
        let d = 4usize;
        let mut mul = vec![vec![vec![BigRational::zero(); d]; d]; d];
        // E_{ab} E_{cd} = delta_{bc} E_{ad}; index = 2a + b for a,b in {0,1}.
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for e in 0..2 {
                        if b == c {
                            mul[2 * a + b][2 * c + e][2 * a + e] = BigRational::one();
                        }
                    }
                }
            }
        }
        let mut unit = vec![BigRational::zero(); 4];
        unit[0] = BigRational::one();
        unit[3] = BigRational::one();
        Algebra { dim: 4, unit, mul }
    }

    pub fn from_json(v: &Value) -> Result<Algebra, CosimpError> {
        let dim = v["dim"]
            .as_u64()
            .ok_or_else(|| CosimpError::BadInput("missing dim".into()))? as usize;
        let unit = parse_vector(&v["unit"], dim)?;
        let mul = parse_tensor(&v["mul"], dim)?;
        let a = Algebra { dim, unit, mul };
        a.validate()?;
        Ok(a)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "dim": self.dim,
            "unit": self.unit.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "mul": tensor_triples(&self.mul),
        })
    }
}

/// A bimodule over an algebra, optionally carrying its own associative
/// balanced product (making it a non-unital algebra over the base).
#[derive(Clone, Debug)]
pub struct Bimodule {
    pub dim: usize,
    /// `left[i][b] = a_i . m_b` on the module basis.
    pub left: Vec<Vec<Vec<BigRational>>>,
    /// `right[b][i] = m_b . a_i`.
    pub right: Vec<Vec<Vec<BigRational>>>,
    /// `product[b][c] = m_b . m_c`, if present.
    pub product: Option<Vec<Vec<Vec<BigRational>>>>,
}

impl Bimodule {
    /// The algebra as a bimodule over itself, with its own multiplication.
    pub fn regular(a: &Algebra) -> Self {
        Bimodule {
            dim: a.dim,
            left: a.mul.clone(),
            right: a.mul.clone(),
            product: Some(a.mul.clone()),
        }
    }

    pub fn validate(&self, a: &Algebra) -> Result<(), CosimpError> {
        let da = a.dim;
        let db = self.dim;
        let lact = |i: usize, v: &[BigRational]| -> Vec<BigRational> {
            let mut out = vec![BigRational::zero(); db];
            for (b, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for k in 0..db {
                    out[k] = &out[k] + c * &self.left[i][b][k];
                }
            }
            out
        };
        let ract = |v: &[BigRational], i: usize| -> Vec<BigRational> {
            let mut out = vec![BigRational::zero(); db];
            for (b, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for k in 0..db {
                    out[k] = &out[k] + c * &self.right[b][i][k];
                }
            }
            out
        };
        let bbasis = |b: usize| {
            let mut v = vec![BigRational::zero(); db];
            v[b] = BigRational::one();
            v
        };
        let amul = |i: usize, j: usize| a.mul[i][j].clone();
        // (a_i a_j) m = a_i (a_j m), m (a_i a_j) = (m a_i) a_j,
        // (a_i m) a_j = a_i (m a_j), unit acts as identity.
        for i in 0..da {
            for j in 0..da {
                for b in 0..db {
                    let mut via_prod = vec![BigRational::zero(); db];
                    for (k, c) in amul(i, j).iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (t, v) in lact(k, &bbasis(b)).iter().enumerate() {
                            via_prod[t] = &via_prod[t] + c * v;
                        }
                    }
                    if via_prod != lact(i, &lact(j, &bbasis(b))) {
                        return Err(CosimpError::Axiom(format!("left action {i},{j},{b}")));
                    }
                    let mut via_prod = vec![BigRational::zero(); db];
                    for (k, c) in amul(i, j).iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (t, v) in ract(&bbasis(b), k).iter().enumerate() {
                            via_prod[t] = &via_prod[t] + c * v;
                        }
                    }
                    if via_prod != ract(&ract(&bbasis(b), i), j) {
                        return Err(CosimpError::Axiom(format!("right action {i},{j},{b}")));
                    }
                    if ract(&lact(i, &bbasis(b)), j) != lact(i, &ract(&bbasis(b), j)) {
                        return Err(CosimpError::Axiom(format!("bimodule {i},{j},{b}")));
                    }
                }
            }
        }
        for b in 0..db {
            let mut via_unit = vec![BigRational::zero(); db];
            for (i, c) in a.unit.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (t, v) in lact(i, &bbasis(b)).iter().enumerate() {
                    via_unit[t] = &via_unit[t] + c * v;
                }
            }
            if via_unit != bbasis(b) {
                return Err(CosimpError::Axiom(format!("unit acts on {b}")));
            }
        }
        Ok(())
    }

    pub fn from_json(v: &Value, dim_a: usize) -> Result<Bimodule, CosimpError> {
        let dim = v["dim"]
            .as_u64()
            .ok_or_else(|| CosimpError::BadInput("missing dim".into()))? as usize;
        let left = parse_rect_tensor(&v["left"], dim_a, dim)?;
        let right = parse_rect_tensor(&v["right"], dim, dim_a)?;
        let product = if v["product"].is_null() {
            None
        } else {
            Some(parse_tensor(&v["product"], dim)?)
        };
        Ok(Bimodule {
            dim,
            left,
            right,
            product,
        })
    }
}

fn parse_vector(v: &Value, dim: usize) -> Result<Vec<BigRational>, CosimpError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CosimpError::BadInput("expected array".into()))?;
    if arr.len() != dim {
        return Err(CosimpError::BadInput("vector length".into()));
    }
    arr.iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| CosimpError::BadInput("expected rational string".into()))
                .and_then(|s| {
                    parse_rational(s).map_err(|e| CosimpError::BadInput(e.to_string()))
                })
        })
        .collect()
}

/// Triples `"i j k p/q"` meaning `e_i e_j` has coefficient `p/q` on `e_k`.
fn parse_tensor(v: &Value, dim: usize) -> Result<Vec<Vec<Vec<BigRational>>>, CosimpError> {
    parse_rect_tensor(v, dim, dim)
}

fn parse_rect_tensor(
    v: &Value,
    d1: usize,
    d2: usize,
) -> Result<Vec<Vec<Vec<BigRational>>>, CosimpError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CosimpError::BadInput("expected triple array".into()))?;
    let mut out = vec![vec![vec![BigRational::zero(); d2]; d2]; d1];
    for item in arr {
        let s = item
            .as_str()
            .ok_or_else(|| CosimpError::BadInput("expected \"i j k p/q\"".into()))?;
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(CosimpError::BadInput(format!("bad triple {s:?}")));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| CosimpError::BadInput(format!("bad index in {s:?}")))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| CosimpError::BadInput(format!("bad index in {s:?}")))?;
        let k: usize = parts[2]
            .parse()
            .map_err(|_| CosimpError::BadInput(format!("bad index in {s:?}")))?;
        if i >= d1 || j >= d2 || k >= d2 {
            return Err(CosimpError::BadInput(format!("index range in {s:?}")));
        }
        out[i][j][k] = parse_rational(parts[3]).map_err(|e| CosimpError::BadInput(e.to_string()))?;
    }
    Ok(out)
}

fn tensor_triples(t: &[Vec<Vec<BigRational>>]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, row) in t.iter().enumerate() {
        for (j, col) in row.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    out.push(format!("{i} {j} {k} {v}"));
                }
            }
        }
    }
    out
}

// -- the Hochschild cosimplicial object ---------------------------------------

/// Multi-indices of length `p` over `0..dim`, lexicographic.
fn tuples(dim: usize, p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in tuples(dim, p - 1) {
        for i in 0..dim {
            let mut t = rest.clone();
            t.push(i);
            out.push(t);
        }
    }
    out
}

fn tuple_index(dim: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &x| acc * dim + x)
}

/// Basis index of `Hom(A^{(x) p}, B)`: the functional sending the basis
/// tuple `alpha` to `e_b` and all other tuples to zero.
fn hoch_index(da: usize, db: usize, alpha: &[usize], b: usize) -> usize {
    tuple_index(da, alpha) * db + b
}

/// The Hochschild cosimplicial object `CH^p = Hom(A^{(x) p}, B)` truncated
/// at degree `n`, together with the juxtaposition product (which requires
/// `B` to carry its own product).
pub fn hochschild(
    a: &Algebra,
    b: &Bimodule,
    n: usize,
) -> Result<(TruncatedCosimplicial, MsProduct), CosimpError> {
    a.validate()?;
    b.validate(a)?;
    let da = a.dim;
    let db = b.dim;
    let dims: Vec<usize> = (0..=n).map(|p| da.pow(p as u32) * db).collect();
    let mut d: Vec<Vec<Matrix>> = Vec::new();
    let mut s: Vec<Vec<Matrix>> = Vec::new();
    for p in 0..n {
        let mut dp = Vec::new();
        // d^0: left action on the new first argument.
        let mut m0 = Matrix::zero(dims[p + 1], dims[p]);
        for alpha in tuples(da, p) {
            for bb in 0..db {
                let col = hoch_index(da, db, &alpha, bb);
                for j in 0..da {
                    let mut beta = vec![j];
                    beta.extend_from_slice(&alpha);
                    for (k, c) in b.left[j][bb].iter().enumerate() {
                        if !c.is_zero() {
                            let row = hoch_index(da, db, &beta, k);
                            m0.set(row, col, m0.get(row, col) + c);
                        }
                    }
                }
            }
        }
        dp.push(m0);
        // d^i, 1 <= i <= p: multiply arguments i, i+1.
        for i in 1..=p {
            let mut mi = Matrix::zero(dims[p + 1], dims[p]);
            for beta in tuples(da, p + 1) {
                for bb in 0..db {
                    let row = hoch_index(da, db, &beta, bb);
                    for m in 0..da {
                        let c = &a.mul[beta[i - 1]][beta[i]][m];
                        if c.is_zero() {
                            continue;
                        }
                        let mut alpha = beta.clone();
                        alpha[i - 1] = m;
                        alpha.remove(i);
                        let col = hoch_index(da, db, &alpha, bb);
                        mi.set(row, col, mi.get(row, col) + c);
                    }
                }
            }
            dp.push(mi);
        }
        // d^{p+1}: right action on the new last argument.
        let mut mtop = Matrix::zero(dims[p + 1], dims[p]);
        for alpha in tuples(da, p) {
            for bb in 0..db {
                let col = hoch_index(da, db, &alpha, bb);
                for j in 0..da {
                    let mut beta = alpha.clone();
                    beta.push(j);
                    for (k, c) in b.right[bb][j].iter().enumerate() {
                        if !c.is_zero() {
                            let row = hoch_index(da, db, &beta, k);
                            mtop.set(row, col, mtop.get(row, col) + c);
                        }
                    }
                }
            }
        }
        dp.push(mtop);
        d.push(dp);

        // s^j out of degree p+1: insert the unit after slot j.
        let mut sp = Vec::new();
        for j in 0..=p {
            let mut mj = Matrix::zero(dims[p], dims[p + 1]);
            for beta in tuples(da, p) {
                for bb in 0..db {
                    let row = hoch_index(da, db, &beta, bb);
                    for (i, u) in a.unit.iter().enumerate() {
                        if u.is_zero() {
                            continue;
                        }
                        let mut alpha = beta.clone();
                        alpha.insert(j, i);
                        let col = hoch_index(da, db, &alpha, bb);
                        mj.set(row, col, mj.get(row, col) + u);
                    }
                }
            }
            sp.push(mj);
        }
        s.push(sp);
    }
    let x = TruncatedCosimplicial {
        n,
        dims: dims.clone(),
        d,
        s,
    };

    let product = b
        .product
        .as_ref()
        .ok_or_else(|| CosimpError::BadInput("bimodule carries no product".into()))?;
    let mut mats: Vec<Vec<Matrix>> = Vec::new();
    for p in 0..=n {
        let mut row = Vec::new();
        for q in 0..=n - p {
            let mut m = Matrix::zero(dims[p + q], dims[p] * dims[q]);
            for alpha in tuples(da, p) {
                for b1 in 0..db {
                    let c1 = hoch_index(da, db, &alpha, b1);
                    for gamma in tuples(da, q) {
                        for b2 in 0..db {
                            let c2 = hoch_index(da, db, &gamma, b2);
                            let col = c1 * dims[q] + c2;
                            let mut full = alpha.clone();
                            full.extend_from_slice(&gamma);
                            for (k, c) in product[b1][b2].iter().enumerate() {
                                if !c.is_zero() {
                                    let row_i = hoch_index(da, db, &full, k);
                                    m.set(row_i, col, m.get(row_i, col) + c);
                                }
                            }
                        }
                    }
                }
            }
            row.push(m);
        }
        mats.push(row);
    }
    Ok((x, MsProduct { n, mats }))
}

// -- box product ----------------------------------------------------------------

/// Block offsets of `(X (box) Y)^r` before the quotient.
fn box_blocks(x: &TruncatedCosimplicial, y: &TruncatedCosimplicial, r: usize) -> Vec<(usize, usize, usize)> {
    // (p, q, offset)
    let mut out = Vec::new();
    let mut off = 0;
    for p in 0..=r {
        let q = r - p;
        out.push((p, q, off));
        off += x.dims[p] * y.dims[q];
    }
    out
}

fn box_ambient_dim(x: &TruncatedCosimplicial, y: &TruncatedCosimplicial, r: usize) -> usize {
    (0..=r).map(|p| x.dims[p] * y.dims[r - p]).sum()
}

/// Relation vectors spanning the glue `d^{p+1} x (x) y - x (x) d^0 y` in
/// ambient degree `r`.
pub fn box_relations(
    x: &TruncatedCosimplicial,
    y: &TruncatedCosimplicial,
    r: usize,
) -> Vec<Vec<BigRational>> {
    let dim = box_ambient_dim(x, y, r);
    let blocks = box_blocks(x, y, r);
    let mut rels = Vec::new();
    if r == 0 {
        return rels;
    }
    for p in 0..r {
        let q = r - 1 - p;
        // Source block (p, q) at degree r-1; targets (p+1, q) and (p, q+1).
        let (_, _, off_up) = blocks[p + 1];
        let (_, _, off_flat) = blocks[p];
        for ex in 0..x.dims[p] {
            for ey in 0..y.dims[q] {
                let mut v = vec![BigRational::zero(); dim];
                let dtop = &x.d[p][p + 1];
                for rrow in 0..dtop.rows {
                    let c = dtop.get(rrow, ex);
                    if !c.is_zero() {
                        v[off_up + rrow * y.dims[q] + ey] = c.clone();
                    }
                }
                let d0 = &y.d[q][0];
                for rrow in 0..d0.rows {
                    let c = d0.get(rrow, ey);
                    if !c.is_zero() {
                        let idx = off_flat + ex * y.dims[q + 1] + rrow;
                        v[idx] = &v[idx] - c;
                    }
                }
                rels.push(v);
            }
        }
    }
    rels
}

/// The box product of two truncations of the same degree: degreewise
/// quotients of the block sums by the glue relations, with the case-split
/// cosimplicial operators pushed down.
pub fn box_product(
    x: &TruncatedCosimplicial,
    y: &TruncatedCosimplicial,
) -> Result<TruncatedCosimplicial, CosimpError> {
    if x.n != y.n {
        return Err(CosimpError::BadInput("truncation mismatch".into()));
    }
    let n = x.n;
    let quotients: Vec<Quotient> = (0..=n)
        .map(|r| Quotient::new(box_ambient_dim(x, y, r), &box_relations(x, y, r)))
        .collect();
    let dims: Vec<usize> = quotients.iter().map(|q| q.dim()).collect();

    // Ambient coface: block (p, q) routes left for i <= p, right for i >= p+1.
    let ambient_d = |r: usize, i: usize| -> Matrix {
        let src = box_blocks(x, y, r);
        let tgt = box_blocks(x, y, r + 1);
        let mut m = Matrix::zero(box_ambient_dim(x, y, r + 1), box_ambient_dim(x, y, r));
        for &(p, q, off) in &src {
            if i <= p {
                let dm = &x.d[p][i];
                let (_, _, toff) = tgt[p + 1];
                for ex in 0..x.dims[p] {
                    for ey in 0..y.dims[q] {
                        for rrow in 0..dm.rows {
                            let c = dm.get(rrow, ex);
                            if !c.is_zero() {
                                m.set(
                                    toff + rrow * y.dims[q] + ey,
                                    off + ex * y.dims[q] + ey,
                                    c.clone(),
                                );
                            }
                        }
                    }
                }
            } else {
                let dm = &y.d[q][i - p];
                let (_, _, toff) = tgt[p];
                for ex in 0..x.dims[p] {
                    for ey in 0..y.dims[q] {
                        for rrow in 0..dm.rows {
                            let c = dm.get(rrow, ey);
                            if !c.is_zero() {
                                m.set(
                                    toff + ex * y.dims[q + 1] + rrow,
                                    off + ex * y.dims[q] + ey,
                                    c.clone(),
                                );
                            }
                        }
                    }
                }
            }
        }
        m
    };
    let ambient_s = |r: usize, j: usize| -> Matrix {
        // Out of degree r+1 down to r.
        let src = box_blocks(x, y, r + 1);
        let tgt = box_blocks(x, y, r);
        let mut m = Matrix::zero(box_ambient_dim(x, y, r), box_ambient_dim(x, y, r + 1));
        for &(p, q, off) in &src {
            if p > 0 && j <= p - 1 {
                let sm = &x.s[p - 1][j];
                let (_, _, toff) = tgt[p - 1];
                for ex in 0..x.dims[p] {
                    for ey in 0..y.dims[q] {
                        for rrow in 0..sm.rows {
                            let c = sm.get(rrow, ex);
                            if !c.is_zero() {
                                m.set(
                                    toff + rrow * y.dims[q] + ey,
                                    off + ex * y.dims[q] + ey,
                                    c.clone(),
                                );
                            }
                        }
                    }
                }
            } else if q > 0 {
                let sm = &y.s[q - 1][j - p];
                let (_, _, toff) = tgt[p];
                for ex in 0..x.dims[p] {
                    for ey in 0..y.dims[q] {
                        for rrow in 0..sm.rows {
                            let c = sm.get(rrow, ey);
                            if !c.is_zero() {
                                m.set(
                                    toff + ex * y.dims[q - 1] + rrow,
                                    off + ex * y.dims[q] + ey,
                                    c.clone(),
                                );
                            }
                        }
                    }
                }
            }
        }
        m
    };

    let mut d = Vec::new();
    let mut s = Vec::new();
    for r in 0..n {
        let mut dr = Vec::new();
        for i in 0..=r + 1 {
            let amb = ambient_d(r, i);
            // The operator must send relations to relations.
            for rel in box_relations(x, y, r) {
                let img = amb.apply(&rel);
                let down = quotients[r + 1].projection.apply(&img);
                if down.iter().any(|c| !c.is_zero()) {
                    return Err(CosimpError::Identity(format!(
                        "coface {i} does not preserve glue at degree {r}"
                    )));
                }
            }
            dr.push(quotients[r].induced_map(&quotients[r + 1], &amb));
        }
        d.push(dr);
        let mut sr = Vec::new();
        for j in 0..=r {
            let amb = ambient_s(r, j);
            for rel in box_relations(x, y, r + 1) {
                let img = amb.apply(&rel);
                let down = quotients[r].projection.apply(&img);
                if down.iter().any(|c| !c.is_zero()) {
                    return Err(CosimpError::Identity(format!(
                        "codegeneracy {j} does not preserve glue at degree {r}"
                    )));
                }
            }
            sr.push(quotients[r + 1].induced_map(&quotients[r], &amb));
        }
        s.push(sr);
    }
    Ok(TruncatedCosimplicial { n, dims, d, s })
}

/// Independent rank oracle for the box-product dimension in one degree.
pub fn box_dim_oracle(x: &TruncatedCosimplicial, y: &TruncatedCosimplicial, r: usize) -> usize {
    let rels = box_relations(x, y, r);
    let dim = box_ambient_dim(x, y, r);
    let mut m = Matrix::zero(rels.len(), dim);
    for (row, rel) in rels.iter().enumerate() {
        for (c, v) in rel.iter().enumerate() {
            m.set(row, c, v.clone());
        }
    }
    dim - m.rank()
}

// -- cohomology ---------------------------------------------------------------

/// Ranks of the cohomology of the alternating-sum differential, degrees
/// `0 ..= n-1`. With `normalized` the complex is first restricted to the
/// intersection of the codegeneracy kernels.
pub fn total_cohomology(x: &TruncatedCosimplicial, normalized: bool) -> Vec<usize> {
    let n = x.n;
    // Basis (as columns) of the chosen subcomplex in each degree.
    let sub: Vec<Matrix> = (0..=n)
        .map(|p| {
            if !normalized || p == 0 {
                Matrix::identity(x.dims[p])
            } else {
                // Stack all codegeneracies out of degree p.
                let total_rows: usize = (0..p).map(|_| x.dims[p - 1]).sum();
                let mut stacked = Matrix::zero(total_rows, x.dims[p]);
                for (blk, j) in (0..p).enumerate() {
                    let sm = &x.s[p - 1][j];
                    for r in 0..sm.rows {
                        for c in 0..sm.cols {
                            stacked.set(blk * x.dims[p - 1] + r, c, sm.get(r, c).clone());
                        }
                    }
                }
                let kb = stacked.kernel_basis();
                Matrix::from_columns(x.dims[p], &kb)
            }
        })
        .collect();
    let delta: Vec<Matrix> = (0..n)
        .map(|p| {
            let mut m = Matrix::zero(x.dims[p + 1], x.dims[p]);
            for i in 0..=p + 1 {
                let sign = if i % 2 == 0 {
                    BigRational::one()
                } else {
                    -BigRational::one()
                };
                m = m.add(&x.d[p][i].scale(&sign));
            }
            m.mul(&sub[p])
        })
        .collect();
    let mut out = Vec::new();
    for p in 0..n {
        let dim_p = sub[p].cols;
        let rank_out = delta[p].rank();
        let rank_in = if p == 0 { 0 } else { delta[p - 1].rank() };
        out.push(dim_p - rank_out - rank_in);
    }
    out
}

/// Product of two cochain representatives through `mu`; degree bookkeeping
/// only, the caller picks representatives of classes.
pub fn cup(
    mu: &MsProduct,
    p: usize,
    q: usize,
    x: &[BigRational],
    y: &[BigRational],
) -> Result<Vec<BigRational>, CosimpError> {
    if p + q > mu.n {
        return Err(CosimpError::Degree(p + q, mu.n));
    }
    Ok(mu.apply(p, q, x, y))
}

#[cfg(test)]
mod tests;
