//! Symmetric Clifford systems `P₀, …, P_m` on `R^{2l}` with exact integer entries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{pre, Error, Result};
use crate::numkernel::Matrix;
use crate::report::{Verdict, VerificationReport};

pub type IntMatrix = Matrix<i64>;

/// Dimension of the irreducible module of the Clifford algebra with `m − 1`
/// generators: 1, 2, 4, 4, 8, 8, 8, 8 for `m = 1..8`, then ×16 every eight.
pub fn delta(m: usize) -> Result<usize> {
    const TABLE: [usize; 8] = [1, 2, 4, 4, 8, 8, 8, 8];
    pre(m >= 1, || "delta(m) needs m >= 1".into())?;
    let mut m = m;
    let mut factor = 1;
    while m > 8 {
        m -= 8;
        factor *= 16;
    }
    Ok(factor * TABLE[m - 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Unique,
    Definite,
    Indefinite,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Unique => "unique",
            Variant::Definite => "definite",
            Variant::Indefinite => "indefinite",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unique" => Ok(Variant::Unique),
            "definite" | "def" => Ok(Variant::Definite),
            "indefinite" | "indef" => Ok(Variant::Indefinite),
            other => Err(Error::Precondition(format!("unknown variant {other:?}"))),
        }
    }
}

/// Cayley–Dickson product on `R^{2^k}`: `(a,b)(c,d) = (ac − d̄b, da + bc̄)`.
fn cd_mul(x: &[i64], y: &[i64]) -> Vec<i64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[i64]| -> Vec<i64> {
        v.iter().enumerate().map(|(i, &t)| if i == 0 { t } else { -t }).collect()
    };
    let ac = cd_mul(a, c);
    let dbar_b = cd_mul(&conj(d), b);
    let da = cd_mul(d, a);
    let b_cbar = cd_mul(b, &conj(c));
    let mut out: Vec<i64> = ac.iter().zip(&dbar_b).map(|(p, q)| p - q).collect();
    out.extend(da.iter().zip(&b_cbar).map(|(p, q)| p + q));
    out
}

/// Left multiplication by the imaginary unit `e_i` in the Cayley–Dickson
/// algebra of dimension `dim`.
fn left_mult(dim: usize, i: usize) -> IntMatrix {
    let mut e = vec![0; dim];
    e[i] = 1;
    let cols: Vec<Vec<i64>> = (0..dim)
        .map(|j| {
            let mut f = vec![0; dim];
            f[j] = 1;
            cd_mul(&e, &f)
        })
        .collect();
    Matrix::from_cols(dim, &cols)
}

fn irreducible_generators(n: usize) -> Vec<IntMatrix> {
    match n {
        0 => Vec::new(),
        1 => vec![Matrix::from_rows(&[vec![0, -1], vec![1, 0]])],
        2 | 3 => (1..=n).map(|i| left_mult(4, i)).collect(),
        4..=7 => (1..=n).map(|i| left_mult(8, i)).collect(),
        _ => {
            let sz = Matrix::diag(&[1, -1]);
            let eps = Matrix::from_rows(&[vec![0, -1], vec![1, 0]]);
            let mut f: Vec<IntMatrix> = (1..=7).map(|i| left_mult(8, i).kron(&sz)).collect();
            f.push(Matrix::identity(8).kron(&eps));
            let omega = f.iter().skip(1).fold(f[0].clone(), |acc, g| acc.matmul(g));
            let rest = irreducible_generators(n - 8);
            let d_rest = rest.first().map_or(1, Matrix::rows);
            let id_rest = Matrix::identity(d_rest);
            let mut out: Vec<IntMatrix> = f.iter().map(|g| g.kron(&id_rest)).collect();
            out.extend(rest.iter().map(|e| omega.kron(e)));
            out
        }
    }
}

/// `n` skew, pairwise anticommuting integer matrices squaring to `−I_d`.
pub fn build_generators(n: usize, d: usize) -> Result<Vec<IntMatrix>> {
    let base = delta(n + 1)?;
    pre(d > 0 && d.is_multiple_of(base), || format!("dimension {d} is not a multiple of delta({}) = {base}", n + 1))?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let reps = Matrix::identity(d / base);
    Ok(irreducible_generators(n).iter().map(|e| reps.kron(e)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliffordSystem {
    pub m: usize,
    pub l: usize,
    pub variant: Variant,
    #[serde(rename = "matrices", with = "int_matrices")]
    p: Vec<IntMatrix>,
}

impl CliffordSystem {
    /// No identities are checked; use [`verify_system`].
    pub fn from_matrices_unchecked(m: usize, l: usize, variant: Variant, p: Vec<IntMatrix>) -> Self {
        Self { m, l, variant, p }
    }

    pub fn p(&self) -> &[IntMatrix] {
        &self.p
    }

    pub fn p_mut(&mut self) -> &mut [IntMatrix] {
        &mut self.p
    }

    pub fn dim(&self) -> usize {
        2 * self.l
    }

    /// Multiplicities `(m₁, m₂) = (m, l − m − 1)`.
    pub fn multiplicities(&self) -> (usize, usize) {
        (self.m, (self.l).saturating_sub(self.m + 1))
    }

    /// `P₀P₁⋯P_m`.
    pub fn product(&self) -> IntMatrix {
        self.p.iter().skip(1).fold(self.p[0].clone(), |acc, q| acc.matmul(q))
    }

    /// Floating-point copies of the `P_i`.
    pub fn real_matrices(&self) -> Vec<Matrix<f64>> {
        self.p.iter().map(Matrix::from_int).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("system serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Precondition(format!("bad system JSON: {e}")))
    }
}

mod int_matrices {
    use super::IntMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[IntMatrix], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Vec<i64>>> =
            ms.iter().map(|m| (0..m.rows()).map(|i| m.row(i).to_vec()).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<IntMatrix>, D::Error> {
        let rows = Vec::<Vec<Vec<i64>>>::deserialize(d)?;
        rows.iter()
            .map(|m| {
                let c = m.first().map_or(0, Vec::len);
                if m.iter().any(|r| r.len() != c) {
                    return Err(serde::de::Error::custom("ragged matrix"));
                }
                Ok(IntMatrix::from_rows(m))
            })
            .collect()
    }
}

/// Block form `P₀ = diag(I, −I)`, `P₁ = [[0, I], [I, 0]]`,
/// `P_{i+1} = [[0, E_i], [−E_i, 0]]`.
pub fn build_system(m: usize, l: usize, variant: Variant) -> Result<CliffordSystem> {
    let dm = delta(m)?;
    pre(l.is_multiple_of(dm), || format!("l = {l} is not a multiple of delta({m}) = {dm}"))?;
    let needs_tag = m.is_multiple_of(4);
    match (needs_tag, variant) {
        (false, Variant::Unique) | (true, Variant::Definite) | (true, Variant::Indefinite) => {}
        (false, v) => return Err(Error::Precondition(format!("variant {v} needs m ≡ 0 (mod 4), got m = {m}"))),
        (true, Variant::Unique) => {
            return Err(Error::Precondition(format!("m = {m} needs variant definite or indefinite")))
        }
    }
    pre(variant != Variant::Indefinite || l >= 2 * dm, || {
        format!("no indefinite system at l = {l}; needs l >= 2·delta({m}) = {}", 2 * dm)
    })?;

    let mut gens = build_generators(m - 1, l)?;
    if variant == Variant::Indefinite {
        for i in 0..dm {
            for j in 0..dm {
                gens[0][(i, j)] = -gens[0][(i, j)];
            }
        }
    }
    let id = Matrix::identity(l);
    let zero = Matrix::zeros(l, l);
    let mut p = vec![
        Matrix::block(&[vec![id.clone(), zero.clone()], vec![zero.clone(), -&id]]),
        Matrix::block(&[vec![zero.clone(), id.clone()], vec![id, zero.clone()]]),
    ];
    for e in &gens {
        p.push(Matrix::block(&[vec![zero.clone(), e.clone()], vec![-e, zero.clone()]]));
    }
    Ok(CliffordSystem { m, l, variant, p })
}

/// Classification of `P₀⋯P_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductClass {
    PlusIdentity,
    MinusIdentity,
    Other,
}

pub fn classify_product(cs: &CliffordSystem) -> ProductClass {
    let prod = cs.product();
    let id = Matrix::identity(cs.dim());
    if prod == id {
        ProductClass::PlusIdentity
    } else if prod == -&id {
        ProductClass::MinusIdentity
    } else {
        ProductClass::Other
    }
}

/// Exact checks of symmetry, `P_iP_j + P_jP_i = 2δ_ij I` and the
/// definite/indefinite classification. Failures are reported, not raised.
pub fn verify_system(cs: &CliffordSystem) -> VerificationReport {
    let mut r = VerificationReport::new("clifford.verify")
        .param("m", cs.m)
        .param("l", cs.l)
        .param("variant", cs.variant.to_string());
    let n = cs.dim();
    let shapes_ok = cs.p.len() == cs.m + 1 && cs.p.iter().all(|q| q.shape() == (n, n));
    if !shapes_ok {
        r.verdict = Verdict::Fail;
        r.note(format!("expected {} matrices of size {n}", cs.m + 1));
        return r;
    }
    let id2 = Matrix::identity(n).scale(2);
    let mut anti = 0i64;
    for i in 0..cs.p.len() {
        for j in i..cs.p.len() {
            let a = cs.p[i].anticommutator(&cs.p[j]);
            let dev = if i == j { &a - &id2 } else { a };
            anti = anti.max(dev.max_abs());
        }
    }
    let sym = cs.p.iter().map(|q| (q - &q.transpose()).max_abs()).max().unwrap_or(0);
    let entries_ok = cs.p.iter().all(|q| q.as_slice().iter().all(|x| x.abs() <= 1));
    let class = classify_product(cs);
    let class_ok = match cs.variant {
        Variant::Unique => true,
        Variant::Definite => class != ProductClass::Other,
        Variant::Indefinite => class == ProductClass::Other,
    };
    let delta_ok = delta(cs.m).map(|d| cs.l.is_multiple_of(d)).unwrap_or(false);
    r.residual("anticommutator_max", anti as f64);
    r.residual("asymmetry_max", sym as f64);
    r.set_param(
        "product",
        match class {
            ProductClass::PlusIdentity => "+I",
            ProductClass::MinusIdentity => "-I",
            ProductClass::Other => "not ±I",
        },
    );
    r.set_param(
        "classification",
        if !cs.m.is_multiple_of(4) {
            "unique"
        } else if class == ProductClass::Other {
            "indefinite"
        } else {
            "definite"
        },
    );
    if !entries_ok {
        r.note("entries outside {-1, 0, 1}");
    }
    if !delta_ok {
        r.note("l is not a multiple of delta(m)");
    }
    if !class_ok {
        r.note("product classification disagrees with the requested variant");
    }
    r.verdict = Verdict::from_bool(anti == 0 && sym == 0 && entries_ok && class_ok && delta_ok);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_table() {
        assert_eq!(delta(1).unwrap(), 1);
        assert_eq!(delta(4).unwrap(), 4);
        assert_eq!(delta(8).unwrap(), 8);
        assert_eq!(delta(9).unwrap(), 16);
        assert_eq!(delta(17).unwrap(), 256);
        assert!(delta(0).is_err());
    }

    fn check_generators(gens: &[IntMatrix]) {
        let d = gens[0].rows();
        let minus = -&Matrix::identity(d);
        for (i, a) in gens.iter().enumerate() {
            assert_eq!(a.transpose(), -a, "skew");
            assert_eq!(a.matmul(a), minus, "square");
            for b in &gens[i + 1..] {
                assert!(a.anticommutator(b).is_zero(), "anticommute");
            }
        }
    }

    #[test]
    fn generators_up_to_eleven() {
        assert!(build_generators(0, 3).unwrap().is_empty());
        for n in 1..=11 {
            let d = delta(n + 1).unwrap();
            let g = build_generators(n, d).unwrap();
            assert_eq!(g.len(), n);
            check_generators(&g);
        }
    }

    #[test]
    fn quaternion_generators() {
        let g = build_generators(3, 4).unwrap();
        check_generators(&g);
        assert_eq!(g[0].matmul(&g[1]), g[2]);
    }

    #[test]
    fn incompatible_dimension_is_rejected() {
        assert!(build_generators(3, 6).is_err());
    }

    #[test]
    fn minimal_m1_system() {
        let cs = build_system(1, 2, Variant::Unique).unwrap();
        assert_eq!(cs.p()[0], Matrix::diag(&[1, 1, -1, -1]));
        assert_eq!(verify_system(&cs).verdict, Verdict::Pass);
    }

    #[test]
    fn definite_and_indefinite_m4() {
        let d = build_system(4, 8, Variant::Definite).unwrap();
        assert_ne!(classify_product(&d), ProductClass::Other);
        let i = build_system(4, 8, Variant::Indefinite).unwrap();
        assert_eq!(classify_product(&i), ProductClass::Other);
        let r = verify_system(&i);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.parameters["classification"], "indefinite".into());
        assert!(build_system(4, 4, Variant::Indefinite).is_err());
        assert!(build_system(4, 4, Variant::Unique).is_err());
        assert!(build_system(3, 4, Variant::Definite).is_err());
    }

    #[test]
    fn definite_m8_uses_octonions() {
        let d = build_system(8, 8, Variant::Definite).unwrap();
        assert_eq!(verify_system(&d).verdict, Verdict::Pass);
    }

    #[test]
    fn corrupted_entry_is_flagged() {
        let mut cs = build_system(2, 4, Variant::Unique).unwrap();
        cs.p_mut()[2][(0, 5)] = 0;
        let r = verify_system(&cs);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.get("anticommutator_max").unwrap() > 0.0);
    }

    #[test]
    fn json_round_trip() {
        let cs = build_system(4, 8, Variant::Indefinite).unwrap();
        let back = CliffordSystem::from_json(&cs.to_json()).unwrap();
        assert_eq!(back, cs);
        assert!(cs.to_json().starts_with("{\"m\":4,\"l\":8,\"variant\":\"indefinite\",\"matrices\""));
    }
}
