//! Lifted product codes over `F2[x]/(x^L − 1)`.
//!
//! For base matrices `A` (mA×nA) and `B` (mB×nB):
//!
//! ```text
//! H_X = [ A ⊗ I_mB | I_mA ⊗ B  ]
//! H_Z = [ I_nA ⊗ B* | A* ⊗ I_nB ]
//! ```
//!
//! where `*` is the conjugate transpose (`x^e → x^−e`), and every ring entry
//! is lifted to an `L×L` circulant.

use std::fmt;

use super::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Element of `F2[x]/(x^L − 1)` as a sorted set of exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial(Vec<usize>);

impl Polynomial {
    /// Reduces exponents mod `lift`; repeated monomials cancel.
    pub fn new(exponents: &[usize], lift: usize) -> Self {
        let mut v: Vec<usize> = Vec::new();
        for &e in exponents {
            let e = e % lift;
            match v.iter().position(|&x| x == e) {
                Some(i) => {
                    v.remove(i);
                }
                None => v.push(e),
            }
        }
        v.sort_unstable();
        Self(v)
    }

    pub fn exponents(&self) -> &[usize] {
        &self.0
    }

    fn conjugate(&self, lift: usize) -> Self {
        Self::new(&self.0.iter().map(|&e| (lift - e) % lift).collect::<Vec<_>>(), lift)
    }
}

type RingMatrix = Vec<Vec<Polynomial>>;

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedProductSpec {
    pub base_a: RingMatrix,
    pub base_b: RingMatrix,
    pub lift_size: usize,
}

fn dims(m: &RingMatrix) -> (usize, usize) {
    (m.len(), m.first().map_or(0, Vec::len))
}

fn identity(n: usize) -> RingMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| Polynomial(if i == j { vec![0] } else { vec![] })).collect())
        .collect()
}

fn kron(a: &RingMatrix, b: &RingMatrix, lift: usize) -> RingMatrix {
    let (ra, ca) = dims(a);
    let (rb, cb) = dims(b);
    let mut out = vec![vec![Polynomial::default(); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    let prod: Vec<usize> = a[i][j]
                        .0
                        .iter()
                        .flat_map(|&x| b[k][l].0.iter().map(move |&y| x + y))
                        .collect();
                    out[i * rb + k][j * cb + l] = Polynomial::new(&prod, lift);
                }
            }
        }
    }
    out
}

fn conjugate_transpose(a: &RingMatrix, lift: usize) -> RingMatrix {
    let (r, c) = dims(a);
    (0..c).map(|j| (0..r).map(|i| a[i][j].conjugate(lift)).collect()).collect()
}

fn lift_matrix(a: &RingMatrix, lift: usize) -> BitMatrix {
    let (r, c) = dims(a);
    let mut m = BitMatrix::zeros(r * lift, c * lift);
    for i in 0..r {
        for j in 0..c {
            for &e in a[i][j].exponents() {
                // x^e maps basis vector t to t + e
                for t in 0..lift {
                    m.set(i * lift + (t + e) % lift, j * lift + t, true);
                }
            }
        }
    }
    m
}

/// Builds the lifted product code of `spec`.
pub fn lifted_product_code(spec: &LiftedProductSpec) -> Result<StabilizerCode> {
    let l = spec.lift_size;
    if l == 0 {
        return Err(Error::InvalidCode("lift size must be positive".into()));
    }
    for m in [&spec.base_a, &spec.base_b] {
        let (_, c) = dims(m);
        if m.is_empty() || c == 0 || m.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidCode("base matrices must be non-empty and rectangular".into()));
        }
    }
    let a = &spec.base_a;
    let b = &spec.base_b;
    let (ma, na) = dims(a);
    let (mb, nb) = dims(b);
    let h_x = lift_matrix(&kron(a, &identity(mb), l), l).hstack(&lift_matrix(&kron(&identity(ma), b, l), l));
    let h_z = lift_matrix(&kron(&identity(na), &conjugate_transpose(b, l), l), l)
        .hstack(&lift_matrix(&kron(&conjugate_transpose(a, l), &identity(nb), l), l));
    let name = format!("lp-{}x{}-{}x{}-L{}", ma, na, mb, nb, l);
    StabilizerCode::from_checks(name, h_x, h_z)
}

/// The built-in toy instance: `A = B = 1 + x` with `L = 4`, an [[8,2,2]]
/// member of the toric family.
pub fn toy_lifted_product() -> LiftedProductSpec {
    let p = Polynomial::new(&[0, 1], 4);
    LiftedProductSpec {
        base_a: vec![vec![p.clone()]],
        base_b: vec![vec![p]],
        lift_size: 4,
    }
}

impl LiftedProductSpec {
    /// Parses one or two base-matrix blocks. Each block is a header
    /// `L=<int> rows=<r> cols=<c>` followed by `i j : e1,e2,...` entries.
    /// With a single block, `B = A`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks: Vec<(usize, RingMatrix)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: lineno, msg };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with("L=") {
                let mut l = None;
                let mut r = None;
                let mut c = None;
                for tok in line.split_whitespace() {
                    let (k, v) = tok.split_once('=').ok_or_else(|| err(format!("bad header token `{tok}`")))?;
                    let v: usize = v.parse().map_err(|_| err(format!("bad number in `{tok}`")))?;
                    match k {
                        "L" => l = Some(v),
                        "rows" => r = Some(v),
                        "cols" => c = Some(v),
                        _ => return Err(err(format!("unknown header key `{k}`"))),
                    }
                }
                let (Some(l), Some(r), Some(c)) = (l, r, c) else {
                    return Err(err("header needs L, rows and cols".into()));
                };
                if l == 0 {
                    return Err(err("L must be positive".into()));
                }
                blocks.push((l, vec![vec![Polynomial::default(); c]; r]));
                continue;
            }
            let (l, m) = blocks.last_mut().ok_or_else(|| err("entry before header".into()))?;
            let (pos, exps) = line.split_once(':').ok_or_else(|| err("expected `i j : e1,e2`".into()))?;
            let ij: Vec<usize> = pos
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(format!("bad index `{t}`"))))
                .collect::<Result<_>>()?;
            let [i, j] = ij[..] else {
                return Err(err("expected two indices".into()));
            };
            if i >= m.len() || j >= m[0].len() {
                return Err(err(format!("entry ({i},{j}) outside base matrix")));
            }
            let e: Vec<usize> = exps
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| err(format!("bad exponent `{t}`"))))
                .collect::<Result<_>>()?;
            m[i][j] = Polynomial::new(&e, *l);
        }
        match blocks.len() {
            1 => {
                let (l, a) = blocks.pop().unwrap();
                Ok(Self {
                    base_b: a.clone(),
                    base_a: a,
                    lift_size: l,
                })
            }
            2 => {
                let (lb, b) = blocks.pop().unwrap();
                let (la, a) = blocks.pop().unwrap();
                if la != lb {
                    return Err(Error::InvalidCode("base matrices use different lift sizes".into()));
                }
                Ok(Self {
                    base_a: a,
                    base_b: b,
                    lift_size: la,
                })
            }
            n => Err(Error::InvalidCode(format!("expected 1 or 2 base matrices, found {n}"))),
        }
    }
}

impl fmt::Display for LiftedProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in [&self.base_a, &self.base_b] {
            let (r, c) = dims(m);
            writeln!(f, "L={} rows={} cols={}", self.lift_size, r, c)?;
            for (i, row) in m.iter().enumerate() {
                for (j, p) in row.iter().enumerate() {
                    if !p.0.is_empty() {
                        let e: Vec<String> = p.0.iter().map(|e| e.to_string()).collect();
                        writeln!(f, "{i} {j} : {}", e.join(","))?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_is_8_2_2() {
        let code = lifted_product_code(&toy_lifted_product()).unwrap();
        assert_eq!((code.n, code.k), (8, 2));
        assert_eq!(code.distance(), Some(2));
        assert_eq!(code.logical_x.mul(&code.logical_z.transpose()), BitMatrix::identity(2));
    }

    #[test]
    fn smallest_lift_of_one_plus_x_is_4_2() {
        let p = Polynomial::new(&[0, 1], 2);
        let spec = LiftedProductSpec {
            base_a: vec![vec![p.clone()]],
            base_b: vec![vec![p]],
            lift_size: 2,
        };
        let code = lifted_product_code(&spec).unwrap();
        assert_eq!((code.n, code.k), (4, 2));
    }

    #[test]
    fn random_bases_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut rand_m = || -> RingMatrix {
                (0..2)
                    .map(|_| {
                        (0..2)
                            .map(|_| {
                                let e: Vec<usize> = (0..5).filter(|_| rng.gen_bool(0.4)).collect();
                                Polynomial::new(&e, 5)
                            })
                            .collect()
                    })
                    .collect()
            };
            let spec = LiftedProductSpec {
                base_a: rand_m(),
                base_b: rand_m(),
                lift_size: 5,
            };
            let l = spec.lift_size;
            let a = &spec.base_a;
            let b = &spec.base_b;
            let h_x = lift_matrix(&kron(a, &identity(2), l), l).hstack(&lift_matrix(&kron(&identity(2), b, l), l));
            let h_z = lift_matrix(&kron(&identity(2), &conjugate_transpose(b, l), l), l)
                .hstack(&lift_matrix(&kron(&conjugate_transpose(a, l), &identity(2), l), l));
            assert!(h_x.mul(&h_z.transpose()).is_zero());
            let code = lifted_product_code(&spec).unwrap();
            assert_eq!(code.n, 40);
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let spec = toy_lifted_product();
        assert_eq!(LiftedProductSpec::parse(&spec.to_string()).unwrap(), spec);
        assert!(LiftedProductSpec::parse("0 0 : 1\n").is_err());
        assert!(LiftedProductSpec::parse("L=3 rows=1 cols=1\n1 0 : 1\n").is_err());
        assert!(LiftedProductSpec::parse("L=3 rows=1 cols=1\n0 0 : x\n").is_err());
    }

    #[test]
    fn exponents_reduce_mod_lift() {
        assert_eq!(Polynomial::new(&[5, 1, 9], 4).exponents(), &[1]);
        assert!(Polynomial::new(&[5, 1], 4).exponents().is_empty());
        assert_eq!(Polynomial::new(&[5, 2], 4).exponents(), &[1, 2]);
    }
}
