//! Finite groups as multiplication tables, their unitary representations and
//! the gap / weight functions built on the character.

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;

const MATRIX_TOL: f64 = 1e-9;
/// Gaps at or below this are treated as zero.
pub const GAP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("unknown group family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter for {family}: {reason}")]
    InvalidParameter { family: String, reason: String },
    #[error("representation has no gap: min Re(chi(1) - chi(g)) = {0}")]
    NoGap(f64),
    #[error("the trivial group has no threshold")]
    TrivialGroup,
    #[error("table is not a group: {0}")]
    NotAGroup(String),
    #[error("representation check failed: {0}")]
    BadRepresentation(String),
    #[error("function is not constant on conjugacy classes (elements {0} and {1})")]
    NotClassFunction(usize, usize),
}

/// Index of a group element; index 0 is always the identity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Element(pub u16);

impl Element {
    pub const IDENTITY: Element = Element(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_identity(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Builtin group families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupFamily {
    Cyclic(usize),
    Dihedral(usize),
    Symmetric3,
    Quaternion8,
}

impl GroupFamily {
    /// Parses tags such as `cyclic 3`, `dihedral 4`, `symmetric 3`, `quaternion 8`.
    pub fn parse(name: &str, params: &[usize]) -> Result<Self, GroupError> {
        let bad = |reason: &str| GroupError::InvalidParameter {
            family: name.to_string(),
            reason: reason.to_string(),
        };
        match name.to_ascii_lowercase().as_str() {
            "cyclic" | "z" => match params {
                [n] => Ok(GroupFamily::Cyclic(*n)),
                _ => Err(bad("expected one parameter n")),
            },
            "dihedral" | "d" => match params {
                [n] => Ok(GroupFamily::Dihedral(*n)),
                _ => Err(bad("expected one parameter n")),
            },
            "symmetric" | "s" => match params {
                [3] | [] => Ok(GroupFamily::Symmetric3),
                _ => Err(bad("only degree 3 is built in")),
            },
            "quaternion" | "q" => match params {
                [8] | [] => Ok(GroupFamily::Quaternion8),
                _ => Err(bad("only order 8 is built in")),
            },
            other => Err(GroupError::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GroupFamily::Cyclic(n) => format!("Z{n}"),
            GroupFamily::Dihedral(n) => format!("D{n}"),
            GroupFamily::Symmetric3 => "S3".to_string(),
            GroupFamily::Quaternion8 => "Q8".to_string(),
        }
    }
}

/// Multiplication and inverse tables of a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTable {
    name: String,
    order: usize,
    mult: Vec<u16>,
    inv: Vec<u16>,
}

impl GroupTable {
    /// Builds a table from a row-major multiplication table, checking the group axioms.
    pub fn from_mult(name: impl Into<String>, order: usize, mult: Vec<u16>) -> Result<Self, GroupError> {
        if order == 0 || mult.len() != order * order {
            return Err(GroupError::NotAGroup("table shape".into()));
        }
        if mult.iter().any(|&m| m as usize >= order) {
            return Err(GroupError::NotAGroup("entry out of range".into()));
        }
        for g in 0..order {
            if mult[g] as usize != g || mult[g * order] as usize != g {
                return Err(GroupError::NotAGroup("element 0 is not the identity".into()));
            }
        }
        let mut inv = vec![u16::MAX; order];
        for g in 0..order {
            for h in 0..order {
                if mult[g * order + h] == 0 {
                    inv[g] = h as u16;
                    break;
                }
            }
            if inv[g] == u16::MAX {
                return Err(GroupError::NotAGroup(format!("no inverse for {g}")));
            }
        }
        let table = GroupTable { name: name.into(), order, mult, inv };
        table.check_associative()?;
        Ok(table)
    }

    fn check_associative(&self) -> Result<(), GroupError> {
        for a in self.elements() {
            for b in self.elements() {
                let ab = self.mul(a, b);
                for c in self.elements() {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(GroupError::NotAGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        Element(self.mult[a.index() * self.order + b.index()])
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        Element(self.inv[a.index()])
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, g: Element, h: Element) -> Element {
        self.mul(self.mul(self.inv(h), g), h)
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + Clone {
        (0..self.order as u16).map(Element)
    }

    pub fn element(&self, index: usize) -> Element {
        assert!(index < self.order, "element index out of range");
        Element(index as u16)
    }

    pub fn product<I: IntoIterator<Item = Element>>(&self, items: I) -> Element {
        items.into_iter().fold(Element::IDENTITY, |acc, g| self.mul(acc, g))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn center(&self) -> Vec<Element> {
        self.elements()
            .filter(|&a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
            .collect()
    }

    /// Raw row-major multiplication table.
    pub fn mult_table(&self) -> &[u16] {
        &self.mult
    }

    pub fn inv_table(&self) -> &[u16] {
        &self.inv
    }

    /// If the group is cyclic, a generator; element `k` need not equal `gen^k`.
    pub fn cyclic_generator(&self) -> Option<Element> {
        self.elements().find(|&g| self.element_order(g) == self.order)
    }

    pub fn element_order(&self, g: Element) -> usize {
        let mut x = g;
        let mut n = 1;
        while !x.is_identity() {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }
}

/// Conjugacy classes, each sorted, ordered by least member.
pub fn conjugacy_classes(g: &GroupTable) -> Vec<Vec<Element>> {
    let mut class_of = vec![usize::MAX; g.order()];
    let mut classes: Vec<Vec<Element>> = Vec::new();
    for a in g.elements() {
        if class_of[a.index()] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members: Vec<Element> = g.elements().map(|h| g.conjugate(a, h)).collect();
        members.sort();
        members.dedup();
        for m in &members {
            class_of[m.index()] = id;
        }
        classes.push(members);
    }
    classes
}

/// Class index of every element, consistent with [`conjugacy_classes`].
pub fn class_index(g: &GroupTable) -> Vec<usize> {
    let mut out = vec![0; g.order()];
    for (i, class) in conjugacy_classes(g).iter().enumerate() {
        for m in class {
            out[m.index()] = i;
        }
    }
    out
}

type Matrix<F> = Vec<Complex<F>>;

/// A unitary matrix representation with cached character.
#[derive(Clone, Debug)]
pub struct UnitaryRep<F> {
    dim: usize,
    matrices: Vec<Matrix<F>>,
    character: Vec<Complex<F>>,
}

fn mat_mul<F: Real>(a: &[Complex<F>], b: &[Complex<F>], d: usize) -> Matrix<F> {
    let mut out = vec![Complex::new(F::zero(), F::zero()); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] = out[i * d + j] + aik * b[k * d + j];
            }
        }
    }
    out
}

fn max_dist<F: Real>(a: &[Complex<F>], b: &[Complex<F>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).norm().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn identity_matrix<F: Real>(d: usize) -> Matrix<F> {
    let mut m = vec![Complex::new(F::zero(), F::zero()); d * d];
    for i in 0..d {
        m[i * d + i] = Complex::new(F::one(), F::zero());
    }
    m
}

impl<F: Real> UnitaryRep<F> {
    /// Builds a representation from one row-major `dim × dim` matrix per element.
    pub fn new(dim: usize, matrices: Vec<Matrix<F>>) -> Self {
        let character = matrices
            .iter()
            .map(|m| (0..dim).fold(Complex::new(F::zero(), F::zero()), |acc, i| acc + m[i * dim + i]))
            .collect();
        UnitaryRep { dim, matrices, character }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: Element) -> &[Complex<F>] {
        &self.matrices[g.index()]
    }

    #[inline]
    pub fn chi(&self, g: Element) -> Complex<F> {
        self.character[g.index()]
    }

    pub fn character(&self) -> &[Complex<F>] {
        &self.character
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &UnitaryRep<F>) -> UnitaryRep<F> {
        assert_eq!(self.matrices.len(), other.matrices.len());
        let d = self.dim + other.dim;
        let zero = Complex::new(F::zero(), F::zero());
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = vec![zero; d * d];
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m[i * d + j] = a[i * self.dim + j];
                    }
                }
                for i in 0..other.dim {
                    for j in 0..other.dim {
                        m[(self.dim + i) * d + self.dim + j] = b[i * other.dim + j];
                    }
                }
                m
            })
            .collect();
        UnitaryRep::new(d, matrices)
    }

    /// Checks unitarity, the homomorphism property and class-constancy of χ.
    pub fn validate(&self, g: &GroupTable, tol: f64) -> Result<(), GroupError> {
        if self.matrices.len() != g.order() {
            return Err(GroupError::BadRepresentation("one matrix per element required".into()));
        }
        let d = self.dim;
        let id = identity_matrix::<F>(d);
        if max_dist(&self.matrices[0], &id) > tol {
            return Err(GroupError::BadRepresentation("identity not mapped to I".into()));
        }
        for a in g.elements() {
            let m = self.matrix(a);
            let adj: Matrix<F> = (0..d * d).map(|k| m[(k % d) * d + k / d].conj()).collect();
            if max_dist(&mat_mul(m, &adj, d), &id) > tol {
                return Err(GroupError::BadRepresentation(format!("{a} not unitary")));
            }
            for b in g.elements() {
                let prod = mat_mul(m, self.matrix(b), d);
                if max_dist(&prod, self.matrix(g.mul(a, b))) > tol {
                    return Err(GroupError::BadRepresentation(format!(
                        "rho({a})rho({b}) != rho({a}{b})"
                    )));
                }
            }
        }
        ClassFunction::new(self.character.clone()).validate(g, tol)
    }
}

/// A complex-valued function on G, used as the Wilson-loop character χ₀.
#[derive(Clone, Debug)]
pub struct ClassFunction<F> {
    values: Vec<Complex<F>>,
}

impl<F: Real> ClassFunction<F> {
    pub fn new(values: Vec<Complex<F>>) -> Self {
        ClassFunction { values }
    }

    pub fn from_real(values: &[F]) -> Self {
        ClassFunction { values: values.iter().map(|&v| Complex::new(v, F::zero())).collect() }
    }

    /// Indicator of a conjugacy class.
    pub fn indicator(g: &GroupTable, class: &[Element]) -> Self {
        let mut values = vec![Complex::new(F::zero(), F::zero()); g.order()];
        for c in class {
            values[c.index()] = Complex::new(F::one(), F::zero());
        }
        ClassFunction { values }
    }

    #[inline]
    pub fn eval(&self, g: Element) -> Complex<F> {
        self.values[g.index()]
    }

    pub fn validate(&self, g: &GroupTable, tol: f64) -> Result<(), GroupError> {
        if self.values.len() != g.order() {
            return Err(GroupError::BadRepresentation("value count differs from order".into()));
        }
        for a in g.elements() {
            for h in g.elements() {
                let c = g.conjugate(a, h);
                let diff = (self.eval(a) - self.eval(c)).norm().to_f64().unwrap_or(f64::INFINITY);
                if diff > tol {
                    return Err(GroupError::NotClassFunction(a.index(), c.index()));
                }
            }
        }
        Ok(())
    }
}

/// min over g ≠ 1 of Re(χ(1) − χ(g)).
pub fn delta_g<F: Real>(g: &GroupTable, rho: &UnitaryRep<F>) -> Result<F, GroupError> {
    if g.order() < 2 {
        return Err(GroupError::TrivialGroup);
    }
    let one = rho.chi(Element::IDENTITY).re;
    let gap = g
        .elements()
        .skip(1)
        .map(|x| one - rho.chi(x).re)
        .fold(F::infinity(), F::min);
    if gap <= F::lit(GAP_TOL) {
        return Err(GroupError::NoGap(gap.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(gap)
}

/// exp(−β Re(χ(1) − χ(g))).
#[inline]
pub fn phi_beta<F: Real>(rho: &UnitaryRep<F>, beta: F, g: Element) -> F {
    (-beta * (rho.chi(Element::IDENTITY).re - rho.chi(g).re)).exp()
}

/// (114 + 4 ln|G|) / Δ_G.
pub fn beta_threshold<F: Real>(g: &GroupTable, rho: &UnitaryRep<F>) -> Result<F, GroupError> {
    let delta = delta_g(g, rho)?;
    let n = F::from_usize(g.order()).expect("order fits");
    Ok((F::lit(114.0) + F::lit(4.0) * n.ln()) / delta)
}

fn cmat<F: Real>(entries: &[(f64, f64)]) -> Matrix<F> {
    entries.iter().map(|&(re, im)| Complex::new(F::lit(re), F::lit(im))).collect()
}

fn table_from_matrices(name: String, mats: &[Vec<(f64, f64)>], d: usize) -> Result<GroupTable, GroupError> {
    let as_c: Vec<Matrix<f64>> = mats.iter().map(|m| cmat::<f64>(m)).collect();
    let n = mats.len();
    let mut mult = vec![0u16; n * n];
    for a in 0..n {
        for b in 0..n {
            let prod = mat_mul(&as_c[a], &as_c[b], d);
            let hit = (0..n)
                .find(|&c| max_dist(&prod, &as_c[c]) < MATRIX_TOL)
                .ok_or_else(|| GroupError::NotAGroup("matrices not closed".into()))?;
            mult[a * n + b] = hit as u16;
        }
    }
    GroupTable::from_mult(name, n, mult)
}

fn rot(theta: f64) -> Vec<(f64, f64)> {
    let (s, c) = theta.sin_cos();
    vec![(c, 0.0), (-s, 0.0), (s, 0.0), (c, 0.0)]
}

fn matmul_f64(a: &[(f64, f64)], b: &[(f64, f64)], d: usize) -> Vec<(f64, f64)> {
    let ac = cmat::<f64>(a);
    let bc = cmat::<f64>(b);
    mat_mul(&ac, &bc, d).iter().map(|z| (z.re, z.im)).collect()
}

/// Builds a builtin group with its canonical representation.
pub fn builtin_group<F: Real>(family: &GroupFamily) -> Result<(GroupTable, UnitaryRep<F>), GroupError> {
    let name = family.name();
    let (d, mats): (usize, Vec<Vec<(f64, f64)>>) = match *family {
        GroupFamily::Cyclic(n) => {
            if n == 0 || n > u16::MAX as usize {
                return Err(GroupError::InvalidParameter {
                    family: "cyclic".into(),
                    reason: format!("n = {n} must be in 1..=65535"),
                });
            }
            let mult = (0..n * n).map(|k| ((k / n + k % n) % n) as u16).collect();
            let table = GroupTable::from_mult(name, n, mult)?;
            let mats = (0..n)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    vec![Complex::new(F::lit(t.cos()), F::lit(t.sin()))]
                })
                .collect();
            return Ok((table, UnitaryRep::new(1, mats)));
        }
        GroupFamily::Dihedral(n) => {
            if !(2..=1000).contains(&n) {
                return Err(GroupError::InvalidParameter {
                    family: "dihedral".into(),
                    reason: format!("n = {n} must be in 2..=1000"),
                });
            }
            let s = vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)];
            let mats = (0..2 * n)
                .map(|idx| {
                    let r = rot(2.0 * std::f64::consts::PI * (idx % n) as f64 / n as f64);
                    if idx < n {
                        r
                    } else {
                        matmul_f64(&r, &s, 2)
                    }
                })
                .collect();
            (2, mats)
        }
        GroupFamily::Symmetric3 => {
            let perms: [[usize; 3]; 6] =
                [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let u = [
                [1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()],
                [-1.0 / 2f64.sqrt(), 1.0 / 6f64.sqrt()],
                [0.0, -2.0 / 6f64.sqrt()],
            ];
            let mats = perms
                .iter()
                .map(|p| {
                    // ρ(π) = Uᵀ P_π U with P_π e_i = e_{π(i)}
                    let mut m = vec![(0.0, 0.0); 4];
                    for a in 0..2 {
                        for b in 0..2 {
                            let v: f64 = (0..3).map(|i| u[p[i]][a] * u[i][b]).sum();
                            m[a * 2 + b] = (v, 0.0);
                        }
                    }
                    m
                })
                .collect();
            (2, mats)
        }
        GroupFamily::Quaternion8 => {
            let one = vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)];
            let i = vec![(0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, -1.0)];
            let j = vec![(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0)];
            let k = matmul_f64(&i, &j, 2);
            let neg = |m: &Vec<(f64, f64)>| m.iter().map(|&(a, b)| (-a, -b)).collect::<Vec<_>>();
            let mats = vec![one.clone(), neg(&one), i.clone(), neg(&i), j.clone(), neg(&j), k.clone(), neg(&k)];
            (2, mats)
        }
    };
    let table = table_from_matrices(name, &mats, d)?;
    let rep = UnitaryRep::new(d, mats.iter().map(|m| cmat::<F>(m)).collect());
    Ok((table, rep))
}

/// A group together with a representation whose gap Δ_G is strictly positive.
#[derive(Clone, Debug)]
pub struct GaugeGroup<F> {
    pub table: GroupTable,
    pub rep: UnitaryRep<F>,
    delta: F,
    class_of: Vec<usize>,
}

impl<F: Real> GaugeGroup<F> {
    pub fn new(table: GroupTable, rep: UnitaryRep<F>) -> Result<Self, GroupError> {
        rep.validate(&table, 1e-6)?;
        let delta = delta_g(&table, &rep)?;
        let class_of = class_index(&table);
        Ok(GaugeGroup { table, rep, delta, class_of })
    }

    pub fn builtin(family: &GroupFamily) -> Result<Self, GroupError> {
        let (table, rep) = builtin_group(family)?;
        Self::new(table, rep)
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    #[inline]
    pub fn class_of(&self, g: Element) -> usize {
        self.class_of[g.index()]
    }

    #[inline]
    pub fn phi(&self, beta: F, g: Element) -> F {
        phi_beta(&self.rep, beta, g)
    }

    /// Re(χ(1) − χ(g)).
    #[inline]
    pub fn excitation(&self, g: Element) -> F {
        self.rep.chi(Element::IDENTITY).re - self.rep.chi(g).re
    }

    pub fn beta_threshold(&self) -> Result<F, GroupError> {
        beta_threshold(&self.table, &self.rep)
    }
}
