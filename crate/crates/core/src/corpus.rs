//! Fixture generators: the matrix-unit example, group and groupoid operators,
//! and seeded unitary conjugations.

use std::collections::{HashMap, HashSet};

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::axioms::{check_mpi_axioms, two_leg_h_dim};
use crate::error::{Error, Result};
use crate::tensor::{kron, LegSpec, Operator, TensorSpace};
use crate::tol::Tolerances;
use crate::{CMat, C64};

/// A finite groupoid with arrows indexed `0..arrows.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidSpec {
    units: Vec<String>,
    arrow_ids: Vec<String>,
    source: Vec<usize>,
    target: Vec<usize>,
    /// `compose[g][h] = Some(gh)` iff `source(g) = target(h)`.
    compose: Vec<Vec<Option<usize>>>,
    inverse: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowDecl {
    pub id: String,
    pub source: String,
    pub target: String,
}

impl GroupoidSpec {
    /// Validates source/target consistency, totality of composition on
    /// composable pairs, associativity, identities and inverses.
    pub fn new(units: Vec<String>, arrows: Vec<ArrowDecl>, composition: Vec<(String, String, String)>) -> Result<Self> {
        let bad = |m: String| Error::InvalidGroupoid(m);
        if units.is_empty() {
            return Err(bad("no units".into()));
        }
        let unit_ix: HashMap<&str, usize> = units.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        if unit_ix.len() != units.len() {
            return Err(bad("duplicate unit id".into()));
        }
        let arrow_ix: HashMap<&str, usize> = arrows.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
        if arrow_ix.len() != arrows.len() {
            return Err(bad("duplicate arrow id".into()));
        }
        let lookup_unit = |u: &str| unit_ix.get(u).copied().ok_or_else(|| bad(format!("unknown unit {u}")));
        let lookup_arrow = |a: &str| {
            arrow_ix
                .get(a)
                .copied()
                .ok_or_else(|| bad(format!("unknown arrow {a}")))
        };
        let source: Vec<usize> = arrows.iter().map(|a| lookup_unit(&a.source)).collect::<Result<_>>()?;
        let target: Vec<usize> = arrows.iter().map(|a| lookup_unit(&a.target)).collect::<Result<_>>()?;
        let m = arrows.len();
        let mut compose = vec![vec![None; m]; m];
        for (g, h, gh) in &composition {
            let (g, h, gh) = (lookup_arrow(g)?, lookup_arrow(h)?, lookup_arrow(gh)?);
            if source[g] != target[h] {
                return Err(bad(format!(
                    "{} ∘ {} declared but source and target differ",
                    arrows[g].id, arrows[h].id
                )));
            }
            if compose[g][h].is_some_and(|x| x != gh) {
                return Err(bad(format!("{} ∘ {} declared twice", arrows[g].id, arrows[h].id)));
            }
            if source[gh] != source[h] || target[gh] != target[g] {
                return Err(bad(format!(
                    "{} ∘ {} = {} has the wrong endpoints",
                    arrows[g].id, arrows[h].id, arrows[gh].id
                )));
            }
            compose[g][h] = Some(gh);
        }
        for g in 0..m {
            for h in 0..m {
                if source[g] == target[h] && compose[g][h].is_none() {
                    return Err(bad(format!("{} ∘ {} is missing", arrows[g].id, arrows[h].id)));
                }
            }
        }
        for f in 0..m {
            for g in 0..m {
                for h in 0..m {
                    if let (Some(fg), Some(gh)) = (compose[f][g], compose[g][h]) {
                        if compose[fg][h] != compose[f][gh] {
                            return Err(bad("composition is not associative".into()));
                        }
                    }
                }
            }
        }
        let mut identity = vec![None; units.len()];
        for e in 0..m {
            let u = source[e];
            if target[e] != u {
                continue;
            }
            let left = (0..m).filter(|&g| target[g] == u).all(|g| compose[e][g] == Some(g));
            let right = (0..m).filter(|&g| source[g] == u).all(|g| compose[g][e] == Some(g));
            if left && right {
                identity[u] = Some(e);
            }
        }
        let identity: Vec<usize> = identity
            .into_iter()
            .enumerate()
            .map(|(u, e)| e.ok_or_else(|| bad(format!("unit {} has no identity arrow", units[u]))))
            .collect::<Result<_>>()?;
        let inverse: Vec<usize> = (0..m)
            .map(|g| {
                (0..m)
                    .find(|&h| compose[g][h] == Some(identity[target[g]]) && compose[h][g] == Some(identity[source[g]]))
                    .ok_or_else(|| bad(format!("arrow {} has no inverse", arrows[g].id)))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            units,
            arrow_ids: arrows.into_iter().map(|a| a.id).collect(),
            source,
            target,
            compose,
            inverse,
        })
    }

    /// One-unit groupoid from a Cayley table `table[g][h] = gh`.
    pub fn from_group_table(table: &[Vec<usize>]) -> Result<Self> {
        validate_group_table(table)?;
        let n = table.len();
        let arrows = (0..n)
            .map(|g| ArrowDecl {
                id: format!("g{g}"),
                source: "e".into(),
                target: "e".into(),
            })
            .collect();
        let mut comp = Vec::with_capacity(n * n);
        for (g, row) in table.iter().enumerate() {
            for (h, &gh) in row.iter().enumerate() {
                comp.push((format!("g{g}"), format!("g{h}"), format!("g{gh}")));
            }
        }
        Self::new(vec!["e".into()], arrows, comp).map_err(|e| Error::InvalidGroup(e.to_string()))
    }

    pub fn cyclic(n: usize) -> Self {
        let table: Vec<Vec<usize>> = (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect();
        Self::from_group_table(&table).expect("cyclic table is a group")
    }

    /// Pair groupoid on `k` units: one arrow `(t, s)` for every ordered pair.
    pub fn pair(k: usize) -> Self {
        let units: Vec<String> = (0..k).map(|u| format!("u{u}")).collect();
        let id = |t: usize, s: usize| format!("{t}<-{s}");
        let mut arrows = Vec::new();
        for t in 0..k {
            for s in 0..k {
                arrows.push(ArrowDecl {
                    id: id(t, s),
                    source: units[s].clone(),
                    target: units[t].clone(),
                });
            }
        }
        let mut comp = Vec::new();
        for t in 0..k {
            for m in 0..k {
                for s in 0..k {
                    comp.push((id(t, m), id(m, s), id(t, s)));
                }
            }
        }
        Self::new(units, arrows, comp).expect("pair groupoid is valid")
    }

    pub fn disjoint_union(parts: &[GroupoidSpec]) -> Self {
        let mut units = Vec::new();
        let mut arrows = Vec::new();
        let mut comp = Vec::new();
        for (p, g) in parts.iter().enumerate() {
            let name = |s: &str| format!("{p}.{s}");
            units.extend(g.units.iter().map(|u| name(u)));
            for a in 0..g.num_arrows() {
                arrows.push(ArrowDecl {
                    id: name(&g.arrow_ids[a]),
                    source: name(&g.units[g.source[a]]),
                    target: name(&g.units[g.target[a]]),
                });
                for b in 0..g.num_arrows() {
                    if let Some(ab) = g.compose[a][b] {
                        comp.push((name(&g.arrow_ids[a]), name(&g.arrow_ids[b]), name(&g.arrow_ids[ab])));
                    }
                }
            }
        }
        Self::new(units, arrows, comp).expect("disjoint union of valid groupoids is valid")
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrow_ids.len()
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn arrow_ids(&self) -> &[String] {
        &self.arrow_ids
    }

    pub fn source(&self, g: usize) -> usize {
        self.source[g]
    }

    pub fn target(&self, g: usize) -> usize {
        self.target[g]
    }

    pub fn compose(&self, g: usize, h: usize) -> Option<usize> {
        self.compose[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }
}

fn validate_group_table(table: &[Vec<usize>]) -> Result<()> {
    let n = table.len();
    let bad = |m: &str| Error::InvalidGroup(m.into());
    if n == 0 {
        return Err(bad("empty table"));
    }
    if table.iter().any(|r| r.len() != n) {
        return Err(bad("table is not square"));
    }
    if table.iter().flatten().any(|&x| x >= n) {
        return Err(bad("entry out of range"));
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or_else(|| bad("no identity element"))?;
    for g in 0..n {
        if !(0..n).any(|h| table[g][h] == e && table[h][g] == e) {
            return Err(bad("element without inverse"));
        }
        for h in 0..n {
            for k in 0..n {
                if table[table[g][h]][k] != table[g][table[h][k]] {
                    return Err(bad("not associative"));
                }
            }
        }
    }
    let rows: HashSet<&Vec<usize>> = table.iter().collect();
    if rows.len() != n {
        return Err(bad("repeated rows"));
    }
    Ok(())
}

/// `W = e21⊗e11 + e22⊗e22` on `C²⊗C²`.
pub fn matrix_unit_example() -> Operator {
    let e = |i, j| Operator::matrix_unit(LegSpec::h(2), i, j);
    &kron(&e(1, 0), &e(0, 0)) + &kron(&e(1, 1), &e(1, 1))
}

/// `W(δ_g⊗δ_h) = δ_g⊗δ_{gh}` if `source(g) = target(h)`, else 0. The
/// result is checked against the axioms before it is returned.
pub fn groupoid_mpi(g: &GroupoidSpec) -> Result<Operator> {
    let n = g.num_arrows();
    let mut m = CMat::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            if let Some(ab) = g.compose(a, b) {
                m[(a * n + ab, a * n + b)] = C64::new(1.0, 0.0);
            }
        }
    }
    let w = Operator::on_h(n, 2, m)?;
    let verdict = check_mpi_axioms(&w, &Tolerances::default())?;
    if !verdict.passed {
        return Err(Error::ConstructionBug(format!(
            "partial isometry residual {:.3e}, worst axiom residual {:.3e}",
            verdict.partial_isometry.residual,
            verdict.axioms.max()
        )));
    }
    Ok(w)
}

/// Kac–Takesaki operator of a group given by its Cayley table.
pub fn group_mpu(table: &[Vec<usize>]) -> Result<Operator> {
    groupoid_mpi(&GroupoidSpec::from_group_table(table)?)
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal absorbed.
pub fn haar_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / 2f64.sqrt()
    });
    let (mut q, r) = QR::new(z).unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// `(u⊗u) W (u⊗u)*`.
pub fn conjugate_fixture(w: &Operator, u: &CMat, tol: &Tolerances) -> Result<Operator> {
    let n = two_leg_h_dim(w)?;
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            rows: u.nrows(),
            cols: u.ncols(),
            expected: n,
        });
    }
    let gap = (u * u.adjoint() - CMat::identity(n, n)).norm();
    if !tol.passes(gap) {
        return Err(Error::NotUnitary { gap });
    }
    let uu = Operator::new(TensorSpace::h_power(n, 1), u.clone())?;
    let uu = kron(&uu, &uu);
    Ok(&(&uu * w) * &uu.adjoint())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Example,
    Group,
    Groupoid,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub id: String,
    pub kind: FixtureKind,
    pub w: Operator,
    /// Candidate `Q` for manageability.
    pub q: Option<Operator>,
    /// Number of units for group and groupoid fixtures.
    pub units: Option<usize>,
}

impl Fixture {
    fn from_groupoid(id: &str, kind: FixtureKind, g: &GroupoidSpec) -> Self {
        let w = groupoid_mpi(g).expect("corpus groupoids satisfy the axioms");
        let n = g.num_arrows();
        Self {
            id: id.into(),
            kind,
            w,
            q: Some(Operator::identity(TensorSpace::h_power(n, 1))),
            units: Some(g.num_units()),
        }
    }

    pub fn n(&self) -> usize {
        self.w.space().leg(0).dim
    }

    /// `(u⊗u)W(u⊗u)*` and `uQu*` for the Haar unitary drawn from `seed`.
    pub fn conjugated(&self, seed: u64, tol: &Tolerances) -> Result<Fixture> {
        let u = haar_unitary(self.n(), seed);
        let w = conjugate_fixture(&self.w, &u, tol)?;
        let q = match &self.q {
            Some(q) => Some(Operator::new(q.space().clone(), &u * q.matrix() * u.adjoint())?),
            None => None,
        };
        Ok(Fixture {
            id: format!("{}~{seed}", self.id),
            kind: self.kind,
            w,
            q,
            units: self.units,
        })
    }
}

/// Largest leg dimension used for seeded conjugation trials.
pub const TRIAL_MAX_DIM: usize = 8;

/// `count` seeded conjugations, cycling through the corpus fixtures with
/// `n ≤ TRIAL_MAX_DIM`.
pub fn conjugation_trials(count: usize, seed: u64, tol: &Tolerances) -> Result<Vec<Fixture>> {
    let base: Vec<Fixture> = standard_corpus()
        .into_iter()
        .filter(|f| f.n() <= TRIAL_MAX_DIM)
        .collect();
    (0..count)
        .map(|k| {
            let trial_seed = seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
            base[k % base.len()].conjugated(trial_seed, tol)
        })
        .collect()
}

/// The built-in corpus, in a fixed order.
pub fn standard_corpus() -> Vec<Fixture> {
    let mut out = vec![Fixture {
        id: "example".into(),
        kind: FixtureKind::Example,
        w: matrix_unit_example(),
        q: None,
        units: None,
    }];
    for k in [2, 3, 4] {
        out.push(Fixture::from_groupoid(
            &format!("Z{k}"),
            FixtureKind::Group,
            &GroupoidSpec::cyclic(k),
        ));
    }
    out.push(Fixture::from_groupoid(
        "pair2",
        FixtureKind::Groupoid,
        &GroupoidSpec::pair(2),
    ));
    out.push(Fixture::from_groupoid(
        "pair3",
        FixtureKind::Groupoid,
        &GroupoidSpec::pair(3),
    ));
    out.push(Fixture::from_groupoid(
        "Z2+Z2",
        FixtureKind::Groupoid,
        &GroupoidSpec::disjoint_union(&[GroupoidSpec::cyclic(2), GroupoidSpec::cyclic(2)]),
    ));
    out.push(Fixture::from_groupoid(
        "Z2+Z3",
        FixtureKind::Groupoid,
        &GroupoidSpec::disjoint_union(&[GroupoidSpec::cyclic(2), GroupoidSpec::cyclic(3)]),
    ));
    out
}
