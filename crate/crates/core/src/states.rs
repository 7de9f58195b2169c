//! Coset states, phase coset states and the standard-method simulation.
//!
//! A coset state has entries `ρ_H[x][y] = [x⁻¹y ∈ H] / |G|`, which follows
//! from expanding `(1/|G|) Σ_g |gH⟩⟨gH|` with `|gH⟩ = |H|^{-1/2} Σ_h |gh⟩`.
//! States are built from that law; the outer-product sum is kept as an
//! independent oracle.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use faer::Mat;

use crate::c64;
use crate::error::{Error, Result};
use crate::group::{left_cosets, subgroup_closure, Element, FiniteGroup, GroupRecipe, Subgroup};
use crate::linop::{self, cx, HermitianOperator, Projector, PureStateFamily};
use crate::math;
use crate::Settings;

/// Tolerance of the density-operator checks (PSD and unit trace).
pub const STATE_TOL: f64 = 1e-9;

/// The computational basis `{|g_1, …, g_k⟩}` of `k` copies of `C^G`.
#[derive(Clone, Debug)]
pub struct Basis {
    group: Arc<FiniteGroup>,
    copies: u32,
}

impl Basis {
    pub fn new(group: &Arc<FiniteGroup>, copies: u32) -> Self {
        Basis {
            group: group.clone(),
            copies,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    /// `|G|^k`, saturating.
    pub fn dim(&self) -> u128 {
        (self.group.order() as u128).checked_pow(self.copies).unwrap_or(u128::MAX)
    }

    pub fn same_as(&self, other: &Basis) -> bool {
        Arc::ptr_eq(&self.group, &other.group) && self.copies == other.copies
    }
}

/// A trace-one PSD operator on a group basis.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
    basis: Basis,
}

impl DensityOperator {
    /// Checks the dimension, PSD (within `1e−9`) and unit trace (within `1e−9`).
    pub fn new(op: HermitianOperator, basis: Basis) -> Result<Self> {
        if op.dim() as u128 != basis.dim() {
            return Err(Error::usage(format!(
                "operator dimension {} does not match basis dimension {}",
                op.dim(),
                basis.dim()
            )));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::domain(format!("state has trace {tr}")));
        }
        let w = linop::psd_check(&op, STATE_TOL)?;
        if !w.is_psd {
            return Err(Error::domain(format!("state has eigenvalue {:.3e}", w.min_eigenvalue)));
        }
        Ok(DensityOperator { op, basis })
    }

    /// For states that are PSD by construction (tensor powers of checked
    /// states); only the trace is verified.
    fn from_product(op: HermitianOperator, basis: Basis) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::domain(format!("state has trace {tr}")));
        }
        Ok(DensityOperator { op, basis })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> c64 {
        self.op.entry(i, j)
    }

    /// The state as a matrix interchange block.
    pub fn to_interchange(&self) -> String {
        let mut out = String::new();
        linop::interchange::write_matrix(&mut out, &self.op);
        out
    }

    /// Parses an interchange block and checks it as a state on `basis`.
    pub fn from_interchange(text: &str, basis: Basis) -> Result<Self> {
        Self::new(linop::interchange::read_matrix(text)?, basis)
    }
}

fn check_dense(group: &FiniteGroup, settings: &Settings) -> Result<()> {
    if group.order() > settings.dense_cap {
        return Err(Error::capacity(
            format!("dense state over {}", group.recipe()),
            group.order() as u128,
            settings.dense_cap as u128,
        ));
    }
    Ok(())
}

/// `a(z) = [z ∈ H]/|G|`, so that `ρ_H[x][y] = a(x⁻¹y)`.
pub fn coset_state_function(h: &Subgroup) -> Vec<c64> {
    let n = h.parent().order();
    let mut a = alloc::vec![cx(0.0); n];
    for &z in h.members() {
        a[z] = cx(1.0 / n as f64);
    }
    a
}

/// `a(z) = [z ∈ H]/|H|`, the convolution function of the support projector `P_H`.
pub fn coset_projector_function(h: &Subgroup) -> Vec<c64> {
    let n = h.parent().order();
    let mut a = alloc::vec![cx(0.0); n];
    for &z in h.members() {
        a[z] = cx(1.0 / h.order() as f64);
    }
    a
}

/// `a(z) = [z = id]`, the identity operator.
pub fn identity_function(group: &FiniteGroup) -> Vec<c64> {
    let mut a = alloc::vec![cx(0.0); group.order()];
    a[group.identity()] = cx(1.0);
    a
}

fn convolution_operator(group: &FiniteGroup, a: &[c64]) -> HermitianOperator {
    let n = group.order();
    HermitianOperator::hermitian_part(Mat::from_fn(n, n, |x, y| a[group.mul(group.inv(x), y)]))
}

/// `ρ_H` built from the entrywise law.
pub fn coset_state(h: &Subgroup, settings: &Settings) -> Result<DensityOperator> {
    let g = h.parent();
    check_dense(g, settings)?;
    let op = convolution_operator(g, &coset_state_function(h));
    DensityOperator::new(op, Basis::new(g, 1))
}

/// `ρ_H = (1/|G|) Σ_{g∈G} |gH⟩⟨gH|`, summed term by term.
pub fn coset_state_from_outer_products(h: &Subgroup, settings: &Settings) -> Result<DensityOperator> {
    let g = h.parent();
    check_dense(g, settings)?;
    let n = g.order();
    let amp = 1.0 / math::sqrt(h.order() as f64);
    let mut acc = HermitianOperator::zeros(n);
    for x in 0..n {
        let mut v = alloc::vec![cx(0.0); n];
        for &m in h.members() {
            v[g.mul(x, m)] = cx(amp);
        }
        acc.add_assign_scaled(&HermitianOperator::outer(&v), 1.0 / n as f64);
    }
    DensityOperator::new(acc, Basis::new(g, 1))
}

/// Normalized coset vectors `|gH⟩`, one per left coset (ordered as in [`left_cosets`]).
pub fn coset_vectors(h: &Subgroup) -> Vec<Vec<c64>> {
    let n = h.parent().order();
    let amp = cx(1.0 / math::sqrt(h.order() as f64));
    left_cosets(h)
        .into_iter()
        .map(|block| {
            let mut v = alloc::vec![cx(0.0); n];
            for x in block {
                v[x] = amp;
            }
            v
        })
        .collect()
}

/// `P_H`, the projector onto the support of `ρ_H`, spanned by the coset vectors.
pub fn coset_projector(h: &Subgroup) -> Result<Projector> {
    let vs = coset_vectors(h);
    let n = h.parent().order();
    Projector::from_isometry(Mat::from_fn(n, vs.len(), |r, c| vs[c][r]))
}

/// `ρ_H` as `|G|/|H|` orthonormal components of weight `|H|/|G|`.
pub fn coset_pure_decomposition(h: &Subgroup) -> PureStateFamily {
    let vs = coset_vectors(h);
    let w = h.order() as f64 / h.parent().order() as f64;
    PureStateFamily::explicit(alloc::vec![w; vs.len()], vs).expect("coset vectors are unit vectors")
}

/// `I/|G|^k`.
pub fn maximally_mixed(group: &Arc<FiniteGroup>, copies: u32, settings: &Settings) -> Result<DensityOperator> {
    let basis = Basis::new(group, copies);
    let d = basis.dim();
    if d > settings.dense_cap as u128 {
        return Err(Error::capacity("dense maximally mixed state", d, settings.dense_cap as u128));
    }
    let d = d as usize;
    Ok(DensityOperator {
        op: HermitianOperator::scaled_identity(d, 1.0 / d as f64),
        basis,
    })
}

/// `ρ^{⊗k}` on the `k·copies`-fold basis.
pub fn tensor_power(state: &DensityOperator, k: u32, settings: &Settings) -> Result<DensityOperator> {
    let op = linop::tensor_power(&state.op, k, settings.dense_cap)?;
    let basis = Basis::new(state.basis.group(), state.basis.copies() * k);
    DensityOperator::from_product(op, basis)
}

/// `tr(a b)`, which must be real up to `1e−12`.
pub fn overlap(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if !a.basis.same_as(&b.basis) {
        return Err(Error::usage("states live on different bases"));
    }
    let t = linop::trace_of_product(&a.op, &b.op)?;
    if t.im.abs() > 1e-12 {
        return Err(Error::numeric(format!("overlap has imaginary part {:.3e}", t.im)));
    }
    Ok(t.re)
}

/// An HSP oracle `f_H : G → S`, stored as a label per element.
#[derive(Clone, Debug)]
pub struct CosetOracle {
    group: Arc<FiniteGroup>,
    table: Vec<usize>,
}

impl CosetOracle {
    /// Validates `f(g) = f(gh) ⇔ h ∈ H` for all `g, h`, where
    /// `H = {h : f(h) = f(id)}`.
    pub fn new(group: &Arc<FiniteGroup>, table: Vec<usize>) -> Result<Self> {
        let n = group.order();
        if table.len() != n {
            return Err(Error::usage(format!("oracle table has {} entries for a group of order {n}", table.len())));
        }
        let id_label = table[group.identity()];
        let in_h: Vec<bool> = (0..n).map(|h| table[h] == id_label).collect();
        for g in 0..n {
            for h in 0..n {
                if (table[g] == table[group.mul(g, h)]) != in_h[h] {
                    return Err(Error::usage(format!(
                        "oracle is not constant exactly on left cosets (g = {}, h = {})",
                        group.format_element(g),
                        group.format_element(h)
                    )));
                }
            }
        }
        Ok(CosetOracle {
            group: group.clone(),
            table,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn label(&self, g: usize) -> usize {
        self.table[g]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn distinct_labels(&self) -> usize {
        let mut t = self.table.clone();
        t.sort_unstable();
        t.dedup();
        t.len()
    }

    /// `{h : f(h) = f(id)}`, the subgroup the oracle hides.
    pub fn hidden_subgroup(&self) -> Result<Subgroup> {
        let id_label = self.table[self.group.identity()];
        let members: Vec<usize> = (0..self.group.order()).filter(|&h| self.table[h] == id_label).collect();
        let sub = subgroup_closure(&self.group, &members)?;
        if sub.members() != members.as_slice() {
            return Err(Error::numeric("oracle level set of the identity is not a subgroup"));
        }
        Ok(sub)
    }

    /// Applies a bijection to the labels.
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Result<Self> {
        let table: Vec<usize> = self.table.iter().map(|&l| f(l)).collect();
        if CosetOracle::new(&self.group, table.clone())?.distinct_labels() != self.distinct_labels() {
            return Err(Error::usage("relabeling is not injective"));
        }
        Ok(CosetOracle {
            group: self.group.clone(),
            table,
        })
    }
}

/// Oracle whose label for `g` is the smallest element index of `gH`.
pub fn oracle_from_subgroup(h: &Subgroup) -> CosetOracle {
    let g = h.parent();
    let mut table = alloc::vec![0usize; g.order()];
    for block in left_cosets(h) {
        let rep = block[0];
        for x in block {
            table[x] = rep;
        }
    }
    CosetOracle {
        group: g.clone(),
        table,
    }
}

/// Prepares `|G|^{-1/2} Σ_g |g⟩|f(g)⟩` and traces out the label register.
pub fn standard_method_state(oracle: &CosetOracle, settings: &Settings) -> Result<DensityOperator> {
    let g = oracle.group();
    check_dense(g, settings)?;
    let n = g.order();
    let mut slots = BTreeMap::new();
    for &l in oracle.table() {
        let next = slots.len();
        slots.entry(l).or_insert(next);
    }
    let amp = cx(1.0 / math::sqrt(n as f64));
    // purification as an n × |S| matrix Ψ[g][s]; the reduced state is Ψ Ψ†
    let psi = Mat::from_fn(n, slots.len(), |x, s| if slots[&oracle.label(x)] == s { amp } else { cx(0.0) });
    let op = HermitianOperator::hermitian_part(psi.as_ref() * psi.adjoint());
    DensityOperator::new(op, Basis::new(g, 1))
}

/// `e^{2πi e/m}`, exact when `e/m` is a multiple of a quarter turn.
pub fn root_of_unity(e: i64, m: usize) -> c64 {
    let m_i = m as i64;
    let e = e.rem_euclid(m_i);
    if (4 * e) % m_i == 0 {
        return match 4 * e / m_i {
            0 => cx(1.0),
            1 => c64::new(0.0, 1.0),
            2 => cx(-1.0),
            _ => c64::new(0.0, -1.0),
        };
    }
    let (s, c) = math::sin_cos(2.0 * core::f64::consts::PI * e as f64 / m as f64);
    c64::new(c, s)
}

/// Checks that `h` indexes a product of `n/m` disjoint `m`-cycles in `S_n`
/// and returns its powers `h^0, …, h^{m−1}`.
fn key_powers(group: &FiniteGroup, h: usize, m: usize) -> Result<Vec<usize>> {
    let GroupRecipe::Symmetric { n } = group.recipe() else {
        return Err(Error::usage("phase coset states live on a symmetric group"));
    };
    let Element::Perm(p) = group.element(h) else { unreachable!() };
    if !p.is_uniform_cycle_product(m) {
        return Err(Error::usage(format!("{p} is not a product of {} disjoint {m}-cycles", n / m.max(1))));
    }
    Ok((0..m).map(|j| group.pow(h, j)).collect())
}

/// `a(h^j) = ω^{−js}/n!`, zero off `⟨h⟩`, so that `ρ_h^{(s)}[x][y] = a(x⁻¹y)`.
pub fn phase_state_function(group: &FiniteGroup, h: usize, m: usize, s: usize) -> Result<Vec<c64>> {
    if s >= m {
        return Err(Error::usage(format!("message {s} outside 0..{m}")));
    }
    let powers = key_powers(group, h, m)?;
    let n = group.order();
    let mut a = alloc::vec![cx(0.0); n];
    for (j, &z) in powers.iter().enumerate() {
        a[z] = root_of_unity(-((j * s) as i64), m) / n as f64;
    }
    Ok(a)
}

/// `ρ_h^{(s)} = (1/(m·n!)) Σ_g (Σ_k ω^{ks}|g h^k⟩)(Σ_l ω^{−ls}⟨g h^l|)`.
pub fn phase_coset_state(
    group: &Arc<FiniteGroup>,
    h: usize,
    m: usize,
    s: usize,
    settings: &Settings,
) -> Result<DensityOperator> {
    check_dense(group, settings)?;
    let a = phase_state_function(group, h, m, s)?;
    DensityOperator::new(convolution_operator(group, &a), Basis::new(group, 1))
}

/// Orthonormal components `m^{-1/2} Σ_k ω^{ks} |g h^k⟩`, one per left coset
/// of `⟨h⟩` (with `g` its smallest element), each of weight `m/n!`.
pub fn phase_vectors(group: &Arc<FiniteGroup>, h: usize, m: usize, s: usize) -> Result<Vec<Vec<c64>>> {
    if s >= m {
        return Err(Error::usage(format!("message {s} outside 0..{m}")));
    }
    let powers = key_powers(group, h, m)?;
    let cyclic = subgroup_closure(group, &[h])?;
    let n = group.order();
    let amp = 1.0 / math::sqrt(m as f64);
    Ok(left_cosets(&cyclic)
        .into_iter()
        .map(|block| {
            let g = block[0];
            let mut v = alloc::vec![cx(0.0); n];
            for (k, &hk) in powers.iter().enumerate() {
                v[group.mul(g, hk)] = root_of_unity((k * s) as i64, m) * amp;
            }
            v
        })
        .collect())
}

pub fn phase_pure_decomposition(group: &Arc<FiniteGroup>, h: usize, m: usize, s: usize) -> Result<PureStateFamily> {
    let vs = phase_vectors(group, h, m, s)?;
    let w = m as f64 / group.order() as f64;
    PureStateFamily::explicit(alloc::vec![w; vs.len()], vs)
}

/// Which state a pure decomposition is requested for.
#[derive(Clone, Debug)]
pub enum StateKind {
    Coset(Subgroup),
    PhaseCoset { group: Arc<FiniteGroup>, key: usize, m: usize, s: usize },
}

pub fn pure_decomposition(kind: &StateKind) -> Result<PureStateFamily> {
    match kind {
        StateKind::Coset(h) => Ok(coset_pure_decomposition(h)),
        StateKind::PhaseCoset { group, key, m, s } => phase_pure_decomposition(group, *key, *m, *s),
    }
}
