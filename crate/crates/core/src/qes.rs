//! The `(n, m)` quantum encryption scheme over `S_n`: key generation,
//! phase-coset-state encryption, sector-projective decryption and the exact
//! trace-norm security quantities.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{key_count, key_set, make_group, Element, FiniteGroup, GroupRecipe, Permutation};
use crate::linop::symmetry::{self, Compressed, RegularDecomposition, TensorTerm};
use crate::linop::{self, HermitianOperator, Projector, PureStateFamily};
use crate::math;
use crate::states::{self, DensityOperator};
use crate::Settings;

/// Residual sector mass above which decryption fails.
pub const DECRYPTION_RESIDUAL_TOL: f64 = 1e-6;
/// Largest `n` whose key set and group are enumerated.
pub const MAX_ENUMERATED_N: usize = 8;
/// Largest `n` accepted at all (closed-form quantities only beyond the enumerated range).
pub const MAX_N: usize = 10;
/// Trace distances never exceed this, so larger bounds say nothing.
pub const TRACE_NORM_MAX: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QesParams {
    pub n: usize,
    pub m: usize,
}

impl QesParams {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 || m > n || n % m != 0 {
            return Err(Error::usage(format!("scheme needs n ≥ 2, 2 ≤ m ≤ n and m | n, got n={n}, m={m}")));
        }
        if n > MAX_N {
            return Err(Error::capacity("scheme security parameter n", n as u128, MAX_N as u128));
        }
        Ok(QesParams { n, m })
    }

    /// `|K_n^m|` from the closed form.
    pub fn key_count(&self) -> u128 {
        key_count(self.n, self.m)
    }

    pub fn factorial(&self) -> u128 {
        (1..=self.n as u128).product()
    }
}

/// A key `h`: `n/m` disjoint `m`-cycles, with its index in `S_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecryptionKey {
    pub perm: Permutation,
    pub element: usize,
}

/// `S_n` together with the enumerated key set.
#[derive(Clone, Debug)]
pub struct QesInstance {
    params: QesParams,
    group: Arc<FiniteGroup>,
    keys: Vec<DecryptionKey>,
}

impl QesInstance {
    pub fn new(params: QesParams, settings: &Settings) -> Result<Self> {
        if params.n > MAX_ENUMERATED_N {
            return Err(Error::capacity("key-set enumeration degree", params.n as u128, MAX_ENUMERATED_N as u128));
        }
        let group = Arc::new(make_group(&GroupRecipe::Symmetric { n: params.n }, settings.dense_cap)?);
        let keys = key_set(params.n, params.m, MAX_ENUMERATED_N)?
            .into_iter()
            .map(|perm| {
                let element = group.index_of(&Element::Perm(perm.clone())).expect("key lies in S_n");
                DecryptionKey { perm, element }
            })
            .collect();
        Ok(QesInstance { params, group, keys })
    }

    pub fn params(&self) -> QesParams {
        self.params
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn keys(&self) -> &[DecryptionKey] {
        &self.keys
    }

    /// Uniform key under the seeded generator.
    pub fn keygen(&self, seed: u64) -> DecryptionKey {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.keygen_with(&mut rng)
    }

    pub fn keygen_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DecryptionKey {
        self.keys[rng.random_range(0..self.keys.len())].clone()
    }

    fn check_message(&self, s: usize) -> Result<()> {
        if s >= self.params.m {
            return Err(Error::usage(format!("message {s} outside 0..{}", self.params.m)));
        }
        Ok(())
    }

    /// The cipherstate `ρ_h^{(s)}`.
    pub fn encrypt(&self, key: &DecryptionKey, s: usize, settings: &Settings) -> Result<DensityOperator> {
        self.check_message(s)?;
        states::phase_coset_state(&self.group, key.element, self.params.m, s, settings)
    }

    /// The encryption-key state `σ_h = (ρ_h^{(0)}, …, ρ_h^{(m−1)})`.
    pub fn encryption_key_state(&self, key: &DecryptionKey, settings: &Settings) -> Result<Vec<DensityOperator>> {
        (0..self.params.m).map(|s| self.encrypt(key, s, settings)).collect()
    }

    /// Projector onto the support of `ρ_h^{(s)}`.
    pub fn sector_projector(&self, key: &DecryptionKey, s: usize) -> Result<Projector> {
        self.check_message(s)?;
        let vs = states::phase_vectors(&self.group, key.element, self.params.m, s)?;
        let d = self.group.order();
        Projector::from_isometry(Mat::from_fn(d, vs.len(), |r, c| vs[c][r]))
    }

    /// Sector probabilities `tr(Π_s ρ)` and the residual `1 − Σ_s tr(Π_s ρ)`.
    pub fn decryption_distribution(&self, key: &DecryptionKey, cipher: &DensityOperator) -> Result<(Vec<f64>, f64)> {
        if cipher.dim() != self.group.order() {
            return Err(Error::usage(format!(
                "cipherstate dimension {} is not n! = {}",
                cipher.dim(),
                self.group.order()
            )));
        }
        let mut probs = Vec::with_capacity(self.params.m);
        for s in 0..self.params.m {
            probs.push(self.sector_projector(key, s)?.expectation(cipher.operator()).max(0.0));
        }
        let residual = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Ok((probs, residual))
    }

    /// Most likely sector, ties to the lowest message.
    pub fn decrypt(&self, key: &DecryptionKey, cipher: &DensityOperator) -> Result<usize> {
        let (probs, residual) = self.decryption_distribution(key, cipher)?;
        if residual > DECRYPTION_RESIDUAL_TOL {
            return Err(Error::DecryptionFailure { residual });
        }
        let mut best = 0;
        for (s, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = s;
            }
        }
        Ok(best)
    }

    /// Messages of the tensor slots: the cipherstate's, then `k` copies of `0..m`.
    fn slot_messages(&self, s: usize, k: u32) -> Vec<usize> {
        let mut slots = alloc::vec![s];
        for _ in 0..k {
            slots.extend(0..self.params.m);
        }
        slots
    }

    /// `(1/|K|) Σ_h ρ_h^{(s)} ⊗ σ_h^{⊗k}` as a product family of phase vectors.
    pub fn eavesdropper_decomposition(&self, s: usize, k: u32, settings: &Settings) -> Result<PureStateFamily> {
        self.check_message(s)?;
        let slots = self.slot_messages(s, k);
        let per_slot = self.group.order() / self.params.m;
        let count = (self.keys.len() as u128) * (per_slot as u128).checked_pow(slots.len() as u32).unwrap_or(u128::MAX);
        if count > settings.gram_cap as u128 {
            return Err(Error::capacity("pure components of the eavesdropper state", count, settings.gram_cap as u128));
        }
        let mut dictionaries = Vec::with_capacity(slots.len());
        for &msg in &slots {
            let mut dict = Vec::with_capacity(self.keys.len() * per_slot);
            for key in &self.keys {
                dict.extend(states::phase_vectors(&self.group, key.element, self.params.m, msg)?);
            }
            dictionaries.push(dict);
        }
        let w = math::pow_u(self.params.m as f64 / self.group.order() as f64, slots.len() as u32) / self.keys.len() as f64;
        let mut components = Vec::with_capacity(count as usize);
        for key in 0..self.keys.len() {
            for mut t in 0..(count as usize / self.keys.len()) {
                let mut comp = Vec::with_capacity(slots.len());
                for _ in 0..slots.len() {
                    comp.push((key * per_slot + t % per_slot) as u32);
                    t /= per_slot;
                }
                components.push(comp);
            }
        }
        PureStateFamily::product(dictionaries, alloc::vec![w; count as usize], components)
    }

    fn total_dim(&self, k: u32) -> u128 {
        (self.group.order() as u128).pow(self.params.m as u32 * k + 1)
    }

    /// `l_s = ‖(1/|K|) Σ_h ρ_h^{(s)} ⊗ σ_h^{⊗k} − (I/n!)^{⊗(mk+1)}‖₁` from the Gram spectrum.
    pub fn l_factored(&self, s: usize, k: u32, settings: &Settings) -> Result<f64> {
        let fam = self.eavesdropper_decomposition(s, k, settings)?;
        let d = self.total_dim(k);
        linop::shifted_trace_norm(&fam, 1.0 / d as f64, d, settings)
    }

    /// `l_s` from dense operators, for `(n!)^{mk+1}` within the dense cap.
    pub fn l_dense(&self, s: usize, k: u32, settings: &Settings) -> Result<f64> {
        let d = self.total_dim(k);
        if d > settings.dense_cap as u128 {
            return Err(Error::capacity("dense eavesdropper state", d, settings.dense_cap as u128));
        }
        let mut mix = HermitianOperator::zeros(d as usize);
        for key in &self.keys {
            let sigma = self.encryption_key_state(key, settings)?;
            let mut op = self.encrypt(key, s, settings)?.operator().clone();
            for _ in 0..k {
                for part in &sigma {
                    op = op.kron(part.operator());
                }
            }
            mix.add_assign_scaled(&op, 1.0 / self.keys.len() as f64);
        }
        let x = mix.combine(1.0, &HermitianOperator::identity(d as usize), -1.0 / d as f64)?;
        linop::trace_norm(&x)
    }

    fn compressed_messages(&self, dec: &RegularDecomposition) -> Result<Vec<Vec<Compressed>>> {
        self.keys
            .iter()
            .map(|key| {
                (0..self.params.m)
                    .map(|s| Ok(dec.compress(&states::phase_state_function(&self.group, key.element, self.params.m, s)?)))
                    .collect()
            })
            .collect()
    }

    fn key_terms<'a>(&self, blocks: &'a [Vec<Compressed>], key: usize, s: usize, k: u32, coeff: f64) -> TensorTerm<'a> {
        TensorTerm {
            coeff,
            factors: self.slot_messages(s, k).into_iter().map(|msg| &blocks[key][msg]).collect(),
        }
    }

    /// `l_s` from the irrep blocks of `S_n^{mk+1}`.
    pub fn l_blockwise(&self, dec: &RegularDecomposition, s: usize, k: u32, settings: &Settings) -> Result<f64> {
        self.check_message(s)?;
        let blocks = self.compressed_messages(dec)?;
        let identity = dec.compress(&states::identity_function(&self.group));
        let slots = self.slot_messages(s, k).len();
        let c = 1.0 / self.keys.len() as f64;
        let mut terms: Vec<TensorTerm<'_>> = (0..self.keys.len()).map(|h| self.key_terms(&blocks, h, s, k, c)).collect();
        terms.push(TensorTerm {
            coeff: -1.0 / self.total_dim(k) as f64,
            factors: alloc::vec![&identity; slots],
        });
        symmetry::tensor_sum_trace_norm(&dec.irrep_dims(), &terms, settings.symmetry_cap)
    }

    /// `‖(1/|K|) Σ_h (ρ_h^{(s)} − ρ_h^{(t)}) ⊗ σ_h^{⊗k}‖₁` from the irrep blocks.
    pub fn pairwise_norm(&self, dec: &RegularDecomposition, s: usize, t: usize, k: u32, settings: &Settings) -> Result<f64> {
        self.check_message(s)?;
        self.check_message(t)?;
        let blocks = self.compressed_messages(dec)?;
        let c = 1.0 / self.keys.len() as f64;
        let mut terms = Vec::with_capacity(2 * self.keys.len());
        for h in 0..self.keys.len() {
            terms.push(self.key_terms(&blocks, h, s, k, c));
            terms.push(self.key_terms(&blocks, h, t, k, -c));
        }
        symmetry::tensor_sum_trace_norm(&dec.irrep_dims(), &terms, settings.symmetry_cap)
    }

    /// Same quantity as [`Self::pairwise_norm`] through a signed Gram spectrum.
    pub fn pairwise_norm_factored(&self, s: usize, t: usize, k: u32, settings: &Settings) -> Result<f64> {
        let a = self.eavesdropper_decomposition(s, k, settings)?;
        let b = self.eavesdropper_decomposition(t, k, settings)?;
        let mut vectors = Vec::with_capacity(a.len() + b.len());
        let mut weights = Vec::with_capacity(a.len() + b.len());
        for fam in [&a, &b] {
            for c in 0..fam.len() {
                vectors.push(fam.vector(c));
                weights.push(fam.weights()[c]);
            }
        }
        let signs: Vec<i8> = (0..a.len()).map(|_| 1).chain((0..b.len()).map(|_| -1)).collect();
        let joint = PureStateFamily::explicit(weights, vectors)?;
        linop::signed_mixture_trace_norm(&joint, &signs, settings)
    }
}

/// `√(m^{mk+1} / |K_n^m|)` with the exact key count.
pub fn qes_bound(params: QesParams, k: u32) -> f64 {
    let e = params.m as u32 * k + 1;
    math::sqrt(math::pow_u(params.m as f64, e) / params.key_count() as f64)
}

/// `m^{1/2} n^{n−n/m} / e^{n−n/m}`, the asymptotic estimate of `|K_n^m|`.
pub fn stirling_estimate(params: QesParams) -> f64 {
    let (n, m) = (params.n as f64, params.m as f64);
    let e = n - n / m;
    math::sqrt(m) * math::exp(e * math::ln(n) - e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseNorm {
    pub s: usize,
    pub t: usize,
    pub norm: f64,
}

/// Exact security quantities for `k` eavesdropped key-state copies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecurityReport {
    pub params: QesParams,
    pub k: u32,
    pub l_0: f64,
    /// `l_s` for every message `s`.
    pub l: Vec<f64>,
    pub pairwise: Vec<PairwiseNorm>,
    pub bound: f64,
    /// The bound exceeds the largest possible trace distance.
    pub bound_vacuous: bool,
    pub key_count: u128,
    pub stirling_estimate: f64,
    /// `max_s |l_s − l_0|`.
    pub symmetry_deviation: f64,
    pub symmetry_holds: bool,
    pub triangle_holds: bool,
    /// `l_s ≤ bound` for all `s`, checked only when the bound is not vacuous.
    pub bound_holds: Option<bool>,
}

impl SecurityReport {
    pub fn all_hold(&self) -> bool {
        self.symmetry_holds && self.triangle_holds && self.bound_holds != Some(false)
    }
}

/// Tolerance of the `l_s = l_0` symmetry.
pub const SYMMETRY_TOL: f64 = 1e-6;

pub fn indistinguishability_norms(params: QesParams, k: u32, seed: u64, settings: &Settings) -> Result<SecurityReport> {
    let inst = QesInstance::new(params, settings)?;
    let m = params.m;
    let l = (0..m).map(|s| inst.l_factored(s, k, settings)).collect::<Result<Vec<f64>>>()?;
    let dec = RegularDecomposition::new(inst.group(), seed)?;
    let mut pairwise = Vec::new();
    for s in 0..m {
        for t in s + 1..m {
            pairwise.push(PairwiseNorm {
                s,
                t,
                norm: inst.pairwise_norm(&dec, s, t, k, settings)?,
            });
        }
    }
    let bound = qes_bound(params, k);
    let bound_vacuous = bound > TRACE_NORM_MAX;
    let symmetry_deviation = l.iter().fold(0.0f64, |d, v| d.max((v - l[0]).abs()));
    let triangle_holds = pairwise.iter().all(|p| p.norm <= l[p.s] + l[p.t] + 1e-8);
    let bound_holds = (!bound_vacuous).then(|| l.iter().all(|v| *v <= bound + SYMMETRY_TOL));
    Ok(SecurityReport {
        params,
        k,
        l_0: l[0],
        l,
        pairwise,
        bound,
        bound_vacuous,
        key_count: params.key_count(),
        stirling_estimate: stirling_estimate(params),
        symmetry_deviation,
        symmetry_holds: symmetry_deviation <= SYMMETRY_TOL,
        triangle_holds,
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(QesParams::new(4, 3).is_err());
        assert!(QesParams::new(4, 1).is_err());
        assert!(matches!(QesParams::new(12, 2), Err(Error::Capacity { .. })));
        assert_eq!(QesParams::new(6, 2).unwrap().key_count(), 15);
    }

    #[test]
    fn bound_values() {
        let p = QesParams::new(4, 2).unwrap();
        assert!((qes_bound(p, 1) - math::sqrt(8.0 / 3.0)).abs() < 1e-15);
        assert!((qes_bound(QesParams::new(2, 2).unwrap(), 0) - math::sqrt(2.0)).abs() < 1e-15);
        let r = stirling_estimate(QesParams::new(6, 2).unwrap()) / 15.0;
        assert!((0.5..2.0).contains(&r));
    }

    #[test]
    fn round_trip_small_instances() {
        let st = Settings::default();
        for (n, m) in [(2, 2), (3, 3), (4, 2)] {
            let inst = QesInstance::new(QesParams::new(n, m).unwrap(), &st).unwrap();
            for key in inst.keys() {
                for s in 0..m {
                    let c = inst.encrypt(key, s, &st).unwrap();
                    assert_eq!(inst.decrypt(key, &c).unwrap(), s);
                    let (p, res) = inst.decryption_distribution(key, &c).unwrap();
                    assert!((p[s] - 1.0).abs() < 1e-9 && res < 1e-9);
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_cipher_is_uniform() {
        let st = Settings::default();
        let inst = QesInstance::new(QesParams::new(4, 2).unwrap(), &st).unwrap();
        let mixed = states::maximally_mixed(inst.group(), 1, &st).unwrap();
        let (p, res) = inst.decryption_distribution(&inst.keys()[0], &mixed).unwrap();
        assert!(p.iter().all(|x| (x - 0.5).abs() < 1e-12) && res < 1e-12);
    }

    #[test]
    fn l_routes_agree_at_k0() {
        let st = Settings::default();
        let inst = QesInstance::new(QesParams::new(4, 2).unwrap(), &st).unwrap();
        let dec = RegularDecomposition::new(inst.group(), 1).unwrap();
        for s in 0..2 {
            let d = inst.l_dense(s, 0, &st).unwrap();
            let f = inst.l_factored(s, 0, &st).unwrap();
            let b = inst.l_blockwise(&dec, s, 0, &st).unwrap();
            assert!((d - f).abs() < 1e-8 && (d - b).abs() < 1e-8, "{d} {f} {b}");
        }
        let p = inst.pairwise_norm(&dec, 0, 1, 0, &st).unwrap();
        let q = inst.pairwise_norm_factored(0, 1, 0, &st).unwrap();
        assert!((p - q).abs() < 1e-8, "{p} {q}");
    }
}
