use cosetlab_core::group::key_set;
use cosetlab_core::qes::{indistinguishability_norms, qes_bound, QesInstance, QesParams};
use cosetlab_core::states::{maximally_mixed, overlap};
use cosetlab_core::Settings;

/// Permutations of `0..n` whose cycles all have length `m`, counted by
/// walking every image list.
fn brute_force_key_count(n: usize, m: usize) -> usize {
    fn cycles_uniform(images: &[usize], m: usize) -> bool {
        let mut seen = vec![false; images.len()];
        for start in 0..images.len() {
            if seen[start] {
                continue;
            }
            let (mut x, mut len) = (start, 0);
            while !seen[x] {
                seen[x] = true;
                x = images[x];
                len += 1;
            }
            if len != m {
                return false;
            }
        }
        true
    }
    fn walk(prefix: &mut Vec<usize>, used: &mut [bool], m: usize, count: &mut usize) {
        if prefix.len() == used.len() {
            *count += usize::from(cycles_uniform(prefix, m));
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                walk(prefix, used, m, count);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut count = 0;
    walk(&mut Vec::new(), &mut vec![false; n], m, &mut count);
    count
}

#[test]
fn key_counts_match_enumeration() {
    for n in 2..=8 {
        for m in 2..=n {
            if n % m != 0 {
                continue;
            }
            let expected = brute_force_key_count(n, m);
            assert_eq!(key_set(n, m, 8).unwrap().len(), expected, "n={n} m={m}");
            assert_eq!(QesParams::new(n, m).unwrap().key_count(), expected as u128, "n={n} m={m}");
        }
    }
    assert_eq!(brute_force_key_count(4, 2), 3);
    assert_eq!(brute_force_key_count(6, 2), 15);
}

#[test]
fn sectors_are_orthogonal() {
    let st = Settings::default();
    for (n, m) in [(2, 2), (3, 3), (4, 2), (4, 4), (5, 5)] {
        let inst = QesInstance::new(QesParams::new(n, m).unwrap(), &st).unwrap();
        for key in inst.keys() {
            let states = inst.encryption_key_state(key, &st).unwrap();
            for s in 0..m {
                for t in s + 1..m {
                    let o = overlap(&states[s], &states[t]).unwrap();
                    assert!(o.abs() <= 1e-12, "({n},{m}) key {}: {o:.3e}", key.perm);
                }
            }
        }
    }
}

#[test]
fn decryption_recovers_every_message() {
    let st = Settings::default();
    for (n, m) in [(2, 2), (3, 3), (4, 2)] {
        let inst = QesInstance::new(QesParams::new(n, m).unwrap(), &st).unwrap();
        for key in inst.keys() {
            for s in 0..m {
                let c = inst.encrypt(key, s, &st).unwrap();
                let (probs, residual) = inst.decryption_distribution(key, &c).unwrap();
                assert!((probs[s] - 1.0).abs() <= 1e-9, "({n},{m}) s={s}: {probs:?}");
                assert!(residual <= 1e-9);
                assert_eq!(inst.decrypt(key, &c).unwrap(), s);
            }
        }
    }
}

#[test]
fn maximally_mixed_cipher_spreads_evenly() {
    let st = Settings::default();
    let inst = QesInstance::new(QesParams::new(4, 2).unwrap(), &st).unwrap();
    let key = inst.keygen(3);
    let mixed = maximally_mixed(inst.group(), 1, &st).unwrap();
    let (probs, residual) = inst.decryption_distribution(&key, &mixed).unwrap();
    // Each sector projector has rank n!/m = 12 out of 24.
    for p in &probs {
        assert!((p - 0.5).abs() < 1e-12, "{p}");
    }
    assert!(residual < 1e-12);
}

#[test]
fn keygen_is_seeded_and_uniform_over_keys() {
    let st = Settings::default();
    let inst = QesInstance::new(QesParams::new(4, 2).unwrap(), &st).unwrap();
    assert_eq!(inst.keygen(17), inst.keygen(17));
    let mut hits = [0usize; 3];
    for seed in 0..300 {
        let k = inst.keygen(seed);
        hits[inst.keys().iter().position(|x| *x == k).unwrap()] += 1;
    }
    assert!(hits.iter().all(|&h| h > 60), "{hits:?}");
}

#[test]
fn eavesdropper_quantities_obey_the_chain() {
    let st = Settings::default();
    for (n, m, k) in [(3, 3, 0), (4, 2, 0), (2, 2, 1), (3, 3, 1)] {
        let params = QesParams::new(n, m).unwrap();
        let inst = QesInstance::new(params, &st).unwrap();
        let l: Vec<f64> = (0..m).map(|s| inst.l_factored(s, k, &st).unwrap()).collect();
        if m == 2 {
            assert!((l[1] - l[0]).abs() <= 1e-6, "({n},{m},{k}): {l:?}");
        }
        if k == 0 {
            let dense = inst.l_dense(0, 0, &st).unwrap();
            assert!((dense - l[0]).abs() <= 1e-8);
        }
        let bound = qes_bound(params, k);
        for s in 0..m {
            for t in s + 1..m {
                let pair = inst.pairwise_norm_factored(s, t, k, &st).unwrap();
                assert!(pair <= l[s] + l[t] + 1e-8, "({n},{m},{k}) {s},{t}: {pair} > {}", l[s] + l[t]);
                if bound <= 2.0 {
                    assert!(l[s] + l[t] <= 2.0 * bound + 1e-6);
                }
            }
        }
    }
}

#[test]
fn security_report_at_k0() {
    let report = indistinguishability_norms(QesParams::new(4, 2).unwrap(), 0, 0, &Settings::default()).unwrap();
    assert!(report.all_hold());
    assert!(!report.bound_vacuous);
    assert_eq!(report.key_count, 3);
    assert_eq!(report.pairwise.len(), 1);
    assert!(report.l_0 <= report.bound);
}

#[test]
fn keys_sharing_a_subgroup_break_message_symmetry() {
    // (1 2 3) and (1 3 2) generate A_3. Averaged over both keys, message 0
    // gives the coset state of A_3 (two eigenvalues 1/2) and messages 1, 2
    // give an even mixture of two orthogonal rank-2 sectors (four
    // eigenvalues 1/4), so l = (4/3, 2/3, 2/3) against I/6.
    let st = Settings::default();
    let params = QesParams::new(3, 3).unwrap();
    let inst = QesInstance::new(params, &st).unwrap();
    let l: Vec<f64> = (0..3).map(|s| inst.l_factored(s, 0, &st).unwrap()).collect();
    for (got, want) in l.iter().zip([4.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
        assert!((got - want).abs() < 1e-10, "{l:?}");
    }
    let report = indistinguishability_norms(params, 0, 0, &st).unwrap();
    assert!(!report.symmetry_holds);
    assert!(!report.bound_vacuous);
    assert_eq!(report.bound_holds, Some(false));
    assert!(report.triangle_holds);
}
