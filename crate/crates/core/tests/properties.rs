use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use xxz_berry::observables::{berry_phase_unchecked, concurrence};
use xxz_berry::oracle::{eigh, hamiltonian, split_sectors, HermitianMatrix4};
use xxz_berry::spectrum::{self, closed_form_coefficients, shifted_cubic};
use xxz_berry::sweep::{self, OutputRecord};
use xxz_berry::{check, ModelParams, StateVector};

fn magnitude() -> impl Strategy<Value = f64> {
    (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

fn coupling() -> impl Strategy<Value = f64> {
    (magnitude(), any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn params() -> impl Strategy<Value = ModelParams> {
    (coupling(), coupling(), magnitude(), 1e-3f64..PI - 1e-3)
        .prop_map(|(jx, jz, b0, theta)| ModelParams::new(jx, jz, b0, theta).unwrap())
}

fn residual(h: &HermitianMatrix4, v: &StateVector, e: f64) -> f64 {
    let hv = h.apply(v);
    (0..4).map(|i| (hv[i] - v[i] * e).norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn roots_solve_the_cubic(p in params()) {
        let s = p.scale();
        for eps in spectrum::triplet_shifted_roots(&p).unwrap() {
            let f = shifted_cubic(eps, &p).abs();
            prop_assert!(f <= 1e-9 * s.powi(3), "F({eps}) = {f}");
        }
    }

    #[test]
    fn roots_ascend_and_states_normalize(p in params()) {
        let spec = spectrum::solve(&p).unwrap();
        let e: Vec<f64> = spec.triplets.iter().map(|t| t.eps).collect();
        prop_assert!(e[0] <= e[1] && e[1] <= e[2]);
        for t in &spec.triplets {
            let norm = t.a * t.a + t.b * t.b + t.c * t.c;
            prop_assert!((norm - 1.0).abs() < 1e-10);
            prop_assert!((t.energy - t.eps - p.j_z()).abs() <= 1e-12 * p.scale());
        }
    }

    #[test]
    fn analytic_states_are_eigenvectors(p in params(), phi in 0.0f64..TAU) {
        let spec = spectrum::solve(&p).unwrap();
        let h = hamiltonian(&p, phi);
        let tol = 1e-9 * h.frobenius_norm();
        prop_assert!(residual(&h, &StateVector::singlet(), spec.singlet_energy) <= tol);
        for t in &spec.triplets {
            // A flagged pair gets a basis of its near-null plane, good to
            // within the splitting.
            let slack = if t.degenerate { spec.triplet_gap(t.n) } else { 0.0 };
            prop_assert!(residual(&h, &t.state(phi), t.energy) <= tol + slack);
        }
    }

    #[test]
    fn mirror_swaps_outer_coefficients(p in params()) {
        // θ → π − θ flips cos θ, which exchanges the roles of a and c.
        let m = p.mirrored();
        for eps in spectrum::triplet_shifted_roots(&p).unwrap() {
            let (Some((a, b, c, d)), Some((am, bm, cm, dm))) =
                (closed_form_coefficients(eps, &p), closed_form_coefficients(eps, &m))
            else { continue };
            prop_assert!((d - dm).abs() <= 1e-10 * d.abs().max(1.0));
            prop_assert!((a - cm).abs() < 1e-9 && (c - am).abs() < 1e-9 && (b - bm).abs() < 1e-9);
        }
    }

    #[test]
    fn berry_is_odd_and_concurrence_even_under_mirror(p in params()) {
        let spec = spectrum::solve(&p).unwrap();
        let mirror = spectrum::solve(&p.mirrored()).unwrap();
        for (t, m) in spec.triplets.iter().zip(mirror.triplets.iter()) {
            if t.degenerate { continue; }
            prop_assert!((berry_phase_unchecked(t) + berry_phase_unchecked(m)).abs() < 1e-10);
            prop_assert!((concurrence(t) - concurrence(m)).abs() < 1e-10);
        }
    }

    #[test]
    fn equator_has_no_berry_phase(jx in coupling(), jz in coupling(), b0 in magnitude()) {
        let p = ModelParams::new(jx, jz, b0, PI / 2.0).unwrap();
        // Nearly degenerate pairs lose accuracy in proportion to scale / gap.
        let spec = spectrum::solve(&p).unwrap();
        for t in spec.triplets.iter().filter(|t| !t.degenerate) {
            let tol = 1e-10 + 1e-14 * p.scale() / spec.triplet_gap(t.n);
            prop_assert!(berry_phase_unchecked(t).abs() < tol);
        }
    }

    #[test]
    fn maximal_entanglement_pins_berry_to_zero(p in params()) {
        // 1 − C = (a ± c)², hence |γ| ≤ 2π√2·√(1 − C). The floor absorbs
        // the rounding of 1 − C near maximal entanglement.
        for t in spectrum::solve(&p).unwrap().triplets.iter() {
            let c = concurrence(t);
            prop_assert!((0.0..=1.0).contains(&c));
            let bound = TAU * 2f64.sqrt() * (1.0 - c + 1e-14).sqrt();
            prop_assert!(berry_phase_unchecked(t).abs() <= bound + 1e-9);
        }
    }

    #[test]
    fn shifting_both_couplings_moves_energies_only(p in params(), shift in -10.0f64..10.0) {
        // E = ε + J_z with ε a function of J_x − J_z: adding the same shift to
        // both couplings moves triplet energies by it and leaves the states.
        let q = ModelParams::new(p.j_x() + shift, p.j_z() + shift, p.b0(), p.theta()).unwrap();
        let (sp, sq) = (spectrum::solve(&p).unwrap(), spectrum::solve(&q).unwrap());
        let tol = 1e-10 * p.scale().max(q.scale());
        for (a, b) in sp.triplets.iter().zip(sq.triplets.iter()) {
            prop_assert!((b.energy - a.energy - shift).abs() <= tol);
            if !a.degenerate {
                prop_assert!((berry_phase_unchecked(a) - berry_phase_unchecked(b)).abs() < 1e-8);
            }
        }
        prop_assert!((sq.singlet_energy - sp.singlet_energy + 3.0 * shift).abs() <= tol);
    }

    #[test]
    fn oracle_spectrum_ignores_azimuth(p in params(), phi in 0.0f64..TAU) {
        let a = split_sectors(&hamiltonian(&p, 0.0)).unwrap();
        let b = split_sectors(&hamiltonian(&p, phi)).unwrap();
        for (x, y) in a.triplet_values.iter().zip(b.triplet_values.iter()) {
            prop_assert!((x - y).abs() <= 1e-10 * p.scale());
        }
        let h = hamiltonian(&p, phi);
        prop_assert!(residual(&h, &StateVector::singlet(), a.singlet_energy) <= 1e-12 * h.frobenius_norm());
    }

    #[test]
    fn jacobi_diagonalizes_random_hermitian(
        diag in prop::array::uniform4(-100.0f64..100.0),
        off in prop::array::uniform6((-100.0f64..100.0, -100.0f64..100.0)),
    ) {
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        let mut k = 0;
        for i in 0..4 {
            m[i][i] = Complex64::new(diag[i], 0.0);
            for j in i + 1..4 {
                m[i][j] = Complex64::new(off[k].0, off[k].1);
                k += 1;
            }
        }
        let h = HermitianMatrix4::from_upper(m);
        let eig = eigh(&h).unwrap();
        prop_assert!(eig.residual <= 1e-11 * h.frobenius_norm().max(1.0));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = diag.iter().sum();
        prop_assert!((eig.values.iter().sum::<f64>() - trace).abs() <= 1e-10 * h.frobenius_norm().max(1.0));
        for i in 0..4 {
            for j in 0..4 {
                let g = eig.vectors[i].inner(&eig.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn records_round_trip_through_csv(p in params()) {
        let records = OutputRecord::all_levels(&spectrum::solve(&p).unwrap());
        let mut buf = Vec::new();
        sweep::write_csv(&records, &mut buf).unwrap();
        let back = sweep::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn records_round_trip_through_json(p in params()) {
        let records = OutputRecord::all_levels(&spectrum::solve(&p).unwrap());
        let mut buf = Vec::new();
        sweep::write_json(&records, &mut buf).unwrap();
        let back: Vec<OutputRecord> = serde_json::from_slice(&buf).unwrap();
        prop_assert_eq!(back, records);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn check_is_deterministic(seed in any::<u64>()) {
        let cfg = check::CheckConfig { samples: 32, seed, ..Default::default() };
        prop_assert_eq!(check::run(&cfg).unwrap(), check::run(&cfg).unwrap());
    }
}
